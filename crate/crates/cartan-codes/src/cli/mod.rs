//! Command-line surface: `search`, `sweep`, `verify`, and `circuit`
//! subcommands over JSON configs, with CSV/JSON/SVG outputs and a run
//! manifest. Exit codes: 0 success, 2 configuration/usage errors,
//! 3 numeric/IO failures, 4 internal cross-check failures.

mod svg;

use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Parser, Subcommand};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::cartan::ParamsFile;
use crate::channels::NoiseSpec;
use crate::circuits::{
    SYNTH_TOL, emit_circuit_text, structured_encoder_target, synth_structured_encoder,
    up_to_phase_distance,
};
use crate::error::{Error, Result};
use crate::numerics::{CMatrix, fmt_sig};
use crate::qec::{Code, CodeFile, PETZ_REL_TOL, fidelity_loss, grid_oracle, petz_recovery};
use crate::search::{SearchConfig, SearchMode, SearchResult, SweepPlan, search_code, sweep};

/// Channel-adapted quantum code search over Cartan-parameterized encodings.
#[derive(Parser, Debug)]
#[command(name = "cartan-codes", version, about)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run one multi-restart code search from a JSON config.
    Search {
        /// Path to the JSON run configuration.
        #[arg(long)]
        config: PathBuf,
        /// Directory for result.json, code.json, manifest.json.
        #[arg(long)]
        out_dir: PathBuf,
        /// Overrides the config seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Caps the worker thread count.
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Sweep a noise-strength grid, tabulating searches and baselines.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        /// Directory for sweep.csv, sweep.svg, manifest.json.
        #[arg(long)]
        out_dir: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        jobs: Option<usize>,
        /// Skip the SVG plot.
        #[arg(long)]
        no_svg: bool,
    },
    /// Check a known or serialized code against both fidelity-loss routes.
    Verify {
        /// Known code name (approx3, approx4, five_qubit_513, u3, s3, u4,
        /// s4, trivial<n>) or a path to a code JSON file.
        code: String,
        /// Noise spec: inline JSON or a path to a JSON file.
        #[arg(long)]
        noise: String,
        /// Grid points for the direct-minimization route.
        #[arg(long, default_value_t = 4000)]
        grid_points: usize,
    },
    /// Synthesize and verify a 3-qubit structured encoder circuit.
    Circuit {
        /// Path to the encoder parameters (angles or a parameter vector).
        #[arg(long)]
        params: PathBuf,
        /// Directory for encoder.qasm, circuit_report.json, manifest.json.
        #[arg(long)]
        out_dir: PathBuf,
    },
}

fn default_restarts() -> usize {
    20
}

fn default_hop_scale() -> f64 {
    0.35
}

fn default_true() -> bool {
    true
}

/// Convergence and budget knobs; all optional in the file.
#[derive(Serialize, Deserialize, Clone, Debug)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    #[serde(default = "Tolerances::default_f_tol")]
    pub f_tol: f64,
    #[serde(default = "Tolerances::default_x_tol")]
    pub x_tol: f64,
    #[serde(default = "Tolerances::default_init_scale")]
    pub init_scale: f64,
    /// Per-stage iteration cap; 0 selects 5000 x parameter-count.
    #[serde(default)]
    pub max_iters: usize,
}

impl Tolerances {
    fn default_f_tol() -> f64 {
        1e-10
    }
    fn default_x_tol() -> f64 {
        1e-8
    }
    fn default_init_scale() -> f64 {
        std::f64::consts::PI
    }
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            f_tol: Self::default_f_tol(),
            x_tol: Self::default_x_tol(),
            init_scale: Self::default_init_scale(),
            max_iters: 0,
        }
    }
}

/// The sweep-specific part of a config file.
#[derive(Serialize, Deserialize, Clone, Debug)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    /// Which noise parameter the grid varies: `gamma` for the damping
    /// families, `alpha` for the random-admixture family.
    pub parameter: String,
    pub grid: Vec<f64>,
    /// Modes searched per row; defaults to the top-level mode.
    #[serde(default)]
    pub modes: Vec<SearchMode>,
    /// Fixed codes evaluated per row by name.
    #[serde(default)]
    pub baselines: Vec<String>,
    /// Include the unencoded single-qubit squared-fidelity column.
    #[serde(default = "default_true")]
    pub unencoded: bool,
}

/// On-disk run configuration for `search` and `sweep`.
#[derive(Serialize, Deserialize, Clone, Debug)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub noise: NoiseSpec,
    pub n_qubits: usize,
    pub mode: SearchMode,
    #[serde(default = "default_restarts")]
    pub restarts: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub tolerances: Tolerances,
    /// Extra kicked descent stages per restart (see search docs).
    #[serde(default)]
    pub hops: usize,
    #[serde(default = "default_hop_scale")]
    pub hop_scale: f64,
    /// Row-major 2x2 `[re, im]` unitary for the fixed-local mode.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fixed_local: Option<[[[f64; 2]; 2]; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSection>,
}

fn mat2_from_entries(rows: &[[[f64; 2]; 2]; 2]) -> CMatrix {
    CMatrix::from_fn(2, 2, |i, j| Complex64::new(rows[i][j][0], rows[i][j][1]))
}

impl FileConfig {
    /// Builds the library-level search config (for the file's own mode).
    pub fn to_search_config(&self) -> Result<SearchConfig> {
        let mut cfg = SearchConfig::new(self.n_qubits, self.mode, self.noise.clone());
        cfg.restarts = self.restarts;
        cfg.seed = self.seed;
        cfg.f_tol = self.tolerances.f_tol;
        cfg.x_tol = self.tolerances.x_tol;
        cfg.init_scale = self.tolerances.init_scale;
        cfg.max_iters = self.tolerances.max_iters;
        cfg.hops = self.hops;
        cfg.hop_scale = self.hop_scale;
        cfg.fixed_local = self.fixed_local.as_ref().map(mat2_from_entries);
        // In search runs a fixed_local matrix only makes sense for the
        // fixed-local mode, but sweeps may carry it for their fixed-local
        // column while the template mode differs; the per-mode plumbing
        // strips it where unused.
        if self.mode != SearchMode::StructuredFixedLocal && self.sweep.is_none() {
            if cfg.fixed_local.is_some() {
                return Err(Error::Config(
                    "fixed_local is only used by mode structured_fixed_local".into(),
                ));
            }
        }
        Ok(cfg)
    }

    fn sweep_plan(&self) -> Result<SweepPlan> {
        let section = self.sweep.as_ref().ok_or_else(|| {
            Error::Config("config has no `sweep` section; nothing to sweep".into())
        })?;
        let expected_param = match self.noise.family {
            crate::channels::NoiseFamily::AmplitudeDamping
            | crate::channels::NoiseFamily::RotatedAd => "gamma",
            crate::channels::NoiseFamily::RandomAdmixed => "alpha",
        };
        if section.parameter != expected_param {
            return Err(Error::Config(format!(
                "sweep.parameter is '{}' but the {} family sweeps '{}'",
                section.parameter,
                self.noise.family.name(),
                expected_param
            )));
        }
        let mut base = self.to_search_config()?;
        let modes = if section.modes.is_empty() {
            vec![self.mode]
        } else {
            section.modes.clone()
        };
        if modes.contains(&SearchMode::StructuredFixedLocal) && base.fixed_local.is_none() {
            return Err(Error::Config(
                "sweep requests structured_fixed_local but no fixed_local matrix is configured"
                    .into(),
            ));
        }
        if !modes.contains(&SearchMode::StructuredFixedLocal) {
            base.fixed_local = None;
        }
        // The template's own mode: use the first swept mode so validation
        // matches what actually runs.
        base.mode = modes[0];
        Ok(SweepPlan {
            base,
            grid: section.grid.clone(),
            modes,
            baselines: section.baselines.clone(),
            unencoded: section.unencoded,
        })
    }
}

/// `result.json` payload: everything needed to reproduce and re-check the
/// search outcome. Failed restarts appear as nulls in `eta_history`.
#[derive(Serialize, Deserialize, Debug)]
pub struct ResultFile {
    pub eta: f64,
    pub params: ParamsFile,
    pub worst_state: [[f64; 2]; 2],
    pub worst_bloch: [f64; 3],
    pub iterations: u64,
    pub restarts_used: usize,
    pub eta_history: Vec<Option<f64>>,
    pub warnings: Vec<String>,
}

impl ResultFile {
    fn from_result(r: &SearchResult, cfg: &SearchConfig) -> Result<ResultFile> {
        let mode = cfg.build_mode()?;
        Ok(ResultFile {
            eta: r.eta,
            params: ParamsFile::new(cfg.n_qubits, &mode, r.params.clone()),
            worst_state: [
                [r.loss.worst_state[0].re, r.loss.worst_state[0].im],
                [r.loss.worst_state[1].re, r.loss.worst_state[1].im],
            ],
            worst_bloch: r.loss.worst_bloch,
            iterations: r.iterations,
            restarts_used: r.restarts_used,
            eta_history: r
                .eta_history
                .iter()
                .map(|v| v.is_finite().then_some(*v))
                .collect(),
            warnings: r.warnings.clone(),
        })
    }
}

#[derive(Serialize, Debug)]
struct Manifest {
    command: String,
    config: serde_json::Value,
    seed: u64,
    version: String,
    started_unix: u64,
    finished_unix: u64,
    outputs: Vec<String>,
}

fn unix_now() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

/// Reads and parses an input JSON file; all failures (missing file, bad
/// JSON, schema mismatch) are configuration errors with the serde line /
/// column diagnostic attached.
fn read_input_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read {}: {}", path.display(), e)))?;
    serde_json::from_str(&text)
        .map_err(|e| Error::Config(format!("{}: {}", path.display(), e)))
}

fn write_output(
    dir: &Path,
    name: &str,
    contents: &str,
    outputs: &mut Vec<String>,
) -> Result<PathBuf> {
    let path = dir.join(name);
    std::fs::write(&path, contents)?;
    outputs.push(path.display().to_string());
    Ok(path)
}

fn configure_jobs(jobs: Option<usize>) -> Result<()> {
    if let Some(j) = jobs {
        if j == 0 {
            return Err(Error::InvalidArgument("--jobs must be at least 1".into()));
        }
        // Ignore the error if a global pool already exists (tests call
        // commands repeatedly in one process).
        let _ = rayon::ThreadPoolBuilder::new().num_threads(j).build_global();
    }
    Ok(())
}

fn load_config(path: &Path, seed_override: Option<u64>) -> Result<FileConfig> {
    let mut file_cfg: FileConfig = read_input_json(path)?;
    if let Some(s) = seed_override {
        file_cfg.seed = s;
    }
    Ok(file_cfg)
}

/// `search`: runs the configured search and writes result, code, and
/// manifest files.
pub fn cmd_search(
    config_path: &Path,
    out_dir: &Path,
    seed_override: Option<u64>,
    jobs: Option<usize>,
) -> Result<()> {
    configure_jobs(jobs)?;
    let started = unix_now();
    let file_cfg = load_config(config_path, seed_override)?;
    if file_cfg.sweep.is_some() {
        return Err(Error::Config(
            "config contains a `sweep` section; use the sweep subcommand".into(),
        ));
    }
    let cfg = file_cfg.to_search_config()?;
    let result = search_code(&cfg)?;
    let result_file = ResultFile::from_result(&result, &cfg)?;
    let code_file: CodeFile = (&result.code).into();

    std::fs::create_dir_all(out_dir)?;
    let mut outputs = Vec::new();
    write_output(
        out_dir,
        "result.json",
        &to_pretty_json(&result_file)?,
        &mut outputs,
    )?;
    write_output(
        out_dir,
        "code.json",
        &to_pretty_json(&code_file)?,
        &mut outputs,
    )?;
    let manifest = Manifest {
        command: "search".into(),
        config: serde_json::to_value(&file_cfg)?,
        seed: cfg.seed,
        version: env!("CARGO_PKG_VERSION").into(),
        started_unix: started,
        finished_unix: unix_now(),
        outputs: outputs.clone(),
    };
    write_output(
        out_dir,
        "manifest.json",
        &to_pretty_json(&manifest)?,
        &mut Vec::new(),
    )?;
    for w in &result.warnings {
        eprintln!("warning: {}", w);
    }
    println!(
        "eta = {} ({} restarts, {} iterations, {:.1}s)",
        fmt_sig(result.eta, 12),
        result.restarts_used,
        result.iterations,
        result.wall_time_seconds
    );
    println!(
        "worst-case Bloch direction: ({:.6}, {:.6}, {:.6})",
        result.loss.worst_bloch[0], result.loss.worst_bloch[1], result.loss.worst_bloch[2]
    );
    println!("wrote {}", out_dir.join("result.json").display());
    Ok(())
}

/// `sweep`: evaluates the grid and writes CSV (+ SVG) and manifest.
pub fn cmd_sweep(
    config_path: &Path,
    out_dir: &Path,
    seed_override: Option<u64>,
    jobs: Option<usize>,
    no_svg: bool,
) -> Result<()> {
    configure_jobs(jobs)?;
    let started = unix_now();
    let file_cfg = load_config(config_path, seed_override)?;
    let plan = file_cfg.sweep_plan()?;
    let table = sweep(&plan)?;
    for w in &table.warnings {
        eprintln!("warning: {}", w);
    }

    std::fs::create_dir_all(out_dir)?;
    let mut outputs = Vec::new();
    write_output(out_dir, "sweep.csv", &table.to_csv(), &mut outputs)?;
    if !no_svg {
        let title = format!(
            "{} sweep, n = {}",
            file_cfg.noise.family.name(),
            file_cfg.n_qubits
        );
        write_output(
            out_dir,
            "sweep.svg",
            &svg::render_sweep_svg(&table, &title),
            &mut outputs,
        )?;
    }
    let manifest = Manifest {
        command: "sweep".into(),
        config: serde_json::to_value(&file_cfg)?,
        seed: plan.base.seed,
        version: env!("CARGO_PKG_VERSION").into(),
        started_unix: started,
        finished_unix: unix_now(),
        outputs: outputs.clone(),
    };
    write_output(
        out_dir,
        "manifest.json",
        &to_pretty_json(&manifest)?,
        &mut Vec::new(),
    )?;
    println!(
        "wrote {} ({} rows x {} columns)",
        out_dir.join("sweep.csv").display(),
        table.rows.len(),
        table.columns.len() + 1
    );
    if table.all_failed() {
        return Err(Error::Numeric(
            "every sweep cell failed; see warnings above".into(),
        ));
    }
    Ok(())
}

fn resolve_code_argument(arg: &str) -> Result<(String, Code)> {
    match crate::qec::resolve_code(arg) {
        Ok(code) => Ok((arg.to_string(), code)),
        Err(name_err) => {
            let path = Path::new(arg);
            if path.exists() {
                let file: CodeFile = read_input_json(path)?;
                Ok((path.display().to_string(), file.into_code()?))
            } else {
                Err(Error::Config(format!(
                    "'{}' is neither a known code name nor an existing file ({})",
                    arg, name_err
                )))
            }
        }
    }
}

fn parse_noise_argument(arg: &str) -> Result<NoiseSpec> {
    let path = Path::new(arg);
    let spec: NoiseSpec = if path.exists() {
        read_input_json(path)?
    } else {
        serde_json::from_str(arg)
            .map_err(|e| Error::Config(format!("--noise is neither a file nor valid JSON: {}", e)))?
    };
    spec.validate()?;
    Ok(spec)
}

/// Tolerated disagreement between the two fidelity-loss routes before
/// `verify` reports an internal inconsistency.
pub const VERIFY_GAP_TOL: f64 = 1e-3;

/// `verify`: evaluates one code under one noise spec through both the
/// eigenvalue formula and the direct grid minimization and reports the gap.
pub fn cmd_verify(code_arg: &str, noise_arg: &str, grid_points: usize) -> Result<()> {
    let (label, code) = resolve_code_argument(code_arg)?;
    let noise = parse_noise_argument(noise_arg)?;
    let channel = crate::search::searched_channel(&noise, code.n_qubits())?;
    let loss = fidelity_loss(&channel, &code)?;
    let recovery = petz_recovery(&channel, &code, PETZ_REL_TOL)?;
    let eta_grid = grid_oracle(&channel, &code, Some(&recovery), grid_points)?;
    let gap = (loss.eta - eta_grid).abs();

    println!("code: {} (n = {})", label, code.n_qubits());
    println!("noise: {}", serde_json::to_string(&noise)?);
    println!("orthonormality residual: {:.3e}", code.orthonormality_residual());
    println!("eta (eigenvalue formula): {}", fmt_sig(loss.eta, 12));
    println!("eta (grid oracle):        {}", fmt_sig(eta_grid, 12));
    println!("gap:                      {:.3e}", gap);
    println!(
        "worst-case logical state: ({:.6}{:+.6}i)|0L> + ({:.6}{:+.6}i)|1L>",
        loss.worst_state[0].re,
        loss.worst_state[0].im,
        loss.worst_state[1].re,
        loss.worst_state[1].im
    );
    println!(
        "worst-case Bloch vector:  ({:.6}, {:.6}, {:.6})",
        loss.worst_bloch[0], loss.worst_bloch[1], loss.worst_bloch[2]
    );
    if gap > VERIFY_GAP_TOL {
        return Err(Error::Inconsistency(format!(
            "fidelity-loss routes disagree by {:.3e} (tolerance {:.1e})",
            gap, VERIFY_GAP_TOL
        )));
    }
    println!("PASS: both routes agree within {:.1e}", VERIFY_GAP_TOL);
    Ok(())
}

/// Direct angle form of a 3-qubit structured encoder.
#[derive(Serialize, Deserialize, Debug)]
#[serde(deny_unknown_fields)]
pub struct EncoderAngles {
    pub a: [f64; 4],
    pub c1: [f64; 3],
    pub c2: [f64; 3],
}

/// Offsets of the coupling groups inside a 22-entry nonlocal-only n=3
/// vector (layout K1 F1 K2 J K3 F2 K4 with 3-entry nested couplings).
const N3_NONLOCAL_LAYOUT: [(usize, usize); 7] = [
    (0, 3),   // K1 nested couplings
    (3, 6),   // F1
    (6, 9),   // K2 nested couplings
    (9, 13),  // J
    (13, 16), // K3 nested couplings
    (16, 19), // F2
    (19, 22), // K4 nested couplings
];

fn angles_from_params_file(pf: &ParamsFile) -> Result<EncoderAngles> {
    if pf.n != 3 {
        return Err(Error::InvalidArgument(format!(
            "circuit synthesis supports only 3-qubit structured encoders, got n = {}",
            pf.n
        )));
    }
    if pf.mode != "nonlocal_only" {
        return Err(Error::InvalidArgument(format!(
            "circuit synthesis needs nonlocal_only parameters, got mode '{}'",
            pf.mode
        )));
    }
    if pf.params.len() != 22 {
        return Err(Error::InvalidArgument(format!(
            "nonlocal_only n=3 takes 22 parameters, got {}",
            pf.params.len()
        )));
    }
    for (slot, &(lo, hi)) in N3_NONLOCAL_LAYOUT.iter().enumerate() {
        let nested = matches!(slot, 0 | 2 | 4 | 6);
        if nested {
            for (i, &v) in pf.params[lo..hi].iter().enumerate() {
                if v.abs() > 1e-12 {
                    return Err(Error::InvalidArgument(format!(
                        "parameter {} is a nested two-qubit coupling ({:.3e} != 0); only pure F1 J F2 encoders have circuits",
                        lo + i,
                        v
                    )));
                }
            }
        }
    }
    let grab = |range: (usize, usize)| pf.params[range.0..range.1].to_vec();
    let c1v = grab(N3_NONLOCAL_LAYOUT[1]);
    let av = grab(N3_NONLOCAL_LAYOUT[3]);
    let c2v = grab(N3_NONLOCAL_LAYOUT[5]);
    Ok(EncoderAngles {
        a: [av[0], av[1], av[2], av[3]],
        c1: [c1v[0], c1v[1], c1v[2]],
        c2: [c2v[0], c2v[1], c2v[2]],
    })
}

/// Either accepted on-disk form of circuit parameters.
#[derive(Deserialize)]
#[serde(untagged)]
enum CircuitParamsFile {
    Angles(EncoderAngles),
    Params(ParamsFile),
}

#[derive(Serialize, Debug)]
struct CircuitReport {
    width: usize,
    gate_count: usize,
    rz_count: usize,
    distance_to_target: f64,
    a: [f64; 4],
    c1: [f64; 3],
    c2: [f64; 3],
}

/// `circuit`: synthesizes the encoder, verifies it against the exact
/// matrix product, and writes the circuit text plus a report.
pub fn cmd_circuit(params_path: &Path, out_dir: &Path) -> Result<()> {
    let started = unix_now();
    let parsed: CircuitParamsFile = read_input_json(params_path)?;
    let angles = match &parsed {
        CircuitParamsFile::Angles(a) => EncoderAngles {
            a: a.a,
            c1: a.c1,
            c2: a.c2,
        },
        CircuitParamsFile::Params(pf) => angles_from_params_file(pf)?,
    };
    for v in angles
        .a
        .iter()
        .chain(angles.c1.iter())
        .chain(angles.c2.iter())
    {
        if !v.is_finite() {
            return Err(Error::Config("encoder angles must be finite".into()));
        }
    }
    let circuit = synth_structured_encoder(angles.a, angles.c1, angles.c2)?;
    let target = structured_encoder_target(angles.a, angles.c1, angles.c2)?;
    let distance = up_to_phase_distance(&circuit.unitary(), &target);
    if distance > SYNTH_TOL {
        return Err(Error::Inconsistency(format!(
            "synthesized circuit is {:.3e} from its target (tolerance {:.1e})",
            distance, SYNTH_TOL
        )));
    }
    let report = CircuitReport {
        width: circuit.width(),
        gate_count: circuit.gates().len(),
        rz_count: circuit
            .gates()
            .iter()
            .filter(|g| matches!(g, crate::circuits::Gate::Rz { .. }))
            .count(),
        distance_to_target: distance,
        a: angles.a,
        c1: angles.c1,
        c2: angles.c2,
    };

    std::fs::create_dir_all(out_dir)?;
    let mut outputs = Vec::new();
    write_output(out_dir, "encoder.qasm", &emit_circuit_text(&circuit), &mut outputs)?;
    write_output(
        out_dir,
        "circuit_report.json",
        &to_pretty_json(&report)?,
        &mut outputs,
    )?;
    let manifest = Manifest {
        command: "circuit".into(),
        config: serde_json::json!({
            "params_path": params_path.display().to_string(),
            "a": angles.a,
            "c1": angles.c1,
            "c2": angles.c2,
        }),
        seed: 0,
        version: env!("CARGO_PKG_VERSION").into(),
        started_unix: started,
        finished_unix: unix_now(),
        outputs: outputs.clone(),
    };
    write_output(
        out_dir,
        "manifest.json",
        &to_pretty_json(&manifest)?,
        &mut Vec::new(),
    )?;
    println!(
        "{} gates ({} Rz), distance to target {:.3e}",
        report.gate_count, report.rz_count, report.distance_to_target
    );
    println!("wrote {}", out_dir.join("encoder.qasm").display());
    Ok(())
}

fn to_pretty_json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

/// Parses argv and runs; returns the process exit code.
pub fn run() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            // clap handles --help/--version with success exits itself.
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let outcome = match cli.command {
        Command::Search {
            config,
            out_dir,
            seed,
            jobs,
        } => cmd_search(&config, &out_dir, seed, jobs),
        Command::Sweep {
            config,
            out_dir,
            seed,
            jobs,
            no_svg,
        } => cmd_sweep(&config, &out_dir, seed, jobs, no_svg),
        Command::Verify {
            code,
            noise,
            grid_points,
        } => cmd_verify(&code, &noise, grid_points),
        Command::Circuit { params, out_dir } => cmd_circuit(&params, &out_dir),
    };
    match outcome {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {}", e);
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn file_config_defaults_and_rejections() {
        let cfg: FileConfig = serde_json::from_str(
            r#"{
                "noise": {"family": "amplitude_damping", "gamma": 0.1},
                "n_qubits": 3,
                "mode": "structured_trivial"
            }"#,
        )
        .unwrap();
        assert_eq!(cfg.restarts, 20);
        assert_eq!(cfg.seed, 0);
        assert_eq!(cfg.tolerances.max_iters, 0);
        assert!((cfg.tolerances.init_scale - std::f64::consts::PI).abs() < 1e-12);
        let sc = cfg.to_search_config().unwrap();
        assert_eq!(sc.restarts, 20);

        // Unknown fields are rejected.
        let bad: std::result::Result<FileConfig, _> = serde_json::from_str(
            r#"{
                "noise": {"family": "amplitude_damping", "gamma": 0.1},
                "n_qubits": 3,
                "mode": "structured_trivial",
                "surprise": 1
            }"#,
        );
        assert!(bad.is_err());

        // fixed_local without the matching mode (and no sweep) is an error.
        let cfg: FileConfig = serde_json::from_str(
            r#"{
                "noise": {"family": "amplitude_damping", "gamma": 0.1},
                "n_qubits": 3,
                "mode": "structured_trivial",
                "fixed_local": [[[0.7071067811865476,0],[0.7071067811865476,0]],
                                [[0.7071067811865476,0],[-0.7071067811865476,0]]]
            }"#,
        )
        .unwrap();
        assert!(cfg.to_search_config().is_err());
    }

    #[test]
    fn sweep_plan_validation() {
        let mk = |parameter: &str| {
            serde_json::from_str::<FileConfig>(&format!(
                r#"{{
                    "noise": {{"family": "amplitude_damping", "gamma": 0.1}},
                    "n_qubits": 3,
                    "mode": "structured_trivial",
                    "sweep": {{"parameter": "{}", "grid": [0.05, 0.1], "baselines": ["approx3"]}}
                }}"#,
                parameter
            ))
            .unwrap()
        };
        let plan = mk("gamma").sweep_plan().unwrap();
        assert_eq!(plan.modes, vec![SearchMode::StructuredTrivial]);
        assert!(plan.unencoded);
        assert!(mk("alpha").sweep_plan().is_err(), "wrong parameter name");

        let no_sweep: FileConfig = serde_json::from_str(
            r#"{
                "noise": {"family": "amplitude_damping", "gamma": 0.1},
                "n_qubits": 3,
                "mode": "structured_trivial"
            }"#,
        )
        .unwrap();
        assert!(no_sweep.sweep_plan().is_err());
    }

    #[test]
    fn encoder_angle_extraction_layout() {
        use crate::cartan::BuildMode;
        let mut params = vec![0.0; 22];
        params[3..6].copy_from_slice(&[0.1, 0.2, 0.3]); // F1
        params[9..13].copy_from_slice(&[1.0, 2.0, 3.0, 4.0]); // J
        params[16..19].copy_from_slice(&[-0.1, -0.2, -0.3]); // F2
        let pf = ParamsFile::new(3, &BuildMode::NonlocalOnly, params.clone());
        let a = angles_from_params_file(&pf).unwrap();
        assert_eq!(a.c1, [0.1, 0.2, 0.3]);
        assert_eq!(a.a, [1.0, 2.0, 3.0, 4.0]);
        assert_eq!(a.c2, [-0.1, -0.2, -0.3]);

        // A nonzero nested coupling is rejected with its index.
        let mut bad = params.clone();
        bad[6] = 0.5;
        let pf = ParamsFile::new(3, &BuildMode::NonlocalOnly, bad);
        let err = angles_from_params_file(&pf).unwrap_err();
        assert!(err.to_string().contains("parameter 6"), "{}", err);

        // Wrong n / mode rejected.
        let pf = ParamsFile::new(4, &BuildMode::NonlocalOnly, vec![0.0; 110]);
        assert!(angles_from_params_file(&pf).is_err());
        let pf = ParamsFile::new(3, &BuildMode::Full, vec![0.0; 82]);
        assert!(angles_from_params_file(&pf).is_err());
    }

    #[test]
    fn result_file_maps_nan_history_to_null() {
        use crate::channels::NoiseSpec;
        let mut cfg = SearchConfig::new(
            3,
            SearchMode::StructuredTrivial,
            NoiseSpec::amplitude_damping(0.1),
        );
        cfg.restarts = 1;
        cfg.max_iters = 200;
        let mut r = search_code(&cfg).unwrap();
        r.eta_history.push(f64::NAN);
        let rf = ResultFile::from_result(&r, &cfg).unwrap();
        assert_eq!(rf.eta_history.len(), 2);
        assert!(rf.eta_history[0].is_some());
        assert!(rf.eta_history[1].is_none());
        let json = serde_json::to_string(&rf).unwrap();
        assert!(json.contains("null"));
        let back: ResultFile = serde_json::from_str(&json).unwrap();
        assert_eq!(back.restarts_used, 1);
    }
}
