//! One-logical-qubit codes, the Petz recovery channel, and the two routes to
//! the worst-case fidelity loss: the closed-form eigenvalue formula on the
//! logical Bloch sphere and a direct grid minimization used as its
//! independent cross-check.

use serde::{Deserialize, Serialize};

use crate::channels::QuantumChannel;
use crate::error::{Error, Result};
use crate::numerics::{self, C64, CMatrix, Pauli, PauliString, hermitian_eig, spectral_map};
use crate::optim::{NmOptions, nelder_mead};

/// Default relative spectral cutoff for the recovery construction.
pub const PETZ_REL_TOL: f64 = 1e-10;

/// Orthonormality tolerance for code constructors.
const CODE_TOL: f64 = 1e-9;

/// A two-dimensional code subspace spanned by two orthonormal codewords on
/// `n_qubits` qubits. Basis convention: `|q1 q2 ... qn>` with qubit 1 the
/// most significant bit of the index.
#[derive(Clone, Debug, PartialEq)]
pub struct Code {
    n_qubits: usize,
    v1: Vec<C64>,
    v2: Vec<C64>,
}

impl Code {
    /// Validates dimensions, normalization, and orthogonality (1e-9).
    pub fn new(n_qubits: usize, v1: Vec<C64>, v2: Vec<C64>) -> Result<Self> {
        if n_qubits == 0 || n_qubits > 5 {
            return Err(Error::InvalidArgument(format!(
                "code must span 1..=5 qubits, got {}",
                n_qubits
            )));
        }
        let d = 1usize << n_qubits;
        if v1.len() != d || v2.len() != d {
            return Err(Error::InvalidArgument(format!(
                "codeword length must be {}, got {} and {}",
                d,
                v1.len(),
                v2.len()
            )));
        }
        for z in v1.iter().chain(v2.iter()) {
            if !z.re.is_finite() || !z.im.is_finite() {
                return Err(Error::InvalidArgument("codeword entries must be finite".into()));
            }
        }
        let n1 = numerics::norm(&v1);
        let n2 = numerics::norm(&v2);
        let ovl = numerics::inner(&v1, &v2).norm();
        if (n1 - 1.0).abs() > CODE_TOL || (n2 - 1.0).abs() > CODE_TOL || ovl > CODE_TOL {
            return Err(Error::InvalidArgument(format!(
                "codewords are not orthonormal: |v1| - 1 = {:.3e}, |v2| - 1 = {:.3e}, |<v1|v2>| = {:.3e}",
                n1 - 1.0,
                n2 - 1.0,
                ovl
            )));
        }
        Ok(Code { n_qubits, v1, v2 })
    }

    /// Orthonormalizes (Gram-Schmidt) before constructing; for inputs known
    /// only to a few printed digits.
    pub fn new_renormalized(n_qubits: usize, v1: Vec<C64>, v2: Vec<C64>) -> Result<Self> {
        let n1 = numerics::norm(&v1);
        if n1 < 1e-12 {
            return Err(Error::InvalidArgument("first codeword is numerically zero".into()));
        }
        let w1: Vec<C64> = v1.iter().map(|z| z / n1).collect();
        let proj = numerics::inner(&w1, &v2);
        let mut w2: Vec<C64> = v2
            .iter()
            .zip(&w1)
            .map(|(b, a)| b - proj * a)
            .collect();
        let n2 = numerics::norm(&w2);
        if n2 < 1e-12 {
            return Err(Error::InvalidArgument(
                "codewords are numerically parallel".into(),
            ));
        }
        for z in w2.iter_mut() {
            *z /= n2;
        }
        Code::new(n_qubits, w1, w2)
    }

    /// The trivial (unencoded) code `{|0...0>, |0...01>}`.
    pub fn trivial(n_qubits: usize) -> Code {
        let d = 1usize << n_qubits;
        let mut v1 = vec![C64::new(0.0, 0.0); d];
        let mut v2 = vec![C64::new(0.0, 0.0); d];
        v1[0] = C64::new(1.0, 0.0);
        v2[1] = C64::new(1.0, 0.0);
        Code { n_qubits, v1, v2 }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        1usize << self.n_qubits
    }

    pub fn v1(&self) -> &[C64] {
        &self.v1
    }

    pub fn v2(&self) -> &[C64] {
        &self.v2
    }

    /// The d x 2 isometry whose columns are the codewords.
    pub fn basis_matrix(&self) -> CMatrix {
        let d = self.dim();
        CMatrix::from_fn(d, 2, |i, j| if j == 0 { self.v1[i] } else { self.v2[i] })
    }

    /// The projector onto the code subspace, `P = |v1><v1| + |v2><v2|`.
    pub fn projector(&self) -> CMatrix {
        let d = self.dim();
        CMatrix::from_fn(d, d, |i, j| {
            self.v1[i] * self.v1[j].conj() + self.v2[i] * self.v2[j].conj()
        })
    }

    /// Embeds a logical state `a|0_L> + b|1_L>`.
    pub fn logical_to_physical(&self, logical: [C64; 2]) -> Vec<C64> {
        self.v1
            .iter()
            .zip(&self.v2)
            .map(|(a, b)| logical[0] * a + logical[1] * b)
            .collect()
    }

    /// Largest deviation from orthonormality (for verification reports).
    pub fn orthonormality_residual(&self) -> f64 {
        let n1 = (numerics::norm(&self.v1) - 1.0).abs();
        let n2 = (numerics::norm(&self.v2) - 1.0).abs();
        let ovl = numerics::inner(&self.v1, &self.v2).norm();
        n1.max(n2).max(ovl)
    }
}

/// Serialization form of a code: `[re, im]` pairs per amplitude.
#[derive(Serialize, Deserialize)]
pub struct CodeFile {
    pub n_qubits: usize,
    pub v1: Vec<[f64; 2]>,
    pub v2: Vec<[f64; 2]>,
}

impl From<&Code> for CodeFile {
    fn from(c: &Code) -> CodeFile {
        CodeFile {
            n_qubits: c.n_qubits,
            v1: c.v1.iter().map(|z| [z.re, z.im]).collect(),
            v2: c.v2.iter().map(|z| [z.re, z.im]).collect(),
        }
    }
}

impl CodeFile {
    pub fn into_code(self) -> Result<Code> {
        let conv = |v: Vec<[f64; 2]>| -> Vec<C64> {
            v.into_iter().map(|[re, im]| C64::new(re, im)).collect()
        };
        Code::new(self.n_qubits, conv(self.v1), conv(self.v2))
    }
}

fn basis_vec(n_qubits: usize, terms: &[(usize, C64)]) -> Vec<C64> {
    let mut v = vec![C64::new(0.0, 0.0); 1 << n_qubits];
    for &(idx, amp) in terms {
        v[idx] += amp;
    }
    v
}

/// The 3-qubit approximate amplitude-damping code
/// `{(|000> + |111>)/sqrt2, (|100> + |011>)/sqrt2}`.
pub fn approx3() -> Code {
    let s = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    Code::new(
        3,
        basis_vec(3, &[(0b000, s), (0b111, s)]),
        basis_vec(3, &[(0b100, s), (0b011, s)]),
    )
    .expect("static code")
}

/// The 4-qubit approximate amplitude-damping code
/// `{(|0000> + |1111>)/sqrt2, (|1100> + |0011>)/sqrt2}`.
pub fn approx4() -> Code {
    let s = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    Code::new(
        4,
        basis_vec(4, &[(0b0000, s), (0b1111, s)]),
        basis_vec(4, &[(0b1100, s), (0b0011, s)]),
    )
    .expect("static code")
}

/// The five-qubit [[5,1,3]] code from its cyclic stabilizer generators
/// XZZXI, IXZZX, XIXZZ, ZXIXZ: `|0_L>` is the normalized sum of the
/// 16 stabilizer-group images of `|00000>`, and `|1_L> = XXXXX |0_L>`.
pub fn five_qubit_513() -> Code {
    let gens: Vec<PauliString> = ["XZZXI", "IXZZX", "XIXZZ", "ZXIXZ"]
        .iter()
        .map(|s| PauliString::parse(s).expect("static string"))
        .collect();
    let mut v1 = vec![C64::new(0.0, 0.0); 32];
    for mask in 0..16u32 {
        let mut idx = 0usize;
        let mut phase = C64::new(1.0, 0.0);
        for (b, g) in gens.iter().enumerate() {
            if (mask >> b) & 1 == 1 {
                let (nidx, ph) = g.apply_to_basis(idx);
                idx = nidx;
                phase *= ph;
            }
        }
        v1[idx] += phase;
    }
    let n = numerics::norm(&v1);
    for z in v1.iter_mut() {
        *z /= n;
    }
    let logical_x = PauliString::parse("XXXXX").expect("static string");
    let mut v2 = vec![C64::new(0.0, 0.0); 32];
    for (idx, amp) in v1.iter().enumerate() {
        if amp.norm() > 0.0 {
            let (nidx, ph) = logical_x.apply_to_basis(idx);
            v2[nidx] += ph * amp;
        }
    }
    Code::new(5, v1, v2).expect("static code")
}

/// Numerically optimized amplitude-damping codes transcribed from published
/// three-decimal tables: unstructured/structured 3- and 4-qubit variants.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ReferenceCode {
    U3,
    S3,
    U4,
    S4,
}

const U3_V1: [(f64, f64); 8] = [
    (-0.426, 0.235),
    (0.040, -0.415),
    (0.014, 0.084),
    (-0.312, 0.323),
    (0.021, 0.278),
    (0.089, 0.167),
    (-0.303, 0.038),
    (-0.403, 0.108),
];
const U3_V2: [(f64, f64); 8] = [
    (0.275, 0.103),
    (0.248, 0.191),
    (0.116, -0.116),
    (0.008, -0.194),
    (0.429, 0.266),
    (-0.066, -0.269),
    (-0.086, 0.305),
    (-0.488, -0.285),
];
const S3_V1: [(f64, f64); 8] = [
    (-0.013, 0.076),
    (-0.587, 0.370),
    (0.0, 0.0),
    (0.0, 0.0),
    (0.0, 0.0),
    (0.0, 0.0),
    (0.026, 0.052),
    (0.385, 0.601),
];
const S3_V2: [(f64, f64); 8] = [
    (0.0, 0.0),
    (0.0, 0.0),
    (-0.152, 0.056),
    (-0.330, -0.177),
    (0.491, 0.763),
    (-0.044, -0.095),
    (0.0, 0.0),
    (0.0, 0.0),
];
const U4_V1: [(f64, f64); 16] = [
    (0.448, 0.236),
    (-0.066, 0.134),
    (-0.052, 0.003),
    (-0.044, -0.027),
    (-0.037, 0.058),
    (0.313, 0.048),
    (-0.338, -0.057),
    (0.001, -0.060),
    (0.006, -0.114),
    (-0.310, -0.088),
    (-0.356, -0.073),
    (0.020, -0.004),
    (0.059, -0.004),
    (0.041, -0.002),
    (-0.038, 0.040),
    (0.412, 0.250),
];
const U4_V2: [(f64, f64); 16] = [
    (0.379, -0.350),
    (-0.012, 0.001),
    (-0.040, 0.042),
    (0.027, -0.038),
    (0.038, -0.024),
    (-0.170, 0.292),
    (0.191, -0.321),
    (0.027, -0.053),
    (0.031, -0.041),
    (0.200, -0.276),
    (0.210, -0.290),
    (0.027, 0.077),
    (-0.014, 0.033),
    (0.098, 0.013),
    (0.022, 0.026),
    (0.356, -0.276),
];
const S4_V1: [(f64, f64); 16] = [
    (0.580, -0.352),
    (0.026, -0.210),
    (0.027, 0.040),
    (-0.001, 0.042),
    (0.0, 0.0),
    (0.0, 0.0),
    (0.0, 0.0),
    (0.0, 0.0),
    (0.0, 0.0),
    (0.0, 0.0),
    (0.0, 0.0),
    (0.0, 0.0),
    (-0.014, 0.030),
    (-0.056, 0.025),
    (0.134, -0.166),
    (0.048, 0.662),
];
const S4_V2: [(f64, f64); 16] = [
    (0.0, 0.0),
    (0.0, 0.0),
    (0.0, 0.0),
    (0.0, 0.0),
    (0.186, 0.028),
    (-0.353, 0.178),
    (-0.434, -0.017),
    (-0.099, 0.059),
    (-0.191, 0.123),
    (0.071, -0.511),
    (-0.346, 0.379),
    (0.051, 0.157),
    (0.0, 0.0),
    (0.0, 0.0),
    (0.0, 0.0),
    (0.0, 0.0),
];

fn to_c64(t: &[(f64, f64)]) -> Vec<C64> {
    t.iter().map(|&(re, im)| C64::new(re, im)).collect()
}

/// Raw transcribed amplitudes (three decimals, not exactly orthonormal).
pub fn reference_code_raw(which: ReferenceCode) -> (usize, Vec<C64>, Vec<C64>) {
    match which {
        ReferenceCode::U3 => (3, to_c64(&U3_V1), to_c64(&U3_V2)),
        ReferenceCode::S3 => (3, to_c64(&S3_V1), to_c64(&S3_V2)),
        ReferenceCode::U4 => (4, to_c64(&U4_V1), to_c64(&U4_V2)),
        ReferenceCode::S4 => (4, to_c64(&S4_V1), to_c64(&S4_V2)),
    }
}

/// Transcribed code after Gram-Schmidt re-orthonormalization.
pub fn reference_code(which: ReferenceCode) -> Code {
    let (n, v1, v2) = reference_code_raw(which);
    Code::new_renormalized(n, v1, v2).expect("static reference code")
}

/// Looks up a code by its CLI/baseline name.
///
/// Known names: `approx3`, `approx4`, `five_qubit_513`, `u3`, `s3`, `u4`,
/// `s4`, `trivial<n>` (e.g. `trivial1`).
pub fn resolve_code(name: &str) -> Result<Code> {
    match name {
        "approx3" => Ok(approx3()),
        "approx4" => Ok(approx4()),
        "five_qubit_513" => Ok(five_qubit_513()),
        "u3" => Ok(reference_code(ReferenceCode::U3)),
        "s3" => Ok(reference_code(ReferenceCode::S3)),
        "u4" => Ok(reference_code(ReferenceCode::U4)),
        "s4" => Ok(reference_code(ReferenceCode::S4)),
        _ => {
            if let Some(ns) = name.strip_prefix("trivial") {
                if let Ok(n) = ns.parse::<usize>() {
                    if (1..=5).contains(&n) {
                        return Ok(Code::trivial(n));
                    }
                }
            }
            Err(Error::InvalidArgument(format!(
                "unknown code name '{}'; known: approx3, approx4, five_qubit_513, u3, s3, u4, s4, trivial<n>",
                name
            )))
        }
    }
}

/// The Petz (transpose) recovery channel adapted to a channel-code pair.
#[derive(Clone, Debug)]
pub struct PetzRecovery {
    /// Full-dimension recovery Kraus operators `R_i = P E_i^dagger E(P)^{-1/2}`.
    pub kraus: Vec<CMatrix>,
    /// Projector onto the support of `E(P)`.
    pub support_projector: CMatrix,
}

/// Shared spectral work for the recovery-based operations: the compressed
/// Kraus columns `W_i = E_i V`, the inverse square root `S = E(P)^{-1/2}` on
/// its support, and the support projector.
struct PetzCore {
    w: Vec<CMatrix>,
    s: CMatrix,
    support: CMatrix,
}

fn petz_core(channel: &QuantumChannel, code: &Code, rel_tol: f64) -> Result<PetzCore> {
    if channel.dim() != code.dim() {
        return Err(Error::InvalidArgument(format!(
            "channel dimension {} does not match code dimension {}",
            channel.dim(),
            code.dim()
        )));
    }
    if !(rel_tol.is_finite() && rel_tol > 0.0) {
        return Err(Error::InvalidArgument(
            "recovery rel_tol must be positive".into(),
        ));
    }
    let v = code.basis_matrix();
    let w: Vec<CMatrix> = channel.kraus().iter().map(|e| e.mul(&v)).collect();
    // E(P) = sum_i W_i W_i^dagger.
    let d = channel.dim();
    let mut ep = CMatrix::zeros(d, d);
    for wi in &w {
        for i in 0..d {
            for j in 0..d {
                let acc = wi[(i, 0)] * wi[(j, 0)].conj() + wi[(i, 1)] * wi[(j, 1)].conj();
                ep[(i, j)] += acc;
            }
        }
    }
    let (vals, vecs) = hermitian_eig(&ep)?;
    let lam_max = *vals.last().expect("non-empty spectrum");
    if lam_max < 1e-12 {
        return Err(Error::DegenerateChannel(format!(
            "E(P) is numerically zero (largest eigenvalue {:.3e})",
            lam_max
        )));
    }
    let cutoff = rel_tol * lam_max;
    let s = spectral_map(&vals, &vecs, cutoff, |l| 1.0 / l.sqrt());
    let support = spectral_map(&vals, &vecs, cutoff, |_| 1.0);
    Ok(PetzCore { w, s, support })
}

/// Builds the Petz recovery `R_i = P E_i^dagger E(P)^{-1/2}` with the
/// spectral cutoff `rel_tol` (relative to the largest eigenvalue of `E(P)`).
pub fn petz_recovery(
    channel: &QuantumChannel,
    code: &Code,
    rel_tol: f64,
) -> Result<PetzRecovery> {
    let core = petz_core(channel, code, rel_tol)?;
    let v = code.basis_matrix();
    // R_i = P E_i^dagger S = V (S W_i)^dagger, a rank-<=2 operator.
    let kraus = core
        .w
        .iter()
        .map(|wi| v.mul(&core.s.mul(wi).dagger()))
        .collect();
    Ok(PetzRecovery {
        kraus,
        support_projector: core.support,
    })
}

/// The recovered logical process `R o E o P` expressed on the code's Bloch
/// sphere: `M_ab = (1/2) Tr[sigma_a (R o E)(sigma_b)]` over the codeword
/// Pauli basis, its 3x3 rotation block, and the worst-case direction.
#[derive(Clone, Debug)]
pub struct BlochProcess {
    /// Full 4x4 transfer matrix; row and column 0 are (1, 0, 0, 0) for a
    /// trace-preserving unital process.
    pub m: [[f64; 4]; 4],
    /// The 3x3 Bloch block of `m`.
    pub t: [[f64; 3]; 3],
    /// Symmetrized block `(t + t^T) / 2` whose extreme eigenvalue governs
    /// the worst-case fidelity.
    pub t_sym: [[f64; 3]; 3],
    /// Smallest eigenvalue of `t_sym`.
    pub t_min: f64,
    /// Unit Bloch vector achieving `t_min`.
    pub worst_bloch: [f64; 3],
}

/// Tolerated imaginary / unitality residue in the transfer matrix before the
/// construction is declared inconsistent.
const M_RESIDUE_ERR: f64 = 1e-6;

/// Computes the Bloch-sphere transfer matrix of the Petz-recovered channel
/// restricted to the code subspace.
///
/// Uses the algebraic reduction to logical 2x2 operators: with `W_i = E_i V`
/// and `S = E(P)^{-1/2}`, the recovered process has logical Kraus operators
/// `K_(ji) = W_j^dagger S W_i`, and
/// `M_ab = (1/2) Tr[C_a S C_b S]` where `C_s = sum_i W_i s W_i^dagger`
/// lifts the logical Pauli `s` through the channel. One Hermitian
/// eigendecomposition per call.
pub fn effective_process(channel: &QuantumChannel, code: &Code) -> Result<BlochProcess> {
    let core = petz_core(channel, code, PETZ_REL_TOL)?;
    let d = channel.dim();

    // C_s = sum_i W_i sigma_s W_i^dagger, s = I, X, Y, Z (logical 2x2 Paulis).
    let paulis = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];
    let mut c_mats = Vec::with_capacity(4);
    for p in paulis {
        let sig = p.matrix();
        let mut c = CMatrix::zeros(d, d);
        for wi in &core.w {
            let wis = wi.mul(&sig);
            for i in 0..d {
                for j in 0..d {
                    let acc = wis[(i, 0)] * wi[(j, 0)].conj() + wis[(i, 1)] * wi[(j, 1)].conj();
                    c[(i, j)] += acc;
                }
            }
        }
        c_mats.push(c);
    }

    let mut m = [[0.0f64; 4]; 4];
    let mut worst_imag = 0.0f64;
    for b in 0..4 {
        let sb = core.s.mul(&c_mats[b]).mul(&core.s);
        for a in 0..4 {
            let z = c_mats[a].trace_mul(&sb) * 0.5;
            worst_imag = worst_imag.max(z.im.abs());
            m[a][b] = z.re;
        }
    }
    if worst_imag > M_RESIDUE_ERR {
        return Err(Error::Inconsistency(format!(
            "transfer matrix has imaginary residue {:.3e}",
            worst_imag
        )));
    }
    let mut unitality = (m[0][0] - 1.0).abs();
    for i in 1..4 {
        unitality = unitality.max(m[0][i].abs()).max(m[i][0].abs());
    }
    if unitality > M_RESIDUE_ERR {
        return Err(Error::Inconsistency(format!(
            "transfer matrix violates trace preservation/unitality by {:.3e}",
            unitality
        )));
    }

    let mut t = [[0.0f64; 3]; 3];
    let mut t_sym = [[0.0f64; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            t[i][j] = m[i + 1][j + 1];
        }
    }
    for i in 0..3 {
        for j in 0..3 {
            t_sym[i][j] = 0.5 * (t[i][j] + t[j][i]);
        }
    }

    // Extreme eigenpair of the symmetric 3x3 block.
    let ts = CMatrix::from_fn(3, 3, |i, j| C64::new(t_sym[i][j], 0.0));
    let (vals, vecs) = hermitian_eig(&ts)?;
    let t_min = vals[0];
    let col = vecs.column(0);
    let mut worst_bloch = [col[0].re, col[1].re, col[2].re];
    let nrm = worst_bloch.iter().map(|x| x * x).sum::<f64>().sqrt();
    for x in worst_bloch.iter_mut() {
        *x /= nrm;
    }

    Ok(BlochProcess {
        m,
        t,
        t_sym,
        t_min,
        worst_bloch,
    })
}

/// Worst-case fidelity loss of a code under a channel with Petz recovery.
#[derive(Clone, Debug)]
pub struct FidelityLoss {
    /// `eta = (1 - t_min) / 2`, clamped into [0, 1].
    pub eta: f64,
    /// Logical state achieving the loss, `(cos(theta/2), e^{i phi} sin(theta/2))`.
    pub worst_state: [C64; 2],
    /// Its Bloch vector.
    pub worst_bloch: [f64; 3],
    /// The underlying transfer-matrix analysis.
    pub process: BlochProcess,
}

/// Bloch vector -> logical state amplitudes.
pub fn bloch_to_state(b: [f64; 3]) -> [C64; 2] {
    let theta = b[2].clamp(-1.0, 1.0).acos();
    let phi = b[1].atan2(b[0]);
    [
        C64::new((theta / 2.0).cos(), 0.0),
        C64::from_polar((theta / 2.0).sin(), phi),
    ]
}

/// Closed-form worst-case fidelity loss via the transfer-matrix eigenvalue
/// formula.
pub fn fidelity_loss(channel: &QuantumChannel, code: &Code) -> Result<FidelityLoss> {
    let process = effective_process(channel, code)?;
    let eta = (0.5 * (1.0 - process.t_min)).clamp(0.0, 1.0);
    let worst_bloch = process.worst_bloch;
    Ok(FidelityLoss {
        eta,
        worst_state: bloch_to_state(worst_bloch),
        worst_bloch,
        process,
    })
}

/// Direct minimization of the worst-case squared fidelity over the logical
/// Bloch sphere: Fibonacci-lattice scan plus one local simplex refinement.
/// Returns `1 - min F^2`.
///
/// With `recovery = None` the channel output is compared directly against
/// the input codeword (identity recovery), which is the unencoded-qubit
/// baseline when `code` is trivial.
///
/// This route deliberately reuses none of the transfer-matrix machinery:
/// fidelities are evaluated by applying the Kraus lists to state vectors,
/// so it serves as an independent oracle for [`fidelity_loss`].
pub fn grid_oracle(
    channel: &QuantumChannel,
    code: &Code,
    recovery: Option<&PetzRecovery>,
    grid_points: usize,
) -> Result<f64> {
    if grid_points < 100 {
        return Err(Error::InvalidArgument(format!(
            "grid_oracle needs at least 100 grid points, got {}",
            grid_points
        )));
    }
    if channel.dim() != code.dim() {
        return Err(Error::InvalidArgument(format!(
            "channel dimension {} does not match code dimension {}",
            channel.dim(),
            code.dim()
        )));
    }
    if let Some(r) = recovery {
        if r.kraus.first().map(|k| k.rows()) != Some(channel.dim()) {
            return Err(Error::InvalidArgument(
                "recovery dimension does not match the channel".into(),
            ));
        }
    }

    let f2 = |theta: f64, phi: f64| -> f64 {
        let logical = [
            C64::new((theta / 2.0).cos(), 0.0),
            C64::from_polar((theta / 2.0).sin(), phi),
        ];
        let psi = code.logical_to_physical(logical);
        let outs: Vec<Vec<C64>> = channel.kraus().iter().map(|e| e.matvec(&psi)).collect();
        match recovery {
            None => outs
                .iter()
                .map(|w| numerics::inner(&psi, w).norm_sqr())
                .sum(),
            Some(rec) => {
                // F^2 = sum_{j,i} |<psi| R_j E_i |psi>|^2 = sum |(R_j^+ psi)^+ (E_i psi)|^2.
                let backs: Vec<Vec<C64>> =
                    rec.kraus.iter().map(|r| r.dagger().matvec(&psi)).collect();
                let mut tot = 0.0;
                for z in &backs {
                    for w in &outs {
                        tot += numerics::inner(z, w).norm_sqr();
                    }
                }
                tot
            }
        }
    };

    // Fibonacci sphere scan.
    let golden_angle = std::f64::consts::PI * (3.0 - 5.0f64.sqrt());
    let mut best = f64::INFINITY;
    let mut best_arg = (0.0, 0.0);
    for i in 0..grid_points {
        let z = 1.0 - 2.0 * (i as f64 + 0.5) / grid_points as f64;
        let theta = z.clamp(-1.0, 1.0).acos();
        let phi = golden_angle * i as f64;
        let v = f2(theta, phi);
        if v < best {
            best = v;
            best_arg = (theta, phi);
        }
    }

    // Local refinement on (theta, phi) around the best lattice point.
    let step = 2.0 * (4.0 * std::f64::consts::PI / grid_points as f64).sqrt();
    let refine = nelder_mead(
        |x| f2(x[0], x[1]),
        &[best_arg.0, best_arg.1],
        &NmOptions {
            max_iters: 400,
            f_tol: 1e-14,
            x_tol: 1e-10,
            init_step: step,
        },
    )?;
    let f2_min = best.min(refine.f_best);
    Ok((1.0 - f2_min).max(0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;
    use crate::channels::{amplitude_damping, tensor_power, validate_cptp};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn code_constructor_validates_orthonormality() {
        let d = 8;
        let mut v1 = vec![c(0.0, 0.0); d];
        let mut v2 = vec![c(0.0, 0.0); d];
        v1[0] = c(1.0, 0.0);
        v2[0] = c(1.0, 0.0);
        assert!(Code::new(3, v1.clone(), v2).is_err());
        let mut v2b = vec![c(0.0, 0.0); d];
        v2b[1] = c(0.7, 0.0);
        assert!(Code::new(3, v1, v2b).is_err());
        assert!(Code::new(3, vec![c(1.0, 0.0); 4], vec![c(0.0, 0.0); 4]).is_err());
    }

    #[test]
    fn known_codes_are_orthonormal_with_expected_support() {
        for code in [approx3(), approx4(), five_qubit_513()] {
            assert!(code.orthonormality_residual() < 1e-12);
        }
        let f = five_qubit_513();
        // |0_L> lives on even-weight strings, |1_L> on odd-weight ones.
        for (i, amp) in f.v1().iter().enumerate() {
            if amp.norm() > 0.0 {
                assert_eq!(i.count_ones() % 2, 0, "index {:05b}", i);
                assert!((amp.norm() - 0.25).abs() < 1e-12);
            }
        }
        for (i, amp) in f.v2().iter().enumerate() {
            if amp.norm() > 0.0 {
                assert_eq!(i.count_ones() % 2, 1, "index {:05b}", i);
            }
        }
    }

    #[test]
    fn reference_codes_orthonormal_after_renormalization() {
        for which in [
            ReferenceCode::U3,
            ReferenceCode::S3,
            ReferenceCode::U4,
            ReferenceCode::S4,
        ] {
            let code = reference_code(which);
            assert!(code.orthonormality_residual() < 1e-12);
        }
    }

    #[test]
    fn resolve_code_names() {
        assert_eq!(resolve_code("approx3").unwrap().n_qubits(), 3);
        assert_eq!(resolve_code("five_qubit_513").unwrap().n_qubits(), 5);
        assert_eq!(resolve_code("s4").unwrap().n_qubits(), 4);
        assert_eq!(resolve_code("trivial1").unwrap().n_qubits(), 1);
        assert!(resolve_code("nope").is_err());
    }

    #[test]
    fn petz_recovery_structure() {
        let ch = tensor_power(&amplitude_damping(0.1).unwrap(), 3).unwrap();
        let code = approx3();
        let rec = petz_recovery(&ch, &code, PETZ_REL_TOL).unwrap();
        assert_eq!(rec.kraus.len(), ch.kraus().len());
        // sum R_i^dagger R_i equals the support projector of E(P).
        let d = 8;
        let mut acc = CMatrix::zeros(d, d);
        for r in &rec.kraus {
            acc = acc.add(&r.dagger().mul(r));
        }
        assert!(
            acc.max_abs_diff(&rec.support_projector) < 1e-8,
            "TP-on-support residual {:.3e}",
            acc.max_abs_diff(&rec.support_projector)
        );
        // Recovery outputs live in the code subspace: P R_i = R_i.
        let p = code.projector();
        for r in &rec.kraus {
            assert!(p.mul(r).max_abs_diff(r) < 1e-9);
        }
        // The support projector is idempotent.
        let pp = rec.support_projector.mul(&rec.support_projector);
        assert!(pp.max_abs_diff(&rec.support_projector) < 1e-10);
    }

    #[test]
    fn zero_noise_gives_zero_loss_and_identity_block() {
        let ch = tensor_power(&amplitude_damping(0.0).unwrap(), 3).unwrap();
        let code = approx3();
        let fl = fidelity_loss(&ch, &code).unwrap();
        assert!(fl.eta <= 1e-10, "eta = {:.3e}", fl.eta);
        let bp = &fl.process;
        for i in 0..3 {
            for j in 0..3 {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((bp.t[i][j] - want).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn full_damping_sends_bloch_sphere_to_a_point() {
        // gamma = 1 on the trivial single-qubit code: E(P) collapses to |0><0|,
        // and the recovered process wipes out every Bloch component.
        let ch = amplitude_damping(1.0).unwrap();
        let code = Code::trivial(1);
        let bp = effective_process(&ch, &code).unwrap();
        assert!(bp.t_min.abs() < 1e-9);
        let fl = fidelity_loss(&ch, &code).unwrap();
        assert!((fl.eta - 0.5).abs() < 1e-9);
    }

    #[test]
    fn transfer_matrix_rows_and_contraction() {
        let ch = tensor_power(&amplitude_damping(0.13).unwrap(), 3).unwrap();
        let bp = effective_process(&ch, &approx3()).unwrap();
        assert!((bp.m[0][0] - 1.0).abs() < 1e-8);
        for i in 1..4 {
            assert!(bp.m[0][i].abs() < 1e-8);
            assert!(bp.m[i][0].abs() < 1e-8);
        }
        // Bloch block is a contraction.
        let ts = CMatrix::from_fn(3, 3, |i, j| c(bp.t_sym[i][j], 0.0));
        let (vals, _) = hermitian_eig(&ts).unwrap();
        for v in vals {
            assert!(v.abs() <= 1.0 + 1e-8);
        }
    }

    #[test]
    fn eigen_formula_matches_reference_values() {
        // Frozen from an independent reference implementation.
        let cases = [
            (0.05, 0.023209),
            (0.10, 0.048863),
            (0.15, 0.077547),
        ];
        for (gamma, want) in cases {
            let ch = tensor_power(&amplitude_damping(gamma).unwrap(), 3).unwrap();
            let fl = fidelity_loss(&ch, &approx3()).unwrap();
            assert!(
                (fl.eta - want).abs() < 1e-4,
                "gamma {}: eta {} vs {}",
                gamma,
                fl.eta,
                want
            );
        }
        let ch4 = tensor_power(&amplitude_damping(0.1).unwrap(), 4).unwrap();
        let fl4 = fidelity_loss(&ch4, &approx4()).unwrap();
        assert!((fl4.eta - 0.016681).abs() < 1e-4, "eta4 {}", fl4.eta);
        let ch5 = tensor_power(&amplitude_damping(0.1).unwrap(), 5).unwrap();
        let fl5 = fidelity_loss(&ch5, &five_qubit_513()).unwrap();
        assert!((fl5.eta - 0.014317).abs() < 1e-4, "eta5 {}", fl5.eta);
    }

    #[test]
    fn grid_oracle_agrees_with_eigen_formula_on_approx3() {
        let ch = tensor_power(&amplitude_damping(0.1).unwrap(), 3).unwrap();
        let code = approx3();
        let eta_formula = fidelity_loss(&ch, &code).unwrap().eta;
        let rec = petz_recovery(&ch, &code, PETZ_REL_TOL).unwrap();
        let eta_grid = grid_oracle(&ch, &code, Some(&rec), 4000).unwrap();
        assert!(
            (eta_formula - eta_grid).abs() < 1e-6,
            "formula {} vs grid {}",
            eta_formula,
            eta_grid
        );
    }

    #[test]
    fn unencoded_qubit_loses_gamma() {
        for gamma in [0.05, 0.1, 0.2] {
            let ch = amplitude_damping(gamma).unwrap();
            let loss = grid_oracle(&ch, &Code::trivial(1), None, 2000).unwrap();
            assert!(
                (loss - gamma).abs() < 1e-4,
                "gamma {}: loss {}",
                gamma,
                loss
            );
        }
    }

    #[test]
    fn grid_oracle_validates_inputs() {
        let ch = amplitude_damping(0.1).unwrap();
        assert!(grid_oracle(&ch, &Code::trivial(1), None, 50).is_err());
        assert!(grid_oracle(&ch, &Code::trivial(2), None, 500).is_err());
    }

    #[test]
    fn code_file_roundtrip() {
        let code = approx3();
        let file: CodeFile = (&code).into();
        let json = serde_json::to_string(&file).unwrap();
        let back: CodeFile = serde_json::from_str(&json).unwrap();
        let code2 = back.into_code().unwrap();
        assert_eq!(code, code2);
    }

    #[test]
    fn channels_used_here_are_tp() {
        let ch = tensor_power(&amplitude_damping(0.1).unwrap(), 5).unwrap();
        assert!(validate_cptp(&ch).pass);
    }
}
