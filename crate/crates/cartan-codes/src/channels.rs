//! Quantum channels as Kraus-operator lists, the single-qubit noise families
//! used throughout the crate, and tensor powers for independent per-qubit
//! noise.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{C64, CMatrix, MAX_DIM, haar_random_unitary, hermitian_eig, kron};

/// Kraus operators below this max-norm are dropped at construction; they are
/// exact zeros up to roundoff (e.g. the damping operator at gamma = 0).
const KRAUS_PRUNE_TOL: f64 = 1e-14;

/// Trace-preservation check threshold for `validate_cptp`.
pub const CPTP_TOL: f64 = 1e-9;

/// A completely positive map given by its Kraus operators
/// `rho -> sum_i E_i rho E_i^dagger`.
///
/// The constructors in this module all produce trace-preserving channels;
/// `QuantumChannel::new` itself only checks shape and finiteness (so that
/// deliberately broken lists can still be fed to [`validate_cptp`]).
#[derive(Clone, Debug)]
pub struct QuantumChannel {
    dim: usize,
    kraus: Vec<CMatrix>,
}

impl QuantumChannel {
    /// Wraps a Kraus list after shape validation, pruning numerically zero
    /// operators.
    pub fn new(dim: usize, kraus: Vec<CMatrix>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidArgument("channel dimension must be >= 1".into()));
        }
        if dim > MAX_DIM {
            return Err(Error::Capacity(format!(
                "channel dimension {} exceeds the supported maximum {}",
                dim, MAX_DIM
            )));
        }
        if kraus.is_empty() {
            return Err(Error::InvalidArgument("channel needs at least one Kraus operator".into()));
        }
        for (i, k) in kraus.iter().enumerate() {
            if k.rows() != dim || k.cols() != dim {
                return Err(Error::InvalidArgument(format!(
                    "Kraus operator {} is {}x{}, expected {}x{}",
                    i,
                    k.rows(),
                    k.cols(),
                    dim,
                    dim
                )));
            }
        }
        let kept: Vec<CMatrix> = kraus
            .into_iter()
            .filter(|k| k.max_abs() >= KRAUS_PRUNE_TOL)
            .collect();
        if kept.is_empty() {
            return Err(Error::InvalidArgument(
                "all Kraus operators are numerically zero".into(),
            ));
        }
        Ok(QuantumChannel { dim, kraus: kept })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kraus(&self) -> &[CMatrix] {
        &self.kraus
    }

    /// Applies the channel to a density matrix, validating the input state
    /// (Hermitian, unit trace, PSD up to 1e-9).
    pub fn apply(&self, rho: &CMatrix) -> Result<CMatrix> {
        if rho.rows() != self.dim || rho.cols() != self.dim {
            return Err(Error::InvalidArgument(format!(
                "state is {}x{}, channel dimension is {}",
                rho.rows(),
                rho.cols(),
                self.dim
            )));
        }
        if rho.hermiticity_residual() > 1e-9 {
            return Err(Error::InvalidArgument(format!(
                "state is not Hermitian (residual {:.3e})",
                rho.hermiticity_residual()
            )));
        }
        let tr = rho.trace();
        if (tr.re - 1.0).abs() > 1e-9 || tr.im.abs() > 1e-9 {
            return Err(Error::InvalidArgument(format!(
                "state trace is {:.12}+{:.3e}i, expected 1",
                tr.re, tr.im
            )));
        }
        let (vals, _) = hermitian_eig(rho)?;
        if vals[0] < -1e-9 {
            return Err(Error::InvalidArgument(format!(
                "state is not PSD (min eigenvalue {:.3e})",
                vals[0]
            )));
        }
        Ok(self.apply_operator(rho))
    }

    /// Applies the Kraus sum to an arbitrary operator without state
    /// validation (internal workhorse; also used on projectors and Paulis).
    pub fn apply_operator(&self, x: &CMatrix) -> CMatrix {
        let mut out = CMatrix::zeros(self.dim, self.dim);
        for k in &self.kraus {
            let t = k.mul(x).mul(&k.dagger());
            out = out.add(&t);
        }
        out
    }
}

/// Report from the CPTP structural check.
#[derive(Clone, Debug)]
pub struct CptpReport {
    /// Max-norm deviation of `sum_i E_i^dagger E_i` from the identity.
    pub deviation: f64,
    /// True iff `deviation <= 1e-9`.
    pub pass: bool,
    pub dim: usize,
    pub kraus_count: usize,
}

/// Checks trace preservation of a Kraus list. Complete positivity holds
/// structurally for any Kraus list, so trace preservation is the only
/// numerical content.
pub fn validate_cptp(c: &QuantumChannel) -> CptpReport {
    let mut acc = CMatrix::zeros(c.dim, c.dim);
    for k in &c.kraus {
        acc = acc.add(&k.dagger().mul(k));
    }
    let deviation = acc.max_abs_diff(&CMatrix::identity(c.dim));
    CptpReport {
        deviation,
        pass: deviation <= CPTP_TOL,
        dim: c.dim,
        kraus_count: c.kraus.len(),
    }
}

/// Amplitude damping on one qubit with decay probability `gamma`:
/// `E_0 = |0><0| + sqrt(1-gamma) |1><1|`, `E_1 = sqrt(gamma) |0><1|`.
pub fn amplitude_damping(gamma: f64) -> Result<QuantumChannel> {
    if !(0.0..=1.0).contains(&gamma) || !gamma.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "amplitude damping gamma must lie in [0,1], got {}",
            gamma
        )));
    }
    let z = C64::new(0.0, 0.0);
    let e0 = CMatrix::new(
        2,
        2,
        vec![C64::new(1.0, 0.0), z, z, C64::new((1.0 - gamma).sqrt(), 0.0)],
    )?;
    let e1 = CMatrix::new(2, 2, vec![z, C64::new(gamma.sqrt(), 0.0), z, z])?;
    QuantumChannel::new(2, vec![e0, e1])
}

/// Amplitude damping toward the axis `|v> = cos(theta/2)|0> +
/// e^{i phi} sin(theta/2)|1>`: the standard channel conjugated by the basis
/// change `U = |v><0| + |v_perp><1|`.
pub fn rotated_amplitude_damping(gamma: f64, theta: f64, phi: f64) -> Result<QuantumChannel> {
    if !theta.is_finite() || !phi.is_finite() {
        return Err(Error::InvalidArgument(
            "rotated damping angles must be finite".into(),
        ));
    }
    let base = amplitude_damping(gamma)?;
    let (ct, st) = ((theta / 2.0).cos(), (theta / 2.0).sin());
    let ph = C64::from_polar(1.0, phi);
    let u = CMatrix::new(
        2,
        2,
        vec![
            C64::new(ct, 0.0),
            -ph.conj() * st,
            ph * st,
            C64::new(ct, 0.0),
        ],
    )?;
    let ud = u.dagger();
    let kraus = base
        .kraus()
        .iter()
        .map(|e| u.mul(e).mul(&ud))
        .collect();
    QuantumChannel::new(2, kraus)
}

/// Haar-random qubit channel from a Stinespring dilation: a Haar 4x4 unitary
/// on system (x) ancilla acts on `|psi> (x) |0>`, and the ancilla is traced
/// out, giving two Kraus operators `E_k = (I (x) <k|) U (I (x) |0>)`.
pub fn random_qubit_channel(seed: u64) -> Result<QuantumChannel> {
    let u = haar_random_unitary(4, seed)?;
    let mut kraus = Vec::with_capacity(2);
    for k in 0..2 {
        let mut e = CMatrix::zeros(2, 2);
        for i in 0..2 {
            for j in 0..2 {
                e[(i, j)] = u[(2 * i + k, 2 * j)];
            }
        }
        kraus.push(e);
    }
    QuantumChannel::new(2, kraus)
}

/// Convex admixture of a channel with the identity:
/// `E = (1-alpha) id + alpha Phi`, Kraus list
/// `{sqrt(1-alpha) I} ∪ {sqrt(alpha) F_k}`.
pub fn admix_identity(phi: &QuantumChannel, alpha: f64) -> Result<QuantumChannel> {
    if !(0.0..=1.0).contains(&alpha) || !alpha.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "admixture weight must lie in [0,1], got {}",
            alpha
        )));
    }
    let mut kraus = vec![CMatrix::identity(phi.dim()).scale(C64::new((1.0 - alpha).sqrt(), 0.0))];
    for k in phi.kraus() {
        kraus.push(k.scale(C64::new(alpha.sqrt(), 0.0)));
    }
    QuantumChannel::new(phi.dim(), kraus)
}

/// Tensor product of two channels; Kraus operators are all pairwise products
/// `A_i (x) B_j`, ordered lexicographically in (i, j).
pub fn tensor(a: &QuantumChannel, b: &QuantumChannel) -> Result<QuantumChannel> {
    let dim = a
        .dim()
        .checked_mul(b.dim())
        .ok_or_else(|| Error::Capacity("tensor dimension overflow".into()))?;
    if dim > MAX_DIM {
        return Err(Error::Capacity(format!(
            "tensor dimension {} exceeds the supported maximum {}",
            dim, MAX_DIM
        )));
    }
    let mut kraus = Vec::with_capacity(a.kraus().len() * b.kraus().len());
    for ka in a.kraus() {
        for kb in b.kraus() {
            kraus.push(kron(ka, kb));
        }
    }
    QuantumChannel::new(dim, kraus)
}

/// `n`-fold tensor power of a channel (independent identical noise on `n`
/// subsystems); factor 1 owns the most significant index block.
pub fn tensor_power(c: &QuantumChannel, n: usize) -> Result<QuantumChannel> {
    if n == 0 {
        return Err(Error::InvalidArgument("tensor_power needs n >= 1".into()));
    }
    let mut out = c.clone();
    for _ in 1..n {
        out = tensor(&out, c)?;
    }
    Ok(out)
}

/// Noise family selector for configs and CLI runs.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseFamily {
    AmplitudeDamping,
    RotatedAd,
    RandomAdmixed,
}

impl NoiseFamily {
    /// The snake_case config name of the family.
    pub fn name(&self) -> &'static str {
        match self {
            NoiseFamily::AmplitudeDamping => "amplitude_damping",
            NoiseFamily::RotatedAd => "rotated_ad",
            NoiseFamily::RandomAdmixed => "random_admixed",
        }
    }
}

/// Serializable description of a single-qubit noise process. Fields not used
/// by the selected family are ignored.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseSpec {
    pub family: NoiseFamily,
    /// Damping probability for the two damping families.
    #[serde(default)]
    pub gamma: f64,
    /// Damping-axis polar angle in [0, pi] (rotated damping only).
    #[serde(default)]
    pub theta: f64,
    /// Damping-axis azimuth in [0, 2 pi] (rotated damping only).
    #[serde(default)]
    pub phi: f64,
    /// Admixture weight in [0, 1] (random admixed family only).
    #[serde(default)]
    pub alpha: f64,
    /// Seed of the Haar-random channel (random admixed family only).
    #[serde(default)]
    pub seed: u64,
}

impl NoiseSpec {
    pub fn amplitude_damping(gamma: f64) -> Self {
        NoiseSpec {
            family: NoiseFamily::AmplitudeDamping,
            gamma,
            theta: 0.0,
            phi: 0.0,
            alpha: 0.0,
            seed: 0,
        }
    }

    pub fn rotated_ad(gamma: f64, theta: f64, phi: f64) -> Self {
        NoiseSpec {
            family: NoiseFamily::RotatedAd,
            gamma,
            theta,
            phi,
            alpha: 0.0,
            seed: 0,
        }
    }

    pub fn random_admixed(alpha: f64, seed: u64) -> Self {
        NoiseSpec {
            family: NoiseFamily::RandomAdmixed,
            gamma: 0.0,
            theta: 0.0,
            phi: 0.0,
            alpha,
            seed,
        }
    }

    /// Range-checks the fields relevant to the selected family.
    pub fn validate(&self) -> Result<()> {
        match self.family {
            NoiseFamily::AmplitudeDamping => {
                if !(0.0..=1.0).contains(&self.gamma) {
                    return Err(Error::Config(format!(
                        "noise.gamma must lie in [0,1], got {}",
                        self.gamma
                    )));
                }
            }
            NoiseFamily::RotatedAd => {
                if !(0.0..=1.0).contains(&self.gamma) {
                    return Err(Error::Config(format!(
                        "noise.gamma must lie in [0,1], got {}",
                        self.gamma
                    )));
                }
                if !(0.0..=std::f64::consts::PI).contains(&self.theta) {
                    return Err(Error::Config(format!(
                        "noise.theta must lie in [0,pi], got {}",
                        self.theta
                    )));
                }
                if !(0.0..=2.0 * std::f64::consts::PI).contains(&self.phi) {
                    return Err(Error::Config(format!(
                        "noise.phi must lie in [0,2pi], got {}",
                        self.phi
                    )));
                }
            }
            NoiseFamily::RandomAdmixed => {
                if !(0.0..=1.0).contains(&self.alpha) {
                    return Err(Error::Config(format!(
                        "noise.alpha must lie in [0,1], got {}",
                        self.alpha
                    )));
                }
            }
        }
        Ok(())
    }

    /// Builds the described single-qubit channel.
    pub fn qubit_channel(&self) -> Result<QuantumChannel> {
        self.validate()?;
        match self.family {
            NoiseFamily::AmplitudeDamping => amplitude_damping(self.gamma),
            NoiseFamily::RotatedAd => rotated_amplitude_damping(self.gamma, self.theta, self.phi),
            NoiseFamily::RandomAdmixed => {
                admix_identity(&random_qubit_channel(self.seed)?, self.alpha)
            }
        }
    }

    /// The value being swept in parameter sweeps (gamma for the damping
    /// families, alpha for the admixed family).
    pub fn sweep_value(&self) -> f64 {
        match self.family {
            NoiseFamily::AmplitudeDamping | NoiseFamily::RotatedAd => self.gamma,
            NoiseFamily::RandomAdmixed => self.alpha,
        }
    }

    /// Returns a copy with the swept parameter replaced.
    pub fn with_sweep_value(&self, v: f64) -> Self {
        let mut s = self.clone();
        match self.family {
            NoiseFamily::AmplitudeDamping | NoiseFamily::RotatedAd => s.gamma = v,
            NoiseFamily::RandomAdmixed => s.alpha = v,
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn assert_tp(ch: &QuantumChannel) {
        let rep = validate_cptp(ch);
        assert!(rep.pass, "TP deviation {:.3e}", rep.deviation);
    }

    #[test]
    fn amplitude_damping_kraus_and_action() {
        let ch = amplitude_damping(0.3).unwrap();
        assert_eq!(ch.kraus().len(), 2);
        assert_tp(&ch);
        // AD on |1><1| yields (1-gamma)|1><1| + gamma|0><0|.
        let mut rho = CMatrix::zeros(2, 2);
        rho[(1, 1)] = c(1.0, 0.0);
        let out = ch.apply(&rho).unwrap();
        assert!((out[(0, 0)] - c(0.3, 0.0)).norm() < 1e-12);
        assert!((out[(1, 1)] - c(0.7, 0.0)).norm() < 1e-12);
        assert!(out[(0, 1)].norm() < 1e-12);
    }

    #[test]
    fn zero_gamma_prunes_to_identity_channel() {
        let ch = amplitude_damping(0.0).unwrap();
        assert_eq!(ch.kraus().len(), 1);
        let three = tensor_power(&ch, 3).unwrap();
        assert_eq!(three.kraus().len(), 1);
        assert!(three.kraus()[0].max_abs_diff(&CMatrix::identity(8)) < 1e-12);
    }

    #[test]
    fn gamma_bounds_are_enforced() {
        assert!(amplitude_damping(-0.1).is_err());
        assert!(amplitude_damping(1.1).is_err());
        assert!(amplitude_damping(f64::NAN).is_err());
    }

    #[test]
    fn rotated_damping_is_a_basis_change_of_plain_damping() {
        let g = 0.2;
        let (theta, phi) = (0.9, 2.1);
        let ch = rotated_amplitude_damping(g, theta, phi).unwrap();
        assert_tp(&ch);
        // The rotated fixed point is |v><v|.
        let (ct, st) = ((theta / 2.0).cos(), (theta / 2.0).sin());
        let v = [c(ct, 0.0), C64::from_polar(st, phi)];
        let mut rho = CMatrix::zeros(2, 2);
        for i in 0..2 {
            for j in 0..2 {
                rho[(i, j)] = v[i] * v[j].conj();
            }
        }
        let out = ch.apply(&rho).unwrap();
        assert!(out.max_abs_diff(&rho) < 1e-12);
        // theta = 0 reduces to plain damping.
        let plain = rotated_amplitude_damping(g, 0.0, 0.0).unwrap();
        let base = amplitude_damping(g).unwrap();
        for (a, b) in plain.kraus().iter().zip(base.kraus()) {
            assert!(a.max_abs_diff(b) < 1e-12);
        }
    }

    #[test]
    fn random_channel_is_tp_and_seed_deterministic() {
        for seed in [0u64, 1, 17, 123456] {
            let ch = random_qubit_channel(seed).unwrap();
            assert_eq!(ch.kraus().len(), 2);
            assert_tp(&ch);
        }
        let a = random_qubit_channel(5).unwrap();
        let b = random_qubit_channel(5).unwrap();
        for (x, y) in a.kraus().iter().zip(b.kraus()) {
            assert_eq!(x.data(), y.data());
        }
    }

    #[test]
    fn admixture_edge_cases_prune_correctly() {
        let phi = random_qubit_channel(9).unwrap();
        let id = admix_identity(&phi, 0.0).unwrap();
        assert_eq!(id.kraus().len(), 1);
        assert!(id.kraus()[0].max_abs_diff(&CMatrix::identity(2)) < 1e-12);
        let full = admix_identity(&phi, 1.0).unwrap();
        assert_eq!(full.kraus().len(), phi.kraus().len());
        let mid = admix_identity(&phi, 0.25).unwrap();
        assert_eq!(mid.kraus().len(), 3);
        assert_tp(&mid);
        assert!(admix_identity(&phi, 1.5).is_err());
    }

    #[test]
    fn tensor_power_counts_dims_and_stays_tp() {
        let ch = amplitude_damping(0.12).unwrap();
        let t3 = tensor_power(&ch, 3).unwrap();
        assert_eq!(t3.dim(), 8);
        assert_eq!(t3.kraus().len(), 8);
        assert_tp(&t3);
        // Kraus ordering is lexicographic: index (i1 i2 i3) -> E_{i1} (x) E_{i2} (x) E_{i3}.
        let manual = kron(&kron(&ch.kraus()[1], &ch.kraus()[0]), &ch.kraus()[1]);
        assert!(t3.kraus()[0b101].max_abs_diff(&manual) < 1e-15);
        assert!(tensor_power(&ch, 6).is_err());
        assert!(tensor_power(&ch, 0).is_err());
    }

    #[test]
    fn apply_validates_states() {
        let ch = amplitude_damping(0.1).unwrap();
        let bad_trace = CMatrix::identity(2);
        assert!(ch.apply(&bad_trace).is_err());
        let mut non_herm = CMatrix::zeros(2, 2);
        non_herm[(0, 0)] = c(1.0, 0.0);
        non_herm[(0, 1)] = c(0.3, 0.0);
        assert!(ch.apply(&non_herm).is_err());
        let mut neg = CMatrix::zeros(2, 2);
        neg[(0, 0)] = c(1.5, 0.0);
        neg[(1, 1)] = c(-0.5, 0.0);
        assert!(ch.apply(&neg).is_err());
    }

    #[test]
    fn validate_cptp_flags_broken_lists() {
        let ch = QuantumChannel::new(2, vec![CMatrix::identity(2), CMatrix::identity(2)]).unwrap();
        let rep = validate_cptp(&ch);
        assert!(!rep.pass);
        assert!((rep.deviation - 1.0).abs() < 1e-12);
    }

    #[test]
    fn noise_spec_roundtrip_and_validation() {
        let spec: NoiseSpec =
            serde_json::from_str(r#"{"family": "amplitude_damping", "gamma": 0.1}"#).unwrap();
        assert_eq!(spec.family, NoiseFamily::AmplitudeDamping);
        let ch = spec.qubit_channel().unwrap();
        assert_eq!(ch.dim(), 2);
        let bad: NoiseSpec =
            serde_json::from_str(r#"{"family": "rotated_ad", "gamma": 0.1, "theta": 9.0}"#)
                .unwrap();
        assert!(bad.qubit_channel().is_err());
        let spec2 = NoiseSpec::random_admixed(0.05, 3);
        let ch2 = spec2.qubit_channel().unwrap();
        assert_eq!(ch2.kraus().len(), 3);
        assert_tp(&ch2);
    }
}
