//! Recursive Cartan parameterization of encoding unitaries on 2..=4 qubits.
//!
//! A 2-qubit unitary factors as `(U1 x U2) J (U3 x U4)` with
//! `J = exp(-i (c1 XX + c2 YY + c3 ZZ))`. For n > 2 the recursion is
//! `G = K1 F1 K2 J K3 F2 K4`, where each `K = (sub-unitary on n-1 qubits)
//! x (SU(2) on the last qubit)`, and `F`/`J` are exponentials of fixed
//! commuting Pauli-string sets. The coupling angles are the "nonlocal"
//! parameters; the SU(2) triples are the "local" ones, and the structured
//! search modes replace every local factor by the identity or by one fixed
//! single-qubit unitary.

use std::sync::OnceLock;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{C64, CMatrix, PauliString, kron, pauli_string_exp};
use crate::qec::Code;

/// The commuting Pauli-string sets entering `F` and `J` at one recursion
/// level, with their dense matrices cached.
pub struct CartanBasis {
    n: usize,
    h_strings: Vec<PauliString>,
    f_strings: Vec<PauliString>,
}

const H2: [&str; 3] = ["XX", "YY", "ZZ"];
const F3: [&str; 3] = ["XXZ", "YYZ", "ZZZ"];
const H3: [&str; 4] = ["XXX", "YYX", "ZZX", "IIX"];
const F4: [&str; 7] = ["XXIZ", "YYIZ", "ZZIZ", "IIXZ", "XXXZ", "YYXZ", "ZZXZ"];
const H4: [&str; 8] = [
    "IIIX", "XXIX", "YYIX", "ZZIX", "IIXX", "XXXX", "YYXX", "ZZXX",
];

impl CartanBasis {
    fn build(n: usize) -> Result<CartanBasis> {
        let (h, f): (&[&str], &[&str]) = match n {
            2 => (&H2, &[]),
            3 => (&H3, &F3),
            4 => (&H4, &F4),
            _ => {
                return Err(Error::InvalidArgument(format!(
                    "Cartan basis is defined for 2..=4 qubits, got {}",
                    n
                )))
            }
        };
        let parse_all = |labels: &[&str]| -> Result<Vec<PauliString>> {
            labels.iter().map(|s| PauliString::parse(s)).collect()
        };
        let h_strings = parse_all(h)?;
        let f_strings = parse_all(f)?;
        for set in [&h_strings, &f_strings] {
            for (i, a) in set.iter().enumerate() {
                for b in set.iter().skip(i + 1) {
                    if !a.commutes_with(b) {
                        return Err(Error::Inconsistency(format!(
                            "Cartan generator set is not Abelian: {} vs {}",
                            a, b
                        )));
                    }
                }
            }
        }
        Ok(CartanBasis {
            n,
            h_strings,
            f_strings,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Generators of the central factor `J`.
    pub fn h_strings(&self) -> &[PauliString] {
        &self.h_strings
    }

    /// Generators of the flanking factors `F1`, `F2` (empty for n = 2).
    pub fn f_strings(&self) -> &[PauliString] {
        &self.f_strings
    }
}

/// Shared immutable basis for a given qubit count (2..=4).
pub fn cartan_basis(n: usize) -> Result<&'static CartanBasis> {
    static CELLS: [OnceLock<CartanBasis>; 3] = [OnceLock::new(), OnceLock::new(), OnceLock::new()];
    if !(2..=4).contains(&n) {
        return Err(Error::InvalidArgument(format!(
            "Cartan basis is defined for 2..=4 qubits, got {}",
            n
        )));
    }
    let cell = &CELLS[n - 2];
    if let Some(b) = cell.get() {
        return Ok(b);
    }
    let built = CartanBasis::build(n)?;
    Ok(cell.get_or_init(|| built))
}

/// How the local SU(2) factors are treated when evaluating the unitary.
#[derive(Clone, Debug)]
pub enum BuildMode {
    /// All parameters free, locals realized as `su2` of their triples.
    Full,
    /// Every local factor replaced by the identity; only coupling angles act.
    NonlocalOnly,
    /// Every local factor replaced by one fixed 2x2 unitary.
    FixedLocal(CMatrix),
}

impl BuildMode {
    /// Whether local SU(2) triples consume entries of the flat parameter
    /// vector in this mode.
    pub fn locals_are_free(&self) -> bool {
        matches!(self, BuildMode::Full)
    }

    pub fn name(&self) -> &'static str {
        match self {
            BuildMode::Full => "full",
            BuildMode::NonlocalOnly => "nonlocal_only",
            BuildMode::FixedLocal(_) => "fixed_local",
        }
    }

    fn local_matrix(&self, triple: [f64; 3]) -> Result<CMatrix> {
        match self {
            BuildMode::Full => Ok(su2(triple)),
            BuildMode::NonlocalOnly => Ok(CMatrix::identity(2)),
            BuildMode::FixedLocal(u) => {
                if u.rows() != 2 || u.cols() != 2 {
                    return Err(Error::InvalidArgument(
                        "fixed local factor must be a 2x2 matrix".into(),
                    ));
                }
                let res = u.unitarity_residual();
                if res > 1e-8 {
                    return Err(Error::InvalidArgument(format!(
                        "fixed local factor is not unitary (residual {:.3e})",
                        res
                    )));
                }
                Ok(u.clone())
            }
        }
    }
}

/// One `K` factor of the recursion: a sub-parameterization on n-1 qubits
/// tensored with an SU(2) triple on the last qubit.
#[derive(Clone, Debug, PartialEq)]
pub struct KFactor {
    pub sub: CartanParams,
    pub local: [f64; 3],
}

/// Parameter tree for one encoding unitary.
#[derive(Clone, Debug, PartialEq)]
pub enum CartanParams {
    /// n = 2: `(U1 x U2) exp(-i(c1 XX + c2 YY + c3 ZZ)) (U3 x U4)`.
    /// `locals` holds the four SU(2) triples in the order U1, U2, U3, U4.
    Base {
        locals: [[f64; 3]; 4],
        couplings: [f64; 3],
    },
    /// n > 2: `K1 F1 K2 J K3 F2 K4`; `k` holds exactly four factors,
    /// `f1`/`f2` the F-coupling angles, `a` the J-coupling angles.
    Recursive {
        k: Vec<KFactor>,
        f1: Vec<f64>,
        a: Vec<f64>,
        f2: Vec<f64>,
    },
}

impl CartanParams {
    pub fn n_qubits(&self) -> usize {
        match self {
            CartanParams::Base { .. } => 2,
            CartanParams::Recursive { k, .. } => k[0].sub.n_qubits() + 1,
        }
    }

    /// All-zero parameters for n qubits (builds to the identity in every
    /// mode with identity locals).
    pub fn zero(n: usize) -> Result<CartanParams> {
        let basis = cartan_basis(n)?;
        if n == 2 {
            return Ok(CartanParams::Base {
                locals: [[0.0; 3]; 4],
                couplings: [0.0; 3],
            });
        }
        let sub = CartanParams::zero(n - 1)?;
        Ok(CartanParams::Recursive {
            k: (0..4)
                .map(|_| KFactor {
                    sub: sub.clone(),
                    local: [0.0; 3],
                })
                .collect(),
            f1: vec![0.0; basis.f_strings.len()],
            a: vec![0.0; basis.h_strings.len()],
            f2: vec![0.0; basis.f_strings.len()],
        })
    }

    fn check_arity(&self) -> Result<usize> {
        match self {
            CartanParams::Base { .. } => Ok(2),
            CartanParams::Recursive { k, f1, a, f2 } => {
                if k.len() != 4 {
                    return Err(Error::InvalidArgument(format!(
                        "a recursive level needs exactly 4 K factors, got {}",
                        k.len()
                    )));
                }
                let sub_n = k[0].sub.check_arity()?;
                for kf in &k[1..] {
                    if kf.sub.check_arity()? != sub_n {
                        return Err(Error::InvalidArgument(
                            "K factors disagree on sub-unitary qubit count".into(),
                        ));
                    }
                }
                let n = sub_n + 1;
                let basis = cartan_basis(n)?;
                if f1.len() != basis.f_strings.len()
                    || f2.len() != basis.f_strings.len()
                    || a.len() != basis.h_strings.len()
                {
                    return Err(Error::InvalidArgument(format!(
                        "coupling arity mismatch at n = {}: f1 {}, a {}, f2 {} (expected {}, {}, {})",
                        n,
                        f1.len(),
                        a.len(),
                        f2.len(),
                        basis.f_strings.len(),
                        basis.h_strings.len(),
                        basis.f_strings.len()
                    )));
                }
                Ok(n)
            }
        }
    }
}

/// `exp(-i (px X + py Y + pz Z))` in closed form.
pub fn su2(p: [f64; 3]) -> CMatrix {
    let r = (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt();
    if r < 1e-300 {
        return CMatrix::identity(2);
    }
    let (s, c) = (r.sin() / r, r.cos());
    let i = C64::new(0.0, 1.0);
    let mut m = CMatrix::zeros(2, 2);
    // cos(r) I - i sin(r)/r * (p . sigma)
    m[(0, 0)] = C64::new(c, 0.0) - i * s * C64::new(p[2], 0.0);
    m[(0, 1)] = -i * s * C64::new(p[0], -p[1]);
    m[(1, 0)] = -i * s * C64::new(p[0], p[1]);
    m[(1, 1)] = C64::new(c, 0.0) + i * s * C64::new(p[2], 0.0);
    m
}

/// Number of free real parameters for `(n, mode)`.
pub fn param_count(n: usize, mode: &BuildMode) -> Result<usize> {
    let basis = cartan_basis(n)?;
    let local = if mode.locals_are_free() { 3 } else { 0 };
    if n == 2 {
        return Ok(4 * local + 3);
    }
    let sub = param_count(n - 1, mode)?;
    Ok(4 * (sub + local) + 2 * basis.f_strings.len() + basis.h_strings.len())
}

struct Cursor<'a> {
    data: &'a [f64],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, k: usize) -> Result<&'a [f64]> {
        if self.pos + k > self.data.len() {
            return Err(Error::InvalidArgument(format!(
                "parameter vector too short: needed {} more at offset {}, have {}",
                k,
                self.pos,
                self.data.len()
            )));
        }
        let s = &self.data[self.pos..self.pos + k];
        self.pos += k;
        Ok(s)
    }

    fn take3(&mut self) -> Result<[f64; 3]> {
        let s = self.take(3)?;
        Ok([s[0], s[1], s[2]])
    }
}

fn unflatten_level(cur: &mut Cursor, n: usize, mode: &BuildMode) -> Result<CartanParams> {
    if n == 2 {
        let mut locals = [[0.0; 3]; 4];
        if mode.locals_are_free() {
            locals[0] = cur.take3()?;
            locals[1] = cur.take3()?;
        }
        let couplings = cur.take3()?;
        if mode.locals_are_free() {
            locals[2] = cur.take3()?;
            locals[3] = cur.take3()?;
        }
        return Ok(CartanParams::Base {
            locals,
            couplings,
        });
    }
    let basis = cartan_basis(n)?;
    let take_k = |cur: &mut Cursor| -> Result<KFactor> {
        let sub = unflatten_level(cur, n - 1, mode)?;
        let local = if mode.locals_are_free() {
            cur.take3()?
        } else {
            [0.0; 3]
        };
        Ok(KFactor { sub, local })
    };
    let k1 = take_k(cur)?;
    let f1 = cur.take(basis.f_strings.len())?.to_vec();
    let k2 = take_k(cur)?;
    let a = cur.take(basis.h_strings.len())?.to_vec();
    let k3 = take_k(cur)?;
    let f2 = cur.take(basis.f_strings.len())?.to_vec();
    let k4 = take_k(cur)?;
    Ok(CartanParams::Recursive {
        k: vec![k1, k2, k3, k4],
        f1,
        a,
        f2,
    })
}

/// Parses a flat parameter vector in the documented order: depth-first over
/// `K1, F1, K2, J, K3, F2, K4`, each `K` contributing its sub-unitary
/// parameters followed by its SU(2) triple; base level `U1, U2, (c1 c2 c3),
/// U3, U4`. In non-full modes the local triples are omitted from the vector.
pub fn unflatten(n: usize, mode: &BuildMode, x: &[f64]) -> Result<CartanParams> {
    let expect = param_count(n, mode)?;
    if x.len() != expect {
        return Err(Error::InvalidArgument(format!(
            "expected {} parameters for n = {} in {} mode, got {}",
            expect,
            n,
            mode.name(),
            x.len()
        )));
    }
    for (i, v) in x.iter().enumerate() {
        if !v.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "parameter {} is not finite",
                i
            )));
        }
    }
    let mut cur = Cursor { data: x, pos: 0 };
    let p = unflatten_level(&mut cur, n, mode)?;
    debug_assert_eq!(cur.pos, x.len());
    Ok(p)
}

fn flatten_level(p: &CartanParams, mode: &BuildMode, out: &mut Vec<f64>) {
    match p {
        CartanParams::Base { locals, couplings } => {
            if mode.locals_are_free() {
                out.extend_from_slice(&locals[0]);
                out.extend_from_slice(&locals[1]);
            }
            out.extend_from_slice(couplings);
            if mode.locals_are_free() {
                out.extend_from_slice(&locals[2]);
                out.extend_from_slice(&locals[3]);
            }
        }
        CartanParams::Recursive { k, f1, a, f2 } => {
            let put_k = |kf: &KFactor, out: &mut Vec<f64>| {
                flatten_level(&kf.sub, mode, out);
                if mode.locals_are_free() {
                    out.extend_from_slice(&kf.local);
                }
            };
            put_k(&k[0], out);
            out.extend_from_slice(f1);
            put_k(&k[1], out);
            out.extend_from_slice(a);
            put_k(&k[2], out);
            out.extend_from_slice(f2);
            put_k(&k[3], out);
        }
    }
}

/// Inverse of [`unflatten`] (locals are dropped, not serialized, in
/// non-full modes).
pub fn flatten(p: &CartanParams, mode: &BuildMode) -> Result<Vec<f64>> {
    let n = p.check_arity()?;
    let mut out = Vec::with_capacity(param_count(n, mode)?);
    flatten_level(p, mode, &mut out);
    Ok(out)
}

/// Product of `exp(-i angle_j P_j)` over a commuting generator set,
/// skipping zero angles.
fn abelian_factor(dim: usize, strings: &[PauliString], angles: &[f64]) -> CMatrix {
    let mut m: Option<CMatrix> = None;
    for (s, &ang) in strings.iter().zip(angles) {
        if ang == 0.0 {
            continue;
        }
        let g = pauli_string_exp(s, ang);
        m = Some(match m {
            None => g,
            Some(acc) => acc.mul(&g),
        });
    }
    m.unwrap_or_else(|| CMatrix::identity(dim))
}

fn build_level(p: &CartanParams, mode: &BuildMode) -> Result<CMatrix> {
    match p {
        CartanParams::Base { locals, couplings } => {
            let basis = cartan_basis(2)?;
            let j = abelian_factor(4, &basis.h_strings, couplings);
            let u12 = kron(&mode.local_matrix(locals[0])?, &mode.local_matrix(locals[1])?);
            let u34 = kron(&mode.local_matrix(locals[2])?, &mode.local_matrix(locals[3])?);
            Ok(u12.mul(&j).mul(&u34))
        }
        CartanParams::Recursive { k, f1, a, f2 } => {
            let n = p.check_arity()?;
            let basis = cartan_basis(n)?;
            let dim = 1usize << n;
            let kmat = |kf: &KFactor| -> Result<CMatrix> {
                Ok(kron(
                    &build_level(&kf.sub, mode)?,
                    &mode.local_matrix(kf.local)?,
                ))
            };
            let mut u = kmat(&k[0])?;
            u = u.mul(&abelian_factor(dim, &basis.f_strings, f1));
            u = u.mul(&kmat(&k[1])?);
            u = u.mul(&abelian_factor(dim, &basis.h_strings, a));
            u = u.mul(&kmat(&k[2])?);
            u = u.mul(&abelian_factor(dim, &basis.f_strings, f2));
            u = u.mul(&kmat(&k[3])?);
            Ok(u)
        }
    }
}

/// Evaluates the parameterized unitary on `2^n` dimensions.
pub fn build_unitary(p: &CartanParams, mode: &BuildMode) -> Result<CMatrix> {
    p.check_arity()?;
    build_level(p, mode)
}

/// Takes columns 0 and 1 of a unitary as the codewords `|0_L>`, `|1_L>`
/// (images of `|0...00>` and `|0...01>`).
pub fn code_from_unitary(u: &CMatrix) -> Result<Code> {
    let d = u.rows();
    if u.cols() != d || !d.is_power_of_two() || d < 2 {
        return Err(Error::InvalidArgument(format!(
            "encoding unitary must be square with power-of-two dimension >= 2, got {}x{}",
            u.rows(),
            u.cols()
        )));
    }
    let res = u.unitarity_residual();
    if res > 1e-8 {
        return Err(Error::InvalidArgument(format!(
            "encoding matrix is not unitary (residual {:.3e})",
            res
        )));
    }
    let n = d.trailing_zeros() as usize;
    Code::new(n, u.column(0), u.column(1))
}

/// Serialized form of a parameter vector: flat reals plus the (n, mode)
/// header, and the fixed local unitary when the mode needs one.
#[derive(Serialize, Deserialize, Clone, Debug)]
#[serde(deny_unknown_fields)]
pub struct ParamsFile {
    pub n: usize,
    /// One of `full`, `nonlocal_only`, `fixed_local`.
    pub mode: String,
    pub params: Vec<f64>,
    /// Row-major 2x2 `[re, im]` entries; required iff mode is `fixed_local`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fixed_local: Option<[[[f64; 2]; 2]; 2]>,
}

impl ParamsFile {
    pub fn new(n: usize, mode: &BuildMode, params: Vec<f64>) -> ParamsFile {
        let fixed_local = match mode {
            BuildMode::FixedLocal(u) => Some([
                [[u[(0, 0)].re, u[(0, 0)].im], [u[(0, 1)].re, u[(0, 1)].im]],
                [[u[(1, 0)].re, u[(1, 0)].im], [u[(1, 1)].re, u[(1, 1)].im]],
            ]),
            _ => None,
        };
        ParamsFile {
            n,
            mode: mode.name().to_string(),
            params,
            fixed_local,
        }
    }

    /// Reconstructs the build mode, validating the header combination.
    pub fn build_mode(&self) -> Result<BuildMode> {
        match (self.mode.as_str(), &self.fixed_local) {
            ("full", None) => Ok(BuildMode::Full),
            ("nonlocal_only", None) => Ok(BuildMode::NonlocalOnly),
            ("fixed_local", Some(rows)) => {
                let m = CMatrix::from_fn(2, 2, |i, j| {
                    Complex64::new(rows[i][j][0], rows[i][j][1])
                });
                if m.unitarity_residual() > 1e-8 {
                    return Err(Error::Config(
                        "fixed_local matrix in params file is not unitary".into(),
                    ));
                }
                Ok(BuildMode::FixedLocal(m))
            }
            ("fixed_local", None) => Err(Error::Config(
                "mode fixed_local requires a fixed_local matrix".into(),
            )),
            (other, Some(_)) => Err(Error::Config(format!(
                "mode {} does not take a fixed_local matrix",
                other
            ))),
            (other, None) => Err(Error::Config(format!(
                "unknown parameter mode '{}'; expected full, nonlocal_only, or fixed_local",
                other
            ))),
        }
    }

    pub fn into_params(&self) -> Result<(CartanParams, BuildMode)> {
        let mode = self.build_mode()?;
        let p = unflatten(self.n, &mode, &self.params)?;
        Ok((p, mode))
    }
}
