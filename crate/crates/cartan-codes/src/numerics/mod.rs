//! Dense complex linear algebra sized for few-qubit systems (dim <= 32).
//!
//! Everything here is deliberately small and self-contained: row-major dense
//! storage, a Householder/QL Hermitian eigensolver, pseudo-inverse square
//! roots with a relative spectral cutoff, Kronecker products, Pauli strings
//! and their exact exponentials, and seeded Haar-random unitaries. No
//! sparsity, no BLAS — at these dimensions the simple kernels are faster and
//! keep results bit-reproducible across runs.

mod eig;

use std::fmt;
use std::ops::{Index, IndexMut};

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};

/// Shorthand for the one scalar type used throughout the crate.
pub type C64 = Complex64;

/// Largest supported Hilbert-space dimension (five qubits).
pub const MAX_DIM: usize = 32;

/// Dense complex matrix, row-major.
#[derive(Clone, PartialEq)]
pub struct CMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl CMatrix {
    /// Builds a matrix from row-major data; the entry count must match and
    /// every entry must be finite.
    pub fn new(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self> {
        if rows * cols != data.len() {
            return Err(Error::InvalidArgument(format!(
                "matrix data length {} does not match {}x{}",
                data.len(),
                rows,
                cols
            )));
        }
        if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidArgument(
                "matrix entries must be finite".into(),
            ));
        }
        Ok(CMatrix { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        CMatrix {
            rows,
            cols,
            data: vec![C64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = CMatrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = C64::new(1.0, 0.0);
        }
        m
    }

    /// Builds from a closure over (row, col).
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        CMatrix { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    /// Matrix product `self * rhs`.
    pub fn mul(&self, rhs: &CMatrix) -> CMatrix {
        assert_eq!(
            self.cols, rhs.rows,
            "dimension mismatch in matrix product: {}x{} * {}x{}",
            self.rows, self.cols, rhs.rows, rhs.cols
        );
        let mut out = CMatrix::zeros(self.rows, rhs.cols);
        // i-k-j loop order keeps both operands streaming row-major.
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.data[i * self.cols + k];
                if a.re == 0.0 && a.im == 0.0 {
                    continue;
                }
                let rrow = &rhs.data[k * rhs.cols..(k + 1) * rhs.cols];
                let orow = &mut out.data[i * rhs.cols..(i + 1) * rhs.cols];
                for (o, r) in orow.iter_mut().zip(rrow.iter()) {
                    *o += a * r;
                }
            }
        }
        out
    }

    pub fn add(&self, rhs: &CMatrix) -> CMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        let data = self
            .data
            .iter()
            .zip(&rhs.data)
            .map(|(a, b)| a + b)
            .collect();
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data,
        }
    }

    pub fn sub(&self, rhs: &CMatrix) -> CMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        let data = self
            .data
            .iter()
            .zip(&rhs.data)
            .map(|(a, b)| a - b)
            .collect();
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data,
        }
    }

    pub fn scale(&self, s: C64) -> CMatrix {
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|a| a * s).collect(),
        }
    }

    /// Conjugate transpose.
    pub fn dagger(&self) -> CMatrix {
        let mut out = CMatrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[(j, i)] = self.data[i * self.cols + j].conj();
            }
        }
        out
    }

    pub fn trace(&self) -> C64 {
        assert!(self.is_square());
        (0..self.rows).map(|i| self.data[i * self.cols + i]).sum()
    }

    /// Trace of `self * rhs` without forming the product.
    pub fn trace_mul(&self, rhs: &CMatrix) -> C64 {
        assert_eq!(self.cols, rhs.rows);
        assert_eq!(self.rows, rhs.cols);
        let mut t = C64::new(0.0, 0.0);
        for i in 0..self.rows {
            for k in 0..self.cols {
                t += self.data[i * self.cols + k] * rhs.data[k * rhs.cols + i];
            }
        }
        t
    }

    /// Largest entry magnitude (max norm).
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Largest entry magnitude of `self - rhs`.
    pub fn max_abs_diff(&self, rhs: &CMatrix) -> f64 {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        self.data
            .iter()
            .zip(&rhs.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Matrix-vector product.
    pub fn matvec(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(self.cols, v.len());
        let mut out = vec![C64::new(0.0, 0.0); self.rows];
        for i in 0..self.rows {
            let row = &self.data[i * self.cols..(i + 1) * self.cols];
            let mut acc = C64::new(0.0, 0.0);
            for (a, x) in row.iter().zip(v.iter()) {
                acc += a * x;
            }
            out[i] = acc;
        }
        out
    }

    pub fn column(&self, j: usize) -> Vec<C64> {
        assert!(j < self.cols);
        (0..self.rows).map(|i| self.data[i * self.cols + j]).collect()
    }

    /// Deviation from Hermiticity, max norm of `self - self^dagger`.
    pub fn hermiticity_residual(&self) -> f64 {
        assert!(self.is_square());
        let mut worst = 0.0f64;
        for i in 0..self.rows {
            for j in i..self.cols {
                let d = (self.data[i * self.cols + j] - self.data[j * self.cols + i].conj()).norm();
                worst = worst.max(d);
            }
        }
        worst
    }

    /// Deviation from unitarity, max norm of `self^dagger * self - I`.
    pub fn unitarity_residual(&self) -> f64 {
        assert!(self.is_square());
        self.dagger()
            .mul(self)
            .max_abs_diff(&CMatrix::identity(self.rows))
    }
}

impl Index<(usize, usize)> for CMatrix {
    type Output = C64;

    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for CMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.cols + j]
    }
}

impl fmt::Debug for CMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "CMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            write!(f, "  ")?;
            for j in 0..self.cols {
                let z = self[(i, j)];
                write!(f, "{:+.4}{:+.4}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

/// Kronecker product; the first factor owns the most significant index block.
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    let mut out = CMatrix::zeros(a.rows * b.rows, a.cols * b.cols);
    for ia in 0..a.rows {
        for ja in 0..a.cols {
            let av = a[(ia, ja)];
            if av.re == 0.0 && av.im == 0.0 {
                continue;
            }
            for ib in 0..b.rows {
                for jb in 0..b.cols {
                    out[(ia * b.rows + ib, ja * b.cols + jb)] = av * b[(ib, jb)];
                }
            }
        }
    }
    out
}

/// Inner product `<a|b>` (conjugate-linear in the first argument).
pub fn inner(a: &[C64], b: &[C64]) -> C64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum()
}

/// Euclidean norm of a complex vector.
pub fn norm(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Eigendecomposition of a Hermitian matrix.
///
/// Returns eigenvalues in ascending order and the matching orthonormal
/// eigenvectors as columns. The input must be Hermitian to within
/// `1e-10 * max(1, |m|_max)`; the residual is measured before the strictly
/// Hermitian part is decomposed. Output is deterministic for equal input.
pub fn hermitian_eig(m: &CMatrix) -> Result<(Vec<f64>, CMatrix)> {
    if !m.is_square() {
        return Err(Error::InvalidArgument(format!(
            "hermitian_eig needs a square matrix, got {}x{}",
            m.rows, m.cols
        )));
    }
    if m.rows == 0 {
        return Err(Error::InvalidArgument(
            "hermitian_eig needs a non-empty matrix".into(),
        ));
    }
    let scale = m.max_abs().max(1.0);
    if m.hermiticity_residual() > 1e-10 * scale {
        return Err(Error::InvalidArgument(format!(
            "matrix is not Hermitian (residual {:.3e})",
            m.hermiticity_residual()
        )));
    }
    eig::hermitian_eig_impl(m)
}

/// Spectral helper shared by `pinv_sqrt` and the recovery construction:
/// builds `sum_k f(lam_k) v_k v_k^dagger` over eigenpairs selected by
/// `lam_k > cutoff`.
pub(crate) fn spectral_map(
    vals: &[f64],
    vecs: &CMatrix,
    cutoff: f64,
    f: impl Fn(f64) -> f64,
) -> CMatrix {
    let n = vals.len();
    let mut out = CMatrix::zeros(n, n);
    for (k, &lam) in vals.iter().enumerate() {
        if lam <= cutoff {
            continue;
        }
        let w = f(lam);
        let col = vecs.column(k);
        for i in 0..n {
            let wi = w * col[i];
            for j in 0..n {
                out[(i, j)] += wi * col[j].conj();
            }
        }
    }
    out
}

/// Pseudo-inverse square root of a positive semidefinite matrix.
///
/// Eigenvalues at or below `rel_tol * lambda_max` are treated as zero
/// (support cutoff). Eigenvalues below `-1e-10 * lambda_max` are rejected as
/// non-PSD. A numerically zero matrix maps to the zero matrix.
pub fn pinv_sqrt(m: &CMatrix, rel_tol: f64) -> Result<CMatrix> {
    if !(rel_tol.is_finite() && rel_tol >= 0.0) {
        return Err(Error::InvalidArgument(
            "pinv_sqrt rel_tol must be finite and non-negative".into(),
        ));
    }
    let (vals, vecs) = hermitian_eig(m)?;
    let lam_max = vals.last().copied().unwrap_or(0.0);
    if lam_max <= 0.0 {
        // Entirely non-positive spectrum: either the zero matrix or not PSD.
        if vals.iter().any(|&l| l < -1e-12) {
            return Err(Error::InvalidArgument(format!(
                "pinv_sqrt input is not PSD (min eigenvalue {:.3e})",
                vals[0]
            )));
        }
        return Ok(CMatrix::zeros(m.rows, m.cols));
    }
    if vals[0] < -1e-10 * lam_max {
        return Err(Error::InvalidArgument(format!(
            "pinv_sqrt input is not PSD (min eigenvalue {:.3e}, max {:.3e})",
            vals[0], lam_max
        )));
    }
    Ok(spectral_map(&vals, &vecs, rel_tol * lam_max, |l| {
        1.0 / l.sqrt()
    }))
}

/// Haar-distributed random unitary of size `d`, deterministic per seed.
///
/// Complex Ginibre sample followed by Gram-Schmidt QR with the R diagonal
/// kept real positive, which is exactly the phase convention that makes the
/// Q factor Haar.
pub fn haar_random_unitary(d: usize, seed: u64) -> Result<CMatrix> {
    if d == 0 {
        return Err(Error::InvalidArgument(
            "haar_random_unitary needs d >= 1".into(),
        ));
    }
    if d > MAX_DIM {
        return Err(Error::Capacity(format!(
            "haar_random_unitary dimension {} exceeds {}",
            d, MAX_DIM
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut g = CMatrix::zeros(d, d);
    for i in 0..d {
        for j in 0..d {
            let re: f64 = StandardNormal.sample(&mut rng);
            let im: f64 = StandardNormal.sample(&mut rng);
            g[(i, j)] = C64::new(re, im);
        }
    }
    // Modified Gram-Schmidt on columns, with a second orthogonalization pass
    // ("twice is enough") so the result is unitary to near machine precision.
    let mut q: Vec<Vec<C64>> = (0..d).map(|j| g.column(j)).collect();
    for j in 0..d {
        for _pass in 0..2 {
            for k in 0..j {
                let proj = inner(&q[k], &q[j]);
                for i in 0..d {
                    let correction = proj * q[k][i];
                    q[j][i] -= correction;
                }
            }
        }
        let nj = norm(&q[j]);
        if nj < 1e-12 {
            return Err(Error::Numeric(
                "Ginibre sample was numerically rank-deficient".into(),
            ));
        }
        for z in q[j].iter_mut() {
            *z /= nj;
        }
    }
    let mut u = CMatrix::zeros(d, d);
    for (j, col) in q.iter().enumerate() {
        for i in 0..d {
            u[(i, j)] = col[i];
        }
    }
    Ok(u)
}

/// Single-qubit Pauli label.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub fn matrix(self) -> CMatrix {
        let (a, b, c, d) = match self {
            Pauli::I => ((1.0, 0.0), (0.0, 0.0), (0.0, 0.0), (1.0, 0.0)),
            Pauli::X => ((0.0, 0.0), (1.0, 0.0), (1.0, 0.0), (0.0, 0.0)),
            Pauli::Y => ((0.0, 0.0), (0.0, -1.0), (0.0, 1.0), (0.0, 0.0)),
            Pauli::Z => ((1.0, 0.0), (0.0, 0.0), (0.0, 0.0), (-1.0, 0.0)),
        };
        CMatrix::new(
            2,
            2,
            vec![
                C64::new(a.0, a.1),
                C64::new(b.0, b.1),
                C64::new(c.0, c.1),
                C64::new(d.0, d.1),
            ],
        )
        .expect("static 2x2")
    }

    fn from_char(c: char) -> Option<Pauli> {
        match c {
            'I' => Some(Pauli::I),
            'X' => Some(Pauli::X),
            'Y' => Some(Pauli::Y),
            'Z' => Some(Pauli::Z),
            _ => None,
        }
    }

    fn to_char(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }
}

/// Multi-qubit Pauli string over {I, X, Y, Z}; qubit 1 is the leftmost label
/// and owns the most significant bit of the basis index.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct PauliString {
    labels: Vec<Pauli>,
}

impl PauliString {
    pub fn new(labels: Vec<Pauli>) -> Result<Self> {
        if labels.is_empty() {
            return Err(Error::InvalidArgument(
                "Pauli string needs at least one label".into(),
            ));
        }
        if labels.len() > 5 {
            return Err(Error::Capacity(format!(
                "Pauli string on {} qubits exceeds the 5-qubit cap",
                labels.len()
            )));
        }
        Ok(PauliString { labels })
    }

    pub fn parse(s: &str) -> Result<Self> {
        let labels = s
            .chars()
            .map(|c| {
                Pauli::from_char(c).ok_or_else(|| {
                    Error::InvalidArgument(format!("bad Pauli label '{}' in \"{}\"", c, s))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        PauliString::new(labels)
    }

    pub fn n_qubits(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[Pauli] {
        &self.labels
    }

    /// Qubit positions (0-based) carrying a non-identity label.
    pub fn support(&self) -> Vec<usize> {
        self.labels
            .iter()
            .enumerate()
            .filter(|(_, p)| **p != Pauli::I)
            .map(|(i, _)| i)
            .collect()
    }

    /// Dense matrix via Kronecker products.
    pub fn matrix(&self) -> CMatrix {
        let mut m = self.labels[0].matrix();
        for p in &self.labels[1..] {
            m = kron(&m, &p.matrix());
        }
        m
    }

    /// Two Pauli strings commute iff they anticommute on an even number of
    /// positions.
    pub fn commutes_with(&self, other: &PauliString) -> bool {
        assert_eq!(self.labels.len(), other.labels.len());
        let anti = self
            .labels
            .iter()
            .zip(&other.labels)
            .filter(|(a, b)| **a != Pauli::I && **b != Pauli::I && a != b)
            .count();
        anti % 2 == 0
    }

    /// Action on a computational basis state: `P |index>` is a basis state up
    /// to a phase; returns (new index, phase).
    pub fn apply_to_basis(&self, index: usize) -> (usize, C64) {
        let n = self.labels.len();
        assert!(index < (1 << n));
        let mut out = index;
        let mut phase = C64::new(1.0, 0.0);
        for (q, p) in self.labels.iter().enumerate() {
            let bit_pos = n - 1 - q; // qubit 1 is the most significant bit
            let bit = (index >> bit_pos) & 1;
            match p {
                Pauli::I => {}
                Pauli::X => out ^= 1 << bit_pos,
                Pauli::Z => {
                    if bit == 1 {
                        phase = -phase;
                    }
                }
                Pauli::Y => {
                    out ^= 1 << bit_pos;
                    // Y|0> = i|1>, Y|1> = -i|0>
                    phase *= if bit == 0 {
                        C64::new(0.0, 1.0)
                    } else {
                        C64::new(0.0, -1.0)
                    };
                }
            }
        }
        (out, phase)
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for p in &self.labels {
            write!(f, "{}", p.to_char())?;
        }
        Ok(())
    }
}

impl fmt::Debug for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PauliString({})", self)
    }
}

/// Exact exponential `exp(-i * angle * P)` for a Pauli string `P`.
///
/// Because `P^2 = I`, the series collapses to
/// `cos(angle) I - i sin(angle) P`; no general matrix exponential is needed.
pub fn pauli_string_exp(p: &PauliString, angle: f64) -> CMatrix {
    let d = 1usize << p.n_qubits();
    let c = angle.cos();
    let ms = C64::new(0.0, -angle.sin());
    let mut out = p.matrix().scale(ms);
    for i in 0..d {
        out[(i, i)] += C64::new(c, 0.0);
    }
    out
}

/// Plain-decimal rendering with a fixed number of significant digits
/// (`0.25` with 12 digits prints as `0.250000000000`). Used for CSV and
/// circuit text output so regression fixtures diff cleanly. NaN prints as
/// `NaN`, infinities as `inf`/`-inf`.
pub fn fmt_sig(x: f64, sig: usize) -> String {
    assert!(sig >= 1, "at least one significant digit");
    if x.is_nan() {
        return "NaN".to_string();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf" } else { "-inf" }.to_string();
    }
    if x == 0.0 {
        return format!("{:.*}", sig, 0.0);
    }
    let exponent = x.abs().log10().floor() as i64;
    let decimals = (sig as i64 - 1 - exponent).clamp(0, 320) as usize;
    format!("{:.*}", decimals, x)
}
