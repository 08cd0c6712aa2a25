//! Independent numerical oracles for the core linear algebra.
//!
//! The library's Hermitian eigensolver and Pauli-string exponential each
//! get re-derived here by a structurally different method (cyclic Jacobi
//! sweeps; scaled-and-squared power series), and the Haar sampler is
//! checked against the exact first moment of the unitary group.

use cartan_codes::numerics::{
    CMatrix, PauliString, haar_random_unitary, hermitian_eig, pauli_string_exp, pinv_sqrt,
};
use num_complex::Complex64;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

/// Complex Hermitian eigensolver via cyclic Jacobi sweeps: repeatedly
/// diagonalize 2x2 principal subproblems with exact unitary rotations
/// until the off-diagonal mass vanishes. Slow but transparent.
fn jacobi_eigenvalues(a: &CMatrix) -> Vec<f64> {
    let n = a.rows();
    let mut m: Vec<Vec<Complex64>> = (0..n)
        .map(|i| (0..n).map(|j| a[(i, j)]).collect())
        .collect();
    for _sweep in 0..200 {
        let mut off = 0.0_f64;
        for p in 0..n {
            for q in (p + 1)..n {
                off += m[p][q].norm_sqr();
            }
        }
        if off.sqrt() < 1e-14 {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let b = m[p][q];
                if b.norm() < 1e-300 {
                    continue;
                }
                // Eigenvectors of the 2x2 Hermitian block [[app, b], [b*, aqq]].
                let app = m[p][p].re;
                let aqq = m[q][q].re;
                let phase = b / b.norm();
                let h = b.norm();
                let half_gap = 0.5 * (app - aqq);
                let r = (half_gap * half_gap + h * h).sqrt();
                // Unnormalized eigenvector for the low eigenvalue in the
                // dephased basis: (h, lo - app) with lo - app = -(half_gap
                // + r), computed without cancellation when half_gap < 0.
                let hg_plus_r = if half_gap >= 0.0 {
                    half_gap + r
                } else {
                    h * h / (r - half_gap)
                };
                let (v0, v1) = (h, -hg_plus_r);
                let norm = (v0 * v0 + v1 * v1).sqrt();
                if norm < 1e-300 {
                    continue;
                }
                let (c, s) = (v0 / norm, v1 / norm);
                // Column rotation G: col_p' = c*col_p + s*phase*col_q,
                // col_q' = -s*col_p + c*phase*col_q (unitary by construction).
                let g00 = Complex64::new(c, 0.0);
                let g01 = Complex64::new(-s, 0.0);
                let g10 = phase.conj() * s;
                let g11 = phase.conj() * c;
                for i in 0..n {
                    let (x, y) = (m[i][p], m[i][q]);
                    m[i][p] = x * g00 + y * g10;
                    m[i][q] = x * g01 + y * g11;
                }
                for j in 0..n {
                    let (x, y) = (m[p][j], m[q][j]);
                    m[p][j] = g00.conj() * x + g10.conj() * y;
                    m[q][j] = g01.conj() * x + g11.conj() * y;
                }
            }
        }
    }
    let mut vals: Vec<f64> = (0..n).map(|i| m[i][i].re).collect();
    vals.sort_by(|a, b| a.partial_cmp(b).unwrap());
    vals
}

fn random_hermitian(n: usize, rng: &mut StdRng) -> CMatrix {
    let g = CMatrix::from_fn(n, n, |_, _| {
        Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
    });
    g.add(&g.dagger()).scale(Complex64::new(0.5, 0.0))
}

#[test]
fn eigensolver_matches_jacobi_oracle() {
    let mut rng = StdRng::seed_from_u64(42);
    for n in [2usize, 3, 5, 8, 16] {
        for _ in 0..6 {
            let a = random_hermitian(n, &mut rng);
            let (vals, vecs) = hermitian_eig(&a).unwrap();
            let oracle = jacobi_eigenvalues(&a);
            for (x, y) in vals.iter().zip(&oracle) {
                assert!(
                    (x - y).abs() < 1e-10,
                    "n={}: eigenvalue mismatch {} vs jacobi {}",
                    n,
                    x,
                    y
                );
            }
            // Residual and orthonormality of the returned vectors.
            let av = a.mul(&vecs);
            for j in 0..n {
                for i in 0..n {
                    let want = vecs[(i, j)] * vals[j];
                    assert!((av[(i, j)] - want).norm() < 1e-9);
                }
            }
            let vv = vecs.dagger().mul(&vecs);
            assert!(vv.sub(&CMatrix::identity(n)).max_abs() < 1e-10);
        }
    }
}

#[test]
fn eigensolver_handles_degenerate_and_diagonal_cases() {
    // Exactly degenerate spectrum.
    let a = CMatrix::identity(6).scale(Complex64::new(2.5, 0.0));
    let (vals, vecs) = hermitian_eig(&a).unwrap();
    assert!(vals.iter().all(|v| (v - 2.5).abs() < 1e-12));
    assert!(vecs.dagger().mul(&vecs).sub(&CMatrix::identity(6)).max_abs() < 1e-10);

    // A matrix with clustered and separated eigenvalues.
    let mut d = CMatrix::zeros(5, 5);
    for (i, v) in [1.0, 1.0 + 1e-9, 1.0 + 2e-9, 7.0, -3.0].iter().enumerate() {
        d[(i, i)] = Complex64::new(*v, 0.0);
    }
    let u = haar_random_unitary(5, 99).unwrap();
    let a = u.mul(&d).mul(&u.dagger());
    let (vals, _) = hermitian_eig(&a).unwrap();
    let oracle = jacobi_eigenvalues(&a);
    for (x, y) in vals.iter().zip(&oracle) {
        assert!((x - y).abs() < 1e-9);
    }
}

/// exp(-i t P) by scaling and squaring of the bare power series, never
/// using P^2 = I or any eigendecomposition.
fn expm_series(p: &CMatrix, t: f64) -> CMatrix {
    let n = p.rows();
    let squarings = 10u32;
    let small = t / f64::from(1 << squarings);
    let arg = p.scale(Complex64::new(0.0, -small));
    let mut term = CMatrix::identity(n);
    let mut sum = CMatrix::identity(n);
    for k in 1..=24 {
        term = term.mul(&arg).scale(Complex64::new(1.0 / k as f64, 0.0));
        sum = sum.add(&term);
    }
    let mut out = sum;
    for _ in 0..squarings {
        out = out.mul(&out);
    }
    out
}

#[test]
fn pauli_exponential_matches_series_oracle() {
    for (label, t) in [
        ("X", 0.3),
        ("ZZ", -0.7),
        ("XYZ", 1.1),
        ("YIX", 0.05),
        ("ZZXY", 2.4),
    ] {
        let p = PauliString::parse(label).unwrap();
        let fast = pauli_string_exp(&p, t);
        let slow = expm_series(&p.matrix(), t);
        assert!(
            fast.sub(&slow).max_abs() < 1e-12,
            "exp(-i {} {}) disagrees with the series oracle",
            t,
            label
        );
    }
}

#[test]
fn haar_sampler_first_moment() {
    // For Haar-random U(4), E |U_00|^2 = 1/4 with Var = 3/80; the mean of
    // 2000 samples should land within 5 standard errors.
    let n = 2000;
    let mut acc = 0.0;
    for seed in 0..n {
        let u = haar_random_unitary(4, seed).unwrap();
        acc += u[(0, 0)].norm_sqr();
    }
    let mean = acc / n as f64;
    let se = (0.0375_f64 / n as f64).sqrt();
    assert!(
        (mean - 0.25).abs() < 5.0 * se,
        "sample mean {} too far from 1/4 (se {})",
        mean,
        se
    );
}

#[test]
fn pinv_sqrt_inverts_on_the_support() {
    let mut rng = StdRng::seed_from_u64(7);
    // Rank-deficient PSD matrix: G G^dag with a 5x3 G.
    let g = CMatrix::from_fn(5, 3, |_, _| {
        Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
    });
    let a = g.mul(&g.dagger());
    let s = pinv_sqrt(&a, 1e-10).unwrap();
    // s * a * s should be the orthogonal projector onto range(a):
    // idempotent, Hermitian, and acting as identity on columns of a.
    let p = s.mul(&a).mul(&s);
    assert!(p.sub(&p.mul(&p)).max_abs() < 1e-9, "not idempotent");
    assert!(p.sub(&p.dagger()).max_abs() < 1e-10, "not Hermitian");
    let pa = p.mul(&a);
    assert!(pa.sub(&a).max_abs() < 1e-9, "does not fix range(a)");
}

#[test]
fn fixed_seed_unitaries_are_reproducible() {
    let a = haar_random_unitary(8, 123).unwrap();
    let b = haar_random_unitary(8, 123).unwrap();
    let c = haar_random_unitary(8, 124).unwrap();
    assert!(a.sub(&b).max_abs() == 0.0, "same seed must be bit-identical");
    assert!(a.sub(&c).max_abs() > 1e-3, "different seeds must differ");
    assert!(a.unitarity_residual() < 1e-12);
}

#[test]
fn eigensolver_handles_exact_code_projectors() {
    // Exact projectors onto codespaces are the hardest inputs this crate
    // feeds the eigensolver: the trailing blocks of the reduction collapse
    // geometrically toward the subnormal range. The eigenvalues are known
    // in closed form (zeros plus a pair of ones), so assert them directly.
    use cartan_codes::qec::resolve_code;
    for name in ["five_qubit_513", "approx4", "approx3"] {
        let code = resolve_code(name).unwrap();
        let b = code.basis_matrix();
        let p = b.mul(&b.dagger());
        let n = p.rows();
        let (vals, vecs) = hermitian_eig(&p).unwrap();
        assert!(vecs.unitarity_residual() < 1e-12, "{name}: eigenvectors");
        for &v in &vals[..n - 2] {
            assert!(v.abs() < 1e-12, "{name}: null eigenvalue {v:.3e}");
        }
        for &v in &vals[n - 2..] {
            assert!((v - 1.0).abs() < 1e-12, "{name}: unit eigenvalue {v:.3e}");
        }
    }
}
