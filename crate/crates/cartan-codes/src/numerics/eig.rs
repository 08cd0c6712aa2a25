//! Complex Hermitian eigensolver: Householder reduction to real symmetric
//! tridiagonal form, implicit-shift QL on the tridiagonal, then accumulation
//! of the phase and Householder back-transforms. Classic EISPACK-era
//! structure, written directly for `CMatrix`.

use super::{C64, CMatrix};
use crate::error::{Error, Result};

/// One stored Householder reflector H = I - tau * u u^dagger acting on the
/// trailing index range starting at `offset`.
struct Reflector {
    offset: usize,
    tau: f64,
    u: Vec<C64>,
}

pub(super) fn hermitian_eig_impl(a: &CMatrix) -> Result<(Vec<f64>, CMatrix)> {
    let n = a.rows();
    if n == 1 {
        let vals = vec![a[(0, 0)].re];
        return Ok((vals, CMatrix::identity(1)));
    }

    // Work on the exactly Hermitian part so roundoff in the input cannot
    // leak into asymmetric updates.
    let mut w = CMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            w[(i, j)] = (a[(i, j)] + a[(j, i)].conj()) * 0.5;
        }
    }

    // --- Householder reduction to Hermitian tridiagonal form ---
    let mut reflectors: Vec<Reflector> = Vec::new();
    for k in 0..n.saturating_sub(2) {
        let m = n - k - 1;
        let mut x = vec![C64::new(0.0, 0.0); m];
        for i in 0..m {
            x[i] = w[(k + 1 + i, k)];
        }
        // Normalize the column to O(1) before forming the reflector.
        // Near-rank-deficient inputs leave trailing blocks many orders of
        // magnitude below the matrix norm; squaring those entries raw would
        // underflow (and 2/unorm_sqr would overflow). The reflector
        // H = I - tau u u^dagger is invariant under rescaling of u, so only
        // the restored column entry `alpha * unscale` keeps original units.
        let colmax = x
            .iter()
            .map(|z| z.re.abs().max(z.im.abs()))
            .fold(0.0f64, f64::max);
        if colmax == 0.0 {
            // Column already eliminated; nothing to reflect.
            continue;
        }
        let mut unscale = 1.0f64;
        if colmax < 1e-280 {
            // Exact power-of-two boost lifts subnormal entries into the
            // normal range before any division touches them.
            let boost = (2.0f64).powi(1000);
            for z in &mut x {
                *z *= boost;
            }
            unscale /= boost;
        }
        let colmax = x
            .iter()
            .map(|z| z.re.abs().max(z.im.abs()))
            .fold(0.0f64, f64::max);
        for z in &mut x {
            *z /= colmax;
        }
        unscale *= colmax;
        let xnorm = x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let x0 = x[0];
        let phase = if x0.norm() > 0.0 {
            x0 / x0.norm()
        } else {
            C64::new(1.0, 0.0)
        };
        let alpha = -phase * xnorm;
        let mut u = x;
        u[0] -= alpha;
        let unorm_sqr: f64 = u.iter().map(|z| z.norm_sqr()).sum();
        let tau = 2.0 / unorm_sqr;

        // Rank-2 update of the trailing block: W <- W - u w^+ - w u^+ with
        // p = tau W u and w = p - (tau/2)(u^+ p) u.
        let mut p = vec![C64::new(0.0, 0.0); m];
        for i in 0..m {
            let mut acc = C64::new(0.0, 0.0);
            for j in 0..m {
                acc += w[(k + 1 + i, k + 1 + j)] * u[j];
            }
            p[i] = acc * tau;
        }
        let upc: C64 = u.iter().zip(&p).map(|(ui, pi)| ui.conj() * pi).sum();
        let half = upc * (tau * 0.5);
        let wv: Vec<C64> = p
            .iter()
            .zip(&u)
            .map(|(pi, ui)| pi - half * ui)
            .collect();
        for i in 0..m {
            for j in 0..m {
                let delta = u[i] * wv[j].conj() + wv[i] * u[j].conj();
                let entry = &mut w[(k + 1 + i, k + 1 + j)];
                *entry -= delta;
            }
        }

        // The transformed column k is alpha e_1 in original units; mirror it
        // into row k.
        let alpha_entry = alpha * unscale;
        w[(k + 1, k)] = alpha_entry;
        w[(k, k + 1)] = alpha_entry.conj();
        for i in 2..=m {
            w[(k + i, k)] = C64::new(0.0, 0.0);
            w[(k, k + i)] = C64::new(0.0, 0.0);
        }

        reflectors.push(Reflector {
            offset: k + 1,
            tau,
            u,
        });
    }

    // --- Phase-fix the complex subdiagonals to get a real tridiagonal ---
    let mut d: Vec<f64> = (0..n).map(|i| w[(i, i)].re).collect();
    // Subdiagonal with one sentinel slot at the end for the QL sweep.
    let mut e: Vec<f64> = vec![0.0; n];
    let mut phases = vec![C64::new(1.0, 0.0); n];
    for i in 0..n - 1 {
        let mut beta = w[(i + 1, i)];
        let mag = beta.norm();
        e[i] = mag;
        phases[i + 1] = if mag > 0.0 {
            if mag < 1e-280 {
                // Exact power-of-two boost keeps the unit phase accurate even
                // for subnormal couplings.
                beta *= (2.0f64).powi(1000);
            }
            phases[i] * (beta / beta.norm())
        } else {
            phases[i]
        };
    }

    // --- Implicit-shift QL with eigenvector accumulation (real) ---
    let mut z = vec![0.0f64; n * n];
    for i in 0..n {
        z[i * n + i] = 1.0;
    }
    tridiagonal_ql(&mut d, &mut e, &mut z, n)?;

    // --- Assemble complex eigenvectors: V = (prod H_k) * diag(phases) * Z ---
    let mut v = CMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            v[(i, j)] = phases[i] * z[i * n + j];
        }
    }
    for refl in reflectors.iter().rev() {
        let off = refl.offset;
        let m = refl.u.len();
        for col in 0..n {
            let mut s = C64::new(0.0, 0.0);
            for i in 0..m {
                s += refl.u[i].conj() * v[(off + i, col)];
            }
            s *= refl.tau;
            for i in 0..m {
                let delta = s * refl.u[i];
                let entry = &mut v[(off + i, col)];
                *entry -= delta;
            }
        }
    }

    // --- Sort ascending, permuting eigenvector columns alongside ---
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| d[i].partial_cmp(&d[j]).unwrap());
    let vals: Vec<f64> = order.iter().map(|&i| d[i]).collect();
    let mut vecs = CMatrix::zeros(n, n);
    for (newj, &oldj) in order.iter().enumerate() {
        for i in 0..n {
            vecs[(i, newj)] = v[(i, oldj)];
        }
    }
    Ok((vals, vecs))
}

/// Implicit-shift QL iteration on a real symmetric tridiagonal matrix with
/// diagonal `d` and subdiagonal `e` (`e[i]` couples i and i+1), rotations
/// accumulated into the row-major `n x n` matrix `z`.
fn tridiagonal_ql(d: &mut [f64], e: &mut [f64], z: &mut [f64], n: usize) -> Result<()> {
    if n == 1 {
        return Ok(());
    }
    let eps = f64::EPSILON;
    // Absolute negligibility floor: couplings below eps * ||T|| cannot move
    // any eigenvalue by more than the solver's backward error, and without
    // the floor a coupling sitting next to exactly-zero diagonal entries
    // would never test as negligible.
    let anorm = d
        .iter()
        .chain(e.iter())
        .fold(0.0f64, |acc, &x| acc.max(x.abs()));
    let floor = eps * anorm + f64::MIN_POSITIVE;
    for l in 0..n {
        let mut iter = 0;
        loop {
            // Find the first negligible coupling at or after l.
            let mut m = l;
            while m < n - 1 {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= eps * dd + floor {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 50 {
                return Err(Error::Numeric(
                    "tridiagonal QL failed to converge in 50 iterations".into(),
                ));
            }
            // Wilkinson-style shift from the leading 2x2.
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let mut s = 1.0;
            let mut c = 1.0;
            let mut p = 0.0;
            let mut underflow = false;
            for i in (l..m).rev() {
                let mut f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                for k in 0..n {
                    f = z[k * n + i + 1];
                    z[k * n + i + 1] = s * z[k * n + i] + c * f;
                    z[k * n + i] = c * z[k * n + i] - s * f;
                }
            }
            if underflow {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::super::{haar_random_unitary, hermitian_eig};
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_hermitian(n: usize, seed: u64) -> CMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut m = CMatrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = C64::new(rng.gen_range(-1.0..1.0), 0.0);
            for j in i + 1..n {
                let z = C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                m[(i, j)] = z;
                m[(j, i)] = z.conj();
            }
        }
        m
    }

    fn check_decomposition(m: &CMatrix, tol: f64) {
        let n = m.rows();
        let (vals, vecs) = hermitian_eig(m).unwrap();
        // Ascending order.
        for w in vals.windows(2) {
            assert!(w[0] <= w[1] + 1e-14, "eigenvalues not ascending: {:?}", vals);
        }
        // Orthonormal eigenvectors.
        assert!(
            vecs.unitarity_residual() < tol,
            "eigenvector orthonormality residual {:.3e}",
            vecs.unitarity_residual()
        );
        // Reconstruction V diag(vals) V^dagger == M.
        let mut lam = CMatrix::zeros(n, n);
        for i in 0..n {
            lam[(i, i)] = C64::new(vals[i], 0.0);
        }
        let rec = vecs.mul(&lam).mul(&vecs.dagger());
        let scale = m.max_abs().max(1.0);
        assert!(
            rec.max_abs_diff(m) < tol * scale,
            "reconstruction residual {:.3e}",
            rec.max_abs_diff(m)
        );
    }

    #[test]
    fn random_hermitian_matrices_across_sizes() {
        for n in [1, 2, 3, 4, 5, 8, 13, 16, 32] {
            for seed in 0..4 {
                let m = random_hermitian(n, 100 * n as u64 + seed);
                check_decomposition(&m, 1e-10);
            }
        }
    }

    #[test]
    fn known_spectrum_survives_haar_conjugation() {
        // Build M = U diag(spec) U^dagger and recover spec exactly.
        let spec = [-3.0, -3.0, 0.0, 1e-9, 2.5, 2.5, 2.5, 7.0];
        let u = haar_random_unitary(8, 99).unwrap();
        let mut lam = CMatrix::zeros(8, 8);
        for (i, &s) in spec.iter().enumerate() {
            lam[(i, i)] = C64::new(s, 0.0);
        }
        let m = u.mul(&lam).mul(&u.dagger());
        let (vals, _) = hermitian_eig(&m).unwrap();
        for (got, want) in vals.iter().zip(spec.iter()) {
            assert!(
                (got - want).abs() < 1e-9,
                "eigenvalue {} vs {}",
                got,
                want
            );
        }
        check_decomposition(&m, 1e-10);
    }

    #[test]
    fn degenerate_and_trivial_spectra() {
        check_decomposition(&CMatrix::identity(6), 1e-12);
        check_decomposition(&CMatrix::zeros(5, 5), 1e-12);
        // Rank-one projector.
        let mut p = CMatrix::zeros(4, 4);
        p[(2, 2)] = C64::new(1.0, 0.0);
        check_decomposition(&p, 1e-12);
    }

    #[test]
    fn deterministic_for_equal_input() {
        let m = random_hermitian(12, 7);
        let (v1, q1) = hermitian_eig(&m).unwrap();
        let (v2, q2) = hermitian_eig(&m).unwrap();
        assert_eq!(v1, v2);
        assert_eq!(q1, q2);
    }

    #[test]
    fn wide_dynamic_range() {
        let mut m = random_hermitian(6, 3).scale(C64::new(1e-8, 0.0));
        m[(0, 0)] += C64::new(1e6, 0.0);
        check_decomposition(&m, 1e-10);
    }

    #[test]
    fn low_rank_projectors_at_full_dimension() {
        // Rank-2 projectors leave the eliminated trailing blocks many orders
        // of magnitude below the matrix norm, which used to underflow the
        // reflector normalization.
        for seed in [5, 17] {
            let u = haar_random_unitary(32, seed).unwrap();
            let mut p = CMatrix::zeros(32, 32);
            for i in 0..32 {
                for j in 0..32 {
                    let mut acc = C64::new(0.0, 0.0);
                    for c in 0..2 {
                        acc += u[(i, c)] * u[(j, c)].conj();
                    }
                    p[(i, j)] = acc;
                }
            }
            check_decomposition(&p, 1e-12);
            let (vals, _) = hermitian_eig(&p).unwrap();
            for &v in &vals[..30] {
                assert!(v.abs() < 1e-12, "null-space eigenvalue {v:.3e}");
            }
            for &v in &vals[30..] {
                assert!((v - 1.0).abs() < 1e-12, "range eigenvalue {v:.3e}");
            }
        }
    }

    #[test]
    fn deeply_scaled_matrices_keep_relative_accuracy() {
        // Entries near 1e-160 square into the subnormal range; the scaled
        // reflector path must still produce a faithful decomposition.
        let m = random_hermitian(8, 11).scale(C64::new(1e-160, 0.0));
        let n = m.rows();
        let (vals, vecs) = hermitian_eig(&m).unwrap();
        assert!(vecs.unitarity_residual() < 1e-12);
        let mut lam = CMatrix::zeros(n, n);
        for i in 0..n {
            lam[(i, i)] = C64::new(vals[i], 0.0);
        }
        let rec = vecs.mul(&lam).mul(&vecs.dagger());
        assert!(
            rec.max_abs_diff(&m) < 1e-12 * m.max_abs(),
            "reconstruction residual {:.3e}",
            rec.max_abs_diff(&m)
        );
    }
}
