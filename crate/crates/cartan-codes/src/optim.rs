//! Derivative-free simplex minimizer (Nelder-Mead) with the classical
//! coefficient set: reflection 1, expansion 2, contraction 1/2, shrink 1/2.
//!
//! Termination: best-worst function spread below `f_tol`, simplex diameter
//! below `x_tol`, or the iteration cap. The best vertex never worsens, so the
//! returned value is always <= f(x0).

use crate::error::{Error, Result};

/// Options for a single Nelder-Mead run.
#[derive(Clone, Debug)]
pub struct NmOptions {
    /// Iteration cap (one reflection cycle per iteration).
    pub max_iters: usize,
    /// Terminate when `f_worst - f_best` drops below this.
    pub f_tol: f64,
    /// Terminate when the max vertex-to-best distance drops below this.
    pub x_tol: f64,
    /// Edge length of the initial axis-aligned simplex around x0.
    pub init_step: f64,
}

impl Default for NmOptions {
    fn default() -> Self {
        NmOptions {
            max_iters: 10_000,
            f_tol: 1e-10,
            x_tol: 1e-8,
            init_step: 0.5,
        }
    }
}

/// Result of a Nelder-Mead run.
#[derive(Clone, Debug)]
pub struct NmResult {
    pub x_best: Vec<f64>,
    pub f_best: f64,
    /// Reflection cycles executed.
    pub iterations: usize,
    /// Best value after each iteration; non-increasing by construction.
    pub history: Vec<f64>,
}

/// Minimizes `f` from `x0`. Fails with a numeric error if the objective ever
/// returns a non-finite value.
pub fn nelder_mead(
    mut f: impl FnMut(&[f64]) -> f64,
    x0: &[f64],
    opts: &NmOptions,
) -> Result<NmResult> {
    let k = x0.len();
    if k == 0 {
        return Err(Error::InvalidArgument(
            "nelder_mead needs at least one dimension".into(),
        ));
    }
    if !(opts.f_tol > 0.0 && opts.x_tol > 0.0 && opts.init_step > 0.0) {
        return Err(Error::InvalidArgument(
            "nelder_mead tolerances and init_step must be positive".into(),
        ));
    }

    let mut eval = |x: &[f64]| -> Result<f64> {
        let v = f(x);
        if !v.is_finite() {
            return Err(Error::Numeric(format!(
                "objective returned a non-finite value ({v}) at a simplex vertex"
            )));
        }
        Ok(v)
    };

    // Initial simplex: x0 plus one axis step per dimension.
    let mut xs: Vec<Vec<f64>> = Vec::with_capacity(k + 1);
    xs.push(x0.to_vec());
    for i in 0..k {
        let mut x = x0.to_vec();
        x[i] += opts.init_step;
        xs.push(x);
    }
    let mut fs: Vec<f64> = xs.iter().map(|x| eval(x)).collect::<Result<_>>()?;

    let mut order: Vec<usize> = (0..=k).collect();
    let mut history = Vec::new();
    let mut iterations = 0;

    for _ in 0..opts.max_iters {
        order.sort_by(|&a, &b| fs[a].partial_cmp(&fs[b]).unwrap());
        let best = order[0];
        let worst = order[k];
        let second_worst = order[k - 1];

        let spread = fs[worst] - fs[best];
        let diameter = xs
            .iter()
            .map(|x| {
                x.iter()
                    .zip(&xs[best])
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max)
            })
            .fold(0.0, f64::max);
        if spread < opts.f_tol || diameter < opts.x_tol {
            break;
        }
        iterations += 1;

        // Centroid of all vertices except the worst.
        let mut centroid = vec![0.0; k];
        for &i in order.iter().take(k) {
            for (c, x) in centroid.iter_mut().zip(&xs[i]) {
                *c += x;
            }
        }
        for c in centroid.iter_mut() {
            *c /= k as f64;
        }

        let blend = |a: &[f64], b: &[f64], t: f64| -> Vec<f64> {
            a.iter().zip(b).map(|(x, y)| x + t * (y - x)).collect()
        };

        // Reflection: centroid + (centroid - worst).
        let xr = blend(&centroid, &xs[worst], -1.0);
        let fr = eval(&xr)?;

        if fr < fs[best] {
            // Expansion: centroid + 2 (xr - centroid).
            let xe = blend(&centroid, &xr, 2.0);
            let fe = eval(&xe)?;
            if fe < fr {
                xs[worst] = xe;
                fs[worst] = fe;
            } else {
                xs[worst] = xr;
                fs[worst] = fr;
            }
        } else if fr < fs[second_worst] {
            xs[worst] = xr;
            fs[worst] = fr;
        } else {
            // Contract toward the better of (worst, reflected).
            let (xc, fc) = if fr < fs[worst] {
                let xc = blend(&centroid, &xr, 0.5);
                let fc = eval(&xc)?;
                (xc, fc)
            } else {
                let xc = blend(&centroid, &xs[worst], 0.5);
                let fc = eval(&xc)?;
                (xc, fc)
            };
            if fc < fs[worst].min(fr) {
                xs[worst] = xc;
                fs[worst] = fc;
            } else {
                // Shrink everything toward the best vertex.
                let xb = xs[best].clone();
                for &i in order.iter().skip(1) {
                    xs[i] = blend(&xb, &xs[i], 0.5);
                    fs[i] = eval(&xs[i])?;
                }
            }
        }

        let current_best = fs.iter().cloned().fold(f64::INFINITY, f64::min);
        history.push(current_best);
    }

    let (bi, _) = fs
        .iter()
        .enumerate()
        .min_by(|(_, a), (_, b)| a.partial_cmp(b).unwrap())
        .expect("non-empty simplex");
    Ok(NmResult {
        x_best: xs[bi].clone(),
        f_best: fs[bi],
        iterations,
        history,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_dimensional_quadratic() {
        let r = nelder_mead(|x| (x[0] - 1.0) * (x[0] - 1.0), &[5.0], &NmOptions::default())
            .unwrap();
        assert!((r.x_best[0] - 1.0).abs() < 1e-6, "got {}", r.x_best[0]);
    }

    #[test]
    fn rosenbrock_from_the_classic_start() {
        let rosen = |x: &[f64]| {
            let (a, b) = (x[0], x[1]);
            (1.0 - a).powi(2) + 100.0 * (b - a * a).powi(2)
        };
        let opts = NmOptions {
            max_iters: 20_000,
            f_tol: 1e-14,
            x_tol: 1e-12,
            init_step: 0.5,
        };
        let r = nelder_mead(rosen, &[-1.2, 1.0], &opts).unwrap();
        assert!((r.x_best[0] - 1.0).abs() < 1e-4, "x = {:?}", r.x_best);
        assert!((r.x_best[1] - 1.0).abs() < 1e-4, "x = {:?}", r.x_best);
    }

    #[test]
    fn history_is_non_increasing_and_result_never_worse_than_start() {
        let f = |x: &[f64]| x.iter().map(|v| v * v).sum::<f64>() + 0.3;
        let x0 = [2.0, -3.0, 1.5];
        let r = nelder_mead(f, &x0, &NmOptions::default()).unwrap();
        assert!(r.f_best <= f(&x0));
        for w in r.history.windows(2) {
            assert!(w[1] <= w[0] + 1e-15);
        }
    }

    #[test]
    fn non_finite_objective_is_reported() {
        let r = nelder_mead(|x| (x[0] - 5.0).ln(), &[0.5], &NmOptions::default());
        assert!(matches!(r, Err(Error::Numeric(_))));
    }

    #[test]
    fn empty_input_rejected() {
        assert!(nelder_mead(|_| 0.0, &[], &NmOptions::default()).is_err());
    }
}
