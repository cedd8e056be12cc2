//! Bounded scalar minimization on [0, 1]: coarse grid seeding followed by
//! safeguarded quadratic-fit refinement in every grid basin.

/// Number of seed points, endpoints included.
pub const SEED_POINTS: usize = 9;

pub struct ScalarSearchSpec<'a> {
    pub objective: &'a dyn Fn(f64) -> f64,
    pub tol: f64,
    pub max_iters: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalarMinimum {
    pub omega: f64,
    pub value: f64,
    /// Objective evaluations spent.
    pub evals: usize,
}

fn sanitize(v: f64) -> f64 {
    if v.is_nan() {
        f64::INFINITY
    } else {
        v
    }
}

/// Global minimizer of `spec.objective` over [0, 1].
///
/// Values within `tol` of each other are ties, broken toward the larger ω.
/// Non-finite objective values mark infeasible points.
pub fn omega_search(spec: &ScalarSearchSpec<'_>) -> ScalarMinimum {
    let f = |w: f64| sanitize((spec.objective)(w));
    let grid: Vec<f64> = (0..SEED_POINTS)
        .map(|k| k as f64 / (SEED_POINTS - 1) as f64)
        .collect();
    let vals: Vec<f64> = grid.iter().map(|&w| f(w)).collect();
    let mut evals = SEED_POINTS;

    let mut candidates: Vec<(f64, f64)> = grid.iter().copied().zip(vals.iter().copied()).collect();
    for k in 0..SEED_POINTS {
        if !vals[k].is_finite() {
            continue;
        }
        let left_ok = k == 0 || vals[k] <= vals[k - 1];
        let right_ok = k + 1 == SEED_POINTS || vals[k] <= vals[k + 1];
        if !(left_ok && right_ok) {
            continue;
        }
        let lo = grid[k.saturating_sub(1)];
        let hi = grid[(k + 1).min(SEED_POINTS - 1)];
        let (x, fx, n) = brent_min(&f, lo, hi, spec.tol, spec.max_iters);
        evals += n;
        // refinements that do not beat their seed would only shift ties
        if fx < vals[k] - spec.tol {
            candidates.push((x, fx));
        }
    }

    let best = candidates
        .iter()
        .copied()
        .fold(None::<(f64, f64)>, |acc, (w, v)| match acc {
            None => Some((w, v)),
            Some((bw, bv)) => {
                if v < bv - spec.tol || ((v - bv).abs() <= spec.tol && w > bw) {
                    Some((w, v))
                } else {
                    Some((bw, bv))
                }
            }
        })
        .expect("grid is never empty");
    ScalarMinimum {
        omega: best.0,
        value: best.1,
        evals,
    }
}

/// Brent's local minimizer on `[a, b]`: parabolic interpolation through the
/// three best points, with golden-section steps whenever the fit is rejected.
/// Returns `(x, f(x), evaluations)`.
pub fn brent_min(f: &dyn Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64, max_iters: usize) -> (f64, f64, usize) {
    const GOLD: f64 = 0.381_966_011_250_105_1;
    let eps = f64::EPSILON.sqrt();
    let mut x = a + GOLD * (b - a);
    let (mut w, mut v) = (x, x);
    let mut fx = f(x);
    let (mut fw, mut fv) = (fx, fx);
    let (mut d, mut e) = (0.0f64, 0.0f64);
    let mut evals = 1;

    for _ in 0..max_iters {
        let m = 0.5 * (a + b);
        let tol1 = eps * x.abs() + tol / 3.0;
        let tol2 = 2.0 * tol1;
        if (x - m).abs() <= tol2 - 0.5 * (b - a) {
            break;
        }
        let mut use_golden = true;
        if e.abs() > tol1 && fx.is_finite() && fw.is_finite() && fv.is_finite() {
            let r = (x - w) * (fx - fv);
            let mut q = (x - v) * (fx - fw);
            let mut p = (x - v) * q - (x - w) * r;
            q = 2.0 * (q - r);
            if q > 0.0 {
                p = -p;
            } else {
                q = -q;
            }
            let e_prev = e;
            e = d;
            if p.abs() < (0.5 * q * e_prev).abs() && p > q * (a - x) && p < q * (b - x) {
                d = p / q;
                let u = x + d;
                if (u - a) < tol2 || (b - u) < tol2 {
                    d = if x < m { tol1 } else { -tol1 };
                }
                use_golden = false;
            }
        }
        if use_golden {
            e = if x < m { b - x } else { a - x };
            d = GOLD * e;
        }
        let u = if d.abs() >= tol1 {
            x + d
        } else if d > 0.0 {
            x + tol1
        } else {
            x - tol1
        };
        let fu = f(u);
        evals += 1;
        if fu <= fx {
            if u < x {
                b = x;
            } else {
                a = x;
            }
            v = w;
            fv = fw;
            w = x;
            fw = fx;
            x = u;
            fx = fu;
        } else {
            if u < x {
                a = u;
            } else {
                b = u;
            }
            if fu <= fw || w == x {
                v = w;
                fv = fw;
                w = u;
                fw = fu;
            } else if fu <= fv || v == x || v == w {
                v = u;
                fv = fu;
            }
        }
    }
    (x, fx, evals)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn search(f: &dyn Fn(f64) -> f64) -> ScalarMinimum {
        omega_search(&ScalarSearchSpec {
            objective: f,
            tol: 1e-9,
            max_iters: 100,
        })
    }

    #[test]
    fn convex_quadratic() {
        let r = search(&|w| (w - 0.3).powi(2));
        assert!((r.omega - 0.3).abs() < 1e-6, "{r:?}");
    }

    #[test]
    fn boundary_minima() {
        assert_eq!(search(&|w| w).omega, 0.0);
        assert_eq!(search(&|w| -w).omega, 1.0);
    }

    #[test]
    fn flat_objective_prefers_largest_omega() {
        assert_eq!(search(&|_| 2.5).omega, 1.0);
    }

    #[test]
    fn infeasible_points_are_skipped() {
        let r = search(&|w| if w < 0.05 { f64::INFINITY } else { (w - 0.6).powi(2) });
        assert!((r.omega - 0.6).abs() < 1e-6);
        let r = search(&|w| if w == 0.0 { f64::NAN } else { w });
        assert!(r.omega < 1e-6 && r.omega > 0.0);
    }

    #[test]
    fn finds_global_of_two_basins() {
        // local minimum near 0.2 (value 0.1) and global near 0.8 (value 0)
        let f = |w: f64| ((w - 0.2).powi(2) + 0.1).min((w - 0.8).powi(2) * 4.0);
        let r = search(&f);
        assert!((r.omega - 0.8).abs() < 1e-6, "{r:?}");
    }
}
