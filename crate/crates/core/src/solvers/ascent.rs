//! Projected gradient ascent over the contraction ball with Armijo
//! backtracking.

use crate::linalg::Mat;

use super::contraction::project_contraction;

const ARMIJO: f64 = 1e-4;
const MIN_STEP: f64 = 1e-20;

#[derive(Debug, Clone)]
pub(crate) struct AscentOutcome {
    pub c: Mat,
    pub value: f64,
    pub iters: usize,
    /// Stopped by stall, stationarity or the caller's criterion rather than the cap.
    pub converged: bool,
}

pub(crate) struct AscentSettings {
    pub delta: f64,
    pub max_iters: usize,
    /// Absolute improvement below which an iteration counts as a stall.
    pub stall_tol: f64,
    /// 0 disables stall detection.
    pub stall_iters: usize,
}

/// Central-difference gradient of `f` with step `1e-6·(1 + ‖C‖_F)`.
pub(crate) fn fd_gradient(f: &dyn Fn(&Mat) -> Option<f64>, c: &Mat, f0: f64) -> Mat {
    let h = 1e-6 * (1.0 + c.norm());
    let mut g = Mat::zeros(c.nrows(), c.ncols());
    let mut probe = c.clone();
    for i in 0..c.nrows() {
        for j in 0..c.ncols() {
            let orig = probe[(i, j)];
            probe[(i, j)] = orig + h;
            let up = f(&probe).unwrap_or(f0);
            probe[(i, j)] = orig - h;
            let down = f(&probe).unwrap_or(f0);
            probe[(i, j)] = orig;
            g[(i, j)] = (up - down) / (2.0 * h);
        }
    }
    g
}

/// Maximizes `f` from `c0`. `done` is checked before each iteration and ends
/// the ascent when it returns true.
pub(crate) fn projected_ascent(
    f: &dyn Fn(&Mat) -> Option<f64>,
    grad: &dyn Fn(&Mat, f64) -> Mat,
    done: &mut dyn FnMut(&Mat, f64) -> bool,
    c0: Mat,
    s: &AscentSettings,
) -> AscentOutcome {
    let mut c = project_contraction(&c0, s.delta).into_matrix();
    let mut value = f(&c).unwrap_or(f64::NEG_INFINITY);
    let mut step = f64::NAN;
    let mut stalls = 0;

    for it in 0..s.max_iters {
        if done(&c, value) {
            return AscentOutcome { c, value, iters: it, converged: true };
        }
        let g = grad(&c, value);
        let gnorm = g.norm();
        if gnorm == 0.0 || !gnorm.is_finite() {
            return AscentOutcome { c, value, iters: it, converged: true };
        }
        if !step.is_finite() {
            step = 1.0 / gnorm;
        }
        let mut accepted = None;
        while step >= MIN_STEP {
            let trial = project_contraction(&(&c + &g * step), s.delta).into_matrix();
            let moved = &trial - &c;
            if moved.norm() == 0.0 {
                // projected gradient vanishes: stationary on the boundary
                return AscentOutcome { c, value, iters: it, converged: true };
            }
            let slope = g.dot(&moved);
            if let Some(fv) = f(&trial) {
                if fv >= value + ARMIJO * slope {
                    accepted = Some((trial, fv));
                    break;
                }
            }
            step *= 0.5;
        }
        let Some((trial, fv)) = accepted else {
            return AscentOutcome { c, value, iters: it, converged: true };
        };
        let gain = fv - value;
        c = trial;
        value = fv;
        step *= 2.0;
        if s.stall_iters > 0 {
            if gain < s.stall_tol {
                stalls += 1;
                if stalls >= s.stall_iters {
                    return AscentOutcome { c, value, iters: it + 1, converged: true };
                }
            } else {
                stalls = 0;
            }
        }
    }
    let converged = done(&c, value);
    AscentOutcome {
        c,
        value,
        iters: s.max_iters,
        converged,
    }
}
