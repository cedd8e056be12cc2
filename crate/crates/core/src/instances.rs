//! Random two-agent update problems for property sweeps and benchmarks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::fusion::models::RelativeModel;
use crate::fusion::pair::PairProblem;
use crate::linalg::{self, Mat, Vec};
use crate::types::{Belief, CovarianceMatrix, MeasurementKind, Pose2D, RelativeMeasurement};

/// Observer belief, target belief and one relative measurement between them.
#[derive(Debug, Clone)]
pub struct PairInstance {
    pub bel_i: Belief,
    pub bel_j: Belief,
    pub meas: RelativeMeasurement,
}

pub fn rng_for(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    StandardNormal.sample(rng)
}

/// Random SPD matrix `L Lᵀ + floor·I` with `L_ab ~ N(0, scale_a scale_b)`.
pub fn random_spd<R: Rng + ?Sized>(scales: &[f64], floor: f64, rng: &mut R) -> Mat {
    let n = scales.len();
    let l = Mat::from_fn(n, n, |a, _| gaussian(rng) * scales[a]);
    let m = &l * l.transpose() + Mat::from_diagonal(&Vec::from_iterator(n, scales.iter().map(|s| floor * s * s)));
    linalg::symmetrize(&m)
}

/// Measurement noise used by the random instances.
pub fn instance_noise(kind: MeasurementKind) -> CovarianceMatrix {
    let deg = std::f64::consts::PI / 180.0;
    let d = match kind {
        MeasurementKind::RelativePose => vec![0.01, 0.01, (5.0 * deg).powi(2)],
        MeasurementKind::RelativeRange => vec![0.01],
        MeasurementKind::RelativeBearing => vec![(2.0 * deg).powi(2)],
    };
    CovarianceMatrix::from_diagonal(&d).expect("positive diagonal")
}

/// Random 3-D instance of the given measurement kind. Positions are at least
/// 1 m apart and the measurement is simulated from hidden true poses.
pub fn random_instance<R: Rng + ?Sized>(kind: MeasurementKind, rng: &mut R) -> PairInstance {
    let scales = [0.5, 0.5, 0.15];
    let pose = |rng: &mut R| {
        Pose2D::new(
            rng.random_range(-10.0..10.0),
            rng.random_range(-10.0..10.0),
            rng.random_range(-3.0..3.0),
        )
    };
    let xi = pose(rng);
    let mut xj = pose(rng);
    while {
        let [a, b] = xi.position();
        let [c, d] = xj.position();
        (a - c).hypot(b - d) < 1.0
    } {
        xj = pose(rng);
    }
    let p_i = random_spd(&scales, 0.05, rng);
    let p_j = random_spd(&scales, 0.05, rng);
    let r = instance_noise(kind);
    let truth_i = perturb(&xi, &p_i, rng);
    let truth_j = perturb(&xj, &p_j, rng);
    let z_true = RelativeModel::new(kind)
        .evaluate(&truth_i, &truth_j)
        .map(|(z, _)| z)
        .unwrap_or_else(|_| Vec::zeros(kind.dim()));
    let noise = sample_gaussian(r.matrix(), rng);
    let z = z_true + noise;
    PairInstance {
        bel_i: Belief::from_pose(0, xi, CovarianceMatrix::new(p_i).expect("spd"), 0).expect("3-D"),
        bel_j: Belief::from_pose(1, xj, CovarianceMatrix::new(p_j).expect("spd"), 0).expect("3-D"),
        meas: RelativeMeasurement::new(0, 1, kind, z, r, 0).expect("valid noise"),
    }
}

fn perturb<R: Rng + ?Sized>(x: &Pose2D, p: &Mat, rng: &mut R) -> Pose2D {
    Pose2D::from_vector(&(x.to_vector() + sample_gaussian(p, rng)))
}

/// One draw from `N(0, cov)`.
pub fn sample_gaussian<R: Rng + ?Sized>(cov: &Mat, rng: &mut R) -> Vec {
    let n = cov.nrows();
    let e = Vec::from_fn(n, |_, _| gaussian(rng));
    linalg::psd_sqrt(cov) * e
}

/// Instances cycling through the three measurement kinds.
pub fn instance_set(n: usize, seed: u64) -> std::vec::Vec<PairInstance> {
    let mut rng = rng_for(seed);
    (0..n)
        .map(|k| random_instance(MeasurementKind::ALL[k % 3], &mut rng))
        .collect()
}

/// Random cross block that keeps the joint matrix PSD: `A C Bᵀ` with a
/// contraction `C` whose spectral norm is uniform on `[0, 1]`.
pub fn random_cross<R: Rng + ?Sized>(p_i: &Mat, p_j: &Mat, rng: &mut R) -> Mat {
    let c = Mat::from_fn(p_i.nrows(), p_j.nrows(), |_, _| gaussian(rng));
    let norm: f64 = rng.random_range(0.0..=1.0);
    let c = crate::solvers::contraction::normalize_to_norm(&c, norm);
    linalg::psd_sqrt(p_i) * c * linalg::psd_sqrt(p_j).transpose()
}

/// Scalar problem with `h = x_j − x_i`-style Jacobians of random sign and
/// magnitude.
pub fn random_scalar_problem<R: Rng + ?Sized>(rng: &mut R) -> PairProblem {
    let m = |v| Mat::from_element(1, 1, v);
    let pi = 10f64.powf(rng.random_range(-1.5..1.0));
    let pj = 10f64.powf(rng.random_range(-1.5..1.0));
    let r = 10f64.powf(rng.random_range(-2.0..0.5));
    let hi = -rng.random_range(0.5..2.0);
    let hj = rng.random_range(0.5..2.0);
    PairProblem::new(m(pi), m(pj), m(hi), m(hj), m(r)).expect("1x1 shapes")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn instances_are_reproducible_and_valid() {
        let a = instance_set(12, 3);
        let b = instance_set(12, 3);
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.bel_i, y.bel_i);
            assert_eq!(x.meas, y.meas);
            assert!(x.bel_i.cov.is_positive_definite());
        }
        assert_eq!(a[1].meas.kind, MeasurementKind::RelativeRange);
    }

    #[test]
    fn random_cross_is_feasible() {
        let mut rng = rng_for(9);
        for _ in 0..100 {
            let p_i = random_spd(&[1.0, 1.0, 0.2], 0.01, &mut rng);
            let p_j = random_spd(&[0.3, 0.3, 0.1], 0.01, &mut rng);
            let x = random_cross(&p_i, &p_j, &mut rng);
            let j = linalg::joint(&p_i, &x, &p_j);
            assert!(linalg::min_eigenvalue(&j) >= -1e-12 * j.trace());
        }
    }
}
