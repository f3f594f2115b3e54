//! Shared helpers for unit tests: deterministic randomness and slow
//! reference computations that implementations are checked against.

use crate::lie::{exp_se3, Pose, Twist};
use crate::{Mat3, Mat4, Vec3};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Counter-based RNG so every test run sees the same draws.
pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Matrix exponential by truncated power series. With arguments bounded
/// by a few units, 24 terms put the truncation error far below 1e-14.
pub fn mat3_exp_series(a: &Mat3, terms: usize) -> Mat3 {
    let mut sum = Mat3::identity();
    let mut term = Mat3::identity();
    for k in 1..=terms {
        term = term * a / (k as f64);
        sum += term;
    }
    sum
}

/// Same series on 4x4 homogeneous matrices.
pub fn mat4_exp_series(a: &Mat4, terms: usize) -> Mat4 {
    let mut sum = Mat4::identity();
    let mut term = Mat4::identity();
    for k in 1..=terms {
        term = term * a / (k as f64);
        sum += term;
    }
    sum
}

/// Random twist with rotation magnitude up to `max_angle` and linear part
/// in [-2, 2] per axis.
pub fn random_twist<R: Rng>(rng: &mut R, max_angle: f64) -> Twist {
    let axis = loop {
        let raw = Vec3::new(
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
        );
        if raw.norm() > 1e-3 {
            break raw.normalize();
        }
    };
    let angle = rng.gen_range(0.0..max_angle);
    let linear = Vec3::new(
        rng.gen_range(-2.0..2.0),
        rng.gen_range(-2.0..2.0),
        rng.gen_range(-2.0..2.0),
    );
    Twist::new(axis * angle, linear)
}

/// Random pose with rotation angle below 3 rad and position in [-5, 5].
pub fn random_pose<R: Rng>(rng: &mut R) -> Pose {
    let mut x = exp_se3(&random_twist(rng, 3.0));
    x.position = Vec3::new(
        rng.gen_range(-5.0..5.0),
        rng.gen_range(-5.0..5.0),
        rng.gen_range(-5.0..5.0),
    );
    x
}

/// Least-squares slope of log(y) against log(x). Used to confirm the
/// convergence order of series cutoffs and finite-difference stencils.
pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> f64 {
    assert_eq!(xs.len(), ys.len());
    assert!(xs.len() >= 2);
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.max(1e-300).ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let mut num = 0.0;
    let mut den = 0.0;
    for (x, y) in lx.iter().zip(ly.iter()) {
        num += (x - mx) * (y - my);
        den += (x - mx) * (x - mx);
    }
    num / den
}

/// Location of the vessel parameter file shipped with the workspace.
pub fn otter_path() -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../params/otter.toml")
}

/// The shipped vessel parameters, loaded fresh.
pub fn otter_params() -> crate::hydro::VesselParams {
    crate::hydro::VesselParams::load(otter_path()).expect("otter parameter file must load")
}

/// Dynamics model for the shipped vessel.
pub fn otter_model() -> crate::hydro::HydroModel {
    crate::hydro::HydroModel::new(otter_params()).expect("otter model must build")
}
