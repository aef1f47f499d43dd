use nalgebra::DVector;

use crate::symmetric_space::SymmetricSpaceModel;
use crate::numerics::{gaussian_vector, stream_rng};
use crate::weyl_moment::{moment_map, orbit_point, sample_direction, OrbitPoint, TangentFrame};

/// f(x) = ‖μ(x) − a‖².
pub fn f_value(model: &SymmetricSpaceModel, x: &DVector<f64>, a: &DVector<f64>) -> f64 {
    (model.p_to_a(x) - a).norm_squared()
}

/// grad f at x: the tangential part of 2(μ(x) − a), as a vector of p.
pub fn grad_f(model: &SymmetricSpaceModel, x: &OrbitPoint, a: &DVector<f64>) -> DVector<f64> {
    grad_f_at(model, &x.x, a)
}

pub fn grad_f_at(model: &SymmetricSpaceModel, x: &DVector<f64>, a: &DVector<f64>) -> DVector<f64> {
    let frame = TangentFrame::at(model, x);
    let d = model.a_to_p(&(model.p_to_a(x) - a)) * 2.0;
    frame.space.project(&d).expect("tangent space lives in p")
}

/// Largest relative error between ⟨grad f, [z, x]⟩ and the central difference
/// of f along Ad(exp tz)·x, over `curves` seeded orbit points and directions.
pub fn gradient_fd_check(model: &SymmetricSpaceModel, q: &DVector<f64>, a: &DVector<f64>, curves: usize, seed: u64) -> f64 {
    let h = 1e-5;
    (1..=curves)
        .map(|s| {
            let x = orbit_point(model, q, &sample_direction(model, seed, s));
            let g = grad_f(model, &x, a);
            let z = gaussian_vector(&mut stream_rng(seed ^ 0x9d, s as u64), model.dim_k(), 1.0);
            let fp = f_value(model, &(model.ad_on_p(&(&z * h)).exp() * &x.x), a);
            let fm = f_value(model, &(model.ad_on_p(&(&z * -h)).exp() * &x.x), a);
            let fd = (fp - fm) / (2.0 * h);
            let exact = g.dot(&model.bracket_kp(&z, &x.x));
            (fd - exact).abs() / exact.abs().max(1.0)
        })
        .fold(0.0, f64::max)
}

/// Height function h_b(x) = ⟨b, x⟩ on the orbit.
#[derive(Clone, Debug)]
pub struct HeightFunction {
    pub b: DVector<f64>,
}

impl HeightFunction {
    pub fn new(b: DVector<f64>) -> Self {
        HeightFunction { b }
    }

    pub fn value(&self, model: &SymmetricSpaceModel, x: &OrbitPoint) -> f64 {
        model.a_to_p(&self.b).dot(&x.x)
    }

    /// ⟨b, μ(x)⟩, equal to `value` because b ∈ a.
    pub fn value_via_moment(&self, model: &SymmetricSpaceModel, x: &OrbitPoint) -> f64 {
        self.b.dot(&moment_map(model, x))
    }

    /// Tangential part of b at x.
    pub fn gradient(&self, model: &SymmetricSpaceModel, x: &OrbitPoint) -> DVector<f64> {
        let frame = TangentFrame::at(model, &x.x);
        frame.space.project(&model.a_to_p(&self.b)).expect("tangent space lives in p")
    }
}
