//! Smooth radial cutoff used by the perturbed models.
//!
//! `η(r) = 1` on `[0, 1/2]`, `η(r) = 0` for `r ≥ 1`, and on the transition
//! `η = 1 − B(t)/B(1)` with `t = 2r − 1`, where `B` integrates the flat bump
//! `b(t) = exp(−ε / √(t(1−t)))`. With `ε = 0.72` the profile satisfies
//! `|η′| ≤ 3` and `|η″| ≤ 30`.

use crate::jet::Jet2;
use crate::quadrature::gauss_kronrod_15;

const KNOTS: usize = 256;

#[derive(Clone, Debug)]
pub struct CutoffProfile {
    eps: f64,
    total: f64,
    cumulative: Vec<f64>,
}

impl Default for CutoffProfile {
    fn default() -> Self {
        Self::new(0.72)
    }
}

impl CutoffProfile {
    pub fn new(eps: f64) -> Self {
        assert!(eps > 0.0, "bump sharpness must be positive");
        let h = 1.0 / KNOTS as f64;
        let mut cumulative = Vec::with_capacity(KNOTS + 1);
        let mut acc = 0.0;
        cumulative.push(0.0);
        for i in 0..KNOTS {
            let (a, b) = (i as f64 * h, (i + 1) as f64 * h);
            acc += gauss_kronrod_15(|t| bump(eps, t), a, b).0;
            cumulative.push(acc);
        }
        CutoffProfile {
            eps,
            total: acc,
            cumulative,
        }
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    fn primitive(&self, t: f64) -> f64 {
        let h = 1.0 / KNOTS as f64;
        let i = ((t / h).floor() as usize).min(KNOTS - 1);
        let a = i as f64 * h;
        if t <= a {
            return self.cumulative[i];
        }
        self.cumulative[i] + gauss_kronrod_15(|s| bump(self.eps, s), a, t).0
    }

    pub fn eta(&self, r: f64) -> f64 {
        if r <= 0.5 {
            1.0
        } else if r >= 1.0 {
            0.0
        } else {
            1.0 - self.primitive(2.0 * r - 1.0) / self.total
        }
    }

    /// `η` and its first four radial derivatives.
    pub fn derivs(&self, r: f64) -> [f64; 5] {
        if r <= 0.5 {
            return [1.0, 0.0, 0.0, 0.0, 0.0];
        }
        if r >= 1.0 {
            return [0.0; 5];
        }
        let t = 2.0 * r - 1.0;
        let bj = bump_jet(self.eps, t);
        let z = self.total;
        [
            1.0 - self.primitive(t) / z,
            -2.0 * bj.partial(0, 0) / z,
            -4.0 * bj.partial(1, 0) / z,
            -8.0 * bj.partial(2, 0) / z,
            -16.0 * bj.partial(3, 0) / z,
        ]
    }

    /// `η ∘ r` for a radius jet.
    pub fn compose(&self, r: Jet2) -> Jet2 {
        r.compose(self.derivs(r.value()))
    }
}

fn bump(eps: f64, t: f64) -> f64 {
    if t <= 0.0 || t >= 1.0 {
        return 0.0;
    }
    (-eps / (t * (1.0 - t)).sqrt()).exp()
}

fn bump_jet(eps: f64, t: f64) -> Jet2 {
    let tj = Jet2::var_x(t);
    let w = tj * (Jet2::constant(1.0) - tj);
    (w.powf(-0.5) * (-eps)).exp()
}
