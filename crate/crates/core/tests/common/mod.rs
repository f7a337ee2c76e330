//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use lamsa::{ModelVariant, SystemParams};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// The equilibrium quartic in factored form, never expanded.
pub fn d_factored(params: &SystemParams, f_l: f64, p: f64) -> f64 {
    let (a, b) = match params.variant {
        ModelVariant::AsPrinted => {
            ((params.stiffness / params.latch_mass).powi(2), (f_l / params.projectile_mass).powi(2))
        }
        ModelVariant::ConstraintConsistent => (params.stiffness.powi(2), f_l * f_l),
    };
    let r = params.latch_radius;
    a * (params.natural_length - p).powi(2) * (2.0 * r * p - p * p) - b * (p - r).powi(2)
}

/// Sign scan on `n` intervals, each bracket refined by the Illinois variant of regula falsi.
pub fn oracle_roots(params: &SystemParams, f_l: f64, lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let f = |p: f64| d_factored(params, f_l, p);
    let h = (hi - lo) / n as f64;
    let mut roots = Vec::new();
    let mut x0 = lo;
    let mut f0 = f(x0);
    for i in 1..=n {
        let x1 = if i == n { hi } else { lo + h * i as f64 };
        let f1 = f(x1);
        if f1 == 0.0 && i < n {
            roots.push(x1);
        } else if f0 * f1 < 0.0 {
            let (mut a, mut fa, mut b, mut fb) = (x0, f0, x1, f1);
            let mut side = 0;
            for _ in 0..200 {
                let c = (a * fb - b * fa) / (fb - fa);
                let fc = f(c);
                if fc == 0.0 || (b - a).abs() < 1e-15 * c.abs().max(1.0) {
                    a = c;
                    b = c;
                    break;
                }
                if fc * fb < 0.0 {
                    a = b;
                    fa = fb;
                    b = c;
                    fb = fc;
                    if side == 1 {
                        fa *= 0.5;
                    }
                    side = 1;
                } else {
                    b = c;
                    fb = fc;
                    if side == -1 {
                        fa *= 0.5;
                    }
                    side = -1;
                }
            }
            roots.push(0.5 * (a + b));
        }
        x0 = x1;
        f0 = f1;
    }
    roots
}

pub fn random_params(rng: &mut ChaCha8Rng) -> (SystemParams, f64) {
    let r = rng.gen_range(0.5..8.0);
    let variant = if rng.gen_bool(0.5) { ModelVariant::AsPrinted } else { ModelVariant::ConstraintConsistent };
    let params = SystemParams::new(
        rng.gen_range(0.2..5.0),
        rng.gen_range(0.2..10.0),
        r,
        rng.gen_range(0.2..5.0),
        rng.gen_range(1.01 * r..3.99 * r),
        variant,
    )
    .unwrap();
    (params, -rng.gen_range(0.01..20.0))
}
