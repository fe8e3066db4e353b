//! Adaptive Gauss–Kronrod and tanh-sinh rules on finite intervals.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
    pub evaluations: usize,
}

impl std::ops::Add for Estimate {
    type Output = Estimate;
    fn add(self, o: Estimate) -> Estimate {
        Estimate {
            value: self.value + o.value,
            error: self.error + o.error,
            evaluations: self.evaluations + o.evaluations,
        }
    }
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for j in 0..7 {
        let dx = h * XGK[j];
        let s = f(c - dx) + f(c + dx);
        kron += WGK[j] * s;
        if j % 2 == 1 {
            gauss += WG[j / 2] * s;
        }
    }
    (kron * h, ((kron - gauss) * h).abs())
}

/// Globally adaptive 7/15-point Gauss–Kronrod quadrature: bisects the
/// interval with the largest error estimate until the total estimate is
/// below `max(abs_tol, rel_tol |I|)`.
pub fn gauss_kronrod<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, abs_tol: f64, rel_tol: f64, max_intervals: usize) -> Result<Estimate> {
    let (v, e) = gk15(&f, a, b);
    let mut parts = vec![(a, b, v, e)];
    let mut evaluations = 15;
    loop {
        let value: f64 = parts.iter().map(|p| p.2).sum();
        let error: f64 = parts.iter().map(|p| p.3).sum();
        if !value.is_finite() {
            return Err(Error::NoConvergence("integrand is not finite".into()));
        }
        if error <= abs_tol.max(rel_tol * value.abs()) {
            return Ok(Estimate {
                value,
                error,
                evaluations,
            });
        }
        if parts.len() >= max_intervals {
            return Err(Error::NoConvergence(format!(
                "Gauss–Kronrod error {error:.3e} above tolerance after {max_intervals} intervals"
            )));
        }
        let (k, _) = parts
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.total_cmp(&y.1 .3))
            .expect("nonempty");
        let (lo, hi, _, _) = parts.swap_remove(k);
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            return Ok(Estimate {
                value,
                error,
                evaluations,
            });
        }
        let (v1, e1) = gk15(&f, lo, mid);
        let (v2, e2) = gk15(&f, mid, hi);
        evaluations += 30;
        parts.push((lo, mid, v1, e1));
        parts.push((mid, hi, v2, e2));
    }
}

/// Tanh-sinh (double exponential) quadrature with level doubling until
/// successive levels agree to `rel_tol`.
pub fn tanh_sinh<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, rel_tol: f64, max_level: u32) -> Result<Estimate> {
    let c = 0.5 * (a + b);
    let h2 = 0.5 * (b - a);
    let half_pi = std::f64::consts::FRAC_PI_2;
    let t_max = 4.0;
    let node = |t: f64| -> f64 {
        let u = half_pi * t.sinh();
        let cu = u.cosh();
        // distance from the nearer endpoint, in units of h2, kept exact near it
        let gap = 1.0 / (u.exp() * cu);
        let w = half_pi * t.cosh() / (cu * cu);
        if gap <= 0.0 {
            return 0.0;
        }
        let (xl, xr) = (a + h2 * gap, b - h2 * gap);
        let fl = if xl > a && xl < b { f(xl) } else { 0.0 };
        let fr = if xr > a && xr < b { f(xr) } else { 0.0 };
        w * (fl + fr)
    };
    let mut h = 1.0;
    let mut evaluations = 1;
    let mut sum = half_pi * f(c);
    let mut t = h;
    while t <= t_max {
        sum += node(t);
        evaluations += 2;
        t += h;
    }
    let mut prev = sum * h * h2;
    for level in 1..=max_level {
        h *= 0.5;
        let mut t = h;
        while t <= t_max {
            sum += node(t);
            evaluations += 2;
            t += 2.0 * h;
        }
        let value = sum * h * h2;
        let diff = (value - prev).abs();
        if !value.is_finite() {
            return Err(Error::NoConvergence("integrand is not finite".into()));
        }
        if diff <= rel_tol * value.abs() && level >= 3 {
            return Ok(Estimate {
                value,
                error: diff,
                evaluations,
            });
        }
        prev = value;
    }
    Err(Error::NoConvergence(format!(
        "tanh-sinh did not settle to {rel_tol:.1e} within {max_level} levels"
    )))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn smooth_integrals() {
        let e = gauss_kronrod(|x: f64| x.exp(), 0.0, 1.0, 0.0, 1e-14, 100).unwrap();
        assert!((e.value - (1f64.exp() - 1.0)).abs() < 1e-14);
        let t = tanh_sinh(|x: f64| x.exp(), 0.0, 1.0, 1e-14, 12).unwrap();
        assert!((t.value - (1f64.exp() - 1.0)).abs() < 1e-13);
    }

    #[test]
    fn endpoint_singularity() {
        // ∫_0^1 x^{-1/2} dx = 2
        let t = tanh_sinh(|x: f64| x.powf(-0.5), 0.0, 1.0, 1e-12, 12).unwrap();
        assert!((t.value - 2.0).abs() < 1e-10);
        let g = gauss_kronrod(|x: f64| x.powf(-0.5), 0.0, 1.0, 0.0, 1e-10, 500).unwrap();
        assert!((g.value - 2.0).abs() < 1e-8);
    }
}
