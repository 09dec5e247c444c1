//! Gaussian tail helpers built on `erfc`.

use std::f64::consts::FRAC_1_SQRT_2;

/// `P(Z <= z)` for a standard normal `Z`.
pub fn normal_cdf(z: f64) -> f64 {
    0.5 * libm::erfc(-z * FRAC_1_SQRT_2)
}

/// `P(Z > z)` for a standard normal `Z`.
pub fn normal_sf(z: f64) -> f64 {
    0.5 * libm::erfc(z * FRAC_1_SQRT_2)
}

/// `P(lo <= Z <= hi)`, evaluated on the far side of the mean so that tail
/// masses keep full relative precision.
pub fn interval_mass(lo: f64, hi: f64) -> f64 {
    if hi <= lo {
        return 0.0;
    }
    if lo > 0.0 {
        normal_sf(lo) - normal_sf(hi)
    } else if hi < 0.0 {
        normal_cdf(hi) - normal_cdf(lo)
    } else {
        1.0 - (normal_cdf(lo) + normal_sf(hi))
    }
}

/// `ln P(lo <= Z <= hi)`; near-one masses go through `ln_1p` of the complement.
pub fn ln_interval_mass(lo: f64, hi: f64) -> f64 {
    if hi <= lo {
        return f64::NEG_INFINITY;
    }
    if lo <= 0.0 && hi >= 0.0 {
        let outside = normal_cdf(lo) + normal_sf(hi);
        (-outside).ln_1p()
    } else {
        interval_mass(lo, hi).ln()
    }
}

/// `ln erf(a)` for `a > 0`, accurate when `erf(a)` is close to one.
pub fn ln_erf(a: f64) -> f64 {
    let c = libm::erfc(a);
    if c < 0.5 {
        (-c).ln_1p()
    } else {
        libm::erf(a).ln()
    }
}

/// Quintic smoothstep `6u^5 - 15u^4 + 10u^3`, clamped to `[0, 1]`.
pub fn smoothstep(u: f64) -> f64 {
    if u <= 0.0 {
        0.0
    } else if u >= 1.0 {
        1.0
    } else {
        u * u * u * (10.0 + u * (-15.0 + 6.0 * u))
    }
}

/// Derivative of [`smoothstep`], `30 u^2 (1-u)^2` on `[0, 1]`.
pub fn smoothstep_prime(u: f64) -> f64 {
    if u <= 0.0 || u >= 1.0 {
        0.0
    } else {
        let w = u * (1.0 - u);
        30.0 * w * w
    }
}

/// Sup of [`smoothstep_prime`].
pub const SMOOTHSTEP_SLOPE: f64 = 15.0 / 8.0;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn masses_sum_to_one() {
        for &(a, b) in &[(-1.0, 1.0), (0.5, 3.0), (-4.0, -0.2), (-40.0, 40.0)] {
            let m = interval_mass(a, b);
            let rest = normal_cdf(a) + normal_sf(b);
            assert!((m + rest - 1.0).abs() < 1e-15, "{a} {b}");
        }
        assert_eq!(interval_mass(1.0, 1.0), 0.0);
    }

    #[test]
    fn tail_precision() {
        // P(Z > 30) is ~4.9e-198; the sf branch must not cancel.
        let m = interval_mass(30.0, 40.0);
        assert!(m > 4.0e-198 && m < 6.0e-198);
        assert!(ln_interval_mass(-50.0, 50.0).abs() < 1e-300);
        assert!((ln_erf(3.0) - libm::erf(3.0).ln()).abs() < 1e-15);
    }

    #[test]
    fn smoothstep_shape() {
        assert_eq!(smoothstep(0.5), 0.5);
        assert_eq!(smoothstep(0.0), 0.0);
        assert_eq!(smoothstep(1.0), 1.0);
        assert!((smoothstep_prime(0.5) - SMOOTHSTEP_SLOPE).abs() < 1e-15);
        for i in 0..=100 {
            let u = i as f64 / 100.0;
            assert!((smoothstep(u) + smoothstep(1.0 - u) - 1.0).abs() < 1e-14);
        }
    }
}
