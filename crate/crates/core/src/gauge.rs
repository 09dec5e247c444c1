//! Minkowski functional of `{C <= 1}` with `C(x) = sum_j x_j^(2j)` (1-based `j`).
//!
//! `mu -> C(x / mu)` is strictly decreasing on `mu > 0`, and the root of
//! `C(x / mu) = 1` always lies in `[|x|_inf, 2 |x|_inf]`: at the left end the
//! largest coordinate alone contributes one, at the right end every term is at
//! most `4^(-j)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest accepted sup-norm; beyond it `x_j^(2j)` overflows quickly.
pub const MAX_SUP_NORM: f64 = 1e8;
/// Bisection hands over to Newton once the bracket on `lambda / |x|_inf` is this narrow.
const BISECT_WIDTH: f64 = 1e-6;

/// Exponent `2j` of the coordinate stored at 0-based position `i`.
#[inline]
fn exponent(i: usize) -> f64 {
    2.0 * (i + 1) as f64
}

/// `C(x)`, summed in descending order of the terms.
pub fn series_c(x: &[f64]) -> Result<f64> {
    let mut terms = Vec::with_capacity(x.len());
    for (i, &v) in x.iter().enumerate() {
        if !v.is_finite() {
            return Err(Error::InvalidParameter(format!("non-finite entry at {i}")));
        }
        if v == 0.0 {
            continue;
        }
        let t = v.abs().powf(exponent(i));
        if !t.is_finite() {
            return Err(Error::Overflow(format!("|x_{}|^{} overflows for x = {v:e}", i + 1, 2 * (i + 1))));
        }
        terms.push(t);
    }
    terms.sort_by(|a, b| b.total_cmp(a));
    let s: f64 = terms.iter().sum();
    if s.is_finite() {
        Ok(s)
    } else {
        Err(Error::Overflow("series sum overflows".into()))
    }
}

/// `C(x / mu)`.
pub fn residual(x: &[f64], mu: f64) -> Result<f64> {
    let scaled: Vec<f64> = x.iter().map(|v| v / mu).collect();
    series_c(&scaled)
}

fn sup_norm(x: &[f64]) -> Result<f64> {
    let mut m = 0.0f64;
    for (i, &v) in x.iter().enumerate() {
        if !v.is_finite() {
            return Err(Error::InvalidParameter(format!("non-finite entry at {i}")));
        }
        m = m.max(v.abs());
    }
    if m == 0.0 {
        return Err(Error::ZeroVector);
    }
    if m >= MAX_SUP_NORM {
        return Err(Error::InvalidParameter(format!("sup norm {m:e} is at least {MAX_SUP_NORM:e}")));
    }
    Ok(m)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Gauge {
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for Gauge {
    fn default() -> Self {
        Self { tol: 1e-12, max_iter: 200 }
    }
}

/// Log-space terms `(2j, 2j ln|w_j|)` for `w = x / |x|_inf`, sorted by size.
struct Terms {
    exps: Vec<f64>,
    logs: Vec<f64>,
}

impl Terms {
    fn new(x: &[f64], m: f64) -> Self {
        // A term dropped here is below this bound on all of [1, 2].
        let cut = (f64::EPSILON * 1e-4 / x.len() as f64).ln();
        let mut kept: Vec<(f64, f64)> = x
            .iter()
            .enumerate()
            .filter(|(_, v)| **v != 0.0)
            .filter_map(|(i, &v)| {
                let e = exponent(i);
                let l = e * (v.abs() / m).ln();
                (l >= cut).then_some((e, l))
            })
            .collect();
        kept.sort_by(|a, b| b.1.total_cmp(&a.1));
        let (exps, logs) = kept.into_iter().unzip();
        Self { exps, logs }
    }

    /// `(C(w / rho) - 1, d/drho)`.
    fn eval(&self, rho: f64) -> (f64, f64) {
        let lr = rho.ln();
        let mut s = 0.0;
        let mut ds = 0.0;
        for (&e, &l) in self.exps.iter().zip(&self.logs) {
            let t = (l - e * lr).exp();
            s += t;
            ds += e * t;
        }
        (s - 1.0, -ds / rho)
    }
}

impl Gauge {
    pub fn new(tol: f64, max_iter: usize) -> Result<Self> {
        if !(tol > 0.0) || max_iter == 0 {
            return Err(Error::InvalidParameter(format!(
                "gauge needs tol > 0 and max_iter > 0 (got {tol}, {max_iter})"
            )));
        }
        Ok(Self { tol, max_iter })
    }

    /// `lambda(x)`: bisection on the normalized bracket `[1, 2]`, then a
    /// bracketed Newton polish.
    pub fn lambda(&self, x: &[f64]) -> Result<f64> {
        let m = sup_norm(x)?;
        let terms = Terms::new(x, m);
        let (f_lo, _) = terms.eval(1.0);
        if f_lo <= 0.0 {
            // Only the leading coordinate contributes.
            return Ok(m);
        }
        let (f_hi, _) = terms.eval(2.0);
        if !(f_lo > 0.0 && f_hi < 0.0) {
            return Err(Error::BracketFailure { lo: m, hi: 2.0 * m, f_lo, f_hi });
        }
        let (mut lo, mut hi) = (1.0f64, 2.0f64);
        let mut iter = 0;
        while hi - lo > BISECT_WIDTH && iter < self.max_iter {
            let mid = 0.5 * (lo + hi);
            if terms.eval(mid).0 > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
            iter += 1;
        }
        let mut rho = 0.5 * (lo + hi);
        while iter < self.max_iter {
            let (f, df) = terms.eval(rho);
            if f == 0.0 {
                break;
            }
            if f > 0.0 {
                lo = rho;
            } else {
                hi = rho;
            }
            let mut next = rho - f / df;
            if !(next > lo && next < hi) {
                next = 0.5 * (lo + hi);
            }
            let step = (next - rho).abs();
            rho = next;
            iter += 1;
            if step <= self.tol * rho || hi - lo <= self.tol * rho {
                break;
            }
        }
        Ok(m * rho)
    }
}

/// Independent oracle: 200 bisection steps on `C(x / mu) = 1` over
/// `[|x|_inf, 2 |x|_inf]`, full series, no derivatives.
pub fn lambda_oracle(x: &[f64]) -> Result<f64> {
    let m = sup_norm(x)?;
    let (mut lo, mut hi) = (m, 2.0 * m);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if residual(x, mid)? > 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const GOLDEN: f64 = 1.272_019_649_514_069;

    #[test]
    fn series_examples() {
        assert_eq!(series_c(&[1.0, 0.0]).unwrap(), 1.0);
        assert_eq!(series_c(&[0.5, 0.5]).unwrap(), 0.3125);
        assert_eq!(series_c(&[]).unwrap(), 0.0);
        assert_eq!(series_c(&[0.0, 0.0]).unwrap(), 0.0);
        assert!(matches!(series_c(&[1e300, 1e300]), Err(Error::Overflow(_))));
    }

    #[test]
    fn lambda_examples() {
        let g = Gauge::default();
        assert_eq!(g.lambda(&[-3.0, 0.0, 0.0]).unwrap(), 3.0);
        assert!((g.lambda(&[1.0, 1.0]).unwrap() - GOLDEN).abs() < 1e-12);
        assert!((g.lambda(&[0.5, 0.5]).unwrap() - GOLDEN / 2.0).abs() < 1e-12);
        assert!(((1.0 + 5f64.sqrt()) / 2.0).sqrt() - GOLDEN < 1e-15);
        assert!(matches!(g.lambda(&[0.0, 0.0]), Err(Error::ZeroVector)));
        assert!(g.lambda(&[1e8]).is_err());
        assert!(g.lambda(&[f64::NAN]).is_err());
    }

    #[test]
    fn oracle_examples() {
        assert!((lambda_oracle(&[1.0, 0.0]).unwrap() - 1.0).abs() < 1e-9);
        assert!((lambda_oracle(&[1.0, 1.0]).unwrap() - GOLDEN).abs() < 1e-9);
    }

    #[test]
    fn long_slowly_decaying_vector() {
        let x: Vec<f64> = (0..2000).map(|i| 1.0 - 1e-4 * i as f64).collect();
        let g = Gauge::default();
        let a = g.lambda(&x).unwrap();
        let b = lambda_oracle(&x).unwrap();
        assert!((a - b).abs() < 1e-10, "{a} {b}");
    }

    fn vec_strategy() -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(-2.0f64..2.0, 1..50)
            .prop_filter("nonzero", |v| v.iter().any(|x| x.abs() > 1e-6))
    }

    proptest! {
        #[test]
        fn agrees_with_oracle(x in vec_strategy()) {
            let a = Gauge::default().lambda(&x).unwrap();
            let b = lambda_oracle(&x).unwrap();
            prop_assert!((a - b).abs() < 1e-9, "{} vs {}", a, b);
        }

        #[test]
        fn sandwich_and_homogeneity(x in vec_strategy(), a in -5.0f64..5.0) {
            let g = Gauge::default();
            let l = g.lambda(&x).unwrap();
            let m = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            prop_assert!(m <= l + 1e-11 && l <= 2.0 * m + 1e-11);
            prop_assume!(a.abs() > 1e-3);
            let ax: Vec<f64> = x.iter().map(|v| a * v).collect();
            let la = g.lambda(&ax).unwrap();
            prop_assert!((la - a.abs() * l).abs() <= 1e-11 * la.max(1.0));
        }

        #[test]
        fn subadditive_and_lipschitz(x in vec_strategy(), y in vec_strategy()) {
            let g = Gauge::default();
            let n = x.len().max(y.len());
            let pad = |v: &[f64]| { let mut w = v.to_vec(); w.resize(n, 0.0); w };
            let (x, y) = (pad(&x), pad(&y));
            let s: Vec<f64> = x.iter().zip(&y).map(|(a, b)| a + b).collect();
            let d: Vec<f64> = x.iter().zip(&y).map(|(a, b)| a - b).collect();
            let (lx, ly) = (g.lambda(&x).unwrap(), g.lambda(&y).unwrap());
            if s.iter().any(|v| *v != 0.0) {
                prop_assert!(g.lambda(&s).unwrap() <= lx + ly + 1e-11);
            }
            if d.iter().any(|v| *v != 0.0) {
                prop_assert!((lx - ly).abs() <= g.lambda(&d).unwrap() + 1e-11);
            }
        }

        #[test]
        fn residual_monotone_on_bracket(x in vec_strategy()) {
            let m = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            prop_assert!(residual(&x, m).unwrap() >= 1.0 - 1e-15);
            prop_assert!(residual(&x, 2.0 * m).unwrap() <= 1.0);
        }
    }
}
