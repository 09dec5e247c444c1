//! The bump `b`, its tensor version `b_n`, the `kappa_n` schedule and the
//! smoothed functionals `nu_n` and `phi_n`.
//!
//! `nu_n(v)` is the mean of `b_n(Y)` for independent `Y_j ~ N(v_j, sigma_j^2)`
//! with `sigma_j^2 = 2^(j-1) / kappa_n`. Since `b_n = min_j (1 - b(y_j))`,
//!
//! ```text
//! nu_n(v) = int_0^1 prod_j P(b(Y_j) <= 1 - s) ds,
//! ```
//!
//! and `{b <= 1 - s}` is the interval `[2g1 + g1 u, M + 2 - u]` where `s = S(u)`
//! for the quintic smoothstep `S`, because `S(1 - u) = 1 - S(u)`. Substituting
//! `s = S(u)` turns the outer integral into `int_0^1 S'(u) prod_j P_j(u) du`
//! with no inversion of `S`.

use std::f64::consts::{LN_2, PI, SQRT_2};

use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::integrate;
use crate::rng::stream_rng;
use crate::seppoly::SepPolyQ;
use crate::space_net::Net;
use crate::special::{ln_erf, ln_interval_mass, smoothstep, smoothstep_prime, SMOOTHSTEP_SLOPE};

/// Beyond this many standard deviations a Gaussian mass is below the
/// smallest subnormal double.
pub const Z_SKIP: f64 = 38.5;
/// A transition is replaced by a step once the induced error is below this.
pub const STEP_TOL: f64 = 1e-12;
/// Absolute tolerance of the outer quadrature.
pub const QUAD_TOL: f64 = 1e-10;
/// Target for `1 - prod_j erf(g2 / (2 sqrt2 sigma_j))`; the invariant is `< 1/2`.
pub const TAIL_TARGET: f64 = 0.45;

const SQRT_2_OVER_PI: f64 = 0.797_884_560_802_865_4;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BumpSpec {
    pub g1: f64,
    pub m_bound: f64,
}

impl BumpSpec {
    pub fn new(g1: f64, m_bound: f64) -> Result<Self> {
        if !(g1 > 0.0) || !g1.is_finite() || !m_bound.is_finite() || !(3.0 * g1 < m_bound + 1.0) {
            return Err(Error::InvalidParameter(format!(
                "bump needs 0 < 2g1 < 3g1 < M+1 (g1 = {g1}, M = {m_bound})"
            )));
        }
        Ok(Self { g1, m_bound })
    }

    /// One off `(2g1, M+2)`, zero on `[3g1, M+1]`, smoothstep in between.
    pub fn b(&self, t: f64) -> f64 {
        let g1 = self.g1;
        if t <= 2.0 * g1 || t >= self.m_bound + 2.0 {
            1.0
        } else if t < 3.0 * g1 {
            1.0 - smoothstep((t - 2.0 * g1) / g1)
        } else if t <= self.m_bound + 1.0 {
            0.0
        } else {
            smoothstep(t - self.m_bound - 1.0)
        }
    }

    /// `b_n(y) = min_j (1 - b(y_j))`.
    pub fn bn(&self, y: &[f64]) -> f64 {
        y.iter().fold(1.0f64, |m, &t| m.min(1.0 - self.b(t)))
    }

    pub fn lipschitz(&self) -> f64 {
        SMOOTHSTEP_SLOPE / self.g1.min(1.0)
    }

    /// `{b <= 1 - S(u)}` in closed form.
    pub fn sublevel_at(&self, u: f64) -> (f64, f64) {
        (2.0 * self.g1 + self.g1 * u, self.m_bound + 2.0 - u)
    }

    /// `{t : b(t) <= s}` for `s` in `[0, 1)`, by bisection on both transition
    /// branches. Independent of [`Self::sublevel_at`].
    pub fn sublevel_interval(&self, s: f64) -> (f64, f64) {
        let bisect = |mut lo: f64, mut hi: f64, decreasing: bool| {
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                let above = self.b(mid) > s;
                if above == decreasing {
                    lo = mid;
                } else {
                    hi = mid;
                }
                if hi - lo <= 1e-12 * hi.abs().max(1e-300) {
                    break;
                }
            }
            0.5 * (lo + hi)
        };
        let m = self.m_bound;
        (bisect(2.0 * self.g1, 3.0 * self.g1, true), bisect(m + 1.0, m + 2.0, false))
    }

    fn classify(&self, v: f64, sigma: f64) -> Factor {
        let g1 = self.g1;
        let m = self.m_bound;
        let lower = if (v - 3.0 * g1) / sigma > Z_SKIP {
            Factor::One
        } else if (2.0 * g1 - v) / sigma > Z_SKIP {
            Factor::Zero
        } else if SMOOTHSTEP_SLOPE * (sigma / g1) * SQRT_2_OVER_PI <= STEP_TOL {
            Factor::Step(((v - 2.0 * g1) / g1).clamp(0.0, 1.0))
        } else {
            Factor::Smooth
        };
        let upper = if (m + 1.0 - v) / sigma > Z_SKIP {
            Factor::One
        } else if (v - m - 2.0) / sigma > Z_SKIP {
            Factor::Zero
        } else if SMOOTHSTEP_SLOPE * sigma * SQRT_2_OVER_PI <= STEP_TOL {
            Factor::Step((m + 2.0 - v).clamp(0.0, 1.0))
        } else {
            Factor::Smooth
        };
        lower.combine(upper)
    }

    fn far_inside(&self, v: f64, sigma: f64) -> bool {
        (v - 3.0 * self.g1) / sigma > Z_SKIP && (self.m_bound + 1.0 - v) / sigma > Z_SKIP
    }
}

/// How one coordinate's interval mass behaves as a function of `u`.
#[derive(Clone, Copy, Debug, PartialEq)]
enum Factor {
    One,
    Zero,
    /// Indicator of `u < cap`.
    Step(f64),
    Smooth,
}

impl Factor {
    fn combine(self, other: Factor) -> Factor {
        use Factor::*;
        match (self, other) {
            (Zero, _) | (_, Zero) => Zero,
            (Smooth, _) | (_, Smooth) => Smooth,
            (One, x) | (x, One) => x,
            (Step(a), Step(b)) => Step(a.min(b)),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum NuBackend {
    #[default]
    #[serde(alias = "layer_cake")]
    Layercake,
    #[serde(alias = "montecarlo", alias = "monte_carlo")]
    Mc,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct NuValue {
    pub value: f64,
    /// Zero for the deterministic backend.
    pub std_error: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MollifierFamily {
    bump: BumpSpec,
    g2: f64,
    /// `ln kappa_n` at position `n - 1`.
    log_kappa: Vec<f64>,
    /// Largest standard deviation coordinate `j` ever gets: at stage `j + 1`.
    sigma_cap: Vec<f64>,
    backend: NuBackend,
    mc_samples: usize,
    seed: u64,
}

/// `(2/n) (2 ln n! + ln T^_n - ln Vol(A_n))`, the least admissible `ln kappa_n`.
pub fn factorial_log_bound(bump: &BumpSpec, n: usize) -> f64 {
    let nf = n as f64;
    let rhs = 2.0 * libm::lgamma(nf + 1.0) + ln_t_hat(n) - ln_vol(bump, n);
    2.0 * rhs / nf
}

/// `ln T^_n = (n/2) ln pi + n(n+1)/4 ln 2`.
pub fn ln_t_hat(n: usize) -> f64 {
    let nf = n as f64;
    0.5 * nf * PI.ln() + 0.25 * nf * (nf + 1.0) * LN_2
}

/// `ln Vol(A_n) = n ln(M + 2 - 2 g1)`.
pub fn ln_vol(bump: &BumpSpec, n: usize) -> f64 {
    n as f64 * (bump.m_bound + 2.0 - 2.0 * bump.g1).ln()
}

/// Standard deviation of 0-based coordinate `i` at `ln kappa`.
#[inline]
pub fn sigma_at(i: usize, log_kappa: f64) -> f64 {
    (0.5 * (i as f64 * LN_2 - log_kappa)).exp()
}

/// `1 - prod_{j < n} erf(g2 / (2 sqrt2 sigma_j))` at `ln kappa`.
pub fn tail_quantity(g2: f64, n: usize, log_kappa: f64) -> f64 {
    let mut s = 0.0;
    for i in (0..n).rev() {
        let a = g2 / (2.0 * SQRT_2 * sigma_at(i, log_kappa));
        if libm::erfc(a) < 1e-300 {
            break;
        }
        s += ln_erf(a);
    }
    -s.exp_m1()
}

/// Nondecreasing `ln kappa_1 .. ln kappa_N`, each the least value meeting the
/// factorial bound and the tail target, found by doubling then bisection.
pub fn kappa_schedule(bump: &BumpSpec, g2: f64, n_max: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(n_max);
    let mut prev = f64::NEG_INFINITY;
    for n in 1..=n_max {
        let fact = factorial_log_bound(bump, n);
        let start = prev.max(fact + 1e-12 * fact.abs().max(1.0));
        let lk = if tail_quantity(g2, n, start) <= TAIL_TARGET {
            start
        } else {
            let (mut lo, mut hi) = (start, start + LN_2);
            while tail_quantity(g2, n, hi) > TAIL_TARGET {
                lo = hi;
                hi += LN_2;
            }
            while hi - lo > 1e-12 * hi.abs().max(1.0) {
                let mid = 0.5 * (lo + hi);
                if tail_quantity(g2, n, mid) > TAIL_TARGET {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            hi
        };
        out.push(lk);
        prev = lk;
    }
    out
}

impl MollifierFamily {
    pub fn new(
        bump: BumpSpec,
        g2: f64,
        n_max: usize,
        backend: NuBackend,
        mc_samples: usize,
        seed: u64,
    ) -> Result<Self> {
        if n_max == 0 {
            return Err(Error::InvalidParameter("mollifier family needs at least one stage".into()));
        }
        if !(g2 > 6.0 * bump.g1) {
            return Err(Error::InvalidParameter(format!("need 3 g1 < g2 / 2 (g1 = {}, g2 = {g2})", bump.g1)));
        }
        if backend == NuBackend::Mc && mc_samples == 0 {
            return Err(Error::InvalidParameter("Monte Carlo backend needs samples".into()));
        }
        let log_kappa = kappa_schedule(&bump, g2, n_max);
        let sigma_cap = (0..n_max).map(|i| sigma_at(i, log_kappa[i])).collect();
        Ok(Self { bump, g2, log_kappa, sigma_cap, backend, mc_samples, seed })
    }

    pub fn bump(&self) -> &BumpSpec {
        &self.bump
    }
    pub fn n_max(&self) -> usize {
        self.log_kappa.len()
    }
    pub fn log_kappa(&self) -> &[f64] {
        &self.log_kappa
    }
    pub fn backend(&self) -> NuBackend {
        self.backend
    }
    pub fn mc_samples(&self) -> usize {
        self.mc_samples
    }
    pub fn seed(&self) -> u64 {
        self.seed
    }
    pub fn lipschitz(&self) -> f64 {
        self.bump.lipschitz()
    }

    /// Same family with a different evaluation backend.
    pub fn with_backend(&self, backend: NuBackend, mc_samples: usize) -> Self {
        Self { backend, mc_samples, ..self.clone() }
    }

    /// `sigma_j` for 0-based coordinate `i` at 1-based stage `n > i`.
    pub fn sigma(&self, i: usize, n: usize) -> f64 {
        sigma_at(i, self.log_kappa[n - 1])
    }

    /// `ln T_n = -(n/2) ln kappa_n + ln T^_n`.
    pub fn ln_t(&self, n: usize) -> f64 {
        -0.5 * n as f64 * self.log_kappa[n - 1] + ln_t_hat(n)
    }

    /// Replays the schedule invariants; the first failing stage is an error.
    pub fn verify_schedule(&self) -> Result<()> {
        let mut prev = f64::NEG_INFINITY;
        for (k, &lk) in self.log_kappa.iter().enumerate() {
            let n = k + 1;
            let fact = factorial_log_bound(&self.bump, n);
            let tail = tail_quantity(self.g2, n, lk);
            if !(lk >= fact && tail < 0.5 && lk >= prev) {
                return Err(Error::InvariantViolation(format!(
                    "kappa schedule at n = {n}: ln kappa = {lk}, factorial bound = {fact}, tail = {tail}, previous = {prev}"
                )));
            }
            prev = lk;
        }
        Ok(())
    }

    fn check_len(&self, n: usize) -> Result<()> {
        if n > self.n_max() {
            Err(Error::IndexOutOfRange { index: n, len: self.n_max() })
        } else {
            Ok(())
        }
    }

    /// `nu_n(v)` with `n = v.len()` on the configured backend. `stream`
    /// identifies the evaluation for Monte Carlo seeding.
    pub fn nu(&self, v: &[f64], stream: u64) -> Result<NuValue> {
        self.check_len(v.len())?;
        Ok(match self.backend {
            NuBackend::Layercake => NuValue { value: self.nu_layercake_unchecked(v), std_error: 0.0 },
            NuBackend::Mc => self.nu_montecarlo_unchecked(v, self.mc_samples, stream),
        })
    }

    pub fn nu_layercake(&self, v: &[f64]) -> Result<f64> {
        self.check_len(v.len())?;
        Ok(self.nu_layercake_unchecked(v))
    }

    fn nu_layercake_unchecked(&self, v: &[f64]) -> f64 {
        let n = v.len();
        if n == 0 {
            return 1.0;
        }
        let lk = self.log_kappa[n - 1];
        let mut smooth = Vec::new();
        let mut u_max = 1.0f64;
        for (i, &vi) in v.iter().enumerate() {
            let s = sigma_at(i, lk);
            match self.bump.classify(vi, s) {
                Factor::One => {}
                Factor::Zero => return 0.0,
                Factor::Step(c) => u_max = u_max.min(c),
                Factor::Smooth => smooth.push((vi, s)),
            }
        }
        self.layer_cake_stage(&smooth, u_max)
    }

    /// `int_0^u_max S'(u) prod P_j(u) du` over the coordinates that are neither
    /// constant nor steps.
    fn layer_cake_stage(&self, smooth: &[(f64, f64)], u_max: f64) -> f64 {
        if u_max <= 0.0 {
            return 0.0;
        }
        if smooth.is_empty() {
            return smoothstep(u_max);
        }
        let bump = self.bump;
        let g1 = bump.g1;
        let mut breaks = Vec::with_capacity(8 * smooth.len());
        for &(v, s) in smooth {
            for (center, w) in [((v - 2.0 * g1) / g1, s / g1), (bump.m_bound + 2.0 - v, s)] {
                for k in [-12.0, -4.0, 4.0, 12.0] {
                    breaks.push(center + k * w);
                }
            }
        }
        let f = |u: f64| {
            let (lo, hi) = bump.sublevel_at(u);
            let ln_p: f64 = smooth
                .iter()
                .map(|&(v, s)| ln_interval_mass((lo - v) / s, (hi - v) / s))
                .sum();
            smoothstep_prime(u) * ln_p.exp()
        };
        integrate(f, 0.0, u_max, QUAD_TOL, &breaks).value.clamp(0.0, 1.0)
    }

    /// Plain Monte Carlo mean of `b_n(Y)` with its standard error.
    pub fn nu_montecarlo(&self, v: &[f64], samples: usize, stream: u64) -> Result<NuValue> {
        self.check_len(v.len())?;
        if samples == 0 {
            return Err(Error::InvalidParameter("Monte Carlo needs samples".into()));
        }
        Ok(self.nu_montecarlo_unchecked(v, samples, stream))
    }

    fn nu_montecarlo_unchecked(&self, v: &[f64], samples: usize, stream: u64) -> NuValue {
        let n = v.len();
        let exact = |value| NuValue { value, std_error: 0.0 };
        if n == 0 {
            return exact(1.0);
        }
        let lk = self.log_kappa[n - 1];
        let mut live = Vec::new();
        for (i, &vi) in v.iter().enumerate() {
            let s = sigma_at(i, lk);
            if (2.0 * self.bump.g1 - vi) / s > Z_SKIP || (vi - self.bump.m_bound - 2.0) / s > Z_SKIP {
                return exact(0.0);
            }
            if !self.bump.far_inside(vi, s) {
                live.push((vi, s));
            }
        }
        if live.is_empty() {
            return exact(1.0);
        }
        let mut rng = stream_rng(self.seed, n as u64, stream);
        let (mut sum, mut sum_sq) = (0.0, 0.0);
        for _ in 0..samples {
            let val = live.iter().fold(1.0f64, |m, &(vi, s)| {
                let z: f64 = StandardNormal.sample(&mut rng);
                m.min(1.0 - self.bump.b(vi + s * z))
            });
            sum += val;
            sum_sq += val * val;
        }
        let k = samples as f64;
        let mean = sum / k;
        let var = (sum_sq / k - mean * mean).max(0.0) * k / (k - 1.0).max(1.0);
        // All samples equal: the sample variance says nothing below one sample's
        // resolution, so report the rule-of-three scale 1/k instead of zero.
        let std_error = if var > 0.0 { (var / k).sqrt() } else { 1.0 / k };
        NuValue { value: mean, std_error }
    }

    /// `phi_n(x) = nu_n(q(x - x_1), ..., q(x - x_n))`, with `phi_0 = 1`.
    pub fn phi(&self, q: &SepPolyQ, net: &Net, x: &[f64], n: usize, stream: u64) -> Result<NuValue> {
        if n > net.len() {
            return Err(Error::IndexOutOfRange { index: n, len: net.len() });
        }
        let v: Vec<f64> = net.points().take(n).map(|p| q.eval_shifted(x, p)).collect();
        self.nu(&v, stream)
    }

    /// `phi_0 .. phi_N` at one point from its `q`-coordinates `v`.
    ///
    /// The layer-cake path only revisits coordinates that are not already
    /// constant-one at the stage they enter; all others contribute exactly one
    /// at every later stage. Values agree bitwise with [`Self::nu`] on prefixes.
    pub fn phi_profile(&self, v: &[f64], stream: u64) -> Result<Vec<f64>> {
        self.check_len(v.len())?;
        let big_n = v.len();
        let mut out = Vec::with_capacity(big_n + 1);
        out.push(1.0);
        if self.backend == NuBackend::Mc {
            for n in 1..=big_n {
                out.push(self.nu_montecarlo_unchecked(&v[..n], self.mc_samples, stream).value);
            }
            return Ok(out);
        }
        let cands: Vec<usize> =
            (0..big_n).filter(|&j| !self.bump.far_inside(v[j], self.sigma_cap[j])).collect();
        // First stage at which each candidate is no longer smooth; statuses
        // never return to smooth because sigma only shrinks.
        let settle: Vec<usize> = cands
            .iter()
            .map(|&j| {
                let (mut lo, mut hi) = (j + 1, big_n + 1);
                while lo < hi {
                    let mid = (lo + hi) / 2;
                    if self.bump.classify(v[j], self.sigma(j, mid)) == Factor::Smooth {
                        lo = mid + 1;
                    } else {
                        hi = mid;
                    }
                }
                lo
            })
            .collect();
        let mut next_cand = 0;
        let mut smooth = Vec::new();
        for n in 1..=big_n {
            while next_cand < cands.len() && cands[next_cand] < n {
                next_cand += 1;
            }
            let active = &cands[..next_cand];
            let entering = active.last() == Some(&(n - 1));
            let changing = active.iter().zip(&settle).any(|(_, &st)| n <= st);
            if !(entering || changing) {
                let prev = *out.last().expect("profile starts with phi_0");
                out.push(prev);
                continue;
            }
            let lk = self.log_kappa[n - 1];
            smooth.clear();
            let mut u_max = 1.0f64;
            let mut zero = false;
            for &j in active {
                let s = sigma_at(j, lk);
                match self.bump.classify(v[j], s) {
                    Factor::One => {}
                    Factor::Zero => {
                        zero = true;
                        break;
                    }
                    Factor::Step(c) => u_max = u_max.min(c),
                    Factor::Smooth => smooth.push((v[j], s)),
                }
            }
            out.push(if zero { 0.0 } else { self.layer_cake_stage(&smooth, u_max) });
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special::normal_sf;
    use proptest::prelude::*;

    fn spec() -> BumpSpec {
        BumpSpec::new(0.004, 16.0).unwrap()
    }

    #[test]
    fn bump_boundary_values() {
        let b = spec();
        assert_eq!(b.b(0.008), 1.0);
        assert_eq!(b.b(0.012), 0.0);
        assert_eq!(b.b(17.0), 0.0);
        assert_eq!(b.b(18.0), 1.0);
        let mid = b.b(0.01);
        assert!(mid > 0.0 && mid < 1.0);
        assert_eq!(b.bn(&[8.0, 8.0, 8.0]), 1.0);
        assert_eq!(b.bn(&[8.0, 0.008]), 0.0);
        assert_eq!(b.bn(&[0.01]), 1.0 - mid);
        assert!((b.lipschitz() - 15.0 / (8.0 * 0.004)).abs() < 1e-12);
    }

    #[test]
    fn closed_form_sublevel_matches_bisection() {
        let b = spec();
        for k in 1..20 {
            let u = k as f64 / 20.0;
            let (lo, hi) = b.sublevel_at(u);
            let (blo, bhi) = b.sublevel_interval(1.0 - smoothstep(u));
            assert!((lo - blo).abs() < 1e-12 * 0.012, "{u}: {lo} {blo}");
            assert!((hi - bhi).abs() < 1e-11, "{u}: {hi} {bhi}");
        }
    }

    #[test]
    fn factorial_bound_example() {
        let lk = factorial_log_bound(&spec(), 1);
        let expected = ((2.0 * PI).sqrt() / 17.992).powi(2);
        assert!((lk.exp() - expected).abs() < 1e-12);
        assert!((lk.exp() - 0.0194).abs() < 1e-4);
    }

    #[test]
    fn schedule_is_monotone_and_valid() {
        let fam = MollifierFamily::new(spec(), 0.03, 60, NuBackend::Layercake, 0, 1).unwrap();
        fam.verify_schedule().unwrap();
        let lk = fam.log_kappa();
        assert!(lk.windows(2).all(|w| w[1] >= w[0]));
        // The tail bound dominates the factorial one at n = 1.
        assert!(lk[0] > factorial_log_bound(&spec(), 1));
        assert!(tail_quantity(0.03, 1, lk[0]) <= TAIL_TARGET + 1e-9);
    }

    #[test]
    fn deep_inside_is_near_one() {
        let fam = MollifierFamily::new(spec(), 0.03, 8, NuBackend::Layercake, 0, 1).unwrap();
        let v = vec![8.0; 5];
        let nu = fam.nu_layercake(&v).unwrap();
        let bound = 1.0 - 5.0 * 2.0 * normal_sf(6.0);
        assert!(nu >= bound && nu <= 1.0);
    }

    #[test]
    fn origin_coordinate_forces_zero() {
        let fam = MollifierFamily::new(spec(), 0.03, 40, NuBackend::Layercake, 0, 1).unwrap();
        // Stage 40: sigma_1 is far below g1.
        let mut v = vec![8.0; 40];
        v[0] = 0.0;
        assert!(fam.sigma(0, 40) < 1e-3 * 0.004);
        assert_eq!(fam.nu_layercake(&v).unwrap(), 0.0);
    }

    #[test]
    fn nu_matches_direct_quadrature_in_one_dimension() {
        // Reference: integrate (1 - b(y)) against the Gaussian density directly.
        let b = BumpSpec::new(0.05, 1.0).unwrap();
        let fam = MollifierFamily::new(b, 0.4, 1, NuBackend::Layercake, 0, 1).unwrap();
        let s = fam.sigma(0, 1);
        for &v in &[0.1, 0.13, 0.2, 1.9, 2.5] {
            let dens = |y: f64| (-(y - v) * (y - v) / (2.0 * s * s)).exp() / (s * (2.0 * PI).sqrt());
            let lo = v - 40.0 * s;
            let hi = v + 40.0 * s;
            let mut pts: Vec<f64> = vec![0.1, 0.15, 2.0, 3.0];
            pts.extend((1..64).map(|k| lo + (hi - lo) * k as f64 / 64.0));
            let reference = integrate(|y| (1.0 - b.b(y)) * dens(y), lo, hi, 1e-13, &pts).value;
            let nu = fam.nu_layercake(&[v]).unwrap();
            assert!((nu - reference).abs() < 1e-9, "v = {v}: {nu} vs {reference}");
        }
    }

    #[test]
    fn monte_carlo_agrees() {
        let b = BumpSpec::new(0.05, 1.0).unwrap();
        let fam = MollifierFamily::new(b, 0.4, 3, NuBackend::Layercake, 0, 9).unwrap();
        let v = [0.12, 0.3, 1.5];
        let lc = fam.nu_layercake(&v).unwrap();
        let mc = fam.nu_montecarlo(&v, 100_000, 3).unwrap();
        assert!(mc.std_error > 0.0);
        assert!((lc - mc.value).abs() <= 4.0 * mc.std_error, "{lc} {mc:?}");
    }

    #[test]
    fn profile_matches_single_stage_bitwise() {
        let b = BumpSpec::new(0.001, 4.0).unwrap();
        let fam = MollifierFamily::new(b, 0.02, 120, NuBackend::Layercake, 0, 1).unwrap();
        let v: Vec<f64> = (0..120)
            .map(|j| match j % 17 {
                0 => 0.0025,
                5 => 0.0005,
                9 => 0.0031,
                _ => 0.5 + 0.01 * j as f64,
            })
            .collect();
        let prof = fam.phi_profile(&v, 0).unwrap();
        for n in 0..=120 {
            let single = fam.nu_layercake(&v[..n]).unwrap();
            assert_eq!(prof[n].to_bits(), single.to_bits(), "n = {n}");
        }
    }

    proptest! {
        #[test]
        fn nu_range_and_lipschitz(
            v in prop::collection::vec(0.0f64..3.0, 1..6),
            dv in prop::collection::vec(-1e-3f64..1e-3, 6),
        ) {
            let b = BumpSpec::new(0.05, 1.0).unwrap();
            let fam = MollifierFamily::new(b, 0.4, 6, NuBackend::Layercake, 0, 1).unwrap();
            let w: Vec<f64> = v.iter().zip(&dv).map(|(a, d)| (a + d).max(0.0)).collect();
            let (a, c) = (fam.nu_layercake(&v).unwrap(), fam.nu_layercake(&w).unwrap());
            prop_assert!((0.0..=1.0).contains(&a));
            let dist = v.iter().zip(&w).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
            prop_assert!((a - c).abs() <= b.lipschitz() * dist + 2.0 * QUAD_TOL);
        }

        #[test]
        fn bump_in_unit_interval(t in -1.0f64..20.0) {
            let v = spec().b(t);
            prop_assert!((0.0..=1.0).contains(&v));
        }
    }
}
