//! Invariant batteries. Each property keeps a count, the number of violations
//! and the worst slack with its location; a negative slack is a violation.

use std::str::FromStr;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::approximant::{Approximant, TargetFunction};
use crate::config::{RunConfig, VerifyCounts};
use crate::error::{Error, Result};
use crate::gates::{certify_gate, GateSpec};
use crate::gauge::{lambda_oracle, residual, Gauge};
use crate::mollifier::{sigma_at, QUAD_TOL};
use crate::rng::stream_rng;
use crate::seppoly::{euclidean_norm, SepPolyQ};
use crate::special::normal_sf;

/// Absolute tolerance of the gauge battery.
pub const GAUGE_TOL: f64 = 1e-8;
/// Reference value `sqrt((1 + sqrt 5) / 2)` at the precision it is checked to.
pub const GOLDEN_GAUGE: f64 = 1.272_019_6;
/// Allowance on top of three standard errors in the backend comparison.
pub const MC_FLOOR: f64 = 1e-9;

/// Battery selection. The first name of each suite is the command-line token;
/// the descriptive alias is accepted too.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
pub enum Suite {
    #[serde(rename = "gauge")]
    Gauge,
    #[serde(rename = "lemma2")]
    #[value(name = "lemma2", alias = "polynomial")]
    Polynomial,
    #[serde(rename = "lemma3")]
    #[value(name = "lemma3", alias = "mollifier")]
    Mollifier,
    #[serde(rename = "lemma4")]
    #[value(name = "lemma4", alias = "gates")]
    Gates,
    #[serde(rename = "theorem1")]
    #[value(name = "theorem1", alias = "end_to_end")]
    EndToEnd,
    #[serde(rename = "all")]
    All,
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        <Self as clap::ValueEnum>::from_str(s, false).map_err(|_| Error::Config(format!("unknown suite `{s}`")))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Property {
    pub name: String,
    pub checked: usize,
    pub violations: usize,
    pub worst_margin: f64,
    pub worst_location: Option<Vec<f64>>,
    pub note: String,
}

impl Property {
    pub fn new(name: &str) -> Self {
        Self {
            name: name.into(),
            checked: 0,
            violations: 0,
            worst_margin: f64::INFINITY,
            worst_location: None,
            note: String::new(),
        }
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = note.into();
        self
    }

    pub fn record(&mut self, margin: f64, location: &[f64]) {
        self.checked += 1;
        let bad = !(margin >= 0.0);
        if bad {
            self.violations += 1;
        }
        if margin < self.worst_margin || (bad && self.worst_margin >= 0.0) {
            self.worst_margin = margin;
            self.worst_location = Some(location.to_vec());
        }
    }

    pub fn passed(&self) -> bool {
        self.violations == 0 && self.checked > 0
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Ledger {
    pub suite: Suite,
    pub properties: Vec<Property>,
}

impl Ledger {
    pub fn passed(&self) -> bool {
        self.properties.iter().all(Property::passed)
    }

    pub fn get(&self, name: &str) -> Option<&Property> {
        self.properties.iter().find(|p| p.name == name)
    }
}

fn sup_norm(x: &[f64]) -> f64 {
    x.iter().fold(0.0f64, |m, v| m.max(v.abs()))
}

/// Sandwich, homogeneity, subadditivity, 1-Lipschitz and residual monotonicity
/// on random vectors, plus agreement with the bisection oracle.
pub fn gauge_battery(counts: &VerifyCounts, seed: u64) -> Result<Vec<Property>> {
    let g = Gauge::default();
    let rows: Vec<[f64; 5]> = (0..counts.gauge_vectors)
        .into_par_iter()
        .map(|k| {
            let mut rng = stream_rng(seed, 201, k as u64);
            let len = rng.random_range(1..=counts.gauge_max_len.max(1));
            let mut draw = || -> Vec<f64> { (0..len).map(|_| rng.random_range(-2.0..2.0)).collect() };
            let x = draw();
            let y = draw();
            let a: f64 = stream_rng(seed, 202, k as u64).random_range(-3.0..3.0);
            let lx = g.lambda(&x)?;
            let ly = g.lambda(&y)?;
            let m = sup_norm(&x);
            let sandwich = (lx - m).min(2.0 * m - lx) + GAUGE_TOL;
            let ax: Vec<f64> = x.iter().map(|v| a * v).collect();
            let homog = GAUGE_TOL * (a.abs() * lx).max(1.0) - (g.lambda(&ax)? - a.abs() * lx).abs();
            let s: Vec<f64> = x.iter().zip(&y).map(|(p, q)| p + q).collect();
            let d: Vec<f64> = x.iter().zip(&y).map(|(p, q)| p - q).collect();
            let sub = lx + ly + GAUGE_TOL - g.lambda(&s)?;
            let lip = g.lambda(&d)? + GAUGE_TOL - (lx - ly).abs();
            let mono = (residual(&x, m)? - 1.0 + 1e-15).min(1.0 - residual(&x, 2.0 * m)?);
            Ok([sandwich, homog, sub, lip, mono])
        })
        .collect::<Result<_>>()?;
    let mut props = vec![
        Property::new("gauge_sandwich"),
        Property::new("gauge_homogeneity"),
        Property::new("gauge_subadditivity"),
        Property::new("gauge_1_lipschitz"),
        Property::new("gauge_residual_monotone"),
    ];
    for (k, r) in rows.iter().enumerate() {
        for (p, &m) in props.iter_mut().zip(r) {
            p.record(m, &[k as f64]);
        }
    }
    let mut oracle = Property::new("gauge_oracle_agreement").with_note("|lambda - bisection oracle| < 1e-9");
    for k in 0..counts.oracle_vectors {
        let mut rng = stream_rng(seed, 203, k as u64);
        let len = rng.random_range(1..=counts.gauge_max_len.max(1));
        let x: Vec<f64> = (0..len).map(|_| rng.random_range(-2.0..2.0)).collect();
        oracle.record(1e-9 - (g.lambda(&x)? - lambda_oracle(&x)?).abs(), &[k as f64]);
    }
    let mut golden = Property::new("gauge_golden_value").with_note("lambda((1,1)) = 1.2720196 +- 1e-6");
    golden.record(1e-6 - (g.lambda(&[1.0, 1.0])? - GOLDEN_GAUGE).abs(), &[1.0, 1.0]);
    golden.record(1e-6 - (lambda_oracle(&[1.0, 1.0])? - GOLDEN_GAUGE).abs(), &[1.0, 1.0]);
    props.push(oracle);
    props.push(golden);
    Ok(props)
}

/// Two-sided polynomial bounds, evenness and the Lipschitz constant on random
/// points of the unit ball and of the radius-`2R` ball.
pub fn polynomial_battery(name: &str, q: &SepPolyQ, counts: &VerifyCounts, seed: u64) -> Result<Vec<Property>> {
    let dq = *q
        .constants()
        .ok_or_else(|| Error::InvalidParameter("derive_constants must run first".into()))?;
    let d = q.dim();
    let big = 2.0 * dq.radius;
    let ball_point = |rng: &mut rand_chacha::ChaCha8Rng, rho: f64| -> Vec<f64> {
        loop {
            let y: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..1.0)).collect();
            let n = euclidean_norm(&y);
            if n <= 1.0 && n > 0.0 {
                return y.into_iter().map(|c| c * rho).collect();
            }
        }
    };
    let mut nonneg = Property::new(&format!("{name}: nonnegative_even"));
    let mut lower = Property::new(&format!("{name}: lower_bound")).with_note("|y|^(2n) <= q(y) + 1e-12 when q(y) < 1");
    let mut upper = Property::new(&format!("{name}: upper_bound")).with_note("q(y) <= K1 max(|y|, |y|^(2n))");
    let mut rng = stream_rng(seed, 301, 0);
    for k in 0..counts.poly_samples {
        let rho = if k % 2 == 0 { 1.0 } else { big };
        let y = ball_point(&mut rng, rho);
        let c = q.check_bounds(&y);
        let neg: Vec<f64> = y.iter().map(|v| -v).collect();
        let qm = q.eval(&neg);
        nonneg.record(c.q.min(1e-12 * c.q.max(1.0) - (c.q - qm).abs()), &y);
        if c.lower_applicable {
            lower.record(c.q + 1e-12 - c.norm_pow, &y);
        }
        upper.record(c.upper_bound * (1.0 + 1e-12) - c.q, &y);
    }
    let mut lip = Property::new(&format!("{name}: lipschitz")).with_note("|q(y) - q(y')| <= L_q |y - y'| on the 2R ball");
    for _ in 0..counts.poly_pairs {
        let y = ball_point(&mut rng, big);
        let z = ball_point(&mut rng, big);
        let dist = euclidean_norm(&y.iter().zip(&z).map(|(a, b)| a - b).collect::<Vec<_>>());
        let dq_ = (q.eval(&y) - q.eval(&z)).abs();
        lip.record(dq.lipschitz * dist * (1.0 + 1e-12) - dq_, &y);
    }
    Ok(vec![nonneg, lower, upper, lip])
}

/// First stage `n > j` at which `P(N(0,1) > g1 / (2 sigma_j(n))) < eta`.
pub fn localization_stage(ap: &Approximant, j: usize, eta: f64) -> Option<usize> {
    let g1 = ap.net().gammas().g1;
    let lk = ap.family().log_kappa();
    (j + 1..=lk.len()).find(|&n| normal_sf(0.5 * g1 / sigma_at(j, lk[n - 1])) < eta)
}

fn random_offset(rng: &mut rand_chacha::ChaCha8Rng, d: usize, radius: f64) -> Vec<f64> {
    loop {
        let z: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..1.0)).collect();
        let n = euclidean_norm(&z);
        if n > 1e-3 && n <= 1.0 {
            let r = radius * rng.random_range(0.0..1.0);
            return z.into_iter().map(|c| c * r / n).collect();
        }
    }
}

fn first_below(v: &[f64], level: f64) -> Option<usize> {
    v.iter().position(|&t| t < level)
}

/// Pairs mixing far points and close points at distances `10^-1 .. 10^-6`.
fn mixed_pairs(ap: &Approximant, count: usize, seed: u64, stage: u64) -> Vec<(Vec<f64>, Vec<f64>)> {
    let dom = ap.domain();
    let far = dom.random_points(2 * count, seed, stage);
    let mut rng = stream_rng(seed, stage + 1, 0);
    (0..count)
        .map(|i| {
            let x = far[2 * i].clone();
            if i % 2 == 0 {
                return (x, far[2 * i + 1].clone());
            }
            loop {
                let h = 10f64.powf(-rng.random_range(1.0..6.0));
                let z = random_offset(&mut rng, dom.dim(), h);
                let y: Vec<f64> = x.iter().zip(&z).map(|(a, b)| a + b).collect();
                if dom.contains(&y) {
                    return (x.clone(), y);
                }
            }
        })
        .collect()
}

/// Emergence, uniform Lipschitz bound, localization and backend agreement of `phi_n`.
pub fn mollifier_battery(ap: &Approximant, counts: &VerifyCounts, seed: u64) -> Result<Vec<Property>> {
    let q = ap.q();
    let fam = ap.family();
    let gam = ap.net().gammas();
    let pts = ap.domain().halton_points(counts.phi_points)?;

    let emergence: Vec<f64> = pts
        .par_iter()
        .enumerate()
        .map(|(i, x)| {
            let st = ap.point_state(x, i as u64)?;
            let j0 = first_below(&st.v, gam.g2).ok_or_else(|| {
                Error::InvariantViolation(format!("{x:?} is in no level-2 cell"))
            })?;
            Ok(st.phi[j0] - 0.5)
        })
        .collect::<Result<_>>()?;
    let mut first = Property::new("phi_emergence").with_note("phi over the coordinates before the first level-2 cell of x exceeds 1/2");
    for (x, m) in pts.iter().zip(&emergence) {
        first.record(*m, x);
    }

    let lq = q.lipschitz();
    let lb = fam.lipschitz();
    let pairs = mixed_pairs(ap, counts.phi_pairs, seed, 310);
    let ul: Vec<f64> = pairs
        .par_iter()
        .enumerate()
        .map(|(i, (x, y))| {
            let px = fam.phi_profile(&ap.net().q_coordinates(q, x), 2 * i as u64)?;
            let py = fam.phi_profile(&ap.net().q_coordinates(q, y), 2 * i as u64 + 1)?;
            let diff = px.iter().zip(&py).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
            let dist = euclidean_norm(&x.iter().zip(y).map(|(a, b)| a - b).collect::<Vec<_>>());
            Ok(lb * lq * dist + 2.0 * QUAD_TOL - diff)
        })
        .collect::<Result<_>>()?;
    let mut uniform = Property::new("phi_uniform_lipschitz").with_note("|phi_n(x) - phi_n(x')| <= L_b L_q |x - x'| for all n");
    for ((x, _), m) in pairs.iter().zip(&ul) {
        uniform.record(*m, x);
    }

    let radius = gam.g1 / (2.0 * lq);
    let eta = counts.eta;
    let loc_pts = ap.domain().random_points(counts.localization_points, seed, 320);
    let loc: Vec<(f64, usize)> = loc_pts
        .par_iter()
        .enumerate()
        .map(|(i, x0)| {
            let v0 = ap.net().q_coordinates(q, x0);
            let j0 = first_below(&v0, gam.g1)
                .ok_or_else(|| Error::InvariantViolation(format!("{x0:?} is in no level-1 cell")))?;
            let mut rng = stream_rng(seed, 321, i as u64);
            let z = random_offset(&mut rng, x0.len(), radius);
            let xz: Vec<f64> = x0.iter().zip(&z).map(|(a, b)| a + b).collect();
            let prof = fam.phi_profile(&ap.net().q_coordinates(q, &xz), i as u64)?;
            Ok(match localization_stage(ap, j0, eta) {
                Some(n0) => (eta - prof[n0..].iter().copied().fold(0.0, f64::max), n0 - j0),
                None => (f64::INFINITY, 0),
            })
        })
        .collect::<Result<_>>()?;
    let lag = loc.iter().map(|l| l.1).max().unwrap_or(0);
    let mut localization = Property::new("phi_localization").with_note(format!(
        "phi_n(x0 + z) < {eta} for |z| < g1 / (2 L_q) = {radius:e} and n >= n0; max n0 - j0 = {lag}"
    ));
    for (x, (m, _)) in loc_pts.iter().zip(&loc) {
        localization.record(*m, x);
    }

    let mc_pts = ap.domain().random_points(counts.mc_evaluations, seed, 330);
    let big_n = ap.net().len();
    let mc: Vec<(f64, bool)> = mc_pts
        .par_iter()
        .enumerate()
        .map(|(i, x)| {
            let v = ap.net().q_coordinates(q, x);
            let mut rng = stream_rng(seed, 331, i as u64);
            let n = if i % 2 == 0 {
                rng.random_range(1..=big_n)
            } else {
                let j1 = first_below(&v, gam.g1).unwrap_or(0);
                (j1 + 1 + rng.random_range(0..8)).min(big_n)
            };
            let lc = fam.nu_layercake(&v[..n])?;
            let m = fam.nu_montecarlo(&v[..n], counts.mc_samples, i as u64)?;
            Ok((3.0 * m.std_error + MC_FLOOR - (lc - m.value).abs(), m.std_error > 0.0))
        })
        .collect::<Result<_>>()?;
    let random = mc.iter().filter(|m| m.1).count();
    let mut backend = Property::new("phi_backend_agreement").with_note(format!(
        "layer-cake within 3 standard errors + {MC_FLOOR:e} of Monte Carlo ({} samples); {random} of {} evaluations sampled, the rest resolved exactly",
        counts.mc_samples,
        mc.len()
    ));
    for (x, (m, _)) in mc_pts.iter().zip(&mc) {
        backend.record(*m, x);
    }
    Ok(vec![first, uniform, localization, backend])
}

/// Gate-level facts about `psi_j` and `u_j` over a point sweep with all `j`.
pub fn gate_battery(ap: &Approximant, counts: &VerifyCounts, seed: u64) -> Result<Vec<Property>> {
    let gam = ap.net().gammas();
    let gs = ap.gates();
    let quarter = ap.eps() / 4.0;
    let pts = ap.domain().halton_points(counts.psi_points)?;
    let g = ap.gauge();
    let rows: Vec<[f64; 8]> = pts
        .par_iter()
        .enumerate()
        .map(|(i, x)| {
            let st = ap.point_state(x, i as u64)?;
            let mut outside = f64::INFINITY;
            let mut off = 0.0f64;
            let (mut umin, mut umax, mut psimin) = (f64::INFINITY, 0.0f64, f64::INFINITY);
            for ((&v, &p), &u) in st.v.iter().zip(&st.psi).zip(&st.u) {
                if v >= gam.g3 {
                    outside = outside.min(p - 1.0);
                    off = off.max(u);
                }
                umin = umin.min(u);
                umax = umax.max(u);
                psimin = psimin.min(p);
            }
            let j0 = first_below(&st.v, gam.g2)
                .ok_or_else(|| Error::InvariantViolation(format!("{x:?} is in no level-2 cell")))?;
            let scaled: Vec<f64> = st.u.iter().map(|u| 1.875 * u).collect();
            let gauge_ok = if g.lambda(&scaled).is_ok() { 1.0 } else { -1.0 };
            Ok([
                outside,
                0.5 - st.psi[j0],
                st.u[j0] - 0.8,
                quarter - off,
                psimin - 0.25,
                umin.min(1.0 - umax),
                umax - 0.8,
                gauge_ok,
            ])
        })
        .collect::<Result<_>>()?;
    let mut props = vec![
        Property::new("psi_outside_cell").with_note("psi_j(x) >= 1 whenever x is not in C_j^3"),
        Property::new("psi_first_cover").with_note("psi_j0(x) < 1/2 for the first j0 with x in C_j0^2"),
        Property::new("u_first_cover").with_note("u_j0(x) >= 4/5"),
        Property::new("u_off_support").with_note("u_j(x) < eps/4 for j not in J"),
        Property::new("psi_lower").with_note("psi_j >= 1/4"),
        Property::new("u_range").with_note("0 < u_j <= 1"),
        Property::new("u_sup_floor").with_note("max_j u_j >= 4/5"),
        Property::new("u_scaled_in_gauge_domain").with_note("15/8 u is an admissible gauge argument"),
    ];
    for (x, r) in pts.iter().zip(&rows) {
        for (p, &m) in props.iter_mut().zip(r) {
            p.record(m, x);
        }
    }

    let lq = ap.q().lipschitz();
    let psi_l = gs.psi_lipschitz(lq, ap.family().lipschitz());
    let pairs = mixed_pairs(ap, counts.psi_pairs, seed, 410);
    let ul: Vec<(f64, f64)> = pairs
        .par_iter()
        .enumerate()
        .map(|(i, (x, y))| {
            let a = ap.point_state(x, 2 * i as u64)?;
            let b = ap.point_state(y, 2 * i as u64 + 1)?;
            let dist = euclidean_norm(&x.iter().zip(y).map(|(p, q)| p - q).collect::<Vec<_>>());
            let dpsi = a.psi.iter().zip(&b.psi).fold(0.0f64, |m, (p, q)| m.max((p - q).abs()));
            let du = a.u.iter().zip(&b.u).fold(0.0f64, |m, (p, q)| m.max((p - q).abs()));
            let slack = 1e-9 + 1e-9 * psi_l * dist;
            Ok((psi_l * dist + slack - dpsi, gs.l_h * psi_l * dist + slack - du))
        })
        .collect::<Result<_>>()?;
    let mut psi_ul = Property::new("psi_uniform_lipschitz").with_note(format!("constant {psi_l:e}"));
    let mut u_ul = Property::new("u_uniform_lipschitz").with_note(format!("constant {:e}", gs.l_h * psi_l));
    for ((x, _), (a, b)) in pairs.iter().zip(&ul) {
        psi_ul.record(*a, x);
        u_ul.record(*b, x);
    }
    props.push(psi_ul);
    props.push(u_ul);

    let eta = counts.eta;
    let radius = (gam.g1 / (2.0 * lq)).min(1.0 / (20.0 * gs.l_h * gs.l_zeta1.max(1.0) * lq));
    let limit = 1.0 / (10.0 * gs.l_h);
    let st_pts = ap.domain().random_points(counts.stability_points, seed, 420);
    let stab: Vec<(f64, usize)> = st_pts
        .par_iter()
        .enumerate()
        .map(|(i, x)| {
            let a = ap.point_state(x, i as u64)?;
            let jx = first_below(&a.v, gam.g1)
                .ok_or_else(|| Error::InvariantViolation(format!("{x:?} is in no level-1 cell")))?;
            let Some(n0) = localization_stage(ap, jx, eta) else {
                return Ok((f64::INFINITY, 0));
            };
            let mut rng = stream_rng(seed, 421, i as u64);
            let z = random_offset(&mut rng, x.len(), radius);
            let xz: Vec<f64> = x.iter().zip(&z).map(|(p, q)| p + q).collect();
            let b = ap.point_state(&xz, i as u64)?;
            let start = (jx + 2).max(n0);
            let m = (start..a.psi.len())
                .map(|j| (a.psi[j] - 1.0).min(limit - (a.psi[j] - b.psi[j]).abs()))
                .fold(f64::INFINITY, f64::min);
            Ok((m, a.psi.len().saturating_sub(start)))
        })
        .collect::<Result<_>>()?;
    let tested: usize = stab.iter().map(|s| s.1).sum();
    let mut stability = Property::new("psi_stability").with_note(format!(
        "psi_j(x) > 1 and |psi_j(x+z) - psi_j(x)| < 1/(10 L_h) for |z| < {radius:e} and j past the localization stage; {tested} (x, j) pairs"
    ));
    for (x, (m, _)) in st_pts.iter().zip(&stab) {
        stability.record(*m, x);
    }
    props.push(stability);
    Ok(props)
}

/// End-to-end bound, the error-report splits, denominators, gates, the
/// kappa schedule, constant exactness and the Lipschitz sweep.
pub fn end_to_end_battery(cfg: &RunConfig, ap: &Approximant) -> Result<Vec<Property>> {
    let counts = &cfg.verify;
    let pts = ap.domain().halton_points(counts.end_to_end_points)?;
    let rep = ap.error_report(&pts);
    let mut props = Vec::new();
    let mut bound = Property::new("sup_error").with_note(format!(
        "sup |K - F| = {:e} < eps = {}",
        rep.sup_error, cfg.epsilon
    ));
    bound.record(rep.margin, &[]);
    props.push(bound);
    for c in &rep.checks {
        let mut p = Property::new(&format!("report_{}", c.name));
        p.checked = c.checked;
        p.violations = c.violations;
        p.worst_margin = c.worst_margin;
        props.push(p);
    }
    let mut failures = Property::new("report_evaluation_errors");
    failures.record(if rep.points.len() == pts.len() { 1.0 } else { -1.0 }, &[]);
    props.push(failures);

    let mut gates = Property::new("gate_certification");
    for gate in ap.gates().gates() {
        for m in &gate.margins {
            gates.record(m.certified_lower, &[m.location]);
        }
    }
    props.push(gates);
    let mut negative = Property::new("gate_negative_control").with_note("zeta2 with its left threshold raised to 2.6 must fail");
    let mut broken: GateSpec = ap.gates().specs[1].clone();
    broken.constraints[0].threshold = 2.6;
    negative.record(
        match certify_gate(&ap.gates().zeta2.kind, &broken) {
            Err(Error::CertificationFailed { .. }) => 1.0,
            _ => -1.0,
        },
        &[],
    );
    props.push(negative);

    let mut schedule = Property::new("kappa_schedule_replay");
    schedule.record(if ap.family().verify_schedule().is_ok() { 1.0 } else { -1.0 }, &[]);
    props.push(schedule);

    let constant = Approximant::build(
        *ap.domain(),
        ap.q().clone(),
        TargetFunction::constant(5.0),
        ap.config().clone(),
    )?;
    let mut exact = Property::new("constant_exactness").with_note("F = 5: |K - 5| <= 1e-8");
    let ks: Vec<Result<f64>> = constant.eval_batch(&pts);
    for (x, k) in pts.iter().zip(ks) {
        exact.record(1e-8 - (k? - 5.0).abs(), x);
    }
    props.push(exact);

    let lip = ap.lipschitz_estimate(counts.lipschitz_pairs, cfg.backend.seed)?;
    let mut below = Property::new("lipschitz_below_chain_bound").with_note(format!(
        "estimate {:e}, chain bound {:e}",
        lip.estimate, lip.chain_bound
    ));
    below.record(lip.chain_bound - lip.estimate, &[]);
    let mut growth = Property::new("lipschitz_no_growth").with_note(format!("close-pair quotients {:?}", lip.close_pairs));
    growth.record(if lip.no_growth { 1.0 } else { -1.0 }, &[]);
    props.push(below);
    props.push(growth);
    Ok(props)
}

/// Runs one suite (or all) from a run configuration.
pub fn run_suite(cfg: &RunConfig, suite: Suite) -> Result<Ledger> {
    let seed = cfg.backend.seed;
    let counts = &cfg.verify;
    let mut properties = Vec::new();
    let wants = |s: Suite| suite == s || suite == Suite::All;
    if wants(Suite::Gauge) {
        properties.extend(gauge_battery(counts, seed)?);
    }
    if wants(Suite::Polynomial) {
        let r = cfg.domain.radius;
        properties.extend(polynomial_battery("configured", &cfg.build_q()?, counts, seed)?);
        let eu = SepPolyQ::euclidean_quartic(3)?.derive_constants(r)?;
        properties.extend(polynomial_battery("euclidean_quartic_d3", &eu, counts, seed)?);
        let qs = SepPolyQ::quartic_sum(3)?.derive_constants(r)?;
        properties.extend(polynomial_battery("quartic_sum_d3", &qs, counts, seed)?);
    }
    if wants(Suite::Mollifier) || wants(Suite::Gates) || wants(Suite::EndToEnd) {
        let ap = build_from_config(cfg)?;
        if wants(Suite::Mollifier) {
            properties.extend(mollifier_battery(&ap, counts, seed)?);
        }
        if wants(Suite::Gates) {
            properties.extend(gate_battery(&ap, counts, seed)?);
        }
        if wants(Suite::EndToEnd) {
            properties.extend(end_to_end_battery(cfg, &ap)?);
        }
    }
    Ok(Ledger { suite, properties })
}

pub fn build_from_config(cfg: &RunConfig) -> Result<Approximant> {
    Approximant::build(cfg.build_domain()?, cfg.build_q()?, cfg.build_target()?, cfg.approximant_config())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space_net::Shape;

    fn small_counts() -> VerifyCounts {
        VerifyCounts {
            gauge_vectors: 2000,
            oracle_vectors: 20,
            poly_samples: 2000,
            poly_pairs: 500,
            phi_points: 100,
            phi_pairs: 100,
            localization_points: 30,
            mc_evaluations: 10,
            mc_samples: 20_000,
            psi_points: 100,
            psi_pairs: 50,
            stability_points: 20,
            end_to_end_points: 100,
            lipschitz_pairs: 20,
            ..VerifyCounts::default()
        }
    }

    #[test]
    fn gauge_and_polynomial_small() {
        let c = small_counts();
        assert!(gauge_battery(&c, 3).unwrap().iter().all(Property::passed));
        let q = SepPolyQ::quartic_sum(3).unwrap().derive_constants(1.5).unwrap();
        let props = polynomial_battery("qs", &q, &c, 3).unwrap();
        assert!(props.iter().all(Property::passed), "{props:?}");
        assert!(props[1].checked > 100);
    }

    #[test]
    fn coarse_pipeline_all_suites() {
        let mut cfg = RunConfig::default();
        cfg.epsilon = 0.9;
        cfg.domain.dim = 1;
        cfg.domain.radius = 2.0;
        cfg.domain.shape = Shape::Box;
        cfg.target.kind = crate::config::TargetName::Coordinate;
        cfg.verify = small_counts();
        let ledger = run_suite(&cfg, Suite::All).unwrap();
        for p in &ledger.properties {
            assert!(p.passed(), "{p:?}");
        }
    }

    #[test]
    fn suite_names() {
        assert_eq!("lemma3".parse::<Suite>().unwrap(), Suite::Mollifier);
        assert!("nope".parse::<Suite>().is_err());
    }
}
