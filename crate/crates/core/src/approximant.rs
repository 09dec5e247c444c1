//! The assembled approximant `K(x) = lambda({F(x_j) u_j(x)}) / lambda({u_j(x)})`
//! and its error and Lipschitz reports.

use std::fmt;
use std::sync::Arc;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gates::{GateMode, GateSet, PointState};
use crate::gauge::Gauge;
use crate::mollifier::{BumpSpec, MollifierFamily, NuBackend};
use crate::rng::stream_rng;
use crate::seppoly::{euclidean_norm, SepPolyQ};
use crate::space_net::{Domain, Gammas, Net, Shape, DEFAULT_NET_CAP};

/// Floor on `lambda({u_j})` guaranteed by some `u_j >= 4/5`.
pub const DENOMINATOR_FLOOR: f64 = 0.8;
pub const DENOMINATOR_SLACK: f64 = 1e-6;
/// Largest internal epsilon; the construction needs `eps < 1/4`.
pub const EPS_CAP: f64 = 0.249;
/// Pair distances of the close-pair Lipschitz sweep. Coarse pairs average the
/// slope over steep gate transitions, so growth is judged at the fine end.
pub const CLOSE_PAIR_DISTANCES: [f64; 5] = [1e-2, 1e-3, 1e-4, 1e-5, 1e-6];

/// How fast `F` may vary.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Modulus {
    Lipschitz(f64),
    /// `(eps_k, delta_k)`: `|F(x) - F(y)| < eps_k` whenever `|x - y| < delta_k`.
    Table(Vec<(f64, f64)>),
}

pub type CustomFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

#[derive(Clone)]
pub enum TargetKind {
    Constant(f64),
    /// `x_i`, 0-based.
    Coordinate(usize),
    /// `x_1 sin(omega x_2)`.
    ProductSine { omega: f64 },
    /// Lipschitz McShane extension of samples, clamped to their range.
    Tabulated { points: Vec<Vec<f64>>, values: Vec<f64>, lipschitz: f64 },
    Custom(CustomFn),
}

impl fmt::Debug for TargetKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TargetKind::Constant(c) => write!(f, "Constant({c})"),
            TargetKind::Coordinate(i) => write!(f, "Coordinate({i})"),
            TargetKind::ProductSine { omega } => write!(f, "ProductSine {{ omega: {omega} }}"),
            TargetKind::Tabulated { values, lipschitz, .. } => {
                write!(f, "Tabulated {{ samples: {}, lipschitz: {lipschitz} }}", values.len())
            }
            TargetKind::Custom(_) => write!(f, "Custom"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct TargetFunction {
    pub kind: TargetKind,
    pub inf: f64,
    pub sup: f64,
    pub modulus: Modulus,
    /// The declared modulus is sharp rather than merely valid.
    pub exact_modulus: bool,
}

impl TargetFunction {
    pub fn constant(c: f64) -> Self {
        Self { kind: TargetKind::Constant(c), inf: c, sup: c, modulus: Modulus::Lipschitz(0.0), exact_modulus: true }
    }

    /// `x_i` on a domain inside `[-1, 1]^d`.
    pub fn coordinate(i: usize) -> Self {
        Self {
            kind: TargetKind::Coordinate(i),
            inf: -1.0,
            sup: 1.0,
            modulus: Modulus::Lipschitz(1.0),
            exact_modulus: true,
        }
    }

    /// `x_1 sin(omega x_2)`; on convex domains with `|x_1| <= 1` the gradient
    /// norm is at most `max(1, |omega|)`.
    pub fn product_sine(omega: f64) -> Self {
        Self {
            kind: TargetKind::ProductSine { omega },
            inf: -1.0,
            sup: 1.0,
            modulus: Modulus::Lipschitz(omega.abs().max(1.0)),
            exact_modulus: false,
        }
    }

    pub fn tabulated(points: Vec<Vec<f64>>, values: Vec<f64>, lipschitz: f64) -> Result<Self> {
        if points.is_empty() || points.len() != values.len() || !(lipschitz >= 0.0) {
            return Err(Error::InvalidParameter(
                "tabulated target needs matching nonempty samples and a Lipschitz constant >= 0".into(),
            ));
        }
        let inf = values.iter().copied().fold(f64::INFINITY, f64::min);
        let sup = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Ok(Self {
            kind: TargetKind::Tabulated { points, values, lipschitz },
            inf,
            sup,
            modulus: Modulus::Lipschitz(lipschitz),
            exact_modulus: false,
        })
    }

    pub fn custom(f: CustomFn, inf: f64, sup: f64, modulus: Modulus) -> Self {
        Self { kind: TargetKind::Custom(f), inf, sup, modulus, exact_modulus: false }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        match &self.kind {
            TargetKind::Constant(c) => *c,
            TargetKind::Coordinate(i) => x[*i],
            TargetKind::ProductSine { omega } => x[0] * (omega * x[1]).sin(),
            TargetKind::Tabulated { points, values, lipschitz } => {
                let ext = points
                    .iter()
                    .zip(values)
                    .map(|(p, v)| {
                        let d: f64 = p.iter().zip(x).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
                        v + lipschitz * d
                    })
                    .fold(f64::INFINITY, f64::min);
                ext.clamp(self.inf, self.sup)
            }
            TargetKind::Custom(f) => f(x),
        }
    }

    pub fn describe(&self) -> String {
        format!("{:?}", self.kind)
    }

    fn check_dim(&self, d: usize) -> Result<()> {
        let need = match &self.kind {
            TargetKind::Coordinate(i) => i + 1,
            TargetKind::ProductSine { .. } => 2,
            TargetKind::Tabulated { points, .. } => {
                if points.iter().any(|p| p.len() != d) {
                    return Err(Error::InvalidParameter("tabulated sample dimension mismatch".into()));
                }
                0
            }
            _ => 0,
        };
        if need > d {
            Err(Error::InvalidParameter(format!("target needs dimension {need}, domain has {d}")))
        } else {
            Ok(())
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ApproximantConfig {
    pub eps_user: f64,
    pub gate_mode: GateMode,
    pub backend: NuBackend,
    pub mc_samples: usize,
    pub seed: u64,
    pub net_cap: usize,
    pub gauge: Gauge,
    /// Random points and pairs used to spot-check the declared target data.
    pub spot_checks: usize,
}

impl Default for ApproximantConfig {
    fn default() -> Self {
        Self {
            eps_user: 0.2,
            gate_mode: GateMode::Sigmoid,
            backend: NuBackend::Layercake,
            mc_samples: 100_000,
            seed: 0,
            net_cap: DEFAULT_NET_CAP,
            gauge: Gauge::default(),
            spot_checks: 2000,
        }
    }
}

/// Derived constants, in the form written to reports.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Constants {
    pub a: f64,
    pub b: f64,
    pub eps_user: f64,
    pub eps: f64,
    pub delta: f64,
    pub exact_constant: bool,
    pub gammas: Gammas,
    pub net_size: usize,
    pub covering_radius: f64,
    pub lattice_spacing: f64,
    pub q_degree: usize,
    pub q_scale: f64,
    pub q_safety: f64,
    pub eta: f64,
    pub k1: f64,
    pub m_bound: f64,
    pub l_q: f64,
    pub l_b: f64,
    pub l_zeta1: f64,
    pub l2: f64,
    pub l_h: f64,
    pub t_sup: f64,
    pub psi_lipschitz: f64,
    pub chain_bound: f64,
    /// `L_b L_q R + 1`, recorded only.
    pub w1: f64,
}

pub struct Approximant {
    domain: Domain,
    q: SepPolyQ,
    target: TargetFunction,
    config: ApproximantConfig,
    net: Net,
    family: MollifierFamily,
    gates: GateSet,
    a: f64,
    b: f64,
    eps: f64,
    delta: f64,
    exact_constant: bool,
    f_net: Vec<f64>,
}

/// One evaluation of `K` with its intermediate values.
#[derive(Clone, Debug)]
pub struct PointEval {
    pub k: f64,
    pub k_norm: f64,
    pub numerator: f64,
    pub denominator: f64,
    pub state: PointState,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointRecord {
    pub index: usize,
    pub x: Vec<f64>,
    pub f: f64,
    pub k: f64,
    pub abs_err: f64,
    pub denominator: f64,
    /// `max_{j in J} |F_j - F(x)|` in normalized units, `J = {j : x in C_j^3}`.
    pub j_branch_max: f64,
    /// `max_{j not in J} u_j(x)`.
    pub off_support_max: f64,
    pub support_size: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckCount {
    pub name: String,
    pub checked: usize,
    pub violations: usize,
    /// Smallest slack seen; negative means violated.
    pub worst_margin: f64,
}

impl CheckCount {
    fn new(name: &str) -> Self {
        Self { name: name.into(), checked: 0, violations: 0, worst_margin: f64::INFINITY }
    }

    pub fn record(&mut self, margin: f64) {
        self.checked += 1;
        if !(margin >= 0.0) {
            self.violations += 1;
        }
        if margin < self.worst_margin || margin.is_nan() {
            self.worst_margin = margin;
        }
    }

    pub fn passed(&self) -> bool {
        self.violations == 0
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErrorReport {
    pub points: Vec<PointRecord>,
    pub sup_error: f64,
    /// `eps_user - sup_error`.
    pub margin: f64,
    pub min_denominator: f64,
    pub checks: Vec<CheckCount>,
    /// Human-readable descriptions of the first violations.
    pub violations: Vec<String>,
}

impl ErrorReport {
    pub fn passed(&self) -> bool {
        self.margin > 0.0 && self.checks.iter().all(CheckCount::passed) && self.violations.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LipschitzReport {
    pub random_pairs: usize,
    pub random_quotient: f64,
    /// `(distance, max quotient)` for the close-pair sweep.
    pub close_pairs: Vec<(f64, f64)>,
    pub estimate: f64,
    pub chain_bound: f64,
    pub below_bound: bool,
    /// Quotient at the smallest distance is at most twice the largest coarser one.
    pub no_growth: bool,
}

const MAX_LISTED_VIOLATIONS: usize = 50;

impl Approximant {
    pub fn build(domain: Domain, q: SepPolyQ, target: TargetFunction, config: ApproximantConfig) -> Result<Self> {
        if q.dim() != domain.dim() {
            return Err(Error::InvalidParameter(format!(
                "polynomial dimension {} differs from domain dimension {}",
                q.dim(),
                domain.dim()
            )));
        }
        target.check_dim(domain.dim())?;
        if !(config.eps_user > 0.0) || !config.eps_user.is_finite() {
            return Err(Error::InvalidParameter(format!("eps {} must be positive", config.eps_user)));
        }
        if !(target.inf.is_finite() && target.sup.is_finite() && target.inf <= target.sup) {
            return Err(Error::TargetInconsistent(format!(
                "declared bounds [{}, {}] are not a finite interval",
                target.inf, target.sup
            )));
        }
        let q = match q.constants() {
            Some(c) if c.radius == domain.radius() => q,
            _ => q.derive_constants(domain.radius())?,
        };
        let exact_constant = target.sup == target.inf;
        let (a, b) = if exact_constant {
            (1.0, 2.0 / 3.0 - target.inf)
        } else {
            let a = (2.0 / 3.0) / (target.sup - target.inf);
            (a, 1.0 / 3.0 - a * target.inf)
        };
        let eps = (a * config.eps_user).min(EPS_CAP);
        let delta = if exact_constant { f64::INFINITY } else { select_delta(&target.modulus, a, eps)? };
        let gammas = Gammas::from_delta(delta, q.two_n())?;
        spot_check(&domain, &target, &config)?;
        let net = Net::build(&domain, &q, gammas, config.net_cap)?;
        let bump = BumpSpec::new(gammas.g1, q.m_bound())?;
        let family = MollifierFamily::new(bump, gammas.g2, net.len(), config.backend, config.mc_samples, config.seed)?;
        let gates = GateSet::build(config.gate_mode, gammas.g2, gammas.g3, q.m_bound(), eps)?;

        let mut f_net = Vec::with_capacity(net.len());
        for p in net.points() {
            let f = target.eval(p);
            if !(f >= target.inf - 1e-12 && f <= target.sup + 1e-12) {
                return Err(Error::TargetInconsistent(format!(
                    "F = {f} at net point {p:?} is outside [{}, {}]",
                    target.inf, target.sup
                )));
            }
            f_net.push((a * f + b).clamp(1.0 / 3.0, 1.0));
        }
        Ok(Self { domain, q, target, config, net, family, gates, a, b, eps, delta, exact_constant, f_net })
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }
    pub fn q(&self) -> &SepPolyQ {
        &self.q
    }
    pub fn target(&self) -> &TargetFunction {
        &self.target
    }
    pub fn config(&self) -> &ApproximantConfig {
        &self.config
    }
    pub fn net(&self) -> &Net {
        &self.net
    }
    pub fn family(&self) -> &MollifierFamily {
        &self.family
    }
    pub fn gates(&self) -> &GateSet {
        &self.gates
    }
    pub fn gauge(&self) -> &Gauge {
        &self.config.gauge
    }
    /// Normalized `F(x_j)`, in `[1/3, 1]`.
    pub fn f_net(&self) -> &[f64] {
        &self.f_net
    }
    pub fn eps(&self) -> f64 {
        self.eps
    }
    pub fn is_exact_constant(&self) -> bool {
        self.exact_constant
    }

    pub fn f_norm(&self, x: &[f64]) -> f64 {
        self.a * self.target.eval(x) + self.b
    }

    pub fn constants(&self) -> Constants {
        let dq = self.q.constants().expect("constants derived at build");
        let l_b = self.family.lipschitz();
        let psi_l = self.gates.psi_lipschitz(dq.lipschitz, l_b);
        Constants {
            a: self.a,
            b: self.b,
            eps_user: self.config.eps_user,
            eps: self.eps,
            delta: self.delta,
            exact_constant: self.exact_constant,
            gammas: self.net.gammas(),
            net_size: self.net.len(),
            covering_radius: self.net.r1(),
            lattice_spacing: self.net.spacing(),
            q_degree: self.q.two_n(),
            q_scale: self.q.scale(),
            q_safety: self.q.safety(),
            eta: self.q.eta(),
            k1: self.q.k1(),
            m_bound: dq.m_bound,
            l_q: dq.lipschitz,
            l_b,
            l_zeta1: self.gates.l_zeta1,
            l2: self.gates.l2,
            l_h: self.gates.l_h,
            t_sup: self.gates.t_sup,
            psi_lipschitz: psi_l,
            chain_bound: self.chain_bound(),
            w1: l_b * dq.lipschitz * self.domain.radius() + 1.0,
        }
    }

    /// `5 L_h L_psi / a`: both gauges move by at most `2 L_h L_psi |dx|` and the
    /// quotient is at most one over a denominator of at least `4/5`.
    pub fn chain_bound(&self) -> f64 {
        let dq = self.q.constants().expect("constants derived at build");
        5.0 * self.gates.l_h * self.gates.psi_lipschitz(dq.lipschitz, self.family.lipschitz()) / self.a
    }

    pub fn point_state(&self, x: &[f64], stream: u64) -> Result<PointState> {
        self.gates.evaluate_point(&self.q, &self.net, &self.family, x, stream)
    }

    pub fn eval_point(&self, x: &[f64], stream: u64) -> Result<PointEval> {
        if x.len() != self.domain.dim() {
            return Err(Error::InvalidParameter(format!(
                "point has dimension {}, domain has {}",
                x.len(),
                self.domain.dim()
            )));
        }
        let state = self.point_state(x, stream)?;
        let g = &self.config.gauge;
        let denominator = g.lambda(&state.u)?;
        if denominator < DENOMINATOR_FLOOR - DENOMINATOR_SLACK {
            return Err(Error::InvariantViolation(format!(
                "denominator {denominator} below 4/5 at {x:?}"
            )));
        }
        let weighted: Vec<f64> = state.u.iter().zip(&self.f_net).map(|(u, f)| u * f).collect();
        let numerator = g.lambda(&weighted)?;
        let k_norm = numerator / denominator;
        Ok(PointEval { k: (k_norm - self.b) / self.a, k_norm, numerator, denominator, state })
    }

    pub fn eval_k(&self, x: &[f64]) -> Result<f64> {
        Ok(self.eval_point(x, 0)?.k)
    }

    /// Evaluates `K` at every point in parallel, in input order.
    pub fn eval_batch(&self, points: &[Vec<f64>]) -> Vec<Result<f64>> {
        points.par_iter().enumerate().map(|(i, x)| self.eval_point(x, i as u64).map(|e| e.k)).collect()
    }

    pub fn error_report(&self, points: &[Vec<f64>]) -> ErrorReport {
        let per_point: Vec<Result<(PointRecord, [f64; 8])>> = points
            .par_iter()
            .enumerate()
            .map(|(i, x)| self.diagnose(i, x))
            .collect();
        let names = [
            "sup_bound",
            "denominator_floor",
            "j_branch",
            "off_support",
            "gauge_transfer",
            "sandwich_unit",
            "sandwich_f",
            "range",
        ];
        let mut checks: Vec<CheckCount> = names.iter().map(|n| CheckCount::new(n)).collect();
        let mut records = Vec::with_capacity(points.len());
        let mut violations = Vec::new();
        let mut sup_error = 0.0f64;
        let mut min_den = f64::INFINITY;
        for (i, r) in per_point.into_iter().enumerate() {
            match r {
                Ok((rec, margins)) => {
                    for (c, m) in checks.iter_mut().zip(margins) {
                        c.record(m);
                        if !(m >= 0.0) && violations.len() < MAX_LISTED_VIOLATIONS {
                            violations.push(format!("point {i}: {} (margin {m:e})", c.name));
                        }
                    }
                    sup_error = sup_error.max(rec.abs_err);
                    min_den = min_den.min(rec.denominator);
                    records.push(rec);
                }
                Err(e) => {
                    sup_error = f64::NAN;
                    if violations.len() < MAX_LISTED_VIOLATIONS {
                        violations.push(format!("point {i}: {e}"));
                    }
                }
            }
        }
        ErrorReport {
            points: records,
            margin: self.config.eps_user - sup_error,
            sup_error,
            min_denominator: min_den,
            checks,
            violations,
        }
    }

    /// Margins, in the order of [`Self::error_report`]'s checks.
    fn diagnose(&self, index: usize, x: &[f64]) -> Result<(PointRecord, [f64; 8])> {
        let ev = self.eval_point(x, index as u64)?;
        let g = &self.config.gauge;
        let tol = 10.0 * g.tol;
        let f = self.target.eval(x);
        let fx = self.f_norm(x);
        let abs_err = (ev.k - f).abs();
        let u = &ev.state.u;
        let g3 = self.net.gammas().g3;
        let quarter = self.eps / 4.0;
        let (mut j_max, mut off_max, mut support) = (0.0f64, 0.0f64, 0usize);
        for ((&vj, &uj), &fj) in ev.state.v.iter().zip(u).zip(&self.f_net) {
            if vj < g3 {
                support += 1;
                j_max = j_max.max((fj - fx).abs());
            } else {
                off_max = off_max.max(uj);
            }
        }
        // |lambda(F_j u) - lambda(F(x) u)| <= lambda((F_j - F(x)) u).
        let diff: Vec<f64> = u.iter().zip(&self.f_net).map(|(uj, fj)| (fj - fx) * uj).collect();
        let lhs = (ev.numerator - g.lambda(&u.iter().map(|uj| fx * uj).collect::<Vec<_>>())?).abs();
        let rhs = if diff.iter().all(|d| *d == 0.0) { 0.0 } else { g.lambda(&diff)? };
        let transfer = rhs + tol * ev.numerator.max(1.0) - lhs;
        let sandwich = |scale: f64| -> Result<f64> {
            let sup = u.iter().fold(0.0f64, |m, uj| m.max((scale * uj).abs()));
            let lam = g.lambda(&u.iter().map(|uj| scale * uj).collect::<Vec<_>>())?;
            Ok((sup - 0.5 * lam).min(lam - sup) + tol * lam.max(1.0))
        };
        let s_unit = sandwich(1.0)?;
        let s_f = sandwich(fx)?;
        let eps_user = self.config.eps_user;
        let range = (ev.k - (self.target.inf - eps_user)).min(self.target.sup + eps_user - ev.k);
        let margins = [
            eps_user - abs_err,
            ev.denominator - (DENOMINATOR_FLOOR - DENOMINATOR_SLACK),
            if support > 0 { quarter - j_max } else { -1.0 },
            quarter - off_max,
            transfer,
            s_unit,
            s_f,
            range,
        ];
        let rec = PointRecord {
            index,
            x: x.to_vec(),
            f,
            k: ev.k,
            abs_err,
            denominator: ev.denominator,
            j_branch_max: j_max,
            off_support_max: off_max,
            support_size: support,
        };
        Ok((rec, margins))
    }

    /// Empirical Lipschitz quotients of `K` on random pairs and on close pairs
    /// sharing base points and directions across distances.
    pub fn lipschitz_estimate(&self, pair_count: usize, seed: u64) -> Result<LipschitzReport> {
        let pair_count = pair_count.max(1);
        let d = self.domain.dim();
        let pts = self.domain.random_points(2 * pair_count, seed, 101);
        let quotients: Vec<f64> = (0..pair_count)
            .into_par_iter()
            .map(|i| {
                let (x, y) = (&pts[2 * i], &pts[2 * i + 1]);
                let dist = euclidean_norm(&x.iter().zip(y).map(|(a, b)| a - b).collect::<Vec<_>>());
                let kx = self.eval_point(x, 2 * i as u64)?.k;
                let ky = self.eval_point(y, 2 * i as u64 + 1)?.k;
                Ok(if dist > 0.0 { (kx - ky).abs() / dist } else { 0.0 })
            })
            .collect::<Result<Vec<_>>>()?;
        let random_quotient = quotients.iter().copied().fold(0.0, f64::max);

        let reach = CLOSE_PAIR_DISTANCES[0];
        let mut rng = stream_rng(seed, 102, 0);
        let mut bases = Vec::with_capacity(pair_count);
        while bases.len() < pair_count {
            let x: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..1.0)).collect();
            let dir: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..1.0)).collect();
            let n = euclidean_norm(&dir);
            if n < 1e-3 || !self.domain.contains(&x) {
                continue;
            }
            let dir: Vec<f64> = dir.into_iter().map(|c| c / n).collect();
            let far: Vec<f64> = x.iter().zip(&dir).map(|(a, b)| a + reach * b).collect();
            if self.domain.contains(&far) {
                bases.push((x, dir));
            }
        }
        let mut close_pairs = Vec::new();
        for (level, &dist) in CLOSE_PAIR_DISTANCES.iter().enumerate() {
            let qs = bases
                .par_iter()
                .enumerate()
                .map(|(i, (x, dir))| {
                    let y: Vec<f64> = x.iter().zip(dir).map(|(a, b)| a + dist * b).collect();
                    let stream = 1_000_000 * (level as u64 + 1) + 2 * i as u64;
                    let kx = self.eval_point(x, stream)?.k;
                    let ky = self.eval_point(&y, stream + 1)?.k;
                    Ok((kx - ky).abs() / dist)
                })
                .collect::<Result<Vec<f64>>>()?;
            close_pairs.push((dist, qs.into_iter().fold(0.0, f64::max)));
        }
        let estimate = close_pairs.iter().map(|c| c.1).fold(random_quotient, f64::max);
        let chain_bound = self.chain_bound();
        let coarse = close_pairs[..close_pairs.len() - 1].iter().map(|c| c.1).fold(0.0, f64::max);
        let finest = close_pairs.last().map(|c| c.1).unwrap_or(0.0);
        Ok(LipschitzReport {
            random_pairs: pair_count,
            random_quotient,
            close_pairs,
            estimate,
            chain_bound,
            below_bound: estimate <= chain_bound,
            no_growth: finest <= 2.0 * coarse || finest <= 1e-6,
        })
    }
}

fn select_delta(modulus: &Modulus, a: f64, eps: f64) -> Result<f64> {
    let level = eps / 4.0;
    match modulus {
        Modulus::Lipschitz(l) => {
            if !(*l >= 0.0) || !l.is_finite() {
                return Err(Error::ModulusInsufficient(format!("Lipschitz constant {l} is not usable")));
            }
            Ok(if *l == 0.0 { f64::INFINITY } else { level / (a * l) })
        }
        Modulus::Table(rows) => rows
            .iter()
            .filter(|(e, d)| a * e <= level && *d > 0.0)
            .map(|&(_, d)| d)
            .fold(None, |best: Option<f64>, d| Some(best.map_or(d, |b| b.max(d))))
            .ok_or_else(|| {
                Error::ModulusInsufficient(format!(
                    "no table entry reaches |dF| < {:e} in original units",
                    level / a
                ))
            }),
    }
}

/// Samples the declared bounds and modulus; any contradiction is an error.
fn spot_check(domain: &Domain, target: &TargetFunction, config: &ApproximantConfig) -> Result<()> {
    let n = config.spot_checks;
    if n == 0 {
        return Ok(());
    }
    let pts = domain.random_points(n, config.seed, 103);
    for p in &pts {
        let f = target.eval(p);
        if !(f >= target.inf - 1e-12 && f <= target.sup + 1e-12) {
            return Err(Error::TargetInconsistent(format!(
                "F = {f} at {p:?} is outside the declared [{}, {}]",
                target.inf, target.sup
            )));
        }
    }
    let mut rng = stream_rng(config.seed, 104, 0);
    for (i, p) in pts.iter().enumerate() {
        let other = if i % 2 == 0 {
            pts[(i + 1) % pts.len()].clone()
        } else {
            // Nearby partner, to probe small scales.
            let h = 10f64.powf(-rng.random_range(1.0..4.0));
            let y: Vec<f64> = p.iter().map(|c| c + h * rng.random_range(-1.0..1.0)).collect();
            if !domain.contains(&y) {
                continue;
            }
            y
        };
        let dist = euclidean_norm(&p.iter().zip(&other).map(|(a, b)| a - b).collect::<Vec<_>>());
        let df = (target.eval(p) - target.eval(&other)).abs();
        let ok = match &target.modulus {
            Modulus::Lipschitz(l) => df <= l * dist * (1.0 + 1e-9) + 1e-12,
            Modulus::Table(rows) => rows.iter().all(|&(e, d)| dist >= d || df < e + 1e-12),
        };
        if !ok {
            return Err(Error::TargetInconsistent(format!(
                "|F(x) - F(y)| = {df:e} at distance {dist:e} contradicts the declared modulus"
            )));
        }
    }
    Ok(())
}

/// Domains and targets used by the reference experiment.
pub fn reference_instance(eps_user: f64) -> Result<(Domain, SepPolyQ, TargetFunction, ApproximantConfig)> {
    let domain = Domain::new(2, 1.5, Shape::Ball)?;
    let q = SepPolyQ::euclidean_quartic(2)?;
    let target = TargetFunction::product_sine(2.0);
    Ok((domain, q, target, ApproximantConfig { eps_user, ..Default::default() }))
}
