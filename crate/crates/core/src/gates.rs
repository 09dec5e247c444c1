//! Certified real-analytic gates `zeta1`, `zeta2`, `h` and the derived
//! `psi_j(x) = zeta1(q(x - x_j)) + zeta2(phi_{j-1}(x))`, `u_j = h(psi_j)`.
//!
//! A gate is either a two-level tanh ramp or a Chebyshev polynomial fitted to
//! one. Certification splits each constraint interval into cells until a
//! derivative bound times the half width is below half the midpoint margin,
//! so a passing report is a proof for the exact gate (up to rounding in the
//! gate evaluation itself).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mollifier::MollifierFamily;
use crate::seppoly::SepPolyQ;
use crate::space_net::Net;

/// Required share of `|plateau - threshold|` left at the region boundaries.
pub const SIGMOID_MARGIN_SHARE: f64 = 0.1;
/// Template share for polynomial fits, stiffer so the fit error has room.
pub const TEMPLATE_MARGIN_SHARE: f64 = 0.5;
pub const DEFAULT_DEGREE_BUDGET: usize = 512;
const MAX_CELLS: usize = 4_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Cmp {
    #[serde(rename = "<")]
    Lt,
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = ">")]
    Gt,
    #[serde(rename = ">=")]
    Ge,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Constraint {
    pub lo: f64,
    pub hi: f64,
    pub cmp: Cmp,
    pub threshold: f64,
    /// Only region constraints drive the sharpness search.
    pub region: bool,
}

impl Constraint {
    fn new(lo: f64, hi: f64, cmp: Cmp, threshold: f64, region: bool) -> Self {
        Self { lo, hi, cmp, threshold, region }
    }

    /// Signed slack; the constraint holds iff it is positive (or zero for `<=`, `>=`).
    pub fn margin(&self, value: f64) -> f64 {
        match self.cmp {
            Cmp::Lt | Cmp::Le => self.threshold - value,
            Cmp::Gt | Cmp::Ge => value - self.threshold,
        }
    }

    pub fn label(&self) -> String {
        let op = match self.cmp {
            Cmp::Lt => "<",
            Cmp::Le => "<=",
            Cmp::Gt => ">",
            Cmp::Ge => ">=",
        };
        format!("g(t) {op} {} on [{}, {}]", self.threshold, self.lo, self.hi)
    }
}

/// Constraint system of one gate plus the two-level template it is built from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GateSpec {
    pub name: String,
    pub lo: f64,
    pub hi: f64,
    /// Right end of the left region and left end of the right region.
    pub left_end: f64,
    pub right_start: f64,
    pub left_level: f64,
    pub right_level: f64,
    pub constraints: Vec<Constraint>,
    /// Index of the constraint tied to each region, for the sharpness search.
    pub left_constraint: usize,
    pub right_constraint: usize,
}

impl GateSpec {
    /// `zeta1`: `< 1/4` on `[0, g2]`, `>= 1` on `[g3, hi]`, `>= 1/8` throughout,
    /// certified on `[0, 1.01 M]`.
    pub fn zeta1(g2: f64, g3: f64, m_bound: f64) -> Result<Self> {
        let hi = 1.01 * m_bound;
        if !(0.0 < g2 && g2 < g3 && g3 < hi) {
            return Err(Error::GateUnsatisfiable(format!(
                "zeta1 needs 0 < g2 < g3 < 1.01 M (g2 = {g2}, g3 = {g3}, M = {m_bound})"
            )));
        }
        Ok(Self {
            name: "zeta1".into(),
            lo: 0.0,
            hi,
            left_end: g2,
            right_start: g3,
            left_level: 3.0 / 16.0,
            right_level: 5.0 / 4.0,
            constraints: vec![
                Constraint::new(0.0, g2, Cmp::Lt, 0.25, true),
                Constraint::new(g3, hi, Cmp::Ge, 1.0, true),
                Constraint::new(0.0, hi, Cmp::Ge, 0.125, false),
            ],
            left_constraint: 0,
            right_constraint: 1,
        })
    }

    /// `zeta2`: `>= 2` on `[0, 1/4]`, `< 1/4` on `[1/2, 1.01]`, `>= 1/8` and `> 0`.
    pub fn zeta2() -> Self {
        let hi = 1.01;
        Self {
            name: "zeta2".into(),
            lo: 0.0,
            hi,
            left_end: 0.25,
            right_start: 0.5,
            left_level: 5.0 / 2.0,
            right_level: 3.0 / 16.0,
            constraints: vec![
                Constraint::new(0.0, 0.25, Cmp::Ge, 2.0, true),
                Constraint::new(0.5, hi, Cmp::Lt, 0.25, true),
                Constraint::new(0.0, hi, Cmp::Ge, 0.125, false),
                Constraint::new(0.0, hi, Cmp::Gt, 0.0, false),
            ],
            left_constraint: 0,
            right_constraint: 1,
        }
    }

    /// `h`: `>= 4/5` on `[0, 1/2]`, `< eps/4` on `[3/4, T]`, values in `(0, 1]`.
    pub fn h(eps: f64, t_max: f64) -> Result<Self> {
        if !(eps > 0.0 && eps < 0.4) || !(t_max > 0.75) {
            return Err(Error::GateUnsatisfiable(format!(
                "h needs 0 < eps/4 < 1/10 and T > 3/4 (eps = {eps}, T = {t_max})"
            )));
        }
        Ok(Self {
            name: "h".into(),
            lo: 0.0,
            hi: t_max,
            left_end: 0.5,
            right_start: 0.75,
            left_level: 9.0 / 10.0,
            right_level: eps / 8.0,
            constraints: vec![
                Constraint::new(0.0, 0.5, Cmp::Ge, 0.8, true),
                Constraint::new(0.75, t_max, Cmp::Lt, eps / 4.0, true),
                Constraint::new(0.0, t_max, Cmp::Gt, 0.0, false),
                Constraint::new(0.0, t_max, Cmp::Le, 1.0, false),
            ],
            left_constraint: 0,
            right_constraint: 1,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GateKind {
    /// `left + (right - left) (1 + tanh(k (t - center))) / 2`.
    Sigmoid { left: f64, right: f64, center: f64, k: f64 },
    /// Chebyshev series on `[lo, hi]`.
    Chebyshev { lo: f64, hi: f64, coeffs: Vec<f64> },
}

impl GateKind {
    pub fn eval(&self, t: f64) -> f64 {
        match self {
            GateKind::Sigmoid { left, right, center, k } => {
                left + (right - left) * 0.5 * (1.0 + (k * (t - center)).tanh())
            }
            GateKind::Chebyshev { lo, hi, coeffs } => clenshaw(coeffs, (2.0 * t - lo - hi) / (hi - lo)),
        }
    }

    /// Bound on `|g'|` over `[a, b]`.
    fn derivative_bound(&self, a: f64, b: f64) -> f64 {
        match self {
            GateKind::Sigmoid { left, right, center, k } => {
                let dist = if *center < a {
                    a - center
                } else if *center > b {
                    center - b
                } else {
                    0.0
                };
                let ch = (k * dist).cosh();
                0.5 * (right - left).abs() * k / (ch * ch)
            }
            GateKind::Chebyshev { lo, hi, coeffs } => chebyshev_derivative_bound(coeffs, *lo, *hi),
        }
    }

    fn lipschitz(&self, lo: f64, hi: f64) -> f64 {
        self.derivative_bound(lo, hi)
    }
}

fn clenshaw(c: &[f64], x: f64) -> f64 {
    let (mut b1, mut b2) = (0.0, 0.0);
    for &ck in c.iter().skip(1).rev() {
        let b0 = ck + 2.0 * x * b1 - b2;
        b2 = b1;
        b1 = b0;
    }
    c.first().copied().unwrap_or(0.0) + x * b1 - b2
}

/// `(2 / (hi - lo)) sum |c_k| k^2`, from `|T_k'| <= k^2` on `[-1, 1]`.
fn chebyshev_derivative_bound(c: &[f64], lo: f64, hi: f64) -> f64 {
    let s: f64 = c.iter().enumerate().map(|(k, ck)| ck.abs() * (k * k) as f64).sum();
    2.0 * s / (hi - lo)
}

/// Least-squares Chebyshev coefficients of degree `deg` from `2 (deg + 1)`
/// Chebyshev-Gauss nodes, where discrete orthogonality makes them explicit.
pub fn chebyshev_fit(f: impl Fn(f64) -> f64, lo: f64, hi: f64, deg: usize) -> Vec<f64> {
    let m = 2 * (deg + 1);
    let thetas: Vec<f64> = (0..m).map(|i| std::f64::consts::PI * (i as f64 + 0.5) / m as f64).collect();
    let vals: Vec<f64> = thetas
        .iter()
        .map(|th| f(0.5 * (lo + hi) + 0.5 * (hi - lo) * th.cos()))
        .collect();
    (0..=deg)
        .map(|k| {
            let s: f64 = thetas.iter().zip(&vals).map(|(th, v)| v * (k as f64 * th).cos()).sum();
            let c = 2.0 * s / m as f64;
            if k == 0 {
                0.5 * c
            } else {
                c
            }
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConstraintMargin {
    pub constraint: String,
    /// Smallest margin at a cell midpoint.
    pub worst_margin: f64,
    pub location: f64,
    /// Certified lower bound of the margin over the whole interval.
    pub certified_lower: f64,
    pub cells: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Gate {
    pub name: String,
    pub lo: f64,
    pub hi: f64,
    pub kind: GateKind,
    pub margins: Vec<ConstraintMargin>,
    /// `sup |g'|` bound on the certified domain.
    pub lipschitz: f64,
    /// Upper bound of `|g|` on the certified domain.
    pub sup: f64,
}

impl Gate {
    pub fn eval(&self, t: f64) -> f64 {
        self.kind.eval(t)
    }

    pub fn eval_checked(&self, t: f64) -> Result<f64> {
        if t >= self.lo && t <= self.hi {
            Ok(self.kind.eval(t))
        } else {
            Err(Error::DomainExcursion { gate: self.name.clone(), value: t, lo: self.lo, hi: self.hi })
        }
    }

    pub fn min_margin(&self) -> f64 {
        self.margins.iter().map(|m| m.certified_lower).fold(f64::INFINITY, f64::min)
    }
}

/// Certifies every constraint of `spec` for `kind`, returning per-constraint
/// margins or the first violated constraint.
pub fn certify_gate(kind: &GateKind, spec: &GateSpec) -> Result<Vec<ConstraintMargin>> {
    spec.constraints.iter().map(|c| certify_constraint(kind, spec, c)).collect()
}

fn certify_constraint(kind: &GateKind, spec: &GateSpec, c: &Constraint) -> Result<ConstraintMargin> {
    let fail = |location: f64, margin: f64| Error::CertificationFailed {
        gate: spec.name.clone(),
        constraint: c.label(),
        location,
        margin,
    };
    let strict = matches!(c.cmp, Cmp::Lt | Cmp::Gt);
    // Endpoints are checked directly; cells then cover the closed interval.
    for t in [c.lo, c.hi] {
        let m = c.margin(kind.eval(t));
        if m < 0.0 || (strict && m == 0.0) {
            return Err(fail(t, m));
        }
    }
    let mut report = ConstraintMargin {
        constraint: c.label(),
        worst_margin: f64::INFINITY,
        location: c.lo,
        certified_lower: f64::INFINITY,
        cells: 0,
    };
    let mut stack = vec![(c.lo, c.hi)];
    while let Some((a, b)) = stack.pop() {
        report.cells += 1;
        if report.cells > MAX_CELLS {
            return Err(fail(a, report.worst_margin));
        }
        let mid = 0.5 * (a + b);
        let hw = 0.5 * (b - a);
        let m = c.margin(kind.eval(mid));
        if m < report.worst_margin {
            report.worst_margin = m;
            report.location = mid;
        }
        if m <= 0.0 {
            return Err(fail(mid, m));
        }
        let slope = kind.derivative_bound(a, b);
        if slope * hw <= 0.5 * m {
            report.certified_lower = report.certified_lower.min(m - slope * hw);
            continue;
        }
        if mid <= a || mid >= b {
            return Err(fail(mid, m));
        }
        stack.push((mid, b));
        stack.push((a, mid));
    }
    Ok(report)
}

/// Margin share reached at both region boundaries by a tanh ramp of sharpness `k`.
fn boundary_share(spec: &GateSpec, k: f64) -> f64 {
    let center = 0.5 * (spec.left_end + spec.right_start);
    let kind = GateKind::Sigmoid { left: spec.left_level, right: spec.right_level, center, k };
    let share = |ci: usize, plateau: f64, t: f64| {
        let c = &spec.constraints[ci];
        c.margin(kind.eval(t)) / c.margin(plateau)
    };
    share(spec.left_constraint, spec.left_level, spec.left_end)
        .min(share(spec.right_constraint, spec.right_level, spec.right_start))
}

/// Least sharpness giving `share` of the plateau gap at both region boundaries.
pub fn sigmoid_sharpness(spec: &GateSpec, share: f64) -> Result<f64> {
    let gap = spec.right_start - spec.left_end;
    if !(gap > 0.0) {
        return Err(Error::GateUnsatisfiable(format!("{}: regions overlap", spec.name)));
    }
    for (ci, level) in [(spec.left_constraint, spec.left_level), (spec.right_constraint, spec.right_level)] {
        if !(spec.constraints[ci].margin(level) > 0.0) {
            return Err(Error::GateUnsatisfiable(format!(
                "{}: template level {level} violates `{}`",
                spec.name,
                spec.constraints[ci].label()
            )));
        }
    }
    let (mut lo, mut hi) = (0.0, 1.0 / gap);
    let mut doublings = 0;
    while boundary_share(spec, hi) < share {
        lo = hi;
        hi *= 2.0;
        doublings += 1;
        if doublings > 200 {
            return Err(Error::GateUnsatisfiable(format!("{}: no sharpness reaches the margin", spec.name)));
        }
    }
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if boundary_share(spec, mid) >= share {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo <= 1e-12 * hi {
            break;
        }
    }
    Ok(hi)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum GateMode {
    #[default]
    Sigmoid,
    Polynomial { degree_budget: usize },
}

fn sigmoid_kind(spec: &GateSpec, k: f64) -> GateKind {
    GateKind::Sigmoid {
        left: spec.left_level,
        right: spec.right_level,
        center: 0.5 * (spec.left_end + spec.right_start),
        k,
    }
}

/// Builds and certifies one gate.
pub fn fit_gate(spec: &GateSpec, mode: GateMode) -> Result<Gate> {
    let finish = |kind: GateKind, margins: Vec<ConstraintMargin>, sup: f64| Gate {
        name: spec.name.clone(),
        lo: spec.lo,
        hi: spec.hi,
        lipschitz: kind.lipschitz(spec.lo, spec.hi),
        kind,
        margins,
        sup,
    };
    match mode {
        GateMode::Sigmoid => {
            let k = sigmoid_sharpness(spec, SIGMOID_MARGIN_SHARE)?;
            let kind = sigmoid_kind(spec, k);
            let margins = certify_gate(&kind, spec)?;
            Ok(finish(kind, margins, spec.left_level.abs().max(spec.right_level.abs())))
        }
        GateMode::Polynomial { degree_budget } => {
            let k = sigmoid_sharpness(spec, TEMPLATE_MARGIN_SHARE)?;
            let template = sigmoid_kind(spec, k);
            let mut deg = 4;
            while deg <= degree_budget {
                let coeffs = chebyshev_fit(|t| template.eval(t), spec.lo, spec.hi, deg);
                let kind = GateKind::Chebyshev { lo: spec.lo, hi: spec.hi, coeffs };
                if let Ok(margins) = certify_gate(&kind, spec) {
                    let sup = match &kind {
                        GateKind::Chebyshev { coeffs, .. } => coeffs.iter().map(|c| c.abs()).sum(),
                        GateKind::Sigmoid { .. } => unreachable!(),
                    };
                    return Ok(finish(kind, margins, sup));
                }
                deg *= 2;
            }
            Err(Error::GateBudgetExhausted { gate: spec.name.clone(), budget: degree_budget })
        }
    }
}

/// The three certified gates plus the constants the Lipschitz chain needs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GateSet {
    pub mode: GateMode,
    pub zeta1: Gate,
    pub zeta2: Gate,
    pub h: Gate,
    pub specs: [GateSpec; 3],
    /// Lipschitz constant of `zeta1`.
    pub l_zeta1: f64,
    /// `max(1, Lip zeta2)`.
    pub l2: f64,
    /// `max(1, Lip h)`.
    pub l_h: f64,
    /// `sup zeta1 + sup zeta2`, the domain of `h`.
    pub t_sup: f64,
}

/// Per-point pipeline values, all in net order.
#[derive(Clone, Debug, PartialEq)]
pub struct PointState {
    /// `q(x - x_j)`.
    pub v: Vec<f64>,
    /// `phi_0 .. phi_N`.
    pub phi: Vec<f64>,
    pub psi: Vec<f64>,
    pub u: Vec<f64>,
}

impl GateSet {
    pub fn build(mode: GateMode, g2: f64, g3: f64, m_bound: f64, eps: f64) -> Result<Self> {
        let s1 = GateSpec::zeta1(g2, g3, m_bound)?;
        let s2 = GateSpec::zeta2();
        let zeta1 = fit_gate(&s1, mode)?;
        let zeta2 = fit_gate(&s2, mode)?;
        let t_sup = zeta1.sup + zeta2.sup;
        let sh = GateSpec::h(eps, t_sup)?;
        let h = fit_gate(&sh, mode)?;
        Ok(Self {
            mode,
            l_zeta1: zeta1.lipschitz,
            l2: zeta2.lipschitz.max(1.0),
            l_h: h.lipschitz.max(1.0),
            t_sup,
            zeta1,
            zeta2,
            h,
            specs: [s1, s2, sh],
        })
    }

    pub fn gates(&self) -> [&Gate; 3] {
        [&self.zeta1, &self.zeta2, &self.h]
    }

    /// Smallest certified margin over all gates and constraints.
    pub fn min_margin(&self) -> f64 {
        self.gates().iter().map(|g| g.min_margin()).fold(f64::INFINITY, f64::min)
    }

    /// Uniform Lipschitz constant of the `psi_j` family.
    pub fn psi_lipschitz(&self, l_q: f64, l_b: f64) -> f64 {
        self.l_zeta1 * l_q + self.l2 * l_b * l_q
    }

    /// `zeta1(v) + zeta2(phi)`.
    pub fn psi(&self, v: f64, phi_prev: f64) -> Result<f64> {
        Ok(self.zeta1.eval_checked(v)? + self.zeta2.eval_checked(phi_prev)?)
    }

    pub fn u(&self, psi: f64) -> Result<f64> {
        self.h.eval_checked(psi)
    }

    /// `psi_{j+1}(x)` for 0-based `j`, computing `phi_j` directly.
    pub fn psi_j(
        &self,
        q: &SepPolyQ,
        net: &Net,
        fam: &MollifierFamily,
        x: &[f64],
        j: usize,
        stream: u64,
    ) -> Result<f64> {
        if j >= net.len() {
            return Err(Error::IndexOutOfRange { index: j, len: net.len() });
        }
        let phi = fam.phi(q, net, x, j, stream)?.value;
        self.psi(q.eval_shifted(x, net.point(j)), phi)
    }

    pub fn u_j(
        &self,
        q: &SepPolyQ,
        net: &Net,
        fam: &MollifierFamily,
        x: &[f64],
        j: usize,
        stream: u64,
    ) -> Result<f64> {
        self.u(self.psi_j(q, net, fam, x, j, stream)?)
    }

    /// All `v_j`, `phi_j`, `psi_j`, `u_j` at `x`.
    pub fn evaluate_point(
        &self,
        q: &SepPolyQ,
        net: &Net,
        fam: &MollifierFamily,
        x: &[f64],
        stream: u64,
    ) -> Result<PointState> {
        let v = net.q_coordinates(q, x);
        let phi = fam.phi_profile(&v, stream)?;
        let mut psi = Vec::with_capacity(v.len());
        let mut u = Vec::with_capacity(v.len());
        for (j, &vj) in v.iter().enumerate() {
            let p = self.psi(vj, phi[j])?;
            u.push(self.u(p)?);
            psi.push(p);
        }
        Ok(PointState { v, phi, psi, u })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zeta1_example() {
        let g = fit_gate(&GateSpec::zeta1(0.03, 0.0625, 16.0).unwrap(), GateMode::Sigmoid).unwrap();
        assert!(g.eval(0.0) < 0.25);
        assert!(g.eval(0.0625) >= 1.0);
        assert!(g.margins.iter().all(|m| m.certified_lower > 0.0));
        assert!(g.eval(8.0) >= 0.125);
    }

    #[test]
    fn zeta2_and_h_examples() {
        let z = fit_gate(&GateSpec::zeta2(), GateMode::Sigmoid).unwrap();
        assert!(z.eval(0.0) >= 2.0 && z.eval(0.75) < 0.25);
        let h = fit_gate(&GateSpec::h(0.2, 3.75).unwrap(), GateMode::Sigmoid).unwrap();
        assert!(h.eval(0.9) < 0.05 && h.eval(0.3) >= 0.8);
        assert!(h.eval(3.75) > 0.0 && h.eval(0.0) <= 1.0);
    }

    #[test]
    fn sharpness_meets_share() {
        let spec = GateSpec::zeta2();
        let k = sigmoid_sharpness(&spec, SIGMOID_MARGIN_SHARE).unwrap();
        assert!(boundary_share(&spec, k) >= SIGMOID_MARGIN_SHARE);
        assert!(boundary_share(&spec, 0.999 * k) < SIGMOID_MARGIN_SHARE);
    }

    #[test]
    fn negative_control_fails() {
        let spec = GateSpec::zeta2();
        let g = fit_gate(&spec, GateMode::Sigmoid).unwrap();
        let mut broken = spec.clone();
        broken.constraints[0].threshold = 2.6;
        match certify_gate(&g.kind, &broken) {
            Err(Error::CertificationFailed { location, margin, .. }) => {
                assert!((0.0..=0.25).contains(&location) && margin <= 0.0);
            }
            other => panic!("expected failure, got {other:?}"),
        }
    }

    #[test]
    fn doubling_sharpness_keeps_region_margins() {
        let spec = GateSpec::h(0.1, 3.75).unwrap();
        let k = sigmoid_sharpness(&spec, SIGMOID_MARGIN_SHARE).unwrap();
        let a = certify_gate(&sigmoid_kind(&spec, k), &spec).unwrap();
        let b = certify_gate(&sigmoid_kind(&spec, 2.0 * k), &spec).unwrap();
        for (i, c) in spec.constraints.iter().enumerate() {
            if c.region {
                assert!(b[i].worst_margin >= a[i].worst_margin);
            }
        }
    }

    #[test]
    fn polynomial_mode_certifies() {
        let mode = GateMode::Polynomial { degree_budget: DEFAULT_DEGREE_BUDGET };
        let z = fit_gate(&GateSpec::zeta2(), mode).unwrap();
        assert!(matches!(z.kind, GateKind::Chebyshev { .. }));
        assert!(z.min_margin() > 0.0);
        let h = fit_gate(&GateSpec::h(0.2, 3.75).unwrap(), mode).unwrap();
        assert!(h.min_margin() > 0.0);
        let tiny = GateMode::Polynomial { degree_budget: 2 };
        assert!(matches!(fit_gate(&GateSpec::zeta2(), tiny), Err(Error::GateBudgetExhausted { .. })));
    }

    #[test]
    fn chebyshev_fit_reproduces_polynomial() {
        let c = chebyshev_fit(|t| 3.0 * t * t - t + 0.5, -2.0, 1.0, 6);
        for &t in &[-2.0, -0.3, 0.7, 1.0] {
            assert!((clenshaw(&c, (2.0 * t + 1.0) / 3.0) - (3.0 * t * t - t + 0.5)).abs() < 1e-12);
        }
    }

    #[test]
    fn gate_set_constants() {
        let gs = GateSet::build(GateMode::Sigmoid, 0.03, 0.0625, 16.0, 0.2).unwrap();
        assert_eq!(gs.t_sup, 3.75);
        assert!(gs.l2 >= 1.0 && gs.l_h >= 1.0);
        assert!(gs.min_margin() > 0.0);
        assert!(matches!(gs.u(4.0), Err(Error::DomainExcursion { .. })));
        let psi = gs.psi(0.0, 1.0).unwrap();
        assert!(psi >= 0.25);
    }
}
