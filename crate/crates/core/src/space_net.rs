//! Bounded domains centred at the origin and lattice nets whose `q`-cells
//! `C_j^i = {x : q(x - x_j) < gamma_i}` cover them.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{halton, stream_rng, MAX_HALTON_DIM};
use crate::seppoly::{euclidean_norm, SepPolyQ};

pub const DEFAULT_NET_CAP: usize = 200_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Shape {
    /// Open Euclidean unit ball.
    Ball,
    /// Open cube `(-1, 1)^d`.
    Box,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Domain {
    dim: usize,
    radius: f64,
    shape: Shape,
}

impl Domain {
    pub fn new(dim: usize, radius: f64, shape: Shape) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidDomain("dimension must be at least 1".into()));
        }
        if !(radius > 1.0) || !radius.is_finite() {
            return Err(Error::InvalidDomain(format!("radius {radius} must be finite and exceed 1")));
        }
        if shape == Shape::Box && (dim as f64).sqrt() >= radius {
            return Err(Error::InvalidDomain(format!(
                "cube (-1,1)^{dim} is not inside the ball of radius {radius}"
            )));
        }
        Ok(Self { dim, radius, shape })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }
    pub fn radius(&self) -> f64 {
        self.radius
    }
    pub fn shape(&self) -> Shape {
        self.shape
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim
            && match self.shape {
                Shape::Ball => x.iter().map(|v| v * v).sum::<f64>() < 1.0,
                Shape::Box => x.iter().all(|v| v.abs() < 1.0),
            }
    }

    /// Euclidean projection onto the closure.
    pub fn project_closed(&self, p: &[f64]) -> Vec<f64> {
        match self.shape {
            Shape::Ball => {
                let n = euclidean_norm(p);
                if n > 1.0 {
                    p.iter().map(|v| v / n).collect()
                } else {
                    p.to_vec()
                }
            }
            Shape::Box => p.iter().map(|v| v.clamp(-1.0, 1.0)).collect(),
        }
    }

    pub fn dist_to_closed(&self, p: &[f64]) -> f64 {
        let proj = self.project_closed(p);
        p.iter().zip(&proj).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt()
    }

    /// `count` Halton points in the domain, skipping index 0.
    pub fn halton_points(&self, count: usize) -> Result<Vec<Vec<f64>>> {
        if self.dim > MAX_HALTON_DIM {
            return Err(Error::InvalidParameter(format!(
                "quasi-random sampling supports up to {MAX_HALTON_DIM} dimensions"
            )));
        }
        let mut out = Vec::with_capacity(count);
        let mut index = 1u64;
        while out.len() < count {
            let p: Vec<f64> = halton(index, self.dim).into_iter().map(|u| 2.0 * u - 1.0).collect();
            index += 1;
            if self.contains(&p) {
                out.push(p);
            }
        }
        Ok(out)
    }

    /// `count` uniform random points in the domain from the `(seed, stage)` stream.
    pub fn random_points(&self, count: usize, seed: u64, stage: u64) -> Vec<Vec<f64>> {
        let mut rng = stream_rng(seed, stage, 0);
        let mut out = Vec::with_capacity(count);
        while out.len() < count {
            let p: Vec<f64> = (0..self.dim).map(|_| rng.random_range(-1.0..1.0)).collect();
            if self.contains(&p) {
                out.push(p);
            }
        }
        out
    }

    /// Cell centres of a regular `per_axis^d` grid on `[-1, 1]^d` that lie in the domain.
    pub fn grid_points(&self, per_axis: usize) -> Vec<Vec<f64>> {
        let h = 2.0 / per_axis as f64;
        let total = per_axis.pow(self.dim as u32);
        (0..total)
            .filter_map(|mut idx| {
                let mut p = vec![0.0; self.dim];
                for c in p.iter_mut().rev() {
                    *c = -1.0 + h * ((idx % per_axis) as f64 + 0.5);
                    idx /= per_axis;
                }
                self.contains(&p).then_some(p)
            })
            .collect()
    }
}

/// Thresholds of the three nested coverings.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Gammas {
    pub g1: f64,
    pub g2: f64,
    pub g3: f64,
}

impl Gammas {
    pub fn new(g1: f64, g2: f64, g3: f64) -> Result<Self> {
        if !(0.0 < g1 && g1 < g2 && g2 < g3 && g3 < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "need 0 < g1 < g2 < g3 < 1, got ({g1}, {g2}, {g3})"
            )));
        }
        if !(3.0 * g1 < g2 / 2.0) {
            return Err(Error::InvalidParameter(format!("need 3 g1 < g2 / 2, got ({g1}, {g2})")));
        }
        Ok(Self { g1, g2, g3 })
    }

    /// Defaults from a distance `delta`: `q(y) < g3` forces `|y| < delta`.
    pub fn from_delta(delta: f64, two_n: usize) -> Result<Self> {
        if !(delta > 0.0) {
            return Err(Error::InvalidParameter(format!("delta {delta} must be positive")));
        }
        let g3 = (0.5 * delta.powi(two_n as i32)).min(0.9);
        Self::new(g3 / 24.0, g3 / 2.0, g3)
    }

    pub fn level(&self, i: usize) -> Result<f64> {
        match i {
            1 => Ok(self.g1),
            2 => Ok(self.g2),
            3 => Ok(self.g3),
            _ => Err(Error::InvalidParameter(format!("cover level {i} is not 1, 2 or 3"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Net {
    dim: usize,
    /// Row-major point coordinates.
    points: Vec<f64>,
    /// Radius with `sum_i A_i r^(2i) <= g1`.
    r1: f64,
    spacing: f64,
    gammas: Gammas,
}

impl Net {
    /// Lattice of spacing `1/m` with `m` the least integer making the lattice
    /// covering radius `s sqrt(d) / 2` smaller than `r1`. Lattice points near
    /// the domain are projected onto its closure, which never increases their
    /// distance to domain points.
    pub fn build(dom: &Domain, q: &SepPolyQ, gammas: Gammas, cap: usize) -> Result<Self> {
        if q.dim() != dom.dim() {
            return Err(Error::InvalidParameter(format!(
                "polynomial dimension {} differs from domain dimension {}",
                q.dim(),
                dom.dim()
            )));
        }
        let d = dom.dim();
        let r1 = covering_radius(q, gammas.g1);
        let sqrt_d = (d as f64).sqrt();
        let m = (sqrt_d / (2.0 * r1)).floor() + 1.0;
        if m > 1e9 {
            return Err(Error::Capacity { requested: u64::MAX, cap });
        }
        let spacing = 1.0 / m;
        let rc = spacing * sqrt_d / 2.0;
        if !(rc < r1) {
            return Err(Error::InvariantViolation(format!(
                "lattice covering radius {rc:e} is not below r1 = {r1:e}"
            )));
        }
        let k_max = ((1.0 + rc) / spacing).floor() as i64;
        let side = (2 * k_max + 1) as f64;
        let box_count = side.powi(d as i32);
        let est = match dom.shape() {
            Shape::Box => box_count,
            Shape::Ball => box_count * unit_ball_fraction(d),
        };
        if est > 4.0 * cap as f64 {
            return Err(Error::Capacity { requested: est.min(u64::MAX as f64) as u64, cap });
        }

        let mut seen = std::collections::HashSet::new();
        let mut points = Vec::new();
        let mut idx = vec![-k_max; d];
        let mut p = vec![0.0; d];
        let mut count = 0usize;
        loop {
            for (c, &k) in p.iter_mut().zip(&idx) {
                *c = k as f64 * spacing;
            }
            if dom.dist_to_closed(&p) <= rc {
                let x = dom.project_closed(&p);
                let key: Vec<u64> = x.iter().map(|v| (v + 0.0).to_bits()).collect();
                if seen.insert(key) {
                    count += 1;
                    if count > cap {
                        return Err(Error::Capacity { requested: est as u64, cap });
                    }
                    points.extend_from_slice(&x);
                }
            }
            // Lexicographic odometer, last coordinate fastest.
            let mut axis = d;
            loop {
                if axis == 0 {
                    return Ok(Self { dim: d, points, r1, spacing, gammas });
                }
                axis -= 1;
                if idx[axis] < k_max {
                    idx[axis] += 1;
                    break;
                }
                idx[axis] = -k_max;
            }
        }
    }

    pub fn len(&self) -> usize {
        self.points.len() / self.dim
    }
    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
    pub fn dim(&self) -> usize {
        self.dim
    }
    pub fn r1(&self) -> f64 {
        self.r1
    }
    pub fn spacing(&self) -> f64 {
        self.spacing
    }
    pub fn gammas(&self) -> Gammas {
        self.gammas
    }

    /// Point `x_{j+1}` (0-based `j`).
    pub fn point(&self, j: usize) -> &[f64] {
        &self.points[j * self.dim..(j + 1) * self.dim]
    }

    pub fn points(&self) -> impl Iterator<Item = &[f64]> {
        self.points.chunks_exact(self.dim)
    }

    /// `q(x - x_{j+1}) < gamma_level`, strict.
    pub fn cover_membership(&self, q: &SepPolyQ, x: &[f64], j: usize, level: usize) -> Result<bool> {
        if j >= self.len() {
            return Err(Error::IndexOutOfRange { index: j, len: self.len() });
        }
        let g = self.gammas.level(level)?;
        Ok(q.eval_shifted(x, self.point(j)) < g)
    }

    /// All `q(x - x_j)` in net order.
    pub fn q_coordinates(&self, q: &SepPolyQ, x: &[f64]) -> Vec<f64> {
        self.points().map(|p| q.eval_shifted(x, p)).collect()
    }

    /// First 0-based index whose level cell contains `x`.
    pub fn first_cover(&self, q: &SepPolyQ, x: &[f64], level: usize) -> Result<Option<usize>> {
        let g = self.gammas.level(level)?;
        Ok(self.points().position(|p| q.eval_shifted(x, p) < g))
    }
}

/// Largest `r` (to bisection accuracy, from below) with `sum_i A_i r^(2i) <= g1`.
pub fn covering_radius(q: &SepPolyQ, g1: f64) -> f64 {
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    while q.radial_upper_bound(hi) <= g1 {
        lo = hi;
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if q.radial_upper_bound(mid) <= g1 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-15 * hi {
            break;
        }
    }
    lo
}

/// Ratio of the unit ball volume to its bounding cube, for estimates only.
fn unit_ball_fraction(d: usize) -> f64 {
    // V_d / 2^d via the recursion V_d = V_{d-2} 2 pi / d.
    let mut v = if d % 2 == 0 { 1.0 } else { 2.0 };
    let mut k = if d % 2 == 0 { 2 } else { 3 };
    while k <= d {
        v *= 2.0 * std::f64::consts::PI / k as f64;
        k += 2;
    }
    (v / 2f64.powi(d as i32)).min(1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn domain_constructor() {
        let d = Domain::new(2, 1.5, Shape::Ball).unwrap();
        assert_eq!((d.dim(), d.radius(), d.shape()), (2, 1.5, Shape::Ball));
        assert!(Domain::new(1, 2.0, Shape::Box).is_ok());
        assert!(Domain::new(2, 1.0, Shape::Ball).is_err());
        assert!(Domain::new(0, 2.0, Shape::Ball).is_err());
        assert!(Domain::new(4, 2.0, Shape::Box).is_err());
        assert!(d.contains(&[0.0, 0.0]));
        assert!(!d.contains(&[1.0, 0.0]));
    }

    #[test]
    fn samplers_stay_inside() {
        let d = Domain::new(3, 2.0, Shape::Box).unwrap();
        for p in d.halton_points(500).unwrap().iter().chain(&d.random_points(500, 1, 0)) {
            assert!(d.contains(p) && euclidean_norm(p) < d.radius());
        }
        let b = Domain::new(2, 1.5, Shape::Ball).unwrap();
        assert!(b.grid_points(10).iter().all(|p| b.contains(p)));
    }

    #[test]
    fn one_dimensional_example() {
        let dom = Domain::new(1, 2.0, Shape::Box).unwrap();
        let q = SepPolyQ::euclidean_quartic(1).unwrap();
        let net = Net::build(&dom, &q, Gammas::new(0.0625, 0.5, 0.6).unwrap(), 100).unwrap();
        assert!((net.r1() - 0.5).abs() < 1e-12);
        assert_eq!(net.spacing(), 0.5);
        let pts: Vec<f64> = net.points().map(|p| p[0]).collect();
        assert_eq!(pts, vec![-1.0, -0.5, 0.0, 0.5, 1.0]);
    }

    #[test]
    fn disk_example_covers() {
        let dom = Domain::new(2, 1.5, Shape::Ball).unwrap();
        let q = SepPolyQ::euclidean_quartic(2).unwrap();
        let net = Net::build(&dom, &q, Gammas::new(0.004, 0.03, 0.0625).unwrap(), 1000).unwrap();
        assert!((net.spacing() - 1.0 / 3.0).abs() < 1e-15);
        assert!(net.len() >= 10 && net.len() < 100, "N = {}", net.len());
        for x in dom.halton_points(10_000).unwrap() {
            let m = net.q_coordinates(&q, &x).into_iter().fold(f64::INFINITY, f64::min);
            assert!(m < 0.004);
        }
    }

    #[test]
    fn membership_rules() {
        let dom = Domain::new(2, 1.5, Shape::Ball).unwrap();
        let q = SepPolyQ::euclidean_quartic(2).unwrap();
        let net = Net::build(&dom, &q, Gammas::new(0.004, 0.03, 0.0625).unwrap(), 1000).unwrap();
        let xj = net.point(3).to_vec();
        for i in 1..=3 {
            assert!(net.cover_membership(&q, &xj, 3, i).unwrap());
        }
        // q(y) = |y|^4 = g2 exactly at |y| = g2^(1/4); pick g2 = 0.0625 exactly instead.
        let net2 = Net::build(&dom, &q, Gammas::new(0.004, 0.0625, 0.5).unwrap(), 1000).unwrap();
        let xj = net2.point(0).to_vec();
        let x = [xj[0] + 0.5, xj[1]];
        assert_eq!(q.eval_shifted(&x, &xj), 0.0625);
        assert!(!net2.cover_membership(&q, &x, 0, 2).unwrap());
        assert!(net.cover_membership(&q, &xj, net.len(), 1).is_err());
        assert!(net.cover_membership(&q, &xj, 0, 4).is_err());
    }

    #[test]
    fn capacity_error() {
        let dom = Domain::new(3, 2.0, Shape::Box).unwrap();
        let q = SepPolyQ::euclidean_quartic(3).unwrap();
        let g = Gammas::from_delta(0.05, 4).unwrap();
        assert!(matches!(Net::build(&dom, &q, g, 1000), Err(Error::Capacity { .. })));
    }

    #[test]
    fn gamma_defaults() {
        let g = Gammas::from_delta(0.5, 4).unwrap();
        assert_eq!(g.g3, 0.5f64.powi(4) / 2.0);
        assert!(3.0 * g.g1 < g.g2 / 2.0);
        assert!(Gammas::new(0.01, 0.05, 0.5).is_err());
        assert_eq!(Gammas::from_delta(10.0, 4).unwrap().g3, 0.9);
    }

    #[test]
    fn deterministic() {
        let dom = Domain::new(2, 1.5, Shape::Ball).unwrap();
        let q = SepPolyQ::euclidean_quartic(2).unwrap();
        let g = Gammas::from_delta(0.3, 4).unwrap();
        let a = Net::build(&dom, &q, g, 100_000).unwrap();
        let b = Net::build(&dom, &q, g, 100_000).unwrap();
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    }
}
