//! The even polynomial `q = sum_i p_i^2` built from a separating polynomial `p`,
//! with the constants the rest of the pipeline consumes.
//!
//! For `q(y) < 1` the lower bound `|y|^(2n) <= q(y)` holds once `q` is scaled so
//! that `q >= 1` on the unit sphere; the upper bound is
//! `q(y) <= sum_i A_i |y|^(2i) <= K1 max(|y|, |y|^(2n))`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default multiplier applied to sampled sphere extrema.
pub const DEFAULT_SAFETY: f64 = 1.05;
const SPHERE_SAMPLES: usize = 20_000;
const SPHERE_SEED: u64 = 0x5eed_5e9a;
/// Sampled values whose spread is below this are treated as exactly constant.
const CONSTANT_SPREAD: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Monomial {
    pub exponents: Vec<u32>,
    pub coeff: f64,
}

/// A homogeneous polynomial in coefficient form.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HomogeneousPoly {
    pub terms: Vec<Monomial>,
}

impl HomogeneousPoly {
    pub fn new(terms: Vec<Monomial>) -> Self {
        Self { terms }
    }

    /// Common total degree of all nonzero terms.
    pub fn degree(&self, dim: usize) -> Result<usize> {
        let mut degree = None;
        for t in &self.terms {
            if t.exponents.len() != dim {
                return Err(Error::InvalidParameter(format!(
                    "monomial has {} exponents, dimension is {dim}",
                    t.exponents.len()
                )));
            }
            if !t.coeff.is_finite() {
                return Err(Error::InvalidParameter("non-finite coefficient".into()));
            }
            if t.coeff == 0.0 {
                continue;
            }
            let d: u32 = t.exponents.iter().sum();
            match degree {
                None => degree = Some(d),
                Some(prev) if prev != d => {
                    return Err(Error::InvalidParameter(format!(
                        "component is not homogeneous: degrees {prev} and {d}"
                    )))
                }
                _ => {}
            }
        }
        match degree {
            Some(0) | None => Err(Error::InvalidParameter(
                "component must have positive degree and a nonzero term".into(),
            )),
            Some(d) => Ok(d as usize),
        }
    }

    /// Evaluates at `x - center` without allocating.
    pub fn eval_shifted(&self, x: &[f64], center: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|t| {
                t.exponents
                    .iter()
                    .zip(x.iter().zip(center))
                    .fold(t.coeff, |acc, (&e, (&xi, &ci))| acc * (xi - ci).powi(e as i32))
            })
            .sum()
    }

    fn coefficient_bound(&self) -> f64 {
        self.terms.iter().map(|t| t.coeff.abs()).sum()
    }

    /// Bound on `|grad p|` over the unit ball.
    fn gradient_bound(&self, dim: usize) -> f64 {
        (0..dim)
            .map(|k| {
                let s: f64 = self
                    .terms
                    .iter()
                    .map(|t| t.coeff.abs() * t.exponents[k] as f64)
                    .sum();
                s * s
            })
            .sum::<f64>()
            .sqrt()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "snake_case")]
pub enum QForm {
    /// `q(y) = |y|^4`, from `p(y) = |y|^2`.
    EuclideanQuartic,
    /// `q(y) = d^2 (sum y_i^4)^2`, from `p(y) = sum y_i^4`.
    QuarticSumSquared,
    /// `q = scale * sum_i p_i^2` for user components, slot `i` holding degree `i + 1`.
    Components { p: Vec<Option<HomogeneousPoly>> },
}

/// Constants that depend on the domain radius.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DerivedConstants {
    pub radius: f64,
    /// `M >= 1` with `q < M` on the radius-`2R` ball.
    pub m_bound: f64,
    /// Lipschitz constant of `q` on the radius-`2R` ball.
    pub lipschitz: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SepPolyQ {
    dim: usize,
    form: QForm,
    scale: f64,
    /// Degree `n` of `p`; `q` has degree `2n`.
    p_degree: usize,
    /// Infimum of the unscaled `q` on the unit sphere (sampled or closed form).
    raw_eta: f64,
    /// Infimum bound on the unit sphere after scaling; at least one.
    eta: f64,
    safety: f64,
    /// `(2i, A_i)`: sup of `q_i` on the unit ball, after scaling.
    component_sups: Vec<(usize, f64)>,
    k1: f64,
    constants: Option<DerivedConstants>,
}

/// Both inequalities of the two-sided polynomial bound at one point.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BoundsCheck {
    pub q: f64,
    pub norm_pow: f64,
    /// The lower bound only applies when `q(y) < 1`.
    pub lower_applicable: bool,
    pub lower_holds: bool,
    pub upper_bound: f64,
    pub upper_holds: bool,
}

pub const LOWER_SLACK: f64 = 1e-12;

impl SepPolyQ {
    pub fn euclidean_quartic(dim: usize) -> Result<Self> {
        check_dim(dim)?;
        Ok(Self {
            dim,
            form: QForm::EuclideanQuartic,
            scale: 1.0,
            p_degree: 2,
            raw_eta: 1.0,
            eta: 1.0,
            safety: 1.0,
            component_sups: vec![(4, 1.0)],
            k1: 1.0,
            constants: None,
        })
    }

    /// `d^2 (sum y_i^4)^2`; the minimum of `sum y_i^4` on the sphere is `1/d`.
    pub fn quartic_sum(dim: usize) -> Result<Self> {
        check_dim(dim)?;
        let d2 = (dim * dim) as f64;
        Ok(Self {
            dim,
            form: QForm::QuarticSumSquared,
            scale: d2,
            p_degree: 4,
            raw_eta: 1.0 / d2,
            eta: 1.0,
            safety: 1.0,
            component_sups: vec![(8, d2)],
            k1: d2,
            constants: None,
        })
    }

    /// Builds `q = sum p_i^2` from homogeneous components of `p`, scaling so
    /// that the sampled sphere infimum, divided by `safety`, becomes one.
    pub fn build_q(dim: usize, components: &[HomogeneousPoly], safety: f64) -> Result<Self> {
        check_dim(dim)?;
        if !(safety >= 1.0) {
            return Err(Error::InvalidParameter(format!("safety factor {safety} must be >= 1")));
        }
        if components.is_empty() {
            return Err(Error::InvalidParameter("no components given".into()));
        }
        let mut slots: Vec<Option<HomogeneousPoly>> = Vec::new();
        for c in components {
            let deg = c.degree(dim)?;
            if slots.len() < deg {
                slots.resize(deg, None);
            }
            match &mut slots[deg - 1] {
                Some(existing) => existing.terms.extend(c.terms.iter().cloned()),
                slot @ None => *slot = Some(c.clone()),
            }
        }
        let p_degree = slots.len();
        let dirs = sphere_directions(dim);

        let raw_q = |y: &[f64]| -> f64 {
            let zero = vec![0.0; dim];
            slots
                .iter()
                .flatten()
                .map(|p| {
                    let v = p.eval_shifted(y, &zero);
                    v * v
                })
                .sum()
        };
        let (lo, hi) = min_max(dirs.iter().map(|d| raw_q(d)));
        if !(lo > 1e-12) {
            return Err(Error::NotSeparating { infimum: lo });
        }
        let exact = hi - lo <= CONSTANT_SPREAD * hi;
        let applied = if exact { 1.0 } else { safety };
        let scale = applied / lo;

        let zero = vec![0.0; dim];
        let mut component_sups = Vec::new();
        for (i, slot) in slots.iter().enumerate() {
            let Some(p) = slot else { continue };
            let (plo, phi) = min_max(dirs.iter().map(|d| {
                let v = p.eval_shifted(d, &zero);
                v * v
            }));
            let coeff_cap = scale * p.coefficient_bound().powi(2);
            let sampled = if phi - plo <= CONSTANT_SPREAD * phi {
                scale * phi
            } else {
                scale * phi * safety
            };
            component_sups.push((2 * (i + 1), sampled.min(coeff_cap)));
        }
        let k1 = component_sups.iter().map(|&(_, a)| a).sum();
        Ok(Self {
            dim,
            form: QForm::Components { p: slots },
            scale,
            p_degree,
            raw_eta: lo,
            eta: scale * lo,
            safety: applied,
            component_sups,
            k1,
            constants: None,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }
    pub fn form(&self) -> &QForm {
        &self.form
    }
    pub fn scale(&self) -> f64 {
        self.scale
    }
    /// Degree `n` of the separating polynomial.
    pub fn p_degree(&self) -> usize {
        self.p_degree
    }
    /// Degree `2n` of `q`.
    pub fn two_n(&self) -> usize {
        2 * self.p_degree
    }
    pub fn raw_eta(&self) -> f64 {
        self.raw_eta
    }
    pub fn eta(&self) -> f64 {
        self.eta
    }
    pub fn safety(&self) -> f64 {
        self.safety
    }
    pub fn k1(&self) -> f64 {
        self.k1
    }
    pub fn component_sups(&self) -> &[(usize, f64)] {
        &self.component_sups
    }
    pub fn constants(&self) -> Option<&DerivedConstants> {
        self.constants.as_ref()
    }

    fn derived(&self) -> &DerivedConstants {
        self.constants
            .as_ref()
            .expect("derive_constants must run before domain constants are used")
    }
    pub fn m_bound(&self) -> f64 {
        self.derived().m_bound
    }
    pub fn lipschitz(&self) -> f64 {
        self.derived().lipschitz
    }

    /// Fills `M` and `L_q` for domains inside the radius-`R` ball.
    pub fn derive_constants(mut self, radius: f64) -> Result<Self> {
        if !(radius > 1.0) || !radius.is_finite() {
            return Err(Error::InvalidParameter(format!("radius {radius} must exceed 1")));
        }
        let rho = 2.0 * radius;
        let m_bound = (self.k1 * rho.max(rho.powi(self.two_n() as i32))).max(1.0);
        let lipschitz = match &self.form {
            QForm::EuclideanQuartic => 4.0 * rho.powi(3),
            QForm::QuarticSumSquared => 8.0 * self.scale * rho.powi(7),
            QForm::Components { p } => p
                .iter()
                .enumerate()
                .filter_map(|(i, slot)| slot.as_ref().map(|poly| (i + 1, poly)))
                .map(|(deg, poly)| {
                    2.0 * self.scale
                        * poly.coefficient_bound()
                        * poly.gradient_bound(self.dim)
                        * rho.powi(2 * deg as i32 - 1)
                })
                .sum(),
        };
        if !m_bound.is_finite() || !lipschitz.is_finite() {
            return Err(Error::Overflow(format!(
                "polynomial constants overflow at radius {radius} (M = {m_bound}, L_q = {lipschitz})"
            )));
        }
        self.constants = Some(DerivedConstants { radius, m_bound, lipschitz });
        Ok(self)
    }

    pub fn eval(&self, y: &[f64]) -> f64 {
        self.eval_shifted_unchecked(y, None)
    }

    /// `q(x - center)`.
    pub fn eval_shifted(&self, x: &[f64], center: &[f64]) -> f64 {
        self.eval_shifted_unchecked(x, Some(center))
    }

    #[inline]
    fn eval_shifted_unchecked(&self, x: &[f64], center: Option<&[f64]>) -> f64 {
        let diff = |k: usize| match center {
            Some(c) => x[k] - c[k],
            None => x[k],
        };
        match &self.form {
            QForm::EuclideanQuartic => {
                let s: f64 = (0..self.dim).map(|k| diff(k) * diff(k)).sum();
                s * s
            }
            QForm::QuarticSumSquared => {
                let s: f64 = (0..self.dim).map(|k| diff(k).powi(4)).sum();
                self.scale * s * s
            }
            QForm::Components { p } => {
                let zero;
                let c = match center {
                    Some(c) => c,
                    None => {
                        zero = vec![0.0; self.dim];
                        &zero
                    }
                };
                self.scale
                    * p.iter()
                        .flatten()
                        .map(|poly| poly.eval_shifted(x, c).powi(2))
                        .sum::<f64>()
            }
        }
    }

    /// `sum_i A_i r^(2i)`: an upper bound of `q` on the closed radius-`r` ball.
    pub fn radial_upper_bound(&self, r: f64) -> f64 {
        self.component_sups.iter().map(|&(deg, a)| a * r.powi(deg as i32)).sum()
    }

    /// `K1 max(|y|, |y|^(2n))`.
    pub fn upper_envelope(&self, norm: f64) -> f64 {
        self.k1 * norm.max(norm.powi(self.two_n() as i32))
    }

    pub fn check_bounds(&self, y: &[f64]) -> BoundsCheck {
        let q = self.eval(y);
        let norm = euclidean_norm(y);
        let norm_pow = norm.powi(self.two_n() as i32);
        let lower_applicable = q < 1.0;
        let upper_bound = self.upper_envelope(norm);
        BoundsCheck {
            q,
            norm_pow,
            lower_applicable,
            lower_holds: !lower_applicable || norm_pow <= q + LOWER_SLACK,
            upper_bound,
            upper_holds: q <= upper_bound * (1.0 + 1e-12),
        }
    }
}

fn check_dim(dim: usize) -> Result<()> {
    if dim == 0 {
        Err(Error::InvalidParameter("dimension must be positive".into()))
    } else {
        Ok(())
    }
}

pub fn euclidean_norm(y: &[f64]) -> f64 {
    y.iter().map(|v| v * v).sum::<f64>().sqrt()
}

fn min_max(values: impl Iterator<Item = f64>) -> (f64, f64) {
    values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)))
}

/// Deterministic unit directions: signed basis vectors, signed diagonals (for
/// small `d`), and Gaussian samples.
fn sphere_directions(dim: usize) -> Vec<Vec<f64>> {
    let mut dirs = Vec::new();
    for k in 0..dim {
        for s in [1.0, -1.0] {
            let mut e = vec![0.0; dim];
            e[k] = s;
            dirs.push(e);
        }
    }
    if dim <= 10 {
        let inv = 1.0 / (dim as f64).sqrt();
        for mask in 0..(1u32 << dim) {
            dirs.push(
                (0..dim)
                    .map(|k| if mask & (1 << k) != 0 { -inv } else { inv })
                    .collect(),
            );
        }
    }
    if dim > 1 {
        let mut rng = ChaCha8Rng::seed_from_u64(SPHERE_SEED);
        while dirs.len() < SPHERE_SAMPLES {
            let v: Vec<f64> = (0..dim).map(|_| StandardNormal.sample(&mut rng)).collect();
            let n = euclidean_norm(&v);
            if n > 1e-12 {
                dirs.push(v.into_iter().map(|c| c / n).collect());
            }
        }
    }
    dirs
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quartic_sum_p(dim: usize) -> HomogeneousPoly {
        HomogeneousPoly::new(
            (0..dim)
                .map(|k| {
                    let mut e = vec![0; dim];
                    e[k] = 4;
                    Monomial { exponents: e, coeff: 1.0 }
                })
                .collect(),
        )
    }

    #[test]
    fn euclidean_components_reduce_to_norm_power() {
        let p = HomogeneousPoly::new(vec![
            Monomial { exponents: vec![2, 0], coeff: 1.0 },
            Monomial { exponents: vec![0, 2], coeff: 1.0 },
        ]);
        let q = SepPolyQ::build_q(2, &[p], DEFAULT_SAFETY).unwrap();
        assert_eq!(q.p_degree(), 2);
        assert!((q.eta() - 1.0).abs() < 1e-12);
        assert!((q.k1() - 1.0).abs() < 1e-12);
        let y = [0.3, -0.7];
        let n2: f64 = 0.09 + 0.49;
        assert!((q.eval(&y) - n2 * n2).abs() < 1e-15);
    }

    #[test]
    fn one_dimensional_square() {
        let p = HomogeneousPoly::new(vec![Monomial { exponents: vec![2], coeff: 1.0 }]);
        let q = SepPolyQ::build_q(1, &[p], DEFAULT_SAFETY).unwrap();
        assert_eq!(q.eval(&[0.5]), 0.0625);
        assert_eq!(q.scale(), 1.0);
    }

    #[test]
    fn quartic_sum_sampler_finds_symmetric_minimum() {
        let q = SepPolyQ::build_q(3, &[quartic_sum_p(3)], DEFAULT_SAFETY).unwrap();
        // min of sum x_i^4 on the sphere is 1/3 at the diagonal, so q-min is 1/9.
        assert!((q.raw_eta() - 1.0 / 9.0).abs() < 1e-12);
        assert_eq!(q.p_degree(), 4);
        assert!((q.scale() - 9.0 * DEFAULT_SAFETY).abs() < 1e-9);
        let builtin = SepPolyQ::quartic_sum(3).unwrap();
        assert_eq!(builtin.scale(), 9.0);
    }

    #[test]
    fn constants_match_calculus() {
        let q = SepPolyQ::euclidean_quartic(2).unwrap().derive_constants(1.0 + 1e-15);
        assert!(q.is_ok());
        let q = SepPolyQ::euclidean_quartic(2).unwrap().derive_constants(1.0);
        assert!(q.is_err());
        let q = SepPolyQ::euclidean_quartic(1).unwrap().derive_constants(1.5).unwrap();
        assert_eq!(q.m_bound(), 81.0);
        assert!((q.lipschitz() - 108.0).abs() < 1e-12);
    }

    #[test]
    fn not_separating_rejected() {
        // p = x1^2 vanishes on the sphere direction e2.
        let p = HomogeneousPoly::new(vec![Monomial { exponents: vec![2, 0], coeff: 1.0 }]);
        assert!(matches!(
            SepPolyQ::build_q(2, &[p], DEFAULT_SAFETY),
            Err(Error::NotSeparating { .. })
        ));
    }

    #[test]
    fn inhomogeneous_component_rejected() {
        let p = HomogeneousPoly::new(vec![
            Monomial { exponents: vec![2, 0], coeff: 1.0 },
            Monomial { exponents: vec![0, 1], coeff: 1.0 },
        ]);
        assert!(SepPolyQ::build_q(2, &[p], DEFAULT_SAFETY).is_err());
    }

    #[test]
    fn check_bounds_examples() {
        let q = SepPolyQ::euclidean_quartic(2).unwrap();
        let c = q.check_bounds(&[0.5, 0.0]);
        assert_eq!(c.q, 0.0625);
        assert_eq!(c.norm_pow, 0.0625);
        assert!(c.lower_applicable && c.lower_holds && c.upper_holds);
        let z = q.check_bounds(&[0.0, 0.0]);
        assert_eq!(z.q, 0.0);
        assert!(z.lower_holds && z.upper_holds);
    }
}
