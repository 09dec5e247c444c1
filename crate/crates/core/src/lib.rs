//! Lipschitz, real-analytic approximation of bounded, uniformly continuous
//! functions on bounded domains of `R^d`.
//!
//! The pipeline follows a separating-polynomial construction:
//!
//! * [`seppoly`] builds the even polynomial `q` and its certified constants;
//! * [`space_net`] covers the domain with `q`-sublevel cells around a lattice net;
//! * [`mollifier`] smooths a tensor bump with anisotropic Gaussians, giving the
//!   functionals `phi_n`;
//! * [`gates`] builds certified analytic gates and the functions `psi_j`, `u_j`;
//! * [`gauge`] evaluates the Minkowski functional of `{C <= 1}` with
//!   `C(x) = sum_j x_j^(2j)`;
//! * [`approximant`] assembles `K(x) = lambda({F(x_j) u_j(x)}) / lambda({u_j(x)})`.
//!
//! [`cli`] and [`verify`] drive experiments and the invariant batteries.

pub mod approximant;
pub mod cli;
pub mod config;
pub mod error;
pub mod gates;
pub mod gauge;
pub mod mollifier;
pub mod quadrature;
pub mod rng;
pub mod seppoly;
pub mod space_net;
pub mod special;
pub mod verify;

pub use approximant::{Approximant, ApproximantConfig, TargetFunction};
pub use error::{Error, Result};
pub use gates::{GateMode, GateSet};
pub use gauge::Gauge;
pub use mollifier::{BumpSpec, MollifierFamily, NuBackend};
pub use seppoly::SepPolyQ;
pub use space_net::{Domain, Gammas, Net, Shape};
