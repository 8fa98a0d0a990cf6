//! Pseudo-spectral solvers for the incompressible Euler, Euler-Poisson and
//! Euler-Monge-Ampère systems on the periodic unit square, together with a
//! periodic Monge-Ampère solver and the experiment harness used to measure
//! quasi-neutral convergence rates.

pub mod error;
pub mod experiments;
pub mod flow;
pub mod io;
pub mod monge_ampere;
pub mod spectral;
