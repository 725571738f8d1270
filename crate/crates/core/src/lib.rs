//! Numerics for the Anderson model on a simplex.
//!
//! The simplex model is the tight-binding Hamiltonian `H = T + V` on `N`
//! sites where every hopping element (diagonal included) equals `1/N` and
//! the on-site energies `v_i` are independent Gaussians of variance `w²`.
//! The clean hopping matrix has a single eigenvalue `1` and an
//! `(N-1)`-fold degenerate flat band at `0`; this crate measures how the
//! flat-band states localize once disorder is switched on.
//!
//! Two independent routes are provided:
//!
//! * [`ensemble`] diagonalizes disorder realizations with the in-house
//!   [`eigen`] solver and averages the inverse participation ratios of the
//!   eigenstates near a target energy.
//! * [`analytic`] evaluates the exact finite-`N` two-fold integral for the
//!   moments and its thermodynamic limit, using [`specfun`] and the
//!   adaptive integrators in [`quadrature`].
//!
//! [`genfun`] checks the general single-field representation of the
//! moments for very small lattices against brute-force disorder averages.
//!
//! The crate is `no_std` and only needs `alloc`. Elementary functions come
//! from `libm`, so results do not depend on the platform's libc.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
#![no_std]

extern crate alloc;

pub mod analytic;
pub mod eigen;
pub mod ensemble;
pub mod error;
pub mod genfun;
pub mod linalg;
pub mod math;
pub mod model;
pub mod quadrature;
pub mod rng;
pub mod specfun;

pub use error::{Error, Result};
