//! Quantum cat maps on the torus.
//!
//! A hyperbolic `A ∈ SL(2, Z)` with `ab`, `cd` even quantizes to a unitary
//! `M_{N,0}` on `H_N(0) ≅ C^N`. Along the moduli `N = N′_q` (the largest `N`
//! with `A^q ≡ I mod N`) the quantum period is `q` or `2q`, and the short-period
//! projector states built from a basis vector are eigenfunctions whose
//! coordinates and matrix elements can be measured directly.
//!
//! * [`arith`]: exact integer arithmetic (`p_r`, `N′_q`, orders, quantum periods, resonances).
//! * [`heisenberg`]: the propagator, quantum translations `W_N(m)` and the Egorov and dispersive checks.
//! * [`states`]: scalar phases, projector states, eigen-residuals and coordinate profiles.
//! * [`diagnostics`]: modewise equidistribution, the diagonal split, rate fits and smoothed Wigner grids.
//! * [`evenperiod`]: half-period structure and vanishing states for `N = N′_{2k}`.
//!
//! ```
//! use catmap::{heisenberg::build_propagator, states::*, CatMap};
//!
//! let map = CatMap::standard();
//! let prop = build_propagator(&map, 71).unwrap();
//! let spec = ProjectorSpec::new(&prop, Parity::Odd, 3, 0, 0).unwrap();
//! let (v, _) = projector_state(&prop, &spec);
//! let u = normalize(&v, vanish_tol(71)).unwrap();
//! assert!(eigen_residual(&prop, &u, spec.omega) < 1e-10);
//! ```

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod arith;
pub mod diagnostics;
pub mod error;
pub mod evenperiod;
pub mod heisenberg;
pub mod io;
pub mod mode;
pub mod par;
pub mod states;

pub use arith::{validate_catmap, Branch, CatMap};
pub use error::{Condition, Error, Result};
pub use heisenberg::{build_propagator, build_propagator_with, Propagator, PropagatorOptions, QuantumState};
pub use mode::FourierMode;
pub use par::Backend;
pub use states::{Parity, ProjectorSpec};
