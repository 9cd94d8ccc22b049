//! A laboratory for Nash-convergent game dynamics.
//!
//! The crate builds up from an exact-rational representation of finite
//! normal-form games to:
//!
//! * [`equilibria`] — complete support-enumeration of bimatrix Nash
//!   equilibria with nondegeneracy certification and Wilson-oddness checks;
//! * [`affine`] — exact computation of all equilibria lying on a given line
//!   (via sorted quadratic roots) or low-dimensional affine subspace;
//! * [`dynamics`] — discrete-time Nash-convergent dynamics (point-toward-
//!   equilibrium, chamber, Brown–von Neumann–Nash) with Lyapunov evaluators
//!   and a generic descent/trajectory engine;
//! * [`reductions`] — runnable black-box demos: equilibrium finding through
//!   a single dynamic query, and a randomized uniqueness test;
//! * [`pg`] — the proving-game protocol: a budgeted prover queries a claimed
//!   dynamic, the adversary answers with scaled BNN steps and afterwards
//!   exhibits a legitimate dynamic consistent with every reply.
//!
//! Equilibrium computation and all line/affine algebra are exact (arbitrary
//! precision rationals, algebraic numbers of degree two); trajectory
//! simulation runs in IEEE doubles. The two numeric modes never mix inside
//! one operation.

pub mod affine;
pub mod dynamics;
pub mod equilibria;
pub mod error;
pub mod game;
pub mod linalg;
pub mod pg;
pub mod rational;
pub mod reductions;
pub mod roots;
pub mod sampling;

pub use error::{Error, Result};
pub use game::{FloatProfile, Game, MixedProfile, Support};
pub use rational::Rat;
