//! A numerical laboratory for stress-testing norm- and
//! algorithm-dependent generalization bounds.
//!
//! The library builds three families of learning problems where good
//! generalization coexists with provable failure on an adversarial
//! "companion" dataset drawn from the same marginal distribution:
//!
//! * [`linear`] - a high-dimensional linear task whose learner
//!   memorizes its noise coordinates; negating the noise of the
//!   training set flips every prediction while fresh test error stays
//!   near zero.
//! * [`expnet`] - an exponential-activation network with an explicit
//!   closed-form learner exhibiting the same failure through sign
//!   structure rather than norm growth; all evaluation runs in the log
//!   domain.
//! * [`relu`] - a trained two-layer ReLU network on concentric
//!   hyperspheres, where projecting training points onto the opposite
//!   sphere (with flipped labels) exposes decision-boundary skew.
//!
//! [`audit`] turns trial outcomes into quantitative certificates
//! (generalization-gap estimates, lower bounds on what any
//! algorithm-dependent uniform bound must pay, norm-based capacity
//! bounds), and [`numerics`]/[`losses`] supply the deterministic
//! plumbing underneath.

pub mod audit;
pub mod error;
pub mod expnet;
pub mod linear;
pub mod losses;
pub mod numerics;
pub mod relu;
pub mod report;

pub use error::{Error, Result};
pub use report::TrialReport;
