//! Left-invariant norms on finitely generated groups, conjugation moduli,
//! norm extension to free products, and finite approximation of normed
//! free groups.

pub mod error;
pub mod exec;
pub mod finite;
pub mod finite_approx;
pub mod freeproduct;
pub mod group;
pub mod moc;
pub mod norms;
pub mod pipeline;
pub mod rational;
pub mod ultraprod;
pub mod words;

pub use error::{Caps, Error, Result};
pub use exec::Execution;
pub use rational::Q;
