//! Exact exterior calculus on piecewise-polynomial forms.
//!
//! The crate builds a linear right inverse of the de Rham differential on
//! boxes and flat tori through the augmented Čech–de Rham double complex, and
//! uses it to append coordinates to an embedding into `R^2N` so that the
//! standard symplectic form pulls back to a prescribed closed 2-form.
//! Every identity is checked in exact rational arithmetic.
#![no_std]

extern crate alloc;
#[cfg(feature = "std")]
extern crate std;

pub mod antidiff;
pub mod cechdr;
pub mod cover;
pub mod embedder;
pub mod error;
pub mod exactpp;
pub mod forms;
pub mod linalg;
pub mod rational;

pub use error::{Error, Result};
pub use rational::{q, Rational};
#[cfg(feature = "random")]
pub mod random;
