//! Exact piecewise polynomials over the rationals.

pub mod bspline;
pub mod poly;
pub mod ppfunction;

pub use bspline::{bspline_knots, bspline_normalized_on, bspline_on, smoothstep};
pub use poly::{Mono, Poly, MAX_VARS};
pub use ppfunction::{floor_div, reduce_mod, AxisKind, AxisSpec, Cell, PPFunction};

use crate::rational::Rational;

/// Closed interval `[lo, hi]`. On a circle axis `hi` may exceed the period,
/// describing an arc that crosses `0`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Interval {
    pub lo: Rational,
    pub hi: Rational,
}

impl Interval {
    pub fn new(lo: Rational, hi: Rational) -> Self {
        Interval { lo, hi }
    }

    pub fn len(&self) -> Rational {
        &self.hi - &self.lo
    }

    pub fn mid(&self) -> Rational {
        (&self.lo + &self.hi) * Rational::new(1, 2)
    }

    pub fn contains(&self, x: &Rational) -> bool {
        &self.lo <= x && x <= &self.hi
    }
}
