use alloc::vec::Vec;

use super::poly::Poly;
use super::ppfunction::{AxisSpec, PPFunction};
use crate::error::{Error, Result};
use crate::rational::Rational;

/// B-spline of degree `knots.len() - 2` on simple knots, by Cox-de Boor.
/// Scaled so that translates on a uniform grid sum to one.
pub fn bspline_knots(knots: &[Rational]) -> Result<PPFunction> {
    if knots.len() < 3 {
        return Err(Error::DegenerateInterval("a B-spline needs at least 3 knots".into()));
    }
    for w in knots.windows(2) {
        if w[0] >= w[1] {
            return Err(Error::DegenerateInterval(alloc::format!("knots not increasing at {}", w[1])));
        }
    }
    let m = knots.len() - 1;
    // basis[i][j]: piece of B_{i,k} on knot interval j
    let mut basis: Vec<Vec<Poly>> =
        (0..m).map(|i| (0..m).map(|j| if i == j { Poly::one() } else { Poly::zero() }).collect()).collect();
    let x = Poly::var(0);
    for k in 1..m {
        let mut next = Vec::with_capacity(m - k);
        for i in 0..m - k {
            let left = x.sub(&Poly::constant(knots[i].clone())).scale(&(&knots[i + k] - &knots[i]).recip());
            let right =
                Poly::constant(knots[i + k + 1].clone()).sub(&x).scale(&(&knots[i + k + 1] - &knots[i + 1]).recip());
            let pieces: Vec<Poly> = (0..m).map(|j| left.mul(&basis[i][j]).add(&right.mul(&basis[i + 1][j]))).collect();
            next.push(pieces);
        }
        basis = next;
    }
    let mut pieces = Vec::with_capacity(m + 2);
    pieces.push(Poly::zero());
    pieces.extend(basis.swap_remove(0));
    pieces.push(Poly::zero());
    PPFunction::univariate(AxisSpec::line(knots.to_vec()), pieces)
}

fn uniform_knots(degree: u32, lo: &Rational, hi: &Rational) -> Result<Vec<Rational>> {
    if degree < 1 {
        return Err(Error::Invalid("B-spline degree must be at least 1".into()));
    }
    if lo >= hi {
        return Err(Error::DegenerateInterval(alloc::format!("[{}, {}]", lo, hi)));
    }
    let h = (hi - lo) / Rational::from_int(degree as i64 + 1);
    Ok((0..=degree as i64 + 1).map(|k| lo + &(&h * &Rational::from_int(k))).collect())
}

/// Degree-`degree` B-spline with uniform knots spanning `[lo, hi]`, scaled
/// as a cardinal spline (translates by one knot step sum to one).
pub fn bspline_on(degree: u32, lo: &Rational, hi: &Rational) -> Result<PPFunction> {
    bspline_knots(&uniform_knots(degree, lo, hi)?)
}

/// Same shape as [`bspline_on`] with total integral one.
pub fn bspline_normalized_on(degree: u32, lo: &Rational, hi: &Rational) -> Result<PPFunction> {
    let b = bspline_on(degree, lo, hi)?;
    let mass = b.integrate_axis_full(0)?.as_constant().expect("integral of a univariate function is constant");
    Ok(b.scale(&mass.recip()))
}

/// `C^{degree}` monotone step from 0 (left of `lo`) to 1 (right of `hi`).
pub fn smoothstep(degree: u32, lo: &Rational, hi: &Rational) -> Result<PPFunction> {
    bspline_normalized_on(degree, lo, hi)?.cumulative_integral(0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q;

    #[test]
    fn hat_peak() {
        let h = bspline_on(1, &q(0, 1), &q(2, 1)).unwrap();
        assert_eq!(h.eval(&[q(1, 1)]), q(1, 1));
        assert_eq!(h.eval(&[q(1, 2)]), q(1, 2));
        assert_eq!(h.eval(&[q(2, 1)]), q(0, 1));
    }

    #[test]
    fn cubic_cardinal_partition_of_unity() {
        let mut sum = PPFunction::zero_on(&[super::super::AxisKind::Line]);
        for k in -4..=4 {
            sum = sum.add(&bspline_on(3, &q(k, 1), &q(k + 4, 1)).unwrap()).unwrap();
        }
        for x in [q(0, 1), q(1, 3), q(7, 5), q(2, 1), q(-1, 7)] {
            assert_eq!(sum.eval(&[x]), q(1, 1));
        }
    }

    #[test]
    fn smoothness_of_cubic() {
        let b = bspline_on(3, &q(0, 1), &q(4, 1)).unwrap();
        let d2 = b.partial_derivative(0).unwrap().partial_derivative(0).unwrap();
        // second derivative is continuous: compare values from both sides of a knot
        let ax = &d2.axes()[0];
        for (j, k) in ax.breakpoints.iter().enumerate() {
            let left = d2.cells().get(&{
                let mut c = [0u16; 8];
                c[0] = j as u16;
                c
            });
            let right = d2.cells().get(&{
                let mut c = [0u16; 8];
                c[0] = j as u16 + 1;
                c
            });
            let lv = left.map_or(q(0, 1), |p| p.eval(core::slice::from_ref(k)));
            let rv = right.map_or(q(0, 1), |p| p.eval(core::slice::from_ref(k)));
            assert_eq!(lv, rv);
        }
    }

    #[test]
    fn smoothstep_ends() {
        let e = smoothstep(2, &q(0, 1), &q(1, 1)).unwrap();
        assert_eq!(e.eval(&[q(-1, 1)]), q(0, 1));
        assert_eq!(e.eval(&[q(1, 2)]), q(1, 2));
        assert_eq!(e.eval(&[q(3, 1)]), q(1, 1));
    }

    #[test]
    fn degenerate_rejected() {
        assert!(matches!(bspline_on(2, &q(1, 1), &q(1, 1)), Err(Error::DegenerateInterval(_))));
    }
}
