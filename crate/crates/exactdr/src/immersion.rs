//! Numeric immersion spot check: smallest singular value of the Jacobian
//! along the manifold axes at sample points.

use nalgebra::DMatrix;
use serde::Serialize;

use exactdr_core::forms::{PPMap, Role};
use exactdr_core::Result;

#[derive(Clone, Debug, Serialize)]
pub struct ImmersionCheck {
    pub samples: usize,
    pub min_singular_value: f64,
    /// Sample point where the minimum is attained.
    pub argmin: Vec<f64>,
}

/// Samples `per_axis` interior points per manifold axis (3 per parameter axis),
/// avoiding grid-aligned positions.
pub fn spot_check(map: &PPMap, per_axis: usize) -> Result<ImmersionCheck> {
    let dom = &map.domain;
    let man = dom.manifold_axes();
    let partials: Vec<Vec<_>> = map
        .coordinates
        .iter()
        .map(|c| man.iter().map(|&a| c.partial_derivative(a)).collect::<Result<Vec<_>>>())
        .collect::<Result<_>>()?;
    let ticks: Vec<Vec<f64>> = dom
        .axes()
        .iter()
        .map(|ax| {
            let m = if ax.role == Role::Parameter { 3 } else { per_axis.max(1) };
            let (lo, hi) = (ax.extent.lo.to_f64(), ax.extent.hi.to_f64());
            (0..m).map(|i| lo + (hi - lo) * (i as f64 + 0.4375) / m as f64).collect()
        })
        .collect();
    let mut best = ImmersionCheck { samples: 0, min_singular_value: f64::INFINITY, argmin: Vec::new() };
    let mut idx = vec![0usize; ticks.len()];
    loop {
        let x: Vec<f64> = idx.iter().zip(&ticks).map(|(&i, t)| t[i]).collect();
        let jac = DMatrix::from_fn(partials.len(), man.len(), |i, j| partials[i][j].eval_f64(&x));
        // fewer coordinates than manifold axes cannot immerse
        let sv = if jac.nrows() < jac.ncols() { 0.0 } else { jac.singular_values().min() };
        best.samples += 1;
        if sv < best.min_singular_value {
            best.min_singular_value = sv;
            best.argmin = x;
        }
        let mut k = idx.len();
        loop {
            if k == 0 {
                return Ok(best);
            }
            k -= 1;
            idx[k] += 1;
            if idx[k] < ticks[k].len() {
                break;
            }
            idx[k] = 0;
        }
    }
}
