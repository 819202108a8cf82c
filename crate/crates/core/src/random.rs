//! Seeded generators of random exact data, for tests and the self-test.

use alloc::vec::Vec;

use rand::Rng;
pub use rand::SeedableRng;
pub use rand_chacha::ChaCha8Rng as TestRng;

use crate::cechdr::{CechComplex, Cochain, Entry};
use crate::error::Result;
use crate::exactpp::{bspline_on, AxisKind, PPFunction};
use crate::forms::{mask_of, Domain, Form, Role};
use crate::rational::Rational;

/// Knobs for random functions.
#[derive(Clone, Debug)]
pub struct RandomOptions {
    /// Knot grid: cells per axis extent.
    pub grid: usize,
    /// Degrees to draw B-splines from (`>= 2` keeps derivatives continuous).
    pub degrees: Vec<u32>,
    /// Number of tensor terms per function.
    pub terms: usize,
    /// Probability (in percent) that a form component is present.
    pub density: u32,
}

impl Default for RandomOptions {
    fn default() -> Self {
        RandomOptions { grid: 8, degrees: alloc::vec![2, 3], terms: 2, density: 70 }
    }
}

pub fn rng(seed: u64) -> TestRng {
    TestRng::seed_from_u64(seed)
}

/// Small random rational, never zero.
pub fn rational(rng: &mut impl Rng) -> Rational {
    loop {
        let n: i64 = rng.gen_range(-6..=6);
        let d: i64 = rng.gen_range(1..=5);
        if n != 0 {
            return Rational::new(n, d);
        }
    }
}

/// Random B-spline along one axis with knots on the axis grid, supported
/// inside the core of a line axis.
pub fn axis_bspline(rng: &mut impl Rng, domain: &Domain, axis: usize, opts: &RandomOptions) -> Result<PPFunction> {
    let ax = &domain.axes()[axis];
    let d = opts.degrees[rng.gen_range(0..opts.degrees.len())];
    let grid = opts.grid.max(d as usize + 2);
    let h = ax.extent.len() / Rational::from_int(grid as i64);
    let span = &h * &Rational::from_int(d as i64 + 1);
    match &ax.kind {
        AxisKind::Line => {
            let i = rng.gen_range(0..=grid - d as usize - 1);
            let lo = &ax.extent.lo + &(&h * &Rational::from_int(i as i64));
            bspline_on(d, &lo, &(&lo + &span))
        }
        AxisKind::Circle { period } => {
            let i = rng.gen_range(0..grid);
            let lo = &h * &Rational::from_int(i as i64);
            bspline_on(d, &lo, &(&lo + &span))?.periodize(0, period)
        }
    }
}

/// Random combination of tensor products of B-splines. Along parameter axes
/// each factor is a B-spline or the constant one.
pub fn function(rng: &mut impl Rng, domain: &Domain, opts: &RandomOptions) -> Result<PPFunction> {
    let mut acc = domain.zero_fn();
    for _ in 0..opts.terms {
        let mut factors = Vec::with_capacity(domain.dim());
        for (a, ax) in domain.axes().iter().enumerate() {
            if ax.role == Role::Parameter && rng.gen_bool(0.5) {
                factors.push(PPFunction::constant_on(core::slice::from_ref(&ax.kind), Rational::one()));
            } else {
                factors.push(axis_bspline(rng, domain, a, opts)?);
            }
        }
        acc = acc.add(&PPFunction::tensor(&factors).scale(&rational(rng)))?;
    }
    Ok(acc)
}

/// All increasing index sets of size `q` drawn from `axes`.
pub fn index_sets(axes: &[usize], q: usize) -> Vec<Vec<usize>> {
    fn rec(axes: &[usize], q: usize, start: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == q {
            out.push(cur.clone());
            return;
        }
        for i in start..axes.len() {
            cur.push(axes[i]);
            rec(axes, q, i + 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(axes, q, 0, &mut Vec::new(), &mut out);
    out
}

/// Random compactly supported `q`-form (nonzero whenever `q <= n`).
pub fn form(rng: &mut impl Rng, domain: &alloc::sync::Arc<Domain>, q: usize, opts: &RandomOptions) -> Result<Form> {
    let sets = index_sets(&domain.manifold_axes(), q);
    let mut out = Form::zero(domain, q);
    if sets.is_empty() {
        return Ok(out);
    }
    let forced = rng.gen_range(0..sets.len());
    for (i, s) in sets.iter().enumerate() {
        if i == forced || rng.gen_range(0..100) < opts.density {
            out.add_component(mask_of(s), function(rng, domain, opts)?)?;
        }
    }
    Ok(out)
}

/// Random exact `k`-form `d β`.
pub fn exact_form(
    rng: &mut impl Rng,
    domain: &alloc::sync::Arc<Domain>,
    k: usize,
    opts: &RandomOptions,
) -> Result<Form> {
    Ok(form(rng, domain, k - 1, opts)?.d())
}

/// Random cochain in bidegree `(-p, q)`; form entries are multiplied by the
/// partition functions of their simplex so that supports stay inside it.
pub fn cochain(rng: &mut impl Rng, cx: &CechComplex, p: isize, q: usize, opts: &RandomOptions) -> Result<Cochain> {
    let dom = cx.domain().clone();
    let n = cx.n();
    let mut out = Cochain::zero(p, q);
    let width = cx.width(p);
    let sparse = width > 6;
    for s in 0..width {
        if sparse && rng.gen_range(0..100) >= 40 {
            continue;
        }
        if q == n + 1 {
            let params = dom.parameter_axes();
            let v = if params.is_empty() {
                PPFunction::scalar(rational(rng))
            } else {
                let kinds: Vec<AxisKind> = params.iter().map(|&a| dom.axes()[a].kind.clone()).collect();
                let mut f = PPFunction::constant_on(&kinds, rational(rng));
                if rng.gen_bool(0.5) {
                    let pa = rng.gen_range(0..params.len());
                    let mut factors: Vec<PPFunction> = kinds
                        .iter()
                        .map(|k| PPFunction::constant_on(core::slice::from_ref(k), Rational::one()))
                        .collect();
                    let full = axis_bspline(rng, &dom, params[pa], opts)?;
                    factors[pa] = full;
                    f = f.add(&PPFunction::tensor(&factors))?;
                }
                f
            };
            out.accumulate(s, Entry::Top(v))?;
            continue;
        }
        let mut f = form(rng, &dom, q, opts)?;
        if p >= 0 {
            for &v in &cx.nerve().level(p as usize)[s].vertices {
                f = f.mul_fn(&cx.cover().pou()[v])?;
            }
        }
        out.accumulate(s, Entry::Form(f))?;
    }
    Ok(out)
}
