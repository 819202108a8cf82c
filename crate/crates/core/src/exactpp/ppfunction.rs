use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::ops::Range;

use super::poly::{Poly, MAX_VARS};
use super::Interval;
use crate::error::{Error, Result};
use crate::rational::Rational;

/// Index of a cell: one slot per axis, unused slots are zero.
pub type Cell = [u16; MAX_VARS];

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum AxisKind {
    Line,
    Circle { period: Rational },
}

impl AxisKind {
    pub fn circle(period: Rational) -> Self {
        assert!(!period.is_negative() && !period.is_zero(), "circle period must be positive");
        AxisKind::Circle { period }
    }

    pub fn period(&self) -> Option<&Rational> {
        match self {
            AxisKind::Line => None,
            AxisKind::Circle { period } => Some(period),
        }
    }

    pub fn is_circle(&self) -> bool {
        matches!(self, AxisKind::Circle { .. })
    }
}

/// Breakpoint grid of one axis.
///
/// A line axis with `m` breakpoints has `m + 1` cells; cells `0` and `m`
/// are the unbounded tails, on which a function must not depend on the
/// axis variable. A circle axis always has `0` as its first breakpoint and
/// `m` cells `[b_i, b_{i+1})` with `b_m = period`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct AxisSpec {
    pub kind: AxisKind,
    pub breakpoints: Vec<Rational>,
}

fn sorted_unique(mut v: Vec<Rational>) -> Vec<Rational> {
    v.sort();
    v.dedup();
    v
}

/// `x mod p` in `[0, p)`.
pub fn reduce_mod(x: &Rational, p: &Rational) -> Rational {
    let k = floor_div(x, p);
    x - &(p * &k)
}

/// `floor(x / p)` as a rational integer.
pub fn floor_div(x: &Rational, p: &Rational) -> Rational {
    let r = x / p;
    let n = r.numer();
    let d = r.denom();
    let fl = num_integer::Integer::div_floor(&n, &d);
    Rational::from_bigints(fl, num_bigint::BigInt::from(1))
}

impl AxisSpec {
    pub fn line(breakpoints: Vec<Rational>) -> Self {
        AxisSpec { kind: AxisKind::Line, breakpoints: sorted_unique(breakpoints) }
    }

    pub fn circle(period: Rational, breakpoints: Vec<Rational>) -> Self {
        let mut b: Vec<Rational> = breakpoints.iter().map(|x| reduce_mod(x, &period)).collect();
        b.push(Rational::zero());
        AxisSpec { kind: AxisKind::circle(period), breakpoints: sorted_unique(b) }
    }

    /// The trivial grid for an axis of the given kind.
    pub fn trivial(kind: &AxisKind) -> Self {
        match kind {
            AxisKind::Line => AxisSpec::line(Vec::new()),
            AxisKind::Circle { period } => AxisSpec::circle(period.clone(), Vec::new()),
        }
    }

    pub fn validate(&self) -> Result<()> {
        for w in self.breakpoints.windows(2) {
            if w[0] >= w[1] {
                return Err(Error::InvalidData(format!("breakpoints not increasing: {} >= {}", w[0], w[1])));
            }
        }
        if let AxisKind::Circle { period } = &self.kind {
            if period.is_negative() || period.is_zero() {
                return Err(Error::InvalidData(format!("nonpositive period {}", period)));
            }
            if self.breakpoints.first() != Some(&Rational::zero()) {
                return Err(Error::InvalidData("circle grid must start at 0".into()));
            }
            if self.breakpoints.last().is_some_and(|b| b >= period) {
                return Err(Error::InvalidData("circle breakpoint outside [0, period)".into()));
            }
        }
        Ok(())
    }

    pub fn cell_count(&self) -> usize {
        match self.kind {
            AxisKind::Line => self.breakpoints.len() + 1,
            AxisKind::Circle { .. } => self.breakpoints.len(),
        }
    }

    /// Lower and upper bound of cell `i` (`None` for an infinite end).
    pub fn cell_bounds(&self, i: usize) -> (Option<Rational>, Option<Rational>) {
        let b = &self.breakpoints;
        match &self.kind {
            AxisKind::Line => {
                let lo = if i == 0 { None } else { Some(b[i - 1].clone()) };
                let hi = if i == b.len() { None } else { Some(b[i].clone()) };
                (lo, hi)
            }
            AxisKind::Circle { period } => {
                let hi = if i + 1 == b.len() { period.clone() } else { b[i + 1].clone() };
                (Some(b[i].clone()), Some(hi))
            }
        }
    }

    /// True if cell `i` is an unbounded tail.
    pub fn is_tail(&self, i: usize) -> bool {
        matches!(self.kind, AxisKind::Line) && (i == 0 || i == self.breakpoints.len())
    }

    /// Cell containing `x` (half-open cells `[lo, hi)`).
    pub fn locate(&self, x: &Rational) -> usize {
        match &self.kind {
            AxisKind::Line => self.breakpoints.partition_point(|b| b <= x),
            AxisKind::Circle { period } => {
                let r = reduce_mod(x, period);
                self.breakpoints.partition_point(|b| *b <= r) - 1
            }
        }
    }

    pub fn locate_f64(&self, x: f64) -> usize {
        match &self.kind {
            AxisKind::Line => self.breakpoints.partition_point(|b| b.to_f64() <= x),
            AxisKind::Circle { period } => {
                let p = period.to_f64();
                let r = x - p * libm_floor(x / p);
                self.breakpoints.partition_point(|b| b.to_f64() <= r).max(1) - 1
            }
        }
    }

    /// Common refinement of two grids of the same kind.
    pub fn union(&self, other: &AxisSpec) -> AxisSpec {
        let mut b = self.breakpoints.clone();
        b.extend(other.breakpoints.iter().cloned());
        AxisSpec { kind: self.kind.clone(), breakpoints: sorted_unique(b) }
    }

    pub fn with_breaks(&self, extra: &[Rational]) -> AxisSpec {
        match &self.kind {
            AxisKind::Line => {
                let mut b = self.breakpoints.clone();
                b.extend(extra.iter().cloned());
                AxisSpec::line(b)
            }
            AxisKind::Circle { period } => {
                let mut b = self.breakpoints.clone();
                b.extend(extra.iter().cloned());
                AxisSpec::circle(period.clone(), b)
            }
        }
    }

    /// For each cell of `self`, the range of cells of `finer` it splits into.
    fn refinement_map(&self, finer: &AxisSpec) -> Vec<Range<usize>> {
        let pos = |x: &Rational| -> usize {
            finer.breakpoints.binary_search(x).expect("finer grid must contain coarse breakpoints")
        };
        let m = self.breakpoints.len();
        let mf = finer.breakpoints.len();
        match self.kind {
            AxisKind::Line => (0..=m)
                .map(|i| {
                    let first = if i == 0 { 0 } else { pos(&self.breakpoints[i - 1]) + 1 };
                    let last = if i == m { mf } else { pos(&self.breakpoints[i]) };
                    first..last + 1
                })
                .collect(),
            AxisKind::Circle { .. } => (0..m)
                .map(|i| {
                    let first = pos(&self.breakpoints[i]);
                    let end = if i + 1 == m { mf } else { pos(&self.breakpoints[i + 1]) };
                    first..end
                })
                .collect(),
        }
    }
}

fn libm_floor(x: f64) -> f64 {
    let t = x as i64 as f64;
    if t > x {
        t - 1.0
    } else {
        t
    }
}

/// Multivariate piecewise polynomial with exact rational coefficients.
///
/// Polynomials are written in absolute coordinates, so refining a grid just
/// copies a cell's polynomial into its subcells. Only nonzero cells are
/// stored.
#[derive(Clone, Debug)]
pub struct PPFunction {
    axes: Vec<AxisSpec>,
    cells: BTreeMap<Cell, Poly>,
}

fn cell_remove(c: &Cell, a: usize) -> Cell {
    let mut out = [0u16; MAX_VARS];
    let mut k = 0;
    for (i, &v) in c.iter().enumerate() {
        if i != a {
            if k < MAX_VARS {
                out[k] = v;
            }
            k += 1;
        }
    }
    out
}

fn cell_insert(c: &Cell, a: usize, j: u16) -> Cell {
    let mut out = [0u16; MAX_VARS];
    let mut k = 0;
    for i in 0..MAX_VARS {
        if i == a {
            out[i] = j;
        } else {
            out[i] = c[k];
            k += 1;
        }
    }
    out
}

fn for_each_product(ranges: &[Range<usize>], mut f: impl FnMut(&[usize])) {
    if ranges.iter().any(|r| r.is_empty()) {
        return;
    }
    let mut idx: Vec<usize> = ranges.iter().map(|r| r.start).collect();
    loop {
        f(&idx);
        let mut k = ranges.len();
        loop {
            if k == 0 {
                return;
            }
            k -= 1;
            idx[k] += 1;
            if idx[k] < ranges[k].end {
                break;
            }
            idx[k] = ranges[k].start;
        }
    }
}

impl PPFunction {
    pub fn zero(axes: Vec<AxisSpec>) -> Self {
        PPFunction { axes, cells: BTreeMap::new() }
    }

    /// The zero function on trivial grids of the given kinds.
    pub fn zero_on(kinds: &[AxisKind]) -> Self {
        PPFunction::zero(kinds.iter().map(AxisSpec::trivial).collect())
    }

    pub fn constant_on(kinds: &[AxisKind], c: Rational) -> Self {
        let mut f = PPFunction::zero_on(kinds);
        if !c.is_zero() {
            let n = kinds.len();
            let mut cells = BTreeMap::new();
            // every axis has exactly one cell covering everything except
            // line axes, whose single cell is the whole line
            for_each_product(&f.axes.iter().map(|a| 0..a.cell_count()).collect::<Vec<_>>(), |idx| {
                let mut cell = [0u16; MAX_VARS];
                cell[..n].copy_from_slice(&idx.iter().map(|&i| i as u16).collect::<Vec<_>>());
                cells.insert(cell, Poly::constant(c.clone()));
            });
            f.cells = cells;
        }
        f
    }

    /// A constant on zero axes.
    pub fn scalar(c: Rational) -> Self {
        PPFunction::constant_on(&[], c)
    }

    /// Builds a function from explicit cells, validating the tail invariant.
    pub fn from_cells(axes: Vec<AxisSpec>, cells: BTreeMap<Cell, Poly>) -> Result<Self> {
        if axes.len() > MAX_VARS {
            return Err(Error::InvalidData(format!("at most {} axes supported", MAX_VARS)));
        }
        for a in &axes {
            a.validate()?;
        }
        for (c, p) in &cells {
            for (a, ax) in axes.iter().enumerate() {
                if (c[a] as usize) >= ax.cell_count() {
                    return Err(Error::InvalidData(format!("cell index {} out of range on axis {}", c[a], a)));
                }
                if ax.is_tail(c[a] as usize) && !p.is_const_in(a) {
                    return Err(Error::InvalidData(format!(
                        "tail cell on line axis {} must not depend on that variable",
                        a
                    )));
                }
            }
            for a in axes.len()..MAX_VARS {
                if c[a] != 0 || !p.is_const_in(a) {
                    return Err(Error::InvalidData("cell or monomial uses a nonexistent axis".into()));
                }
            }
        }
        let cells = cells.into_iter().filter(|(_, p)| !p.is_zero()).collect();
        Ok(PPFunction { axes, cells })
    }

    /// Univariate function from pieces on a line grid; `pieces[i]` lives on
    /// cell `i` (including both tails) and is a polynomial in variable 0.
    pub fn univariate(axis: AxisSpec, pieces: Vec<Poly>) -> Result<Self> {
        let mut cells = BTreeMap::new();
        for (i, p) in pieces.into_iter().enumerate() {
            let mut c = [0u16; MAX_VARS];
            c[0] = i as u16;
            if !p.is_zero() {
                cells.insert(c, p);
            }
        }
        PPFunction::from_cells(vec![axis], cells)
    }

    /// The coordinate `x_axis` clamped to `[lo, hi]` (constant outside).
    pub fn clamped_coordinate(kinds: &[AxisKind], axis: usize, lo: &Rational, hi: &Rational) -> Result<Self> {
        if axis >= kinds.len() {
            return Err(Error::AxisOutOfRange { axis, dim: kinds.len() });
        }
        if lo >= hi {
            return Err(Error::DegenerateInterval(format!("[{}, {}]", lo, hi)));
        }
        let uni = match &kinds[axis] {
            AxisKind::Line => PPFunction::univariate(
                AxisSpec::line(vec![lo.clone(), hi.clone()]),
                vec![Poly::constant(lo.clone()), Poly::var(0), Poly::constant(hi.clone())],
            )?,
            AxisKind::Circle { .. } => {
                return Err(Error::InvalidData("a coordinate on a circle axis is not a periodic function".into()))
            }
        };
        let mut parts = Vec::new();
        for (a, k) in kinds.iter().enumerate() {
            if a == axis {
                parts.push(uni.clone());
            } else {
                parts.push(PPFunction::constant_on(core::slice::from_ref(k), Rational::one()));
            }
        }
        Ok(PPFunction::tensor(&parts))
    }

    /// Tensor product of univariate functions, axis `i` taken from `factors[i]`.
    pub fn tensor(factors: &[PPFunction]) -> Self {
        let mut acc = PPFunction::scalar(Rational::one());
        for (i, f) in factors.iter().enumerate() {
            acc = acc.insert_axis(i, f).expect("tensor factor must be univariate");
        }
        acc
    }

    pub fn axes(&self) -> &[AxisSpec] {
        &self.axes
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    pub fn kinds(&self) -> Vec<AxisKind> {
        self.axes.iter().map(|a| a.kind.clone()).collect()
    }

    pub fn cells(&self) -> &BTreeMap<Cell, Poly> {
        &self.cells
    }

    pub fn is_zero(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn cell_count(&self) -> usize {
        self.cells.len()
    }

    /// Value as a constant if the function is a constant on zero axes or
    /// constant everywhere.
    pub fn as_constant(&self) -> Option<Rational> {
        if self.cells.is_empty() {
            return Some(Rational::zero());
        }
        let total: usize = self.axes.iter().map(|a| a.cell_count()).product();
        if self.cells.len() != total {
            return None;
        }
        let mut it = self.cells.values();
        let c = it.next()?.as_constant()?;
        for p in it {
            if p.as_constant()? != c {
                return None;
            }
        }
        Some(c)
    }

    fn check_axis(&self, axis: usize) -> Result<()> {
        if axis >= self.axes.len() {
            Err(Error::AxisOutOfRange { axis, dim: self.axes.len() })
        } else {
            Ok(())
        }
    }

    pub fn check_compatible(&self, other: &PPFunction) -> Result<()> {
        if self.axes.len() != other.axes.len() {
            return Err(Error::AxisMismatch(format!("dimension {} vs {}", self.axes.len(), other.axes.len())));
        }
        for (i, (a, b)) in self.axes.iter().zip(&other.axes).enumerate() {
            if a.kind != b.kind {
                return Err(Error::AxisMismatch(format!("axis {}: {:?} vs {:?}", i, a.kind, b.kind)));
            }
        }
        Ok(())
    }

    /// Re-expresses the function on finer grids (each a superset of the current one).
    pub fn refine(&self, target: &[AxisSpec]) -> PPFunction {
        if self.axes.as_slice() == target {
            return self.clone();
        }
        let maps: Vec<Vec<Range<usize>>> = self.axes.iter().zip(target).map(|(a, t)| a.refinement_map(t)).collect();
        let mut cells = BTreeMap::new();
        let n = self.axes.len();
        for (c, p) in &self.cells {
            let ranges: Vec<Range<usize>> = (0..n).map(|a| maps[a][c[a] as usize].clone()).collect();
            for_each_product(&ranges, |idx| {
                let mut cell = [0u16; MAX_VARS];
                for a in 0..n {
                    cell[a] = idx[a] as u16;
                }
                cells.insert(cell, p.clone());
            });
        }
        PPFunction { axes: target.to_vec(), cells }
    }

    /// Refines so that the given extra breakpoints exist on each axis.
    pub fn refine_with(&self, extra: &[Vec<Rational>]) -> PPFunction {
        let target: Vec<AxisSpec> = self.axes.iter().zip(extra).map(|(a, e)| a.with_breaks(e)).collect();
        self.refine(&target)
    }

    fn common_axes(&self, other: &PPFunction) -> Vec<AxisSpec> {
        self.axes.iter().zip(&other.axes).map(|(a, b)| if a == b { a.clone() } else { a.union(b) }).collect()
    }

    fn combine(&self, other: &PPFunction, sub: bool) -> Result<PPFunction> {
        self.check_compatible(other)?;
        if other.is_zero() {
            return Ok(self.clone());
        }
        if self.is_zero() && !sub {
            return Ok(other.clone());
        }
        let axes = self.common_axes(other);
        let a = self.refine(&axes);
        let b = other.refine(&axes);
        let mut cells = a.cells;
        for (c, p) in b.cells {
            match cells.get_mut(&c) {
                Some(q) => {
                    let r = if sub { q.sub(&p) } else { q.add(&p) };
                    if r.is_zero() {
                        cells.remove(&c);
                    } else {
                        *q = r;
                    }
                }
                None => {
                    cells.insert(c, if sub { p.neg() } else { p });
                }
            }
        }
        Ok(PPFunction { axes, cells })
    }

    pub fn add(&self, other: &PPFunction) -> Result<PPFunction> {
        self.combine(other, false)
    }

    pub fn sub(&self, other: &PPFunction) -> Result<PPFunction> {
        self.combine(other, true)
    }

    pub fn mul(&self, other: &PPFunction) -> Result<PPFunction> {
        self.check_compatible(other)?;
        if self.is_zero() || other.is_zero() {
            return Ok(PPFunction::zero(self.common_axes(other)));
        }
        let axes = self.common_axes(other);
        let a = self.refine(&axes);
        let b = other.refine(&axes);
        let mut cells = BTreeMap::new();
        for (c, p) in &a.cells {
            if let Some(q) = b.cells.get(c) {
                let r = p.mul(q);
                if !r.is_zero() {
                    cells.insert(*c, r);
                }
            }
        }
        Ok(PPFunction { axes, cells })
    }

    pub fn scale(&self, c: &Rational) -> PPFunction {
        if c.is_zero() {
            return PPFunction::zero(self.axes.clone());
        }
        PPFunction { axes: self.axes.clone(), cells: self.cells.iter().map(|(k, p)| (*k, p.scale(c))).collect() }
    }

    pub fn neg(&self) -> PPFunction {
        PPFunction { axes: self.axes.clone(), cells: self.cells.iter().map(|(k, p)| (*k, p.neg())).collect() }
    }

    /// Multiplies every cell polynomial by `p` (a global polynomial).
    pub fn mul_poly(&self, p: &Poly) -> PPFunction {
        let cells = self.cells.iter().map(|(k, q)| (*k, q.mul(p))).filter(|(_, q)| !q.is_zero()).collect();
        PPFunction { axes: self.axes.clone(), cells }
    }

    /// Exact equality up to grid refinement.
    pub fn equals(&self, other: &PPFunction) -> bool {
        if self.check_compatible(other).is_err() {
            return false;
        }
        if self.axes == other.axes {
            return self.cells == other.cells;
        }
        let axes = self.common_axes(other);
        self.refine(&axes).cells == other.refine(&axes).cells
    }

    /// Cell-wise partial derivative along `axis`.
    pub fn partial_derivative(&self, axis: usize) -> Result<PPFunction> {
        self.check_axis(axis)?;
        let cells = self.cells.iter().map(|(k, p)| (*k, p.derivative(axis))).filter(|(_, p)| !p.is_zero()).collect();
        Ok(PPFunction { axes: self.axes.clone(), cells })
    }

    pub fn has_zero_tails(&self, axis: usize) -> bool {
        let ax = &self.axes[axis];
        if ax.kind.is_circle() {
            return true;
        }
        self.cells.keys().all(|c| !ax.is_tail(c[axis] as usize))
    }

    /// True if every line axis has zero tails.
    pub fn is_compactly_supported(&self) -> bool {
        (0..self.axes.len()).all(|a| self.has_zero_tails(a))
    }

    /// Definite integral over the whole axis; the axis is removed.
    pub fn integrate_axis_full(&self, axis: usize) -> Result<PPFunction> {
        self.check_axis(axis)?;
        if !self.has_zero_tails(axis) {
            return Err(Error::FiberNotIntegrable(axis));
        }
        let ax = &self.axes[axis];
        let mut acc: BTreeMap<Cell, Poly> = BTreeMap::new();
        for (c, p) in &self.cells {
            let (lo, hi) = ax.cell_bounds(c[axis] as usize);
            let (lo, hi) = (lo.unwrap(), hi.unwrap());
            let anti = p.antiderivative(axis);
            let v = anti.substitute(axis, &hi).sub(&anti.substitute(axis, &lo)).remove_var(axis);
            let key = cell_remove(c, axis);
            let slot = acc.entry(key).or_default();
            *slot = slot.add(&v);
        }
        let mut axes = self.axes.clone();
        axes.remove(axis);
        let cells = acc.into_iter().filter(|(_, p)| !p.is_zero()).collect();
        Ok(PPFunction { axes, cells })
    }

    /// Groups cells by their indices off `axis`.
    fn fibers(&self, axis: usize) -> BTreeMap<Cell, BTreeMap<usize, &Poly>> {
        let mut out: BTreeMap<Cell, BTreeMap<usize, &Poly>> = BTreeMap::new();
        for (c, p) in &self.cells {
            let mut key = *c;
            key[axis] = 0;
            out.entry(key).or_default().insert(c[axis] as usize, p);
        }
        out
    }

    /// `x -> integral from -infinity to x` along a line axis.
    pub fn cumulative_integral(&self, axis: usize) -> Result<PPFunction> {
        self.check_axis(axis)?;
        let ax = &self.axes[axis];
        if ax.kind.is_circle() {
            return Err(Error::CircleCumulative(axis));
        }
        if !self.has_zero_tails(axis) {
            return Err(Error::NonzeroTail(axis));
        }
        let m = ax.breakpoints.len();
        let mut cells = BTreeMap::new();
        for (key, row) in self.fibers(axis) {
            let start = match row.keys().next() {
                Some(&s) => s,
                None => continue,
            };
            let mut running = Poly::zero();
            for i in start..=m {
                let mut cell = key;
                cell[axis] = i as u16;
                if i == m {
                    if !running.is_zero() {
                        cells.insert(cell, running.clone());
                    }
                    break;
                }
                let (lo, hi) = ax.cell_bounds(i);
                let (lo, hi) = (lo.unwrap(), hi.unwrap());
                match row.get(&i) {
                    Some(p) => {
                        let anti = p.antiderivative(axis);
                        let at_lo = anti.substitute(axis, &lo);
                        let val = running.add(&anti.sub(&at_lo));
                        let at_hi = anti.substitute(axis, &hi);
                        running = running.add(&at_hi.sub(&at_lo));
                        if !val.is_zero() {
                            cells.insert(cell, val);
                        }
                    }
                    None => {
                        if !running.is_zero() {
                            cells.insert(cell, running.clone());
                        }
                    }
                }
            }
        }
        Ok(PPFunction { axes: self.axes.clone(), cells })
    }

    /// `x -> integral from start to x` along a circle axis, going once around
    /// from `start`. Single-valued exactly when the fiber integral vanishes.
    pub fn cumulative_integral_from(&self, axis: usize, start: &Rational) -> Result<PPFunction> {
        self.check_axis(axis)?;
        let period = match &self.axes[axis].kind {
            AxisKind::Circle { period } => period.clone(),
            AxisKind::Line => return self.cumulative_integral(axis),
        };
        let start = reduce_mod(start, &period);
        let mut extra: Vec<Vec<Rational>> = vec![Vec::new(); self.dim()];
        extra[axis].push(start.clone());
        let f = self.refine_with(&extra);
        let ax = &f.axes[axis];
        let m = ax.breakpoints.len();
        let i0 = ax.locate(&start);
        let mut cells = BTreeMap::new();
        for (key, row) in f.fibers(axis) {
            let mut running = Poly::zero();
            for step in 0..m {
                let i = (i0 + step) % m;
                let mut cell = key;
                cell[axis] = i as u16;
                let (lo, hi) = ax.cell_bounds(i);
                let (lo, hi) = (lo.unwrap(), hi.unwrap());
                match row.get(&i) {
                    Some(p) => {
                        let anti = p.antiderivative(axis);
                        let at_lo = anti.substitute(axis, &lo);
                        let val = running.add(&anti.sub(&at_lo));
                        running = running.add(&anti.substitute(axis, &hi).sub(&at_lo));
                        if !val.is_zero() {
                            cells.insert(cell, val);
                        }
                    }
                    None => {
                        if !running.is_zero() {
                            cells.insert(cell, running.clone());
                        }
                    }
                }
            }
        }
        Ok(PPFunction { axes: f.axes.clone(), cells })
    }

    /// Restriction to the hyperplane `x_axis = value`; the axis is removed.
    pub fn restrict(&self, axis: usize, value: &Rational) -> Result<PPFunction> {
        self.check_axis(axis)?;
        let ax = &self.axes[axis];
        let i = ax.locate(value) as u16;
        let v = match &ax.kind {
            AxisKind::Circle { period } => reduce_mod(value, period),
            AxisKind::Line => value.clone(),
        };
        let mut acc: BTreeMap<Cell, Poly> = BTreeMap::new();
        for (c, p) in &self.cells {
            if c[axis] == i {
                let r = p.substitute(axis, &v).remove_var(axis);
                if !r.is_zero() {
                    acc.insert(cell_remove(c, axis), r);
                }
            }
        }
        let mut axes = self.axes.clone();
        axes.remove(axis);
        Ok(PPFunction { axes, cells: acc })
    }

    /// The function on the lower (`upper = false`) or upper tail of a line axis.
    pub fn tail(&self, axis: usize, upper: bool) -> Result<PPFunction> {
        self.check_axis(axis)?;
        let ax = &self.axes[axis];
        if ax.kind.is_circle() {
            return Err(Error::InvalidData("circle axes have no tails".into()));
        }
        let i = if upper { ax.breakpoints.len() as u16 } else { 0 };
        let mut acc = BTreeMap::new();
        for (c, p) in &self.cells {
            if c[axis] == i {
                acc.insert(cell_remove(c, axis), p.remove_var(axis));
            }
        }
        let mut axes = self.axes.clone();
        axes.remove(axis);
        Ok(PPFunction { axes, cells: acc })
    }

    /// Inserts a new axis at `pos` and multiplies by the univariate `factor` along it.
    pub fn insert_axis(&self, pos: usize, factor: &PPFunction) -> Result<PPFunction> {
        if factor.dim() != 1 {
            return Err(Error::InvalidData("insert_axis needs a univariate factor".into()));
        }
        if pos > self.dim() {
            return Err(Error::AxisOutOfRange { axis: pos, dim: self.dim() });
        }
        if self.dim() + 1 > MAX_VARS {
            return Err(Error::InvalidData(format!("at most {} axes supported", MAX_VARS)));
        }
        let mut axes = self.axes.clone();
        axes.insert(pos, factor.axes[0].clone());
        let mut cells = BTreeMap::new();
        for (c, p) in &self.cells {
            let lifted = p.insert_var(pos);
            for (fc, g) in &factor.cells {
                let g = g.rename_var(0, pos);
                // disjoint variables, so the product has no cancellation
                let r = lifted.mul(&g);
                cells.insert(cell_insert(c, pos, fc[0]), r);
            }
        }
        Ok(PPFunction { axes, cells })
    }

    /// Inserts an axis along which the function is constant.
    pub fn extend_constant(&self, pos: usize, kind: &AxisKind) -> Result<PPFunction> {
        self.insert_axis(pos, &PPFunction::constant_on(core::slice::from_ref(kind), Rational::one()))
    }

    /// Drops an axis the function does not depend on (every slice equal).
    pub fn drop_constant_axis(&self, axis: usize) -> Result<PPFunction> {
        self.check_axis(axis)?;
        let ax = &self.axes[axis];
        let at = match ax.kind {
            AxisKind::Circle { .. } => Rational::zero(),
            AxisKind::Line => ax.breakpoints.first().map_or_else(Rational::zero, |b| b - &Rational::one()),
        };
        let slice = self.restrict(axis, &at)?;
        let back = slice.extend_constant(axis, &ax.kind)?;
        if !back.equals(self) {
            return Err(Error::InvalidData(format!("function depends on axis {}", axis)));
        }
        Ok(slice)
    }

    /// Periodization of a line axis: `x -> sum_k f(x + k * period)`.
    pub fn periodize(&self, axis: usize, period: &Rational) -> Result<PPFunction> {
        self.check_axis(axis)?;
        if self.axes[axis].kind.is_circle() {
            return Err(Error::InvalidData("axis is already periodic".into()));
        }
        if !self.has_zero_tails(axis) {
            return Err(Error::NonzeroTail(axis));
        }
        let ax = &self.axes[axis];
        let target = AxisSpec::circle(period.clone(), ax.breakpoints.clone());
        let mut axes = self.axes.clone();
        axes[axis] = target.clone();
        let mut acc: BTreeMap<Cell, Poly> = BTreeMap::new();
        for (c, p) in &self.cells {
            let (lo, hi) = ax.cell_bounds(c[axis] as usize);
            let (lo, hi) = (lo.unwrap(), hi.unwrap());
            let mut k = floor_div(&lo, period);
            loop {
                let base = period * &k;
                if base >= hi {
                    break;
                }
                let next = &base + period;
                let plo = if lo > base { lo.clone() } else { base.clone() };
                let phi = if hi < next { hi.clone() } else { next.clone() };
                if plo < phi {
                    let shifted = p.shift(axis, &base);
                    let ulo = &plo - &base;
                    let uhi = &phi - &base;
                    let first = target.locate(&ulo);
                    for j in first..target.cell_count() {
                        let (clo, _) = target.cell_bounds(j);
                        if clo.unwrap() >= uhi {
                            break;
                        }
                        let mut cell = *c;
                        cell[axis] = j as u16;
                        let slot = acc.entry(cell).or_default();
                        *slot = slot.add(&shifted);
                    }
                }
                k = &k + &Rational::one();
            }
        }
        let cells = acc.into_iter().filter(|(_, p)| !p.is_zero()).collect();
        Ok(PPFunction { axes, cells })
    }

    /// Exact value at a point (cells are half-open `[lo, hi)`).
    pub fn eval(&self, x: &[Rational]) -> Rational {
        assert_eq!(x.len(), self.dim());
        let mut cell = [0u16; MAX_VARS];
        let mut pt = Vec::with_capacity(x.len());
        for (a, ax) in self.axes.iter().enumerate() {
            cell[a] = ax.locate(&x[a]) as u16;
            pt.push(match &ax.kind {
                AxisKind::Circle { period } => reduce_mod(&x[a], period),
                AxisKind::Line => x[a].clone(),
            });
        }
        self.cells.get(&cell).map_or_else(Rational::zero, |p| p.eval(&pt))
    }

    /// Floating-point sample, for reports only.
    pub fn eval_f64(&self, x: &[f64]) -> f64 {
        assert_eq!(x.len(), self.dim());
        let mut cell = [0u16; MAX_VARS];
        let mut pt = Vec::with_capacity(x.len());
        for (a, ax) in self.axes.iter().enumerate() {
            cell[a] = ax.locate_f64(x[a]) as u16;
            pt.push(match &ax.kind {
                AxisKind::Circle { period } => {
                    let p = period.to_f64();
                    x[a] - p * libm_floor(x[a] / p)
                }
                AxisKind::Line => x[a],
            });
        }
        self.cells.get(&cell).map_or(0.0, |p| p.eval_f64(&pt))
    }

    fn cell_within(ax: &AxisSpec, i: usize, iv: &Interval) -> bool {
        let (lo, hi) = ax.cell_bounds(i);
        let (lo, hi) = match (lo, hi) {
            (Some(l), Some(h)) => (l, h),
            _ => return false,
        };
        match &ax.kind {
            AxisKind::Line => iv.lo <= lo && hi <= iv.hi,
            AxisKind::Circle { period } => {
                (iv.lo <= lo && hi <= iv.hi) || (iv.lo <= &lo + period && &hi + period <= iv.hi)
            }
        }
    }

    fn region_breaks(&self, region: &[Option<Interval>]) -> Vec<Vec<Rational>> {
        region
            .iter()
            .map(|r| match r {
                Some(iv) => vec![iv.lo.clone(), iv.hi.clone()],
                None => Vec::new(),
            })
            .collect()
    }

    /// True if the function is zero outside the box `region` (`None` = whole axis).
    pub fn vanishes_outside(&self, region: &[Option<Interval>]) -> bool {
        assert_eq!(region.len(), self.dim());
        let f = self.refine_with(&self.region_breaks(region));
        f.cells.keys().all(|c| {
            region.iter().enumerate().all(|(a, r)| match r {
                Some(iv) => Self::cell_within(&f.axes[a], c[a] as usize, iv),
                None => true,
            })
        })
    }

    /// True if the function is zero on the box `region`.
    pub fn vanishes_on(&self, region: &[Option<Interval>]) -> bool {
        assert_eq!(region.len(), self.dim());
        let f = self.refine_with(&self.region_breaks(region));
        !f.cells.keys().any(|c| {
            region.iter().enumerate().all(|(a, r)| match r {
                Some(iv) => Self::cell_within(&f.axes[a], c[a] as usize, iv),
                None => true,
            })
        })
    }

    /// Removes breakpoints across which the function is polynomial.
    pub fn coarsen(&self) -> PPFunction {
        let mut f = self.clone();
        for a in 0..f.dim() {
            let mut j = f.axes[a].breakpoints.len();
            while j > 0 {
                j -= 1;
                let ax = &f.axes[a];
                // (left cell, right cell) separated by breakpoint j
                let (left, right) = match ax.kind {
                    AxisKind::Line => (j, j + 1),
                    AxisKind::Circle { .. } => {
                        if j == 0 {
                            continue;
                        }
                        (j - 1, j)
                    }
                };
                let mergeable = f.cells.iter().all(|(c, p)| {
                    let i = c[a] as usize;
                    if i != left && i != right {
                        return true;
                    }
                    let mut other = *c;
                    other[a] = if i == left { right as u16 } else { left as u16 };
                    f.cells.get(&other) == Some(p)
                });
                if !mergeable {
                    continue;
                }
                let mut cells = BTreeMap::new();
                for (c, p) in &f.cells {
                    let i = c[a] as usize;
                    if i == right {
                        continue;
                    }
                    let mut nc = *c;
                    if i > right {
                        nc[a] -= 1;
                    }
                    cells.insert(nc, p.clone());
                }
                f.axes[a].breakpoints.remove(j);
                f.cells = cells;
            }
        }
        f
    }

    /// Largest per-axis polynomial degree over all cells.
    pub fn max_degree(&self) -> u32 {
        self.cells.values().map(|p| (0..self.dim()).map(|a| p.degree_in(a)).max().unwrap_or(0)).max().unwrap_or(0)
    }
}

impl PartialEq for PPFunction {
    fn eq(&self, other: &Self) -> bool {
        self.equals(other)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactpp::bspline::{bspline_normalized_on, bspline_on};
    use crate::rational::q;

    fn line(b: &[(i64, i64)]) -> AxisSpec {
        AxisSpec::line(b.iter().map(|&(n, d)| q(n, d)).collect())
    }

    fn identity_on_unit() -> PPFunction {
        // x on [0,1], zero elsewhere
        PPFunction::univariate(line(&[(0, 1), (1, 1)]), vec![Poly::zero(), Poly::var(0), Poly::zero()]).unwrap()
    }

    #[test]
    fn square_of_identity_on_cell() {
        let f = identity_on_unit();
        let sq = f.mul(&f).unwrap();
        let expect = PPFunction::univariate(
            line(&[(0, 1), (1, 1)]),
            vec![Poly::zero(), Poly::var(0).mul(&Poly::var(0)), Poly::zero()],
        )
        .unwrap();
        assert_eq!(sq, expect);
    }

    #[test]
    fn ring_identities_with_zero() {
        let f = identity_on_unit();
        let z = PPFunction::zero_on(&[AxisKind::Line]);
        assert_eq!(f.add(&z).unwrap(), f);
        assert!(f.mul(&z).unwrap().is_zero());
    }

    #[test]
    fn overlapping_hats_product() {
        let b1 = bspline_on(1, &q(0, 1), &q(2, 1)).unwrap();
        let b2 = bspline_on(1, &q(1, 1), &q(3, 1)).unwrap();
        let p = b1.mul(&b2).unwrap();
        assert_eq!(p.eval(&[q(3, 2)]), q(1, 4));
        assert!(p.vanishes_outside(&[Some(Interval::new(q(1, 1), q(2, 1)))]));
        assert!(p.max_degree() == 2);
    }

    #[test]
    fn tail_invariant_is_enforced() {
        let bad = PPFunction::univariate(line(&[(0, 1)]), vec![Poly::var(0), Poly::zero()]);
        assert!(bad.is_err());
    }

    #[test]
    fn axis_mismatch_rejected() {
        let a = PPFunction::zero_on(&[AxisKind::Line]);
        let b = PPFunction::zero_on(&[AxisKind::circle(q(1, 1))]);
        assert!(matches!(a.add(&b), Err(Error::AxisMismatch(_))));
        let c = PPFunction::zero_on(&[AxisKind::Line, AxisKind::Line]);
        assert!(matches!(a.mul(&c), Err(Error::AxisMismatch(_))));
        let d = PPFunction::zero_on(&[AxisKind::circle(q(2, 1))]);
        assert!(matches!(b.sub(&d), Err(Error::AxisMismatch(_))));
    }

    #[test]
    fn derivative_examples() {
        let f = identity_on_unit();
        let sq = f.mul(&f).unwrap();
        let d = sq.partial_derivative(0).unwrap();
        assert_eq!(d.eval(&[q(1, 2)]), q(1, 1));
        let c = PPFunction::constant_on(&[AxisKind::Line], q(5, 1));
        assert!(c.partial_derivative(0).unwrap().is_zero());
        assert!(matches!(c.partial_derivative(3), Err(Error::AxisOutOfRange { .. })));
    }

    #[test]
    fn cubic_bspline_derivative_vanishes_at_center() {
        let b3 = bspline_on(3, &q(0, 1), &q(4, 1)).unwrap();
        assert_eq!(b3.partial_derivative(0).unwrap().eval(&[q(2, 1)]), Rational::zero());
    }

    #[test]
    fn integrals() {
        let hat = bspline_on(1, &q(0, 1), &q(2, 1)).unwrap();
        assert_eq!(hat.integrate_axis_full(0).unwrap().as_constant(), Some(q(1, 1)));
        // x * hat integrates to the center of mass, 1
        let x = PPFunction::univariate(line(&[]), vec![Poly::zero()]).unwrap();
        let _ = x;
        let xhat = hat.mul_poly(&Poly::var(0));
        assert_eq!(xhat.integrate_axis_full(0).unwrap().as_constant(), Some(q(1, 1)));
        // tensor factorization
        let hh = PPFunction::tensor(&[hat.clone(), hat.clone()]);
        assert_eq!(hh.integrate_axis_full(1).unwrap(), hat);
        let one = PPFunction::constant_on(&[AxisKind::Line], q(1, 1));
        assert!(matches!(one.integrate_axis_full(0), Err(Error::FiberNotIntegrable(0))));
    }

    #[test]
    fn cumulative_of_hat() {
        let hat = bspline_on(1, &q(0, 1), &q(2, 1)).unwrap();
        let c = hat.cumulative_integral(0).unwrap();
        assert_eq!(c.eval(&[q(1, 1)]), q(1, 2));
        assert_eq!(c.tail(0, true).unwrap().as_constant(), Some(q(1, 1)));
        assert!(c.tail(0, false).unwrap().is_zero());
        let zero = hat.sub(&hat).unwrap();
        assert!(zero.cumulative_integral(0).unwrap().is_zero());
        let circ = PPFunction::zero_on(&[AxisKind::circle(q(1, 1))]);
        assert!(matches!(circ.cumulative_integral(0), Err(Error::CircleCumulative(0))));
        let one = PPFunction::constant_on(&[AxisKind::Line], q(1, 1));
        assert!(matches!(one.cumulative_integral(0), Err(Error::NonzeroTail(0))));
    }

    #[test]
    fn circle_cumulative_from_start() {
        // hat wrapped around 0 on a circle of period 4, minus the same hat
        // translated by 2: total integral zero, so single-valued
        let hat = bspline_on(1, &q(-1, 1), &q(1, 1)).unwrap();
        let hat2 = bspline_on(1, &q(1, 1), &q(3, 1)).unwrap();
        let p = q(4, 1);
        let g = hat.periodize(0, &p).unwrap().sub(&hat2.periodize(0, &p).unwrap()).unwrap();
        let c = g.cumulative_integral_from(0, &q(3, 1)).unwrap();
        assert_eq!(c.eval(&[q(0, 1)]), q(1, 2));
        assert_eq!(c.eval(&[q(1, 1)]), q(1, 1));
        assert_eq!(c.eval(&[q(3, 1)]), Rational::zero());
        assert_eq!(c.eval(&[q(5, 2)]), q(1, 8));
        assert_eq!(c.eval(&[q(2, 1)]), q(1, 2));
    }

    #[test]
    fn periodized_hats_sum_to_one() {
        let p = q(1, 1);
        let mut sum = PPFunction::zero_on(&[AxisKind::circle(p.clone())]);
        for k in 0..4 {
            let h = bspline_on(1, &q(k, 4), &q(k + 2, 4)).unwrap().periodize(0, &p).unwrap();
            sum = sum.add(&h).unwrap();
        }
        assert_eq!(sum.as_constant(), Some(q(1, 1)));
        assert_eq!(sum.coarsen().as_constant(), Some(q(1, 1)));
    }

    #[test]
    fn normalized_quadratic_integrates_to_one() {
        let b = bspline_normalized_on(2, &q(0, 1), &q(3, 5)).unwrap();
        assert_eq!(b.integrate_axis_full(0).unwrap().as_constant(), Some(q(1, 1)));
    }

    #[test]
    fn refinement_invariance_and_coarsen() {
        let hat = bspline_on(1, &q(0, 1), &q(2, 1)).unwrap();
        let fine = hat.refine_with(&[vec![q(1, 3), q(5, 4)]]);
        assert_eq!(fine.axes()[0].breakpoints.len(), 5);
        assert_eq!(fine, hat);
        assert_eq!(fine.coarsen().axes(), hat.axes());
    }

    #[test]
    fn restrict_and_extend() {
        let hat = bspline_on(1, &q(0, 1), &q(2, 1)).unwrap();
        let hh = PPFunction::tensor(&[hat.clone(), hat.clone()]);
        let r = hh.restrict(0, &q(1, 2)).unwrap();
        assert_eq!(r, hat.scale(&q(1, 2)));
        let e = hat.extend_constant(0, &AxisKind::circle(q(1, 1))).unwrap();
        assert_eq!(e.eval(&[q(3, 7), q(1, 1)]), q(1, 1));
        assert_eq!(e.drop_constant_axis(0).unwrap(), hat);
    }
}
