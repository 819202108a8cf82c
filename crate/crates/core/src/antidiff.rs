//! The anti-differential: γ from the row contraction, a splitting `T` of the
//! Čech complex, the transposed zig-zag with the column contraction, and the
//! primitive `S(δ)`.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::cechdr::{sign, CechComplex, Cochain, ComplexOptions, Entry, TotalCochain};
use crate::cover::{Cover, Nerve};
use crate::error::{Error, Result};
use crate::exactpp::{Interval, PPFunction};
use crate::forms::Form;
use crate::linalg::{verify_generalized_inverse, GeneralizedInverse, SparseMatrix};
use crate::rational::Rational;

/// Generalized inverses of the Čech boundary matrices, one per level.
///
/// `mats[p]` is the matrix of `d^h` from level `p` to level `p - 1` (rows
/// indexed by `(p-1)`-simplices), together with `T` satisfying `B T B = B`.
#[derive(Clone, Debug)]
pub struct CechSplitting {
    mats: Vec<Option<(SparseMatrix, GeneralizedInverse)>>,
}

/// Boundary matrix of `d^h` on top-row cochains, level `p >= 1` to `p - 1`.
pub fn boundary_matrix(nerve: &Nerve, p: usize) -> SparseMatrix {
    let mut b = SparseMatrix::zeros(nerve.count(p - 1), nerve.count(p));
    for s in 0..nerve.count(p) {
        for (i, &f) in nerve.faces(p, s).iter().enumerate() {
            b.set(f, s, sign(i));
        }
    }
    b
}

impl CechSplitting {
    /// Row-reduces every boundary matrix and checks `B T B = B`.
    pub fn build(nerve: &Nerve) -> Result<CechSplitting> {
        let mut mats = alloc::vec![None];
        for p in 1..=nerve.top_level() + 1 {
            let b = boundary_matrix(nerve, p);
            let t = GeneralizedInverse::new(&b);
            if !verify_generalized_inverse(&b, &t) {
                return Err(Error::Identity(format!("d^h T d^h != d^h at level {}", p)));
            }
            mats.push(Some((b, t)));
        }
        Ok(CechSplitting { mats })
    }

    pub fn matrix(&self, p: usize) -> Option<&SparseMatrix> {
        self.mats.get(p).and_then(|m| m.as_ref()).map(|(b, _)| b)
    }

    pub fn inverse(&self, p: usize) -> Option<&GeneralizedInverse> {
        self.mats.get(p).and_then(|m| m.as_ref()).map(|(_, t)| t)
    }

    /// `T y` for a top-row cochain `y` at level `p - 1`, landing at level `p`.
    pub fn apply(&self, y: &Cochain, zero: &PPFunction) -> Result<Cochain> {
        if y.p < 0 {
            return Err(Error::Invalid("T acts on Čech levels p >= 0".into()));
        }
        let p = y.p as usize + 1;
        let mut out = Cochain::zero(p as isize, y.q);
        let t = match self.inverse(p) {
            Some(t) => t,
            None => return Ok(out),
        };
        let mut ys: Vec<PPFunction> = (0..t.cols).map(|_| zero.clone()).collect();
        for (sid, e) in &y.entries {
            ys[*sid] = e.as_top().ok_or_else(|| Error::Invalid("T acts on the top row".into()))?.clone();
        }
        let err = core::cell::RefCell::new(None);
        let xs = t.apply(
            &ys,
            || zero.clone(),
            |acc, a, v| match acc.add(&v.scale(a)) {
                Ok(r) => r,
                Err(e) => {
                    err.borrow_mut().get_or_insert(e);
                    acc.clone()
                }
            },
        );
        if let Some(e) = err.into_inner() {
            return Err(e);
        }
        for (sid, v) in xs.into_iter().enumerate() {
            out.accumulate(sid, Entry::Top(v))?;
        }
        Ok(out)
    }
}

/// Which way the zig-zag runs.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    /// Contract rows with `K`; `x` sits in the augmentation column.
    Horizontal,
    /// Contract columns with `L`; `x` sits in the top row.
    Vertical,
}

fn op_h(cx: &CechComplex, dir: Direction, c: &Cochain) -> Result<Cochain> {
    match dir {
        Direction::Horizontal => cx.d_h(c),
        Direction::Vertical => cx.d_v(c),
    }
}

fn op_v(cx: &CechComplex, dir: Direction, c: &Cochain) -> Result<Cochain> {
    match dir {
        Direction::Horizontal => {
            // d of an n-form is zero; the corner itself is not in the complex
            if c.p < 0 && c.q == cx.n() {
                return Ok(Cochain::zero(c.p, c.q + 1));
            }
            cx.d_v(c)
        }
        Direction::Vertical => cx.d_h(c),
    }
}

fn op_c(cx: &CechComplex, dir: Direction, c: &Cochain) -> Result<Cochain> {
    match dir {
        Direction::Horizontal => cx.k(c),
        Direction::Vertical => cx.l(c),
    }
}

fn same(a: &Cochain, b: &Cochain) -> bool {
    a.equals(b)
}

/// The algebraic zig-zag lemma.
///
/// Given `x` in the augmenting column (row, for [`Direction::Vertical`]) and
/// `α_0, α_1, …` with `h α_{i+1} + v α_i = 0` and `h α_0 = -v x`, returns
/// `β_0, …, β_{len-1}` with `h β_0 = x` and `h β_{i+1} + v β_i = α_i`,
/// where `β_i = K α_{i-1} - K v β_{i-1}` and `β_0 = K x`. Here `h, v, K` are
/// `d^h, d^v, K` or `d^v, d^h, L`. Hypotheses and conclusions are checked.
pub fn zigzag_lift(
    cx: &CechComplex,
    dir: Direction,
    x: &Cochain,
    alphas: &[Cochain],
    len: usize,
) -> Result<Vec<Cochain>> {
    // hypotheses
    if let Some(a0) = alphas.first() {
        let lhs = op_h(cx, dir, a0)?;
        let rhs = op_v(cx, dir, x)?.neg();
        if !same(&lhs, &rhs) {
            return Err(Error::Hypothesis("h α_0 != -v x".into()));
        }
    } else if !op_v(cx, dir, x)?.is_zero() {
        return Err(Error::Hypothesis("v x != 0 with no α".into()));
    }
    for i in 0..alphas.len().saturating_sub(1) {
        let s = op_h(cx, dir, &alphas[i + 1])?.add(&op_v(cx, dir, &alphas[i])?)?;
        if !s.is_zero() {
            return Err(Error::Hypothesis(format!("h α_{} + v α_{} != 0", i + 1, i)));
        }
    }

    let mut betas: Vec<Cochain> = Vec::with_capacity(len);
    if len == 0 {
        return Ok(betas);
    }
    betas.push(op_c(cx, dir, x)?);
    for i in 1..len {
        let vb = op_v(cx, dir, &betas[i - 1])?;
        let arg = match alphas.get(i - 1) {
            Some(a) => a.sub(&vb)?,
            None => vb.neg(),
        };
        betas.push(op_c(cx, dir, &arg)?);
    }

    // conclusions
    if !same(&op_h(cx, dir, &betas[0])?, x) {
        return Err(Error::Identity("zig-zag: h β_0 != x".into()));
    }
    for i in 0..len - 1 {
        let s = op_h(cx, dir, &betas[i + 1])?.add(&op_v(cx, dir, &betas[i])?)?;
        let ok = match alphas.get(i) {
            Some(a) => same(&s, a),
            None => s.is_zero(),
        };
        if !ok {
            return Err(Error::Identity(format!("zig-zag: h β_{} + v β_{} != α_{}", i + 1, i, i)));
        }
    }
    Ok(betas)
}

/// Evidence that a closed form is not exact.
#[derive(Clone, Debug)]
pub struct NotExact {
    /// The Čech cocycle `I(γ)`.
    pub cech_class: Cochain,
    /// `d^h T I(γ) - I(γ)`, nonzero.
    pub residual: Cochain,
    /// Periods over coordinate 2-tori `((i, j), value)`, for 2-forms on tori.
    pub periods: Vec<((usize, usize), Rational)>,
}

impl NotExact {
    pub fn summary(&self) -> String {
        let mut s =
            format!("Čech class I(γ) is not a coboundary ({} nonzero residual entries)", self.residual.entries.len());
        for ((i, j), v) in &self.periods {
            s.push_str(&format!("; period over (x{}, x{}) = {}", i, j, v));
        }
        s
    }
}

/// Outcome of the exactness test.
#[derive(Clone, Debug)]
pub enum Exactness {
    /// `x = T I(γ)` with `d^h x = I(γ)`.
    Exact {
        witness: Cochain,
    },
    NotExact(NotExact),
}

impl Exactness {
    pub fn is_exact(&self) -> bool {
        matches!(self, Exactness::Exact { .. })
    }
}

/// Result of a successful anti-differentiation, with its intermediates.
#[derive(Clone, Debug)]
pub struct Solution {
    pub gamma: TotalCochain,
    pub witness: Cochain,
    /// `δ^{(m)}` in bidegree `(-m, k-1+m)`.
    pub delta: TotalCochain,
    pub primitive: Form,
}

/// Anti-differential for a fixed cover, complex and splitting.
#[derive(Clone, Debug)]
pub struct AntiDifferential {
    cx: CechComplex,
    split: CechSplitting,
}

impl AntiDifferential {
    pub fn new(cover: &Cover, opts: &ComplexOptions) -> Result<AntiDifferential> {
        let cx = CechComplex::new(cover, opts)?;
        let split = CechSplitting::build(cx.nerve())?;
        Ok(AntiDifferential { cx, split })
    }

    pub fn complex(&self) -> &CechComplex {
        &self.cx
    }

    pub fn splitting(&self) -> &CechSplitting {
        &self.split
    }

    fn param_zero(&self) -> PPFunction {
        let dom = self.cx.domain();
        let specs =
            dom.parameter_axes().into_iter().map(|a| crate::exactpp::AxisSpec::trivial(&dom.axes()[a].kind)).collect();
        PPFunction::zero(specs)
    }

    fn check_degree(&self, w: &Form) -> Result<usize> {
        let k = w.degree();
        if k == 0 {
            return Err(Error::Invalid("0-forms have no primitive".into()));
        }
        if k > self.cx.n() {
            return Err(Error::Invalid(format!("degree {} exceeds dimension {}", k, self.cx.n())));
        }
        Ok(k)
    }

    /// `γ = Σ_i (-1)^i (K d^v)^i K ω`, checked to satisfy `Dγ = 0` and `S(γ) = ω`.
    pub fn gamma(&self, w: &Form) -> Result<TotalCochain> {
        let k = self.check_degree(w)?;
        w.check_closed()?;
        self.cx.check_input(w)?;
        let n = self.cx.n();
        let len = (n - k).min(self.cx.nerve().top_level()) + 1;
        let mut x = Cochain::zero(-1, k);
        x.accumulate(0, Entry::Form(w.clone()))?;
        let comps = zigzag_lift(&self.cx, Direction::Horizontal, &x, &[], len)?;
        let g = TotalCochain { k, comps };
        if !self.cx.total_d(&g)?.is_zero() {
            return Err(Error::Identity("Dγ != 0".into()));
        }
        if !self.cx.s_map(&g)?.equals(w) {
            return Err(Error::Identity("S(γ) != ω".into()));
        }
        Ok(g)
    }

    fn exactness_of(&self, w: &Form, g: &TotalCochain) -> Result<Exactness> {
        let i = self.cx.i_map(g)?;
        let x = self.split.apply(&i, &self.param_zero())?;
        let back = if x.entries.is_empty() { Cochain::zero(i.p, i.q) } else { self.cx.d_h(&x)? };
        if back.equals(&i) {
            return Ok(Exactness::Exact { witness: x });
        }
        let residual = back.sub(&i)?;
        Ok(Exactness::NotExact(NotExact { cech_class: i, residual, periods: self.periods(w)? }))
    }

    /// Nonzero periods of a 2-form on a torus without parameters.
    fn periods(&self, w: &Form) -> Result<Vec<((usize, usize), Rational)>> {
        let dom = w.domain();
        let man = dom.manifold_axes();
        let torus = man.iter().all(|&a| dom.axes()[a].kind.is_circle());
        if w.degree() != 2 || !torus || !dom.parameter_axes().is_empty() {
            return Ok(Vec::new());
        }
        let base = alloc::vec![Rational::zero(); dom.dim() - 2];
        let mut out = Vec::new();
        for (ii, &i) in man.iter().enumerate() {
            for &j in &man[ii + 1..] {
                let v = w.period(i, j, &base)?;
                if !v.is_zero() {
                    out.push(((i, j), v));
                }
            }
        }
        Ok(out)
    }

    /// Decides exactness of a closed form by `d^h T I(γ) = I(γ)`.
    pub fn is_exact(&self, w: &Form) -> Result<Exactness> {
        let g = self.gamma(w)?;
        self.exactness_of(w, &g)
    }

    /// Full pipeline; a non-exact form yields its certificate.
    pub fn solve(&self, w: &Form) -> Result<core::result::Result<Solution, NotExact>> {
        let k = self.check_degree(w)?;
        let gamma = self.gamma(w)?;
        let witness = match self.exactness_of(w, &gamma)? {
            Exactness::Exact { witness } => witness,
            Exactness::NotExact(c) => return Ok(Err(c)),
        };
        let n = self.cx.n();
        let m = n - k;
        // Transposed zig-zag: x = ±T I(γ) in the top row, α_i = γ^{(m-i)}.
        let x = witness.scale(&sign(m + 1));
        let alphas: Vec<Cochain> = (0..=m)
            .map(|i| gamma.comps.get(m - i).cloned().unwrap_or_else(|| Cochain::zero((m - i) as isize, n - i)))
            .collect();
        let betas = zigzag_lift(&self.cx, Direction::Vertical, &x, &alphas, m + 2)?;
        let delta = TotalCochain { k: k - 1, comps: betas.into_iter().rev().collect() };
        if !self.cx.total_d(&delta)?.equals(&gamma) {
            return Err(Error::Identity("Dδ != γ".into()));
        }
        let primitive = self.cx.s_map(&delta)?;
        if !primitive.d().equals(w) {
            return Err(Error::Identity("d(primitive) != ω".into()));
        }
        Ok(Ok(Solution { gamma, witness, delta, primitive }))
    }

    /// A primitive `β` with `dβ = ω`, verified exactly.
    pub fn primitive(&self, w: &Form) -> Result<Form> {
        match self.solve(w)? {
            Ok(s) => Ok(s.primitive),
            Err(c) => Err(Error::NotExact(c.summary())),
        }
    }

    /// Primitive of a family `ω(z)`. If `quiet` is given (a box in the
    /// parameter axes, in order) and `ω` vanishes over it, the primitive is
    /// checked to vanish there too.
    pub fn primitive_family(&self, w: &Form, quiet: Option<&[Interval]>) -> Result<Form> {
        let beta = self.primitive(w)?;
        if let Some(qbox) = quiet {
            let dom = self.cx.domain();
            let params = dom.parameter_axes();
            if qbox.len() != params.len() {
                return Err(Error::Invalid(format!(
                    "parameter box has {} intervals, domain has {} parameter axes",
                    qbox.len(),
                    params.len()
                )));
            }
            let mut region: Vec<Option<Interval>> = alloc::vec![None; dom.dim()];
            for (iv, &a) in qbox.iter().zip(&params) {
                region[a] = Some(iv.clone());
            }
            if !w.vanishes_on(&region) {
                return Err(Error::Invalid("the family does not vanish over the given parameter box".into()));
            }
            if !beta.vanishes_on(&region) {
                return Err(Error::Identity("primitive does not vanish where the family does".into()));
            }
        }
        Ok(beta)
    }
}
