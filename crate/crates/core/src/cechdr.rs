//! The augmented Čech–de Rham double complex with compact supports.
//!
//! Bidegree `(-p, q)` holds one `q`-form per `p`-simplex of the nerve. Level
//! `p = -1` is the horizontal augmentation column `Ω_c(M)` with a single
//! entry (id `0`); row `q = n + 1` is the vertical augmentation `Č_p(R)`,
//! whose entries are functions of the parameter axes only.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::sync::Arc;
use alloc::vec::Vec;

use crate::cover::{Cover, Nerve, Region};
use crate::error::{Error, Result};
use crate::exactpp::{bspline_normalized_on, AxisKind, Interval, PPFunction};
use crate::forms::{Domain, Form, Mask};
use crate::rational::Rational;

/// Entry of a cochain.
#[derive(Clone, Debug)]
pub enum Entry {
    Form(Form),
    /// Top-row value: a function of the parameter axes (a constant if there are none).
    Top(PPFunction),
}

impl Entry {
    pub fn is_zero(&self) -> bool {
        match self {
            Entry::Form(f) => f.is_zero(),
            Entry::Top(c) => c.is_zero(),
        }
    }

    pub fn as_form(&self) -> Option<&Form> {
        match self {
            Entry::Form(f) => Some(f),
            Entry::Top(_) => None,
        }
    }

    pub fn as_top(&self) -> Option<&PPFunction> {
        match self {
            Entry::Top(c) => Some(c),
            Entry::Form(_) => None,
        }
    }

    fn add(&self, other: &Entry) -> Result<Entry> {
        match (self, other) {
            (Entry::Form(a), Entry::Form(b)) => Ok(Entry::Form(a.add(b)?)),
            (Entry::Top(a), Entry::Top(b)) => Ok(Entry::Top(a.add(b)?)),
            _ => Err(Error::Invalid("mixing form and top-row entries".into())),
        }
    }

    fn scale(&self, c: &Rational) -> Entry {
        match self {
            Entry::Form(f) => Entry::Form(f.scale(c)),
            Entry::Top(f) => Entry::Top(f.scale(c)),
        }
    }

    fn equals(&self, other: &Entry) -> bool {
        match (self, other) {
            (Entry::Form(a), Entry::Form(b)) => a.equals(b),
            (Entry::Top(a), Entry::Top(b)) => a.equals(b),
            _ => false,
        }
    }

    pub fn size(&self) -> usize {
        match self {
            Entry::Form(f) => f.size(),
            Entry::Top(c) => c.cell_count(),
        }
    }
}

/// Element of `C^{-p, q}`; missing entries are zero.
#[derive(Clone, Debug)]
pub struct Cochain {
    pub p: isize,
    pub q: usize,
    pub entries: BTreeMap<usize, Entry>,
}

impl Cochain {
    pub fn zero(p: isize, q: usize) -> Cochain {
        Cochain { p, q, entries: BTreeMap::new() }
    }

    pub fn is_zero(&self) -> bool {
        self.entries.values().all(|e| e.is_zero())
    }

    /// Adds `e` to entry `id`, dropping zeros.
    pub fn accumulate(&mut self, id: usize, e: Entry) -> Result<()> {
        if e.is_zero() {
            return Ok(());
        }
        let v = match self.entries.remove(&id) {
            Some(old) => old.add(&e)?,
            None => e,
        };
        if !v.is_zero() {
            self.entries.insert(id, v);
        }
        Ok(())
    }

    pub fn add(&self, other: &Cochain) -> Result<Cochain> {
        if (self.p, self.q) != (other.p, other.q) {
            return Err(Error::Invalid(format!(
                "adding bidegree ({}, {}) to ({}, {})",
                -self.p, self.q, -other.p, other.q
            )));
        }
        let mut out = self.clone();
        for (id, e) in &other.entries {
            out.accumulate(*id, e.clone())?;
        }
        Ok(out)
    }

    pub fn scale(&self, c: &Rational) -> Cochain {
        let entries =
            if c.is_zero() { BTreeMap::new() } else { self.entries.iter().map(|(k, e)| (*k, e.scale(c))).collect() };
        Cochain { p: self.p, q: self.q, entries }
    }

    pub fn neg(&self) -> Cochain {
        self.scale(&-Rational::one())
    }

    pub fn sub(&self, other: &Cochain) -> Result<Cochain> {
        self.add(&other.neg())
    }

    /// Exact equality of all entries.
    pub fn equals(&self, other: &Cochain) -> bool {
        if (self.p, self.q) != (other.p, other.q) {
            return self.is_zero() && other.is_zero();
        }
        let keys: alloc::collections::BTreeSet<usize> =
            self.entries.keys().chain(other.entries.keys()).copied().collect();
        keys.into_iter().all(|k| match (self.entries.get(&k), other.entries.get(&k)) {
            (Some(a), Some(b)) => a.equals(b),
            (Some(a), None) | (None, Some(a)) => a.is_zero(),
            (None, None) => true,
        })
    }

    pub fn size(&self) -> usize {
        self.entries.values().map(|e| e.size()).sum()
    }
}

/// Element of the total complex of degree `k`: `comps[m]` lies in `C^{-m, k+m}`.
#[derive(Clone, Debug)]
pub struct TotalCochain {
    pub k: usize,
    pub comps: Vec<Cochain>,
}

/// Bump data of one simplex on one manifold axis.
#[derive(Clone, Debug)]
pub struct AxisBump {
    /// Unit-mass bump `e`, univariate.
    pub e: PPFunction,
    /// `x -> integral of e from the start of the arc`, univariate.
    pub big_e: PPFunction,
    /// Lower end of the intersection interval, where cumulative integrals start.
    pub start: Rational,
}

/// Intermediate of the column contraction: a form from which the last
/// `n - live` manifold axes have been integrated out.
#[derive(Clone, Debug)]
pub(crate) struct Partial {
    pub degree: usize,
    pub live: usize,
    pub comps: BTreeMap<Mask, PPFunction>,
}

/// The double complex over a fixed cover, nerve and choice of bumps.
#[derive(Clone, Debug)]
pub struct CechComplex {
    domain: Arc<Domain>,
    cover: Cover,
    nerve: Nerve,
    man: Vec<usize>,
    /// `bumps[p][s][k]`: bump of simplex `s` at level `p` along manifold axis `k`.
    bumps: Vec<Vec<Vec<AxisBump>>>,
    parallel: bool,
}

/// Options for building a [`CechComplex`].
#[derive(Clone, Debug)]
pub struct ComplexOptions {
    /// Highest nerve level to enumerate.
    pub max_level: usize,
    /// Degree of the per-simplex bumps `e`.
    pub bump_degree: u32,
    /// Use rayon over simplices (needs the `parallel` feature).
    pub parallel: bool,
}

impl Default for ComplexOptions {
    fn default() -> Self {
        ComplexOptions { max_level: usize::MAX, bump_degree: 1, parallel: false }
    }
}

impl CechComplex {
    pub fn new(cover: &Cover, opts: &ComplexOptions) -> Result<CechComplex> {
        let domain = cover.domain().clone();
        let n = domain.n();
        let max_level = opts.max_level.min(n + 1);
        let nerve = Nerve::of_cover(cover, max_level)?;
        let man = domain.manifold_axes();
        let mut bumps = Vec::new();
        for p in 0..=nerve.top_level() {
            let mut lvl = Vec::with_capacity(nerve.count(p));
            for s in nerve.level(p) {
                lvl.push(simplex_bumps(&domain, &man, &s.region, opts.bump_degree)?);
            }
            bumps.push(lvl);
        }
        Ok(CechComplex { domain, cover: cover.clone(), nerve, man, bumps, parallel: opts.parallel })
    }

    pub fn domain(&self) -> &Arc<Domain> {
        &self.domain
    }

    pub fn cover(&self) -> &Cover {
        &self.cover
    }

    pub fn nerve(&self) -> &Nerve {
        &self.nerve
    }

    pub fn n(&self) -> usize {
        self.man.len()
    }

    /// Number of entries (simplices) in column `-p`.
    pub fn width(&self, p: isize) -> usize {
        if p < 0 {
            1
        } else {
            self.nerve.count(p as usize)
        }
    }

    pub fn bumps(&self, p: usize, s: usize) -> &[AxisBump] {
        &self.bumps[p][s]
    }

    /// Region of an entry as a box over all axes, for support checks.
    pub fn entry_region(&self, p: usize, s: usize) -> Vec<Option<Interval>> {
        self.cover.full_region(&self.nerve.level(p)[s].region)
    }

    fn check_form_entry(&self, c: &Cochain) -> Result<()> {
        if c.q > self.n() + 1 {
            return Err(Error::Invalid(format!("row {} above n + 1", c.q)));
        }
        if c.p < -1 || (c.p >= 0 && c.p as usize > self.nerve.top_level() && !c.entries.is_empty()) {
            return Err(Error::Invalid(format!("column {} outside the enumerated nerve", -c.p)));
        }
        Ok(())
    }

    fn par_map<T, R, F>(&self, items: &[T], f: F) -> Result<Vec<R>>
    where
        T: Sync,
        R: Send,
        F: Fn(&T) -> Result<R> + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if self.parallel {
            use rayon::prelude::*;
            return items.par_iter().map(f).collect();
        }
        let _ = self.parallel;
        items.iter().map(f).collect()
    }

    /// `(d^h c)_τ = Σ_α c_{ατ}`, i.e. the alternating sum over cofaces.
    pub fn d_h(&self, c: &Cochain) -> Result<Cochain> {
        self.check_form_entry(c)?;
        if c.p < 0 {
            return Err(Error::Invalid("d^h is not defined on the augmentation column".into()));
        }
        let p = c.p as usize;
        let mut out = Cochain::zero(c.p - 1, c.q);
        for (sid, e) in &c.entries {
            if p == 0 {
                out.accumulate(0, e.clone())?;
                continue;
            }
            for (i, &f) in self.nerve.faces(p, *sid).iter().enumerate() {
                out.accumulate(f, if i % 2 == 0 { e.clone() } else { e.scale(&-Rational::one()) })?;
            }
        }
        Ok(out)
    }

    /// `(d^v c) = (-1)^p d c`, and `(-1)^p ∫ c` from row `n` into the top row.
    pub fn d_v(&self, c: &Cochain) -> Result<Cochain> {
        self.check_form_entry(c)?;
        let n = self.n();
        if c.q > n {
            return Err(Error::Invalid("d^v leaves the top row".into()));
        }
        if c.q == n && c.p < 0 {
            return Err(Error::Invalid("the augmentation corner (1, n + 1) is not part of the complex".into()));
        }
        let neg = c.p.rem_euclid(2) == 1;
        let sign = if neg { -Rational::one() } else { Rational::one() };
        let items: Vec<(usize, &Entry)> = c.entries.iter().map(|(k, e)| (*k, e)).collect();
        let mapped = self.par_map(&items, |&(k, e)| {
            let f = e.as_form().ok_or_else(|| Error::Invalid("top-row entry below row n + 1".into()))?;
            if c.q < n {
                Ok((k, Entry::Form(f.d().scale(&sign))))
            } else {
                Ok((k, Entry::Top(self.integrate(f)?.scale(&sign))))
            }
        })?;
        let mut out = Cochain::zero(c.p, c.q + 1);
        for (k, e) in mapped {
            out.accumulate(k, e)?;
        }
        Ok(out)
    }

    /// Integral of an `n`-form over the manifold axes.
    pub fn integrate(&self, f: &Form) -> Result<PPFunction> {
        let mut part = Partial::from_form(f);
        for _ in 0..self.n() {
            part = self.pi_star(&part)?;
        }
        Ok(part.comps.remove(&0).unwrap_or_else(|| PPFunction::zero(self.param_axes_spec())))
    }

    fn param_axes_spec(&self) -> Vec<crate::exactpp::AxisSpec> {
        self.domain
            .parameter_axes()
            .into_iter()
            .map(|a| crate::exactpp::AxisSpec::trivial(&self.domain.axes()[a].kind))
            .collect()
    }

    /// `(K c)_σ = Σ_i (-1)^i ρ_{σ_i} c_{σ \ σ_i}`.
    pub fn k(&self, c: &Cochain) -> Result<Cochain> {
        self.check_form_entry(c)?;
        if c.q > self.n() {
            return Err(Error::Invalid("K is not defined on the top row".into()));
        }
        let target = c.p + 1;
        let mut out = Cochain::zero(target, c.q);
        if target as usize > self.nerve.top_level() || c.entries.is_empty() {
            return Ok(out);
        }
        let tp = target as usize;
        let pou = self.cover.pou();
        let ids: Vec<usize> = if tp == 0 {
            (0..self.nerve.count(0)).collect()
        } else {
            // only simplices with a face carrying an entry
            let mut set = alloc::collections::BTreeSet::new();
            for sid in c.entries.keys() {
                for (co, _) in self.nerve.cofaces(tp - 1, *sid) {
                    set.insert(*co);
                }
            }
            set.into_iter().collect()
        };
        let mapped = self.par_map(&ids, |&sid| {
            let simplex = &self.nerve.level(tp)[sid];
            let mut acc = Form::zero(&self.domain, c.q);
            for (i, &v) in simplex.vertices.iter().enumerate() {
                let face = if tp == 0 { 0 } else { self.nerve.faces(tp, sid)[i] };
                if let Some(e) = c.entries.get(&face) {
                    let f = e.as_form().expect("form entry");
                    let term = f.mul_fn(&pou[v])?;
                    acc = if i % 2 == 0 { acc.add(&term)? } else { acc.sub(&term)? };
                }
            }
            Ok((sid, Entry::Form(acc)))
        })?;
        for (k, e) in mapped {
            out.accumulate(k, e)?;
        }
        Ok(out)
    }

    /// Column contraction: `(-1)^p Σ_j (e*)^j Q (π*)^j` on rows `1..=n`,
    /// `(-1)^p (e*)^n` on the top row.
    pub fn l(&self, c: &Cochain) -> Result<Cochain> {
        self.check_form_entry(c)?;
        if c.p < 0 {
            return Err(Error::Invalid("L acts on the Čech columns p >= 0".into()));
        }
        if c.q == 0 {
            return Err(Error::Invalid("L lowers the row; row 0 has nothing below".into()));
        }
        let p = c.p as usize;
        let neg = p % 2 == 1;
        let items: Vec<(usize, &Entry)> = c.entries.iter().map(|(k, e)| (*k, e)).collect();
        let mapped = self.par_map(&items, |&(sid, e)| {
            let b = &self.bumps[p][sid];
            let f = match e {
                Entry::Top(v) => self.e_star_n(v, b)?,
                Entry::Form(f) => self.l_form(f, b)?,
            };
            Ok((sid, Entry::Form(if neg { f.neg() } else { f })))
        })?;
        let mut out = Cochain::zero(c.p, c.q - 1);
        for (k, e) in mapped {
            out.accumulate(k, e)?;
        }
        Ok(out)
    }

    /// The unsigned column contraction on one form.
    pub fn l_form(&self, f: &Form, b: &[AxisBump]) -> Result<Form> {
        let n = self.n();
        let mut out = Form::zero(&self.domain, f.degree().saturating_sub(1));
        if f.degree() == 0 {
            return Ok(out);
        }
        let mut part = Partial::from_form(f);
        for j in 0..n {
            if part.comps.is_empty() || part.degree == 0 {
                break;
            }
            let mut qd = self.q_partial(&part, b)?;
            for _ in 0..j {
                qd = self.e_star(&qd, b)?;
            }
            out = out.add(&qd.into_form(&self.domain))?;
            if j + 1 < n {
                part = self.pi_star(&part)?;
            }
        }
        Ok(out)
    }

    /// `(e*)^n` applied to a top-row value.
    pub fn e_star_n(&self, v: &PPFunction, b: &[AxisBump]) -> Result<Form> {
        let mut part = Partial { degree: 0, live: 0, comps: BTreeMap::new() };
        if !v.is_zero() {
            part.comps.insert(0, v.clone());
        }
        for _ in 0..self.n() {
            part = self.e_star(&part, b)?;
        }
        Ok(part.into_form(&self.domain))
    }

    fn current_index(&self, live: usize, a: usize) -> usize {
        a - self.man[live..].iter().filter(|&&m| m < a).count()
    }

    /// Integration along the last live manifold axis.
    pub(crate) fn pi_star(&self, part: &Partial) -> Result<Partial> {
        let live = part.live;
        let a = self.man[live - 1];
        let ca = self.current_index(live, a);
        let mut comps = BTreeMap::new();
        for (m, f) in &part.comps {
            if m & (1 << a) != 0 {
                let g = f.integrate_axis_full(ca)?;
                if !g.is_zero() {
                    comps.insert(m & !(1 << a), g);
                }
            }
        }
        Ok(Partial { degree: part.degree.saturating_sub(1), live: live - 1, comps })
    }

    /// Wedge with `e(x_a) dx_a` on the right, re-inserting the next axis.
    pub(crate) fn e_star(&self, part: &Partial, b: &[AxisBump]) -> Result<Partial> {
        let k = part.live;
        let a = self.man[k];
        let ca = self.current_index(k + 1, a);
        let mut comps = BTreeMap::new();
        for (m, f) in &part.comps {
            comps.insert(m | (1 << a), f.insert_axis(ca, &b[k].e)?);
        }
        Ok(Partial { degree: part.degree + 1, live: k + 1, comps })
    }

    /// Homotopy `Q` along the last live axis, with `dQ + Qd = 1 - e*π*`.
    pub(crate) fn q_partial(&self, part: &Partial, b: &[AxisBump]) -> Result<Partial> {
        let live = part.live;
        let k = live - 1;
        let a = self.man[k];
        let ca = self.current_index(live, a);
        let neg = part.degree.is_multiple_of(2);
        let mut comps = BTreeMap::new();
        for (m, f) in &part.comps {
            if m & (1 << a) == 0 {
                continue;
            }
            let cum = match &self.domain.axes()[a].kind {
                AxisKind::Line => f.cumulative_integral(ca)?,
                AxisKind::Circle { .. } => f.cumulative_integral_from(ca, &b[k].start)?,
            };
            let total = f.integrate_axis_full(ca)?.insert_axis(ca, &b[k].big_e)?;
            let g = cum.sub(&total)?;
            let g = if neg { g.neg() } else { g };
            if !g.is_zero() {
                comps.insert(m & !(1 << a), g);
            }
        }
        Ok(Partial { degree: part.degree - 1, live, comps })
    }

    /// `Q` along the last manifold axis of a form, with the given bumps.
    pub fn q_op(&self, f: &Form, b: &[AxisBump]) -> Result<Form> {
        if f.degree() == 0 {
            return Ok(Form::zero(&self.domain, 0));
        }
        Ok(self.q_partial(&Partial::from_form(f), b)?.into_form(&self.domain))
    }

    /// `e* π*` along the last manifold axis.
    pub fn e_pi(&self, f: &Form, b: &[AxisBump]) -> Result<Form> {
        if f.degree() == 0 {
            return Ok(Form::zero(&self.domain, 0));
        }
        let p = self.pi_star(&Partial::from_form(f))?;
        Ok(self.e_star(&p, b)?.into_form(&self.domain))
    }

    /// Edge map `S(t) = Σ_α t^{(0)}_α`.
    pub fn s_map(&self, t: &TotalCochain) -> Result<Form> {
        let c0 = &t.comps[0];
        let d = self.d_h(c0)?;
        Ok(d.entries.get(&0).and_then(|e| e.as_form().cloned()).unwrap_or_else(|| Form::zero(&self.domain, t.k)))
    }

    /// Edge map `I(t) = (∫ t^{(n-k)})`, a cochain in the top row.
    pub fn i_map(&self, t: &TotalCochain) -> Result<Cochain> {
        let n = self.n();
        let m = n - t.k;
        let mut out = Cochain::zero(m as isize, n + 1);
        if let Some(c) = t.comps.get(m) {
            for (sid, e) in &c.entries {
                let f = e.as_form().expect("form entry");
                out.accumulate(*sid, Entry::Top(self.integrate(f)?))?;
            }
        }
        Ok(out)
    }

    /// Total differential `D = d^h + d^v` inside the non-augmented part.
    pub fn total_d(&self, t: &TotalCochain) -> Result<TotalCochain> {
        let n = self.n();
        let k = t.k + 1;
        let len = (n + 1).saturating_sub(k).min(self.nerve.top_level() + 1);
        let mut comps: Vec<Cochain> = (0..len).map(|m| Cochain::zero(m as isize, k + m)).collect();
        for (m, c) in t.comps.iter().enumerate() {
            if c.q < n && m < len {
                comps[m] = comps[m].add(&self.d_v(c)?)?;
            }
            if m >= 1 && m - 1 < len {
                comps[m - 1] = comps[m - 1].add(&self.d_h(c)?)?;
            }
        }
        Ok(TotalCochain { k, comps })
    }

    /// Checks that every entry stays inside its simplex intersection.
    pub fn check_supports(&self, c: &Cochain) -> Result<()> {
        if c.p < 0 || c.q > self.n() {
            return Ok(());
        }
        for (sid, e) in &c.entries {
            let f = e.as_form().expect("form entry");
            if !f.vanishes_outside(&self.entry_region(c.p as usize, *sid)) {
                return Err(Error::Support(format!(
                    "entry on simplex {:?} leaves its intersection",
                    self.nerve.level(c.p as usize)[*sid].vertices
                )));
            }
        }
        Ok(())
    }

    /// Checks that `ω` is supported where the partition of unity sums to one.
    pub fn check_input(&self, w: &Form) -> Result<()> {
        if w.domain() != &self.domain && **w.domain() != *self.domain {
            return Err(Error::DomainMismatch("form and cover live on different domains".into()));
        }
        let s = self.cover.pou_sum()?;
        if !w.mul_fn(&s)?.equals(w) {
            return Err(Error::Support(
                "form is not compactly supported inside the region where the partition of unity sums to 1".into(),
            ));
        }
        Ok(())
    }
}

impl Partial {
    pub(crate) fn from_form(f: &Form) -> Partial {
        Partial { degree: f.degree(), live: f.domain().n(), comps: f.components().clone() }
    }

    pub(crate) fn into_form(self, domain: &Arc<Domain>) -> Form {
        assert_eq!(self.live, domain.n(), "partial form still has integrated-out axes");
        Form::with_degree(domain, self.degree, self.comps)
    }
}

fn simplex_bumps(domain: &Arc<Domain>, man: &[usize], region: &Region, degree: u32) -> Result<Vec<AxisBump>> {
    let mut out = Vec::with_capacity(man.len());
    for (k, &a) in man.iter().enumerate() {
        let ax = &domain.axes()[a];
        let iv = &region[k];
        let (lo, hi) = match &ax.kind {
            AxisKind::Line => {
                let lo = if iv.lo > ax.extent.lo { iv.lo.clone() } else { ax.extent.lo.clone() };
                let hi = if iv.hi < ax.extent.hi { iv.hi.clone() } else { ax.extent.hi.clone() };
                if lo >= hi {
                    return Err(Error::InvalidCover(format!("a nerve intersection misses the core on axis {}", a)));
                }
                (lo, hi)
            }
            AxisKind::Circle { .. } => (iv.lo.clone(), iv.hi.clone()),
        };
        let e = bspline_normalized_on(degree, &lo, &hi)?;
        let (e, big_e) = match &ax.kind {
            AxisKind::Line => {
                let big = e.cumulative_integral(0)?;
                (e, big)
            }
            AxisKind::Circle { period } => {
                let ep = e.periodize(0, period)?;
                let big = ep.cumulative_integral_from(0, &lo)?;
                (ep, big)
            }
        };
        out.push(AxisBump { e, big_e, start: lo });
    }
    Ok(out)
}

impl TotalCochain {
    pub fn zero(k: usize, len: usize) -> TotalCochain {
        TotalCochain { k, comps: (0..len).map(|m| Cochain::zero(m as isize, k + m)).collect() }
    }

    pub fn is_zero(&self) -> bool {
        self.comps.iter().all(|c| c.is_zero())
    }

    pub fn equals(&self, other: &TotalCochain) -> bool {
        if self.k != other.k {
            return false;
        }
        let len = self.comps.len().max(other.comps.len());
        (0..len).all(|m| match (self.comps.get(m), other.comps.get(m)) {
            (Some(a), Some(b)) => a.equals(b),
            (Some(a), None) | (None, Some(a)) => a.is_zero(),
            (None, None) => true,
        })
    }

    pub fn add(&self, other: &TotalCochain) -> Result<TotalCochain> {
        if self.k != other.k {
            return Err(Error::Invalid("adding total cochains of different degree".into()));
        }
        let len = self.comps.len().max(other.comps.len());
        let mut comps = Vec::with_capacity(len);
        for m in 0..len {
            let z = Cochain::zero(m as isize, self.k + m);
            let a = self.comps.get(m).unwrap_or(&z);
            let b = other.comps.get(m).unwrap_or(&z);
            comps.push(a.add(b)?);
        }
        Ok(TotalCochain { k: self.k, comps })
    }

    pub fn scale(&self, c: &Rational) -> TotalCochain {
        TotalCochain { k: self.k, comps: self.comps.iter().map(|x| x.scale(c)).collect() }
    }
}

/// Sign `(-1)^e` as a rational.
pub fn sign(e: usize) -> Rational {
    if e.is_multiple_of(2) {
        Rational::one()
    } else {
        -Rational::one()
    }
}
