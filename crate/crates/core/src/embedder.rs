//! Appending coordinates to a map into `R^2N` so that the standard
//! symplectic form pulls back to a prescribed closed 2-form.
//!
//! A primitive `η` of the discrepancy is split over the cover as
//! `dη = Σ dh^r_α ∧ dt^r_α` with `h^r_α` the `dx_r` coefficient of `ρ_α η` and
//! `t^r_α = (1 - ψ) φ_α x_r`, where `φ_α = 1` on chart `α`. Charts of one
//! color are far apart, so their pairs can share a coordinate pair.

use alloc::format;
use alloc::sync::Arc;
use alloc::vec::Vec;

use crate::antidiff::AntiDifferential;
use crate::cechdr::ComplexOptions;
use crate::cover::{closed_sets_meet, Coloring, Cover, Region};
use crate::error::{Error, Result};
use crate::exactpp::{smoothstep, AxisKind, Interval, PPFunction, Poly};
use crate::forms::{Domain, Form, Mask, PPMap, Role};
use crate::rational::Rational;

/// Relative data: the family is standard over `B` and `ψ` cuts off inside `U`.
#[derive(Clone, Debug)]
pub struct Relative {
    /// Box in the parameter axes, in order.
    pub b: Vec<Interval>,
    pub u: Vec<Interval>,
    /// Function of the parameter axes, `1` on `B`, zero outside `U`.
    pub psi: PPFunction,
}

impl Relative {
    /// `ψ` as a product of `C^degree` plateaus rising over `U \ B`; `B` must lie
    /// in the interior of `U`.
    pub fn with_plateau(b: Vec<Interval>, u: Vec<Interval>, degree: u32) -> Result<Relative> {
        if b.len() != u.len() {
            return Err(Error::Relative("B and U have different dimensions".into()));
        }
        let mut factors = Vec::with_capacity(b.len());
        for (bi, ui) in b.iter().zip(&u) {
            if ui.lo >= bi.lo || bi.hi >= ui.hi {
                return Err(Error::Relative(format!(
                    "[{}, {}] is not in the interior of [{}, {}]",
                    bi.lo, bi.hi, ui.lo, ui.hi
                )));
            }
            let up = smoothstep(degree, &ui.lo, &bi.lo)?;
            let down = smoothstep(degree, &bi.hi, &ui.hi)?;
            factors.push(up.sub(&down)?);
        }
        Ok(Relative { b, u, psi: PPFunction::tensor(&factors) })
    }

    fn region(&self, domain: &Domain, boxes: &[Interval]) -> Result<Vec<Option<Interval>>> {
        let params = domain.parameter_axes();
        if boxes.len() != params.len() {
            return Err(Error::Relative(format!(
                "box has {} intervals, domain has {} parameter axes",
                boxes.len(),
                params.len()
            )));
        }
        let mut r = alloc::vec![None; domain.dim()];
        for (iv, &a) in boxes.iter().zip(&params) {
            r[a] = Some(iv.clone());
        }
        Ok(r)
    }

    /// `ψ` extended to all axes of `domain`, after checking it against `B` and `U`.
    pub fn psi_on(&self, domain: &Domain) -> Result<PPFunction> {
        let params = domain.parameter_axes();
        if self.psi.dim() != params.len() {
            return Err(Error::Relative("ψ must be a function of the parameter axes".into()));
        }
        if self.u.iter().any(|iv| iv.lo >= iv.hi) {
            return Err(Error::Relative("U must be an open box".into()));
        }
        let mut f = self.psi.clone();
        for (a, ax) in domain.axes().iter().enumerate() {
            if ax.role == Role::Manifold {
                f = f.extend_constant(a, &ax.kind)?;
            }
        }
        let one = domain.constant_fn(Rational::one());
        if !vanishes_over(&f.sub(&one)?, domain, &self.b)? {
            return Err(Error::Relative("ψ is not 1 on B".into()));
        }
        if !f.vanishes_outside(&self.region(domain, &self.u)?) {
            return Err(Error::Relative("ψ is not supported in U".into()));
        }
        Ok(f)
    }
}

/// Whether `f` vanishes on `box × M`. Degenerate intervals of the box are
/// handled by restricting to that parameter value.
pub fn vanishes_over(f: &PPFunction, domain: &Domain, boxes: &[Interval]) -> Result<bool> {
    let params = domain.parameter_axes();
    if boxes.len() != params.len() {
        return Err(Error::Relative(format!(
            "box has {} intervals, domain has {} parameter axes",
            boxes.len(),
            params.len()
        )));
    }
    let mut g = f.clone();
    let mut region: Vec<Option<Interval>> = alloc::vec![None; domain.dim()];
    for (iv, &a) in boxes.iter().zip(&params).rev() {
        if iv.lo == iv.hi {
            g = g.restrict(a, &iv.lo)?;
            region.remove(a);
        } else {
            region[a] = Some(iv.clone());
        }
    }
    Ok(g.vanishes_on(&region))
}

/// Coordinate pairs of one chart.
#[derive(Clone, Debug)]
pub struct ChartPairs {
    pub chart: usize,
    /// Cutoff equal to one on the chart.
    pub phi: PPFunction,
    /// `(h^r, t^r)` for each manifold axis `r`.
    pub pairs: Vec<(PPFunction, PPFunction)>,
}

/// `dη = Σ_{m, r} dh^r_m ∧ dt^r_m` with one pair per color `m` and axis `r`.
#[derive(Clone, Debug)]
pub struct PairDecomposition {
    pub domain: Arc<Domain>,
    pub eta: Form,
    pub d_eta: Form,
    pub coloring: Coloring,
    /// Distance by which cutoffs reach beyond their chart.
    pub margin: Rational,
    pub charts: Vec<ChartPairs>,
    /// `grouped[m][r] = (Σ_{α ∈ I_m} h^r_α, Σ_{α ∈ I_m} t^r_α)`.
    pub grouped: Vec<Vec<(PPFunction, PPFunction)>>,
    /// Parameter box on which every pair vanishes.
    pub relative_b: Option<Vec<Interval>>,
}

fn axis_gap(kind: &AxisKind, a: &Interval, b: &Interval) -> Option<Rational> {
    if closed_sets_meet(kind, a, b) {
        return None;
    }
    let dist = |s: &Rational| {
        let l = &(&b.lo + s) - &a.hi;
        let r = &a.lo - &(&b.hi + s);
        if l > r {
            l
        } else {
            r
        }
    };
    match kind {
        AxisKind::Line => Some(dist(&Rational::zero())),
        AxisKind::Circle { period } => {
            (-1i64..=1).map(|k| dist(&(period * &Rational::from_int(k)))).filter(|d| d > &Rational::zero()).min()
        }
    }
}

/// Margin for the cutoffs: a third of the smallest separation between two
/// charts of one color, and small enough that no enlarged arc wraps.
fn cutoff_margin(kinds: &[AxisKind], charts: &[Region], coloring: &Coloring) -> Rational {
    let mut m: Option<Rational> = None;
    let mut take = |v: Rational| {
        if m.as_ref().is_none_or(|c| &v < c) {
            m = Some(v);
        }
    };
    for class in &coloring.classes {
        for (i, &a) in class.iter().enumerate() {
            for &b in &class[i + 1..] {
                let sep = kinds
                    .iter()
                    .enumerate()
                    .filter_map(|(k, kind)| axis_gap(kind, &charts[a][k], &charts[b][k]))
                    .max()
                    .expect("charts of one color are disjoint");
                take(&sep / &Rational::from_int(3));
            }
        }
    }
    for c in charts {
        for (k, kind) in kinds.iter().enumerate() {
            let len = c[k].len();
            take(&len / &Rational::from_int(4));
            if let AxisKind::Circle { period } = kind {
                take(&(period - &len) / &Rational::from_int(4));
            }
        }
    }
    m.expect("a cover has charts")
}

/// `(φ, φ·x)` along one axis: `φ = 1` on `iv`, ramping to zero over `margin`.
fn axis_cutoff(kind: &AxisKind, iv: &Interval, margin: &Rational) -> Result<(PPFunction, PPFunction)> {
    let up = smoothstep(1, &(&iv.lo - margin), &iv.lo)?;
    let down = smoothstep(1, &iv.hi, &(&iv.hi + margin))?;
    let phi = up.sub(&down)?;
    let x = Poly::var(0);
    let phix = phi.mul_poly(&x);
    match kind {
        AxisKind::Line => Ok((phi, phix)),
        AxisKind::Circle { period } => Ok((phi.periodize(0, period)?, phix.periodize(0, period)?)),
    }
}

fn one_on(kind: &AxisKind) -> PPFunction {
    PPFunction::constant_on(core::slice::from_ref(kind), Rational::one())
}

/// Splits `dη` into coordinate pairs, verified exactly.
///
/// `psi` is a function on all axes of the domain depending on the parameters
/// only, or `None` for `ψ = 0`; `ψ η` must vanish identically.
pub fn decompose(
    eta: &Form,
    cover: &Cover,
    psi: Option<&PPFunction>,
    relative_b: Option<&[Interval]>,
) -> Result<PairDecomposition> {
    let dom = cover.domain().clone();
    if eta.degree() != 1 {
        return Err(Error::Invalid(format!("η must be a 1-form, got degree {}", eta.degree())));
    }
    if **eta.domain() != *dom {
        return Err(Error::DomainMismatch("η and the cover live on different domains".into()));
    }
    let one = dom.constant_fn(Rational::one());
    let one_minus_psi = match psi {
        Some(p) => {
            if !eta.mul_fn(p)?.is_zero() {
                return Err(Error::Relative("η does not vanish where ψ is nonzero".into()));
            }
            one.sub(p)?
        }
        None => one,
    };
    let man = dom.manifold_axes();
    let kinds: Vec<AxisKind> = man.iter().map(|&a| dom.axes()[a].kind.clone()).collect();
    let coloring = cover.coloring();
    let margin = cutoff_margin(&kinds, cover.charts(), &coloring);

    let mut charts = Vec::with_capacity(cover.len());
    for (alpha, region) in cover.charts().iter().enumerate() {
        let cut: Vec<(PPFunction, PPFunction)> =
            kinds.iter().zip(region).map(|(k, iv)| axis_cutoff(k, iv, &margin)).collect::<Result<_>>()?;
        let factors = |with_x: Option<usize>| -> Vec<PPFunction> {
            let mut mi = 0;
            dom.axes()
                .iter()
                .map(|ax| match ax.role {
                    Role::Parameter => one_on(&ax.kind),
                    Role::Manifold => {
                        let f = if with_x == Some(mi) { cut[mi].1.clone() } else { cut[mi].0.clone() };
                        mi += 1;
                        f
                    }
                })
                .collect()
        };
        let phi = PPFunction::tensor(&factors(None));
        let local = eta.mul_fn(&cover.pou()[alpha])?;
        let mut pairs = Vec::with_capacity(man.len());
        for (r, &a) in man.iter().enumerate() {
            let h = local.coeff(1 << a);
            let t =
                if h.is_zero() { dom.zero_fn() } else { PPFunction::tensor(&factors(Some(r))).mul(&one_minus_psi)? };
            pairs.push((h, t));
        }
        charts.push(ChartPairs { chart: alpha, phi, pairs });
    }

    let mut grouped = Vec::with_capacity(coloring.count());
    for class in &coloring.classes {
        let mut g: Vec<(PPFunction, PPFunction)> = (0..man.len()).map(|_| (dom.zero_fn(), dom.zero_fn())).collect();
        for &alpha in class {
            for (r, (h, t)) in charts[alpha].pairs.iter().enumerate() {
                g[r].0 = g[r].0.add(h)?;
                g[r].1 = g[r].1.add(t)?;
            }
        }
        grouped.push(g);
    }

    let d_eta = eta.d();
    let mut sum = Form::zero(&dom, 2);
    for g in &grouped {
        for (h, t) in g {
            if h.is_zero() || t.is_zero() {
                continue;
            }
            let dh = Form::function(&dom, h.clone())?.d();
            let dt = Form::function(&dom, t.clone())?.d();
            sum = sum.add(&dh.wedge(&dt)?)?;
        }
    }
    if !sum.equals(&d_eta) {
        return Err(Error::Identity("Σ dh ∧ dt != dη".into()));
    }
    let dec = PairDecomposition {
        domain: dom,
        eta: eta.clone(),
        d_eta,
        coloring,
        margin,
        charts,
        grouped,
        relative_b: relative_b.map(|b| b.to_vec()),
    };
    if let Some(b) = relative_b {
        if !dec.vanishes_over(b)? {
            return Err(Error::Relative("coordinate pairs do not vanish over B".into()));
        }
    }
    Ok(dec)
}

impl PairDecomposition {
    /// Number of appended coordinate pairs, `n · #colors`.
    pub fn pair_count(&self) -> usize {
        self.grouped.len() * self.domain.n()
    }

    /// Appended coordinates in order `h^1_0, t^1_0, …, h^n_0, t^n_0, h^1_1, …`.
    pub fn coordinates(&self) -> Vec<PPFunction> {
        self.grouped.iter().flat_map(|g| g.iter().flat_map(|(h, t)| [h.clone(), t.clone()])).collect()
    }

    /// Whether every appended coordinate vanishes over the parameter box `b`.
    pub fn vanishes_over(&self, b: &[Interval]) -> Result<bool> {
        for f in self.coordinates() {
            if !vanishes_over(&f, &self.domain, b)? {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

/// Exact checks and dimension bookkeeping of an embedding.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EmbeddingReport {
    /// Half the dimension of the original target.
    pub n_original: usize,
    pub colors: usize,
    /// `n · colors`.
    pub appended_pairs: usize,
    pub target_dim: usize,
    /// `g* ω_std = f* ω_std + dη`.
    pub endpoint_identity: bool,
    /// The homotopy pulls back `f* ω_std + s² dη`.
    pub homotopy_identity: bool,
    /// The homotopy is `(f, 0)` at `s = 0` and `g` at `s = 1`.
    pub homotopy_ends: bool,
    /// Appended coordinates vanish over `B`, when relative data was given.
    pub relative: Option<bool>,
    /// `g* ω_std` equals the requested family, when one was given.
    pub target_identity: Option<bool>,
}

impl EmbeddingReport {
    pub fn all_ok(&self) -> bool {
        self.endpoint_identity
            && self.homotopy_identity
            && self.homotopy_ends
            && self.relative.unwrap_or(true)
            && self.target_identity.unwrap_or(true)
    }
}

#[derive(Clone, Debug)]
pub struct EmbeddingResult {
    pub g: PPMap,
    /// Map on the domain with a leading parameter axis `s ∈ [0, 1]`.
    pub homotopy: PPMap,
    pub eta: Form,
    pub report: EmbeddingReport,
}

/// Lifts a form on `domain` to the domain with a new leading axis, multiplying
/// its coefficients by the univariate `factor`.
fn lift_form(w: &Form, target: &Arc<Domain>, factor: &PPFunction) -> Result<Form> {
    let comps: Vec<(Mask, PPFunction)> =
        w.components().iter().map(|(m, f)| Ok((m << 1, f.insert_axis(0, factor)?))).collect::<Result<_>>()?;
    Form::from_components(target, w.degree(), comps)
}

/// Appends the pairs of `dec` to `f` and builds the linear homotopy.
pub fn append_coordinates(f: &PPMap, dec: &PairDecomposition) -> Result<EmbeddingResult> {
    let dom = &f.domain;
    if **dom != *dec.domain {
        return Err(Error::DomainMismatch("map and decomposition live on different domains".into()));
    }
    if !f.target_dim().is_multiple_of(2) {
        return Err(Error::Invalid(format!("target dimension {} is odd", f.target_dim())));
    }
    if !f.declared_embedding {
        return Err(Error::Invalid("the map must be declared an embedding".into()));
    }
    let extra = dec.coordinates();
    let mut coords = f.coordinates.clone();
    coords.extend(extra.iter().cloned());
    let g = PPMap::new(dom, coords, true)?;
    let base = f.pullback_standard()?;
    let endpoint_identity = g.pullback_standard()?.equals(&base.add(&dec.d_eta)?);

    // homotopy (s, z, x) -> (f, s h, s t)
    let unit = (Rational::zero(), Rational::one());
    let hdom = dom.with_parameters(core::slice::from_ref(&unit))?;
    let s = PPFunction::clamped_coordinate(&[AxisKind::Line], 0, &unit.0, &unit.1)?;
    let one = one_on(&AxisKind::Line);
    let mut hcoords: Vec<PPFunction> = f.coordinates.iter().map(|c| c.insert_axis(0, &one)).collect::<Result<_>>()?;
    for c in &extra {
        hcoords.push(c.insert_axis(0, &s)?);
    }
    let homotopy = PPMap::new(&hdom, hcoords, true)?;
    let expected = lift_form(&base, &hdom, &one)?.add(&lift_form(&dec.d_eta, &hdom, &s.mul(&s)?)?)?;
    let homotopy_identity = homotopy.pullback_standard()?.equals(&expected);
    let mut homotopy_ends = true;
    for (i, c) in homotopy.coordinates.iter().enumerate() {
        let at0 = c.restrict(0, &Rational::zero())?;
        let at1 = c.restrict(0, &Rational::one())?;
        let want0 = if i < f.target_dim() { f.coordinates[i].clone() } else { dom.zero_fn() };
        homotopy_ends &= at0.equals(&want0) && at1.equals(&g.coordinates[i]);
    }
    let relative = match &dec.relative_b {
        Some(b) => Some(dec.vanishes_over(b)?),
        None => None,
    };
    let colors = dec.coloring.count();
    let report = EmbeddingReport {
        n_original: f.target_dim() / 2,
        colors,
        appended_pairs: dec.pair_count(),
        target_dim: g.target_dim(),
        endpoint_identity,
        homotopy_identity,
        homotopy_ends,
        relative,
        target_identity: None,
    };
    Ok(EmbeddingResult { g, homotopy, eta: dec.eta.clone(), report })
}

/// Full pipeline: a primitive of `target - f0* ω_std`, its decomposition and
/// the appended coordinates. With relative data the discrepancy must vanish
/// over `U`, and the appended coordinates then vanish over `B`.
pub fn lift_family(
    f0: &PPMap,
    target: &Form,
    relative: Option<&Relative>,
    cover: &Cover,
    opts: &ComplexOptions,
) -> Result<EmbeddingResult> {
    let dom = cover.domain().clone();
    if *f0.domain != *dom || **target.domain() != *dom {
        return Err(Error::DomainMismatch("map, form and cover must share a domain".into()));
    }
    if target.degree() != 2 {
        return Err(Error::Invalid("the target family must consist of 2-forms".into()));
    }
    target.check_closed()?;
    let disc = target.sub(&f0.pullback_standard()?)?;
    let ad = AntiDifferential::new(cover, opts)?;
    let (psi, quiet) = match relative {
        Some(rel) => {
            let psi = rel.psi_on(&dom)?;
            let region = rel.region(&dom, &rel.u)?;
            if !disc.vanishes_on(&region) {
                return Err(Error::Relative("the family differs from f0* ω_std over U".into()));
            }
            (Some(psi), Some(rel.u.as_slice()))
        }
        None => (None, None),
    };
    let eta = ad.primitive_family(&disc, quiet)?;
    let dec = decompose(&eta, cover, psi.as_ref(), relative.map(|r| r.b.as_slice()))?;
    let mut res = append_coordinates(f0, &dec)?;
    res.report.target_identity = Some(res.g.pullback_standard()?.equals(target));
    Ok(res)
}
