//! Differential forms with piecewise-polynomial coefficients.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::sync::Arc;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::exactpp::{AxisKind, AxisSpec, Interval, PPFunction};
use crate::rational::Rational;

/// Index set of a form component: bit `a` stands for `dx_a` (ambient axis order).
pub type Mask = u8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Role {
    Manifold,
    Parameter,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct DomainAxis {
    pub kind: AxisKind,
    /// Core interval of a line axis; `[0, period]` on a circle.
    pub extent: Interval,
    pub role: Role,
}

/// Product of lines and circles, split into manifold and parameter axes.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Domain {
    axes: Vec<DomainAxis>,
}

impl Domain {
    pub fn new(axes: Vec<DomainAxis>) -> Result<Arc<Domain>> {
        if axes.len() > crate::exactpp::MAX_VARS {
            return Err(Error::Invalid(format!("at most {} axes", crate::exactpp::MAX_VARS)));
        }
        if !axes.iter().any(|a| a.role == Role::Manifold) {
            return Err(Error::Invalid("domain needs at least one manifold axis".into()));
        }
        for (i, a) in axes.iter().enumerate() {
            match &a.kind {
                AxisKind::Line => {
                    if a.extent.lo >= a.extent.hi {
                        return Err(Error::DegenerateInterval(format!("axis {}", i)));
                    }
                }
                AxisKind::Circle { period } => {
                    if a.extent.lo != Rational::zero() || &a.extent.hi != period {
                        return Err(Error::Invalid(format!("circle axis {} must have extent [0, period]", i)));
                    }
                }
            }
        }
        Ok(Arc::new(Domain { axes }))
    }

    /// Manifold box `[lo_i, hi_i]`.
    pub fn boxed(bounds: &[(Rational, Rational)]) -> Result<Arc<Domain>> {
        Domain::new(
            bounds
                .iter()
                .map(|(lo, hi)| DomainAxis {
                    kind: AxisKind::Line,
                    extent: Interval::new(lo.clone(), hi.clone()),
                    role: Role::Manifold,
                })
                .collect(),
        )
    }

    /// Flat torus with the given periods.
    pub fn torus(periods: &[Rational]) -> Result<Arc<Domain>> {
        Domain::new(
            periods
                .iter()
                .map(|p| DomainAxis {
                    kind: AxisKind::circle(p.clone()),
                    extent: Interval::new(Rational::zero(), p.clone()),
                    role: Role::Manifold,
                })
                .collect(),
        )
    }

    /// Same domain with parameter line axes `[lo, hi]` prepended.
    pub fn with_parameters(&self, params: &[(Rational, Rational)]) -> Result<Arc<Domain>> {
        let mut axes: Vec<DomainAxis> = params
            .iter()
            .map(|(lo, hi)| DomainAxis {
                kind: AxisKind::Line,
                extent: Interval::new(lo.clone(), hi.clone()),
                role: Role::Parameter,
            })
            .collect();
        axes.extend(self.axes.iter().cloned());
        Domain::new(axes)
    }

    pub fn axes(&self) -> &[DomainAxis] {
        &self.axes
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    pub fn kinds(&self) -> Vec<AxisKind> {
        self.axes.iter().map(|a| a.kind.clone()).collect()
    }

    pub fn manifold_axes(&self) -> Vec<usize> {
        (0..self.dim()).filter(|&a| self.axes[a].role == Role::Manifold).collect()
    }

    pub fn parameter_axes(&self) -> Vec<usize> {
        (0..self.dim()).filter(|&a| self.axes[a].role == Role::Parameter).collect()
    }

    /// Manifold dimension `n`.
    pub fn n(&self) -> usize {
        self.manifold_axes().len()
    }

    pub fn manifold_mask(&self) -> Mask {
        self.manifold_axes().iter().fold(0, |m, &a| m | (1 << a))
    }

    pub fn zero_fn(&self) -> PPFunction {
        PPFunction::zero_on(&self.kinds())
    }

    pub fn constant_fn(&self, c: Rational) -> PPFunction {
        PPFunction::constant_on(&self.kinds(), c)
    }

    /// Coordinate `x_axis`, clamped outside the core interval of a line axis.
    pub fn coordinate(&self, axis: usize) -> Result<PPFunction> {
        let ax = self.axes.get(axis).ok_or(Error::AxisOutOfRange { axis, dim: self.dim() })?;
        PPFunction::clamped_coordinate(&self.kinds(), axis, &ax.extent.lo, &ax.extent.hi)
    }

    /// Indicator of the core box (one on every core interval, zero outside).
    pub fn core_indicator(&self) -> PPFunction {
        let factors: Vec<PPFunction> = self
            .axes
            .iter()
            .map(|a| match &a.kind {
                AxisKind::Line => PPFunction::univariate(
                    AxisSpec::line(alloc::vec![a.extent.lo.clone(), a.extent.hi.clone()]),
                    alloc::vec![
                        crate::exactpp::Poly::zero(),
                        crate::exactpp::Poly::one(),
                        crate::exactpp::Poly::zero()
                    ],
                )
                .expect("valid indicator"),
                k => PPFunction::constant_on(core::slice::from_ref(k), Rational::one()),
            })
            .collect();
        PPFunction::tensor(&factors)
    }

    fn check_function(&self, f: &PPFunction) -> Result<()> {
        if f.dim() != self.dim() || f.axes().iter().zip(&self.axes).any(|(a, b)| a.kind != b.kind) {
            return Err(Error::DomainMismatch(format!(
                "function axes {:?} do not match domain axes {:?}",
                f.kinds(),
                self.kinds()
            )));
        }
        Ok(())
    }
}

/// Sign of `dx_a` moved past the elements of `mask` below `a`.
pub fn insertion_sign(mask: Mask, a: usize) -> bool {
    (mask as u16 & ((1u16 << a) - 1)).count_ones() % 2 == 1
}

/// Sign of `dx_I ∧ dx_J` relative to `dx_{I ∪ J}`; `None` if they overlap.
pub fn merge_sign(i: Mask, j: Mask) -> Option<bool> {
    if i & j != 0 {
        return None;
    }
    let mut neg = false;
    for b in 0..8 {
        if j & (1 << b) != 0 {
            // elements of I above b must jump over dx_b
            let above = (i as u16) >> (b + 1);
            neg ^= above.count_ones() % 2 == 1;
        }
    }
    Some(neg)
}

pub fn mask_of(axes: &[usize]) -> Mask {
    axes.iter().fold(0, |m, &a| m | (1 << a))
}

pub fn mask_axes(m: Mask) -> Vec<usize> {
    (0..8).filter(|&a| m & (1 << a) != 0).collect()
}

/// Differential form of fixed degree over a [`Domain`].
#[derive(Clone, Debug)]
pub struct Form {
    domain: Arc<Domain>,
    degree: usize,
    components: BTreeMap<Mask, PPFunction>,
}

impl Form {
    pub fn zero(domain: &Arc<Domain>, degree: usize) -> Form {
        Form { domain: domain.clone(), degree, components: BTreeMap::new() }
    }

    pub fn function(domain: &Arc<Domain>, f: PPFunction) -> Result<Form> {
        Form::from_components(domain, 0, [(0, f)])
    }

    /// `f dx_{axes}`; `axes` must be increasing manifold axes.
    pub fn monomial(domain: &Arc<Domain>, f: PPFunction, axes: &[usize]) -> Result<Form> {
        for w in axes.windows(2) {
            if w[0] >= w[1] {
                return Err(Error::Invalid("form index set must be strictly increasing".into()));
            }
        }
        Form::from_components(domain, axes.len(), [(mask_of(axes), f)])
    }

    pub fn from_components<I: IntoIterator<Item = (Mask, PPFunction)>>(
        domain: &Arc<Domain>,
        degree: usize,
        comps: I,
    ) -> Result<Form> {
        let mm = domain.manifold_mask();
        let mut out = Form::zero(domain, degree);
        for (m, f) in comps {
            if m.count_ones() as usize != degree {
                return Err(Error::Invalid(format!("index set {:#b} has wrong size for degree {}", m, degree)));
            }
            if m & !mm != 0 {
                return Err(Error::Invalid(format!("index set {:#b} uses a parameter or missing axis", m)));
            }
            domain.check_function(&f)?;
            out.add_component(m, f)?;
        }
        Ok(out)
    }

    pub fn domain(&self) -> &Arc<Domain> {
        &self.domain
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn components(&self) -> &BTreeMap<Mask, PPFunction> {
        &self.components
    }

    pub fn component(&self, m: Mask) -> Option<&PPFunction> {
        self.components.get(&m)
    }

    /// Component on `m`, or the zero function.
    pub fn coeff(&self, m: Mask) -> PPFunction {
        self.components.get(&m).cloned().unwrap_or_else(|| self.domain.zero_fn())
    }

    pub fn is_zero(&self) -> bool {
        self.components.is_empty()
    }

    /// Adds `f` to the component on `m`, keeping only nonzero components.
    pub fn add_component(&mut self, m: Mask, f: PPFunction) -> Result<()> {
        if f.is_zero() {
            return Ok(());
        }
        let v = match self.components.remove(&m) {
            Some(g) => g.add(&f)?,
            None => f,
        };
        if !v.is_zero() {
            self.components.insert(m, v);
        }
        Ok(())
    }

    fn check_same(&self, other: &Form) -> Result<()> {
        if !Arc::ptr_eq(&self.domain, &other.domain) && self.domain != other.domain {
            return Err(Error::DomainMismatch("forms live on different domains".into()));
        }
        Ok(())
    }

    pub fn add(&self, other: &Form) -> Result<Form> {
        self.check_same(other)?;
        if self.degree != other.degree {
            return Err(Error::Invalid(format!("degree {} + degree {}", self.degree, other.degree)));
        }
        let mut out = self.clone();
        for (m, f) in &other.components {
            out.add_component(*m, f.clone())?;
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Form) -> Result<Form> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Form {
        self.map_components(|f| f.neg())
    }

    pub fn scale(&self, c: &Rational) -> Form {
        if c.is_zero() {
            return Form::zero(&self.domain, self.degree);
        }
        self.map_components(|f| f.scale(c))
    }

    fn map_components(&self, g: impl Fn(&PPFunction) -> PPFunction) -> Form {
        Form {
            domain: self.domain.clone(),
            degree: self.degree,
            components: self.components.iter().map(|(m, f)| (*m, g(f))).filter(|(_, f)| !f.is_zero()).collect(),
        }
    }

    /// Applies a fallible map to every component.
    pub fn try_map(&self, g: impl Fn(&PPFunction) -> Result<PPFunction>) -> Result<Form> {
        let mut components = BTreeMap::new();
        for (m, f) in &self.components {
            let v = g(f)?;
            if !v.is_zero() {
                components.insert(*m, v);
            }
        }
        Ok(Form { domain: self.domain.clone(), degree: self.degree, components })
    }

    /// Multiplies every coefficient by the function `f`.
    pub fn mul_fn(&self, f: &PPFunction) -> Result<Form> {
        self.domain.check_function(f)?;
        self.try_map(|g| g.mul(f))
    }

    /// Exact equality after grid refinement.
    pub fn equals(&self, other: &Form) -> bool {
        if self.check_same(other).is_err() || self.degree != other.degree {
            return false;
        }
        self.components.len() == other.components.len()
            && self.components.iter().all(|(m, f)| other.components.get(m).is_some_and(|g| f.equals(g)))
    }

    /// Exterior derivative along the manifold axes.
    pub fn d(&self) -> Form {
        let mut out = Form::zero(&self.domain, self.degree + 1);
        for a in self.domain.manifold_axes() {
            for (m, f) in &self.components {
                if m & (1 << a) != 0 {
                    continue;
                }
                let df = f.partial_derivative(a).expect("axis in range");
                if df.is_zero() {
                    continue;
                }
                let df = if insertion_sign(*m, a) { df.neg() } else { df };
                out.add_component(m | (1 << a), df).expect("same axes");
            }
        }
        out
    }

    pub fn wedge(&self, other: &Form) -> Result<Form> {
        self.check_same(other)?;
        let mut out = Form::zero(&self.domain, self.degree + other.degree);
        for (i, f) in &self.components {
            for (j, g) in &other.components {
                if let Some(neg) = merge_sign(*i, *j) {
                    let p = f.mul(g)?;
                    out.add_component(i | j, if neg { p.neg() } else { p })?;
                }
            }
        }
        Ok(out)
    }

    /// Checks `dω = 0` exactly, naming an offending component otherwise.
    pub fn check_closed(&self) -> Result<()> {
        let d = self.d();
        match d.components.keys().next() {
            None => Ok(()),
            Some(m) => Err(Error::NotClosed(format!("dx{:?}", mask_axes(*m)))),
        }
    }

    /// Integral of the `(i, j)` component over the coordinate 2-torus through
    /// `basepoint` (values of all other axes, in axis order).
    pub fn period(&self, i: usize, j: usize, basepoint: &[Rational]) -> Result<Rational> {
        if self.degree != 2 {
            return Err(Error::Invalid("periods are defined for 2-forms".into()));
        }
        let (i, j) = if i < j { (i, j) } else { (j, i) };
        for &a in &[i, j] {
            let ax = self.domain.axes.get(a).ok_or(Error::AxisOutOfRange { axis: a, dim: self.domain.dim() })?;
            if !ax.kind.is_circle() || ax.role != Role::Manifold {
                return Err(Error::Invalid(format!("axis {} is not a manifold circle axis", a)));
            }
        }
        if i == j {
            return Err(Error::Invalid("period needs two distinct axes".into()));
        }
        if basepoint.len() + 2 != self.domain.dim() {
            return Err(Error::Invalid(format!(
                "basepoint needs {} values, got {}",
                self.domain.dim() - 2,
                basepoint.len()
            )));
        }
        self.check_closed()?;
        let mut f = self.coeff(mask_of(&[i, j]));
        let others: Vec<usize> = (0..self.domain.dim()).filter(|&a| a != i && a != j).collect();
        for (k, &a) in others.iter().enumerate().rev() {
            f = f.restrict(a, &basepoint[k])?;
        }
        let v = f.integrate_axis_full(1)?.integrate_axis_full(0)?;
        Ok(v.as_constant().expect("no axes left"))
    }

    /// Exact integral of a top-degree form over the manifold axes; a function
    /// of the parameter axes.
    pub fn integrate_top(&self) -> Result<PPFunction> {
        let n = self.domain.n();
        if self.degree != n {
            return Err(Error::Invalid(format!("integrate_top on a {}-form, n = {}", self.degree, n)));
        }
        let mut f = self.coeff(self.domain.manifold_mask());
        for a in self.domain.manifold_axes().into_iter().rev() {
            f = f.integrate_axis_full(a)?;
        }
        Ok(f)
    }

    /// True if every coefficient vanishes outside the box (per-axis `None` = unrestricted).
    pub fn vanishes_outside(&self, region: &[Option<Interval>]) -> bool {
        self.components.values().all(|f| f.vanishes_outside(region))
    }

    pub fn vanishes_on(&self, region: &[Option<Interval>]) -> bool {
        self.components.values().all(|f| f.vanishes_on(region))
    }

    /// True if all coefficients have zero tails on every line axis.
    pub fn is_compactly_supported(&self) -> bool {
        self.components.values().all(|f| f.is_compactly_supported())
    }

    /// Total number of stored polynomial cells, a size measure.
    pub fn size(&self) -> usize {
        self.components.values().map(|f| f.cell_count()).sum()
    }

    pub(crate) fn with_degree(domain: &Arc<Domain>, degree: usize, components: BTreeMap<Mask, PPFunction>) -> Form {
        Form { domain: domain.clone(), degree, components }
    }
}

impl PartialEq for Form {
    fn eq(&self, other: &Self) -> bool {
        self.equals(other)
    }
}

/// Map `M -> R^D` with piecewise-polynomial coordinates.
#[derive(Clone, Debug)]
pub struct PPMap {
    pub domain: Arc<Domain>,
    pub coordinates: Vec<PPFunction>,
    pub declared_embedding: bool,
}

impl PPMap {
    pub fn new(domain: &Arc<Domain>, coordinates: Vec<PPFunction>, declared_embedding: bool) -> Result<PPMap> {
        for c in &coordinates {
            domain.check_function(c)?;
        }
        if coordinates.len() < domain.n() {
            return Err(Error::Invalid(format!(
                "target dimension {} below manifold dimension {}",
                coordinates.len(),
                domain.n()
            )));
        }
        Ok(PPMap { domain: domain.clone(), coordinates, declared_embedding })
    }

    pub fn target_dim(&self) -> usize {
        self.coordinates.len()
    }

    /// The standard symplectic form `sum dx_{2i-1} ∧ dx_{2i}` on `R^D` as a coefficient array.
    pub fn standard_symplectic(dim: usize) -> Vec<Vec<Rational>> {
        let mut c = alloc::vec![alloc::vec![Rational::zero(); dim]; dim];
        for i in 0..dim / 2 {
            c[2 * i][2 * i + 1] = Rational::one();
            c[2 * i + 1][2 * i] = -Rational::one();
        }
        c
    }

    /// Pullback of the constant 2-form `sum_{i<j} c_ij dy_i ∧ dy_j`.
    pub fn pullback_constant_form(&self, c: &[Vec<Rational>]) -> Result<Form> {
        let dim = self.target_dim();
        if c.len() != dim || c.iter().any(|r| r.len() != dim) {
            return Err(Error::Invalid(format!("target form is not {0}x{0}", dim)));
        }
        for i in 0..dim {
            for j in 0..dim {
                if c[i][j] != -&c[j][i] {
                    return Err(Error::Invalid("target form coefficients are not antisymmetric".into()));
                }
            }
        }
        let dphi: Vec<Form> = self
            .coordinates
            .iter()
            .map(|f| Form::function(&self.domain, f.clone()).map(|g| g.d()))
            .collect::<Result<_>>()?;
        let mut out = Form::zero(&self.domain, 2);
        for i in 0..dim {
            for j in i + 1..dim {
                if c[i][j].is_zero() || dphi[i].is_zero() || dphi[j].is_zero() {
                    continue;
                }
                out = out.add(&dphi[i].wedge(&dphi[j])?.scale(&c[i][j]))?;
            }
        }
        Ok(out)
    }

    /// Pullback of the standard symplectic form.
    pub fn pullback_standard(&self) -> Result<Form> {
        self.pullback_constant_form(&PPMap::standard_symplectic(self.target_dim()))
    }
}
