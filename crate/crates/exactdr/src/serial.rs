//! Exact text representation of functions, forms, maps and cochains.
//!
//! Every number is a string `"num/den"` (or an integer), so a value written
//! and read back is identical, and writing it again gives the same bytes.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use schemars::gen::SchemaGenerator;
use schemars::schema::{InstanceType, Schema, SchemaObject, StringValidation};
use schemars::JsonSchema;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use exactdr_core::cechdr::{Cochain, Entry};
use exactdr_core::cover::Nerve;
use exactdr_core::exactpp::{AxisKind, AxisSpec, Cell, Interval, Mono, PPFunction, Poly, MAX_VARS};
use exactdr_core::forms::{mask_axes, mask_of, Domain, DomainAxis, Form, PPMap, Role};
use exactdr_core::{Error, Rational, Result};

/// An exact rational written as a string.
#[derive(Clone, PartialEq, Eq)]
pub struct Fraction(pub Rational);

impl fmt::Debug for Fraction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl From<&Rational> for Fraction {
    fn from(r: &Rational) -> Self {
        Fraction(r.clone())
    }
}

impl Serialize for Fraction {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(&self.0)
    }
}

impl<'de> Deserialize<'de> for Fraction {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        if s.contains('.') {
            return Err(serde::de::Error::custom(format!("{s:?}: write fractions as \"num/den\", not decimals")));
        }
        Rational::parse(&s).map(Fraction).map_err(serde::de::Error::custom)
    }
}

impl JsonSchema for Fraction {
    fn schema_name() -> String {
        "Fraction".into()
    }

    fn json_schema(_: &mut SchemaGenerator) -> Schema {
        SchemaObject {
            instance_type: Some(InstanceType::String.into()),
            string: Some(Box::new(StringValidation {
                pattern: Some(r"^\s*[-+]?[0-9]+\s*(/\s*[0-9]+\s*)?$".into()),
                ..Default::default()
            })),
            metadata: Some(Box::new(schemars::schema::Metadata {
                description: Some("Exact rational number such as \"3\", \"-1/4\".".into()),
                ..Default::default()
            })),
            ..Default::default()
        }
        .into()
    }
}

fn fractions(v: &[Rational]) -> Vec<Fraction> {
    v.iter().map(Fraction::from).collect()
}

fn rationals(v: &[Fraction]) -> Vec<Rational> {
    v.iter().map(|f| f.0.clone()).collect()
}

/// Breakpoint grid of one axis.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum AxisData {
    Line {
        breakpoints: Vec<Fraction>,
    },
    /// Breakpoints lie in `[0, period)`; `0` is always a breakpoint.
    Circle {
        period: Fraction,
        breakpoints: Vec<Fraction>,
    },
}

impl From<&AxisSpec> for AxisData {
    fn from(a: &AxisSpec) -> Self {
        match &a.kind {
            AxisKind::Line => AxisData::Line { breakpoints: fractions(&a.breakpoints) },
            AxisKind::Circle { period } => {
                AxisData::Circle { period: period.into(), breakpoints: fractions(&a.breakpoints) }
            }
        }
    }
}

impl AxisData {
    pub fn build(&self) -> Result<AxisSpec> {
        // the constructors normalize; data must already be normalized since
        // cell indices refer to the given order
        let (AxisData::Line { breakpoints } | AxisData::Circle { breakpoints, .. }) = self;
        for w in breakpoints.windows(2) {
            if w[0].0 >= w[1].0 {
                return Err(Error::InvalidData(format!("breakpoints not increasing: {} >= {}", w[0].0, w[1].0)));
            }
        }
        if let AxisData::Circle { period, breakpoints } = self {
            if breakpoints.iter().any(|b| b.0.is_negative() || b.0 >= period.0) {
                return Err(Error::InvalidData(format!("circle breakpoints must lie in [0, {})", period.0)));
            }
        }
        let a = match self {
            AxisData::Line { breakpoints } => AxisSpec::line(rationals(breakpoints)),
            AxisData::Circle { period, breakpoints } => AxisSpec::circle(period.0.clone(), rationals(breakpoints)),
        };
        a.validate()?;
        Ok(a)
    }
}

/// One monomial `coeff · x_0^e_0 · x_1^e_1 ⋯` in absolute coordinates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct TermData {
    pub coeff: Fraction,
    /// One exponent per axis.
    pub exps: Vec<u32>,
}

/// Polynomial on one grid cell. On a line axis, cell `0` is the lower tail,
/// cell `i` is `[b_{i-1}, b_i]` and the last cell is the upper tail. On a
/// circle, cell `i` is `[b_i, b_{i+1}]` with wrap-around.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct CellData {
    pub index: Vec<u16>,
    pub terms: Vec<TermData>,
}

/// Piecewise polynomial on a product grid; cells not listed are zero.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct PPFunctionData {
    pub axes: Vec<AxisData>,
    pub cells: Vec<CellData>,
}

impl From<&PPFunction> for PPFunctionData {
    fn from(f: &PPFunction) -> Self {
        let n = f.dim();
        let cells = f
            .cells()
            .iter()
            .map(|(c, p)| CellData {
                index: c[..n].to_vec(),
                terms: p
                    .terms()
                    .iter()
                    .map(|(m, v)| TermData { coeff: v.into(), exps: (0..n).map(|a| m.exp(a)).collect() })
                    .collect(),
            })
            .collect();
        PPFunctionData { axes: f.axes().iter().map(AxisData::from).collect(), cells }
    }
}

impl PPFunctionData {
    pub fn build(&self) -> Result<PPFunction> {
        let n = self.axes.len();
        if n > MAX_VARS {
            return Err(Error::InvalidData(format!("at most {MAX_VARS} axes")));
        }
        let axes = self.axes.iter().map(AxisData::build).collect::<Result<Vec<_>>>()?;
        let mut cells = BTreeMap::new();
        for (i, c) in self.cells.iter().enumerate() {
            if c.index.len() != n {
                return Err(Error::InvalidData(format!("cell {i}: index has {} entries, need {n}", c.index.len())));
            }
            let mut key: Cell = [0; MAX_VARS];
            key[..n].copy_from_slice(&c.index);
            let mut terms = Vec::with_capacity(c.terms.len());
            for t in &c.terms {
                if t.exps.len() != n {
                    return Err(Error::InvalidData(format!(
                        "cell {i}: a term has {} exponents, need {n}",
                        t.exps.len()
                    )));
                }
                if t.exps.iter().any(|&e| e > 255) {
                    return Err(Error::InvalidData(format!("cell {i}: exponent above 255")));
                }
                terms.push((Mono::from_exps(&t.exps), t.coeff.0.clone()));
            }
            if cells.insert(key, Poly::from_terms(terms)).is_some() {
                return Err(Error::InvalidData(format!("cell {:?} listed twice", c.index)));
            }
        }
        PPFunction::from_cells(axes, cells)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
#[serde(rename_all = "snake_case")]
pub enum RoleData {
    #[default]
    Manifold,
    Parameter,
}

/// One axis of a domain. Parameter axes must come before manifold axes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DomainAxisData {
    Line {
        lo: Fraction,
        hi: Fraction,
        #[serde(default)]
        role: RoleData,
    },
    Circle {
        period: Fraction,
        #[serde(default)]
        role: RoleData,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct DomainData {
    pub axes: Vec<DomainAxisData>,
}

impl From<&Domain> for DomainData {
    fn from(d: &Domain) -> Self {
        let axes = d
            .axes()
            .iter()
            .map(|a| {
                let role = match a.role {
                    Role::Manifold => RoleData::Manifold,
                    Role::Parameter => RoleData::Parameter,
                };
                match &a.kind {
                    AxisKind::Line => {
                        DomainAxisData::Line { lo: (&a.extent.lo).into(), hi: (&a.extent.hi).into(), role }
                    }
                    AxisKind::Circle { period } => DomainAxisData::Circle { period: period.into(), role },
                }
            })
            .collect();
        DomainData { axes }
    }
}

impl DomainData {
    pub fn build(&self) -> Result<Arc<Domain>> {
        let mut seen_manifold = false;
        let mut axes = Vec::with_capacity(self.axes.len());
        for (i, a) in self.axes.iter().enumerate() {
            let (kind, extent, role) = match a {
                DomainAxisData::Line { lo, hi, role } => {
                    (AxisKind::Line, Interval::new(lo.0.clone(), hi.0.clone()), *role)
                }
                DomainAxisData::Circle { period, role } => {
                    if period.0 <= Rational::zero() {
                        return Err(Error::Invalid(format!("axis {i}: period must be positive")));
                    }
                    (AxisKind::circle(period.0.clone()), Interval::new(Rational::zero(), period.0.clone()), *role)
                }
            };
            let role = match role {
                RoleData::Manifold => {
                    seen_manifold = true;
                    Role::Manifold
                }
                RoleData::Parameter => {
                    if seen_manifold {
                        return Err(Error::Invalid(format!("axis {i}: parameter axes must precede manifold axes")));
                    }
                    if !matches!(kind, AxisKind::Line) {
                        return Err(Error::Invalid(format!("axis {i}: parameter axes must be lines")));
                    }
                    Role::Parameter
                }
            };
            axes.push(DomainAxis { kind, extent, role });
        }
        Domain::new(axes)
    }
}

/// `coeff · dx_{axes[0]} ∧ dx_{axes[1]} ∧ ⋯` with increasing ambient axis indices.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct ComponentData {
    pub axes: Vec<usize>,
    pub coeff: PPFunctionData,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct FormData {
    pub domain: DomainData,
    pub degree: usize,
    pub components: Vec<ComponentData>,
}

fn components_of(w: &Form) -> Vec<ComponentData> {
    w.components().iter().map(|(m, f)| ComponentData { axes: mask_axes(*m), coeff: f.into() }).collect()
}

pub(crate) fn check_index_set(axes: &[usize], degree: usize, dim: usize) -> Result<()> {
    if axes.len() != degree {
        return Err(Error::Invalid(format!("index set {axes:?} does not have {degree} entries")));
    }
    if axes.windows(2).any(|w| w[0] >= w[1]) || axes.iter().any(|&a| a >= dim) {
        return Err(Error::Invalid(format!("index set {axes:?} must be increasing axis indices below {dim}")));
    }
    Ok(())
}

impl From<&Form> for FormData {
    fn from(w: &Form) -> Self {
        FormData { domain: w.domain().as_ref().into(), degree: w.degree(), components: components_of(w) }
    }
}

impl FormData {
    pub fn build(&self) -> Result<Form> {
        let dom = self.domain.build()?;
        let comps = self
            .components
            .iter()
            .map(|c| {
                check_index_set(&c.axes, self.degree, dom.dim())?;
                Ok((mask_of(&c.axes), c.coeff.build()?))
            })
            .collect::<Result<Vec<_>>>()?;
        Form::from_components(&dom, self.degree, comps)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct MapData {
    pub domain: DomainData,
    pub coordinates: Vec<PPFunctionData>,
    pub declared_embedding: bool,
}

impl From<&PPMap> for MapData {
    fn from(m: &PPMap) -> Self {
        MapData {
            domain: m.domain.as_ref().into(),
            coordinates: m.coordinates.iter().map(PPFunctionData::from).collect(),
            declared_embedding: m.declared_embedding,
        }
    }
}

impl MapData {
    pub fn build(&self) -> Result<PPMap> {
        let dom = self.domain.build()?;
        let coords = self.coordinates.iter().map(PPFunctionData::build).collect::<Result<Vec<_>>>()?;
        PPMap::new(&dom, coords, self.declared_embedding)
    }
}

/// Debugging dump of one cochain entry.
#[derive(Clone, Debug, Serialize, JsonSchema)]
#[serde(rename_all = "snake_case")]
pub enum EntryData {
    /// Top-row entry: a function of the parameter axes.
    Top(PPFunctionData),
    Form {
        degree: usize,
        components: Vec<ComponentData>,
    },
}

#[derive(Clone, Debug, Serialize, JsonSchema)]
pub struct CochainEntryData {
    /// Chart indices of the nerve simplex; empty in the augmentation column.
    pub simplex: Vec<usize>,
    pub value: EntryData,
}

/// Debugging dump of a Čech–de Rham cochain in bidegree `(-level, row)`.
#[derive(Clone, Debug, Serialize, JsonSchema)]
pub struct CochainData {
    pub level: isize,
    pub row: usize,
    pub entries: Vec<CochainEntryData>,
}

impl CochainData {
    pub fn dump(c: &Cochain, nerve: &Nerve) -> CochainData {
        let entries = c
            .entries
            .iter()
            .map(|(sid, e)| {
                let simplex = if c.p < 0 { Vec::new() } else { nerve.level(c.p as usize)[*sid].vertices.clone() };
                let value = match e {
                    Entry::Top(f) => EntryData::Top(f.into()),
                    Entry::Form(w) => EntryData::Form { degree: w.degree(), components: components_of(w) },
                };
                CochainEntryData { simplex, value }
            })
            .collect();
        CochainData { level: c.p, row: c.q, entries }
    }
}

/// Pretty JSON with a trailing newline.
pub fn to_text<T: Serialize>(x: &T) -> String {
    let mut s = serde_json::to_string_pretty(x).expect("serializable data");
    s.push('\n');
    s
}

pub fn function_to_text(f: &PPFunction) -> String {
    to_text(&PPFunctionData::from(f))
}

pub fn function_from_text(s: &str) -> std::result::Result<PPFunction, String> {
    let d: PPFunctionData = serde_json::from_str(s).map_err(|e| e.to_string())?;
    d.build().map_err(|e| e.to_string())
}

pub fn form_to_text(w: &Form) -> String {
    to_text(&FormData::from(w))
}

pub fn form_from_text(s: &str) -> std::result::Result<Form, String> {
    let d: FormData = serde_json::from_str(s).map_err(|e| e.to_string())?;
    d.build().map_err(|e| e.to_string())
}

pub fn map_to_text(m: &PPMap) -> String {
    to_text(&MapData::from(m))
}

pub fn map_from_text(s: &str) -> std::result::Result<PPMap, String> {
    let d: MapData = serde_json::from_str(s).map_err(|e| e.to_string())?;
    d.build().map_err(|e| e.to_string())
}
