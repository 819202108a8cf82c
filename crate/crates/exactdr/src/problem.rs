//! Problem specifications: the JSON input of the command-line tool.

use std::collections::BTreeMap;
use std::sync::Arc;

use schemars::JsonSchema;
use serde::{Deserialize, Serialize};

use exactdr_core::cover::Cover;
use exactdr_core::embedder::Relative;
use exactdr_core::exactpp::{bspline_on, smoothstep, AxisKind, Interval, PPFunction};
use exactdr_core::forms::{mask_of, Domain, Form, PPMap};
use exactdr_core::{Error, Rational, Result};

use crate::serial::{check_index_set, DomainData, Fraction, PPFunctionData};

/// A complete problem: domain, cover, named forms and maps, the task to run
/// and optional relative data.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct ProblemSpec {
    pub domain: DomainData,
    /// Required by every task except `periods`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cover: Option<CoverSpec>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub forms: BTreeMap<String, FormExpr>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub maps: BTreeMap<String, MapSpec>,
    pub task: TaskSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub relative: Option<RelativeSpec>,
}

/// Closed interval `[lo, hi]`.
pub type IntervalData = [Fraction; 2];

fn interval(iv: &IntervalData) -> Interval {
    Interval::new(iv[0].0.clone(), iv[1].0.clone())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum CoverSpec {
    /// Telescoping smooth steps, `C^degree`, `resolution` cells per manifold
    /// axis (one entry for all axes, or one per axis). Circles need at least 3.
    Plateau { degree: u32, resolution: Vec<usize> },
    /// Cardinal B-splines of the given degree. Circles need at least
    /// `2 degree + 1` cells.
    Bspline { degree: u32, resolution: Vec<usize> },
    /// Charts (one interval per manifold axis) with a user-supplied partition
    /// of unity, validated exactly.
    Explicit { charts: Vec<Vec<IntervalData>>, pou: Vec<FunctionExpr> },
}

/// Univariate factor of a tensor product, on the axis at its position.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum FactorExpr {
    One,
    /// Cardinal B-spline with uniform knots spanning `[lo, hi]`; periodized on
    /// a circle axis.
    Bspline {
        degree: u32,
        lo: Fraction,
        hi: Fraction,
    },
    /// `C^degree` step from 0 below `lo` to 1 above `hi` (line axes only).
    Smoothstep {
        degree: u32,
        lo: Fraction,
        hi: Fraction,
    },
    /// Explicit univariate data.
    Pp(PPFunctionData),
}

/// A function on every axis of the domain.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum FunctionExpr {
    Constant(Fraction),
    /// The coordinate of a line axis, clamped to the axis extent.
    Coordinate(usize),
    /// Product of one factor per axis.
    Tensor(Vec<FactorExpr>),
    Sum(Vec<FunctionExpr>),
    Product(Vec<FunctionExpr>),
    Scale {
        by: Fraction,
        f: Box<FunctionExpr>,
    },
    Pp(PPFunctionData),
}

/// `coeff · dx_{axes[0]} ∧ ⋯` over ambient axis indices (parameters included).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct TermExpr {
    pub axes: Vec<usize>,
    pub coeff: FunctionExpr,
}

/// A differential form. Only manifold differentials may appear: forms are
/// families over the parameter axes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum FormExpr {
    Components {
        degree: usize,
        terms: Vec<TermExpr>,
    },
    /// Fiberwise exterior derivative.
    D(Box<FormExpr>),
    Sum(Vec<FormExpr>),
    Scale {
        by: Fraction,
        form: Box<FormExpr>,
    },
    Wedge(Vec<FormExpr>),
    /// Pullback of the standard symplectic form along a named map.
    Pullback(String),
    /// Another named form.
    Ref(String),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct MapSpec {
    pub coordinates: Vec<FunctionExpr>,
    #[serde(default)]
    pub declared_embedding: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
#[serde(tag = "command", rename_all = "kebab-case", deny_unknown_fields)]
pub enum TaskSpec {
    /// Primitive of a closed form. `quiet` is a parameter box on which the
    /// form vanishes; the primitive then vanishes there too.
    Primitive {
        form: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        quiet: Option<Vec<IntervalData>>,
    },
    CheckExact {
        form: String,
    },
    /// Appends coordinates to `map` so that it pulls the standard symplectic
    /// form back to `target`.
    Embed {
        map: String,
        target: String,
    },
    /// Periods of a 2-form over coordinate 2-tori. Defaults: every pair of
    /// circle axes, basepoint 0 on the remaining axes.
    Periods {
        form: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        cycles: Option<Vec<[usize; 2]>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        basepoint: Option<Vec<Fraction>>,
    },
}

impl TaskSpec {
    pub fn command(&self) -> &'static str {
        match self {
            TaskSpec::Primitive { .. } => "primitive",
            TaskSpec::CheckExact { .. } => "check-exact",
            TaskSpec::Embed { .. } => "embed",
            TaskSpec::Periods { .. } => "periods",
        }
    }
}

/// The family is standard over the parameter box `u`; appended coordinates
/// vanish over `b`. `psi` defaults to a `C^degree` plateau (degree 1).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct RelativeSpec {
    pub b: Vec<IntervalData>,
    pub u: Vec<IntervalData>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub degree: Option<u32>,
    /// Function of the parameter axes only, one on `b` and zero outside `u`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub psi: Option<FunctionExpr>,
}

/// Axis kinds and extents that expressions are evaluated against.
struct Axes {
    kinds: Vec<AxisKind>,
    extents: Vec<Interval>,
}

impl Axes {
    fn of(domain: &Domain) -> Axes {
        Axes { kinds: domain.kinds(), extents: domain.axes().iter().map(|a| a.extent.clone()).collect() }
    }

    fn factor(&self, a: usize, f: &FactorExpr) -> Result<PPFunction> {
        let kind = &self.kinds[a];
        match f {
            FactorExpr::One => Ok(PPFunction::constant_on(std::slice::from_ref(kind), Rational::one())),
            FactorExpr::Bspline { degree, lo, hi } => {
                let b = bspline_on(*degree, &lo.0, &hi.0)?;
                match kind {
                    AxisKind::Line => Ok(b),
                    AxisKind::Circle { period } => b.periodize(0, period),
                }
            }
            FactorExpr::Smoothstep { degree, lo, hi } => match kind {
                AxisKind::Line => smoothstep(*degree, &lo.0, &hi.0),
                AxisKind::Circle { .. } => Err(Error::Invalid(format!("axis {a}: a step is not periodic"))),
            },
            FactorExpr::Pp(d) => {
                let g = d.build()?;
                if g.kinds() != [kind.clone()] {
                    return Err(Error::AxisMismatch(format!("factor {a} does not match the axis kind")));
                }
                Ok(g)
            }
        }
    }

    fn function(&self, f: &FunctionExpr) -> Result<PPFunction> {
        match f {
            FunctionExpr::Constant(c) => Ok(PPFunction::constant_on(&self.kinds, c.0.clone())),
            FunctionExpr::Coordinate(a) => {
                let iv = self.extents.get(*a).ok_or(Error::AxisOutOfRange { axis: *a, dim: self.kinds.len() })?;
                PPFunction::clamped_coordinate(&self.kinds, *a, &iv.lo, &iv.hi)
            }
            FunctionExpr::Tensor(fs) => {
                if fs.len() != self.kinds.len() {
                    return Err(Error::AxisMismatch(format!(
                        "tensor has {} factors for {} axes",
                        fs.len(),
                        self.kinds.len()
                    )));
                }
                let parts = fs.iter().enumerate().map(|(a, f)| self.factor(a, f)).collect::<Result<Vec<_>>>()?;
                Ok(PPFunction::tensor(&parts))
            }
            FunctionExpr::Sum(fs) => {
                let mut acc = PPFunction::zero_on(&self.kinds);
                for f in fs {
                    acc = acc.add(&self.function(f)?)?;
                }
                Ok(acc)
            }
            FunctionExpr::Product(fs) => {
                let mut acc = PPFunction::constant_on(&self.kinds, Rational::one());
                for f in fs {
                    acc = acc.mul(&self.function(f)?)?;
                }
                Ok(acc)
            }
            FunctionExpr::Scale { by, f } => Ok(self.function(f)?.scale(&by.0)),
            FunctionExpr::Pp(d) => {
                let g = d.build()?;
                if g.kinds() != self.kinds {
                    return Err(Error::AxisMismatch("pp data does not match the domain axes".into()));
                }
                Ok(g)
            }
        }
    }
}

/// A spec with every named object built and validated.
#[derive(Clone, Debug)]
pub struct Problem {
    pub domain: Arc<Domain>,
    pub cover: Option<Cover>,
    pub forms: BTreeMap<String, Form>,
    pub maps: BTreeMap<String, PPMap>,
    pub relative: Option<Relative>,
}

struct FormBuilder<'a> {
    spec: &'a ProblemSpec,
    domain: &'a Arc<Domain>,
    axes: Axes,
    maps: &'a BTreeMap<String, PPMap>,
    done: BTreeMap<String, Form>,
    active: Vec<String>,
}

impl FormBuilder<'_> {
    fn named(&mut self, name: &str) -> Result<Form> {
        if let Some(w) = self.done.get(name) {
            return Ok(w.clone());
        }
        if self.active.iter().any(|n| n == name) {
            return Err(Error::Invalid(format!("form {name:?} refers to itself")));
        }
        let expr = self.spec.forms.get(name).ok_or_else(|| Error::Invalid(format!("no form named {name:?}")))?;
        self.active.push(name.to_string());
        let w = self.eval(expr).map_err(|e| Error::Invalid(format!("form {name:?}: {e}")))?;
        self.active.pop();
        self.done.insert(name.to_string(), w.clone());
        Ok(w)
    }

    fn eval(&mut self, e: &FormExpr) -> Result<Form> {
        match e {
            FormExpr::Components { degree, terms } => {
                let comps = terms
                    .iter()
                    .map(|t| {
                        check_index_set(&t.axes, *degree, self.domain.dim())?;
                        Ok((mask_of(&t.axes), self.axes.function(&t.coeff)?))
                    })
                    .collect::<Result<Vec<_>>>()?;
                Form::from_components(self.domain, *degree, comps)
            }
            FormExpr::D(w) => Ok(self.eval(w)?.d()),
            FormExpr::Sum(ws) => {
                let mut it = ws.iter();
                let first = it.next().ok_or_else(|| Error::Invalid("empty sum of forms".into()))?;
                let mut acc = self.eval(first)?;
                for w in it {
                    acc = acc.add(&self.eval(w)?)?;
                }
                Ok(acc)
            }
            FormExpr::Scale { by, form } => Ok(self.eval(form)?.scale(&by.0)),
            FormExpr::Wedge(ws) => {
                let mut it = ws.iter();
                let first = it.next().ok_or_else(|| Error::Invalid("empty wedge".into()))?;
                let mut acc = self.eval(first)?;
                for w in it {
                    acc = acc.wedge(&self.eval(w)?)?;
                }
                Ok(acc)
            }
            FormExpr::Pullback(m) => {
                self.maps.get(m).ok_or_else(|| Error::Invalid(format!("no map named {m:?}")))?.pullback_standard()
            }
            FormExpr::Ref(name) => self.named(name),
        }
    }
}

impl ProblemSpec {
    pub fn parse(text: &str) -> std::result::Result<ProblemSpec, serde_json::Error> {
        serde_json::from_str(text)
    }

    /// Builds the domain, cover, maps, forms and relative data, checking every
    /// exact constraint along the way.
    pub fn build(&self) -> Result<Problem> {
        let domain = self.domain.build()?;
        let axes = Axes::of(&domain);
        let cover = match &self.cover {
            None => None,
            Some(c) => Some(self.build_cover(&domain, &axes, c)?),
        };
        let mut maps = BTreeMap::new();
        for (name, m) in &self.maps {
            let coords = m
                .coordinates
                .iter()
                .map(|f| axes.function(f))
                .collect::<Result<Vec<_>>>()
                .map_err(|e| Error::Invalid(format!("map {name:?}: {e}")))?;
            maps.insert(name.clone(), PPMap::new(&domain, coords, m.declared_embedding)?);
        }
        let mut fb =
            FormBuilder { spec: self, domain: &domain, axes, maps: &maps, done: BTreeMap::new(), active: Vec::new() };
        for name in self.forms.keys() {
            fb.named(name)?;
        }
        let forms = fb.done;
        let relative = match &self.relative {
            None => None,
            Some(r) => Some(self.build_relative(&domain, r)?),
        };
        Ok(Problem { domain, cover, forms, maps, relative })
    }

    fn build_cover(&self, domain: &Arc<Domain>, axes: &Axes, c: &CoverSpec) -> Result<Cover> {
        match c {
            CoverSpec::Plateau { degree, resolution } => Cover::plateau(domain, *degree, resolution),
            CoverSpec::Bspline { degree, resolution } => Cover::bspline(domain, *degree, resolution),
            CoverSpec::Explicit { charts, pou } => {
                let charts = charts.iter().map(|c| c.iter().map(interval).collect()).collect();
                let pou = pou.iter().map(|f| axes.function(f)).collect::<Result<Vec<_>>>()?;
                Cover::from_parts(domain, charts, pou)
            }
        }
    }

    fn build_relative(&self, domain: &Domain, r: &RelativeSpec) -> Result<Relative> {
        let b: Vec<Interval> = r.b.iter().map(interval).collect();
        let u: Vec<Interval> = r.u.iter().map(interval).collect();
        let rel = match (&r.psi, r.degree) {
            (Some(_), Some(_)) => return Err(Error::Invalid("give either psi or degree, not both".into())),
            (None, d) => Relative::with_plateau(b, u, d.unwrap_or(1))?,
            (Some(f), None) => {
                let params = domain.parameter_axes();
                let sub = Axes {
                    kinds: params.iter().map(|&a| domain.axes()[a].kind.clone()).collect(),
                    extents: params.iter().map(|&a| domain.axes()[a].extent.clone()).collect(),
                };
                Relative { b, u, psi: sub.function(f)? }
            }
        };
        rel.psi_on(domain)?;
        Ok(rel)
    }
}

impl Problem {
    pub fn form(&self, name: &str) -> Result<&Form> {
        self.forms.get(name).ok_or_else(|| Error::Invalid(format!("no form named {name:?}")))
    }

    pub fn map(&self, name: &str) -> Result<&PPMap> {
        self.maps.get(name).ok_or_else(|| Error::Invalid(format!("no map named {name:?}")))
    }

    pub fn cover(&self) -> Result<&Cover> {
        self.cover.as_ref().ok_or_else(|| Error::Invalid("this task needs a cover block".into()))
    }
}

/// JSON Schema of [`ProblemSpec`].
pub fn schema() -> schemars::schema::RootSchema {
    schemars::schema_for!(ProblemSpec)
}
