//! The command pipelines behind the CLI. Each returns an [`Outcome`] that
//! carries its exit code, a machine-readable report and the math output.

use serde::Serialize;
use serde_json::{json, Value};

use exactdr_core::antidiff::{AntiDifferential, Exactness, NotExact};
use exactdr_core::cechdr::ComplexOptions;
use exactdr_core::embedder::{lift_family, vanishes_over, EmbeddingReport};
use exactdr_core::exactpp::Interval;
use exactdr_core::forms::Form;
use exactdr_core::{Error, Rational};

use crate::immersion::{spot_check, ImmersionCheck};
use crate::problem::{Problem, ProblemSpec, TaskSpec};
use crate::selftest::{self, SelftestOptions};
use crate::serial::{CochainData, FormData, Fraction, MapData};
use crate::twist;

pub const EXIT_OK: i32 = 0;
/// A verification inside a pipeline failed.
pub const EXIT_FAILED: i32 = 1;
/// Mathematical negative certificate: the form is not exact.
pub const EXIT_CERTIFICATE: i32 = 2;
pub const EXIT_INPUT: i32 = 64;

/// An error that ends a command before it produces an outcome.
#[derive(Clone, Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl Failure {
    pub fn input(message: impl Into<String>) -> Failure {
        Failure { code: EXIT_INPUT, message: message.into() }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Failure {
        let code = match e {
            Error::NotExact(_) => EXIT_CERTIFICATE,
            Error::Identity(_) | Error::Hypothesis(_) => EXIT_FAILED,
            _ => EXIT_INPUT,
        };
        Failure { code, message: e.to_string() }
    }
}

#[derive(Clone, Debug)]
pub struct Outcome {
    pub code: i32,
    pub status: String,
    /// Human-readable lines.
    pub summary: Vec<String>,
    pub details: Value,
    pub output: Option<Value>,
}

#[derive(Clone, Copy, Debug, Default)]
pub struct RunOptions {
    pub seed: u64,
    pub parallel: bool,
}

impl RunOptions {
    fn complex(&self) -> ComplexOptions {
        ComplexOptions { parallel: self.parallel, ..ComplexOptions::default() }
    }
}

#[derive(Clone, Debug, Serialize)]
struct PeriodData {
    cycle: [usize; 2],
    value: Fraction,
}

#[derive(Clone, Debug, Serialize)]
struct CertificateData {
    summary: String,
    periods: Vec<PeriodData>,
    residual_entries: usize,
    cech_class: CochainData,
    residual: CochainData,
}

fn certificate(ad: &AntiDifferential, c: &NotExact) -> CertificateData {
    let nerve = ad.complex().nerve();
    CertificateData {
        summary: c.summary(),
        periods: c.periods.iter().map(|((i, j), v)| PeriodData { cycle: [*i, *j], value: v.into() }).collect(),
        residual_entries: c.residual.entries.len(),
        cech_class: CochainData::dump(&c.cech_class, nerve),
        residual: CochainData::dump(&c.residual, nerve),
    }
}

fn not_exact(ad: &AntiDifferential, c: &NotExact, status: &str) -> Outcome {
    let cert = certificate(ad, c);
    Outcome {
        code: EXIT_CERTIFICATE,
        status: status.into(),
        summary: vec![format!("certificate: {}", cert.summary)],
        details: json!({ "certificate": cert }),
        output: None,
    }
}

fn intervals(v: &[[Fraction; 2]]) -> Vec<Interval> {
    v.iter().map(|iv| Interval::new(iv[0].0.clone(), iv[1].0.clone())).collect()
}

fn form_vanishes_over(w: &Form, b: &[Interval]) -> Result<bool, Error> {
    for f in w.components().values() {
        if !vanishes_over(f, w.domain(), b)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Parses and builds a spec, and checks that it asks for `command`.
pub fn load(text: &str, command: &str) -> Result<(ProblemSpec, Problem), Failure> {
    let spec = ProblemSpec::parse(text).map_err(|e| Failure::input(format!("spec does not match the schema: {e}")))?;
    if spec.task.command() != command {
        return Err(Failure::input(format!("spec task is {:?} but the command is {:?}", spec.task.command(), command)));
    }
    let problem = spec.build().map_err(|e| Failure::input(format!("invalid spec: {e}")))?;
    Ok((spec, problem))
}

/// Runs the task of a built spec.
pub fn run_task(spec: &ProblemSpec, p: &Problem, opts: &RunOptions) -> Result<Outcome, Failure> {
    match &spec.task {
        TaskSpec::Primitive { form, quiet } => primitive(p, form, quiet.as_deref(), opts),
        TaskSpec::CheckExact { form } => check_exact(p, form, opts),
        TaskSpec::Embed { map, target } => embed(p, map, target, opts),
        TaskSpec::Periods { form, cycles, basepoint } => periods(p, form, cycles.as_deref(), basepoint.as_deref()),
    }
}

fn primitive(p: &Problem, name: &str, quiet: Option<&[[Fraction; 2]]>, opts: &RunOptions) -> Result<Outcome, Failure> {
    let w = p.form(name)?;
    let ad = AntiDifferential::new(p.cover()?, &opts.complex())?;
    let sol = match ad.solve(w)? {
        Ok(s) => s,
        Err(c) => return Ok(not_exact(&ad, &c, "NOT_EXACT")),
    };
    let beta = sol.primitive;
    let exact_check = beta.d().equals(w);
    let mut summary =
        vec![format!("d(primitive) = {name}: {exact_check}"), format!("primitive size: {} terms", beta.size())];
    let mut quiet_check = None;
    if let Some(qb) = quiet {
        let b = intervals(qb);
        if !form_vanishes_over(w, &b)? {
            return Err(Failure::input(format!("{name} does not vanish over the quiet parameter box")));
        }
        let ok = form_vanishes_over(&beta, &b)?;
        summary.push(format!("primitive vanishes over the quiet box: {ok}"));
        quiet_check = Some(ok);
    }
    let ok = exact_check && quiet_check.unwrap_or(true);
    Ok(Outcome {
        code: if ok { EXIT_OK } else { EXIT_FAILED },
        status: if ok { "EXACT_OK" } else { "CHECK_FAILED" }.into(),
        summary,
        details: json!({ "exact_check": exact_check, "quiet_check": quiet_check }),
        output: Some(json!({ "primitive": FormData::from(&beta) })),
    })
}

fn check_exact(p: &Problem, name: &str, opts: &RunOptions) -> Result<Outcome, Failure> {
    let w = p.form(name)?;
    let ad = AntiDifferential::new(p.cover()?, &opts.complex())?;
    match ad.is_exact(w)? {
        Exactness::Exact { witness } => Ok(Outcome {
            code: EXIT_OK,
            status: "exact".into(),
            summary: vec![format!("witness x = T I(γ) with d^h x = I(γ): {} entries", witness.entries.len())],
            details: json!({ "witness_entries": witness.entries.len() }),
            output: Some(json!({ "witness": CochainData::dump(&witness, ad.complex().nerve()) })),
        }),
        Exactness::NotExact(c) => Ok(not_exact(&ad, &c, "not_exact")),
    }
}

fn periods(
    p: &Problem,
    name: &str,
    cycles: Option<&[[usize; 2]]>,
    basepoint: Option<&[Fraction]>,
) -> Result<Outcome, Failure> {
    let w = p.form(name)?;
    if w.degree() != 2 {
        return Err(Failure::input(format!("{name} has degree {}, periods need a 2-form", w.degree())));
    }
    let dom = &p.domain;
    let cycles: Vec<[usize; 2]> = match cycles {
        Some(c) => c.to_vec(),
        None => {
            let circles: Vec<usize> =
                dom.manifold_axes().into_iter().filter(|&a| dom.axes()[a].kind.is_circle()).collect();
            let mut out = Vec::new();
            for (k, &i) in circles.iter().enumerate() {
                for &j in &circles[k + 1..] {
                    out.push([i, j]);
                }
            }
            out
        }
    };
    let base: Vec<Rational> = match basepoint {
        Some(b) => b.iter().map(|f| f.0.clone()).collect(),
        None => vec![Rational::zero(); dom.dim().saturating_sub(2)],
    };
    let mut values = Vec::new();
    for [i, j] in &cycles {
        values.push(PeriodData { cycle: [*i, *j], value: Fraction(w.period(*i, *j, &base)?) });
    }
    let zero = values.iter().all(|v| v.value.0.is_zero());
    let summary =
        values.iter().map(|v| format!("period over (x{}, x{}) = {}", v.cycle[0], v.cycle[1], v.value.0)).collect();
    Ok(Outcome {
        code: if zero { EXIT_OK } else { EXIT_CERTIFICATE },
        status: if zero { "zero_periods" } else { "nonzero_periods" }.into(),
        summary,
        details: json!({ "basepoint": base.iter().map(Fraction::from).collect::<Vec<_>>() }),
        output: Some(json!({ "periods": values })),
    })
}

#[derive(Clone, Debug, Serialize)]
struct EmbedDetails {
    n_original: usize,
    colors: usize,
    appended_pairs: usize,
    target_dim: usize,
    endpoint_identity: bool,
    homotopy_identity: bool,
    homotopy_ends: bool,
    relative: Option<bool>,
    target_identity: Option<bool>,
    immersion_f: ImmersionCheck,
    immersion_g: ImmersionCheck,
}

impl EmbedDetails {
    fn new(r: &EmbeddingReport, immersion_f: ImmersionCheck, immersion_g: ImmersionCheck) -> EmbedDetails {
        EmbedDetails {
            n_original: r.n_original,
            colors: r.colors,
            appended_pairs: r.appended_pairs,
            target_dim: r.target_dim,
            endpoint_identity: r.endpoint_identity,
            homotopy_identity: r.homotopy_identity,
            homotopy_ends: r.homotopy_ends,
            relative: r.relative,
            target_identity: r.target_identity,
            immersion_f,
            immersion_g,
        }
    }
}

fn embed(p: &Problem, map: &str, target: &str, opts: &RunOptions) -> Result<Outcome, Failure> {
    let f = p.map(map)?;
    let w = p.form(target)?;
    let cover = p.cover()?;
    let res = match lift_family(f, w, p.relative.as_ref(), cover, &opts.complex()) {
        Ok(r) => r,
        Err(Error::NotExact(_)) => {
            let ad = AntiDifferential::new(cover, &opts.complex())?;
            let disc = w.sub(&f.pullback_standard()?)?;
            return match ad.is_exact(&disc)? {
                Exactness::NotExact(c) => Ok(not_exact(&ad, &c, "NOT_EXACT")),
                Exactness::Exact { .. } => {
                    Err(Failure { code: EXIT_FAILED, message: "inconsistent exactness test".into() })
                }
            };
        }
        Err(e) => return Err(e.into()),
    };
    let r = &res.report;
    let details = EmbedDetails::new(r, spot_check(f, 4)?, spot_check(&res.g, 4)?);
    let ok = r.all_ok();
    let summary = vec![
        format!("g* ω_std = {target}: {}", r.target_identity.unwrap_or(false)),
        format!("g* ω_std = f* ω_std + dη: {}", r.endpoint_identity),
        format!("homotopy pulls back f* ω_std + s² dη: {}", r.homotopy_identity),
        format!("homotopy ends at (f, 0) and g: {}", r.homotopy_ends),
        format!("target dimension {} = 2·{} + 2·{}·{} colors", r.target_dim, r.n_original, p.domain.n(), r.colors),
        match r.relative {
            Some(v) => format!("appended coordinates vanish over B: {v}"),
            None => "no relative data".into(),
        },
        format!(
            "immersion spot check: min singular value {:.6e} (f: {:.6e}) over {} samples",
            details.immersion_g.min_singular_value, details.immersion_f.min_singular_value, details.immersion_g.samples
        ),
    ];
    Ok(Outcome {
        code: if ok { EXIT_OK } else { EXIT_FAILED },
        status: if ok { "EMBED_OK" } else { "CHECK_FAILED" }.into(),
        summary,
        details: serde_json::to_value(&details).expect("serializable"),
        output: Some(json!({
            "g": MapData::from(&res.g),
            "homotopy": MapData::from(&res.homotopy),
            "eta": FormData::from(&res.eta),
        })),
    })
}

pub fn selftest(opts: &SelftestOptions) -> Result<Outcome, Failure> {
    let rep = selftest::run(opts)?;
    let summary = rep
        .suites
        .iter()
        .map(|s| {
            let mut line = format!(
                "{} {:<20} {:<24} {} instances",
                if s.passed { "PASS" } else { "FAIL" },
                s.name,
                s.identity,
                s.instances
            );
            if let Some(f) = &s.first_failure {
                line.push_str(&format!(", {} failed (first: {f})", s.failures));
            }
            line
        })
        .collect();
    Ok(Outcome {
        code: if rep.passed { EXIT_OK } else { EXIT_FAILED },
        status: if rep.passed { "pass" } else { "fail" }.into(),
        summary,
        details: serde_json::to_value(&rep).expect("serializable"),
        output: None,
    })
}

pub fn twist(n: Option<u32>, big_r: f64, r: f64, grid: usize) -> Result<Outcome, Failure> {
    if !(big_r > 0.0 && r > 0.0 && big_r.is_finite() && r.is_finite()) {
        return Err(Failure::input("radii must be positive and finite"));
    }
    if n == Some(0) {
        return Err(Failure::input("the power N must be at least 1"));
    }
    let rep = twist::twist_map(n, big_r, r, grid);
    let summary = vec![
        format!("N = {}, R = {}, r = {}", rep.map.n, big_r, r),
        format!(
            "constant c = √(N+1) = {:.12}; the displayed constant N = {} gives det J = (N+1)/N² = {:.12}",
            rep.derived_constant, rep.displayed_constant, rep.displayed_constant_det
        ),
        format!("origin fixed: {}", rep.origin_fixed),
        format!(
            "max image radius {:.12} (bound 5R/c = {:.12}, target r = {})",
            rep.max_image_radius, rep.radius_bound, r
        ),
        format!(
            "max |det J - 1| = {:.3e} on a {}×{} grid (tolerance {:.0e})",
            rep.max_det_deviation, rep.grid, rep.grid, rep.tolerance
        ),
    ];
    Ok(Outcome {
        code: if rep.ok { EXIT_OK } else { EXIT_FAILED },
        status: if rep.ok { "pass" } else { "fail" }.into(),
        summary,
        details: serde_json::to_value(&rep).expect("serializable"),
        output: None,
    })
}

/// Full JSON report of an outcome. `output` is embedded when it is not
/// written to a separate file.
pub fn json_report(command: &str, o: &Outcome, spec: Option<&ProblemSpec>, embed_output: bool) -> Value {
    let mut v = json!({
        "command": command,
        "status": o.status,
        "exit_code": o.code,
        "summary": o.summary,
        "details": o.details,
    });
    if let Some(s) = spec {
        v["spec"] = serde_json::to_value(s).expect("serializable");
    }
    if embed_output {
        if let Some(out) = &o.output {
            v["output"] = out.clone();
        }
    }
    v
}

pub fn text_report(command: &str, o: &Outcome) -> String {
    let mut s = format!("{command}: {} (exit {})\n", o.status, o.code);
    for line in &o.summary {
        s.push_str("  ");
        s.push_str(line);
        s.push('\n');
    }
    s
}
