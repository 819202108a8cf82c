//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on failure.

use std::path::{Path, PathBuf};
use std::process::{Command, ExitCode};
use std::sync::Arc;
use std::time::Instant;

use rayon::prelude::*;

use exactdr::selftest::{self, SelftestOptions};
use exactdr::twist::twist_map;
use exactdr_core::antidiff::{AntiDifferential, Exactness};
use exactdr_core::cechdr::ComplexOptions;
use exactdr_core::cover::Cover;
use exactdr_core::embedder::{lift_family, vanishes_over, Relative};
use exactdr_core::exactpp::{bspline_on, AxisKind, AxisSpec, Interval, PPFunction, Poly};
use exactdr_core::forms::{Domain, Form, PPMap};
use exactdr_core::random::{self, RandomOptions};
use exactdr_core::{q, Rational};

type Verdict = Result<String, String>;

const SEED: u64 = 20260;

fn light() -> RandomOptions {
    RandomOptions { terms: 1, density: 60, ..Default::default() }
}

fn unit_box(n: usize) -> Arc<Domain> {
    Domain::boxed(&vec![(q(0, 1), q(1, 1)); n]).unwrap()
}

fn torus2() -> Arc<Domain> {
    Domain::torus(&[q(1, 1), q(1, 1)]).unwrap()
}

fn solver(cover: &Cover) -> AntiDifferential {
    AntiDifferential::new(cover, &ComplexOptions::default()).unwrap()
}

struct Setting {
    name: &'static str,
    dom: Arc<Domain>,
    ad: AntiDifferential,
    degrees: &'static [usize],
    count: usize,
}

fn settings() -> Vec<Setting> {
    let b2 = unit_box(2);
    let b3 = unit_box(3);
    let t2 = torus2();
    vec![
        Setting {
            name: "box2",
            ad: solver(&Cover::plateau(&b2, 1, &[2]).unwrap()),
            dom: b2,
            degrees: &[1, 2],
            count: 22,
        },
        Setting {
            name: "T2",
            ad: solver(&Cover::plateau(&t2, 1, &[3]).unwrap()),
            dom: t2,
            degrees: &[1, 2],
            count: 22,
        },
        Setting {
            name: "box3",
            ad: solver(&Cover::plateau(&b3, 1, &[2]).unwrap()),
            dom: b3,
            degrees: &[1, 2],
            count: 6,
        },
    ]
}

/// Σ dg_{2i} ∧ dg_{2i+1}, built from the form algebra.
fn standard_pullback(dom: &Arc<Domain>, coords: &[PPFunction]) -> Form {
    let mut acc = Form::zero(dom, 2);
    for pair in coords.chunks(2) {
        let a = Form::function(dom, pair[0].clone()).unwrap().d();
        let b = Form::function(dom, pair[1].clone()).unwrap().d();
        acc = acc.add(&a.wedge(&b).unwrap()).unwrap();
    }
    acc
}

/// Criteria 1 and 4 share the corpus.
fn corpus(settings: &[Setting]) -> (Verdict, Verdict) {
    let jobs: Vec<(usize, usize)> =
        settings.iter().enumerate().flat_map(|(s, st)| (0..st.count).map(move |i| (s, i))).collect();
    let results: Vec<(String, bool, bool, f64)> = jobs
        .par_iter()
        .map(|&(s, i)| {
            let st = &settings[s];
            let k = st.degrees[i % st.degrees.len()];
            let mut rng = random::rng(SEED + 1000 * s as u64 + i as u64);
            let w = random::exact_form(&mut rng, &st.dom, k, &light()).unwrap();
            let start = Instant::now();
            let label = format!("{} #{i} k={k}", st.name);
            let sol = match st.ad.solve(&w) {
                Ok(Ok(sol)) => sol,
                _ => return (label, false, false, start.elapsed().as_secs_f64()),
            };
            let secs = start.elapsed().as_secs_f64();
            let prim_ok = sol.primitive.d().equals(&w);
            let cx = st.ad.complex();
            let edge_ok = cx.total_d(&sol.gamma).map(|t| t.is_zero()).unwrap_or(false)
                && cx.s_map(&sol.gamma).map(|f| f.equals(&w)).unwrap_or(false);
            (label, prim_ok, edge_ok, secs)
        })
        .collect();
    let n = results.len();
    let worst = |name: &str| results.iter().filter(|r| r.0.starts_with(name)).map(|r| r.3).fold(0.0, f64::max);
    let times = format!("max time box2 {:.1} s, T2 {:.1} s, box3 {:.1} s", worst("box2"), worst("T2"), worst("box3"));
    let bad1: Vec<&str> = results.iter().filter(|r| !r.1).map(|r| r.0.as_str()).collect();
    let bad4: Vec<&str> = results.iter().filter(|r| !r.2).map(|r| r.0.as_str()).collect();
    let c1 = if bad1.is_empty() && n >= 50 {
        Ok(format!("{n} exact forms on box2, box3, T2 with dβ = ω exactly; {times}"))
    } else {
        Err(format!("{} of {n} failed: {:?}", bad1.len(), bad1))
    };
    let c4 = if bad4.is_empty() {
        Ok(format!("Dγ = 0 and S(γ) = ω on all {n} corpus instances"))
    } else {
        Err(format!("{} of {n} failed: {:?}", bad4.len(), bad4))
    };
    (c1, c4)
}

fn linearity(settings: &[Setting]) -> Verdict {
    let pairs: Vec<(usize, u64)> = (0..20).map(|i| (i % 2, i as u64)).collect();
    let bad: Vec<String> = pairs
        .par_iter()
        .filter_map(|&(s, i)| {
            let st = &settings[s];
            let mut rng = random::rng(SEED + 50_000 + i);
            let k = st.degrees[i as usize % 2];
            let w1 = random::exact_form(&mut rng, &st.dom, k, &light()).unwrap();
            let w2 = random::exact_form(&mut rng, &st.dom, k, &light()).unwrap();
            let (a, b) = (random::rational(&mut rng), random::rational(&mut rng));
            let check = || -> exactdr_core::Result<bool> {
                let lhs = st.ad.primitive(&w1.scale(&a).add(&w2.scale(&b))?)?;
                let rhs = st.ad.primitive(&w1)?.scale(&a).add(&st.ad.primitive(&w2)?.scale(&b))?;
                Ok(lhs.equals(&rhs))
            };
            match check() {
                Ok(true) => None,
                Ok(false) => Some(format!("{} pair {i}", st.name)),
                Err(e) => Some(format!("{} pair {i}: {e}", st.name)),
            }
        })
        .collect();
    if bad.is_empty() {
        Ok(format!("{} pairs on box2 and T2 with random rational a, b", pairs.len()))
    } else {
        Err(format!("{bad:?}"))
    }
}

fn identities() -> Verdict {
    let rep =
        selftest::run(&SelftestOptions { seed: SEED, count: 30, inject_fault: false }).map_err(|e| e.to_string())?;
    let summary: Vec<String> =
        rep.suites.iter().map(|s| format!("{} {}/{}", s.name, s.instances - s.failures, s.instances)).collect();
    if rep.passed {
        Ok(summary.join(", "))
    } else {
        Err(summary.join(", "))
    }
}

fn exactness(settings: &[Setting]) -> Verdict {
    let t2 = &settings[1];
    let area = Form::monomial(&t2.dom, t2.dom.constant_fn(Rational::one()), &[0, 1]).unwrap();
    match t2.ad.is_exact(&area).map_err(|e| e.to_string())? {
        Exactness::NotExact(c) if c.periods == vec![((0, 1), q(1, 1))] => {}
        Exactness::NotExact(c) => return Err(format!("area form periods {:?}", c.periods)),
        Exactness::Exact { .. } => return Err("area form reported exact".into()),
    }
    // exact: witness x with d^h x = I(γ); mixed: ω = dβ + c·area has period c
    let cx = t2.ad.complex();
    let bad: Vec<String> = (0..24u64)
        .into_par_iter()
        .filter_map(|i| {
            let mut rng = random::rng(SEED + 70_000 + i);
            let exact = random::exact_form(&mut rng, &t2.dom, 2, &light()).unwrap();
            let c = q((i % 4) as i64 - 1, 1 + (i % 3) as i64);
            let w = exact.add(&area.scale(&c)).unwrap();
            let check = || -> exactdr_core::Result<Option<String>> {
                let period = w.period(0, 1, &[])?;
                if period != c {
                    return Ok(Some(format!("#{i}: period {period}, built with {c}")));
                }
                let ok = match t2.ad.is_exact(&w)? {
                    Exactness::Exact { witness } => {
                        let g = t2.ad.gamma(&w)?;
                        c.is_zero() && cx.d_h(&witness)?.equals(&cx.i_map(&g)?)
                    }
                    Exactness::NotExact(_) => !c.is_zero(),
                };
                Ok((!ok).then(|| format!("#{i}: Čech test disagrees with period {c}")))
            };
            check().unwrap_or_else(|e| Some(format!("#{i}: {e}")))
        })
        .collect();
    if bad.is_empty() {
        Ok("dx∧dy on T2 not exact with period 1; 24 mixed torus 2-forms agree with their periods, witnesses verified"
            .into())
    } else {
        Err(format!("{bad:?}"))
    }
}

fn identity_map(dom: &Arc<Domain>) -> PPMap {
    let coords = dom.manifold_axes().into_iter().map(|a| dom.coordinate(a).unwrap()).collect();
    PPMap::new(dom, coords, true).unwrap()
}

/// Piecewise-linear loop around the unit square, on a circle of period 1.
fn square_loop() -> (PPFunction, PPFunction) {
    let ax = AxisSpec::circle(q(1, 1), vec![q(0, 1), q(1, 4), q(1, 2), q(3, 4)]);
    let four = Poly::univariate(0, &[q(0, 1), q(4, 1)]);
    let c = |v: i64| Poly::constant(q(v, 1));
    let x = PPFunction::univariate(ax.clone(), vec![four.clone(), c(1), c(3).sub(&four), c(0)]).unwrap();
    let y = PPFunction::univariate(ax, vec![c(0), four.sub(&c(1)), c(1), c(4).sub(&four)]).unwrap();
    (x, y)
}

fn torus_map(dom: &Arc<Domain>) -> PPMap {
    let (x, y) = square_loop();
    let one = PPFunction::constant_on(&[AxisKind::circle(q(1, 1))], Rational::one());
    let coords = vec![
        PPFunction::tensor(&[x.clone(), one.clone()]),
        PPFunction::tensor(&[y.clone(), one.clone()]),
        PPFunction::tensor(&[one.clone(), x]),
        PPFunction::tensor(&[one, y]),
    ];
    PPMap::new(dom, coords, true).unwrap()
}

/// Checks the homotopy at rational times: `H(s)* ω_std = f* ω_std + s² (g* ω_std - f* ω_std)`.
fn homotopy_ok(dom: &Arc<Domain>, f: &PPMap, g_pull: &Form, h: &PPMap) -> bool {
    let base = standard_pullback(dom, &f.coordinates);
    let disc = g_pull.sub(&base).unwrap();
    [q(0, 1), q(1, 3), q(3, 4), q(1, 1)].iter().all(|s| {
        let at: Vec<PPFunction> = h.coordinates.iter().map(|c| c.restrict(0, s).unwrap()).collect();
        standard_pullback(dom, &at).equals(&base.add(&disc.scale(&(s * s))).unwrap())
    })
}

fn embedding() -> Verdict {
    let b2 = unit_box(2);
    let t2 = torus2();
    let cases: Vec<(&str, Arc<Domain>, Cover, PPMap)> = vec![
        ("box2", b2.clone(), Cover::plateau(&b2, 1, &[2]).unwrap(), identity_map(&b2)),
        ("T2", t2.clone(), Cover::plateau(&t2, 1, &[3]).unwrap(), torus_map(&t2)),
    ];
    let jobs: Vec<(usize, u64)> = (0..12).map(|i| (i % 2, i as u64)).collect();
    let bad: Vec<String> = jobs
        .par_iter()
        .filter_map(|&(c, i)| {
            let (name, dom, cover, f) = &cases[c];
            let mut rng = random::rng(SEED + 90_000 + i);
            let target = standard_pullback(dom, &f.coordinates)
                .add(&random::exact_form(&mut rng, dom, 2, &light()).unwrap())
                .unwrap();
            let res = match lift_family(f, &target, None, cover, &ComplexOptions::default()) {
                Ok(r) => r,
                Err(e) => return Some(format!("{name} #{i}: {e}")),
            };
            let g_pull = standard_pullback(dom, &res.g.coordinates);
            let colors = cover.coloring().count();
            let mut why = Vec::new();
            if !g_pull.equals(&target) {
                why.push("g* ω_std != ω");
            }
            if res.g.target_dim() != f.target_dim() + 2 * dom.n() * colors {
                why.push("target dimension");
            }
            if !homotopy_ok(dom, f, &g_pull, &res.homotopy) {
                why.push("s² identity");
            }
            (!why.is_empty()).then(|| format!("{name} #{i}: {why:?}"))
        })
        .collect();
    if !bad.is_empty() {
        return Err(format!("{bad:?}"));
    }
    let (dom, cover, f, target, s) = family(0);
    let rel = relative();
    let res = lift_family(&f, &target, Some(&rel), &cover, &ComplexOptions::default()).map_err(|e| e.to_string())?;
    let on_b = res.g.coordinates[f.target_dim()..].iter().all(|c| zero_on(c, &dom, &rel.b[0], &s));
    if !on_b {
        return Err("appended coordinates do not vanish on B".into());
    }
    Ok(format!("{} instances on box2 and T2, plus a relative family vanishing on B", jobs.len()))
}

/// Family over z ∈ [0, 1] on the unit square, standard for z <= 1/4.
fn family(seed: u64) -> (Arc<Domain>, Cover, PPMap, Form, Vec<Rational>) {
    let dom = unit_box(2).with_parameters(&[(q(0, 1), q(1, 1))]).unwrap();
    let cover = Cover::plateau(&dom, 1, &[2]).unwrap();
    let f = PPMap::new(&dom, vec![dom.coordinate(1).unwrap(), dom.coordinate(2).unwrap()], true).unwrap();
    let mut rng = random::rng(SEED + 110_000 + seed);
    let base = unit_box(2);
    let beta = random::form(&mut rng, &base, 1, &light()).unwrap();
    let s = bspline_on(2, &q(1, 4), &(&q(3, 2) + &q(seed as i64, 4))).unwrap();
    let comps = beta.components().iter().map(|(m, c)| (m << 1, c.insert_axis(0, &s).unwrap()));
    let beta = Form::from_components(&dom, 1, comps).unwrap();
    let target = f.pullback_standard().unwrap().add(&beta.d()).unwrap();
    let samples = (0..=4).map(|i| q(i, 16)).collect();
    (dom, cover, f, target, samples)
}

fn relative() -> Relative {
    Relative::with_plateau(vec![Interval::new(q(0, 1), q(1, 8))], vec![Interval::new(q(-1, 8), q(1, 4))], 1).unwrap()
}

/// Zero on the box `iv` in the parameter: checked by `vanishes_over` and by
/// restricting to sample parameters inside it.
fn zero_on(c: &PPFunction, dom: &Domain, iv: &Interval, samples: &[Rational]) -> bool {
    vanishes_over(c, dom, std::slice::from_ref(iv)).unwrap()
        && samples.iter().filter(|z| iv.contains(z)).all(|z| c.restrict(0, z).unwrap().is_zero())
}

fn locality() -> Verdict {
    let quiet = Interval::new(q(0, 1), q(1, 4));
    let rel = relative();
    let bad: Vec<String> = (0..3u64)
        .into_par_iter()
        .filter_map(|i| {
            let (dom, cover, f, target, samples) = family(i);
            let res = match lift_family(&f, &target, Some(&rel), &cover, &ComplexOptions::default()) {
                Ok(r) => r,
                Err(e) => return Some(format!("family {i}: {e}")),
            };
            let mut why = Vec::new();
            if !res.eta.components().values().all(|c| zero_on(c, &dom, &quiet, &samples)) {
                why.push("η");
            }
            let extra = &res.g.coordinates[f.target_dim()..];
            if !extra.iter().step_by(2).all(|h| zero_on(h, &dom, &quiet, &samples)) {
                why.push("h on the quiet box");
            }
            if !extra.iter().all(|c| zero_on(c, &dom, &rel.b[0], &samples)) {
                why.push("appended coordinates on B");
            }
            (!why.is_empty()).then(|| format!("family {i}: {why:?}"))
        })
        .collect();
    if bad.is_empty() {
        Ok("3 families quiet for z <= 1/4: η and every h vanish there, all appended coordinates vanish on B = [0, 1/8]"
            .into())
    } else {
        Err(format!("{bad:?}"))
    }
}

fn twist() -> Verdict {
    let mut lines = Vec::new();
    let mut ok = true;
    for (big_r, r) in [(1.0, 0.5), (2.0, 1.0), (1.0, 1.0), (0.5, 2.0)] {
        let rep = twist_map(None, big_r, r, 100);
        ok &= rep.ok && rep.origin_fixed && rep.max_image_radius <= r && rep.max_det_deviation <= 1e-9;
        lines.push(format!(
            "R={big_r} r={r}: N={} max radius {:.4} det dev {:.1e} constant {:.4} (displayed {} gives det {:.4})",
            rep.map.n,
            rep.max_image_radius,
            rep.max_det_deviation,
            rep.derived_constant,
            rep.displayed_constant,
            rep.displayed_constant_det
        ));
    }
    if ok {
        Ok(lines.join("; "))
    } else {
        Err(lines.join("; "))
    }
}

fn specs_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../specs")
}

fn run_once(args: &[String], out: &Path) -> (Option<i32>, Vec<u8>, Vec<u8>) {
    let _ = std::fs::remove_file(out);
    let o = Command::new(env!("CARGO_BIN_EXE_exactdr")).args(args).arg("--out").arg(out).output().expect("binary runs");
    (o.status.code(), o.stdout, std::fs::read(out).unwrap_or_default())
}

fn determinism() -> Verdict {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let out = dir.path().join("out.json");
    let mut runs: Vec<Vec<String>> = Vec::new();
    let mut names: Vec<_> = std::fs::read_dir(specs_dir()).unwrap().map(|e| e.unwrap().path()).collect();
    names.sort();
    for p in names {
        let text = std::fs::read_to_string(&p).unwrap();
        let Ok(spec) = exactdr::problem::ProblemSpec::parse(&text) else { continue };
        let cmd = spec.task.command().to_string();
        runs.push(vec![
            cmd,
            "--spec".into(),
            p.display().to_string(),
            "--report".into(),
            "json".into(),
            "--seed".into(),
            "7".into(),
        ]);
    }
    runs.push(["selftest", "--seed", "7", "--count", "5", "--report", "json"].map(String::from).to_vec());
    runs.push(["twist", "--radius", "1", "--target", "0.5", "--report", "json"].map(String::from).to_vec());
    let mut bad = Vec::new();
    for args in &runs {
        let a = run_once(args, &out);
        let b = run_once(args, &out);
        let mut par = args.clone();
        par.extend(["--parallel".to_string(), "2".to_string()]);
        let c = run_once(&par, &out);
        if a != b || a != c || a.1.is_empty() {
            bad.push(args[..args.len().min(3)].join(" "));
        }
    }
    if bad.is_empty() {
        Ok(format!(
            "{} commands produce identical stdout and --out bytes across repeated and parallel runs",
            runs.len()
        ))
    } else {
        Err(format!("differing output: {bad:?}"))
    }
}

fn main() -> ExitCode {
    let start = Instant::now();
    let settings = settings();
    let mut results: Vec<(usize, &str, Verdict)> = Vec::new();
    let mut report = |n: usize, name: &'static str, v: Verdict| {
        match &v {
            Ok(d) => println!("PASS criterion {n} ({name}): {d}"),
            Err(d) => println!("FAIL criterion {n} ({name}): {d}"),
        }
        results.push((n, name, v));
    };
    let (c1, c4) = corpus(&settings);
    report(1, "anti-differential correctness", c1);
    report(2, "linearity", linearity(&settings));
    report(3, "structural identities", identities());
    report(4, "edge maps", c4);
    report(5, "exactness detection", exactness(&settings));
    report(6, "endpoint identity", embedding());
    report(7, "parametric locality", locality());
    report(8, "twist map", twist());
    report(9, "determinism", determinism());
    let failed = results.iter().filter(|r| r.2.is_err()).count();
    println!(
        "acceptance: {} passed, {failed} failed in {:.1} s",
        results.len() - failed,
        start.elapsed().as_secs_f64()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
