use std::sync::Arc;
use std::time::Instant;

use exactdr_core::antidiff::{zigzag_lift, AntiDifferential, CechSplitting, Direction, Exactness};
use exactdr_core::cechdr::{Cochain, ComplexOptions, Entry};
use exactdr_core::cover::{Cover, Nerve};
use exactdr_core::exactpp::{bspline_on, AxisKind, Interval, PPFunction};
use exactdr_core::forms::{mask_of, Domain, Form};
use exactdr_core::linalg::verify_generalized_inverse;
use exactdr_core::random::{self, RandomOptions};
use exactdr_core::{q, Error, Rational};

fn unit_box(n: usize) -> Arc<Domain> {
    Domain::boxed(&vec![(q(0, 1), q(1, 1)); n]).unwrap()
}

fn torus2() -> Arc<Domain> {
    Domain::torus(&[q(1, 1), q(1, 1)]).unwrap()
}

fn solver(cover: &Cover) -> AntiDifferential {
    AntiDifferential::new(cover, &ComplexOptions::default()).unwrap()
}

fn light() -> RandomOptions {
    RandomOptions { terms: 1, density: 60, ..Default::default() }
}

#[test]
fn splitting_of_path_and_cycle() {
    let line = [AxisKind::Line];
    let iv = |a: i64, b: i64| vec![Interval::new(q(a, 1), q(b, 1))];
    let path = Nerve::from_regions(&line, &[iv(0, 2), iv(1, 3), iv(2, 4)], 3).unwrap();
    let s = CechSplitting::build(&path).unwrap();
    let b = s.matrix(1).unwrap();
    assert_eq!((b.rows, b.cols), (3, 2));
    assert!(verify_generalized_inverse(b, s.inverse(1).unwrap()));

    let circle = [AxisKind::circle(q(3, 1))];
    let cyc = Nerve::from_regions(&circle, &[iv(0, 2), iv(1, 3), iv(2, 4)], 3).unwrap();
    let s = CechSplitting::build(&cyc).unwrap();
    let t = s.inverse(1).unwrap();
    assert_eq!(t.rank(), 2);
    assert!(verify_generalized_inverse(s.matrix(1).unwrap(), t));

    let single = Nerve::from_regions(&line, &[iv(0, 1)], 3).unwrap();
    let s = CechSplitting::build(&single).unwrap();
    assert_eq!(s.matrix(1).unwrap().cols, 0);
}

#[test]
fn single_chart_gamma_is_omega() {
    let dom = unit_box(2);
    let cover = Cover::plateau(&dom, 1, &[1]).unwrap();
    let ad = solver(&cover);
    let mut rng = random::rng(1);
    let w = random::exact_form(&mut rng, &dom, 2, &light()).unwrap();
    let g = ad.gamma(&w).unwrap();
    let e = g.comps[0].entries.get(&0).and_then(Entry::as_form).unwrap();
    assert!(e.equals(&w));
    assert!(g.comps.iter().skip(1).all(Cochain::is_zero));
}

#[test]
fn zero_form_and_degree_zero() {
    let dom = unit_box(2);
    let ad = solver(&Cover::plateau(&dom, 1, &[2]).unwrap());
    let z = Form::zero(&dom, 1);
    assert!(ad.primitive(&z).unwrap().is_zero());
    match ad.is_exact(&Form::zero(&dom, 2)).unwrap() {
        Exactness::Exact { witness } => assert!(witness.is_zero()),
        Exactness::NotExact(_) => panic!("zero is exact"),
    }
    let f = Form::function(&dom, dom.zero_fn()).unwrap();
    assert!(matches!(ad.primitive(&f), Err(Error::Invalid(_))));
}

#[test]
fn non_closed_input_is_rejected() {
    let dom = unit_box(2);
    let ad = solver(&Cover::plateau(&dom, 1, &[2]).unwrap());
    let b = bspline_on(2, &q(1, 4), &q(3, 4)).unwrap();
    let w = Form::monomial(&dom, PPFunction::tensor(&[b.clone(), b]), &[0]).unwrap();
    assert!(matches!(ad.gamma(&w), Err(Error::NotClosed(_))));
}

#[test]
fn zigzag_trivial_inputs() {
    let dom = unit_box(2);
    let ad = solver(&Cover::plateau(&dom, 1, &[2]).unwrap());
    let cx = ad.complex();
    let x = Cochain::zero(-1, 1);
    let betas = zigzag_lift(cx, Direction::Horizontal, &x, &[], 2).unwrap();
    assert!(betas.iter().all(Cochain::is_zero));
    // a wrong sign in the hypotheses is caught
    let mut rng = random::rng(5);
    let w = random::exact_form(&mut rng, &dom, 1, &light()).unwrap();
    let g = ad.gamma(&w).unwrap();
    let mut x = Cochain::zero(-1, 1);
    x.accumulate(0, Entry::Form(w)).unwrap();
    let bad = g.comps[0].clone();
    assert!(matches!(zigzag_lift(cx, Direction::Horizontal, &x, &[bad], 2), Err(Error::Hypothesis(_))));
}

#[test]
fn zigzag_with_nonzero_alphas() {
    // x = d^h t and α_0 = d^v t for a random t in (0, 0); d^h and d^v anticommute.
    let dom = unit_box(1);
    let cover = Cover::plateau(&dom, 1, &[2]).unwrap();
    let ad = solver(&cover);
    let cx = ad.complex();
    let mut rng = random::rng(6);
    for _ in 0..5 {
        let t = random::cochain(&mut rng, cx, 0, 0, &light()).unwrap();
        let a0 = cx.d_v(&t).unwrap();
        let x = cx.d_h(&t).unwrap();
        let betas = zigzag_lift(cx, Direction::Horizontal, &x, std::slice::from_ref(&a0), 2).unwrap();
        assert!(cx.d_h(&betas[0]).unwrap().equals(&x));
        let s = cx.d_h(&betas[1]).unwrap().add(&cx.d_v(&betas[0]).unwrap()).unwrap();
        assert!(s.equals(&a0));
    }
}

fn run_corpus(name: &str, dom: &Arc<Domain>, cover: &Cover, degrees: &[usize], count: usize, seed: u64) {
    let ad = solver(cover);
    let mut rng = random::rng(seed);
    for i in 0..count {
        let k = degrees[i % degrees.len()];
        let w = random::exact_form(&mut rng, dom, k, &light()).unwrap();
        let start = Instant::now();
        let sol = ad.solve(&w).unwrap().unwrap_or_else(|c| panic!("{name}: exact form reported {}", c.summary()));
        assert!(sol.primitive.d().equals(&w), "{name}: d(primitive) != ω");
        eprintln!("{name} k={k}: {:?}", start.elapsed());
    }
}

#[test]
fn primitive_box2() {
    let dom = unit_box(2);
    run_corpus("box2", &dom, &Cover::plateau(&dom, 1, &[2]).unwrap(), &[1, 2], 6, 21);
}

#[test]
fn primitive_box2_bspline() {
    let dom = unit_box(2);
    run_corpus("box2-bspline", &dom, &Cover::bspline(&dom, 2, &[2]).unwrap(), &[1, 2], 2, 22);
}

#[test]
fn primitive_torus2() {
    let dom = torus2();
    run_corpus("torus2", &dom, &Cover::plateau(&dom, 1, &[3]).unwrap(), &[1, 2], 6, 23);
}

#[test]
fn primitive_box3() {
    let dom = unit_box(3);
    run_corpus("box3", &dom, &Cover::plateau(&dom, 1, &[2]).unwrap(), &[1, 2, 3], 3, 24);
}

#[test]
fn torus_area_form_is_not_exact() {
    let dom = torus2();
    let ad = solver(&Cover::plateau(&dom, 1, &[3]).unwrap());
    let w = Form::monomial(&dom, dom.constant_fn(q(1, 1)), &[0, 1]).unwrap();
    match ad.is_exact(&w).unwrap() {
        Exactness::NotExact(c) => {
            assert_eq!(c.periods, vec![((0, 1), q(1, 1))]);
            assert!(!c.residual.is_zero());
        }
        Exactness::Exact { .. } => panic!("area form reported exact"),
    }
    assert!(matches!(ad.primitive(&w), Err(Error::NotExact(_))));
}

#[test]
fn torus_period_agreement() {
    let dom = torus2();
    let ad = solver(&Cover::plateau(&dom, 1, &[3]).unwrap());
    let mut rng = random::rng(31);
    let area = Form::monomial(&dom, dom.constant_fn(Rational::one()), &[0, 1]).unwrap();
    for i in 0..6 {
        let mut w = random::exact_form(&mut rng, &dom, 2, &light()).unwrap();
        let c = Rational::from_int(i % 3);
        w = w.add(&area.scale(&c)).unwrap();
        let period = w.period(0, 1, &[]).unwrap();
        let exact = ad.is_exact(&w).unwrap().is_exact();
        assert_eq!(exact, period.is_zero(), "Čech test disagrees with period {period}");
    }
}

#[test]
fn primitive_is_linear() {
    let dom = unit_box(2);
    let ad = solver(&Cover::plateau(&dom, 1, &[2]).unwrap());
    let mut rng = random::rng(41);
    for _ in 0..3 {
        let w1 = random::exact_form(&mut rng, &dom, 2, &light()).unwrap();
        let w2 = random::exact_form(&mut rng, &dom, 2, &light()).unwrap();
        let (a, b) = (random::rational(&mut rng), random::rational(&mut rng));
        let lhs = ad.primitive(&w1.scale(&a).add(&w2.scale(&b)).unwrap()).unwrap();
        let rhs = ad.primitive(&w1).unwrap().scale(&a).add(&ad.primitive(&w2).unwrap().scale(&b)).unwrap();
        assert!(lhs.equals(&rhs));
    }
}

#[test]
fn family_locality() {
    let base = unit_box(1);
    let dom = base.with_parameters(&[(q(0, 1), q(1, 1))]).unwrap();
    let ad = solver(&Cover::plateau(&dom, 1, &[2]).unwrap());
    // ω(z, x) = s(z) dB(x), with s vanishing for z <= 1/4
    let s = bspline_on(2, &q(1, 4), &q(1, 1)).unwrap();
    let b = bspline_on(3, &q(1, 8), &q(7, 8)).unwrap();
    let f = PPFunction::tensor(&[s.clone(), b.clone()]);
    let w = Form::function(&dom, f).unwrap().d();
    assert_eq!(w.components().keys().copied().collect::<Vec<_>>(), vec![mask_of(&[1])]);
    let quiet = [Interval::new(q(0, 1), q(1, 4))];
    let eta = ad.primitive_family(&w, Some(&quiet)).unwrap();
    assert!(eta.d().equals(&w));
    // linear in the coefficient family: ω(z) = s(z) dB gives s(z) primitive(dB)
    let w0 = Form::function(&base, b).unwrap().d();
    let ad0 = solver(&Cover::plateau(&base, 1, &[2]).unwrap());
    let eta0 = ad0.primitive(&w0).unwrap();
    assert_eq!(eta0.degree(), 0);
    let lifted = eta0.coeff(0).insert_axis(0, &s).unwrap();
    assert!(eta.coeff(0) == lifted);
}
