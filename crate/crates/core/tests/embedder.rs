use std::sync::Arc;

use exactdr_core::cechdr::ComplexOptions;
use exactdr_core::cover::Cover;
use exactdr_core::embedder::{append_coordinates, decompose, lift_family, vanishes_over, Relative};
use exactdr_core::exactpp::{bspline_on, AxisKind, AxisSpec, Interval, PPFunction, Poly};
use exactdr_core::forms::{Domain, Form, PPMap};
use exactdr_core::random::{self, RandomOptions};
use exactdr_core::{q, Error, Rational};

fn unit_box(n: usize) -> Arc<Domain> {
    Domain::boxed(&vec![(q(0, 1), q(1, 1)); n]).unwrap()
}

fn light() -> RandomOptions {
    RandomOptions { terms: 1, density: 60, ..Default::default() }
}

fn identity_map(dom: &Arc<Domain>) -> PPMap {
    let coords = dom.manifold_axes().into_iter().map(|a| dom.coordinate(a).unwrap()).collect();
    PPMap::new(dom, coords, true).unwrap()
}

#[test]
fn zero_eta_gives_zero_pairs() {
    let dom = unit_box(2);
    let cover = Cover::plateau(&dom, 1, &[2]).unwrap();
    let dec = decompose(&Form::zero(&dom, 1), &cover, None, None).unwrap();
    assert!(dec.coordinates().iter().all(PPFunction::is_zero));
    let f = identity_map(&dom);
    let res = append_coordinates(&f, &dec).unwrap();
    assert!(res.report.all_ok());
    assert_eq!(res.g.pullback_standard().unwrap(), f.pullback_standard().unwrap());
    assert_eq!(res.report.target_dim, 2 + 2 * 2 * dec.coloring.count());
}

#[test]
fn single_chart_pair() {
    let dom = unit_box(1);
    let cover = Cover::plateau(&dom, 1, &[1]).unwrap();
    let b = bspline_on(2, &q(1, 4), &q(3, 4)).unwrap();
    let c = q(5, 3);
    let eta = Form::monomial(&dom, b.scale(&c), &[0]).unwrap();
    let dec = decompose(&eta, &cover, None, None).unwrap();
    assert_eq!(dec.charts.len(), 1);
    let (h, t) = &dec.charts[0].pairs[0];
    assert_eq!(*h, b.scale(&c));
    // t = φ·x with φ = 1 on the chart
    let chart = &cover.charts()[0][0];
    let expected = dec.charts[0].phi.mul_poly(&Poly::var(0));
    assert_eq!(*t, expected);
    assert_eq!(t.eval(&[chart.mid()]), chart.mid());
}

#[test]
fn closed_eta_gives_zero_sum() {
    let dom = unit_box(2);
    let cover = Cover::plateau(&dom, 1, &[2]).unwrap();
    let mut rng = random::rng(3);
    let f = random::function(&mut rng, &dom, &light()).unwrap();
    let eta = Form::function(&dom, f).unwrap().d();
    let dec = decompose(&eta, &cover, None, None).unwrap();
    assert!(dec.d_eta.is_zero());
    let res = append_coordinates(&identity_map(&dom), &dec).unwrap();
    assert!(res.report.all_ok());
}

#[test]
fn box_endpoint_identity() {
    let dom = unit_box(2);
    let cover = Cover::plateau(&dom, 1, &[2]).unwrap();
    let f = identity_map(&dom);
    let mut rng = random::rng(4);
    for _ in 0..2 {
        let target =
            f.pullback_standard().unwrap().add(&random::exact_form(&mut rng, &dom, 2, &light()).unwrap()).unwrap();
        let res = lift_family(&f, &target, None, &cover, &ComplexOptions::default()).unwrap();
        assert!(res.report.all_ok(), "{:?}", res.report);
        assert_eq!(res.g.pullback_standard().unwrap(), target);
        assert_eq!(res.report.target_dim, 2 * res.report.n_original + 2 * 2 * res.report.colors);
        assert_eq!(res.report.appended_pairs, 2 * cover.coloring().count());
    }
}

/// Piecewise-linear embedding of a circle of period 1 onto the unit square's boundary.
fn square_loop() -> (PPFunction, PPFunction) {
    let ax = AxisSpec::circle(q(1, 1), vec![q(0, 1), q(1, 4), q(1, 2), q(3, 4)]);
    let four = Poly::univariate(0, &[q(0, 1), q(4, 1)]);
    let c = |v: i64| Poly::constant(q(v, 1));
    let x = PPFunction::univariate(ax.clone(), vec![four.clone(), c(1), c(3).sub(&four), c(0)]).unwrap();
    let y = PPFunction::univariate(ax, vec![c(0), four.sub(&c(1)), c(1), c(4).sub(&four)]).unwrap();
    (x, y)
}

#[test]
fn torus_endpoint_identity() {
    let dom = Domain::torus(&[q(1, 1), q(1, 1)]).unwrap();
    let cover = Cover::plateau(&dom, 1, &[3]).unwrap();
    let (x, y) = square_loop();
    let one = PPFunction::constant_on(&[AxisKind::circle(q(1, 1))], Rational::one());
    let coords = vec![
        PPFunction::tensor(&[x.clone(), one.clone()]),
        PPFunction::tensor(&[y.clone(), one.clone()]),
        PPFunction::tensor(&[one.clone(), x]),
        PPFunction::tensor(&[one, y]),
    ];
    let f = PPMap::new(&dom, coords, true).unwrap();
    assert!(f.pullback_standard().unwrap().is_zero());
    let mut rng = random::rng(5);
    let target = random::exact_form(&mut rng, &dom, 2, &light()).unwrap();
    let res = lift_family(&f, &target, None, &cover, &ComplexOptions::default()).unwrap();
    assert!(res.report.all_ok(), "{:?}", res.report);
    assert_eq!(res.report.n_original, 2);
    assert_eq!(res.report.target_dim, 4 + 4 * res.report.colors);

    // the area form is not a discrepancy we can absorb
    let area = Form::monomial(&dom, dom.constant_fn(Rational::one()), &[0, 1]).unwrap();
    assert!(matches!(lift_family(&f, &area, None, &cover, &ComplexOptions::default()), Err(Error::NotExact(_))));
}

fn family_setup() -> (Arc<Domain>, Cover, PPMap, Form) {
    let base = unit_box(2);
    let dom = base.with_parameters(&[(q(0, 1), q(1, 1))]).unwrap();
    let cover = Cover::plateau(&dom, 1, &[2]).unwrap();
    let coords = vec![dom.coordinate(1).unwrap(), dom.coordinate(2).unwrap()];
    let f = PPMap::new(&dom, coords, true).unwrap();
    // target(z) = f* ω_std + s(z) dβ, with s = 0 for z <= 1/4
    let s = bspline_on(2, &q(1, 4), &q(2, 1)).unwrap();
    let bx = bspline_on(2, &q(1, 8), &q(5, 8)).unwrap();
    let by = bspline_on(3, &q(1, 4), &q(7, 8)).unwrap();
    let beta = Form::monomial(&dom, PPFunction::tensor(&[s, bx, by]), &[1]).unwrap();
    let target = f.pullback_standard().unwrap().add(&beta.d()).unwrap();
    (dom, cover, f, target)
}

#[test]
fn relative_family() {
    let (dom, cover, f, target) = family_setup();
    let rel = Relative::with_plateau(vec![Interval::new(q(0, 1), q(1, 8))], vec![Interval::new(q(-1, 8), q(1, 4))], 1)
        .unwrap();
    let res = lift_family(&f, &target, Some(&rel), &cover, &ComplexOptions::default()).unwrap();
    assert!(res.report.all_ok(), "{:?}", res.report);
    assert_eq!(res.report.relative, Some(true));
    // η and the h-coordinates vanish wherever the family is standard; the
    // t-coordinates vanish where ψ = 1
    let quiet = [Interval::new(q(0, 1), q(1, 4))];
    assert!(res.eta.components().values().all(|c| vanishes_over(c, &dom, &quiet).unwrap()));
    for (i, c) in res.g.coordinates[2..].iter().enumerate() {
        if i % 2 == 0 {
            assert!(vanishes_over(c, &dom, &quiet).unwrap());
        }
        assert!(vanishes_over(c, &dom, &rel.b).unwrap());
    }
}

#[test]
fn relative_point() {
    let (_, cover, f, target) = family_setup();
    let rel = Relative::with_plateau(vec![Interval::new(q(0, 1), q(0, 1))], vec![Interval::new(q(-1, 8), q(1, 8))], 1)
        .unwrap();
    let res = lift_family(&f, &target, Some(&rel), &cover, &ComplexOptions::default()).unwrap();
    assert!(res.report.all_ok());
    // at z = 0 the homotopy is f padded with zeros for every s
    for (i, c) in res.homotopy.coordinates.iter().enumerate() {
        let at = c.restrict(1, &q(0, 1)).unwrap();
        if i >= 2 {
            assert!(at.is_zero());
        }
    }
}

#[test]
fn relative_violations() {
    let (_, cover, f, target) = family_setup();
    // the family is not standard over U = [0, 1/2]
    let rel = Relative::with_plateau(vec![Interval::new(q(1, 8), q(1, 4))], vec![Interval::new(q(0, 1), q(1, 2))], 1)
        .unwrap();
    assert!(matches!(
        lift_family(&f, &target, Some(&rel), &cover, &ComplexOptions::default()),
        Err(Error::Relative(_))
    ));
    assert!(Relative::with_plateau(vec![Interval::new(q(0, 1), q(1, 2))], vec![Interval::new(q(0, 1), q(1, 2))], 1)
        .is_err());
}

#[test]
fn psi_must_kill_eta() {
    let dom = unit_box(1).with_parameters(&[(q(0, 1), q(1, 1))]).unwrap();
    let cover = Cover::plateau(&dom, 1, &[2]).unwrap();
    let b = bspline_on(2, &q(1, 4), &q(3, 4)).unwrap();
    let one = PPFunction::constant_on(&[AxisKind::Line], Rational::one());
    let eta = Form::monomial(&dom, PPFunction::tensor(&[one.clone(), b]), &[1]).unwrap();
    let psi = PPFunction::tensor(&[bspline_on(1, &q(0, 1), &q(1, 2)).unwrap(), one]);
    assert!(matches!(decompose(&eta, &cover, Some(&psi), None), Err(Error::Relative(_))));
}
