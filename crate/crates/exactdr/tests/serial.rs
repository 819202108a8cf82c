use std::sync::Arc;

use exactdr::serial::{
    form_from_text, form_to_text, function_from_text, function_to_text, map_from_text, map_to_text, FormData,
    PPFunctionData,
};
use exactdr_core::exactpp::{AxisSpec, PPFunction, Poly};
use exactdr_core::forms::{Domain, PPMap};
use exactdr_core::random::{self, RandomOptions};
use exactdr_core::{q, Rational};

fn domains() -> Vec<Arc<Domain>> {
    vec![
        Domain::boxed(&[(q(0, 1), q(1, 1)), (q(-1, 2), q(3, 2))]).unwrap(),
        Domain::torus(&[q(1, 1), q(2, 3)]).unwrap(),
        Domain::boxed(&[(q(0, 1), q(1, 1))]).unwrap().with_parameters(&[(q(0, 1), q(1, 1))]).unwrap(),
    ]
}

fn opts() -> RandomOptions {
    RandomOptions { terms: 2, density: 60, ..Default::default() }
}

#[test]
fn functions_round_trip_bit_exact() {
    let mut rng = random::rng(7);
    for dom in domains() {
        for _ in 0..10 {
            let f = random::function(&mut rng, &dom, &opts()).unwrap();
            let text = function_to_text(&f);
            let g = function_from_text(&text).unwrap();
            assert_eq!(g, f);
            assert_eq!(g.axes(), f.axes());
            assert_eq!(g.cells(), f.cells());
            assert_eq!(function_to_text(&g), text);
        }
    }
}

#[test]
fn big_coefficients_survive() {
    let huge = Rational::parse("-123456789012345678901234567891/1024").unwrap();
    let f = PPFunction::univariate(
        AxisSpec::line(vec![q(0, 1), q(1, 3)]),
        vec![Poly::zero(), Poly::univariate(0, &[huge.clone(), q(1, 9)]), Poly::constant(q(5, 1))],
    )
    .unwrap();
    let text = function_to_text(&f);
    assert!(huge.to_string().len() > 30);
    assert!(text.contains(&format!("\"{huge}\"")));
    assert_eq!(function_from_text(&text).unwrap(), f);
}

#[test]
fn forms_and_maps_round_trip() {
    let mut rng = random::rng(8);
    for dom in domains() {
        for k in 0..=2 {
            let w = random::form(&mut rng, &dom, k, &opts()).unwrap();
            let text = form_to_text(&w);
            let back = form_from_text(&text).unwrap();
            assert!(back.equals(&w));
            assert_eq!(back.domain(), w.domain());
            assert_eq!(form_to_text(&back), text);
        }
        let coords = (0..3).map(|_| random::function(&mut rng, &dom, &opts()).unwrap()).collect();
        let m = PPMap::new(&dom, coords, true).unwrap();
        let text = map_to_text(&m);
        let back = map_from_text(&text).unwrap();
        assert_eq!(back.coordinates, m.coordinates);
        assert!(back.declared_embedding);
        assert_eq!(map_to_text(&back), text);
    }
}

#[test]
fn values_are_unchanged() {
    let mut rng = random::rng(9);
    let dom = &domains()[1];
    let f = random::function(&mut rng, dom, &opts()).unwrap();
    let g = function_from_text(&function_to_text(&f)).unwrap();
    for i in 0..7 {
        let x = [q(i, 7), q(2 * i + 1, 21)];
        assert_eq!(f.eval(&x), g.eval(&x));
    }
}

#[test]
fn malformed_data_is_rejected() {
    let line = r#"{"kind": "line", "breakpoints": ["0", "1"]}"#;
    // depends on x in the upper tail
    let tail =
        format!(r#"{{"axes": [{line}], "cells": [{{"index": [2], "terms": [{{"coeff": "1", "exps": [1]}}]}}]}}"#);
    assert!(function_from_text(&tail).is_err());
    let decimal =
        format!(r#"{{"axes": [{line}], "cells": [{{"index": [1], "terms": [{{"coeff": "0.5", "exps": [0]}}]}}]}}"#);
    assert!(function_from_text(&decimal).unwrap_err().contains("num/den"));
    let range = format!(r#"{{"axes": [{line}], "cells": [{{"index": [7], "terms": []}}]}}"#);
    assert!(function_from_text(&range).is_err());
    let arity =
        format!(r#"{{"axes": [{line}], "cells": [{{"index": [1], "terms": [{{"coeff": "1", "exps": [1, 0]}}]}}]}}"#);
    assert!(function_from_text(&arity).is_err());
    let unsorted = r#"{"axes": [{"kind": "line", "breakpoints": ["1", "0"]}], "cells": []}"#;
    assert!(function_from_text(unsorted).is_err());
    let extra = r#"{"axes": [], "cells": [], "note": 1}"#;
    assert!(function_from_text(extra).is_err());
    let bad_form: FormData = serde_json::from_str(
        r#"{"domain": {"axes": [{"kind": "circle", "period": "1"}]}, "degree": 1,
            "components": [{"axes": [0, 0], "coeff": {"axes": [{"kind": "circle", "period": "1", "breakpoints": ["0"]}], "cells": []}}]}"#,
    )
    .unwrap();
    assert!(bad_form.build().is_err());
}

#[test]
fn zero_cells_are_dropped() {
    let d: PPFunctionData = serde_json::from_str(
        r#"{"axes": [{"kind": "line", "breakpoints": ["0", "1"]}],
            "cells": [{"index": [1], "terms": [{"coeff": "0", "exps": [3]}]}]}"#,
    )
    .unwrap();
    let f = d.build().unwrap();
    assert!(f.is_zero());
    assert!(PPFunctionData::from(&f).cells.is_empty());
}
