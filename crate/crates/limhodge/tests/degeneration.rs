mod common;

use std::collections::BTreeMap;

use serde_json::{json, Value};

use common::{brute_grading, descended, family, kunneth};
use limhodge::degeneration::*;
use limhodge::hl::Grade;

#[test]
fn nodal_conic_limit() {
    let inst = family("nodal-conic");
    let r = run_pipeline(&inst, &PipelineOptions::default()).unwrap();
    assert!(r.passed, "{:?}", r.failures());
    assert_eq!(r.betti, vec![1, 0, 1]);
    // Two rank-one restrictions from the components to the node kill one
    // copy of H^0; the Gysin maps kill one copy of H^2.
    let expected = BTreeMap::from([((-1, 0), 1), ((1, 0), 1)]);
    assert_eq!(descended(&inst), expected);
    assert_eq!(brute_grading(&build_page(&inst).unwrap().module), expected);
}

#[test]
fn cycles_and_chains() {
    for (name, betti) in [("cycle:2", vec![1, 2, 1]), ("cycle:3", vec![1, 2, 1]), ("chain:3", vec![1, 0, 1])] {
        let r = run_pipeline(&family(name), &PipelineOptions::default()).unwrap();
        assert!(r.passed, "{name}: {:?}", r.failures());
        assert_eq!(r.betti, betti, "{name}");
    }
}

#[test]
fn smooth_curves_are_pure() {
    for g in 0..=2usize {
        let r = run_pipeline(&family(&format!("smooth-curve:{g}")), &PipelineOptions::default()).unwrap();
        assert!(r.passed);
        assert_eq!(r.betti, vec![1, 2 * g, 1]);
    }
}

#[test]
fn product_matches_kunneth() {
    let a = family("nodal-conic");
    let p = family("product:nodal-conic+nodal-conic");
    let r = run_pipeline(&p, &PipelineOptions::default()).unwrap();
    assert!(r.passed, "{:?}", r.failures());
    assert_eq!(r.betti, vec![1, 0, 2, 0, 1]);
    let single = brute_grading(&build_page(&a).unwrap().module);
    let expected = kunneth(&single, &single);
    assert_eq!(brute_grading(&build_page(&p).unwrap().module), expected);
    assert_eq!(descended(&p), expected);
}

#[test]
fn product_with_elliptic_curve() {
    let a = family("cycle:2");
    let e = family("smooth-curve:1");
    let p = family("product:cycle:2+smooth-curve:1");
    let r = run_pipeline(&p, &PipelineOptions::default()).unwrap();
    assert!(r.passed, "{:?}", r.failures());
    let expected = kunneth(&brute_grading(&build_page(&a).unwrap().module), &brute_grading(&build_page(&e).unwrap().module));
    assert_eq!(descended(&p), expected);
    assert_eq!(r.betti, vec![1, 4, 6, 4, 1]);
}

#[test]
fn direction_subsets_and_samples() {
    let p = family("product:nodal-conic+nodal-conic");
    let opts = PipelineOptions { directions: Some(vec![0b01, 0b11]), samples: 2, seed: 9 };
    let r = run_pipeline(&p, &opts).unwrap();
    assert!(r.passed);
    assert_eq!(r.directions.len(), 2);
    assert_eq!(r.directions[1].directions, vec![1, 2]);
    assert_eq!(r.samples.len(), 2);
    let bad = PipelineOptions { directions: Some(vec![0b100]), samples: 1, seed: 0 };
    assert!(matches!(run_pipeline(&p, &bad), Err(DegenerationError::SchemaError(_))));
}

#[test]
fn reports_are_deterministic() {
    let p = family("product:nodal-conic+nodal-conic");
    let a = serde_json::to_string(&run_pipeline(&p, &PipelineOptions::default()).unwrap()).unwrap();
    let b = serde_json::to_string(&run_pipeline(&p, &PipelineOptions::default()).unwrap()).unwrap();
    assert_eq!(a, b);
}

#[test]
fn json_round_trip() {
    for name in ["nodal-conic", "cycle:3", "smooth-curve:2", "product:nodal-conic+smooth-curve:1", "random:5"] {
        let inst = family(name);
        let text = serde_json::to_string(&inst.to_json()).unwrap();
        let back = DegenerationInstance::from_str(&text).unwrap();
        assert_eq!(back.to_json(), inst.to_json(), "{name}");
        assert_eq!(page_dim(&back), page_dim(&inst));
    }
}

#[test]
fn family_names_round_trip() {
    for name in ["nodal-conic", "chain:4", "cycle:5", "smooth-curve:3", "random:11", "product:nodal-conic+cycle:2"] {
        let f: Family = name.parse().unwrap();
        assert_eq!(f.to_string(), name);
    }
    assert!(matches!("cycle:x".parse::<Family>(), Err(DegenerationError::ParamError(_))));
    assert!(matches!(generate(&"cycle:1".parse().unwrap()), Err(DegenerationError::ParamError(_))));
}

#[test]
fn random_families_stay_in_scope() {
    for seed in 0..40 {
        let inst = generate(&generate::random_family(seed)).unwrap();
        assert!(inst.k() <= 3 && inst.alphabet.len() <= 6, "seed {seed}");
        assert!(page_dim(&inst) <= generate::RANDOM_PAGE_BUDGET);
    }
}

fn nodal_json() -> Value {
    family("nodal-conic").to_json()
}

fn kind(v: Value) -> &'static str {
    match DegenerationInstance::from_str(&v.to_string()) {
        Ok(_) => "valid",
        Err(e) => e.kind(),
    }
}

fn negate(m: &mut Value) {
    for row in m.as_array_mut().unwrap() {
        for x in row.as_array_mut().unwrap() {
            *x = json!(-x.as_i64().unwrap());
        }
    }
}

#[test]
fn validation_errors() {
    assert_eq!(kind(nodal_json()), "valid");

    let mut v = nodal_json();
    v["restrictions"].as_array_mut().unwrap().remove(0);
    assert_eq!(kind(v), "SchemaError");
    assert!(matches!(DegenerationInstance::from_str("{"), Err(DegenerationError::SchemaError(_))));

    let mut v = nodal_json();
    v["strata"][0]["cup"] = json!([[1]]);
    v["strata"][0]["hodge"] = json!([[0, 0, 1]]);
    v["strata"][0]["lefschetz"] = json!([[0]]);
    v["strata"][0]["trace"] = json!([1]);
    v["restrictions"][0]["matrix"] = json!([[1]]);
    v["gysins"][0]["matrix"] = json!([[-1]]);
    assert_eq!(kind(v), "PurityViolation");

    let mut v = nodal_json();
    v["strata"][0]["lefschetz"] = json!([[0, 0], [0, 0]]);
    assert_eq!(kind(v), "HardLefschetzViolation");

    let mut v = nodal_json();
    v["strata"][0]["cup"] = json!([[0, 1], [2, 0]]);
    assert_eq!(kind(v), "PairingViolation");

    let mut v = family("smooth-curve:1").to_json();
    v["strata"][0]["hodge"] = json!([[0, 0, 1], [1, 0, 2], [1, 1, 1]]);
    v["strata"][0].as_object_mut().unwrap().remove("hodge_basis");
    assert_eq!(kind(v), "HodgeViolation");

    let mut v = nodal_json();
    v["gysins"][0]["matrix"] = json!([[0], [1]]);
    assert_eq!(kind(v), "AdjointnessViolation");

    // Flipping one restriction and its adjoint Gysin map keeps adjointness
    // but breaks the commuting squares.
    let mut v = family("product:nodal-conic+nodal-conic").to_json();
    let (from, add) = (v["restrictions"][0]["from"].clone(), v["restrictions"][0]["add"].clone());
    negate(&mut v["restrictions"][0]["matrix"]);
    let gys = v["gysins"].as_array_mut().unwrap();
    let g = gys.iter_mut().find(|g| g["to"] == from && g["add"] == add).unwrap();
    negate(&mut g["matrix"]);
    assert_eq!(kind(v), "CompatibilityViolation");
}

#[test]
fn page_module_shape() {
    let inst = family("nodal-conic");
    let page = build_page(&inst).unwrap();
    // Components contribute H^0 and H^2 at q = 0; the node contributes
    // u^0 and u^1 at j = -1 and j = 1.
    assert_eq!(page.module.total_dim(), 6);
    let node = page.summand(0b11, &[1], 0).unwrap();
    assert_eq!(node.grade, Grade::new(0, vec![1]));
    assert_eq!(node.twist(&[2]), 0);
    let comp = page.summand(0b01, &[0], 2).unwrap();
    assert_eq!(comp.grade, Grade::new(1, vec![0]));
}

#[test]
fn spectral_pages_degenerate_at_two() {
    let inst = family("product:nodal-conic+nodal-conic");
    for dirs in 0..4 {
        for w in spectral_pages(&inst, dirs).unwrap() {
            assert!(w.degenerates_at <= 2, "I = {dirs:b}, weight {}", w.weight);
        }
    }
}
