use std::collections::BTreeMap;

use qcov::bellwitness::{classify, Verdict};
use qcov::input::{parse_state_json, parse_state_keyword};
use qcov::lhv::{lhv_chsh, DiceSpec, HiddenVariable, LhvModel};
use qcov::linalg::{kron, CMatrix, C64};
use qcov::random::Sampler;
use qcov::state::{realize, DensityOperator, Split, StateSpec};
use qcov::Error;

fn responses(pairs: &[(&str, f64)]) -> BTreeMap<String, f64> {
    pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
}

#[test]
fn deterministic_lhv_reaches_but_not_exceeds_two() {
    let mut best = 0.0_f64;
    for bits in 0..16u32 {
        let sign = |k: u32| if bits >> k & 1 == 1 { 1.0 } else { -1.0 };
        let m = LhvModel::new(vec![HiddenVariable {
            weight: 1.0,
            response_a: responses(&[("a", sign(0)), ("a'", sign(1))]),
            response_b: responses(&[("b", sign(2)), ("b'", sign(3))]),
        }])
        .unwrap();
        best = best.max(lhv_chsh(&m, "a", "a'", "b", "b'").unwrap());
    }
    assert_eq!(best, 2.0);
}

#[test]
fn npt_state_at_three_by_three_is_entangled() {
    let d = 3;
    let mut v = vec![C64::new(0.0, 0.0); d * d];
    for k in 0..d {
        v[k * d + k] = C64::new(1.0 / (d as f64).sqrt(), 0.0);
    }
    let rho = DensityOperator::pure(&v, Split::new(3, 3).unwrap()).unwrap();
    let c = classify(&StateSpec::general(rho)).unwrap();
    assert_eq!(c.verdict, Verdict::Entangled);
    assert!(c.chsh_best.is_none());
}

#[test]
fn ppt_general_state_beyond_decisive_dimension_stays_undecided() {
    let mut s = Sampler::new(11);
    let spec = s.mixture_spec(Split::new(3, 3).unwrap(), 4);
    let rho = realize(&spec).unwrap();
    let c = classify(&StateSpec::general(rho)).unwrap();
    assert_eq!(c.verdict, Verdict::NonSeparable);
    assert!(c.note.contains("not decisive"));
}

#[test]
fn json_and_keyword_forms_agree() {
    let from_json = parse_state_json(r#"{"split":[2,2],"spec":{"werner":0.25}}"#).unwrap();
    let from_kw = parse_state_keyword("werner:0.25").unwrap().unwrap();
    assert!(realize(&from_json)
        .unwrap()
        .matrix()
        .approx_eq(realize(&from_kw).unwrap().matrix(), 0.0));
}

#[test]
fn product_json_realizes_to_kronecker_product() {
    let text = r#"{"split":[2,3],"spec":{"product":[
        [[[1,0],[0,0]],[[0,0],[0,0]]],
        [[[0.5,0],[0,0],[0,0]],[[0,0],[0.25,0],[0,0]],[[0,0],[0,0],[0.25,0]]]
    ]}}"#;
    let rho = realize(&parse_state_json(text).unwrap()).unwrap();
    let expected = kron(
        &CMatrix::diag_real(&[1.0, 0.0]),
        &CMatrix::diag_real(&[0.5, 0.25, 0.25]),
    );
    assert!(rho.matrix().approx_eq(&expected, 0.0));
}

#[test]
fn declared_split_must_match_factor_dimensions() {
    let text = r#"{"split":[3,2],"spec":{"product":[
        [[[1,0],[0,0]],[[0,0],[0,0]]],
        [[[1,0],[0,0]],[[0,0],[0,0]]]
    ]}}"#;
    let err = parse_state_json(text).unwrap_err();
    assert!(matches!(err, Error::DimensionMismatch(_)));
    assert!(err.is_semantic());
}

#[test]
fn unknown_fields_in_dice_spec_are_rejected() {
    assert!(DiceSpec::from_json(r#"{"pairs":[["1/1","1/2","1/2"]],"extra":1}"#).is_err());
    assert!(DiceSpec::from_json(r#"{"pairs":[["1/2","1/2","1/2"]]}"#).is_err());
}
