mod common;

use emut_core::model::{parse_model, parse_unchecked, serialize_model, validate, DiagCode};
use emut_core::pta::to_pta;

#[test]
fn corpus_has_at_least_ten_models() {
    assert!(common::corpus().len() >= 10);
}

#[test]
fn every_corpus_model_round_trips() {
    for (name, text) in common::corpus() {
        let model = parse_model(&text).unwrap_or_else(|e| panic!("{name}: {e}"));
        let canonical = serialize_model(&model);
        let again = parse_model(&canonical).unwrap_or_else(|e| panic!("{name}: {e}\n{canonical}"));
        assert_eq!(again, model, "{name}");
        assert_eq!(serialize_model(&again), canonical, "{name}");
    }
}

#[test]
fn only_the_starved_model_warns() {
    for (name, text) in common::corpus() {
        let (model, _) = parse_unchecked(&text).unwrap();
        let codes: Vec<DiagCode> = validate(&model).into_iter().map(|d| d.code).collect();
        if name == "starved.eam" {
            assert_eq!(codes, vec![DiagCode::StarvedTrigger]);
        } else {
            assert!(codes.is_empty(), "{name}: {codes:?}");
        }
    }
}

#[test]
fn every_corpus_model_translates() {
    for (name, text) in common::corpus() {
        let model = parse_model(&text).unwrap();
        let net = to_pta(&model);
        assert_eq!(net.automata.len(), 2 * model.components.len() + 1, "{name}");
        net.check().unwrap_or_else(|e| panic!("{name}: {e}"));
        assert_eq!(to_pta(&model), net, "{name}");
    }
}
