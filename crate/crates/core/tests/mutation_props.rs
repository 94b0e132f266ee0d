mod common;

use std::collections::BTreeSet;

use emut_core::model::serialize_model;
use emut_core::mutation::{generate_mutants, GenerationConfig, Mutation, OperatorKind};
use proptest::prelude::*;

/// Canonical text split into per-component blocks plus the remaining lines.
fn blocks(text: &str) -> (Vec<(String, String)>, BTreeSet<String>) {
    let mut comps = Vec::new();
    let mut rest = BTreeSet::new();
    let mut current: Option<(String, String)> = None;
    for line in text.lines() {
        if let Some((name, body)) = current.as_mut() {
            body.push_str(line);
            body.push('\n');
            if line.trim() == "}" {
                comps.push((name.clone(), body.clone()));
                current = None;
            }
        } else if let Some(name) = line.strip_prefix("component ") {
            let name = name.trim_end_matches(" {").to_string();
            current = Some((name, format!("{line}\n")));
        } else {
            rest.insert(line.to_string());
        }
    }
    (comps, rest)
}

fn mentions(line: &str, component: &str) -> bool {
    line.split(|c: char| !(c.is_alphanumeric() || c == '_')).any(|w| w == component)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn mutants_are_first_order(spec in common::model_spec_s()) {
        let model = spec.model();
        let catalog = generate_mutants(&model, &GenerationConfig::default());
        let (orig_comps, orig_rest) = blocks(&serialize_model(&model));
        for m in &catalog.mutants {
            let (comps, rest) = blocks(&serialize_model(&m.model));
            let target = m.provenance.component();
            let changed: Vec<&str> = orig_comps
                .iter()
                .filter(|c| !comps.contains(c))
                .map(|c| c.0.as_str())
                .chain(comps.iter().filter(|c| !orig_comps.contains(c)).map(|c| c.0.as_str()))
                .collect();
            prop_assert!(changed.iter().all(|c| *c == target), "{}: {:?}", m.id, changed);
            prop_assert!(!changed.is_empty(), "{} changes nothing", m.id);
            for line in orig_rest.symmetric_difference(&rest) {
                prop_assert!(
                    matches!(m.kind, OperatorKind::Cro | OperatorKind::Cio) && mentions(line, target),
                    "{}: stray change `{}`", m.id, line
                );
            }
            if !matches!(m.provenance, Mutation::RemoveComponent { .. } | Mutation::InsertComponent { .. }) {
                prop_assert_eq!(comps.len(), orig_comps.len());
            }
        }
    }

    #[test]
    fn provenance_reproduces_every_mutant(spec in common::model_spec_s()) {
        let model = spec.model();
        let catalog = generate_mutants(&model, &GenerationConfig::default());
        prop_assert!(catalog.irreproducible().is_empty());
        for m in &catalog.mutants {
            let again = m.provenance.apply(&model).unwrap();
            prop_assert_eq!(serialize_model(&again), serialize_model(&m.model));
        }
    }

    #[test]
    fn generation_is_deterministic_and_accounted(spec in common::model_spec_s()) {
        let model = spec.model();
        let cfg = GenerationConfig::default();
        let a = generate_mutants(&model, &cfg);
        let b = generate_mutants(&model, &cfg);
        prop_assert_eq!(&a.mutants, &b.mutants);
        prop_assert_eq!(&a.discarded, &b.discarded);
        prop_assert_eq!(a.candidates(), cfg.candidate_count(&model));
        prop_assert_eq!(a.candidates(), a.mutants.len() + a.discarded.len());
        let ids: BTreeSet<&String> = a.mutants.iter().map(|m| &m.id).collect();
        prop_assert_eq!(ids.len(), a.mutants.len());
    }
}
