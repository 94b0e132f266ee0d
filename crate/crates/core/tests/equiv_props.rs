mod common;

use emut_core::equiv::{check_equivalence, max_divergence, EquivalenceProblem, EquivalenceVerdict};
use emut_core::model::Parameter;
use emut_core::mutation::{generate_mutants, GenerationConfig};
use emut_core::pta::{to_pta, PtaNetwork};
use emut_core::sim::{run_once_with, sample_energy, DwellPolicy, EnvValuation};
use emut_core::Rational;
use proptest::prelude::*;

const BOUND: i64 = 80;
const N: usize = 8;

/// Every valuation of the box, by plain nested enumeration.
fn all_valuations(params: &[Parameter]) -> Vec<EnvValuation> {
    let mut out = vec![EnvValuation::default()];
    for p in params {
        out = out
            .into_iter()
            .flat_map(|env| {
                (p.lo..=p.hi).map(move |v| {
                    let mut e = env.clone();
                    e.0.insert(p.name.clone(), v);
                    e
                })
            })
            .collect();
    }
    out
}

fn signal(net: &PtaNetwork, env: &EnvValuation) -> Vec<Rational> {
    let trace = run_once_with(net, BOUND, env, 0, DwellPolicy::Wcet).unwrap();
    sample_energy(&trace, "total", N).unwrap().values().collect()
}

/// Largest divergence over the whole space.
fn brute_force(a: &PtaNetwork, b: &PtaNetwork) -> Rational {
    all_valuations(&a.parameters)
        .iter()
        .flat_map(|env| signal(a, env).into_iter().zip(signal(b, env)).map(|(x, y)| (x - y).abs()).collect::<Vec<_>>())
        .max()
        .unwrap_or(Rational::ZERO)
}

fn verdict(a: &PtaNetwork, b: &PtaNetwork, threshold: Rational, budget: u64) -> EquivalenceVerdict {
    let p = EquivalenceProblem { original: a, mutant: b, threshold, bound: BOUND, samples: N };
    check_equivalence(&p, budget).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn exhaustive_search_agrees_with_brute_force(spec in common::model_spec_s(), pick in any::<prop::sample::Index>(), thr in 1i64..=20) {
        let model = spec.model();
        let catalog = generate_mutants(&model, &GenerationConfig::default());
        prop_assume!(!catalog.mutants.is_empty());
        let mutant = &catalog.mutants[pick.index(catalog.mutants.len())];
        let (a, b) = (to_pta(&model), to_pta(&mutant.model));
        let threshold = Rational::from_int(thr);
        let oracle = brute_force(&a, &b);
        let v = verdict(&a, &b, threshold, 10_000);
        prop_assert_eq!(v.is_equivalent(), oracle < threshold);
        match v {
            EquivalenceVerdict::NonEquivalent { witness, divergence, .. } => {
                prop_assert_eq!(divergence, oracle);
                let (again, _) = max_divergence(&a, &b, &witness, BOUND, N).unwrap();
                prop_assert!(again >= threshold);
            }
            EquivalenceVerdict::EquivalentUpToBudget { exhaustive, explored, max_seen_divergence, .. } => {
                prop_assert!(exhaustive);
                prop_assert_eq!(explored, spec.space());
                prop_assert_eq!(max_seen_divergence, oracle);
            }
        }
    }

    #[test]
    fn swapping_sides_preserves_verdict_and_witness(spec in common::model_spec_s(), pick in any::<prop::sample::Index>()) {
        let model = spec.model();
        let catalog = generate_mutants(&model, &GenerationConfig::default());
        prop_assume!(!catalog.mutants.is_empty());
        let mutant = &catalog.mutants[pick.index(catalog.mutants.len())];
        let (a, b) = (to_pta(&model), to_pta(&mutant.model));
        let one = Rational::from_int(1);
        prop_assert_eq!(verdict(&a, &b, one, 10_000), verdict(&b, &a, one, 10_000));
    }

    #[test]
    fn lower_thresholds_keep_non_equivalence(spec in common::model_spec_s(), pick in any::<prop::sample::Index>(), thr in 1i64..=30) {
        let model = spec.model();
        let catalog = generate_mutants(&model, &GenerationConfig::default());
        prop_assume!(!catalog.mutants.is_empty());
        let mutant = &catalog.mutants[pick.index(catalog.mutants.len())];
        let (a, b) = (to_pta(&model), to_pta(&mutant.model));
        if let EquivalenceVerdict::NonEquivalent { witness, .. } = verdict(&a, &b, Rational::from_int(thr), 10_000) {
            for lower in 1..thr {
                prop_assert!(!verdict(&a, &b, Rational::from_int(lower), 10_000).is_equivalent());
                let (d, _) = max_divergence(&a, &b, &witness, BOUND, N).unwrap();
                prop_assert!(d >= Rational::from_int(lower));
            }
        }
    }

    #[test]
    fn small_budgets_stay_sound(spec in common::model_spec_s(), pick in any::<prop::sample::Index>(), budget in 1u64..=12) {
        let model = spec.model();
        let catalog = generate_mutants(&model, &GenerationConfig::default());
        prop_assume!(!catalog.mutants.is_empty());
        let mutant = &catalog.mutants[pick.index(catalog.mutants.len())];
        let (a, b) = (to_pta(&model), to_pta(&mutant.model));
        let one = Rational::from_int(1);
        match verdict(&a, &b, one, budget) {
            EquivalenceVerdict::NonEquivalent { witness, divergence, explored, .. } => {
                prop_assert!(explored <= 2 * budget);
                prop_assert_eq!(max_divergence(&a, &b, &witness, BOUND, N).unwrap().0, divergence);
            }
            EquivalenceVerdict::EquivalentUpToBudget { exhaustive, max_seen_divergence, explored, .. } => {
                prop_assert!(explored <= 2 * budget);
                prop_assert!(max_seen_divergence < one);
                if exhaustive {
                    prop_assert!(brute_force(&a, &b) < one);
                }
            }
        }
    }
}

#[test]
fn wide_space_falls_back_to_sampling() {
    let model = common::corpus_model("wide_space.eam");
    assert!(model.parameter_space_size() > 10_000);
    let catalog = generate_mutants(&model, &GenerationConfig::default());
    let a = to_pta(&model);
    for m in &catalog.mutants {
        let v = verdict(&a, &to_pta(&m.model), Rational::from_int(1), 500);
        if let EquivalenceVerdict::EquivalentUpToBudget { exhaustive, .. } = v {
            assert!(!exhaustive, "{}", m.id);
        }
    }
}
