mod common;

use emut_core::equiv::partition_catalog;
use emut_core::mutation::generate_mutants;
use emut_core::pipeline::{self, PipelineConfig};
use emut_core::sim::{DwellPolicy, EnergySignal, EnvValuation};
use emut_core::testing::{
    build_kill_matrix, execute_test, generate_tests, minimize_suite, mutation_score, witness_tests, KillMatrix,
    SuiteProvenance, TestCase, TestSuite,
};
use emut_core::Rational;
use proptest::prelude::*;

fn suite_of(n: usize) -> TestSuite {
    let tests = (1..=n)
        .map(|i| TestCase {
            id: format!("T{i:04}"),
            env: EnvValuation::default(),
            seed: i as u64,
            dwell: DwellPolicy::Uniform,
            triggers: Vec::new(),
            expected: EnergySignal { bound: 1, n: 1, samples: vec![(Rational::from_int(1), Rational::ZERO)] },
        })
        .collect();
    TestSuite { provenance: SuiteProvenance { runs: n, bound: 1, samples: 1, master_seed: 0 }, tests }
}

fn matrix(kills: &[Vec<bool>], cols: usize) -> KillMatrix {
    KillMatrix::from_kills(
        (1..=kills.len()).map(|i| format!("T{i:04}")).collect(),
        (1..=cols).map(|j| format!("M{j}")).collect(),
        kills,
    )
}

fn kills_s() -> impl Strategy<Value = (usize, Vec<Vec<bool>>)> {
    (0usize..=20, 0usize..=20).prop_flat_map(|(rows, cols)| {
        (Just(cols), proptest::collection::vec(proptest::collection::vec(proptest::bool::weighted(0.25), cols), rows))
    })
}

/// Columns killed by the given rows, computed directly from the flags.
fn kill_set(kills: &[Vec<bool>], rows: &[usize], cols: usize) -> Vec<bool> {
    (0..cols).map(|c| rows.iter().any(|&r| kills[r][c])).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn minimization_preserves_score_and_is_irreducible((cols, kills) in kills_s()) {
        let m = matrix(&kills, cols);
        let suite = suite_of(kills.len());
        let min = minimize_suite(&suite, &m);
        let kept: Vec<usize> = min.ids().iter().map(|id| suite.ids().iter().position(|x| x == id).unwrap()).collect();
        prop_assert!(kept.windows(2).all(|w| w[0] < w[1]));
        let all: Vec<usize> = (0..kills.len()).collect();
        let target = kill_set(&kills, &all, cols);
        prop_assert_eq!(&kill_set(&kills, &kept, cols), &target);
        prop_assert_eq!(mutation_score(&m.select_rows(&kept)), mutation_score(&m));
        for drop in 0..kept.len() {
            let fewer: Vec<usize> = kept.iter().enumerate().filter(|(i, _)| *i != drop).map(|(_, r)| *r).collect();
            prop_assert_ne!(&kill_set(&kills, &fewer, cols), &target);
        }
    }

    #[test]
    fn adding_a_test_never_lowers_the_score((cols, kills) in kills_s(), extra in proptest::collection::vec(any::<bool>(), 20)) {
        let before = mutation_score(&matrix(&kills, cols));
        let mut more = kills.clone();
        more.push(extra[..cols].to_vec());
        let after = mutation_score(&matrix(&more, cols));
        prop_assert!(after.value >= before.value);
        prop_assert!(after.fraction() >= before.fraction());
    }

    #[test]
    fn score_counts_killed_columns((cols, kills) in kills_s()) {
        let s = mutation_score(&matrix(&kills, cols));
        let killed = (0..cols).filter(|&c| kills.iter().any(|r| r[c])).count();
        prop_assert_eq!(s.killed, killed);
        prop_assert_eq!(s.live, cols);
        let expected = if cols == 0 { 1.0 } else { killed as f64 / cols as f64 };
        prop_assert_eq!(s.value, expected);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn generated_tests_replay_bit_exactly(spec in common::model_spec_s(), seed in any::<u64>()) {
        let model = spec.model();
        let cfg = PipelineConfig { runs: 6, bound: 90, samples: 9, seed, ..PipelineConfig::default() };
        let suite = generate_tests(&model, &cfg.query(), cfg.samples, seed).unwrap();
        for t in &suite.tests {
            prop_assert_eq!(&execute_test(&model, t).unwrap(), &t.expected);
        }
    }

    #[test]
    fn every_witness_kills_its_mutant(spec in common::model_spec_s(), thr in 1i64..=10) {
        let model = spec.model();
        let cfg = PipelineConfig { threshold: Rational::from_int(thr), bound: 90, samples: 9, ..PipelineConfig::default() };
        let catalog = generate_mutants(&model, &cfg.generation);
        let partition = partition_catalog(&catalog, &cfg.equiv()).unwrap();
        let witnesses = witness_tests(&model, &partition.verdicts, cfg.bound, cfg.samples).unwrap();
        prop_assert_eq!(witnesses.len(), partition.live.len());
        let suite = TestSuite {
            provenance: SuiteProvenance { runs: 0, bound: cfg.bound, samples: cfg.samples, master_seed: 0 },
            tests: witnesses,
        };
        let m = build_kill_matrix(&suite, &partition.live, cfg.threshold).unwrap();
        for (i, live) in partition.live.iter().enumerate() {
            prop_assert_eq!(&m.rows[i], &format!("W_{}", live.id));
            prop_assert!(m.cells[i][i].detected, "{} escapes its witness", live.id);
        }
        prop_assert_eq!(mutation_score(&m).value, 1.0);
    }
}

#[test]
fn pipeline_is_deterministic() {
    let model = common::corpus_model("demo.eam");
    let cfg = PipelineConfig { runs: 8, ..PipelineConfig::default() };
    let a = pipeline::run_pipeline(&model, &cfg).unwrap().to_json();
    assert_eq!(a, pipeline::run_pipeline(&model, &cfg).unwrap().to_json());
}

#[test]
fn mismatched_suite_rejected() {
    let model = common::corpus_model("demo2.eam");
    let cfg = PipelineConfig { runs: 2, ..PipelineConfig::default() };
    let catalog = pipeline::mutate(&model, &cfg);
    let suite = pipeline::tests(&model, &PipelineConfig { bound: 50, ..cfg.clone() }).unwrap();
    assert!(pipeline::score(&catalog, &suite, &cfg).is_err());
}
