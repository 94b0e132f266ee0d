//! Test generation, execution and the threshold detection oracle.
//!
//! A test pins everything that makes a run vary: the environment valuation
//! and the dwell seed (or worst-case dwell). Replaying it is therefore exact,
//! and a mutant is detected when its sampled total energy differs from the
//! expected signal by at least the threshold at some sample point.

mod matrix;

use serde::{Deserialize, Serialize};

use crate::equiv::{EquivalenceVerdict, MutantVerdict};
use crate::model::ArchitectureModel;
use crate::pta::{to_pta, PtaNetwork, TOTAL};
use crate::sim::{
    run_once_with, sample_energy, simulate, DwellPolicy, EnergySignal, EnvValuation, SimError, SimulationQuery,
    SimulationTrace,
};
use crate::Rational;

pub use matrix::{build_kill_matrix, minimize_suite, mutation_score, KillMatrix, Score};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TestError {
    #[error("test {test}: {message}")]
    ParamMismatch { test: String, message: String },
    #[error("signals differ in shape: {0} vs {1}")]
    SignalShapeMismatch(String, String),
    #[error(transparent)]
    Sim(#[from] SimError),
}

impl TestError {
    pub fn code(&self) -> &'static str {
        match self {
            TestError::ParamMismatch { .. } => "PARAM_MISMATCH",
            TestError::SignalShapeMismatch(..) => "SIGNAL_SHAPE_MISMATCH",
            TestError::Sim(e) => e.code(),
        }
    }
}

/// A dispatch observed while generating the test: `(time, component)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TimedTrigger(pub i64, pub String);

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TestCase {
    pub id: String,
    pub env: EnvValuation,
    pub seed: u64,
    pub dwell: DwellPolicy,
    /// Activation releases of the original run, in order. Informational:
    /// replay re-derives them from `env` and `seed`.
    pub triggers: Vec<TimedTrigger>,
    pub expected: EnergySignal,
}

impl TestCase {
    pub fn bound(&self) -> i64 {
        self.expected.bound
    }

    pub fn samples(&self) -> usize {
        self.expected.n
    }
}

/// How a suite was produced.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SuiteProvenance {
    pub runs: usize,
    pub bound: i64,
    pub samples: usize,
    pub master_seed: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TestSuite {
    pub provenance: SuiteProvenance,
    pub tests: Vec<TestCase>,
}

impl TestSuite {
    pub fn ids(&self) -> Vec<String> {
        self.tests.iter().map(|t| t.id.clone()).collect()
    }

    pub fn test(&self, id: &str) -> Option<&TestCase> {
        self.tests.iter().find(|t| t.id == id)
    }

    /// The suite restricted to `ids`, keeping its order.
    pub fn retain_ids(&self, ids: &[String]) -> TestSuite {
        TestSuite {
            provenance: self.provenance.clone(),
            tests: self.tests.iter().filter(|t| ids.contains(&t.id)).cloned().collect(),
        }
    }
}

fn triggers_of(trace: &SimulationTrace) -> Vec<TimedTrigger> {
    trace
        .events
        .iter()
        .filter(|e| e.2 == "dispatch")
        .map(|e| TimedTrigger(e.0, e.1.trim_start_matches("iface_").to_string()))
        .collect()
}

fn replay(
    net: &PtaNetwork,
    env: &EnvValuation,
    seed: u64,
    dwell: DwellPolicy,
    bound: i64,
    n: usize,
) -> Result<(EnergySignal, Vec<TimedTrigger>), SimError> {
    let trace = run_once_with(net, bound, env, seed, dwell)?;
    Ok((sample_energy(&trace, TOTAL, n)?, triggers_of(&trace)))
}

/// One test per simulation run of the original: the run's environment and
/// seed as input, its total energy at `n` points as expected output. Ids are
/// `T0001`, `T0002`, ...
pub fn generate_tests(
    model: &ArchitectureModel,
    query: &SimulationQuery,
    n: usize,
    master_seed: u64,
) -> Result<TestSuite, TestError> {
    if n == 0 {
        return Err(SimError::InvalidQuery("at least one sample point required".into()).into());
    }
    let mut query = query.clone();
    if !query.monitored.iter().any(|v| v == TOTAL) {
        query.monitored.push(TOTAL.to_string());
    }
    let net = to_pta(model);
    let tests = simulate(&net, &query, master_seed)?
        .into_iter()
        .map(|trace| {
            Ok(TestCase {
                id: format!("T{:04}", trace.run + 1),
                expected: sample_energy(&trace, TOTAL, n)?,
                triggers: triggers_of(&trace),
                env: trace.env,
                seed: trace.seed,
                dwell: DwellPolicy::Uniform,
            })
        })
        .collect::<Result<Vec<_>, SimError>>()?;
    Ok(TestSuite {
        provenance: SuiteProvenance { runs: query.runs, bound: query.bound, samples: n, master_seed },
        tests,
    })
}

/// Tests that replay each non-equivalence witness at worst-case dwell, the
/// semantics under which it was found. Ids are `W_<mutant id>`.
pub fn witness_tests(
    model: &ArchitectureModel,
    verdicts: &[MutantVerdict],
    bound: i64,
    n: usize,
) -> Result<Vec<TestCase>, TestError> {
    let net = to_pta(model);
    verdicts
        .iter()
        .filter_map(|v| match &v.verdict {
            EquivalenceVerdict::NonEquivalent { witness, .. } => Some((&v.id, witness)),
            EquivalenceVerdict::EquivalentUpToBudget { .. } => None,
        })
        .map(|(id, env)| {
            let (expected, triggers) = replay(&net, env, 0, DwellPolicy::Wcet, bound, n)?;
            Ok(TestCase {
                id: format!("W_{id}"),
                env: env.clone(),
                seed: 0,
                dwell: DwellPolicy::Wcet,
                triggers,
                expected,
            })
        })
        .collect()
}

/// Run `test` against an already translated network.
pub fn execute_on(net: &PtaNetwork, test: &TestCase) -> Result<EnergySignal, TestError> {
    test.env
        .check(&net.parameters)
        .map_err(|e| TestError::ParamMismatch { test: test.id.clone(), message: e.to_string() })?;
    Ok(replay(net, &test.env, test.seed, test.dwell, test.bound(), test.samples())?.0)
}

/// Run `test` on `model` (original or mutant) and sample its total energy.
pub fn execute_test(model: &ArchitectureModel, test: &TestCase) -> Result<EnergySignal, TestError> {
    execute_on(&to_pta(model), test)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DetectionResult {
    pub detected: bool,
    pub max_deviation: Rational,
    /// 1-based index of the first sample meeting the threshold.
    pub first_index: Option<usize>,
}

/// Detected iff some `|E_O[i] - E_M[i]| >= threshold`.
pub fn detect_mutant(
    expected: &EnergySignal,
    observed: &EnergySignal,
    threshold: Rational,
) -> Result<DetectionResult, TestError> {
    if expected.n != observed.n || expected.bound != observed.bound || expected.samples.len() != observed.samples.len()
    {
        return Err(TestError::SignalShapeMismatch(
            format!("{} samples over {}", expected.n, expected.bound),
            format!("{} samples over {}", observed.n, observed.bound),
        ));
    }
    let mut max_deviation = Rational::ZERO;
    let mut first_index = None;
    for (i, (o, m)) in expected.values().zip(observed.values()).enumerate() {
        let d = (o - m).abs();
        if d > max_deviation {
            max_deviation = d;
        }
        if first_index.is_none() && d >= threshold {
            first_index = Some(i + 1);
        }
    }
    Ok(DetectionResult { detected: first_index.is_some(), max_deviation, first_index })
}
