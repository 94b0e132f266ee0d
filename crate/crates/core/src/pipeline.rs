//! The end-to-end flow: mutate, check equivalence, generate tests, build the
//! kill matrix, score and minimize.
//!
//! [`score`] is the shared tail of the pipeline. Feeding it a catalog and a
//! suite that were produced separately (and round-tripped through files)
//! yields the same report as [`run_pipeline`].

use serde::{Deserialize, Serialize};

use crate::equiv::{partition_catalog, EquivConfig, EquivError, Partition};
use crate::model::ArchitectureModel;
use crate::mutation::{generate_mutants, GenerationConfig, MutantCatalog};
use crate::report::MutationReport;
use crate::sim::SimulationQuery;
use crate::testing::{
    build_kill_matrix, generate_tests, minimize_suite, mutation_score, witness_tests, TestError, TestSuite,
};
use crate::Rational;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub threshold: Rational,
    pub bound: i64,
    pub samples: usize,
    pub runs: usize,
    pub seed: u64,
    pub equiv_budget: u64,
    /// Append one worst-case-dwell test per non-equivalence witness.
    pub witness_tests: bool,
    pub generation: GenerationConfig,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            threshold: Rational::from_int(1),
            bound: 100,
            samples: 20,
            runs: 50,
            seed: 0,
            equiv_budget: 10_000,
            witness_tests: true,
            generation: GenerationConfig::default(),
        }
    }
}

impl PipelineConfig {
    pub fn check(&self) -> Result<(), PipelineError> {
        let fail = |m: &str| Err(PipelineError::Config(m.to_string()));
        if !self.threshold.is_positive() {
            return fail("threshold must be positive");
        }
        if self.bound <= 0 {
            return fail("bound must be positive");
        }
        if self.samples == 0 {
            return fail("samples must be at least 1");
        }
        if self.runs == 0 {
            return fail("runs must be at least 1");
        }
        if self.equiv_budget == 0 {
            return fail("equivalence budget must be at least 1");
        }
        self.generation.check().map_err(PipelineError::Config)
    }

    pub fn equiv(&self) -> EquivConfig {
        EquivConfig { threshold: self.threshold, bound: self.bound, samples: self.samples, budget: self.equiv_budget }
    }

    pub fn query(&self) -> SimulationQuery {
        SimulationQuery::new(self.runs, self.bound)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PipelineError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Equiv(#[from] EquivError),
    #[error(transparent)]
    Test(#[from] TestError),
}

pub fn mutate(model: &ArchitectureModel, config: &PipelineConfig) -> MutantCatalog {
    generate_mutants(model, &config.generation)
}

pub fn equivalence<'a>(catalog: &'a MutantCatalog, config: &PipelineConfig) -> Result<Partition<'a>, PipelineError> {
    Ok(partition_catalog(catalog, &config.equiv())?)
}

pub fn tests(model: &ArchitectureModel, config: &PipelineConfig) -> Result<TestSuite, PipelineError> {
    Ok(generate_tests(model, &config.query(), config.samples, config.seed)?)
}

/// Everything downstream of mutant and test generation.
pub fn score(
    catalog: &MutantCatalog,
    suite: &TestSuite,
    config: &PipelineConfig,
) -> Result<MutationReport, PipelineError> {
    config.check()?;
    let p = &suite.provenance;
    if p.bound != config.bound || p.samples != config.samples {
        return Err(PipelineError::Config(format!(
            "suite was generated for bound {} and {} samples",
            p.bound, p.samples
        )));
    }
    let partition = equivalence(catalog, config)?;
    let mut suite = suite.clone();
    let generated = suite.tests.len();
    if config.witness_tests {
        suite.tests.extend(witness_tests(&catalog.original, &partition.verdicts, config.bound, config.samples)?);
    }
    let matrix = build_kill_matrix(&suite, &partition.live, config.threshold)?;
    let score = mutation_score(&matrix);
    let minimized = minimize_suite(&suite, &matrix);
    Ok(MutationReport::new(config, catalog, &partition, &suite, generated, matrix, score, &minimized))
}

pub fn run_pipeline(model: &ArchitectureModel, config: &PipelineConfig) -> Result<MutationReport, PipelineError> {
    config.check()?;
    let catalog = mutate(model, config);
    let suite = tests(model, config)?;
    score(&catalog, &suite, config)
}
