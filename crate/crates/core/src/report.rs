//! Report assembly and the on-disk catalog format.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::equiv::{MutantVerdict, Partition};
use crate::model::{serialize_model, ArchitectureModel};
use crate::mutation::{Discard, GenerationConfig, Mutant, MutantCatalog, OperatorKind};
use crate::pipeline::PipelineConfig;
use crate::sim::{DwellPolicy, EnvValuation};
use crate::testing::{KillMatrix, Score, SuiteProvenance, TestSuite};
use crate::Rational;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ReportFormat {
    #[default]
    Json,
    Csv,
}

impl std::str::FromStr for ReportFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "json" => Ok(ReportFormat::Json),
            "csv" => Ok(ReportFormat::Csv),
            _ => Err(format!("unknown report format `{s}` (expected json or csv)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConfigEcho {
    pub system: String,
    pub threshold: Rational,
    pub bound: i64,
    pub samples: usize,
    pub runs: usize,
    pub seed: u64,
    pub equiv_budget: u64,
    pub witness_tests: bool,
    pub generation: GenerationConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CatalogSection {
    pub candidates: usize,
    pub generated: usize,
    pub by_kind: BTreeMap<OperatorKind, usize>,
    pub mutants: Vec<Mutant>,
    pub discarded: Vec<Discard>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EquivalenceSection {
    pub live: Vec<String>,
    pub equivalent: Vec<String>,
    pub verdicts: Vec<MutantVerdict>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TestEntry {
    pub id: String,
    pub env: EnvValuation,
    pub seed: u64,
    pub dwell: DwellPolicy,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TestsSection {
    pub provenance: SuiteProvenance,
    pub generated: usize,
    pub witness: usize,
    pub cases: Vec<TestEntry>,
}

/// Sparse form of the kill matrix: only detecting cells, as
/// `[test, mutant, first deviating sample]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KillMatrixSection {
    pub rows: Vec<String>,
    pub columns: Vec<String>,
    pub detected: Vec<(String, String, usize)>,
    #[serde(skip)]
    pub full: KillMatrix,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MutationReport {
    pub config: ConfigEcho,
    pub catalog: CatalogSection,
    pub equivalence: EquivalenceSection,
    pub tests: TestsSection,
    pub kill_matrix: KillMatrixSection,
    pub score: Score,
    pub minimized: Vec<String>,
}

impl MutationReport {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        config: &PipelineConfig,
        catalog: &MutantCatalog,
        partition: &Partition<'_>,
        suite: &TestSuite,
        generated: usize,
        matrix: KillMatrix,
        score: Score,
        minimized: &TestSuite,
    ) -> Self {
        let ids = |ms: &[&Mutant]| ms.iter().map(|m| m.id.clone()).collect();
        MutationReport {
            config: ConfigEcho {
                system: catalog.original.name.clone(),
                threshold: config.threshold,
                bound: config.bound,
                samples: config.samples,
                runs: config.runs,
                seed: config.seed,
                equiv_budget: config.equiv_budget,
                witness_tests: config.witness_tests,
                generation: config.generation.clone(),
            },
            catalog: CatalogSection {
                candidates: catalog.candidates(),
                generated: catalog.mutants.len(),
                by_kind: catalog.count_by_kind(),
                mutants: catalog.mutants.clone(),
                discarded: catalog.discarded.clone(),
            },
            equivalence: EquivalenceSection {
                live: ids(&partition.live),
                equivalent: ids(&partition.equivalent),
                verdicts: partition.verdicts.clone(),
            },
            tests: TestsSection {
                provenance: suite.provenance.clone(),
                generated,
                witness: suite.tests.len() - generated,
                cases: suite
                    .tests
                    .iter()
                    .map(|t| TestEntry { id: t.id.clone(), env: t.env.clone(), seed: t.seed, dwell: t.dwell })
                    .collect(),
            },
            kill_matrix: KillMatrixSection {
                rows: matrix.rows.clone(),
                columns: matrix.columns.clone(),
                detected: matrix.detected(),
                full: matrix,
            },
            score,
            minimized: minimized.ids(),
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serialises");
        s.push('\n');
        s
    }

    /// One row per matrix cell under a header, preceded by a `#` comment
    /// line carrying the score.
    pub fn to_csv(&self) -> String {
        let m = &self.kill_matrix.full;
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["test", "mutant", "detected", "max_deviation", "first_index"]).expect("in-memory write");
        for (r, row) in m.cells.iter().enumerate() {
            for (c, cell) in row.iter().enumerate() {
                w.write_record([
                    m.rows[r].as_str(),
                    m.columns[c].as_str(),
                    if cell.detected { "1" } else { "0" },
                    &cell.max_deviation.to_string(),
                    &cell.first_index.map_or(String::new(), |i| i.to_string()),
                ])
                .expect("in-memory write");
            }
        }
        let body = String::from_utf8(w.into_inner().expect("flush to memory")).expect("utf-8 fields");
        format!("# mutation_score={} killed={} live={}\n{body}", self.score.value, self.score.killed, self.score.live)
    }

    pub fn emit(&self, format: ReportFormat) -> String {
        match format {
            ReportFormat::Json => self.to_json(),
            ReportFormat::Csv => self.to_csv(),
        }
    }
}

/// `catalog.json`: everything about a catalog except the mutant models,
/// which live next to it as `<id>.eam`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CatalogFile {
    pub system: String,
    pub generation_config: GenerationConfig,
    pub candidates: usize,
    pub mutants: Vec<Mutant>,
    pub discarded: Vec<Discard>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub verdicts: Option<Vec<MutantVerdict>>,
}

impl CatalogFile {
    pub fn new(catalog: &MutantCatalog, verdicts: Option<Vec<MutantVerdict>>) -> Self {
        CatalogFile {
            system: catalog.original.name.clone(),
            generation_config: catalog.generation_config.clone(),
            candidates: catalog.candidates(),
            mutants: catalog.mutants.clone(),
            discarded: catalog.discarded.clone(),
            verdicts,
        }
    }

    /// `(file name, canonical text)` for every mutant model.
    pub fn model_files(catalog: &MutantCatalog) -> Vec<(String, String)> {
        catalog.mutants.iter().map(|m| (format!("{}.eam", m.id), serialize_model(&m.model))).collect()
    }

    /// Rebuild the catalog against `original`, with `load(id)` supplying
    /// each mutant's model. Every model must match its provenance.
    pub fn into_catalog<E: std::fmt::Display>(
        self,
        original: &ArchitectureModel,
        mut load: impl FnMut(&str) -> Result<ArchitectureModel, E>,
    ) -> Result<MutantCatalog, String> {
        if self.system != original.name {
            return Err(format!("catalog belongs to system `{}`, not `{}`", self.system, original.name));
        }
        if self.candidates != self.mutants.len() + self.discarded.len() {
            return Err("candidate count does not match mutants plus discards".into());
        }
        let mut mutants = Vec::with_capacity(self.mutants.len());
        for mut m in self.mutants {
            m.model = load(&m.id).map_err(|e| format!("{}: {e}", m.id))?;
            let expected = m.provenance.apply(original).map_err(|e| format!("{}: provenance fails: {e}", m.id))?;
            if serialize_model(&expected) != serialize_model(&m.model) {
                return Err(format!("{}: model does not match its provenance", m.id));
            }
            mutants.push(m);
        }
        Ok(MutantCatalog {
            original: original.clone(),
            mutants,
            discarded: self.discarded,
            generation_config: self.generation_config,
        })
    }
}
