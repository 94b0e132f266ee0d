use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::model::{ArchitectureModel, Component, ExecTime};
use crate::par;

use super::operators::{build, default_cio_template, flipped_trigger, reproduces};
use super::{mutant_id, Mutant, Mutation, MutationError, OperatorKind};

/// Overrides for the component inserted by CIO. Unset fields fall back to
/// the model-derived defaults (median period, median rate, exec 1).
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CioTemplate {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub period: Option<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exec: Option<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rate: Option<i64>,
}

/// Which operators run and with which multiplicative replacement factors.
/// Scaled values are rounded half up; periods and non-zero execution bounds
/// never drop below 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationConfig {
    pub ero_factors: Vec<f64>,
    pub pro_factors: Vec<f64>,
    pub eto_factors: Vec<f64>,
    pub cro: bool,
    pub cio: bool,
    pub tro: bool,
    #[serde(default)]
    pub cio_template: CioTemplate,
}

impl Default for GenerationConfig {
    fn default() -> Self {
        GenerationConfig {
            ero_factors: vec![0.5, 2.0],
            pro_factors: vec![0.5, 2.0],
            eto_factors: vec![0.5, 2.0],
            cro: true,
            cio: true,
            tro: true,
            cio_template: CioTemplate::default(),
        }
    }
}

impl GenerationConfig {
    /// No factors and no structural operators: generates nothing.
    pub fn empty() -> Self {
        GenerationConfig {
            ero_factors: Vec::new(),
            pro_factors: Vec::new(),
            eto_factors: Vec::new(),
            cro: false,
            cio: false,
            tro: false,
            cio_template: CioTemplate::default(),
        }
    }

    /// Keep only the listed operator kinds enabled.
    pub fn restrict_to(mut self, kinds: &[OperatorKind]) -> Self {
        let on = |k| kinds.contains(&k);
        if !on(OperatorKind::Ero) {
            self.ero_factors.clear();
        }
        if !on(OperatorKind::Pro) {
            self.pro_factors.clear();
        }
        if !on(OperatorKind::Eto) {
            self.eto_factors.clear();
        }
        self.cro &= on(OperatorKind::Cro);
        self.cio &= on(OperatorKind::Cio);
        self.tro &= on(OperatorKind::Tro);
        self
    }

    pub fn check(&self) -> Result<(), String> {
        for f in self.ero_factors.iter().chain(&self.pro_factors).chain(&self.eto_factors) {
            if !f.is_finite() || *f <= 0.0 {
                return Err(format!("replacement factor {f} must be positive and finite"));
            }
        }
        Ok(())
    }

    /// Number of candidates the config yields on `model` before discards.
    pub fn candidate_count(&self, model: &ArchitectureModel) -> usize {
        let m = model.components.len();
        m * (self.ero_factors.len() + self.pro_factors.len() + self.eto_factors.len())
            + if self.cro { m } else { 0 }
            + usize::from(self.cio)
            + if self.tro { m } else { 0 }
    }
}

fn scale(v: i64, f: f64) -> i64 {
    (v as f64 * f).round() as i64
}

fn scale_time(v: i64, f: f64) -> i64 {
    if v == 0 {
        0
    } else {
        scale(v, f).max(1)
    }
}

fn scale_exec(e: &ExecTime, f: f64) -> ExecTime {
    ExecTime::new(scale_time(e.bcet, f), scale_time(e.wcet, f))
}

/// A candidate that was not turned into a mutant.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Discard {
    pub id: String,
    pub kind: OperatorKind,
    pub target: String,
    pub reason: String,
    pub message: String,
}

#[derive(Debug, Clone)]
pub struct MutantCatalog {
    pub original: ArchitectureModel,
    pub mutants: Vec<Mutant>,
    pub discarded: Vec<Discard>,
    pub generation_config: GenerationConfig,
}

impl MutantCatalog {
    pub fn candidates(&self) -> usize {
        self.mutants.len() + self.discarded.len()
    }

    pub fn mutant(&self, id: &str) -> Option<&Mutant> {
        self.mutants.iter().find(|m| m.id == id)
    }

    pub fn count_by_kind(&self) -> BTreeMap<OperatorKind, usize> {
        let mut out = BTreeMap::new();
        for m in &self.mutants {
            *out.entry(m.kind).or_insert(0) += 1;
        }
        out
    }

    /// Ids of mutants whose provenance does not reproduce their model.
    /// Empty for every catalog built by [`generate_mutants`].
    pub fn irreproducible(&self) -> Vec<String> {
        self.mutants.iter().filter(|m| !reproduces(&self.original, m)).map(|m| m.id.clone()).collect()
    }
}

type Candidate = (String, OperatorKind, String, Result<Mutation, MutationError>);

fn candidates_for(model: &ArchitectureModel, config: &GenerationConfig, kind: OperatorKind) -> Vec<Candidate> {
    let mut out = Vec::new();
    let mut per_component = |factors: &[f64], make: &dyn Fn(&Component, f64) -> Result<Mutation, MutationError>| {
        for c in &model.components {
            for (ordinal, f) in factors.iter().enumerate() {
                out.push((mutant_id(kind, &c.name, ordinal), kind, c.name.clone(), make(c, *f)));
            }
        }
    };
    match kind {
        OperatorKind::Ero => per_component(&config.ero_factors, &|c, f| {
            Ok(Mutation::EnergyRate {
                component: c.name.clone(),
                rate: scale(c.energy_rate, f),
                mode_rates: (!c.modes.is_empty()).then(|| c.modes.iter().map(|m| scale(m.energy_rate, f)).collect()),
            })
        }),
        OperatorKind::Pro => per_component(&config.pro_factors, &|c, f| match c.trigger.period() {
            Some(p) => Ok(Mutation::Period { component: c.name.clone(), period: scale(p, f).max(1) }),
            None => Err(MutationError::NotPeriodic),
        }),
        OperatorKind::Eto => per_component(&config.eto_factors, &|c, f| {
            Ok(Mutation::ExecTime {
                component: c.name.clone(),
                exec: scale_exec(&c.exec, f),
                mode_execs: (!c.modes.is_empty()).then(|| c.modes.iter().map(|m| scale_exec(&m.exec, f)).collect()),
            })
        }),
        OperatorKind::Cro if config.cro => {
            per_component(&[1.0], &|c, _| Ok(Mutation::RemoveComponent { component: c.name.clone() }))
        }
        OperatorKind::Tro if config.tro => per_component(&[1.0], &|c, _| {
            flipped_trigger(model, c).map(|trigger| Mutation::Trigger { component: c.name.clone(), trigger })
        }),
        OperatorKind::Cio if config.cio => {
            let template = default_cio_template(model, &config.cio_template);
            out.push((
                mutant_id(kind, &template.name, 0),
                kind,
                template.name.clone(),
                Ok(Mutation::InsertComponent { template, attach: None }),
            ));
        }
        _ => {}
    }
    out
}

/// Apply every enabled operator to every component (one CIO insertion per
/// model). Order is operator kind (ERO, PRO, ETO, CRO, CIO, TRO), then
/// component declaration order, then factor order. Failing candidates land in
/// the discard log with their reason.
pub fn generate_mutants(model: &ArchitectureModel, config: &GenerationConfig) -> MutantCatalog {
    let per_kind = par::map(&OperatorKind::ALL, |&kind| {
        candidates_for(model, config, kind)
            .into_iter()
            .map(|(id, kind, target, mutation)| {
                let ordinal: usize = id.rsplit('_').next().and_then(|s| s.parse().ok()).unwrap_or(0);
                mutation.and_then(|m| build(model, m, ordinal)).map_err(|e| Discard {
                    id,
                    kind,
                    target,
                    reason: e.code(),
                    message: e.to_string(),
                })
            })
            .collect::<Vec<_>>()
    });

    let mut mutants = Vec::new();
    let mut discarded = Vec::new();
    for outcome in per_kind.into_iter().flatten() {
        match outcome {
            Ok(m) => mutants.push(m),
            Err(d) => discarded.push(d),
        }
    }
    MutantCatalog { original: model.clone(), mutants, discarded, generation_config: config.clone() }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::parse_model;

    const TWO_PERIODIC: &str = "\
system Two
component A {
  trigger periodic 10
  exec [4, 4]
  energy 4
  out o
}
component B {
  trigger periodic 20
  exec [2, 6]
  energy 0
  in i
}
connect A.o -> B.i
";

    #[test]
    fn default_config_counts() {
        let m = parse_model(TWO_PERIODIC).unwrap();
        let cat = generate_mutants(&m, &GenerationConfig::default());
        assert_eq!(GenerationConfig::default().candidate_count(&m), 17);
        assert_eq!(cat.candidates(), 17);
        let discarded: Vec<(&str, &str)> = cat.discarded.iter().map(|d| (d.id.as_str(), d.reason.as_str())).collect();
        // B's rate is 0, so both ERO factors leave it unchanged; A has no in-port to trigger on.
        assert_eq!(discarded, vec![("ERO_B_0", "NO_CHANGE"), ("ERO_B_1", "NO_CHANGE"), ("TRO_A_0", "NO_IN_PORT")]);
        assert_eq!(cat.mutants.len(), 14);
        assert!(cat.irreproducible().is_empty());
    }

    #[test]
    fn ids_are_unique_and_generation_is_deterministic() {
        let m = parse_model(TWO_PERIODIC).unwrap();
        let a = generate_mutants(&m, &GenerationConfig::default());
        let b = generate_mutants(&m, &GenerationConfig::default());
        let ids: Vec<_> = a.mutants.iter().map(|m| m.id.clone()).collect();
        let mut dedup = ids.clone();
        dedup.sort();
        dedup.dedup();
        assert_eq!(ids.len(), dedup.len());
        assert_eq!(ids, b.mutants.iter().map(|m| m.id.clone()).collect::<Vec<_>>());
    }

    #[test]
    fn factor_rounding_and_clamping() {
        assert_eq!(scale(4, 0.5), 2);
        assert_eq!(scale(3, 0.5), 2);
        assert_eq!(scale(0, 2.0), 0);
        assert_eq!(scale_time(1, 0.5), 1);
        assert_eq!(scale_time(0, 0.5), 0);
        assert_eq!(scale_exec(&ExecTime::new(4, 6), 2.0), ExecTime::new(8, 12));
    }

    #[test]
    fn single_component_cro_discarded() {
        let m = parse_model("system S component A { trigger periodic 10 exec 2 energy 2 }").unwrap();
        let cat = generate_mutants(&m, &GenerationConfig::default());
        assert!(cat.discarded.iter().any(|d| d.id == "CRO_A_0" && d.reason == "LAST_COMPONENT"));
    }

    #[test]
    fn empty_config_yields_nothing() {
        let m = parse_model(TWO_PERIODIC).unwrap();
        let cat = generate_mutants(&m, &GenerationConfig::empty());
        assert_eq!(cat.candidates(), 0);
    }

    #[test]
    fn restrict_to_subset() {
        let cfg = GenerationConfig::default().restrict_to(&[OperatorKind::Ero, OperatorKind::Cio]);
        let m = parse_model(TWO_PERIODIC).unwrap();
        assert_eq!(cfg.candidate_count(&m), 5);
    }
}
