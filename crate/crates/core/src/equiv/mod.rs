//! Bounded equivalence checking of mutants against their original.
//!
//! A mutant is equivalent when no environment valuation makes the total
//! energy of the two networks differ by at least `threshold` at one of the
//! `N` sample points in `[0, bound]`. Both networks run with dwell fixed at
//! `wcet`, which makes the divergence a function of the valuation alone.
//!
//! Small parameter spaces are enumerated exhaustively and the verdict is
//! exact. Larger ones are probed with a quasi-random sequence followed by
//! coordinate ascent around the best point; an equivalent verdict is then only
//! a claim about the budget spent.

mod search;

use serde::{Deserialize, Serialize};

use crate::mutation::{Mutant, MutantCatalog};
use crate::par;
use crate::pta::{to_pta, PtaNetwork, TOTAL};
use crate::sim::{run_once_with, sample_energy, DwellPolicy, EnvValuation, SimError};
use crate::Rational;

pub use search::SearchSpace;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EquivError {
    #[error("invalid equivalence problem: {0}")]
    InvalidProblem(String),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error("witness {0:?} did not reproduce its divergence")]
    WitnessRevalidation(EnvValuation),
}

/// Settings shared by every check of a catalog.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EquivConfig {
    pub threshold: Rational,
    pub bound: i64,
    pub samples: usize,
    pub budget: u64,
}

pub struct EquivalenceProblem<'a> {
    pub original: &'a PtaNetwork,
    pub mutant: &'a PtaNetwork,
    pub threshold: Rational,
    pub bound: i64,
    pub samples: usize,
}

impl EquivalenceProblem<'_> {
    pub fn check(&self) -> Result<(), EquivError> {
        if !self.threshold.is_positive() {
            return Err(EquivError::InvalidProblem("threshold must be positive".into()));
        }
        if self.bound <= 0 {
            return Err(EquivError::InvalidProblem("bound must be positive".into()));
        }
        if self.samples == 0 {
            return Err(EquivError::InvalidProblem("at least one sample point required".into()));
        }
        if self.original.parameters != self.mutant.parameters {
            return Err(EquivError::InvalidProblem("networks disagree on parameters".into()));
        }
        Ok(())
    }

    fn divergence(&self, env: &EnvValuation) -> Result<(Rational, Rational), EquivError> {
        Ok(max_divergence(self.original, self.mutant, env, self.bound, self.samples)?)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum EquivalenceVerdict {
    NonEquivalent {
        witness: EnvValuation,
        divergence: Rational,
        witness_time: Rational,
        explored: u64,
        budget: u64,
    },
    EquivalentUpToBudget {
        explored: u64,
        budget: u64,
        max_seen_divergence: Rational,
        /// Every valuation was evaluated, so the verdict is exact.
        exhaustive: bool,
    },
}

impl EquivalenceVerdict {
    pub fn is_equivalent(&self) -> bool {
        matches!(self, EquivalenceVerdict::EquivalentUpToBudget { .. })
    }

    pub fn witness(&self) -> Option<&EnvValuation> {
        match self {
            EquivalenceVerdict::NonEquivalent { witness, .. } => Some(witness),
            EquivalenceVerdict::EquivalentUpToBudget { .. } => None,
        }
    }
}

/// Deterministic total-energy signal of `net` under `env`.
pub fn wcet_signal(net: &PtaNetwork, env: &EnvValuation, bound: i64, n: usize) -> Result<Vec<Rational>, SimError> {
    let trace = run_once_with(net, bound, env, 0, DwellPolicy::Wcet)?;
    Ok(sample_energy(&trace, TOTAL, n)?.values().collect())
}

/// Largest `|c_n(t_i) - c_m(t_i)|` over the sample grid and the earliest
/// `t_i` reaching it, with both networks at worst-case dwell.
pub fn max_divergence(
    original: &PtaNetwork,
    mutant: &PtaNetwork,
    env: &EnvValuation,
    bound: i64,
    n: usize,
) -> Result<(Rational, Rational), SimError> {
    let a = wcet_signal(original, env, bound, n)?;
    let b = wcet_signal(mutant, env, bound, n)?;
    let mut best = (Rational::ZERO, Rational::new(bound, n as i64));
    for (i, (x, y)) in a.iter().zip(&b).enumerate() {
        let d = (*x - *y).abs();
        if d > best.0 {
            best = (d, Rational::new((i as i64 + 1) * bound, n as i64));
        }
    }
    Ok(best)
}

/// Search the parameter space for a valuation on which the networks diverge
/// by at least the threshold. The witness is the valuation of largest
/// divergence, earliest in evaluation order on ties, and is re-simulated
/// before it is returned.
pub fn check_equivalence(problem: &EquivalenceProblem<'_>, budget: u64) -> Result<EquivalenceVerdict, EquivError> {
    problem.check()?;
    if budget == 0 {
        return Err(EquivError::InvalidProblem("budget must be at least 1".into()));
    }
    let space = SearchSpace::new(&problem.original.parameters);
    let (best, explored, exhaustive) = search::run(&space, budget, |env| problem.divergence(env))?;
    let (env, (divergence, time)) = best;
    if divergence < problem.threshold {
        return Ok(EquivalenceVerdict::EquivalentUpToBudget {
            explored,
            budget,
            max_seen_divergence: divergence,
            exhaustive,
        });
    }
    let (again, again_t) = problem.divergence(&env)?;
    if again != divergence || again_t != time || again < problem.threshold {
        return Err(EquivError::WitnessRevalidation(env));
    }
    Ok(EquivalenceVerdict::NonEquivalent { witness: env, divergence, witness_time: time, explored, budget })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MutantVerdict {
    pub id: String,
    #[serde(flatten)]
    pub verdict: EquivalenceVerdict,
}

pub struct Partition<'a> {
    pub live: Vec<&'a Mutant>,
    pub equivalent: Vec<&'a Mutant>,
    /// One verdict per mutant, in catalog order.
    pub verdicts: Vec<MutantVerdict>,
}

/// Check every mutant of the catalog. Mutants are checked in parallel and
/// the verdicts come back in catalog order.
pub fn partition_catalog<'a>(catalog: &'a MutantCatalog, config: &EquivConfig) -> Result<Partition<'a>, EquivError> {
    let original = to_pta(&catalog.original);
    let verdicts = par::map(&catalog.mutants, |m| {
        let mutant = to_pta(&m.model);
        let problem = EquivalenceProblem {
            original: &original,
            mutant: &mutant,
            threshold: config.threshold,
            bound: config.bound,
            samples: config.samples,
        };
        check_equivalence(&problem, config.budget).map(|verdict| MutantVerdict { id: m.id.clone(), verdict })
    })
    .into_iter()
    .collect::<Result<Vec<_>, _>>()?;
    let mut live = Vec::new();
    let mut equivalent = Vec::new();
    for (m, v) in catalog.mutants.iter().zip(&verdicts) {
        if v.verdict.is_equivalent() {
            equivalent.push(m);
        } else {
            live.push(m);
        }
    }
    Ok(Partition { live, equivalent, verdicts })
}
