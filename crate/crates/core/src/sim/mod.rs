//! Discrete-event stochastic simulation of PTA networks.
//!
//! Time is integral and energies are exact: every rate and dwell is an
//! integer, so accumulated cost is an integer at every event. Dwell times in
//! executing locations are drawn uniformly from `[bcet, wcet]`; environment
//! valuations are drawn uniformly from the parameter domains.
//!
//! Randomness is keyed so that runs never share streams: run `j` of a
//! simulation uses seed [`mix`]`(master, j)`, and inside a run each automaton
//! draws from its own ChaCha stream selected by its name. A component
//! therefore sees the same dwell sequence in an original network and in any
//! mutant that keeps it.

mod engine;

use std::collections::BTreeMap;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::model::{Component, Parameter, Trigger};
use crate::par;
use crate::pta::{PtaNetwork, TOTAL};
use crate::Rational;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SimError {
    #[error("invalid query: {0}")]
    InvalidQuery(String),
    #[error("unknown energy variable `{0}`")]
    UnknownVariable(String),
    #[error("no closed form: {0}")]
    NotClosedForm(String),
    #[error("environment does not match the model parameters: {0}")]
    ParamMismatch(String),
}

impl SimError {
    pub fn code(&self) -> &'static str {
        match self {
            SimError::InvalidQuery(_) => "INVALID_QUERY",
            SimError::UnknownVariable(_) => "UNKNOWN_VARIABLE",
            SimError::NotClosedForm(_) => "NOT_CLOSED_FORM",
            SimError::ParamMismatch(_) => "PARAM_MISMATCH",
        }
    }
}

/// How long an activation stays in its executing location.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DwellPolicy {
    /// Uniform over `[bcet, wcet]`, drawn from the automaton's stream.
    #[default]
    Uniform,
    /// Always `wcet`; no randomness is consumed.
    Wcet,
}

/// Derive the seed of run `index` from a master seed. Distinct indices select
/// distinct ChaCha streams, so runs are independent of each other and of the
/// order they execute in.
pub fn mix(master: u64, index: u64) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    rng.set_stream(index);
    rng.next_u64()
}

/// Stream id for an automaton's dwell draws (64-bit FNV-1a of its name).
/// Stream 0 is reserved for environment sampling.
fn automaton_stream(name: &str) -> u64 {
    let h = name.bytes().fold(0xcbf2_9ce4_8422_2325u64, |h, b| (h ^ b as u64).wrapping_mul(0x0100_0000_01b3));
    h.max(1)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimulationQuery {
    pub runs: usize,
    pub bound: i64,
    pub monitored: Vec<String>,
}

impl SimulationQuery {
    /// Query monitoring only the system total.
    pub fn new(runs: usize, bound: i64) -> Self {
        SimulationQuery { runs, bound, monitored: vec![TOTAL.to_string()] }
    }

    pub fn check(&self, net: &PtaNetwork) -> Result<(), SimError> {
        if self.runs == 0 {
            return Err(SimError::InvalidQuery("runs must be at least 1".into()));
        }
        if self.bound <= 0 {
            return Err(SimError::InvalidQuery("bound must be positive".into()));
        }
        if self.monitored.is_empty() {
            return Err(SimError::InvalidQuery("nothing monitored".into()));
        }
        match self.monitored.iter().find(|v| net.energy_var(v).is_none()) {
            Some(v) => Err(SimError::UnknownVariable(v.clone())),
            None => Ok(()),
        }
    }
}

/// One integer value per model parameter.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct EnvValuation(pub BTreeMap<String, i64>);

impl EnvValuation {
    pub fn get(&self, name: &str) -> Option<i64> {
        self.0.get(name).copied()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Uniform draw over each domain, in declaration order.
    pub fn sample(params: &[Parameter], rng: &mut impl Rng) -> Self {
        EnvValuation(params.iter().map(|p| (p.name.clone(), rng.gen_range(p.lo..=p.hi))).collect())
    }

    /// Exactly the given parameters, each within its domain.
    pub fn check(&self, params: &[Parameter]) -> Result<(), SimError> {
        for p in params {
            match self.get(&p.name) {
                None => return Err(SimError::ParamMismatch(format!("`{}` is unassigned", p.name))),
                Some(v) if v < p.lo || v > p.hi => {
                    return Err(SimError::ParamMismatch(format!("`{}` = {v} outside [{}, {}]", p.name, p.lo, p.hi)))
                }
                _ => {}
            }
        }
        match self.0.keys().find(|k| !params.iter().any(|p| &p.name == *k)) {
            Some(k) => Err(SimError::ParamMismatch(format!("`{k}` is not a model parameter"))),
            None => Ok(()),
        }
    }
}

impl<const N: usize> From<[(&str, i64); N]> for EnvValuation {
    fn from(pairs: [(&str, i64); N]) -> Self {
        EnvValuation(pairs.into_iter().map(|(k, v)| (k.to_string(), v)).collect())
    }
}

/// `(time, automaton, edge)`; a dispatch nobody received is logged with
/// edge `drop`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceEvent(pub i64, pub String, pub String);

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimulationTrace {
    pub run: usize,
    pub seed: u64,
    pub env: EnvValuation,
    pub bound: i64,
    pub events: Vec<TraceEvent>,
    /// Breakpoints of the piecewise-linear accumulated energy, starting at
    /// `(0, 0)` and ending at `(bound, _)`.
    pub energy: BTreeMap<String, Vec<(i64, i64)>>,
}

fn value_at(points: &[(i64, i64)], t: Rational) -> Rational {
    let i = points.partition_point(|p| Rational::from_int(p.0) <= t);
    if i == 0 {
        return Rational::from_int(points[0].1);
    }
    let (t0, v0) = points[i - 1];
    match points.get(i) {
        None => Rational::from_int(v0),
        Some(&(t1, v1)) => {
            let slope = Rational::new(v1 - v0, t1 - t0);
            Rational::from_int(v0) + slope * (t - Rational::from_int(t0))
        }
    }
}

impl SimulationTrace {
    /// Exact value of `variable` at time `t`.
    pub fn energy_at(&self, variable: &str, t: Rational) -> Result<Rational, SimError> {
        let points = self.energy.get(variable).ok_or_else(|| SimError::UnknownVariable(variable.into()))?;
        Ok(value_at(points, t))
    }

    /// Number of activations `component` started.
    pub fn activations(&self, component: &str) -> usize {
        let beh = format!("beh_{component}");
        self.events.iter().filter(|e| e.1 == beh && e.2 == "start").count()
    }

    /// The same run observed only up to `bound`.
    pub fn truncate(&self, bound: i64) -> SimulationTrace {
        let energy = self
            .energy
            .iter()
            .map(|(k, pts)| {
                let end = value_at(pts, Rational::from_int(bound));
                let mut kept: Vec<(i64, i64)> = pts.iter().copied().filter(|p| p.0 < bound).collect();
                kept.push((bound, end.floor()));
                (k.clone(), kept)
            })
            .collect();
        SimulationTrace {
            run: self.run,
            seed: self.seed,
            env: self.env.clone(),
            bound,
            events: self.events.iter().filter(|e| e.0 <= bound).cloned().collect(),
            energy,
        }
    }

    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("trace serialises")
    }
}

/// `N` equidistant samples of an energy variable.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EnergySignal {
    pub bound: i64,
    pub n: usize,
    pub samples: Vec<(Rational, Rational)>,
}

impl EnergySignal {
    pub fn values(&self) -> impl Iterator<Item = Rational> + '_ {
        self.samples.iter().map(|s| s.1)
    }

    pub fn times(&self) -> impl Iterator<Item = Rational> + '_ {
        self.samples.iter().map(|s| s.0)
    }
}

/// Sample times `t_i = i * bound / n` for `i = 1..=n`.
pub fn sample_times(bound: i64, n: usize) -> Vec<Rational> {
    (1..=n as i64).map(|i| Rational::new(i * bound, n as i64)).collect()
}

/// Evaluate the trace's piecewise-linear energy at `n` equidistant points.
pub fn sample_energy(trace: &SimulationTrace, variable: &str, n: usize) -> Result<EnergySignal, SimError> {
    if n == 0 {
        return Err(SimError::InvalidQuery("at least one sample point required".into()));
    }
    let points = trace.energy.get(variable).ok_or_else(|| SimError::UnknownVariable(variable.into()))?;
    let samples = sample_times(trace.bound, n).into_iter().map(|t| (t, value_at(points, t))).collect();
    Ok(EnergySignal { bound: trace.bound, n, samples })
}

/// `n * (E * floor(T / P) + min(E, T mod P))`: the cost of a lone periodic
/// component with fixed execution time, first released at 0.
pub fn closed_form_periodic_energy(component: &Component, t: i64) -> Result<i64, SimError> {
    let Trigger::Periodic { period } = component.trigger else {
        return Err(SimError::NotClosedForm("data-driven trigger".into()));
    };
    if !component.exec.is_fixed() {
        return Err(SimError::NotClosedForm("stochastic execution time".into()));
    }
    if !component.modes.is_empty() {
        return Err(SimError::NotClosedForm("component has modes".into()));
    }
    let e = component.exec.wcet;
    Ok(component.energy_rate * (e * t.div_euclid(period) + e.min(t.rem_euclid(period))))
}

/// One run with uniformly drawn dwell times.
pub fn run_once(net: &PtaNetwork, bound: i64, env: &EnvValuation, seed: u64) -> Result<SimulationTrace, SimError> {
    run_once_with(net, bound, env, seed, DwellPolicy::Uniform)
}

pub fn run_once_with(
    net: &PtaNetwork,
    bound: i64,
    env: &EnvValuation,
    seed: u64,
    dwell: DwellPolicy,
) -> Result<SimulationTrace, SimError> {
    if bound <= 0 {
        return Err(SimError::InvalidQuery("bound must be positive".into()));
    }
    env.check(&net.parameters)?;
    let out = engine::execute(net, bound, env, seed, dwell);
    Ok(SimulationTrace { run: 0, seed, env: env.clone(), bound, events: out.events, energy: out.energy })
}

/// Environment valuation drawn for a run seed.
pub fn sample_env(params: &[Parameter], seed: u64) -> EnvValuation {
    EnvValuation::sample(params, &mut ChaCha8Rng::seed_from_u64(seed))
}

/// `query.runs` independent runs; run `j` uses seed `mix(master_seed, j)`
/// and an environment drawn from that seed. Only monitored variables are
/// kept. The result does not depend on the thread count.
pub fn simulate(net: &PtaNetwork, query: &SimulationQuery, master_seed: u64) -> Result<Vec<SimulationTrace>, SimError> {
    query.check(net)?;
    let traces = par::map_range(query.runs, |j| {
        let seed = mix(master_seed, j as u64);
        let env = sample_env(&net.parameters, seed);
        let mut trace = run_once(net, query.bound, &env, seed).expect("sampled environment is in range");
        trace.run = j;
        trace.energy.retain(|k, _| query.monitored.contains(k));
        trace
    });
    Ok(traces)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::parse_model;
    use crate::pta::to_pta;

    fn single(p: i64, exec: &str, rate: i64) -> PtaNetwork {
        let src = format!("system S component A {{ trigger periodic {p} exec {exec} energy {rate} }}");
        to_pta(&parse_model(&src).unwrap())
    }

    fn total(trace: &SimulationTrace, t: i64) -> Rational {
        trace.energy_at(TOTAL, Rational::from_int(t)).unwrap()
    }

    #[test]
    fn periodic_energy_matches_hand_values() {
        let net = single(10, "[4, 4]", 2);
        let env = EnvValuation::default();
        assert_eq!(total(&run_once(&net, 20, &env, 0).unwrap(), 20), Rational::from_int(16));
        assert_eq!(total(&run_once(&net, 12, &env, 0).unwrap(), 12), Rational::from_int(12));
    }

    #[test]
    fn zero_rate_never_accrues() {
        let net = single(10, "[2, 6]", 0);
        let tr = run_once(&net, 97, &EnvValuation::default(), 3).unwrap();
        assert_eq!(tr.energy[TOTAL], vec![(0, 0), (97, 0)]);
    }

    #[test]
    fn continuous_execution_is_linear() {
        let net = single(5, "5", 3);
        let tr = run_once(&net, 40, &EnvValuation::default(), 0).unwrap();
        for t in 0..=40 {
            assert_eq!(total(&tr, t), Rational::from_int(3 * t));
        }
    }

    #[test]
    fn samples_interpolate_linearly() {
        let tr = SimulationTrace {
            run: 0,
            seed: 0,
            env: EnvValuation::default(),
            bound: 10,
            events: Vec::new(),
            energy: [(TOTAL.to_string(), vec![(0, 0), (10, 20)])].into(),
        };
        let s = sample_energy(&tr, TOTAL, 5).unwrap();
        let pairs: Vec<(i64, i64)> = s.samples.iter().map(|(t, v)| (t.floor(), v.floor())).collect();
        assert_eq!(pairs, vec![(2, 4), (4, 8), (6, 12), (8, 16), (10, 20)]);
        assert_eq!(sample_energy(&tr, TOTAL, 1).unwrap().samples.len(), 1);
        assert_eq!(sample_energy(&tr, "c_X", 3), Err(SimError::UnknownVariable("c_X".into())));
    }

    #[test]
    fn idle_interval_is_flat() {
        let net = single(10, "4", 2);
        let tr = run_once(&net, 10, &EnvValuation::default(), 0).unwrap();
        for t in 4..10 {
            assert_eq!(total(&tr, t), Rational::from_int(8));
        }
    }

    #[test]
    fn closed_form_cases() {
        let m = parse_model("system S component A { trigger periodic 10 exec 4 energy 2 }").unwrap();
        let c = &m.components[0];
        assert_eq!(closed_form_periodic_energy(c, 20), Ok(16));
        assert_eq!(closed_form_periodic_energy(c, 0), Ok(0));
        let m = parse_model("system S component A { trigger periodic 10 exec [2, 4] energy 2 }").unwrap();
        assert!(matches!(closed_form_periodic_energy(&m.components[0], 5), Err(SimError::NotClosedForm(_))));
    }

    #[test]
    fn query_validation() {
        let net = single(10, "4", 2);
        assert!(matches!(simulate(&net, &SimulationQuery::new(1, 0), 0), Err(SimError::InvalidQuery(_))));
        assert!(matches!(simulate(&net, &SimulationQuery::new(0, 10), 0), Err(SimError::InvalidQuery(_))));
        let mut q = SimulationQuery::new(1, 10);
        q.monitored.push("nope".into());
        assert_eq!(simulate(&net, &q, 0), Err(SimError::UnknownVariable("nope".into())));
    }

    #[test]
    fn runs_are_reproducible() {
        let net = single(10, "[2, 6]", 2);
        let q = SimulationQuery::new(5, 100);
        let a = simulate(&net, &q, 42).unwrap();
        assert_eq!(a.len(), 5);
        assert_eq!(a, simulate(&net, &q, 42).unwrap());
        assert!(a.iter().all(|t| t.env.is_empty()));
        assert_ne!(a[0].seed, a[1].seed);
    }

    #[test]
    fn env_check_rejects_mismatches() {
        let params = vec![Parameter::new("p", 0, 3)];
        assert!(EnvValuation::from([("p", 2)]).check(&params).is_ok());
        assert!(EnvValuation::from([("p", 4)]).check(&params).is_err());
        assert!(EnvValuation::default().check(&params).is_err());
        assert!(EnvValuation::from([("p", 1), ("q", 0)]).check(&params).is_err());
    }
}
