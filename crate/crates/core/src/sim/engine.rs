use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::pta::{ChannelKind, PtaNetwork, Role, SyncDir, Update, VarInit};

use super::{automaton_stream, DwellPolicy, EnvValuation, TraceEvent};

/// Upper bound on instantaneous transitions at a single time point. Acyclic
/// data flow keeps real chains far below this.
const MAX_CHAIN: usize = 100_000;

struct Meter {
    value: i64,
    slope: i64,
    at: i64,
    points: Vec<(i64, i64)>,
}

impl Meter {
    fn advance(&mut self, t: i64) {
        self.value += self.slope * (t - self.at);
        self.at = t;
    }
}

pub(super) struct Outcome {
    pub events: Vec<TraceEvent>,
    pub energy: BTreeMap<String, Vec<(i64, i64)>>,
}

struct Engine<'a> {
    net: &'a PtaNetwork,
    bound: i64,
    now: i64,
    loc: Vec<usize>,
    /// Absolute time of the last reset of every clock, per automaton.
    resets: Vec<Vec<i64>>,
    vars: Vec<i64>,
    due: Vec<Option<(i64, usize)>>,
    rngs: Vec<ChaCha8Rng>,
    dwell: DwellPolicy,
    order: Vec<usize>,
    events: Vec<TraceEvent>,
    meters: Vec<Meter>,
}

impl<'a> Engine<'a> {
    fn new(net: &'a PtaNetwork, bound: i64, env: &EnvValuation, seed: u64, dwell: DwellPolicy) -> Self {
        let vars = net
            .vars
            .iter()
            .map(|v| match v.init {
                VarInit::Zero => 0,
                VarInit::Param(p) => env.get(&net.parameters[p].name).unwrap_or(0),
            })
            .collect();
        let mut order: Vec<usize> = (0..net.automata.len()).collect();
        order.sort_by_key(|&a| (net.automata[a].role, net.automata[a].component, a));
        Engine {
            net,
            bound,
            now: 0,
            loc: net.automata.iter().map(|a| a.initial).collect(),
            resets: net.automata.iter().map(|a| vec![0; a.clocks.len()]).collect(),
            vars,
            due: vec![None; net.automata.len()],
            rngs: net
                .automata
                .iter()
                .map(|a| {
                    let mut rng = ChaCha8Rng::seed_from_u64(seed);
                    rng.set_stream(automaton_stream(&a.name));
                    rng
                })
                .collect(),
            dwell,
            order,
            events: Vec::new(),
            meters: net.energy_vars.iter().map(|_| Meter { value: 0, slope: 0, at: 0, points: vec![(0, 0)] }).collect(),
        }
    }

    fn clock(&self, a: usize, c: usize) -> i64 {
        self.now - self.resets[a][c]
    }

    fn guards_hold(&self, a: usize, e: usize) -> bool {
        let edge = &self.net.automata[a].edges[e];
        edge.clock_guard.iter().all(|g| g.holds(self.clock(a, g.clock)))
            && edge.data_guard.iter().all(|g| g.holds(&self.vars))
    }

    fn committed(&self, a: usize) -> bool {
        self.net.automata[a].locations[self.loc[a]].committed
    }

    /// First enabled edge out of the current location that does not wait
    /// for a synchronisation.
    fn enabled_internal(&self, a: usize) -> Option<usize> {
        let pta = &self.net.automata[a];
        pta.outgoing(self.loc[a])
            .filter(|(_, e)| e.sync.is_none_or(|s| s.dir == SyncDir::Emit))
            .map(|(i, _)| i)
            .find(|&i| self.guards_hold(a, i))
    }

    /// Pick the firing time of the next timed edge when `a` enters a
    /// non-committed location.
    fn schedule(&mut self, a: usize) {
        self.due[a] = None;
        let pta = &self.net.automata[a];
        let here = &pta.locations[self.loc[a]];
        if here.committed {
            return;
        }
        let ceiling = here.invariant.map(|b| self.resets[a][b.clock] + b.max);
        let mut best: Option<(i64, Option<i64>, usize)> = None;
        for (i, e) in pta.outgoing(self.loc[a]) {
            if e.sync.is_some_and(|s| s.dir == SyncDir::Receive) || !e.data_guard.iter().all(|g| g.holds(&self.vars)) {
                continue;
            }
            let mut lo = self.now;
            let mut hi = ceiling;
            for g in &e.clock_guard {
                let at = self.resets[a][g.clock] + g.value;
                use crate::pta::ClockOp::*;
                if matches!(g.op, Ge | Eq) {
                    lo = lo.max(at);
                }
                if matches!(g.op, Le | Eq) {
                    hi = Some(hi.map_or(at, |h| h.min(at)));
                }
            }
            if hi.is_some_and(|h| h < lo) {
                continue;
            }
            if best.is_none_or(|(blo, _, _)| lo < blo) {
                best = Some((lo, hi, i));
            }
        }
        if let Some((lo, hi, e)) = best {
            let t = match hi {
                Some(hi) if hi > lo => match self.dwell {
                    DwellPolicy::Uniform => self.rngs[a].gen_range(lo..=hi),
                    DwellPolicy::Wcet => hi,
                },
                _ => lo,
            };
            self.due[a] = Some((t, e));
        }
    }

    fn apply(&mut self, a: usize, e: usize) {
        let pta = &self.net.automata[a];
        let edge = &pta.edges[e];
        self.events.push(TraceEvent(self.now, pta.name.clone(), edge.name.clone()));
        for &c in &edge.resets {
            self.resets[a][c] = self.now;
        }
        self.loc[a] = edge.target;
    }

    fn update(&mut self, updates: &[Update]) {
        for u in updates {
            self.vars[u.var] = match u.value {
                crate::pta::Operand::Const(c) => c,
                crate::pta::Operand::Var(v) => self.vars[v],
            };
        }
    }

    fn take(&mut self, a: usize, e: usize) {
        let net = self.net;
        let edge = &net.automata[a].edges[e];
        let mut receivers = Vec::new();
        if let Some(sync) = edge.sync.filter(|s| s.dir == SyncDir::Emit) {
            for &b in &self.order {
                if b == a {
                    continue;
                }
                let found = net.automata[b]
                    .outgoing(self.loc[b])
                    .filter(|(_, r)| r.sync.is_some_and(|s| s.dir == SyncDir::Receive && s.channel == sync.channel))
                    .map(|(i, _)| i)
                    .find(|&i| self.guards_hold(b, i));
                if let Some(i) = found {
                    receivers.push((b, i));
                }
            }
            if receivers.is_empty() && net.channels[sync.channel].kind == ChannelKind::Dispatch {
                self.events.push(TraceEvent(self.now, net.automata[a].name.clone(), "drop".into()));
            }
        }
        self.apply(a, e);
        self.update(&edge.updates);
        for &(b, i) in &receivers {
            self.apply(b, i);
            self.update(&net.automata[b].edges[i].updates);
        }
        self.schedule(a);
        for (b, _) in receivers {
            self.schedule(b);
        }
    }

    fn settle(&mut self) {
        for _ in 0..MAX_CHAIN {
            let next = self
                .order
                .iter()
                .copied()
                .filter(|&a| self.committed(a))
                .find_map(|a| self.enabled_internal(a).map(|e| (a, e)));
            match next {
                Some((a, e)) => self.take(a, e),
                None => return,
            }
        }
        panic!("instantaneous transition chain did not terminate at t={}", self.now);
    }

    fn rate_of(&self, a: usize) -> i64 {
        self.net.automata[a].locations[self.loc[a]].cost_rate
    }

    fn observe(&mut self) {
        let mut total = 0;
        for (i, v) in self.net.energy_vars.iter().enumerate() {
            let slope = if self.net.automata[v.owner].role == Role::Monitor {
                total
            } else {
                let r = self.rate_of(v.owner);
                total += r;
                r
            };
            let now = self.now;
            let m = &mut self.meters[i];
            if slope != m.slope {
                if now < self.bound && m.points.last().is_some_and(|p| p.0 != now) {
                    m.points.push((now, m.value));
                }
                m.slope = slope;
            }
        }
    }

    fn advance(&mut self, t: i64) {
        for m in &mut self.meters {
            m.advance(t);
        }
        self.now = t;
    }

    fn run(mut self) -> Outcome {
        for a in 0..self.loc.len() {
            self.schedule(a);
        }
        self.settle();
        self.observe();
        while let Some(t) = self.due.iter().flatten().map(|d| d.0).min() {
            if t > self.bound {
                break;
            }
            self.advance(t);
            for i in 0..self.order.len() {
                let a = self.order[i];
                if let Some((at, e)) = self.due[a] {
                    if at == t {
                        self.take(a, e);
                    }
                }
            }
            self.settle();
            self.observe();
        }
        self.advance(self.bound);
        let mut energy = BTreeMap::new();
        for (v, mut m) in self.net.energy_vars.iter().zip(self.meters) {
            m.points.push((self.bound, m.value));
            energy.insert(v.name.clone(), m.points);
        }
        Outcome { events: self.events, energy }
    }
}

pub(super) fn execute(net: &PtaNetwork, bound: i64, env: &EnvValuation, seed: u64, dwell: DwellPolicy) -> Outcome {
    Engine::new(net, bound, env, seed, dwell).run()
}
