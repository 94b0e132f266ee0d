//! Priced timed automata networks.
//!
//! Every component becomes two automata. The interface automaton releases
//! activations (a periodic self-loop on clock `x`, or a receive on the
//! channel of the trigger port's source). The behavior automaton runs
//! `Idle -> Read -> Execute -> Write -> Idle`; only `Execute` locations carry
//! a cost rate, so energy accrues strictly between reading inputs and writing
//! outputs. A single monitor automaton owns the system total.
//!
//! Edges refer to channels, shared variables and clocks by index into the
//! tables of the owning [`PtaNetwork`] and [`Pta`].

mod translate;

use std::fmt::{self, Write};

use crate::model::Parameter;

pub use translate::{behavior_automaton, interface_automaton, monitor_automaton, to_pta};

/// Name of the network's total-energy variable.
pub const TOTAL: &str = "total";

/// Name of the per-component cost variable of `component`.
pub fn cost_var(component: &str) -> String {
    format!("c_{component}")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Role {
    Behavior,
    Interface,
    Monitor,
}

/// Upper bound `clock <= max` on a location.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ClockBound {
    pub clock: usize,
    pub max: i64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Location {
    pub name: String,
    pub invariant: Option<ClockBound>,
    pub cost_rate: i64,
    /// Time may not pass here; some outgoing edge must be taken at once.
    pub committed: bool,
    pub executing: bool,
}

impl Location {
    fn plain(name: &str) -> Self {
        Location { name: name.to_string(), invariant: None, cost_rate: 0, committed: false, executing: false }
    }

    fn committed(name: &str) -> Self {
        Location { committed: true, ..Location::plain(name) }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClockOp {
    Ge,
    Le,
    Eq,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ClockConstraint {
    pub clock: usize,
    pub op: ClockOp,
    pub value: i64,
}

impl ClockConstraint {
    pub fn holds(&self, v: i64) -> bool {
        match self.op {
            ClockOp::Ge => v >= self.value,
            ClockOp::Le => v <= self.value,
            ClockOp::Eq => v == self.value,
        }
    }
}

/// `lo <= var <= hi` over a shared integer variable.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DataConstraint {
    pub var: usize,
    pub lo: i64,
    pub hi: i64,
}

impl DataConstraint {
    pub fn holds(&self, vars: &[i64]) -> bool {
        (self.lo..=self.hi).contains(&vars[self.var])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SyncDir {
    Emit,
    Receive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Sync {
    pub channel: usize,
    pub dir: SyncDir,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Operand {
    Const(i64),
    Var(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Update {
    pub var: usize,
    pub value: Operand,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Edge {
    pub name: String,
    pub source: usize,
    pub target: usize,
    pub clock_guard: Vec<ClockConstraint>,
    pub data_guard: Vec<DataConstraint>,
    pub sync: Option<Sync>,
    pub resets: Vec<usize>,
    pub updates: Vec<Update>,
}

impl Edge {
    fn new(name: impl Into<String>, source: usize, target: usize) -> Self {
        Edge {
            name: name.into(),
            source,
            target,
            clock_guard: Vec::new(),
            data_guard: Vec::new(),
            sync: None,
            resets: Vec::new(),
            updates: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Pta {
    pub name: String,
    pub role: Role,
    /// Index of the owning component (`None` for the monitor).
    pub component: Option<usize>,
    pub clocks: Vec<String>,
    pub locations: Vec<Location>,
    pub edges: Vec<Edge>,
    pub initial: usize,
}

impl Pta {
    pub fn location(&self, name: &str) -> Option<usize> {
        self.locations.iter().position(|l| l.name == name)
    }

    pub fn edge(&self, name: &str) -> Option<&Edge> {
        self.edges.iter().find(|e| e.name == name)
    }

    pub fn outgoing(&self, location: usize) -> impl Iterator<Item = (usize, &Edge)> {
        self.edges.iter().enumerate().filter(move |(_, e)| e.source == location)
    }

    pub fn executing_locations(&self) -> impl Iterator<Item = &Location> {
        self.locations.iter().filter(|l| l.executing)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChannelKind {
    /// Interface to behavior activation of one component.
    Dispatch,
    /// Data written on an output port.
    Data,
}

/// Broadcast channel: an emit never blocks, every ready receiver follows.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Channel {
    pub name: String,
    pub kind: ChannelKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarInit {
    Zero,
    /// Initialised from the environment value of a model parameter.
    Param(usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SharedVar {
    pub name: String,
    pub init: VarInit,
}

/// An accumulated-cost variable and the automaton that owns it. Component
/// costs grow at the owner's current location rate; the monitor's total
/// grows at the sum of all component rates.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EnergyVar {
    pub name: String,
    pub owner: usize,
    pub component: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PtaNetwork {
    pub name: String,
    pub automata: Vec<Pta>,
    pub channels: Vec<Channel>,
    pub vars: Vec<SharedVar>,
    pub energy_vars: Vec<EnergyVar>,
    pub parameters: Vec<Parameter>,
    pub components: Vec<String>,
}

impl PtaNetwork {
    pub fn automaton(&self, name: &str) -> Option<&Pta> {
        self.automata.iter().find(|a| a.name == name)
    }

    pub fn automaton_index(&self, name: &str) -> Option<usize> {
        self.automata.iter().position(|a| a.name == name)
    }

    pub fn var(&self, name: &str) -> Option<usize> {
        self.vars.iter().position(|v| v.name == name)
    }

    pub fn channel(&self, name: &str) -> Option<usize> {
        self.channels.iter().position(|c| c.name == name)
    }

    pub fn energy_var(&self, name: &str) -> Option<&EnergyVar> {
        self.energy_vars.iter().find(|v| v.name == name)
    }

    pub fn monitor(&self) -> &Pta {
        self.automata.iter().find(|a| a.role == Role::Monitor).expect("network has a monitor")
    }

    /// Structural well-formedness: endpoints, indices, rates, the 2m+1 shape
    /// and the one-executing-location-per-mode rule. Returns the first
    /// violation found.
    pub fn check(&self) -> Result<(), String> {
        if self.automata.len() != 2 * self.components.len() + 1 {
            return Err(format!("{} automata for {} components", self.automata.len(), self.components.len()));
        }
        if self.automata.iter().filter(|a| a.role == Role::Monitor).count() != 1 {
            return Err("expected exactly one monitor".into());
        }
        for a in &self.automata {
            if a.initial >= a.locations.len() {
                return Err(format!("{}: initial location out of range", a.name));
            }
            for l in &a.locations {
                if l.cost_rate < 0 {
                    return Err(format!("{}.{}: negative cost rate", a.name, l.name));
                }
                if l.invariant.is_some_and(|b| b.clock >= a.clocks.len()) {
                    return Err(format!("{}.{}: unknown clock in invariant", a.name, l.name));
                }
            }
            for e in &a.edges {
                if e.source >= a.locations.len() || e.target >= a.locations.len() {
                    return Err(format!("{}.{}: dangling endpoint", a.name, e.name));
                }
                if e.sync.is_some_and(|s| s.channel >= self.channels.len()) {
                    return Err(format!("{}.{}: undeclared channel", a.name, e.name));
                }
                if e.clock_guard.iter().any(|g| g.clock >= a.clocks.len())
                    || e.resets.iter().any(|&c| c >= a.clocks.len())
                {
                    return Err(format!("{}.{}: unknown clock", a.name, e.name));
                }
                let var_ok = |v: usize| v < self.vars.len();
                if !e.data_guard.iter().all(|g| var_ok(g.var))
                    || !e.updates.iter().all(|u| var_ok(u.var) && !matches!(u.value, Operand::Var(v) if !var_ok(v)))
                {
                    return Err(format!("{}.{}: unknown variable", a.name, e.name));
                }
            }
        }
        Ok(())
    }

    /// Human-readable dump of every automaton. Not a stable format.
    pub fn listing(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "network {} ({} automata)", self.name, self.automata.len());
        for a in &self.automata {
            let _ = writeln!(out, "\n{:?} {} clocks [{}]", a.role, a.name, a.clocks.join(", "));
            for (i, l) in a.locations.iter().enumerate() {
                let mut flags = Vec::new();
                if i == a.initial {
                    flags.push("initial".to_string());
                }
                if l.committed {
                    flags.push("committed".to_string());
                }
                if let Some(b) = l.invariant {
                    flags.push(format!("{} <= {}", a.clocks[b.clock], b.max));
                }
                if l.cost_rate != 0 {
                    flags.push(format!("rate {}", l.cost_rate));
                }
                let _ = writeln!(out, "  loc {} {}", l.name, flags.join(", "));
            }
            for e in &a.edges {
                let _ = writeln!(out, "  {}", EdgeDisplay { net: self, pta: a, edge: e });
            }
        }
        out
    }
}

struct EdgeDisplay<'a> {
    net: &'a PtaNetwork,
    pta: &'a Pta,
    edge: &'a Edge,
}

impl fmt::Display for EdgeDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (a, e) = (self.pta, self.edge);
        write!(f, "{}: {} -> {}", e.name, a.locations[e.source].name, a.locations[e.target].name)?;
        for g in &e.clock_guard {
            let op = match g.op {
                ClockOp::Ge => ">=",
                ClockOp::Le => "<=",
                ClockOp::Eq => "==",
            };
            write!(f, " [{} {op} {}]", a.clocks[g.clock], g.value)?;
        }
        for g in &e.data_guard {
            write!(f, " [{} in {}..{}]", self.net.vars[g.var].name, g.lo, g.hi)?;
        }
        if let Some(s) = e.sync {
            let mark = if s.dir == SyncDir::Emit { '!' } else { '?' };
            write!(f, " {}{mark}", self.net.channels[s.channel].name)?;
        }
        for &c in &e.resets {
            write!(f, " {}:=0", a.clocks[c])?;
        }
        for u in &e.updates {
            match u.value {
                Operand::Const(c) => write!(f, " {}:={c}", self.net.vars[u.var].name)?,
                Operand::Var(v) => write!(f, " {}:={}", self.net.vars[u.var].name, self.net.vars[v].name)?,
            }
        }
        Ok(())
    }
}
