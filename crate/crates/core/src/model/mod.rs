//! Component architecture models annotated with timing, triggering and
//! energy consumption, plus the line-oriented `.eam` text format.
//!
//! A component consumes energy linearly while it executes: an activation that
//! runs for `d` time units at rate `n` adds `n * d` to the component's cost.
//! The system total is the sum over all components.

mod diag;
mod format;
mod parse;
mod validate;

use serde::{Deserialize, Serialize};

pub use diag::{DiagCode, Diagnostic, Element, Position, Severity};
pub use format::serialize_model;
pub use parse::{parse_model, parse_unchecked, ModelError, SourceMap};
pub use validate::{dataflow_order, validate};

/// A bounded integer environment input.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Parameter {
    pub name: String,
    pub lo: i64,
    pub hi: i64,
}

impl Parameter {
    pub fn new(name: impl Into<String>, lo: i64, hi: i64) -> Self {
        Parameter { name: name.into(), lo, hi }
    }

    /// Number of integer values in the domain (0 when `lo > hi`).
    pub fn domain_size(&self) -> u128 {
        if self.lo > self.hi {
            0
        } else {
            (self.hi as i128 - self.lo as i128 + 1) as u128
        }
    }
}

/// How a component's activations are released.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Trigger {
    Periodic { period: i64 },
    DataDriven { port: String },
}

impl Trigger {
    pub fn period(&self) -> Option<i64> {
        match self {
            Trigger::Periodic { period } => Some(*period),
            Trigger::DataDriven { .. } => None,
        }
    }
}

/// Closed execution-time interval `[bcet, wcet]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExecTime {
    pub bcet: i64,
    pub wcet: i64,
}

impl ExecTime {
    pub fn new(bcet: i64, wcet: i64) -> Self {
        ExecTime { bcet, wcet }
    }

    pub fn fixed(t: i64) -> Self {
        ExecTime { bcet: t, wcet: t }
    }

    pub fn is_fixed(&self) -> bool {
        self.bcet == self.wcet
    }
}

/// Closed integer interval used by mode guards.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: i64,
    pub hi: i64,
}

impl Interval {
    pub fn new(lo: i64, hi: i64) -> Self {
        Interval { lo, hi }
    }

    pub fn contains(&self, v: i64) -> bool {
        self.lo <= v && v <= self.hi
    }

    pub fn overlaps(&self, other: &Interval) -> bool {
        self.lo <= other.hi && other.lo <= self.hi
    }
}

/// A data-dependent operating mode. When the guard variable (an input port of
/// the component or a model parameter) lies inside `guard` at read time, the
/// mode's execution time and energy rate replace the component defaults for
/// that activation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Mode {
    pub var: String,
    pub guard: Interval,
    pub exec: ExecTime,
    pub energy_rate: i64,
}

/// An input port, optionally bound to an environment parameter.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InPort {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub param: Option<String>,
}

impl InPort {
    pub fn new(name: impl Into<String>) -> Self {
        InPort { name: name.into(), param: None }
    }

    pub fn bound(name: impl Into<String>, param: impl Into<String>) -> Self {
        InPort { name: name.into(), param: Some(param.into()) }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Component {
    pub name: String,
    pub trigger: Trigger,
    pub exec: ExecTime,
    pub energy_rate: i64,
    #[serde(default)]
    pub in_ports: Vec<InPort>,
    #[serde(default)]
    pub out_ports: Vec<String>,
    #[serde(default)]
    pub modes: Vec<Mode>,
}

impl Component {
    /// A periodic component with no ports and no modes.
    pub fn periodic(name: impl Into<String>, period: i64, exec: ExecTime, energy_rate: i64) -> Self {
        Component {
            name: name.into(),
            trigger: Trigger::Periodic { period },
            exec,
            energy_rate,
            in_ports: Vec::new(),
            out_ports: Vec::new(),
            modes: Vec::new(),
        }
    }

    pub fn in_port(&self, name: &str) -> Option<&InPort> {
        self.in_ports.iter().find(|p| p.name == name)
    }

    pub fn has_out_port(&self, name: &str) -> bool {
        self.out_ports.iter().any(|p| p == name)
    }

    /// Largest execution time over the default and every mode.
    pub fn max_wcet(&self) -> i64 {
        self.modes.iter().map(|m| m.exec.wcet).fold(self.exec.wcet, i64::max)
    }
}

/// `component.port` reference.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct PortRef {
    pub component: String,
    pub port: String,
}

impl PortRef {
    pub fn new(component: impl Into<String>, port: impl Into<String>) -> Self {
        PortRef { component: component.into(), port: port.into() }
    }
}

impl std::fmt::Display for PortRef {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}.{}", self.component, self.port)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Connection {
    pub source: PortRef,
    pub sink: PortRef,
}

impl Connection {
    pub fn new(source: PortRef, sink: PortRef) -> Self {
        Connection { source, sink }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArchitectureModel {
    pub name: String,
    pub time_unit: String,
    pub parameters: Vec<Parameter>,
    pub components: Vec<Component>,
    pub connections: Vec<Connection>,
}

impl Default for ArchitectureModel {
    fn default() -> Self {
        ArchitectureModel::new("")
    }
}

impl ArchitectureModel {
    pub fn new(name: impl Into<String>) -> Self {
        ArchitectureModel {
            name: name.into(),
            time_unit: "ms".to_string(),
            parameters: Vec::new(),
            components: Vec::new(),
            connections: Vec::new(),
        }
    }

    pub fn component(&self, name: &str) -> Option<&Component> {
        self.components.iter().find(|c| c.name == name)
    }

    pub fn component_index(&self, name: &str) -> Option<usize> {
        self.components.iter().position(|c| c.name == name)
    }

    pub fn parameter(&self, name: &str) -> Option<&Parameter> {
        self.parameters.iter().find(|p| p.name == name)
    }

    /// The connection feeding `component.port`, if any.
    pub fn source_of(&self, component: &str, port: &str) -> Option<&Connection> {
        self.connections.iter().find(|c| c.sink.component == component && c.sink.port == port)
    }

    /// Size of the environment valuation space (product of domain sizes,
    /// saturating at `u128::MAX`).
    pub fn parameter_space_size(&self) -> u128 {
        self.parameters.iter().fold(1u128, |acc, p| acc.saturating_mul(p.domain_size()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parameter_space_is_product_of_domains() {
        let mut m = ArchitectureModel::new("S");
        assert_eq!(m.parameter_space_size(), 1);
        m.parameters.push(Parameter::new("a", 0, 9));
        m.parameters.push(Parameter::new("b", -2, 2));
        assert_eq!(m.parameter_space_size(), 50);
    }

    #[test]
    fn interval_overlap() {
        assert!(Interval::new(0, 4).overlaps(&Interval::new(4, 9)));
        assert!(!Interval::new(0, 4).overlaps(&Interval::new(5, 9)));
    }
}
