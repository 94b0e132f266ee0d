use std::fmt;

use serde::{Deserialize, Serialize};

/// 1-based line/column in a model document.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Position {
    pub line: usize,
    pub column: usize,
}

impl fmt::Display for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Severity {
    Error,
    Warning,
}

/// Stable diagnostic codes. Syntax codes come from the parser, the rest from
/// [`validate`](super::validate), one per model invariant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum DiagCode {
    // syntax
    Syntax,
    MissingField,
    DuplicateField,
    // model level
    NoComponents,
    DuplicateName,
    DuplicateParam,
    EmptyDomain,
    // component level
    DuplicatePort,
    NonpositivePeriod,
    NegativeExec,
    BcetGtWcet,
    WcetGtPeriod,
    NegativeRate,
    TriggerPortUnknown,
    StarvedTrigger,
    UnknownParam,
    // modes
    UnknownGuardVar,
    MixedGuardVars,
    EmptyGuard,
    OverlappingModes,
    // connections
    UnknownEndpoint,
    SelfConnection,
    DuplicateSink,
    PortDoublyDriven,
    CyclicDataflow,
}

impl DiagCode {
    pub fn as_str(&self) -> &'static str {
        match self {
            DiagCode::Syntax => "SYNTAX",
            DiagCode::MissingField => "MISSING_FIELD",
            DiagCode::DuplicateField => "DUPLICATE_FIELD",
            DiagCode::NoComponents => "NO_COMPONENTS",
            DiagCode::DuplicateName => "DUPLICATE_NAME",
            DiagCode::DuplicateParam => "DUPLICATE_PARAM",
            DiagCode::EmptyDomain => "EMPTY_DOMAIN",
            DiagCode::DuplicatePort => "DUPLICATE_PORT",
            DiagCode::NonpositivePeriod => "NONPOSITIVE_PERIOD",
            DiagCode::NegativeExec => "NEGATIVE_EXEC",
            DiagCode::BcetGtWcet => "BCET_GT_WCET",
            DiagCode::WcetGtPeriod => "WCET_GT_PERIOD",
            DiagCode::NegativeRate => "NEGATIVE_RATE",
            DiagCode::TriggerPortUnknown => "TRIGGER_PORT_UNKNOWN",
            DiagCode::StarvedTrigger => "STARVED_TRIGGER",
            DiagCode::UnknownParam => "UNKNOWN_PARAM",
            DiagCode::UnknownGuardVar => "UNKNOWN_GUARD_VAR",
            DiagCode::MixedGuardVars => "MIXED_GUARD_VARS",
            DiagCode::EmptyGuard => "EMPTY_GUARD",
            DiagCode::OverlappingModes => "OVERLAPPING_MODES",
            DiagCode::UnknownEndpoint => "UNKNOWN_ENDPOINT",
            DiagCode::SelfConnection => "SELF_CONNECTION",
            DiagCode::DuplicateSink => "DUPLICATE_SINK",
            DiagCode::PortDoublyDriven => "PORT_DOUBLY_DRIVEN",
            DiagCode::CyclicDataflow => "CYCLIC_DATAFLOW",
        }
    }

    pub fn is_syntax(&self) -> bool {
        matches!(self, DiagCode::Syntax | DiagCode::MissingField | DiagCode::DuplicateField)
    }

    /// A data-triggered component whose trigger port has no driver is legal:
    /// it simply never activates. Component removal produces exactly this
    /// situation downstream of the removed component.
    pub fn severity(&self) -> Severity {
        match self {
            DiagCode::StarvedTrigger => Severity::Warning,
            _ => Severity::Error,
        }
    }
}

impl fmt::Display for DiagCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// The model element a diagnostic refers to.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Element {
    Model,
    Param(String),
    Component(String),
    Port { component: String, port: String },
    Mode { component: String, index: usize },
    Connection(usize),
}

impl fmt::Display for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Element::Model => f.write_str("model"),
            Element::Param(p) => write!(f, "param {p}"),
            Element::Component(c) => write!(f, "component {c}"),
            Element::Port { component, port } => write!(f, "port {component}.{port}"),
            Element::Mode { component, index } => write!(f, "mode #{index} of {component}"),
            Element::Connection(i) => write!(f, "connection #{i}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub code: DiagCode,
    pub element: Element,
    pub message: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub position: Option<Position>,
}

impl Diagnostic {
    pub fn new(code: DiagCode, element: Element, message: impl Into<String>) -> Self {
        Diagnostic { code, element, message: message.into(), position: None }
    }

    pub fn at(mut self, position: Position) -> Self {
        self.position = Some(position);
        self
    }

    pub fn severity(&self) -> Severity {
        self.code.severity()
    }

    pub fn is_error(&self) -> bool {
        self.severity() == Severity::Error
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sev = match self.severity() {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        match self.position {
            Some(p) => write!(f, "{p}: {sev}[{}] {}: {}", self.code, self.element, self.message),
            None => write!(f, "{sev}[{}] {}: {}", self.code, self.element, self.message),
        }
    }
}
