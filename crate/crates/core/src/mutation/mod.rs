//! First-order energy-aware mutation operators and catalog generation.
//!
//! Six operators perturb one element of a model each:
//!
//! | kind | change |
//! |------|--------|
//! | ERO  | energy rate of a component (modes scaled alike under a factor) |
//! | PRO  | period of a periodic component |
//! | ETO  | execution-time interval (modes scaled alike under a factor) |
//! | CRO  | removes a component and its connections |
//! | CIO  | inserts a component |
//! | TRO  | flips periodic and data-driven triggering |
//!
//! Every mutant records its [`Mutation`]: re-applying it to the original
//! model reproduces the mutant exactly. Candidates that would break a model
//! invariant are discarded and logged, never repaired.

mod catalog;
mod operators;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::model::{ArchitectureModel, Component, Connection, DiagCode, ExecTime, Trigger};

pub use catalog::{generate_mutants, CioTemplate, Discard, GenerationConfig, MutantCatalog};
pub use operators::{
    apply_cio, apply_cro, apply_ero, apply_ero_mode, apply_eto, apply_pro, apply_tro, default_cio_template, median,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum OperatorKind {
    #[serde(rename = "ERO")]
    Ero,
    #[serde(rename = "PRO")]
    Pro,
    #[serde(rename = "ETO")]
    Eto,
    #[serde(rename = "CRO")]
    Cro,
    #[serde(rename = "CIO")]
    Cio,
    #[serde(rename = "TRO")]
    Tro,
}

impl OperatorKind {
    pub const ALL: [OperatorKind; 6] = [
        OperatorKind::Ero,
        OperatorKind::Pro,
        OperatorKind::Eto,
        OperatorKind::Cro,
        OperatorKind::Cio,
        OperatorKind::Tro,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            OperatorKind::Ero => "ERO",
            OperatorKind::Pro => "PRO",
            OperatorKind::Eto => "ETO",
            OperatorKind::Cro => "CRO",
            OperatorKind::Cio => "CIO",
            OperatorKind::Tro => "TRO",
        }
    }
}

impl fmt::Display for OperatorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for OperatorKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        OperatorKind::ALL
            .into_iter()
            .find(|k| k.as_str().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| format!("unknown mutation operator `{s}`"))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error, Serialize, Deserialize)]
#[serde(tag = "code", content = "detail", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum MutationError {
    #[error("replacement equals the original value")]
    NoChange,
    #[error("component is not periodic")]
    NotPeriodic,
    #[error("mutant violates {0}")]
    InvariantBreak(DiagCode),
    #[error("cannot remove the last component")]
    LastComponent,
    #[error("component name `{0}` already exists")]
    NameCollision(String),
    #[error("insertion would create a data-flow cycle")]
    CyclicDataflow,
    #[error("component has no input port to trigger on")]
    NoInPort,
    #[error("unknown component `{0}`")]
    UnknownComponent(String),
    #[error("component has no mode #{0}")]
    UnknownMode(usize),
    #[error("invalid replacement value: {0}")]
    InvalidValue(String),
}

impl MutationError {
    pub fn code(&self) -> String {
        match self {
            MutationError::NoChange => "NO_CHANGE".into(),
            MutationError::NotPeriodic => "NOT_PERIODIC".into(),
            MutationError::InvariantBreak(c) => format!("INVARIANT_BREAK({c})"),
            MutationError::LastComponent => "LAST_COMPONENT".into(),
            MutationError::NameCollision(_) => "NAME_COLLISION".into(),
            MutationError::CyclicDataflow => "CYCLIC_DATAFLOW".into(),
            MutationError::NoInPort => "NO_IN_PORT".into(),
            MutationError::UnknownComponent(_) => "UNKNOWN_COMPONENT".into(),
            MutationError::UnknownMode(_) => "UNKNOWN_MODE".into(),
            MutationError::InvalidValue(_) => "INVALID_VALUE".into(),
        }
    }
}

/// The recorded provenance of a mutant: a complete description of the one
/// change applied to the original model.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum Mutation {
    EnergyRate {
        component: String,
        rate: i64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        mode_rates: Option<Vec<i64>>,
    },
    ModeEnergyRate {
        component: String,
        mode: usize,
        rate: i64,
    },
    Period {
        component: String,
        period: i64,
    },
    ExecTime {
        component: String,
        exec: ExecTime,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        mode_execs: Option<Vec<ExecTime>>,
    },
    RemoveComponent {
        component: String,
    },
    InsertComponent {
        template: Component,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        attach: Option<Connection>,
    },
    Trigger {
        component: String,
        trigger: Trigger,
    },
}

impl Mutation {
    pub fn kind(&self) -> OperatorKind {
        match self {
            Mutation::EnergyRate { .. } | Mutation::ModeEnergyRate { .. } => OperatorKind::Ero,
            Mutation::Period { .. } => OperatorKind::Pro,
            Mutation::ExecTime { .. } => OperatorKind::Eto,
            Mutation::RemoveComponent { .. } => OperatorKind::Cro,
            Mutation::InsertComponent { .. } => OperatorKind::Cio,
            Mutation::Trigger { .. } => OperatorKind::Tro,
        }
    }

    /// Name of the component this mutation targets (the inserted component
    /// for CIO).
    pub fn component(&self) -> &str {
        match self {
            Mutation::EnergyRate { component, .. }
            | Mutation::ModeEnergyRate { component, .. }
            | Mutation::Period { component, .. }
            | Mutation::ExecTime { component, .. }
            | Mutation::RemoveComponent { component }
            | Mutation::Trigger { component, .. } => component,
            Mutation::InsertComponent { template, .. } => &template.name,
        }
    }

    /// Element path of the mutated field, e.g. `A.energy` or `A.mode0.energy`.
    pub fn target(&self) -> String {
        match self {
            Mutation::EnergyRate { component, .. } => format!("{component}.energy"),
            Mutation::ModeEnergyRate { component, mode, .. } => format!("{component}.mode{mode}.energy"),
            Mutation::Period { component, .. } => format!("{component}.period"),
            Mutation::ExecTime { component, .. } => format!("{component}.exec"),
            Mutation::RemoveComponent { component } => component.clone(),
            Mutation::InsertComponent { template, .. } => template.name.clone(),
            Mutation::Trigger { component, .. } => format!("{component}.trigger"),
        }
    }

    /// Apply the change to `original`, returning the mutated model. The
    /// result is checked against every model invariant.
    pub fn apply(&self, original: &ArchitectureModel) -> Result<ArchitectureModel, MutationError> {
        operators::apply_mutation(original, self)
    }
}

/// One generated first-order mutant.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Mutant {
    pub id: String,
    pub kind: OperatorKind,
    pub target: String,
    pub original_value: String,
    pub mutated_value: String,
    pub provenance: Mutation,
    #[serde(skip)]
    pub model: ArchitectureModel,
}

/// Candidate id: `<kind>_<component>_<ordinal>`.
pub fn mutant_id(kind: OperatorKind, component: &str, ordinal: usize) -> String {
    format!("{kind}_{component}_{ordinal}")
}
