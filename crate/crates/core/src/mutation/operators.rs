use crate::model::{serialize_model, validate, ArchitectureModel, Component, Connection, ExecTime, Trigger};

use super::{mutant_id, Mutant, Mutation, MutationError};

/// Period given to components that become periodic when no other periodic
/// component exists to take a median from.
pub const DEFAULT_PERIOD: i64 = 10;

/// Median of `values`, averaging the middle pair (rounded half up) for even
/// counts. `None` for an empty slice.
pub fn median(values: &[i64]) -> Option<i64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_unstable();
    let n = v.len();
    Some(if n % 2 == 1 { v[n / 2] } else { (v[n / 2 - 1] + v[n / 2] + 1).div_euclid(2) })
}

fn periods(model: &ArchitectureModel, except: Option<&str>) -> Vec<i64> {
    model.components.iter().filter(|c| Some(c.name.as_str()) != except).filter_map(|c| c.trigger.period()).collect()
}

fn find<'m>(model: &'m ArchitectureModel, name: &str) -> Result<&'m Component, MutationError> {
    model.component(name).ok_or_else(|| MutationError::UnknownComponent(name.to_string()))
}

fn check(model: ArchitectureModel) -> Result<ArchitectureModel, MutationError> {
    match validate(&model).into_iter().find(|d| d.is_error()) {
        Some(d) => Err(MutationError::InvariantBreak(d.code)),
        None => Ok(model),
    }
}

fn exec_str(e: &ExecTime) -> String {
    format!("[{}, {}]", e.bcet, e.wcet)
}

fn trigger_str(t: &Trigger) -> String {
    match t {
        Trigger::Periodic { period } => format!("periodic {period}"),
        Trigger::DataDriven { port } => format!("data {port}"),
    }
}

fn component_str(c: &Component) -> String {
    format!("component {} {} exec {} energy {}", c.name, trigger_str(&c.trigger), exec_str(&c.exec), c.energy_rate)
}

pub(super) fn apply_mutation(original: &ArchitectureModel, m: &Mutation) -> Result<ArchitectureModel, MutationError> {
    let mut model = original.clone();
    match m {
        Mutation::EnergyRate { component, rate, mode_rates } => {
            let c = find(original, component)?;
            if *rate < 0 {
                return Err(MutationError::InvalidValue(format!("negative rate {rate}")));
            }
            if let Some(mr) = mode_rates {
                if mr.len() != c.modes.len() {
                    return Err(MutationError::InvalidValue("mode rate count mismatch".into()));
                }
            }
            let unchanged = *rate == c.energy_rate
                && mode_rates.as_ref().is_none_or(|mr| mr.iter().zip(&c.modes).all(|(r, m)| *r == m.energy_rate));
            if unchanged {
                return Err(MutationError::NoChange);
            }
            let i = original.component_index(component).unwrap();
            let target = &mut model.components[i];
            target.energy_rate = *rate;
            if let Some(mr) = mode_rates {
                for (mode, r) in target.modes.iter_mut().zip(mr) {
                    mode.energy_rate = *r;
                }
            }
        }
        Mutation::ModeEnergyRate { component, mode, rate } => {
            let c = find(original, component)?;
            let current = c.modes.get(*mode).ok_or(MutationError::UnknownMode(*mode))?;
            if *rate < 0 {
                return Err(MutationError::InvalidValue(format!("negative rate {rate}")));
            }
            if current.energy_rate == *rate {
                return Err(MutationError::NoChange);
            }
            let i = original.component_index(component).unwrap();
            model.components[i].modes[*mode].energy_rate = *rate;
        }
        Mutation::Period { component, period } => {
            let c = find(original, component)?;
            let Some(current) = c.trigger.period() else {
                return Err(MutationError::NotPeriodic);
            };
            if *period <= 0 {
                return Err(MutationError::InvalidValue(format!("period {period} must be positive")));
            }
            if current == *period {
                return Err(MutationError::NoChange);
            }
            let i = original.component_index(component).unwrap();
            model.components[i].trigger = Trigger::Periodic { period: *period };
        }
        Mutation::ExecTime { component, exec, mode_execs } => {
            let c = find(original, component)?;
            if let Some(me) = mode_execs {
                if me.len() != c.modes.len() {
                    return Err(MutationError::InvalidValue("mode exec count mismatch".into()));
                }
            }
            let unchanged = *exec == c.exec
                && mode_execs.as_ref().is_none_or(|me| me.iter().zip(&c.modes).all(|(e, m)| *e == m.exec));
            if unchanged {
                return Err(MutationError::NoChange);
            }
            let i = original.component_index(component).unwrap();
            let target = &mut model.components[i];
            target.exec = *exec;
            if let Some(me) = mode_execs {
                for (mode, e) in target.modes.iter_mut().zip(me) {
                    mode.exec = *e;
                }
            }
        }
        Mutation::RemoveComponent { component } => {
            find(original, component)?;
            if original.components.len() < 2 {
                return Err(MutationError::LastComponent);
            }
            model.components.retain(|c| &c.name != component);
            model.connections.retain(|c| &c.source.component != component && &c.sink.component != component);
        }
        Mutation::InsertComponent { template, attach } => {
            if original.component(&template.name).is_some() {
                return Err(MutationError::NameCollision(template.name.clone()));
            }
            model.components.push(template.clone());
            if let Some(conn) = attach {
                model.connections.push(conn.clone());
            }
            if crate::model::dataflow_order(&model).is_none() {
                return Err(MutationError::CyclicDataflow);
            }
        }
        Mutation::Trigger { component, trigger } => {
            let c = find(original, component)?;
            if c.trigger == *trigger {
                return Err(MutationError::NoChange);
            }
            let i = original.component_index(component).unwrap();
            model.components[i].trigger = trigger.clone();
        }
    }
    check(model)
}

/// Render `(original_value, mutated_value)` for a mutation known to apply.
fn render(original: &ArchitectureModel, m: &Mutation) -> (String, String) {
    let comp = |name: &str| original.component(name).expect("mutation target exists");
    match m {
        Mutation::EnergyRate { component, rate, mode_rates } => {
            let c = comp(component);
            match mode_rates {
                None => (c.energy_rate.to_string(), rate.to_string()),
                Some(mr) => {
                    let old: Vec<i64> = c.modes.iter().map(|m| m.energy_rate).collect();
                    (format!("{}; modes {:?}", c.energy_rate, old), format!("{rate}; modes {mr:?}"))
                }
            }
        }
        Mutation::ModeEnergyRate { component, mode, rate } => {
            (comp(component).modes[*mode].energy_rate.to_string(), rate.to_string())
        }
        Mutation::Period { component, period } => {
            (comp(component).trigger.period().unwrap_or_default().to_string(), period.to_string())
        }
        Mutation::ExecTime { component, exec, mode_execs } => {
            let c = comp(component);
            match mode_execs {
                None => (exec_str(&c.exec), exec_str(exec)),
                Some(me) => {
                    let old: Vec<String> = c.modes.iter().map(|m| exec_str(&m.exec)).collect();
                    let new: Vec<String> = me.iter().map(exec_str).collect();
                    (
                        format!("{}; modes [{}]", exec_str(&c.exec), old.join(", ")),
                        format!("{}; modes [{}]", exec_str(exec), new.join(", ")),
                    )
                }
            }
        }
        Mutation::RemoveComponent { component } => (component_str(comp(component)), "removed".into()),
        Mutation::InsertComponent { template, attach } => {
            let mut s = component_str(template);
            if let Some(c) = attach {
                s.push_str(&format!(" connect {} -> {}", c.source, c.sink));
            }
            ("absent".into(), s)
        }
        Mutation::Trigger { component, trigger } => (trigger_str(&comp(component).trigger), trigger_str(trigger)),
    }
}

/// Build a mutant with the given ordinal from a provenance record.
pub(super) fn build(original: &ArchitectureModel, mutation: Mutation, ordinal: usize) -> Result<Mutant, MutationError> {
    let model = mutation.apply(original)?;
    let (original_value, mutated_value) = render(original, &mutation);
    Ok(Mutant {
        id: mutant_id(mutation.kind(), mutation.component(), ordinal),
        kind: mutation.kind(),
        target: mutation.target(),
        original_value,
        mutated_value,
        provenance: mutation,
        model,
    })
}

/// Replace a component's energy rate. Mode rates are left untouched.
pub fn apply_ero(model: &ArchitectureModel, component: &str, new_rate: i64) -> Result<Mutant, MutationError> {
    build(model, Mutation::EnergyRate { component: component.into(), rate: new_rate, mode_rates: None }, 0)
}

/// Replace the energy rate of one mode of a component.
pub fn apply_ero_mode(
    model: &ArchitectureModel,
    component: &str,
    mode: usize,
    new_rate: i64,
) -> Result<Mutant, MutationError> {
    build(model, Mutation::ModeEnergyRate { component: component.into(), mode, rate: new_rate }, 0)
}

pub fn apply_pro(model: &ArchitectureModel, component: &str, new_period: i64) -> Result<Mutant, MutationError> {
    build(model, Mutation::Period { component: component.into(), period: new_period }, 0)
}

/// Replace a component's default execution-time interval. Mode intervals are
/// left untouched.
pub fn apply_eto(model: &ArchitectureModel, component: &str, new_exec: ExecTime) -> Result<Mutant, MutationError> {
    build(model, Mutation::ExecTime { component: component.into(), exec: new_exec, mode_execs: None }, 0)
}

/// Remove a component and every connection touching it. Data-driven
/// components downstream keep their now undriven trigger port and never
/// activate.
pub fn apply_cro(model: &ArchitectureModel, component: &str) -> Result<Mutant, MutationError> {
    build(model, Mutation::RemoveComponent { component: component.into() }, 0)
}

pub fn apply_cio(
    model: &ArchitectureModel,
    template: Component,
    attach: Option<Connection>,
) -> Result<Mutant, MutationError> {
    build(model, Mutation::InsertComponent { template, attach }, 0)
}

/// The flipped trigger for `component`: periodic becomes data-driven on the
/// first input port; data-driven becomes periodic with the median period of
/// the other periodic components (or [`DEFAULT_PERIOD`]).
pub(super) fn flipped_trigger(model: &ArchitectureModel, component: &Component) -> Result<Trigger, MutationError> {
    match &component.trigger {
        Trigger::Periodic { .. } => component
            .in_ports
            .first()
            .map(|p| Trigger::DataDriven { port: p.name.clone() })
            .ok_or(MutationError::NoInPort),
        Trigger::DataDriven { .. } => {
            Ok(Trigger::Periodic { period: median(&periods(model, Some(&component.name))).unwrap_or(DEFAULT_PERIOD) })
        }
    }
}

pub fn apply_tro(model: &ArchitectureModel, component: &str) -> Result<Mutant, MutationError> {
    let c = find(model, component)?;
    let trigger = flipped_trigger(model, c)?;
    build(model, Mutation::Trigger { component: component.into(), trigger }, 0)
}

/// Default insertion payload: periodic at the median period, fixed execution
/// time 1 (or the override), energy rate at the median of the existing rates.
pub fn default_cio_template(model: &ArchitectureModel, overrides: &super::CioTemplate) -> Component {
    let name = overrides.name.clone().unwrap_or_else(|| {
        (0..).map(|i| format!("cio{i}")).find(|n| model.component(n).is_none()).expect("unbounded name supply")
    });
    let period = overrides.period.unwrap_or_else(|| median(&periods(model, None)).unwrap_or(DEFAULT_PERIOD));
    let rates: Vec<i64> = model.components.iter().map(|c| c.energy_rate).collect();
    let rate = overrides.rate.unwrap_or_else(|| median(&rates).unwrap_or(1));
    let exec = overrides.exec.unwrap_or(1);
    Component::periodic(name, period, ExecTime::fixed(exec), rate)
}

/// True when re-applying `mutant`'s provenance to `original` reproduces the
/// mutant's canonical serialization.
pub(super) fn reproduces(original: &ArchitectureModel, mutant: &Mutant) -> bool {
    mutant.provenance.apply(original).is_ok_and(|m| serialize_model(&m) == serialize_model(&mutant.model))
}
