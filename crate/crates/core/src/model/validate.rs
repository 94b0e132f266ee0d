use std::collections::{BTreeSet, HashSet};

use super::diag::{DiagCode, Diagnostic, Element};
use super::{ArchitectureModel, Component, ExecTime, Trigger};

/// Check every model invariant. Returns one diagnostic per violation, in a
/// deterministic order (model, parameters, components, connections, cycles).
/// An empty list means the model is well formed.
pub fn validate(model: &ArchitectureModel) -> Vec<Diagnostic> {
    let mut out = Vec::new();

    if model.components.is_empty() {
        out.push(Diagnostic::new(DiagCode::NoComponents, Element::Model, "a model needs at least one component"));
    }

    let mut seen = HashSet::new();
    for p in &model.parameters {
        let el = Element::Param(p.name.clone());
        if !seen.insert(p.name.as_str()) {
            out.push(Diagnostic::new(DiagCode::DuplicateParam, el.clone(), "parameter declared twice"));
        }
        if p.lo > p.hi {
            out.push(Diagnostic::new(DiagCode::EmptyDomain, el, format!("domain [{}, {}] is empty", p.lo, p.hi)));
        }
    }

    let mut seen = HashSet::new();
    for c in &model.components {
        if !seen.insert(c.name.as_str()) {
            out.push(Diagnostic::new(
                DiagCode::DuplicateName,
                Element::Component(c.name.clone()),
                "component name declared twice",
            ));
        }
    }

    for c in &model.components {
        check_component(model, c, &mut out);
    }

    check_connections(model, &mut out);

    if has_cycle(model) {
        out.push(Diagnostic::new(DiagCode::CyclicDataflow, Element::Model, "data-flow graph contains a cycle"));
    }
    out
}

fn check_exec(exec: &ExecTime, el: &Element, out: &mut Vec<Diagnostic>) -> bool {
    if exec.bcet < 0 || exec.wcet < 0 {
        out.push(Diagnostic::new(DiagCode::NegativeExec, el.clone(), "execution time bounds must be non-negative"));
        false
    } else if exec.bcet > exec.wcet {
        out.push(Diagnostic::new(
            DiagCode::BcetGtWcet,
            el.clone(),
            format!("bcet {} exceeds wcet {}", exec.bcet, exec.wcet),
        ));
        false
    } else {
        true
    }
}

fn check_component(model: &ArchitectureModel, c: &Component, out: &mut Vec<Diagnostic>) {
    let el = Element::Component(c.name.clone());

    let mut ports = HashSet::new();
    for name in c.in_ports.iter().map(|p| &p.name).chain(c.out_ports.iter()) {
        if !ports.insert(name.as_str()) {
            out.push(Diagnostic::new(
                DiagCode::DuplicatePort,
                Element::Port { component: c.name.clone(), port: name.clone() },
                "port name declared twice",
            ));
        }
    }

    let period = match &c.trigger {
        Trigger::Periodic { period } if *period <= 0 => {
            out.push(Diagnostic::new(
                DiagCode::NonpositivePeriod,
                el.clone(),
                format!("period {period} must be positive"),
            ));
            None
        }
        Trigger::Periodic { period } => Some(*period),
        Trigger::DataDriven { .. } => None,
    };

    if check_exec(&c.exec, &el, out) {
        if let Some(p) = period.filter(|p| c.exec.wcet > *p) {
            out.push(Diagnostic::new(
                DiagCode::WcetGtPeriod,
                el.clone(),
                format!("wcet {} exceeds period {p}", c.exec.wcet),
            ));
        }
    }

    if c.energy_rate < 0 {
        out.push(Diagnostic::new(
            DiagCode::NegativeRate,
            el.clone(),
            format!("energy rate {} is negative", c.energy_rate),
        ));
    }

    if let Trigger::DataDriven { port } = &c.trigger {
        match c.in_port(port) {
            None => out.push(Diagnostic::new(
                DiagCode::TriggerPortUnknown,
                el.clone(),
                format!("trigger port `{port}` is not an input port"),
            )),
            Some(p) if p.param.is_none() && model.source_of(&c.name, port).is_none() => {
                out.push(Diagnostic::new(
                    DiagCode::StarvedTrigger,
                    el.clone(),
                    format!("trigger port `{port}` has no driver; the component never activates"),
                ));
            }
            Some(_) => {}
        }
    }

    for p in &c.in_ports {
        if let Some(param) = &p.param {
            if model.parameter(param).is_none() {
                out.push(Diagnostic::new(
                    DiagCode::UnknownParam,
                    Element::Port { component: c.name.clone(), port: p.name.clone() },
                    format!("bound to undeclared parameter `{param}`"),
                ));
            }
        }
    }

    let mut mixed_reported = false;
    for (i, m) in c.modes.iter().enumerate() {
        let mel = Element::Mode { component: c.name.clone(), index: i };
        if c.in_port(&m.var).is_none() && model.parameter(&m.var).is_none() {
            out.push(Diagnostic::new(
                DiagCode::UnknownGuardVar,
                mel.clone(),
                format!("`{}` is neither an input port nor a parameter", m.var),
            ));
        }
        if !mixed_reported && m.var != c.modes[0].var {
            mixed_reported = true;
            out.push(Diagnostic::new(
                DiagCode::MixedGuardVars,
                mel.clone(),
                "all modes of a component must guard the same variable",
            ));
        }
        if m.guard.lo > m.guard.hi {
            out.push(Diagnostic::new(
                DiagCode::EmptyGuard,
                mel.clone(),
                format!("guard [{}, {}] is empty", m.guard.lo, m.guard.hi),
            ));
        }
        if check_exec(&m.exec, &mel, out) {
            if let Some(p) = period.filter(|p| m.exec.wcet > *p) {
                out.push(Diagnostic::new(
                    DiagCode::WcetGtPeriod,
                    mel.clone(),
                    format!("wcet {} exceeds period {p}", m.exec.wcet),
                ));
            }
        }
        if m.energy_rate < 0 {
            out.push(Diagnostic::new(
                DiagCode::NegativeRate,
                mel.clone(),
                format!("energy rate {} is negative", m.energy_rate),
            ));
        }
        for (j, earlier) in c.modes[..i].iter().enumerate() {
            if earlier.var == m.var
                && earlier.guard.lo <= earlier.guard.hi
                && m.guard.lo <= m.guard.hi
                && earlier.guard.overlaps(&m.guard)
            {
                out.push(Diagnostic::new(DiagCode::OverlappingModes, mel.clone(), format!("guard overlaps mode #{j}")));
            }
        }
    }
}

fn check_connections(model: &ArchitectureModel, out: &mut Vec<Diagnostic>) {
    let mut sinks = BTreeSet::new();
    for (i, conn) in model.connections.iter().enumerate() {
        let el = Element::Connection(i);
        let src_ok = model.component(&conn.source.component).is_some_and(|c| c.has_out_port(&conn.source.port));
        let sink_comp = model.component(&conn.sink.component);
        let sink_port = sink_comp.and_then(|c| c.in_port(&conn.sink.port));
        if !src_ok || sink_port.is_none() {
            out.push(Diagnostic::new(
                DiagCode::UnknownEndpoint,
                el,
                format!("`{} -> {}` references a missing component or port", conn.source, conn.sink),
            ));
            continue;
        }
        if conn.source.component == conn.sink.component {
            out.push(Diagnostic::new(DiagCode::SelfConnection, el, "a component may not feed itself"));
            continue;
        }
        if !sinks.insert((&conn.sink.component, &conn.sink.port)) {
            out.push(Diagnostic::new(
                DiagCode::DuplicateSink,
                el.clone(),
                format!("`{}` already has a driver", conn.sink),
            ));
        }
        if sink_port.is_some_and(|p| p.param.is_some()) {
            out.push(Diagnostic::new(
                DiagCode::PortDoublyDriven,
                el,
                format!("`{}` is bound to a parameter and also connected", conn.sink),
            ));
        }
    }
}

/// Component adjacency from connections whose endpoints both resolve.
fn edges(model: &ArchitectureModel) -> Vec<(usize, usize)> {
    model
        .connections
        .iter()
        .filter_map(|c| Some((model.component_index(&c.source.component)?, model.component_index(&c.sink.component)?)))
        .collect()
}

fn has_cycle(model: &ArchitectureModel) -> bool {
    dataflow_order(model).is_none()
}

/// Topological order of components along data flow (Kahn's algorithm, lowest
/// declaration index first), or `None` when the graph has a cycle. Self loops
/// count as cycles.
pub fn dataflow_order(model: &ArchitectureModel) -> Option<Vec<usize>> {
    let n = model.components.len();
    let mut indeg = vec![0usize; n];
    let mut succ = vec![Vec::new(); n];
    for (a, b) in edges(model) {
        succ[a].push(b);
        indeg[b] += 1;
    }
    let mut ready: BTreeSet<usize> = (0..n).filter(|&i| indeg[i] == 0).collect();
    let mut order = Vec::with_capacity(n);
    while let Some(&i) = ready.iter().next() {
        ready.remove(&i);
        order.push(i);
        for &j in &succ[i] {
            indeg[j] -= 1;
            if indeg[j] == 0 {
                ready.insert(j);
            }
        }
    }
    (order.len() == n).then_some(order)
}
