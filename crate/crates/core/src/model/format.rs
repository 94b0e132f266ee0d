use std::fmt::Write;

use super::{ArchitectureModel, Component, ExecTime, Trigger};

fn exec(e: &ExecTime) -> String {
    format!("[{}, {}]", e.bcet, e.wcet)
}

fn component(out: &mut String, c: &Component) {
    let _ = writeln!(out, "component {} {{", c.name);
    match &c.trigger {
        Trigger::Periodic { period } => {
            let _ = writeln!(out, "  trigger periodic {period}");
        }
        Trigger::DataDriven { port } => {
            let _ = writeln!(out, "  trigger data {port}");
        }
    }
    let _ = writeln!(out, "  exec {}", exec(&c.exec));
    let _ = writeln!(out, "  energy {}", c.energy_rate);
    for p in &c.in_ports {
        match &p.param {
            Some(param) => {
                let _ = writeln!(out, "  in {} = param {param}", p.name);
            }
            None => {
                let _ = writeln!(out, "  in {}", p.name);
            }
        }
    }
    for p in &c.out_ports {
        let _ = writeln!(out, "  out {p}");
    }
    for m in &c.modes {
        let _ = writeln!(
            out,
            "  mode when {} in [{}, {}] : exec {} energy {}",
            m.var,
            m.guard.lo,
            m.guard.hi,
            exec(&m.exec),
            m.energy_rate
        );
    }
    out.push_str("}\n");
}

/// Canonical text form: header, parameters, components and connections in
/// declaration order, one blank line between sections and components.
pub fn serialize_model(model: &ArchitectureModel) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "system {} timeunit {}", model.name, model.time_unit);
    if !model.parameters.is_empty() {
        out.push('\n');
        for p in &model.parameters {
            let _ = writeln!(out, "param {} in [{}, {}]", p.name, p.lo, p.hi);
        }
    }
    for c in &model.components {
        out.push('\n');
        component(&mut out, c);
    }
    if !model.connections.is_empty() {
        out.push('\n');
        for c in &model.connections {
            let _ = writeln!(out, "connect {} -> {}", c.source, c.sink);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{parse_unchecked, Component, InPort, Interval, Mode, Parameter};
    use proptest::prelude::*;

    #[test]
    fn ports_in_insertion_order_and_no_empty_mode_lines() {
        let mut m = ArchitectureModel::new("S");
        let mut c = Component::periodic("A", 10, ExecTime::fixed(2), 1);
        c.out_ports = vec!["z".into(), "a".into()];
        c.in_ports = vec![InPort::new("y"), InPort::new("b")];
        m.components.push(c);
        let text = serialize_model(&m);
        let z = text.find("out z").unwrap();
        let a = text.find("out a").unwrap();
        assert!(z < a);
        assert!(text.find("in y").unwrap() < text.find("in b").unwrap());
        assert!(!text.contains("mode"));
    }

    fn ident() -> impl Strategy<Value = String> {
        "[a-z][a-z0-9_]{0,5}"
    }

    fn exec_s() -> impl Strategy<Value = ExecTime> {
        (-5i64..50, -5i64..50).prop_map(|(b, w)| ExecTime::new(b, w))
    }

    prop_compose! {
        fn component_s()(name in ident(),
                         periodic in any::<bool>(),
                         period in -3i64..100,
                         tport in ident(),
                         exec in exec_s(),
                         rate in -3i64..20,
                         ins in proptest::collection::vec((ident(), proptest::option::of(ident())), 0..3),
                         outs in proptest::collection::vec(ident(), 0..3),
                         modes in proptest::collection::vec((ident(), -10i64..10, -10i64..10, exec_s(), 0i64..9), 0..3))
                         -> Component {
            Component {
                name,
                trigger: if periodic { Trigger::Periodic { period } } else { Trigger::DataDriven { port: tport } },
                exec,
                energy_rate: rate,
                in_ports: ins.into_iter().map(|(n, p)| InPort { name: n, param: p }).collect(),
                out_ports: outs,
                modes: modes.into_iter().map(|(v, lo, hi, e, r)| Mode { var: v, guard: Interval::new(lo, hi), exec: e, energy_rate: r }).collect(),
            }
        }
    }

    prop_compose! {
        fn model_s()(name in ident(),
                     unit in ident(),
                     params in proptest::collection::vec((ident(), -20i64..20, -20i64..20), 0..3),
                     comps in proptest::collection::vec(component_s(), 0..4),
                     conns in proptest::collection::vec((ident(), ident(), ident(), ident()), 0..3)) -> ArchitectureModel {
            ArchitectureModel {
                name,
                time_unit: unit,
                parameters: params.into_iter().map(|(n, lo, hi)| Parameter::new(n, lo, hi)).collect(),
                components: comps,
                connections: conns.into_iter().map(|(a, b, c, d)| crate::model::Connection::new(crate::model::PortRef::new(a, b), crate::model::PortRef::new(c, d))).collect(),
            }
        }
    }

    proptest! {
        // Keywords are positional, so identifiers that spell keywords still round-trip.
        #[test]
        fn serialize_then_parse_is_identity(m in model_s()) {
            let text = serialize_model(&m);
            let (back, _) = parse_unchecked(&text).map_err(|d| TestCaseError::fail(format!("{d:?}\n{text}")))?;
            prop_assert_eq!(&back, &m);
            prop_assert_eq!(serialize_model(&back), text);
        }
    }
}
