use crate::model::{ArchitectureModel, Component, Trigger};

use super::{
    cost_var, Channel, ChannelKind, ClockBound, ClockConstraint, ClockOp, DataConstraint, Edge, EnergyVar, Location,
    Operand, Pta, PtaNetwork, Role, SharedVar, Sync, SyncDir, Update, VarInit, TOTAL,
};

/// Channel and variable tables shared by every automaton of a network.
struct Tables {
    channels: Vec<Channel>,
    vars: Vec<SharedVar>,
}

impl Tables {
    fn new(model: &ArchitectureModel) -> Self {
        let mut vars: Vec<SharedVar> = model
            .parameters
            .iter()
            .enumerate()
            .map(|(i, p)| SharedVar { name: format!("param.{}", p.name), init: VarInit::Param(i) })
            .collect();
        let mut channels = Vec::new();
        for c in &model.components {
            for p in &c.in_ports {
                let init = p
                    .param
                    .as_deref()
                    .and_then(|n| model.parameters.iter().position(|q| q.name == n))
                    .map_or(VarInit::Zero, VarInit::Param);
                vars.push(SharedVar { name: format!("{}.{}", c.name, p.name), init });
            }
            for o in &c.out_ports {
                vars.push(SharedVar { name: format!("{}.{}", c.name, o), init: VarInit::Zero });
            }
            vars.push(SharedVar { name: format!("{}.fwd", c.name), init: VarInit::Zero });
            channels.push(Channel { name: format!("go_{}", c.name), kind: ChannelKind::Dispatch });
            for o in &c.out_ports {
                channels.push(Channel { name: format!("ch_{}_{}", c.name, o), kind: ChannelKind::Data });
            }
        }
        Tables { channels, vars }
    }

    fn var(&self, name: &str) -> usize {
        self.vars.iter().position(|v| v.name == name).expect("declared variable")
    }

    fn channel(&self, name: &str) -> usize {
        self.channels.iter().position(|c| c.name == name).expect("declared channel")
    }
}

fn interface(model: &ArchitectureModel, t: &Tables, idx: usize) -> Pta {
    let c = &model.components[idx];
    let go = Sync { channel: t.channel(&format!("go_{}", c.name)), dir: SyncDir::Emit };
    let mut dispatch = Edge::new("dispatch", 1, 0);
    dispatch.sync = Some(go);
    let mut pta = Pta {
        name: format!("iface_{}", c.name),
        role: Role::Interface,
        component: Some(idx),
        clocks: Vec::new(),
        locations: vec![Location::plain("Idle"), Location::committed("Dispatch")],
        edges: Vec::new(),
        initial: 0,
    };
    match &c.trigger {
        Trigger::Periodic { period } => {
            // First release at t = 0, then every period.
            pta.clocks.push("x".into());
            pta.locations[0].invariant = Some(ClockBound { clock: 0, max: *period });
            let mut fire = Edge::new("fire", 0, 1);
            fire.clock_guard.push(ClockConstraint { clock: 0, op: ClockOp::Eq, value: *period });
            fire.resets.push(0);
            pta.edges.push(fire);
            pta.initial = 1;
        }
        Trigger::DataDriven { port } => {
            if let Some(conn) = model.source_of(&c.name, port) {
                let ch = t.channel(&format!("ch_{}_{}", conn.source.component, conn.source.port));
                let mut trigger = Edge::new("trigger", 0, 1);
                trigger.sync = Some(Sync { channel: ch, dir: SyncDir::Receive });
                pta.edges.push(trigger);
            } else if c.in_port(port).is_some_and(|p| p.param.is_some()) {
                // An environment-bound port delivers its value once, at start.
                pta.initial = 1;
            }
        }
    }
    pta.edges.push(dispatch);
    pta
}

/// Disjoint sub-intervals of `[lo, hi]` not covered by `covered`.
fn complement(covered: &[(i64, i64)], lo: i64, hi: i64) -> Vec<(i64, i64)> {
    let mut sorted = covered.to_vec();
    sorted.sort();
    let mut out = Vec::new();
    let mut next = Some(lo);
    for (a, b) in sorted {
        let Some(n) = next else { break };
        if a > n {
            out.push((n, (a - 1).min(hi)));
        }
        next = if b >= hi { None } else { Some(n.max(b + 1)) };
    }
    if let Some(n) = next {
        if n <= hi {
            out.push((n, hi));
        }
    }
    out.retain(|(a, b)| a <= b && *a <= hi);
    out
}

/// Variable index and known value domain of a mode guard variable.
fn guard_var(model: &ArchitectureModel, t: &Tables, c: &Component, var: &str) -> (usize, Option<(i64, i64)>) {
    if let Some(port) = c.in_port(var) {
        let domain = port.param.as_deref().and_then(|p| model.parameter(p)).map(|p| (p.lo, p.hi));
        (t.var(&format!("{}.{}", c.name, var)), domain)
    } else {
        let domain = model.parameter(var).map(|p| (p.lo, p.hi));
        (t.var(&format!("param.{var}")), domain)
    }
}

fn behavior(model: &ArchitectureModel, t: &Tables, idx: usize) -> Pta {
    let c = &model.components[idx];
    let fwd = t.var(&format!("{}.fwd", c.name));
    let latch = Update {
        var: fwd,
        value: c.in_ports.first().map_or(Operand::Const(0), |p| Operand::Var(t.var(&format!("{}.{}", c.name, p.name)))),
    };
    let executing = |name: String, wcet: i64, rate: i64| Location {
        name,
        invariant: Some(ClockBound { clock: 0, max: wcet }),
        cost_rate: rate,
        committed: false,
        executing: true,
    };

    let mut locations = vec![Location::plain("Idle"), Location::committed("Read")];
    let mut edges = Vec::new();
    let mut start = Edge::new("start", 0, 1);
    start.sync = Some(Sync { channel: t.channel(&format!("go_{}", c.name)), dir: SyncDir::Receive });
    start.resets.push(0);
    edges.push(start);

    // (location, bcet) for every executing location.
    let mut execs = Vec::new();
    if c.modes.is_empty() {
        locations.push(executing("Execute".into(), c.exec.wcet, c.energy_rate));
        let mut read = Edge::new("read", 1, 2);
        read.updates.push(latch);
        edges.push(read);
        execs.push((2, c.exec.bcet));
    } else {
        let (var, domain) = guard_var(model, t, c, &c.modes[0].var);
        for (k, m) in c.modes.iter().enumerate() {
            let loc = locations.len();
            locations.push(executing(format!("Execute_{k}"), m.exec.wcet, m.energy_rate));
            let mut e = Edge::new(format!("mode{k}"), 1, loc);
            e.data_guard.push(DataConstraint { var, lo: m.guard.lo, hi: m.guard.hi });
            e.updates.push(latch);
            edges.push(e);
            execs.push((loc, m.exec.bcet));
        }
        let covered: Vec<(i64, i64)> = c.modes.iter().map(|m| (m.guard.lo, m.guard.hi)).collect();
        let (lo, hi) = domain.unwrap_or((i64::MIN, i64::MAX));
        let rest = complement(&covered, lo, hi);
        if !rest.is_empty() {
            let loc = locations.len();
            locations.push(executing("Execute_default".into(), c.exec.wcet, c.energy_rate));
            for (j, (a, b)) in rest.into_iter().enumerate() {
                let mut e = Edge::new(format!("default{j}"), 1, loc);
                e.data_guard.push(DataConstraint { var, lo: a, hi: b });
                e.updates.push(latch);
                edges.push(e);
            }
            execs.push((loc, c.exec.bcet));
        }
    }

    let write0 = locations.len();
    let writes = c.out_ports.len().max(1);
    for j in 0..writes {
        locations.push(Location::committed(&format!("Write_{j}")));
    }
    for (loc, bcet) in execs {
        let mut finish = Edge::new("finish", loc, write0);
        finish.clock_guard.push(ClockConstraint { clock: 0, op: ClockOp::Ge, value: bcet });
        edges.push(finish);
    }
    if c.out_ports.is_empty() {
        edges.push(Edge::new("done", write0, 0));
    }
    for (j, o) in c.out_ports.iter().enumerate() {
        let target = if j + 1 == writes { 0 } else { write0 + j + 1 };
        let mut e = Edge::new(format!("write_{o}"), write0 + j, target);
        e.sync = Some(Sync { channel: t.channel(&format!("ch_{}_{o}", c.name)), dir: SyncDir::Emit });
        e.updates.push(Update { var: t.var(&format!("{}.{o}", c.name)), value: Operand::Var(fwd) });
        for conn in model.connections.iter().filter(|k| k.source.component == c.name && &k.source.port == o) {
            let sink = t.var(&format!("{}.{}", conn.sink.component, conn.sink.port));
            e.updates.push(Update { var: sink, value: Operand::Var(fwd) });
        }
        edges.push(e);
    }

    Pta {
        name: format!("beh_{}", c.name),
        role: Role::Behavior,
        component: Some(idx),
        clocks: vec!["y".into()],
        locations,
        edges,
        initial: 0,
    }
}

fn monitor() -> Pta {
    Pta {
        name: "monitor".into(),
        role: Role::Monitor,
        component: None,
        clocks: Vec::new(),
        locations: vec![Location::plain("Sum")],
        edges: Vec::new(),
        initial: 0,
    }
}

/// Translate a validated model. Automata are ordered interface, behavior per
/// component in declaration order, then the monitor.
pub fn to_pta(model: &ArchitectureModel) -> PtaNetwork {
    let t = Tables::new(model);
    let mut automata = Vec::with_capacity(2 * model.components.len() + 1);
    let mut energy_vars = Vec::new();
    for (i, c) in model.components.iter().enumerate() {
        automata.push(interface(model, &t, i));
        energy_vars.push(EnergyVar { name: cost_var(&c.name), owner: automata.len(), component: Some(i) });
        automata.push(behavior(model, &t, i));
    }
    energy_vars.push(EnergyVar { name: TOTAL.into(), owner: automata.len(), component: None });
    automata.push(monitor());
    PtaNetwork {
        name: model.name.clone(),
        automata,
        channels: t.channels,
        vars: t.vars,
        energy_vars,
        parameters: model.parameters.clone(),
        components: model.components.iter().map(|c| c.name.clone()).collect(),
    }
}

/// The interface automaton of `component` as it appears in [`to_pta`].
pub fn interface_automaton(model: &ArchitectureModel, component: &str) -> Option<Pta> {
    let i = model.component_index(component)?;
    Some(interface(model, &Tables::new(model), i))
}

/// The behavior automaton of `component` as it appears in [`to_pta`].
pub fn behavior_automaton(model: &ArchitectureModel, component: &str) -> Option<Pta> {
    let i = model.component_index(component)?;
    Some(behavior(model, &Tables::new(model), i))
}

pub fn monitor_automaton(_model: &ArchitectureModel) -> Pta {
    monitor()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::parse_model;

    const CHAIN: &str = "\
system Chain
param level in [0, 9]
component A {
  trigger periodic 10
  exec [4, 4]
  energy 2
  in src = param level
  out o
}
component B {
  trigger data i
  exec [2, 6]
  energy 3
  in i
  mode when i in [5, 9] : exec [1, 1] energy 7
}
connect A.o -> B.i
";

    #[test]
    fn two_components_give_five_automata() {
        let net = to_pta(&parse_model(CHAIN).unwrap());
        assert_eq!(net.automata.len(), 5);
        assert_eq!(net.monitor().name, "monitor");
        net.check().unwrap();
    }

    #[test]
    fn periodic_interface_shape() {
        let m = parse_model(CHAIN).unwrap();
        let a = interface_automaton(&m, "A").unwrap();
        assert_eq!(a.locations.len(), 2);
        assert_eq!(a.locations[a.initial].name, "Dispatch");
        let idle = &a.locations[a.location("Idle").unwrap()];
        assert_eq!(idle.invariant, Some(ClockBound { clock: 0, max: 10 }));
        let fire = a.edge("fire").unwrap();
        assert_eq!(fire.clock_guard, vec![ClockConstraint { clock: 0, op: ClockOp::Eq, value: 10 }]);
        assert_eq!(fire.resets, vec![0]);
    }

    #[test]
    fn behavior_executes_with_component_rate() {
        let m = parse_model(CHAIN).unwrap();
        let b = behavior_automaton(&m, "A").unwrap();
        let execs: Vec<_> = b.executing_locations().collect();
        assert_eq!(execs.len(), 1);
        assert_eq!(execs[0].cost_rate, 2);
        assert_eq!(execs[0].invariant.unwrap().max, 4);
        assert_eq!(b.edge("finish").unwrap().clock_guard[0].value, 4);
        assert!(b.locations.iter().filter(|l| !l.executing).all(|l| l.cost_rate == 0));
        assert!(b.edge("write_o").unwrap().sync.is_some());
    }

    #[test]
    fn modes_get_their_own_locations() {
        let m = parse_model(CHAIN).unwrap();
        let net = to_pta(&m);
        let b = net.automaton("beh_B").unwrap();
        let rates: Vec<i64> = b.executing_locations().map(|l| l.cost_rate).collect();
        assert_eq!(rates, vec![7, 3]);
        let guard = |e: &str| {
            let g = b.edge(e).unwrap().data_guard[0];
            (g.lo, g.hi)
        };
        assert_eq!(guard("mode0"), (5, 9));
        assert_eq!(guard("default0"), (i64::MIN, 4));
        assert_eq!(guard("default1"), (10, i64::MAX));
        let trig = net.automaton("iface_B").unwrap().edge("trigger").unwrap().sync.unwrap();
        assert_eq!(net.channels[trig.channel].name, "ch_A_o");
    }

    #[test]
    fn default_omitted_when_modes_cover_parameter_domain() {
        let m = parse_model(
            "system S param p in [0, 3]
             component A { trigger periodic 10 exec 2 energy 1
               mode when p in [0, 1] : exec 1 energy 2
               mode when p in [2, 3] : exec 3 energy 4 }",
        )
        .unwrap();
        let b = behavior_automaton(&m, "A").unwrap();
        assert_eq!(b.executing_locations().count(), 2);
        assert!(b.location("Execute_default").is_none());
    }

    #[test]
    fn complement_intervals() {
        assert_eq!(complement(&[(2, 3)], 0, 9), vec![(0, 1), (4, 9)]);
        assert_eq!(complement(&[(0, 4), (5, 9)], 0, 9), vec![]);
        assert_eq!(complement(&[(5, 9), (0, 1)], 0, 9), vec![(2, 4)]);
        assert_eq!(complement(&[(-5, 20)], 0, 9), vec![]);
        assert_eq!(complement(&[], 0, 9), vec![(0, 9)]);
    }

    #[test]
    fn translation_is_deterministic() {
        let m = parse_model(CHAIN).unwrap();
        assert_eq!(to_pta(&m), to_pta(&m));
        assert!(to_pta(&m).listing().contains("Execute_0"));
    }
}
