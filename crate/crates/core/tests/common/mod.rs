#![allow(dead_code)]

use std::fmt::Write;

use emut_core::model::{parse_model, ArchitectureModel};
use proptest::prelude::*;

pub const CORPUS: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/../../models");

/// Every `.eam` file of the bundled corpus, sorted by name.
pub fn corpus() -> Vec<(String, String)> {
    let mut files: Vec<(String, String)> = std::fs::read_dir(CORPUS)
        .expect("corpus directory")
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "eam"))
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read_to_string(&p).unwrap()))
        .collect();
    files.sort();
    files
}

pub fn corpus_model(name: &str) -> ArchitectureModel {
    parse_model(&std::fs::read_to_string(format!("{CORPUS}/{name}")).unwrap()).unwrap()
}

#[derive(Debug, Clone)]
pub struct ModeSpec {
    pub lo: i64,
    pub hi: i64,
    pub exec: i64,
    pub rate: i64,
}

#[derive(Debug, Clone)]
pub struct CompSpec {
    pub period: i64,
    pub bcet: i64,
    pub wcet: i64,
    pub rate: i64,
    /// Parameter bound to the `x` input; `None` means data-driven from the
    /// previous component instead.
    pub param: Option<usize>,
    pub mode: Option<ModeSpec>,
}

#[derive(Debug, Clone)]
pub struct ModelSpec {
    pub params: Vec<(i64, i64)>,
    pub comps: Vec<CompSpec>,
}

impl ModelSpec {
    pub fn space(&self) -> u64 {
        self.params.iter().map(|(lo, hi)| (hi - lo + 1) as u64).product()
    }

    pub fn render(&self) -> String {
        let mut s = String::from("system Gen\n");
        for (i, (lo, hi)) in self.params.iter().enumerate() {
            writeln!(s, "param p{i} in [{lo}, {hi}]").unwrap();
        }
        for (i, c) in self.comps.iter().enumerate() {
            writeln!(s, "component C{i} {{").unwrap();
            match c.param {
                Some(p) => {
                    writeln!(s, "  trigger periodic {}\n  in x = param p{p}", c.period).unwrap();
                }
                None => writeln!(s, "  trigger data x\n  in x").unwrap(),
            }
            writeln!(s, "  exec [{}, {}]\n  energy {}\n  out o", c.bcet, c.wcet, c.rate).unwrap();
            if let Some(m) = &c.mode {
                writeln!(s, "  mode when x in [{}, {}] : exec {} energy {}", m.lo, m.hi, m.exec, m.rate).unwrap();
            }
            s.push_str("}\n");
        }
        for (i, c) in self.comps.iter().enumerate().skip(1) {
            if c.param.is_none() {
                writeln!(s, "connect C{}.o -> C{i}.x", i - 1).unwrap();
            }
        }
        s
    }

    pub fn model(&self) -> ArchitectureModel {
        let text = self.render();
        parse_model(&text).unwrap_or_else(|e| panic!("{e}\n{text}"))
    }
}

fn comp_s(first: bool, params: Vec<(i64, i64)>) -> impl Strategy<Value = CompSpec> {
    let n = params.len();
    (5i64..=25, 0usize..n, any::<bool>(), 0i64..=6, any::<bool>())
        .prop_flat_map(move |(period, p, periodic, rate, has_mode)| {
            let (plo, phi) = params[p];
            let param = if first || periodic { Some(p) } else { None };
            (
                0..=period,
                Just(period),
                Just(param),
                Just(rate),
                plo..=phi,
                0i64..=4,
                1..=period,
                0i64..=9,
                Just(has_mode),
            )
        })
        .prop_flat_map(|(wcet, period, param, rate, lo, width, mexec, mrate, has_mode)| {
            (0..=wcet).prop_map(move |bcet| CompSpec {
                period,
                bcet,
                wcet,
                rate,
                param,
                mode: has_mode.then_some(ModeSpec { lo, hi: lo + width, exec: mexec, rate: mrate }),
            })
        })
}

/// Small models with parameter-driven modes and optional data chains;
/// parameter spaces stay at or below 13^2 valuations.
pub fn model_spec_s() -> impl Strategy<Value = ModelSpec> {
    proptest::collection::vec((-3i64..=3, 0i64..=12), 1..=2)
        .prop_map(|v| v.into_iter().map(|(lo, w)| (lo, lo + w)).collect::<Vec<_>>())
        .prop_flat_map(|params| {
            let first = comp_s(true, params.clone());
            let rest = proptest::collection::vec(comp_s(false, params.clone()), 0..=2);
            (Just(params), first, rest)
        })
        .prop_map(|(params, first, rest)| {
            let mut comps = vec![first];
            comps.extend(rest);
            ModelSpec { params, comps }
        })
}
