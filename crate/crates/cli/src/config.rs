//! Experiment configuration: `key = value` lines grouped under `[section]` headers.

use std::fmt;

use ksblow::philambda::{PhiRunConfig, Source};
use ksblow::rate::PicardConfig;
use ksblow::ratefn::TimeWindow;
use ksblow::sim::SimConfig;
use serde::Serialize;
use toml::{Table, Value};

/// One rejected entry of a config file.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub key: String,
    pub value: String,
    pub constraint: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} = {}: {}", self.key, self.value, self.constraint)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Sim,
    Rate,
    MassPhi,
    SpecialfnCheck,
    Selftest,
}

/// Window parameters as read; validated into a [`TimeWindow`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WindowParams {
    #[serde(rename = "T")]
    pub t_final: f64,
    #[serde(rename = "epsT")]
    pub eps_t: f64,
    pub delta: f64,
}

impl Default for WindowParams {
    fn default() -> Self {
        Self { t_final: 1e-4, eps_t: 1e-1, delta: 0.1 }
    }
}

impl WindowParams {
    pub fn window(&self) -> ksblow::Result<TimeWindow> {
        TimeWindow::new(self.t_final, self.eps_t, self.delta)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateParams {
    #[serde(flatten)]
    pub picard: PicardConfig,
    pub profile_points: usize,
}

impl Default for RateParams {
    fn default() -> Self {
        Self { picard: PicardConfig::default(), profile_points: 41 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MassPhiParams {
    /// Checkpoints as gaps T − t, in decreasing order.
    pub gaps: Vec<f64>,
    #[serde(flatten)]
    pub run: PhiRunConfig,
}

impl Default for MassPhiParams {
    fn default() -> Self {
        Self { gaps: vec![1e-5, 3e-6, 1e-6], run: PhiRunConfig::default() }
    }
}

/// Fully resolved experiment settings.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub command: Command,
    pub seed: u64,
    pub sim: SimConfig,
    pub window: WindowParams,
    pub rate: RateParams,
    pub mass_phi: MassPhiParams,
}

impl ExperimentConfig {
    pub fn defaults(command: Command) -> Self {
        Self {
            command,
            seed: 0,
            sim: SimConfig { muscl: true, ..SimConfig::default() },
            window: WindowParams::default(),
            rate: RateParams::default(),
            mass_phi: MassPhiParams::default(),
        }
    }
}

struct Reader<'a> {
    section: &'a str,
    table: &'a Table,
    out: &'a mut Vec<Violation>,
}

impl Reader<'_> {
    fn key(&self, k: &str) -> String {
        if self.section.is_empty() {
            k.to_string()
        } else {
            format!("{}.{}", self.section, k)
        }
    }

    fn bad(&mut self, k: &str, v: &Value, constraint: &str) {
        let key = self.key(k);
        self.out.push(Violation { key, value: v.to_string(), constraint: constraint.into() });
    }

    fn f64(&mut self, k: &str, dst: &mut f64) {
        match self.table.get(k) {
            None => {}
            Some(Value::Float(x)) => *dst = *x,
            Some(Value::Integer(i)) => *dst = *i as f64,
            Some(v) => self.bad(k, v, "expected a number"),
        }
    }

    fn usize(&mut self, k: &str, dst: &mut usize) {
        match self.table.get(k) {
            None => {}
            Some(Value::Integer(i)) if *i >= 0 => *dst = *i as usize,
            Some(v) => self.bad(k, v, "expected a non-negative integer"),
        }
    }

    fn bool(&mut self, k: &str, dst: &mut bool) {
        match self.table.get(k) {
            None => {}
            Some(Value::Boolean(b)) => *dst = *b,
            Some(v) => self.bad(k, v, "expected true or false"),
        }
    }

    fn f64_list(&mut self, k: &str, dst: &mut Vec<f64>) {
        match self.table.get(k) {
            None => {}
            Some(Value::Array(a)) => {
                let v: Option<Vec<f64>> = a
                    .iter()
                    .map(|x| match x {
                        Value::Float(f) => Some(*f),
                        Value::Integer(i) => Some(*i as f64),
                        _ => None,
                    })
                    .collect();
                match v {
                    Some(v) => *dst = v,
                    None => self.bad(k, &Value::Array(a.clone()), "expected an array of numbers"),
                }
            }
            Some(v) => self.bad(k, v, "expected an array of numbers"),
        }
    }

    fn unknown(&mut self, known: &[&str]) {
        let extra: Vec<(String, Value)> =
            self.table.iter().filter(|(k, _)| !known.contains(&k.as_str())).map(|(k, v)| (k.clone(), v.clone())).collect();
        for (k, v) in extra {
            self.bad(&k, &v, "unknown key");
        }
    }
}

fn core_violation(section: &str, e: ksblow::Error) -> Violation {
    match e {
        ksblow::Error::Domain { name, value, constraint } => {
            Violation { key: format!("{section}.{name}"), value: value.to_string(), constraint: constraint.to_string() }
        }
        other => Violation { key: section.to_string(), value: String::new(), constraint: other.to_string() },
    }
}

const SIM_KEYS: &[&str] = &[
    "m_multiplier",
    "lambda0",
    "radius",
    "cells",
    "core",
    "cfl",
    "peak_dt",
    "dt_max",
    "min_dt",
    "max_t",
    "peak_growth",
    "min_cells_per_lambda",
    "sample_ratio",
    "sample_dt",
    "muscl",
    "chemotaxis",
];

/// Parses and validates a config for `command`; returns every violation found.
pub fn parse_config(text: &str, command: Command) -> Result<ExperimentConfig, Vec<Violation>> {
    let root: Table = text.parse().map_err(|e: toml::de::Error| {
        vec![Violation { key: "<file>".into(), value: String::new(), constraint: format!("syntax: {}", e.message()) }]
    })?;
    let mut cfg = ExperimentConfig::defaults(command);
    let mut out = Vec::new();
    let empty = Table::new();
    let mut top = Table::new();
    let mut sections: Vec<(&str, &Table)> = Vec::new();
    for (k, v) in &root {
        match v {
            Value::Table(t) => sections.push((k.as_str(), t)),
            _ => {
                top.insert(k.clone(), v.clone());
            }
        }
    }
    {
        let mut r = Reader { section: "", table: &top, out: &mut out };
        match top.get("seed") {
            None => {}
            Some(Value::Integer(i)) if *i >= 0 => cfg.seed = *i as u64,
            Some(v) => r.bad("seed", v, "expected a non-negative integer"),
        }
        r.unknown(&["seed"]);
    }
    for (name, _) in &sections {
        if !["sim", "window", "rate", "mass_phi"].contains(name) {
            out.push(Violation { key: format!("[{name}]"), value: String::new(), constraint: "unknown section".into() });
        }
    }
    let find = |n: &str| sections.iter().find(|(k, _)| *k == n).map(|(_, t)| *t).unwrap_or(&empty);

    let mut r = Reader { section: "sim", table: find("sim"), out: &mut out };
    let s = &mut cfg.sim;
    r.f64("m_multiplier", &mut s.mass_multiplier);
    r.f64("lambda0", &mut s.lambda0);
    r.f64("radius", &mut s.radius);
    r.usize("cells", &mut s.cells);
    r.f64("core", &mut s.core);
    r.f64("cfl", &mut s.cfl);
    r.f64("peak_dt", &mut s.peak_dt);
    r.f64("dt_max", &mut s.dt_max);
    r.f64("min_dt", &mut s.min_dt);
    r.f64("max_t", &mut s.max_t);
    r.f64("peak_growth", &mut s.peak_growth);
    r.f64("min_cells_per_lambda", &mut s.min_cells_per_lambda);
    r.f64("sample_ratio", &mut s.sample_ratio);
    r.f64("sample_dt", &mut s.sample_dt);
    r.bool("muscl", &mut s.muscl);
    r.bool("chemotaxis", &mut s.chemotaxis);
    r.unknown(SIM_KEYS);

    let mut r = Reader { section: "window", table: find("window"), out: &mut out };
    r.f64("T", &mut cfg.window.t_final);
    r.f64("epsT", &mut cfg.window.eps_t);
    r.f64("delta", &mut cfg.window.delta);
    r.unknown(&["T", "epsT", "delta"]);

    let mut r = Reader { section: "rate", table: find("rate"), out: &mut out };
    r.f64("sigma", &mut cfg.rate.picard.sigma);
    r.usize("max_iters", &mut cfg.rate.picard.max_iters);
    r.f64("tol", &mut cfg.rate.picard.tol);
    r.usize("nodes", &mut cfg.rate.picard.nodes);
    r.usize("profile_points", &mut cfg.rate.profile_points);
    r.unknown(&["sigma", "max_iters", "tol", "nodes", "profile_points"]);

    let mut r = Reader { section: "mass_phi", table: find("mass_phi"), out: &mut out };
    r.f64_list("gaps", &mut cfg.mass_phi.gaps);
    r.f64("dt_fraction", &mut cfg.mass_phi.run.dt_fraction);
    r.usize("nodes", &mut cfg.mass_phi.run.nodes);
    r.f64("outer", &mut cfg.mass_phi.run.outer);
    match r.table.get("source") {
        None => {}
        Some(Value::String(s)) if s == "phi1" => cfg.mass_phi.run.source = Source::Phi1,
        Some(Value::String(s)) if s == "full" => cfg.mass_phi.run.source = Source::Full,
        Some(v) => r.bad("source", v, "expected \"phi1\" or \"full\""),
    }
    r.unknown(&["gaps", "dt_fraction", "nodes", "outer", "source"]);

    // physical constraints
    out.extend(cfg.sim.violations().into_iter().map(|e| core_violation("sim", e)));
    let w = cfg.window;
    out.extend(TimeWindow::violations(w.t_final, w.eps_t, w.delta).into_iter().map(|e| core_violation("window", e)));
    out.extend(cfg.rate.picard.violations().into_iter().map(|e| core_violation("rate", e)));
    if cfg.rate.profile_points < 2 {
        out.push(Violation { key: "rate.profile_points".into(), value: cfg.rate.profile_points.to_string(), constraint: ">= 2".into() });
    }
    let mp = &cfg.mass_phi;
    let push = |out: &mut Vec<Violation>, key: &str, value: String, c: &str| {
        out.push(Violation { key: format!("mass_phi.{key}"), value, constraint: c.into() })
    };
    if mp.gaps.is_empty() || mp.gaps.iter().any(|&g| !(g > 0.0 && g < w.t_final)) {
        push(&mut out, "gaps", format!("{:?}", mp.gaps), "nonempty, each in (0, T)");
    }
    if mp.gaps.windows(2).any(|p| p[1] >= p[0]) {
        push(&mut out, "gaps", format!("{:?}", mp.gaps), "strictly decreasing");
    }
    if !(mp.run.dt_fraction > 0.0 && mp.run.dt_fraction <= 0.2) {
        push(&mut out, "dt_fraction", mp.run.dt_fraction.to_string(), "in (0, 0.2]");
    }
    if mp.run.nodes < 64 {
        push(&mut out, "nodes", mp.run.nodes.to_string(), ">= 64");
    }
    if mp.run.outer.is_nan() || mp.run.outer < 4.0 {
        push(&mut out, "outer", mp.run.outer.to_string(), ">= 4");
    }
    if out.is_empty() {
        Ok(cfg)
    } else {
        Err(out)
    }
}
