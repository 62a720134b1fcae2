use std::fmt::Write as _;

use rankr_core::deflation::DeflationResult;
use rankr_core::IterationTrace;
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct StepJson {
    pub k: usize,
    /// `[re, im]` per component.
    pub x: Vec<[f64; 2]>,
    pub residual: f64,
    pub shift: Option<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct TraceJson {
    pub steps: Vec<StepJson>,
    pub status: String,
    pub rank_used: usize,
    pub sigma_profile: Vec<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct LevelJson {
    pub rank: usize,
    pub nullity: usize,
    pub trace: TraceJson,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct DeflationJson {
    pub depth_used: usize,
    pub semiregular: bool,
    pub levels: Vec<LevelJson>,
}

pub fn trace_json(t: &IterationTrace) -> TraceJson {
    TraceJson {
        steps: t
            .steps
            .iter()
            .map(|s| StepJson {
                k: s.k,
                x: s.x.as_slice().iter().map(|z| [z.re, z.im]).collect(),
                residual: s.residual,
                shift: s.shift,
            })
            .collect(),
        status: t.termination().as_str().to_string(),
        rank_used: t.rank_used,
        sigma_profile: t.sigma_profile.clone(),
    }
}

pub fn deflation_json(d: &DeflationResult) -> DeflationJson {
    DeflationJson {
        depth_used: d.depth_used,
        semiregular: d.semiregular,
        levels: d
            .levels
            .iter()
            .map(|l| LevelJson {
                rank: l.rank,
                nullity: l.nullity,
                trace: trace_json(&l.trace),
            })
            .collect(),
    }
}

/// `%.1e` as printed by C: at least two exponent digits, always signed.
pub fn sci(v: f64) -> String {
    if !v.is_finite() {
        return format!("{v}");
    }
    let s = format!("{v:.1e}");
    let (mant, exp) = s.split_once('e').expect("exponent form");
    let (sign, digits) = match exp.strip_prefix('-') {
        Some(d) => ('-', d),
        None => ('+', exp),
    };
    format!("{mant}e{sign}{digits:0>2}")
}

pub fn trace_table(t: &IterationTrace) -> String {
    let mut out = String::new();
    for s in &t.steps {
        match s.shift {
            Some(h) => writeln!(out, "Step {:2}:  residual = {}  shift = {}", s.k, sci(s.residual), sci(h)),
            None => writeln!(out, "Step {:2}:  residual = {}", s.k, sci(s.residual)),
        }
        .unwrap();
    }
    writeln!(out, "status: {}  rank: {}", t.termination(), t.rank_used).unwrap();
    out.push_str("x =");
    for z in t.final_x().as_slice() {
        if z.im == 0.0 {
            write!(out, " {:.15}", z.re).unwrap();
        } else {
            write!(out, " {:.15}{:+.15}i", z.re, z.im).unwrap();
        }
    }
    out.push('\n');
    out
}

pub fn trace_csv(t: &IterationTrace) -> String {
    let mut out = String::from("k,residual,shift\n");
    for s in &t.steps {
        let shift = s.shift.map(|h| format!("{h:e}")).unwrap_or_default();
        writeln!(out, "{},{:e},{}", s.k, s.residual, shift).unwrap();
    }
    out
}

pub fn deflation_table(d: &DeflationResult) -> String {
    let mut out = String::new();
    for (i, l) in d.levels.iter().enumerate() {
        writeln!(
            out,
            "Level {i}:  rank = {}  nullity = {}  steps = {}  residual = {}",
            l.rank,
            l.nullity,
            l.trace.iterations(),
            sci(l.trace.final_residual())
        )
        .unwrap();
    }
    writeln!(out, "depth used: {}  semiregular: {}", d.depth_used, d.semiregular).unwrap();
    out.push_str(&trace_table(d.final_trace()));
    out
}
