//! Input parsing and output formatting behind the `rankr` command.

pub mod input;
pub mod report;

pub use input::{load_system, parse_complex, parse_complex_list, PolyFile, SystemSource};
pub use report::{
    deflation_json, deflation_table, sci, trace_csv, trace_json, trace_table, DeflationJson,
    LevelJson, StepJson, TraceJson,
};
