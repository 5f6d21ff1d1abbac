//! Continuation-criterion diagnostics along a trajectory: Besov norms of
//! (u, b) and (ω, J), their running time integrals, Gronwall envelopes and
//! the logarithmic Sobolev bound.

mod criterion;
mod envelope;
mod export;
mod record;

pub use criterion::{CriterionKind, CriterionSpec};
pub use envelope::{envelope_4_18, envelope_case1, envelope_case2, minimal_constants, MinimalConstants};
pub use export::{export, parse_csv, parse_jsonl, write_csv, write_jsonl, ExportFormat, COLUMNS};
pub use record::{
    accumulate, gradient_sup, log_sobolev_check, sample, LogSobolev, Monitor, MonitorConfig, MonitorRecord,
    RecordExtras,
};
