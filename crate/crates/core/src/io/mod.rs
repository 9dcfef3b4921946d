//! Files: trace and summary CSVs, run manifests, and SVG charts.

mod svg;
mod tables;

pub use svg::{
    padded_range, plot_final_regret, plot_regret_curves, render_final_regret, render_regret_curves,
};
pub use tables::{
    format_real, read_traces, traces_from_rows, write_manifest, write_summary, write_traces,
    TraceFileRow, TRACE_HEADER,
};
