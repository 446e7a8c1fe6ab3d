//! The dataset x featurizer x classifier grid and its reports.
//!
//! For each cell and repeat `r`, the corpus is split with seed
//! `base_seed + r`, the featurized support set trains the model (seeded by
//! `derive_seed([base_seed, cell index, r])` unless the model config sets one), and
//! the query set is scored. Cells run on a worker pool; every seed depends
//! only on the config, so results do not depend on the number of workers.

mod config;
mod report;
mod run;

pub use config::{DatasetSpec, GridConfig};
pub use report::{
    bars, dataset_cells, emit_barchart, emit_heatmap, emit_table, format_4dp, heat, heat_color, render_barchart,
    render_heatmap, render_table, table_rows, write_reports, TableFormat, TableRow, ARTIFACTS, HEAT_HIGH, HEAT_LOW,
    TABLE_HEADER,
};
pub use run::{
    file_provenance, run_grid, CellResult, CellSummary, FileProvenance, GridResult, MetricSummary, RunMetadata,
    GRID_SCHEMA_VERSION,
};
