//! Generate a synthetic three-task workspace, run the full grid, and write
//! tables and charts.
//!
//! cargo run --release --example toy_grid -- [DIR]

use oneshot::experiment::{run_grid, write_reports, GridConfig};
use oneshot::synth::write_toy_workspace;

fn main() -> oneshot::Result<()> {
    let dir = std::env::args()
        .nth(1)
        .map(std::path::PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("oneshot-toy-grid"));
    let ws = write_toy_workspace(&dir, 40, 3, 7)?;
    let config = GridConfig::load(&ws.config)?;
    let t = std::time::Instant::now();
    let result = run_grid(&config)?;
    println!("{} cells in {:.1?}", result.cells.len(), t.elapsed());
    for p in write_reports(&result, &config.output_dir)? {
        println!("wrote {}", p.display());
    }
    let failed: Vec<_> = result.failed_cells().collect();
    for c in &failed {
        println!("failed: {} / {} / {}: {}", c.dataset, c.featurizer, c.model, c.error.as_deref().unwrap_or(""));
    }
    print!("{}", std::fs::read_to_string(config.output_dir.join("DCR/table.md")).unwrap_or_default());
    Ok(())
}
