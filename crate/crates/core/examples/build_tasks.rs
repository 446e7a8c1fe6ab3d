//! Build the DC, DR, and DCR corpora from a three-way source and draw a
//! one-shot split of each.
//!
//! cargo run --example build_tasks

use oneshot::corpus::{build_tasks, one_shot_split};
use oneshot::synth::three_way_source;

fn main() -> oneshot::Result<()> {
    let source = three_way_source(10, 1);
    let (dc, dr, dcr) = build_tasks(&source)?;
    for c in [&dc, &dr, &dcr] {
        let counts: Vec<String> = c.label_counts().iter().map(|(l, n)| format!("{l}={n}")).collect();
        println!("{:<4} {:>3} documents  {}", c.name, c.len(), counts.join(" "));
        let split = one_shot_split(c, 42)?;
        let ids: Vec<&str> = split.support.iter().map(|d| d.id.as_str()).collect();
        println!("     support {:?}, {} query documents", ids, split.query.len());
    }
    Ok(())
}
