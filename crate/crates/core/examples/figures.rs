//! Writes the density, power/FDR and adaptive-bound tables as CSV.
//!
//! Usage: `cargo run --example figures -- [OUT_DIR]` (default `figures`).

use std::fs;
use std::path::PathBuf;

use fdrlab::theory::{figure_data, FigureKind};
use fdrlab::AlternativeModel;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let out = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "figures".into()));
    fs::create_dir_all(&out)?;
    let g = AlternativeModel::power(0.1)?;
    for gamma in [0.5, 0.9] {
        for kind in FigureKind::ALL {
            let table = figure_data(kind, &g, gamma, 0.1, &kind.default_grid())?;
            let path = out.join(format!("{}_gamma{gamma}.csv", kind.name()));
            fs::write(&path, table.to_csv())?;
            println!("{} ({} rows)", path.display(), table.rows.len());
        }
    }
    Ok(())
}
