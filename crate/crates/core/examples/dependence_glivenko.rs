//! Sup-distance between the empirical law of dependent uniform nulls and
//! the uniform, for growing sample sizes.

use fdrlab::montecarlo::glivenko_check;
use fdrlab::DependenceModel;

fn main() -> fdrlab::Result<()> {
    for spec in ["independent", "ar1:phi=0.5", "ar1:phi=0.9", "equicorrelated:rho=0.3"] {
        let dep: DependenceModel = spec.parse()?;
        let c = glivenko_check(dep, &[100, 1_000, 10_000, 100_000], 50, 42)?;
        let cells: Vec<String> = c.rows.iter().map(|(n, e)| format!("{n}:{:.4}", e.mean)).collect();
        let note = if c.expected_to_vanish { "" } else { "  (random limit, not expected to vanish)" };
        println!("{spec:<24} {}{note}", cells.join("  "));
    }
    Ok(())
}
