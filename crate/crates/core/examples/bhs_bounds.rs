//! Asymptotic FDR and power bounds for the adaptive procedure as the
//! cutoff of the null-proportion estimator varies.

use fdrlab::theory::{bhs_bounds, kappa};
use fdrlab::AlternativeModel;

fn main() -> fdrlab::Result<()> {
    let delta = 0.1;
    for (spec, gamma) in [("power:alpha=0.1", 0.5), ("power:alpha=0.1", 0.9), ("truncpower:alpha=0.1,x0=0.6", 0.5)] {
        let g: AlternativeModel = spec.parse()?;
        println!("{spec}, gamma={gamma}, delta={delta}");
        println!("  x     kappa   q_limit  fdr_lo   power_lo power_hi");
        for x in [0.1, 0.3, 0.5, 0.7, 0.9] {
            match bhs_bounds(&g, gamma, delta, x) {
                Ok(b) => println!(
                    "  {x:.1}  {:.4}  {:.4}   {:.4}   {:.4}   {:.4}",
                    kappa(&g, x)?, b.q_limit, b.fdr_lo, b.power_lo, b.power_hi
                ),
                Err(e) => println!("  {x:.1}  {e}"),
            }
        }
    }
    Ok(())
}
