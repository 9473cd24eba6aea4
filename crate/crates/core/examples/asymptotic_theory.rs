//! Limiting rejection fractions for the built-in alternative families.

use fdrlab::theory::{borderline_limits, borderline_x0, psi, rho, rho_concave, rho_power_mixture};
use fdrlab::AlternativeModel;

fn main() -> fdrlab::Result<()> {
    let (q, gamma) = (0.2, 0.5);
    let models = [
        "degenerate:x0=0.05",
        "degenerate:x0=0.9",
        "power:alpha=0.1",
        "powermix:p=0.5,alpha=0.5,beta=2",
        "truncpower:alpha=0.1,x0=0.6",
        "tabulated:values=0;0.5;0.7;0.85;1",
    ];
    println!("q={q}, gamma={gamma}");
    for spec in models {
        let g: AlternativeModel = spec.parse()?;
        let s = rho(&g, q, gamma)?;
        let power = s.power_limit().map_or("undetermined".to_string(), |p| format!("{p:.4}"));
        println!("{spec:<36} psi(0.5)={:>8.3} rho={:.6} power={power}", psi(&g, q, 0.5)?, s.rho);
    }

    let g = AlternativeModel::power(0.1)?;
    let c = rho_concave(&g, q, gamma)?;
    println!("concave root: beta={:.3} t*={:.6} rho={:.6}", c.beta, c.t_star, c.rho);
    let pm = rho_power_mixture(0.5, 0.5, 2.0, q, gamma)?;
    println!("power mixture root: t={:.7} rho={:.6} residual={:.1e}", pm.t, pm.rho, pm.residual);

    let (q, gamma) = (0.5, 0.5);
    let edge = AlternativeModel::degenerate(borderline_x0(q, gamma))?;
    let s = rho(&edge, q, gamma)?;
    let b = borderline_limits(q, gamma);
    println!(
        "knife edge x0={:.4}: rho in [{:.4}, {:.4}], unique={}, mean R/m limit {:.4}",
        borderline_x0(q, gamma), s.rho_lower, s.rho_upper, s.unique, b.r_over_m
    );
    Ok(())
}
