//! Monte Carlo checks of the finite-sample moment results and of the
//! convergence of R/m.

use fdrlab::montecarlo::{convergence_sweep, identity_a1_check, prop23_check, thm21_bound_check, Procedure, SimConfig};
use fdrlab::{AlternativeModel, MixtureSpec};

fn main() -> fdrlab::Result<()> {
    let null_only = MixtureSpec::independent(1.0, AlternativeModel::power(0.5)?, 20)?;
    for k in 1..=3 {
        let c = thm21_bound_check(&SimConfig::new(null_only.clone(), Procedure::Bh { q: 0.3 }, 50_000, 1), k)?;
        println!("E[pi1^{k}]: lhs={:.5} rhs={:.5} slack={:+.5} ± {:.5}", c.lhs, c.rhs, c.slack, c.se);
    }

    let a1 = identity_a1_check(0.5, AlternativeModel::degenerate(0.01)?, 100, 0.2, 50_000, 2)?;
    println!("E[S]/(1+E[R^(1)]) = {:.5} ± {:.5}, target {:.3}", a1.ratio, a1.se, a1.target);

    let mix = MixtureSpec::independent(0.5, AlternativeModel::power(0.1)?, 2000)?;
    let p23 = prop23_check(&SimConfig::new(mix, Procedure::Bh { q: 0.2 }, 400, 3), 2, 1)?;
    println!("E[pi3] = {:.5} <= {:.5}", p23.lhs, p23.rhs);

    let g = AlternativeModel::degenerate(0.1)?;
    let sweep = convergence_sweep(&g, 0.5, 0.5, &[100, 1_000, 10_000, 100_000], 100, 4)?;
    println!("rho = {:.4}", sweep.summary.rho);
    for (row, err) in sweep.rows.iter().zip(sweep.errors()) {
        println!("m={:<7} E[R/m]={:.5} E[(R/m)^2]={:.5} |error|={err:.5}", row.m, row.r_over_m.mean, row.r_over_m_sq.mean);
    }
    Ok(())
}
