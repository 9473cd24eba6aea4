//! The rejection count read off the scaled empirical process, next to the
//! direct step-up count.

use fdrlab::distributions::{sample_mixture, AlternativeModel, MixtureSpec};
use fdrlab::gof::{bh_via_gof, psi_grid, renyi_sup, EmpiricalCdf};
use fdrlab::procedures::bh_count;

fn main() -> fdrlab::Result<()> {
    let spec = MixtureSpec::independent(0.7, AlternativeModel::power(0.2)?, 40)?;
    let batch = sample_mixture(&spec, 5);
    let q = 0.2;
    let bar = (1.0 - q) / q;

    println!("bar (1-q)/q = {bar:.3}");
    for r in [1, 5, 10, 20, 40] {
        println!("psi_grid(r={r:>2}) = {:>8.4}", psi_grid(&batch, q, r)?);
    }
    for lower in [0.001, 0.01, 0.1, q] {
        println!("renyi sup on [{lower}, {q}] = {:.4}", renyi_sup(&batch, q, lower)?);
    }
    let ecdf = EmpiricalCdf::new(&batch);
    println!("H_m(q) = {:.3}, scaled excess at q = {:.3}", ecdf.eval(q), ecdf.scaled_excess(q));
    println!("step-up R = {}, read off the process = {}", bh_count(&batch, q)?.r, bh_via_gof(&batch, q)?);
    Ok(())
}
