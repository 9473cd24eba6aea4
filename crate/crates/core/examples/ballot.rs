//! Probability that the step-up rule rejects nothing under the complete null.

use fdrlab::gof::no_rejection_probability;

fn main() -> fdrlab::Result<()> {
    for m in [10, 100, 1000] {
        for q in [0.05, 0.2, 0.5] {
            let est = no_rejection_probability(m, q, 4000, 42)?;
            println!("m={m:<5} q={q:<5} P(R=0) = {:.4} ± {:.4}   (1 - q = {:.2})", est.mean, est.se, 1.0 - q);
        }
    }
    Ok(())
}
