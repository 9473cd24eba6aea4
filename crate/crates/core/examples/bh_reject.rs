//! Step-up, strict step-up and adaptive rejection on a small labelled batch.

use fdrlab::procedures::{bh_count, bh_count_strict, bhs, gamma_hat, PValueBatch};

fn main() -> fdrlab::Result<()> {
    let values = vec![0.001, 0.008, 0.039, 0.041, 0.042, 0.06, 0.074, 0.205, 0.212, 0.216, 0.222, 0.251, 0.269, 0.275, 0.34, 0.48, 0.57, 0.66, 0.71, 0.83, 0.95];
    // The first five hypotheses are false nulls.
    let labels = (0..values.len()).map(|i| i >= 5).collect();
    let batch = PValueBatch::with_labels(values, labels)?;

    for q in [0.05, 0.1, 0.25] {
        let out = bh_count(&batch, q)?;
        let strict = bh_count_strict(&batch, q)?;
        let p = out.proportions.expect("labelled batch");
        println!(
            "q={q:<5} R={:<2} strict R={:<2} threshold={:.4} rejected={:?} FDP={:.3} power={:.3}",
            out.r, strict.r, out.threshold, out.rejected, p.pi1, p.pi2.unwrap_or(0.0)
        );
    }

    let x = 0.5;
    println!("gamma_hat({x}) = {:.4}", gamma_hat(&batch, x)?);
    let adaptive = bhs(&batch, 0.05, x)?;
    println!(
        "adaptive at delta=0.05: level {:.4}, R={}, rejected={:?}",
        adaptive.q_used, adaptive.r, adaptive.rejected
    );
    Ok(())
}
