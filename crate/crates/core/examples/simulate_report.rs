//! A seeded simulation from a JSON config, printed as a JSON report.

use fdrlab::montecarlo::{run, SimConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let config: SimConfig = serde_json::from_str(
        r#"{
            "mixture": {"gamma": 0.5, "alt": "power:alpha=0.1", "m": 2000},
            "procedure": {"method": "bhs", "delta": 0.1, "x": 0.5},
            "reps": 500,
            "seed": 42,
            "k_max": 2
        }"#,
    )?;
    let report = run(&config)?;
    for s in &report.statistics {
        let second = s.moment(2).map_or("-".to_string(), |e| format!("{:.5}", e.mean));
        println!("{:<13} mean={:.5} se={:.5} E[X^2]={second}", s.name, s.mean, s.se);
    }
    println!("{}", report.to_json());
    Ok(())
}
