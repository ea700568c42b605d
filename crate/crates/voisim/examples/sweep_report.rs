//! Prints the headline curves for both scenarios: per-scheduler mean
//! normalized VoI across the capacity sweep, per-sensor update frequencies
//! at 100 Mbps, and normalized haptic QoE across its sweep. Handy when
//! recalibrating the scenario defaults.

use voisim::experiment::{run_experiment, ExperimentConfig, Scenario};
use voisim::sched::SchedulerKind;

fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

fn main() {
    let seeds: Vec<u64> = (1..=20).collect();

    let caps = vec![20.0, 40.0, 60.0, 80.0, 100.0, 120.0];
    let cfg = ExperimentConfig::v2x(caps.clone(), seeds.clone(), 60.0);
    let t0 = std::time::Instant::now();
    let out = run_experiment(&cfg, false).expect("v2x sweep");
    println!("# v2x sweep ({} rows in {:.1?})", out.rows.len(), t0.elapsed());
    println!("{:>10} {}", "cap_mbps", "fifo      voi       cross_voi est");
    for &cap in &caps {
        let mut line = format!("{cap:>10}");
        for kind in SchedulerKind::ALL {
            let vals: Vec<f64> = out
                .rows
                .iter()
                .filter(|r| r.scheduler == kind && r.capacity_mbps == cap)
                .map(|r| r.normalized_voi.unwrap())
                .collect();
            line.push_str(&format!(" {:)<9.4}", mean(&vals)));
        }
        println!("{line}");
    }

    println!("\n# update frequencies at 100 Mbps (f, r, lft, rgt, L)");
    for kind in SchedulerKind::ALL {
        let rows: Vec<_> = out
            .rows
            .iter()
            .filter(|r| r.scheduler == kind && r.capacity_mbps == 100.0)
            .collect();
        let mut freq = [0.0f64; 5];
        for r in &rows {
            for (i, f) in r.update_freq.unwrap().iter().enumerate() {
                freq[i] += f / rows.len() as f64;
            }
        }
        println!(
            "{:>10}: {:.2} {:.2} {:.2} {:.2} | L {:.3}",
            kind.as_str(),
            freq[0],
            freq[1],
            freq[2],
            freq[3],
            freq[4]
        );
    }

    let caps = vec![0.2, 0.4, 0.47, 0.6, 0.8, 1.0, 1.2, 1.4];
    let cfg = ExperimentConfig::haptic(caps.clone(), seeds, 10.0);
    let t0 = std::time::Instant::now();
    let out = run_experiment(&cfg, false).expect("haptic sweep");
    assert_eq!(out.rows[0].scenario, Scenario::Haptic);
    println!(
        "\n# haptic sweep ({} rows in {:.1?})",
        out.rows.len(),
        t0.elapsed()
    );
    println!("{:>10} {}", "cap_mbps", "fifo      voi       cross_voi est       gap(est-fifo)");
    for &cap in &caps {
        let mut means = Vec::new();
        for kind in SchedulerKind::ALL {
            let vals: Vec<f64> = out
                .rows
                .iter()
                .filter(|r| r.scheduler == kind && r.capacity_mbps == cap)
                .map(|r| r.qoe.unwrap())
                .collect();
            means.push(mean(&vals));
        }
        println!(
            "{cap:>10} {:.4}    {:.4}    {:.4}    {:.4}    {:+.4}",
            means[0],
            means[1],
            means[2],
            means[3],
            means[3] - means[0]
        );
    }
}
