//! Grid search over the reconstructed scenario parameters (decay constants,
//! lateral camera value, admission horizon) checking the qualitative curve
//! properties the defaults must satisfy: per-scheduler monotonicity in
//! capacity, the Est >= CrossSensorVoi >= VoiOnly >= Fifo ordering, values
//! inside [0, 1.01], and the lidar/camera frequency contrast at 100 Mbps.

use voisim::core::{CorrelationMatrix, SensorSpec, TemporalGainModel};
use voisim::metrics::{normalized_voi, update_frequency};
use voisim::sched::SchedulerKind;
use voisim::scenarios::{V2xConfig, V2X_PERIOD_S, V2X_SIZES_BITS};
use voisim::sim::{run_v2x, RunSpec};
use voisim::transport::Capacity;

const CAPS: [f64; 6] = [20.0, 40.0, 60.0, 80.0, 100.0, 120.0];

#[derive(Clone, Copy, Debug)]
struct Combo {
    cam_tau: f64,
    lidar_tau: f64,
    v_lat: f64,
    w_lidar: f64,
    horizon: f64,
}

fn build(c: &Combo) -> V2xConfig {
    let names = ["f", "r", "lft", "rgt", "L"];
    let values = [0.9, 0.7, c.v_lat, c.v_lat, 1.0];
    let tau = [c.cam_tau, c.cam_tau, c.cam_tau, c.cam_tau, c.lidar_tau];
    let specs = (0..5)
        .map(|i| SensorSpec {
            sensor_id: i,
            name: names[i].into(),
            size_bits: V2X_SIZES_BITS[i],
            intrinsic_value: values[i],
            temporal_model: TemporalGainModel::Exponential { tau_s: tau[i] },
            period_s: V2X_PERIOD_S,
        })
        .collect();
    let mut w = CorrelationMatrix::identity(5);
    for cam in 0..4 {
        w.set(4, cam, c.w_lidar);
    }
    w.set(0, 2, 0.2);
    w.set(0, 3, 0.2);
    w.set(2, 3, 0.1);
    V2xConfig {
        specs,
        w,
        period_s: V2X_PERIOD_S,
    }
}

struct Outcome {
    violations: Vec<String>,
    min_margin: f64,
}

fn evaluate(c: &Combo) -> Outcome {
    let cfg = build(c);
    let mut reference = RunSpec::new(SchedulerKind::Est, Capacity::Infinite, 1, 60.0);
    reference.horizon_periods = c.horizon;
    let reference = run_v2x(&cfg, &reference).unwrap();

    let mut curves = Vec::new();
    let mut freqs100 = Vec::new();
    for kind in SchedulerKind::ALL {
        let mut curve = Vec::new();
        for &cap in &CAPS {
            let mut rs = RunSpec::new(kind, Capacity::Finite(cap * 1e6), 1, 60.0);
            rs.horizon_periods = c.horizon;
            let out = run_v2x(&cfg, &rs).unwrap();
            curve.push(normalized_voi(&out.log, &reference.log, &cfg.specs, &cfg.w).unwrap());
            if cap == 100.0 {
                freqs100.push(update_frequency(&out.log));
            }
        }
        curves.push(curve);
    }

    let mut violations = Vec::new();
    let mut min_margin = f64::INFINITY;
    let mut check = |margin: f64, what: String| {
        if margin < 0.0 {
            violations.push(format!("{what} (by {:.4})", -margin));
        }
        if margin < min_margin {
            min_margin = margin;
        }
    };

    for (k, kind) in SchedulerKind::ALL.iter().enumerate() {
        for ci in 1..CAPS.len() {
            check(
                curves[k][ci] - curves[k][ci - 1] + 0.02,
                format!("{:?} non-monotone at {}", kind, CAPS[ci]),
            );
        }
        for ci in 0..CAPS.len() {
            check(curves[k][ci], format!("{:?} below 0 at {}", kind, CAPS[ci]));
            check(
                1.01 - curves[k][ci],
                format!("{:?} above 1.01 at {}", kind, CAPS[ci]),
            );
        }
    }
    // Ordering chain with 0.02 slack: est >= cross >= voi >= fifo.
    for ci in 0..CAPS.len() {
        check(
            curves[3][ci] - curves[2][ci] + 0.02,
            format!("est < cross at {}", CAPS[ci]),
        );
        check(
            curves[2][ci] - curves[1][ci] + 0.02,
            format!("cross < voi at {}", CAPS[ci]),
        );
        check(
            curves[1][ci] - curves[0][ci] + 0.02,
            format!("voi < fifo at {}", CAPS[ci]),
        );
    }
    // Frequency contrast at 100 Mbps (strict).
    let l = 4;
    check(
        freqs100[1][l] - freqs100[3][l] - 1e-9,
        "voi lidar freq not above est".into(),
    );
    check(
        freqs100[1][l] - freqs100[2][l] - 1e-9,
        "voi lidar freq not above cross".into(),
    );
    let cam_mean = |f: &Vec<f64>| (f[0] + f[1] + f[2] + f[3]) / 4.0;
    check(
        cam_mean(&freqs100[3]) - cam_mean(&freqs100[1]) - 1e-9,
        "est cam freq not above voi".into(),
    );

    Outcome {
        violations,
        min_margin,
    }
}

fn main() {
    let verbose = std::env::var("VERBOSE").is_ok();
    let mut best: Option<(Combo, Outcome)> = None;
    let mut passing = 0;
    // Brackets the shipped defaults: cam tau 0.04, lidar tau 2.0,
    // lateral value 0.25, lidar weight 0.5, horizon 1.4.
    for &cam_tau in &[0.03, 0.04, 0.05, 0.06] {
        for &lidar_tau in &[1.0, 2.0, 3.0, 5.0] {
            for &v_lat in &[0.2, 0.25, 0.3] {
                for &w_lidar in &[0.45, 0.5, 0.55] {
                    for &horizon in &[1.4, 1.5, 1.6] {
                        let combo = Combo {
                            cam_tau,
                            lidar_tau,
                            v_lat,
                            w_lidar,
                            horizon,
                        };
                        let out = evaluate(&combo);
                        if out.violations.is_empty() {
                            passing += 1;
                            println!("PASS margin {:+.4}  {:?}", out.min_margin, combo);
                        } else if verbose {
                            println!(
                                "{:+.4} {combo:?}: {}",
                                out.min_margin,
                                out.violations.join("; ")
                            );
                        }
                        let better = match &best {
                            None => true,
                            Some((_, b)) => {
                                (out.violations.len(), -out.min_margin)
                                    < (b.violations.len(), -b.min_margin)
                            }
                        };
                        if better {
                            best = Some((combo, out));
                        }
                    }
                }
            }
        }
    }
    println!("\n{passing} passing combos");
    if let Some((combo, out)) = best {
        println!("best: {combo:?} margin {:+.4}", out.min_margin);
        for v in out.violations.iter().take(12) {
            println!("  {v}");
        }
    }
}
