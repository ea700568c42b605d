//! Per-run aggregate metrics: normalized delivered VoI, per-sensor update
//! frequency, and the haptic quality-of-experience score.

use crate::core::{joint_voi, CorrelationMatrix, ObjectId, SensorId, SensorSpec};
use crate::{Error, Result};

/// One confirmed delivery, with the value gain the reading still carried
/// when it arrived (age decay for time-based sensors, conveyed novelty for
/// difference-based ones).
#[derive(Debug, Clone)]
pub struct DeliveryRecord {
    pub object_id: ObjectId,
    pub sensor_id: SensorId,
    pub batch_index: usize,
    pub gen_time_s: f64,
    pub delivery_time_s: f64,
    pub eval_gain: f64,
    pub sample_value: Option<f64>,
}

/// Everything a finished run exposes to the metric functions.
#[derive(Debug, Clone)]
pub struct RunLog {
    pub n_sensors: usize,
    pub batch_count: usize,
    pub duration_s: f64,
    pub deliveries: Vec<DeliveryRecord>,
    pub delivered_objects: u64,
    pub wasted_bits: f64,
}

/// Mean over batches of the joint VoI of each batch's delivered set,
/// valued at delivery time.
pub fn average_batch_voi(run: &RunLog, specs: &[SensorSpec], w: &CorrelationMatrix) -> f64 {
    if run.batch_count == 0 {
        return 0.0;
    }
    let mut values = vec![vec![0.0f64; run.n_sensors]; run.batch_count];
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); run.batch_count];
    for d in &run.deliveries {
        if d.batch_index >= run.batch_count {
            continue;
        }
        values[d.batch_index][d.sensor_id] = specs[d.sensor_id].intrinsic_value * d.eval_gain;
        members[d.batch_index].push(d.sensor_id);
    }
    let mut total = 0.0;
    for b in 0..run.batch_count {
        total += joint_voi(&values[b], &members[b], w).expect("log indices valid");
    }
    total / run.batch_count as f64
}

/// Average delivered VoI of a run divided by that of its infinite-capacity
/// reference run (same scenario, seed, and duration).
pub fn normalized_voi(
    run: &RunLog,
    reference: &RunLog,
    specs: &[SensorSpec],
    w: &CorrelationMatrix,
) -> Result<f64> {
    let denom = average_batch_voi(reference, specs, w);
    if denom == 0.0 {
        return Err(Error::ZeroReference);
    }
    Ok(average_batch_voi(run, specs, w) / denom)
}

/// Deliveries of each sensor per second of run time.
pub fn update_frequency(run: &RunLog) -> Vec<f64> {
    let mut counts = vec![0u64; run.n_sensors];
    for d in &run.deliveries {
        counts[d.sensor_id] += 1;
    }
    counts
        .into_iter()
        .map(|c| c as f64 / run.duration_s)
        .collect()
}

/// Fraction of (sensor, tick) pairs whose receiver-side error stays under
/// the just-noticeable difference.
///
/// `trajectories[i][k]` is sensor `i`'s true value at tick `k`; the
/// receiver's estimate at tick `k` is the latest sample delivered no later
/// than `k * tick_s`, or the initial value (`trajectories[i][0]`) before
/// any delivery.
pub fn haptic_qoe(
    trajectories: &[Vec<f64>],
    deliveries: &[DeliveryRecord],
    jnd: f64,
    tick_s: f64,
) -> f64 {
    let n = trajectories.len();
    if n == 0 {
        return 1.0;
    }
    let ticks = trajectories[0].len();
    if ticks == 0 {
        return 1.0;
    }
    let mut per_sensor: Vec<Vec<(f64, f64)>> = vec![Vec::new(); n];
    for d in deliveries {
        if let Some(v) = d.sample_value {
            per_sensor[d.sensor_id].push((d.delivery_time_s, v));
        }
    }
    let mut hits = 0u64;
    for (i, traj) in trajectories.iter().enumerate() {
        per_sensor[i].sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        let mut estimate = traj[0];
        let mut next = 0;
        for (k, &truth) in traj.iter().enumerate() {
            let t = k as f64 * tick_s;
            while next < per_sensor[i].len() && per_sensor[i][next].0 <= t {
                estimate = per_sensor[i][next].1;
                next += 1;
            }
            if (truth - estimate).abs() < jnd {
                hits += 1;
            }
        }
    }
    hits as f64 / (n * ticks) as f64
}
