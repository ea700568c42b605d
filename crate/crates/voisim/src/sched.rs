//! The four scheduler policies, each mapping a batch, the receiver state,
//! and a bit budget to an ordered transmission plan.

use crate::core::{
    effective_voi, Batch, CorrelationMatrix, Object, ObjectId, ReceiverState, SensorSpec,
};
use crate::qkp::{self, QkpInstance};
use crate::{Error, Result};

/// Which scheduling policy a run uses.
///
/// `Fifo` sends in arrival order; `VoiOnly` solves a plain knapsack on
/// intrinsic values; `CrossSensorVoi` adds the pairwise redundancy discount;
/// `Est` additionally feeds receiver-state temporal gains into the profits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SchedulerKind {
    Fifo,
    VoiOnly,
    CrossSensorVoi,
    Est,
}

impl SchedulerKind {
    pub const ALL: [SchedulerKind; 4] = [
        SchedulerKind::Fifo,
        SchedulerKind::VoiOnly,
        SchedulerKind::CrossSensorVoi,
        SchedulerKind::Est,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            SchedulerKind::Fifo => "fifo",
            SchedulerKind::VoiOnly => "voi",
            SchedulerKind::CrossSensorVoi => "cross_voi",
            SchedulerKind::Est => "est",
        }
    }

    pub fn from_str(s: &str) -> Result<Self> {
        match s {
            "fifo" => Ok(SchedulerKind::Fifo),
            "voi" => Ok(SchedulerKind::VoiOnly),
            "cross_voi" => Ok(SchedulerKind::CrossSensorVoi),
            "est" => Ok(SchedulerKind::Est),
            other => Err(Error::Config(format!("unknown scheduler \"{other}\""))),
        }
    }
}

/// Ordered transmission decision for one batch.
#[derive(Debug, Clone, PartialEq)]
pub struct TransmissionPlan {
    pub object_ids: Vec<ObjectId>,
    pub planned_bits: u64,
    pub planned_objective: f64,
}

impl TransmissionPlan {
    pub fn empty() -> Self {
        TransmissionPlan {
            object_ids: Vec::new(),
            planned_bits: 0,
            planned_objective: 0.0,
        }
    }
}

/// Computes the transmission plan for one batch.
///
/// Objects are considered in arrival order: ascending sensor id rotated by
/// `tick_index`, which round-robins equal-priority sensors across ticks.
/// The same order indexes the knapsack items, so solver tie-breaks also
/// respect arrival order.
pub fn schedule(
    kind: SchedulerKind,
    batch: &Batch,
    receiver: &ReceiverState,
    specs: &[SensorSpec],
    w: &CorrelationMatrix,
    budget_bits: u64,
    tick_index: u64,
) -> Result<TransmissionPlan> {
    if batch.objects.is_empty() || budget_bits == 0 {
        return Ok(TransmissionPlan::empty());
    }
    for o in &batch.objects {
        if o.sensor_id >= specs.len() || specs[o.sensor_id].sensor_id != o.sensor_id {
            return Err(Error::UnknownSensor(o.sensor_id));
        }
    }

    let arrival: Vec<&Object> = arrival_order(&batch.objects, tick_index);

    if kind == SchedulerKind::Fifo {
        return Ok(plan_fifo(&arrival, specs, budget_bits));
    }

    // Profit per item, in arrival order.
    let profits: Vec<f64> = arrival
        .iter()
        .map(|o| {
            let spec = &specs[o.sensor_id];
            match kind {
                SchedulerKind::VoiOnly | SchedulerKind::CrossSensorVoi => Ok(spec.intrinsic_value),
                SchedulerKind::Est => effective_voi(spec, receiver, o, batch.gen_time_s),
                SchedulerKind::Fifo => unreachable!(),
            }
        })
        .collect::<Result<_>>()?;

    let n = arrival.len();
    let correlated = kind != SchedulerKind::VoiOnly && w.has_cross_correlation();
    let sizes: Vec<u64> = arrival.iter().map(|o| o.size_bits).collect();
    let inst = if correlated {
        let mut penalties = vec![0.0; n * n];
        for i in 0..n {
            for j in (i + 1)..n {
                let ws = w.get(arrival[i].sensor_id, arrival[j].sensor_id);
                let q = ws * profits[i].min(profits[j]);
                penalties[i * n + j] = q;
                penalties[j * n + i] = q;
            }
        }
        QkpInstance::new(profits.clone(), penalties, sizes, budget_bits)?
    } else {
        QkpInstance::linear(profits.clone(), sizes, budget_bits)?
    };
    let selection = qkp::solve(&inst);

    // Transmit highest value density first; ties keep arrival order.
    let mut order = selection.chosen.clone();
    order.sort_by(|&a, &b| {
        let da = profits[a] / arrival[a].size_bits as f64;
        let db = profits[b] / arrival[b].size_bits as f64;
        db.partial_cmp(&da).unwrap().then(a.cmp(&b))
    });

    Ok(TransmissionPlan {
        object_ids: order.iter().map(|&i| arrival[i].object_id).collect(),
        planned_bits: selection.total_size_bits,
        planned_objective: selection.objective,
    })
}

fn arrival_order(objects: &[Object], tick_index: u64) -> Vec<&Object> {
    let mut sorted: Vec<&Object> = objects.iter().collect();
    sorted.sort_by_key(|o| o.sensor_id);
    let n = sorted.len();
    let start = (tick_index % n as u64) as usize;
    sorted.rotate_left(start);
    sorted
}

fn plan_fifo(arrival: &[&Object], specs: &[SensorSpec], budget_bits: u64) -> TransmissionPlan {
    let mut ids = Vec::new();
    let mut bits = 0u64;
    let mut value = 0.0;
    for o in arrival {
        // Skip what does not fit and keep going: no head-of-line blocking.
        if bits + o.size_bits <= budget_bits {
            bits += o.size_bits;
            value += specs[o.sensor_id].intrinsic_value;
            ids.push(o.object_id);
        }
    }
    TransmissionPlan {
        object_ids: ids,
        planned_bits: bits,
        planned_objective: value,
    }
}
