//! Domain types shared across the crate and the VoI model itself:
//! temporal update-gain functions and the correlation-discounted joint
//! value of a set of readings.

use crate::{Error, Result};

pub type SensorId = usize;
pub type ObjectId = u64;

/// Shape of the temporal update gain of a sensor.
///
/// Time-based variants map the elapsed time since the receiver last got a
/// reading of the sensor to a gain in [0, 1]; `DifferenceLogistic` instead
/// maps the absolute difference between the current sample and the last
/// delivered one. `f64::INFINITY` is the sentinel for "never delivered"
/// and yields gain 1 for every variant.
#[derive(Debug, Clone, PartialEq)]
pub enum TemporalGainModel {
    Exponential {
        tau_s: f64,
    },
    Step {
        threshold_s: f64,
    },
    Sigmoid {
        center_s: f64,
        sharpness: f64,
    },
    DifferenceLogistic {
        sigma: f64,
        center_sigmas: f64,
        sharpness: f64,
    },
    AlwaysOne,
}

impl TemporalGainModel {
    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            TemporalGainModel::Exponential { tau_s } => tau_s > 0.0,
            TemporalGainModel::Step { threshold_s } => threshold_s > 0.0,
            TemporalGainModel::Sigmoid {
                center_s,
                sharpness,
            } => center_s > 0.0 && sharpness > 0.0,
            TemporalGainModel::DifferenceLogistic {
                sigma,
                center_sigmas,
                sharpness,
            } => sigma > 0.0 && center_sigmas > 0.0 && sharpness > 0.0,
            TemporalGainModel::AlwaysOne => true,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!(
                "temporal gain parameters must be strictly positive: {self:?}"
            )))
        }
    }

    /// True when the gain argument is a sample difference rather than a time.
    pub fn is_difference_based(&self) -> bool {
        matches!(self, TemporalGainModel::DifferenceLogistic { .. })
    }
}

/// Update gain of a new reading given the staleness of the receiver's copy.
///
/// `arg` is the elapsed time since the last delivered reading for the
/// time-based variants, or the absolute sample difference for
/// `DifferenceLogistic`. Monotonically non-decreasing in `arg` for every
/// variant; `INFINITY` maps to 1.
pub fn update_gain(model: &TemporalGainModel, arg: f64) -> Result<f64> {
    if arg < 0.0 || arg.is_nan() {
        return Err(Error::NegativeGainArg(arg));
    }
    if arg.is_infinite() {
        return Ok(1.0);
    }
    let g = match *model {
        TemporalGainModel::Exponential { tau_s } => 1.0 - (-arg / tau_s).exp(),
        TemporalGainModel::Step { threshold_s } => {
            if arg < threshold_s {
                0.0
            } else {
                1.0
            }
        }
        TemporalGainModel::Sigmoid {
            center_s,
            sharpness,
        } => 1.0 / (1.0 + (-sharpness * (arg - center_s)).exp()),
        TemporalGainModel::DifferenceLogistic {
            sigma,
            center_sigmas,
            sharpness,
        } => {
            // Logistic argument measured in units of sigma.
            let x = (arg - center_sigmas * sigma) / sigma;
            1.0 / (1.0 + (-sharpness * x).exp())
        }
        TemporalGainModel::AlwaysOne => 1.0,
    };
    Ok(g.clamp(0.0, 1.0))
}

/// Value retained by a reading that reaches the receiver `arg` late.
///
/// This is the delivery-side counterpart of [`update_gain`]: for the
/// time-based variants `arg` is the age of the reading (delivery time minus
/// generation time) and the gain decays as the data gets older in transit;
/// for `DifferenceLogistic` the novelty actually conveyed is what counts, so
/// `arg` is the sample difference at delivery and the logistic is evaluated
/// exactly as in [`update_gain`]. Data delivered instantly keeps its full
/// value under every time-based variant.
pub fn freshness_gain(model: &TemporalGainModel, arg: f64) -> Result<f64> {
    if arg < 0.0 || arg.is_nan() {
        return Err(Error::NegativeGainArg(arg));
    }
    let g = match *model {
        TemporalGainModel::Exponential { tau_s } => (-arg / tau_s).exp(),
        TemporalGainModel::Step { threshold_s } => {
            if arg < threshold_s {
                1.0
            } else {
                0.0
            }
        }
        TemporalGainModel::Sigmoid {
            center_s,
            sharpness,
        } => 1.0 / (1.0 + (sharpness * (arg - center_s)).exp()),
        TemporalGainModel::DifferenceLogistic { .. } => return update_gain(model, arg),
        TemporalGainModel::AlwaysOne => 1.0,
    };
    Ok(g.clamp(0.0, 1.0))
}

/// Static description of one sensor.
#[derive(Debug, Clone)]
pub struct SensorSpec {
    pub sensor_id: SensorId,
    pub name: String,
    pub size_bits: u64,
    pub intrinsic_value: f64,
    pub temporal_model: TemporalGainModel,
    pub period_s: f64,
}

impl SensorSpec {
    pub fn validate(&self) -> Result<()> {
        if self.size_bits == 0 {
            return Err(Error::InvalidParameter(format!(
                "sensor {}: size_bits must be positive",
                self.sensor_id
            )));
        }
        if !(0.0..=1.0).contains(&self.intrinsic_value) {
            return Err(Error::InvalidParameter(format!(
                "sensor {}: intrinsic_value must be in [0, 1]",
                self.sensor_id
            )));
        }
        if self.period_s <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "sensor {}: period_s must be positive",
                self.sensor_id
            )));
        }
        self.temporal_model.validate()
    }
}

/// Symmetric cross-sensor redundancy weights with unit diagonal.
#[derive(Debug, Clone)]
pub struct CorrelationMatrix {
    n: usize,
    w: Vec<f64>,
    off_diag_nonzero: bool,
}

impl CorrelationMatrix {
    /// Identity correlation: no cross-sensor redundancy.
    pub fn identity(n: usize) -> Self {
        let mut w = vec![0.0; n * n];
        for i in 0..n {
            w[i * n + i] = 1.0;
        }
        CorrelationMatrix {
            n,
            w,
            off_diag_nonzero: false,
        }
    }

    /// Sets the symmetric pair (i, j). Panics on the diagonal or when the
    /// weight leaves [0, 1].
    pub fn set(&mut self, i: usize, j: usize, weight: f64) {
        assert!(i != j, "diagonal entries are fixed at 1");
        assert!(
            (0.0..=1.0).contains(&weight),
            "correlation weight must be in [0, 1]"
        );
        self.w[i * self.n + j] = weight;
        self.w[j * self.n + i] = weight;
        if weight != 0.0 {
            self.off_diag_nonzero = true;
        }
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.w[i * self.n + j]
    }

    /// False when every off-diagonal weight is zero (may conservatively stay
    /// true after weights are cleared again).
    pub fn has_cross_correlation(&self) -> bool {
        self.off_diag_nonzero
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn validate(&self) -> Result<()> {
        for i in 0..self.n {
            if self.w[i * self.n + i] != 1.0 {
                return Err(Error::InvalidParameter(format!(
                    "correlation diagonal entry {i} must be 1"
                )));
            }
            for j in 0..self.n {
                let v = self.w[i * self.n + j];
                if !(0.0..=1.0).contains(&v) {
                    return Err(Error::InvalidParameter(format!(
                        "correlation entry ({i}, {j}) = {v} outside [0, 1]"
                    )));
                }
                if v != self.w[j * self.n + i] {
                    return Err(Error::InvalidParameter(format!(
                        "correlation entry ({i}, {j}) is not symmetric"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// One sensor reading awaiting transmission.
#[derive(Debug, Clone, PartialEq)]
pub struct Object {
    pub object_id: ObjectId,
    pub sensor_id: SensorId,
    pub gen_time_s: f64,
    pub size_bits: u64,
    pub sample_value: Option<f64>,
}

/// The set of objects generated simultaneously at one sampling instant,
/// at most one per sensor.
#[derive(Debug, Clone)]
pub struct Batch {
    pub gen_time_s: f64,
    pub objects: Vec<Object>,
}

impl Batch {
    pub fn new(gen_time_s: f64, objects: Vec<Object>) -> Result<Self> {
        let mut seen = std::collections::HashSet::new();
        for o in &objects {
            if !seen.insert(o.sensor_id) {
                return Err(Error::InvalidParameter(format!(
                    "batch contains two objects for sensor {}",
                    o.sensor_id
                )));
            }
        }
        Ok(Batch {
            gen_time_s,
            objects,
        })
    }

    /// For generators that emit exactly one object per sensor; skips the
    /// duplicate check on the hot path.
    pub(crate) fn from_per_sensor_objects(gen_time_s: f64, objects: Vec<Object>) -> Self {
        debug_assert!({
            let mut ids: Vec<_> = objects.iter().map(|o| o.sensor_id).collect();
            ids.sort_unstable();
            ids.windows(2).all(|w| w[0] != w[1])
        });
        Batch {
            gen_time_s,
            objects,
        }
    }

    pub fn total_bits(&self) -> u64 {
        self.objects.iter().map(|o| o.size_bits).sum()
    }
}

#[derive(Debug, Clone, Copy)]
struct LastDelivery {
    time_s: f64,
    sample: Option<f64>,
}

/// What the receiver currently holds, per sensor: the time of the last
/// delivered reading and, for scalar sensors, its sample value.
#[derive(Debug, Clone)]
pub struct ReceiverState {
    last: Vec<Option<LastDelivery>>,
}

impl ReceiverState {
    pub fn new(n_sensors: usize) -> Self {
        ReceiverState {
            last: vec![None; n_sensors],
        }
    }

    pub fn n_sensors(&self) -> usize {
        self.last.len()
    }

    pub fn record_delivery(&mut self, sensor: SensorId, time_s: f64, sample: Option<f64>) {
        self.last[sensor] = Some(LastDelivery { time_s, sample });
    }

    pub fn last_delivery_time(&self, sensor: SensorId) -> Option<f64> {
        self.last[sensor].map(|d| d.time_s)
    }

    pub fn last_sample(&self, sensor: SensorId) -> Option<f64> {
        self.last[sensor].and_then(|d| d.sample)
    }
}

/// Effective VoI of one object: intrinsic value times the update gain
/// derived from the receiver state. A sensor the receiver never heard from
/// gets gain 1.
pub fn effective_voi(
    spec: &SensorSpec,
    receiver: &ReceiverState,
    object: &Object,
    now_s: f64,
) -> Result<f64> {
    let arg = if spec.temporal_model.is_difference_based() {
        let sample = object
            .sample_value
            .ok_or(Error::MissingSampleValue(spec.sensor_id))?;
        match receiver.last_sample(spec.sensor_id) {
            Some(prev) => (sample - prev).abs(),
            None => f64::INFINITY,
        }
    } else {
        match receiver.last_delivery_time(spec.sensor_id) {
            Some(t) => now_s - t,
            None => f64::INFINITY,
        }
    };
    let gain = update_gain(&spec.temporal_model, arg)?;
    Ok(spec.intrinsic_value * gain)
}

/// Joint VoI of a set of readings: the sum of effective values minus the
/// pairwise redundancy discount `w[i][j] * min(v_i, v_j)`.
///
/// The discount is not clamped, so adding a heavily correlated reading can
/// lower the joint value; that negative marginal is what lets the solver
/// skip redundant objects.
pub fn joint_voi(values: &[f64], members: &[usize], w: &CorrelationMatrix) -> Result<f64> {
    let mut set: Vec<usize> = members.to_vec();
    set.sort_unstable();
    set.dedup();
    for &i in &set {
        if i >= values.len() {
            return Err(Error::IndexOutOfRange {
                what: "effective values",
                index: i,
                len: values.len(),
            });
        }
        if i >= w.n() {
            return Err(Error::IndexOutOfRange {
                what: "correlation matrix",
                index: i,
                len: w.n(),
            });
        }
    }
    let mut sum = 0.0;
    let mut discount = 0.0;
    for (bi, &b) in set.iter().enumerate() {
        sum += values[b];
        for &a in &set[..bi] {
            discount += w.get(a, b) * values[a].min(values[b]);
        }
    }
    Ok(sum - discount)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn exponential_gain_examples() {
        let m = TemporalGainModel::Exponential { tau_s: 0.2 };
        assert_eq!(update_gain(&m, 0.0).unwrap(), 0.0);
        let g = update_gain(&m, 0.2).unwrap();
        assert!(close(g, 1.0 - (-1.0f64).exp(), 1e-12), "got {g}");
        assert!(close(g, 0.6321, 1e-4));
        assert_eq!(update_gain(&m, f64::INFINITY).unwrap(), 1.0);
    }

    #[test]
    fn difference_logistic_examples() {
        let m = TemporalGainModel::DifferenceLogistic {
            sigma: 0.0215,
            center_sigmas: 1.65,
            sharpness: 10.0,
        };
        // At the logistic center the gain is exactly one half.
        let g = update_gain(&m, 1.65 * 0.0215).unwrap();
        assert!(close(g, 0.5, 1e-12), "got {g}");
        // A difference at the 5% JND (2.326 sigma) saturates the gain.
        let g = update_gain(&m, 0.05).unwrap();
        assert!(close(g, 0.9988, 1e-4), "got {g}");
        assert_eq!(update_gain(&m, f64::INFINITY).unwrap(), 1.0);
    }

    #[test]
    fn step_and_sigmoid_gains() {
        let step = TemporalGainModel::Step { threshold_s: 0.5 };
        assert_eq!(update_gain(&step, 0.49).unwrap(), 0.0);
        assert_eq!(update_gain(&step, 0.5).unwrap(), 1.0);
        assert_eq!(update_gain(&step, f64::INFINITY).unwrap(), 1.0);

        let sig = TemporalGainModel::Sigmoid {
            center_s: 0.3,
            sharpness: 10.0,
        };
        assert!(close(update_gain(&sig, 0.3).unwrap(), 0.5, 1e-12));
        assert_eq!(update_gain(&sig, f64::INFINITY).unwrap(), 1.0);
    }

    #[test]
    fn negative_arg_is_rejected() {
        let m = TemporalGainModel::AlwaysOne;
        assert!(matches!(
            update_gain(&m, -0.1),
            Err(Error::NegativeGainArg(_))
        ));
        assert!(matches!(
            freshness_gain(&m, -0.1),
            Err(Error::NegativeGainArg(_))
        ));
    }

    #[test]
    fn freshness_decays_with_age() {
        let m = TemporalGainModel::Exponential { tau_s: 0.2 };
        assert_eq!(freshness_gain(&m, 0.0).unwrap(), 1.0);
        let g = freshness_gain(&m, 0.2).unwrap();
        assert!(close(g, (-1.0f64).exp(), 1e-12));
        assert_eq!(freshness_gain(&m, f64::INFINITY).unwrap(), 0.0);

        let step = TemporalGainModel::Step { threshold_s: 0.5 };
        assert_eq!(freshness_gain(&step, 0.1).unwrap(), 1.0);
        assert_eq!(freshness_gain(&step, 0.6).unwrap(), 0.0);
    }

    fn spec_with(model: TemporalGainModel, value: f64) -> SensorSpec {
        SensorSpec {
            sensor_id: 0,
            name: "s0".into(),
            size_bits: 100,
            intrinsic_value: value,
            temporal_model: model,
            period_s: 0.1,
        }
    }

    fn object(sensor: SensorId, t: f64, sample: Option<f64>) -> Object {
        Object {
            object_id: 1,
            sensor_id: sensor,
            gen_time_s: t,
            size_bits: 100,
            sample_value: sample,
        }
    }

    #[test]
    fn effective_voi_never_delivered_saturates() {
        let spec = spec_with(TemporalGainModel::Exponential { tau_s: 0.2 }, 1.0);
        let recv = ReceiverState::new(1);
        let v = effective_voi(&spec, &recv, &object(0, 0.0, None), 0.0).unwrap();
        assert_eq!(v, 1.0);
    }

    #[test]
    fn effective_voi_exponential_example() {
        let spec = spec_with(TemporalGainModel::Exponential { tau_s: 0.2 }, 0.9);
        let mut recv = ReceiverState::new(1);
        recv.record_delivery(0, 0.0, None);
        let v = effective_voi(&spec, &recv, &object(0, 0.1, None), 0.1).unwrap();
        assert!(close(v, 0.9 * (1.0 - (-0.5f64).exp()), 1e-12));
        assert!(close(v, 0.3541, 1e-4));
    }

    #[test]
    fn effective_voi_always_one_ignores_history() {
        let spec = spec_with(TemporalGainModel::AlwaysOne, 1.0);
        let mut recv = ReceiverState::new(1);
        recv.record_delivery(0, 0.05, None);
        let v = effective_voi(&spec, &recv, &object(0, 0.1, None), 0.1).unwrap();
        assert_eq!(v, 1.0);
    }

    #[test]
    fn effective_voi_difference_requires_sample() {
        let spec = spec_with(
            TemporalGainModel::DifferenceLogistic {
                sigma: 0.0215,
                center_sigmas: 1.65,
                sharpness: 10.0,
            },
            1.0,
        );
        let recv = ReceiverState::new(1);
        let err = effective_voi(&spec, &recv, &object(0, 0.0, None), 0.0);
        assert!(matches!(err, Err(Error::MissingSampleValue(0))));
    }

    #[test]
    fn joint_voi_examples() {
        let w0 = CorrelationMatrix::identity(2);
        assert_eq!(joint_voi(&[0.8, 1.0], &[], &w0).unwrap(), 0.0);

        let mut w = CorrelationMatrix::identity(2);
        w.set(0, 1, 0.5);
        let v = joint_voi(&[0.8, 1.0], &[0, 1], &w).unwrap();
        assert!(close(v, 1.4, 1e-12));

        let mut w1 = CorrelationMatrix::identity(2);
        w1.set(0, 1, 1.0);
        let v = joint_voi(&[1.0, 1.0], &[0, 1], &w1).unwrap();
        assert!(close(v, 1.0, 1e-12));
    }

    #[test]
    fn joint_voi_singleton_and_bounds() {
        let mut w = CorrelationMatrix::identity(3);
        w.set(0, 1, 0.3);
        w.set(1, 2, 0.9);
        let vals = [0.4, 0.7, 0.2];
        assert_eq!(joint_voi(&vals, &[1], &w).unwrap(), 0.7);
        let v = joint_voi(&vals, &[0, 1, 2], &w).unwrap();
        assert!(v <= vals.iter().sum::<f64>());
    }

    #[test]
    fn joint_voi_index_out_of_range() {
        let w = CorrelationMatrix::identity(2);
        assert!(matches!(
            joint_voi(&[1.0, 1.0], &[0, 2], &w),
            Err(Error::IndexOutOfRange { .. })
        ));
    }

    #[test]
    fn batch_rejects_duplicate_sensor() {
        let objs = vec![object(0, 0.0, None), object(0, 0.0, None)];
        assert!(Batch::new(0.0, objs).is_err());
    }

    #[test]
    fn correlation_matrix_validates() {
        let mut w = CorrelationMatrix::identity(3);
        w.set(0, 2, 0.6);
        assert!(w.validate().is_ok());
        assert_eq!(w.get(2, 0), 0.6);
        assert_eq!(w.get(1, 1), 1.0);
    }

    #[test]
    fn model_parameters_validate() {
        assert!(TemporalGainModel::Exponential { tau_s: 0.0 }
            .validate()
            .is_err());
        assert!(TemporalGainModel::DifferenceLogistic {
            sigma: 0.02,
            center_sigmas: 1.65,
            sharpness: -1.0
        }
        .validate()
        .is_err());
        assert!(TemporalGainModel::AlwaysOne.validate().is_ok());
    }
}
