//! Generators and parameter sets for the two evaluation scenarios:
//! a five-sensor autonomous-driving setup (four cameras and a lidar at
//! 10 Hz) and a 44-sensor haptic glove pair sampled at 1 kHz.

use rand::prelude::*;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, Normal};

use crate::core::{Batch, CorrelationMatrix, Object, ObjectId, SensorSpec, TemporalGainModel};
use crate::Result;

pub const V2X_NUM_SENSORS: usize = 5;
pub const V2X_FRONT: usize = 0;
pub const V2X_REAR: usize = 1;
pub const V2X_LEFT: usize = 2;
pub const V2X_RIGHT: usize = 3;
pub const V2X_LIDAR: usize = 4;
pub const V2X_PERIOD_S: f64 = 0.1;

/// JPG-compressed frame sizes: 180 KB front/rear, 140 KB lateral,
/// 1300 KB lidar (KB = 1000 bytes).
pub const V2X_SIZES_BITS: [u64; 5] = [1_440_000, 1_440_000, 1_120_000, 1_120_000, 10_400_000];

/// Autonomous-driving scenario parameters.
#[derive(Debug, Clone)]
pub struct V2xConfig {
    pub specs: Vec<SensorSpec>,
    pub w: CorrelationMatrix,
    pub period_s: f64,
}

impl V2xConfig {
    pub fn validate(&self) -> Result<()> {
        for s in &self.specs {
            s.validate()?;
        }
        self.w.validate()
    }

    pub fn batch_bits(&self) -> u64 {
        self.specs.iter().map(|s| s.size_bits).sum()
    }
}

/// Default five-sensor setup.
///
/// Sizes and period are fixed by the sensor suite; intrinsic values,
/// correlation weights, and decay constants encode the qualitative
/// structure (lidar most valuable but heavily redundant with every camera;
/// front above rear above lateral; rear uncorrelated) and are meant to be
/// overridden from experiment configs when better calibration exists.
pub fn v2x_defaults() -> V2xConfig {
    let names = ["f", "r", "lft", "rgt", "L"];
    let values = [0.9, 0.7, 0.25, 0.25, 1.0];
    // Camera frames decay within a fraction of a period; a lidar sweep of
    // mostly static surroundings stays useful for seconds.
    let tau = [0.04, 0.04, 0.04, 0.04, 2.0];
    let specs = (0..V2X_NUM_SENSORS)
        .map(|i| SensorSpec {
            sensor_id: i,
            name: names[i].into(),
            size_bits: V2X_SIZES_BITS[i],
            intrinsic_value: values[i],
            temporal_model: TemporalGainModel::Exponential { tau_s: tau[i] },
            period_s: V2X_PERIOD_S,
        })
        .collect();
    let mut w = CorrelationMatrix::identity(V2X_NUM_SENSORS);
    for cam in [V2X_FRONT, V2X_REAR, V2X_LEFT, V2X_RIGHT] {
        w.set(V2X_LIDAR, cam, 0.5);
    }
    w.set(V2X_FRONT, V2X_LEFT, 0.2);
    w.set(V2X_FRONT, V2X_RIGHT, 0.2);
    w.set(V2X_LEFT, V2X_RIGHT, 0.1);
    V2xConfig {
        specs,
        w,
        period_s: V2X_PERIOD_S,
    }
}

/// Emits one batch per period with monotonically increasing object ids.
#[derive(Debug, Clone)]
pub struct V2xSource {
    next_object_id: ObjectId,
}

impl V2xSource {
    pub fn new() -> Self {
        V2xSource { next_object_id: 0 }
    }

    pub fn batch(&mut self, cfg: &V2xConfig, batch_index: u64) -> Batch {
        let t = batch_index as f64 * cfg.period_s;
        let objects = cfg
            .specs
            .iter()
            .map(|s| {
                let id = self.next_object_id;
                self.next_object_id += 1;
                Object {
                    object_id: id,
                    sensor_id: s.sensor_id,
                    gen_time_s: t,
                    size_bits: s.size_bits,
                    sample_value: None,
                }
            })
            .collect();
        Batch::from_per_sensor_objects(t, objects)
    }
}

impl Default for V2xSource {
    fn default() -> Self {
        Self::new()
    }
}

/// Haptic-communication scenario parameters: two 22-sensor gloves emitting
/// one 32-bit sample each at 1 kHz.
#[derive(Debug, Clone)]
pub struct HapticConfig {
    pub n_sensors: usize,
    pub sample_bits: u64,
    pub tick_s: f64,
    /// Per-tick innovation standard deviation, as a fraction of the
    /// normalized dynamic range.
    pub sigma: f64,
    /// Just-noticeable difference, fraction of the dynamic range.
    pub jnd: f64,
    pub logistic_center_sigmas: f64,
    pub logistic_sharpness: f64,
}

pub fn haptic_defaults() -> HapticConfig {
    HapticConfig {
        n_sensors: 44,
        sample_bits: 32,
        tick_s: 0.001,
        sigma: 0.0215,
        jnd: 0.05,
        logistic_center_sigmas: 1.65,
        logistic_sharpness: 10.0,
    }
}

impl HapticConfig {
    /// All sensors share the same intrinsic value; only sample novelty
    /// differentiates them.
    pub fn specs(&self) -> Vec<SensorSpec> {
        (0..self.n_sensors)
            .map(|i| SensorSpec {
                sensor_id: i,
                name: format!("h{i}"),
                size_bits: self.sample_bits,
                intrinsic_value: 1.0,
                temporal_model: TemporalGainModel::DifferenceLogistic {
                    sigma: self.sigma,
                    center_sigmas: self.logistic_center_sigmas,
                    sharpness: self.logistic_sharpness,
                },
                period_s: self.tick_s,
            })
            .collect()
    }

    /// No constant cross-sensor structure is assumed for a moving hand.
    pub fn correlation(&self) -> CorrelationMatrix {
        CorrelationMatrix::identity(self.n_sensors)
    }

    pub fn batch_bits(&self) -> u64 {
        self.n_sensors as u64 * self.sample_bits
    }
}

/// One reflected random-walk step per sensor: `x <- reflect(x + n)` with
/// zero-mean Gaussian innovation, keeping every value inside [0, 1].
pub fn haptic_step<R: Rng>(values: &mut [f64], sigma: f64, rng: &mut R) {
    if sigma == 0.0 {
        return;
    }
    let normal = Normal::new(0.0, sigma).expect("sigma > 0");
    for x in values.iter_mut() {
        let mut v = *x + normal.sample(rng);
        loop {
            if v < 0.0 {
                v = -v;
            } else if v > 1.0 {
                v = 2.0 - v;
            } else {
                break;
            }
        }
        *x = v;
    }
}

/// Seeded Gauss-Markov sample generator for the haptic sensors.
#[derive(Debug, Clone)]
pub struct HapticSource {
    values: Vec<f64>,
    rng: ChaCha12Rng,
    next_object_id: ObjectId,
}

impl HapticSource {
    pub fn new(cfg: &HapticConfig, seed: u64) -> Self {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        let values = (0..cfg.n_sensors).map(|_| rng.random::<f64>()).collect();
        HapticSource {
            values,
            rng,
            next_object_id: 0,
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn step(&mut self, cfg: &HapticConfig) {
        haptic_step(&mut self.values, cfg.sigma, &mut self.rng);
    }

    /// Batch of the current samples at tick `tick_index`.
    pub fn batch(&mut self, cfg: &HapticConfig, tick_index: u64) -> Batch {
        let t = tick_index as f64 * cfg.tick_s;
        let objects = (0..cfg.n_sensors)
            .map(|i| {
                let id = self.next_object_id;
                self.next_object_id += 1;
                Object {
                    object_id: id,
                    sensor_id: i,
                    gen_time_s: t,
                    size_bits: cfg.sample_bits,
                    sample_value: Some(self.values[i]),
                }
            })
            .collect();
        Batch::from_per_sensor_objects(t, objects)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn v2x_source_rate_is_exact() {
        let cfg = v2x_defaults();
        cfg.validate().unwrap();
        let batch_bits = cfg.batch_bits();
        assert_eq!(batch_bits, 15_520_000);
        // 10 Hz: 155.2 Mbps peak.
        assert_eq!(batch_bits * 10, 155_200_000);
    }

    #[test]
    fn v2x_intrinsic_value_ordering() {
        let cfg = v2x_defaults();
        let v: Vec<f64> = cfg.specs.iter().map(|s| s.intrinsic_value).collect();
        assert!(v[V2X_LIDAR] > v[V2X_FRONT]);
        assert!(v[V2X_FRONT] >= v[V2X_REAR]);
        assert!(v[V2X_REAR] > v[V2X_LEFT]);
        assert_eq!(v[V2X_LEFT], v[V2X_RIGHT]);
    }

    #[test]
    fn v2x_correlation_structure() {
        let cfg = v2x_defaults();
        assert!(cfg.w.validate().is_ok());
        // Rear camera uncorrelated with the other cameras.
        for cam in [V2X_FRONT, V2X_LEFT, V2X_RIGHT] {
            assert_eq!(cfg.w.get(V2X_REAR, cam), 0.0);
        }
        // Lidar carries the heaviest redundancy weight against every camera.
        for cam in 0..4 {
            assert!(cfg.w.get(V2X_LIDAR, cam) > cfg.w.get(V2X_FRONT, V2X_LEFT));
        }
        assert!(cfg.w.get(V2X_FRONT, V2X_LEFT) > cfg.w.get(V2X_LEFT, V2X_RIGHT));
    }

    #[test]
    fn v2x_joint_value_of_a_full_fresh_batch() {
        let cfg = v2x_defaults();
        let v: Vec<f64> = cfg.specs.iter().map(|s| s.intrinsic_value).collect();
        // Direct evaluation of the pairwise-discount formula.
        let mut expected: f64 = v.iter().sum();
        for i in 0..5 {
            for j in (i + 1)..5 {
                expected -= cfg.w.get(i, j) * v[i].min(v[j]);
            }
        }
        let got = crate::core::joint_voi(&v, &[0, 1, 2, 3, 4], &cfg.w).unwrap();
        assert!((got - expected).abs() < 1e-12);
        // Under these weights a full fresh batch is worth less than the four
        // cameras alone: the lidar's marginal value is negative when all
        // cameras are fresh.
        let cams = crate::core::joint_voi(&v, &[0, 1, 2, 3], &cfg.w).unwrap();
        assert!(cams > got);
    }

    #[test]
    fn v2x_batches_have_increasing_ids() {
        let cfg = v2x_defaults();
        let mut src = V2xSource::new();
        let b0 = src.batch(&cfg, 0);
        let b1 = src.batch(&cfg, 1);
        assert_eq!(b0.objects.len(), 5);
        assert_eq!(b1.gen_time_s, 0.1);
        let max0 = b0.objects.iter().map(|o| o.object_id).max().unwrap();
        let min1 = b1.objects.iter().map(|o| o.object_id).min().unwrap();
        assert!(min1 > max0);
    }

    #[test]
    fn sixty_seconds_is_six_hundred_batches() {
        let cfg = v2x_defaults();
        let batches = (60.0 / cfg.period_s).round() as u64;
        assert_eq!(batches, 600);
        assert_eq!(batches * 5, 3000);
    }

    #[test]
    fn haptic_source_rate_is_exact() {
        let cfg = haptic_defaults();
        assert_eq!(cfg.batch_bits(), 1408);
        // 1 kHz: 1.408 Mbps.
        let per_second = cfg.batch_bits() as f64 / cfg.tick_s;
        assert_eq!(per_second, 1_408_000.0);
    }

    #[test]
    fn haptic_specs_share_intrinsic_value_and_have_no_correlation() {
        let cfg = haptic_defaults();
        let specs = cfg.specs();
        assert_eq!(specs.len(), 44);
        assert!(specs.iter().all(|s| s.intrinsic_value == 1.0));
        assert!(specs.iter().all(|s| s.size_bits == 32));
        let w = cfg.correlation();
        for i in 0..44 {
            for j in 0..44 {
                assert_eq!(w.get(i, j), if i == j { 1.0 } else { 0.0 });
            }
        }
    }

    #[test]
    fn haptic_batch_carries_current_samples() {
        let cfg = haptic_defaults();
        let mut src = HapticSource::new(&cfg, 3);
        let batch = src.batch(&cfg, 0);
        assert_eq!(batch.objects.len(), 44);
        assert_eq!(batch.total_bits(), 1408);
        for (i, o) in batch.objects.iter().enumerate() {
            assert_eq!(o.sample_value, Some(src.values()[i]));
        }
    }

    #[test]
    fn zero_sigma_leaves_state_unchanged() {
        let mut values = vec![0.1, 0.5, 0.9];
        let mut rng = ChaCha12Rng::seed_from_u64(1);
        haptic_step(&mut values, 0.0, &mut rng);
        assert_eq!(values, vec![0.1, 0.5, 0.9]);
    }

    #[test]
    fn trajectories_stay_in_range() {
        let cfg = haptic_defaults();
        for seed in 0..5 {
            let mut src = HapticSource::new(&cfg, seed);
            for _ in 0..2000 {
                src.step(&cfg);
                assert!(src.values().iter().all(|&x| (0.0..=1.0).contains(&x)));
            }
        }
    }

    #[test]
    fn fixed_seed_reproduces_the_trajectory() {
        let cfg = haptic_defaults();
        let mut a = HapticSource::new(&cfg, 42);
        let mut b = HapticSource::new(&cfg, 42);
        for _ in 0..500 {
            a.step(&cfg);
            b.step(&cfg);
        }
        assert_eq!(a.values(), b.values());
    }

    #[test]
    fn random_walk_spread_grows_like_sqrt_k() {
        // Monte Carlo: after k steps from mid-range (reflections are
        // vanishingly rare there) the displacement std is sigma * sqrt(k).
        let sigma = 0.0215;
        let k = 16;
        let trials = 20_000;
        let mut rng = ChaCha12Rng::seed_from_u64(99);
        let mut sq_sum = 0.0;
        for _ in 0..trials {
            let mut v = [0.5];
            for _ in 0..k {
                haptic_step(&mut v, sigma, &mut rng);
            }
            let d: f64 = v[0] - 0.5;
            sq_sum += d * d;
        }
        let std = (sq_sum / trials as f64).sqrt();
        let expected = sigma * (k as f64).sqrt();
        assert!(
            (std - expected).abs() / expected < 0.05,
            "std {std} expected {expected}"
        );
    }
}
