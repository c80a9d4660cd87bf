//! Synthetic nonstationary regression streams.
//!
//! Nine stationary sensor-like inputs feed a fixed smooth teacher `g(x)`
//! with values in (50, 150); a hidden efficiency trajectory `η_t` scales it:
//! `y_t = η_t · g(x_t) + ε_t`. Drift is therefore real drift in `P(y | x)`
//! while `P(x)` never changes. The true `η_t`, its breakpoints and the jump
//! instants are exported with every stream for latency measurement.

use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::matrix::{dot, Matrix};
use crate::stream::Stream;

pub const INPUT_DIM: usize = 9;
pub const DEFAULT_STREAM_LEN: usize = 2000;
pub const DEFAULT_ETA_NOISE: f64 = 0.005;
/// Observation noise, relative to the mean noiseless `|y|`.
pub const DEFAULT_SIGMA_Y_REL: f64 = 0.005;

/// Name and operating range of one input signal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sensor {
    pub name: &'static str,
    pub low: f64,
    pub high: f64,
}

pub const SENSORS: [Sensor; INPUT_DIM] = [
    Sensor { name: "compressor_inlet_temperature", low: -5.0, high: 35.0 },
    Sensor { name: "compressor_inlet_humidity", low: 20.0, high: 95.0 },
    Sensor { name: "ambient_pressure", low: 0.97, high: 1.04 },
    Sensor { name: "inlet_pressure_drop", low: 5.0, high: 15.0 },
    Sensor { name: "exhaust_pressure_drop", low: 10.0, high: 30.0 },
    Sensor { name: "inlet_guide_vane_angle", low: 50.0, high: 90.0 },
    Sensor { name: "fuel_temperature", low: 20.0, high: 200.0 },
    Sensor { name: "compressor_flow", low: 400.0, high: 650.0 },
    Sensor { name: "firing_temperature", low: 1200.0, high: 1450.0 },
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum DriftKind {
    /// 1.0 ramping down to 0.9, jump to 1.1, ramp to 0.9, jump to 1.1, hold,
    /// then ramp to 0.95 at the end. Segments `[l1, l2, l3]`.
    Abrupt,
    /// Hold 1.1, one long linear ramp to 0.9, hold. Segments `[l1, l2]`.
    Gradual,
    /// η ≡ 1. No segments.
    Stationary,
}

impl DriftKind {
    pub fn name(self) -> &'static str {
        match self {
            DriftKind::Abrupt => "abrupt",
            DriftKind::Gradual => "gradual",
            DriftKind::Stationary => "stationary",
        }
    }
}

impl core::str::FromStr for DriftKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "abrupt" => Ok(DriftKind::Abrupt),
            "gradual" => Ok(DriftKind::Gradual),
            "stationary" => Ok(DriftKind::Stationary),
            _ => Err(Error::InvalidConfig("drift kind must be abrupt, gradual or stationary")),
        }
    }
}

/// Efficiency trajectory with and without its i.i.d. Gaussian noise.
#[derive(Debug, Clone, PartialEq)]
pub struct EfficiencyProfile {
    kind: DriftKind,
    segments: Vec<usize>,
    noise_sigma: f64,
    clean: Vec<f64>,
    values: Vec<f64>,
}

fn check_segments(kind: DriftKind, segments: &[usize], len: usize) -> Result<()> {
    let ok = match kind {
        DriftKind::Abrupt => {
            segments.len() == 3 && segments[0] >= 2 && segments[1] >= 2 && segments[2] >= 1 && segments.iter().sum::<usize>() < len
        }
        DriftKind::Gradual => {
            segments.len() == 2 && segments[0] >= 1 && segments[1] >= 1 && segments.iter().sum::<usize>() < len
        }
        DriftKind::Stationary => segments.is_empty() && len >= 1,
    };
    if ok {
        Ok(())
    } else {
        Err(Error::InvalidConfig("segment lengths do not fit the drift pattern and stream length"))
    }
}

fn clean_profile(kind: DriftKind, segments: &[usize], len: usize) -> Vec<f64> {
    let mut eta = vec![0.0; len];
    match kind {
        DriftKind::Abrupt => {
            let (l1, l2) = (segments[0], segments[1]);
            let (a, b, c) = (l1, l1 + l2, l1 + l2 + segments[2]);
            for (t, e) in eta.iter_mut().enumerate() {
                *e = if t < a {
                    1.0 - 0.1 * t as f64 / (l1 - 1) as f64
                } else if t < b {
                    1.1 - 0.2 * (t - a) as f64 / (l2 - 1) as f64
                } else if t < c {
                    1.1
                } else {
                    1.1 - 0.15 * (t + 1 - c) as f64 / (len - c) as f64
                };
            }
        }
        DriftKind::Gradual => {
            let (l1, l2) = (segments[0], segments[1]);
            for (t, e) in eta.iter_mut().enumerate() {
                *e = if t <= l1 {
                    1.1
                } else if t < l1 + l2 {
                    1.1 - 0.2 * (t - l1) as f64 / l2 as f64
                } else {
                    0.9
                };
            }
        }
        DriftKind::Stationary => eta.iter_mut().for_each(|e| *e = 1.0),
    }
    eta
}

impl EfficiencyProfile {
    /// Materializes a profile from explicit segment lengths; the noise is
    /// drawn from `noise_seed`.
    pub fn from_segments(kind: DriftKind, segments: &[usize], len: usize, noise_sigma: f64, noise_seed: u64) -> Result<Self> {
        check_segments(kind, segments, len)?;
        if !noise_sigma.is_finite() || noise_sigma < 0.0 {
            return Err(Error::InvalidConfig("noise sigma must be >= 0"));
        }
        let clean = clean_profile(kind, segments, len);
        let values = if noise_sigma > 0.0 {
            let normal = Normal::new(0.0, noise_sigma).map_err(|_| Error::InvalidConfig("noise sigma"))?;
            let mut rng = ChaCha8Rng::seed_from_u64(noise_seed);
            clean.iter().map(|e| e + normal.sample(&mut rng)).collect()
        } else {
            clean.clone()
        };
        Ok(EfficiencyProfile { kind, segments: segments.to_vec(), noise_sigma, clean, values })
    }

    pub fn kind(&self) -> DriftKind {
        self.kind
    }

    pub fn segments(&self) -> &[usize] {
        &self.segments
    }

    pub fn noise_sigma(&self) -> f64 {
        self.noise_sigma
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Noisy trajectory actually applied to the stream.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn clean(&self) -> &[f64] {
        &self.clean
    }

    /// Defining `(index, pre-noise value)` pairs of the pattern.
    pub fn breakpoints(&self) -> Vec<(usize, f64)> {
        let n = self.len();
        match self.kind {
            DriftKind::Abrupt => {
                let (l1, l2) = (self.segments[0], self.segments[1]);
                vec![(0, 1.0), (l1 - 1, 0.9), (l1, 1.1), (l1 + l2 - 1, 0.9), (l1 + l2, 1.1), (n - 1, 0.95)]
            }
            DriftKind::Gradual => {
                let (l1, l2) = (self.segments[0], self.segments[1]);
                vec![(0, 1.1), (l1, 1.1), (l1 + l2, 0.9)]
            }
            DriftKind::Stationary => vec![(0, 1.0)],
        }
    }

    /// Indices of the first sample after each sudden jump.
    pub fn jumps(&self) -> Vec<usize> {
        match self.kind {
            DriftKind::Abrupt => vec![self.segments[0], self.segments[0] + self.segments[1]],
            _ => Vec::new(),
        }
    }
}

/// Draws segment lengths for `kind`: abrupt segments each in
/// `[len/10, 3·len/10]`; gradual hold in `[len/20, len/2]` and ramp in
/// `[len/5, len/2 − 1]`. Both keep the sum strictly below `len`.
pub fn draw_segments<R: Rng + ?Sized>(kind: DriftKind, len: usize, rng: &mut R) -> Result<Vec<usize>> {
    if kind != DriftKind::Stationary && len < 40 {
        return Err(Error::InsufficientData { needed: 40, got: len });
    }
    Ok(match kind {
        DriftKind::Abrupt => (0..3).map(|_| rng.random_range(len / 10..=3 * len / 10)).collect(),
        DriftKind::Gradual => vec![rng.random_range(len / 20..=len / 2), rng.random_range(len / 5..=len / 2 - 1)],
        DriftKind::Stationary => Vec::new(),
    })
}

/// Random segment lengths plus noise for one efficiency trajectory.
pub fn gen_profile<R: Rng + ?Sized>(kind: DriftKind, len: usize, noise_sigma: f64, rng: &mut R) -> Result<EfficiencyProfile> {
    let segments = draw_segments(kind, len, rng)?;
    let noise_seed = rng.next_u64();
    EfficiencyProfile::from_segments(kind, &segments, len, noise_sigma, noise_seed)
}

const TEACHER_HIDDEN: usize = 6;
/// Scales the teacher's hidden pre-activations; small values keep it close to linear.
const TEACHER_GAIN: f64 = 0.3;
const TEACHER_OUTPUT_GAIN: f64 = 0.07;
const TEACHER_CALIBRATION_SAMPLES: usize = 4096;
const CALIBRATION_STREAM: u64 = 0xC0FF_EE00_D15E_A5E5;

/// Fixed random smooth map from the nine inputs to (50, 150).
#[derive(Debug, Clone, PartialEq)]
pub struct Teacher {
    weights: Matrix,
    biases: Vec<f64>,
    out: Vec<f64>,
    center: f64,
    spread: f64,
}

fn normalize_inputs(x: &[f64]) -> [f64; INPUT_DIM] {
    let mut z = [0.0; INPUT_DIM];
    for ((zi, xi), s) in z.iter_mut().zip(x).zip(SENSORS.iter()) {
        *zi = 2.0 * (xi - s.low) / (s.high - s.low) - 1.0;
    }
    z
}

/// One draw from the stationary input distribution (independent uniforms).
pub fn sample_inputs<R: Rng + ?Sized>(rng: &mut R) -> [f64; INPUT_DIM] {
    let mut x = [0.0; INPUT_DIM];
    for (xi, s) in x.iter_mut().zip(SENSORS.iter()) {
        *xi = rng.random_range(s.low..=s.high);
    }
    x
}

impl Teacher {
    pub fn new(seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let weights = Matrix::from_fn(TEACHER_HIDDEN, INPUT_DIM, |_, _| rng.random_range(-1.0..=1.0));
        let biases = (0..TEACHER_HIDDEN).map(|_| rng.random_range(-0.5..=0.5)).collect();
        let out = (0..TEACHER_HIDDEN).map(|_| rng.random_range(-1.0..=1.0)).collect();
        let mut teacher = Teacher { weights, biases, out, center: 0.0, spread: 1.0 };

        let mut cal = ChaCha8Rng::seed_from_u64(seed ^ CALIBRATION_STREAM);
        let raws: Vec<f64> = (0..TEACHER_CALIBRATION_SAMPLES).map(|_| teacher.raw(&sample_inputs(&mut cal))).collect();
        let m = crate::metrics::mean(&raws);
        let sd = crate::metrics::sample_sd(&raws);
        teacher.center = m;
        teacher.spread = if sd > 1e-12 { sd } else { 1.0 };
        teacher
    }

    fn raw(&self, x: &[f64]) -> f64 {
        let z = normalize_inputs(x);
        (0..TEACHER_HIDDEN)
            .map(|j| self.out[j] * libm::tanh(TEACHER_GAIN * (dot(self.weights.row(j), &z) + self.biases[j])))
            .sum()
    }

    /// `g(x) = 100 + 50 · tanh(TEACHER_OUTPUT_GAIN · standardized raw output)`,
    /// always in (50, 150).
    pub fn eval(&self, x: &[f64]) -> f64 {
        let s = (self.raw(x) - self.center) / self.spread;
        100.0 + 50.0 * libm::tanh(TEACHER_OUTPUT_GAIN * s)
    }
}

/// Seeds and shape of one synthetic stream; regenerates it exactly.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct StreamSpec {
    pub id: usize,
    pub kind: DriftKind,
    pub len: usize,
    pub segments: Vec<usize>,
    pub eta_noise_sigma: f64,
    pub eta_noise_seed: u64,
    pub teacher_seed: u64,
    pub input_seed: u64,
    /// Observation noise sd relative to the mean noiseless `|y|`.
    pub sigma_y_rel: f64,
}

/// Ground truth that travels with a stream and is never shown to learners.
#[derive(Debug, Clone, PartialEq)]
pub struct DriftOracle {
    pub eta: Vec<f64>,
    pub eta_clean: Vec<f64>,
    pub breakpoints: Vec<(usize, f64)>,
    pub jumps: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DriftStream {
    pub spec: StreamSpec,
    pub stream: Stream,
    pub oracle: DriftOracle,
}

const OBSERVATION_STREAM: u64 = 0x0B5E_7A71_0000_0003;

impl StreamSpec {
    /// Stream with a freshly drawn profile for `kind`.
    pub fn draw<R: Rng + ?Sized>(id: usize, kind: DriftKind, len: usize, params: &NoiseParams, rng: &mut R) -> Result<Self> {
        let segments = draw_segments(kind, len, rng)?;
        Ok(StreamSpec {
            id,
            kind,
            len,
            segments,
            eta_noise_sigma: params.eta_noise_sigma,
            eta_noise_seed: rng.next_u64(),
            teacher_seed: rng.next_u64(),
            input_seed: rng.next_u64(),
            sigma_y_rel: params.sigma_y_rel,
        })
    }

    pub fn profile(&self) -> Result<EfficiencyProfile> {
        EfficiencyProfile::from_segments(self.kind, &self.segments, self.len, self.eta_noise_sigma, self.eta_noise_seed)
    }

    pub fn generate(&self) -> Result<DriftStream> {
        if self.len == 0 {
            return Err(Error::InsufficientData { needed: 1, got: 0 });
        }
        if !self.sigma_y_rel.is_finite() || self.sigma_y_rel < 0.0 {
            return Err(Error::InvalidConfig("sigma_y_rel must be >= 0"));
        }
        let profile = self.profile()?;
        let teacher = Teacher::new(self.teacher_seed);
        let mut rng = ChaCha8Rng::seed_from_u64(self.input_seed);
        let mut xs = Vec::with_capacity(self.len * INPUT_DIM);
        let mut clean_y = Vec::with_capacity(self.len);
        for &eta in profile.values() {
            let x = sample_inputs(&mut rng);
            clean_y.push(eta * teacher.eval(&x));
            xs.extend_from_slice(&x);
        }
        let mut y = clean_y.clone();
        if self.sigma_y_rel > 0.0 {
            let scale = crate::metrics::mean(&clean_y.iter().map(|v| libm::fabs(*v)).collect::<Vec<_>>());
            let normal =
                Normal::new(0.0, self.sigma_y_rel * scale).map_err(|_| Error::InvalidConfig("observation noise"))?;
            let mut noise = ChaCha8Rng::seed_from_u64(self.input_seed ^ OBSERVATION_STREAM);
            y.iter_mut().for_each(|v| *v += normal.sample(&mut noise));
        }
        let stream = Stream::new(Matrix::from_vec(self.len, INPUT_DIM, xs)?, Matrix::from_vec(self.len, 1, y)?)?;
        let oracle = DriftOracle {
            eta: profile.values().to_vec(),
            eta_clean: profile.clean().to_vec(),
            breakpoints: profile.breakpoints(),
            jumps: profile.jumps(),
        };
        Ok(DriftStream { spec: self.clone(), stream, oracle })
    }
}

/// Free-function form of [`StreamSpec::generate`].
pub fn gen_stream(spec: &StreamSpec) -> Result<DriftStream> {
    spec.generate()
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct NoiseParams {
    pub eta_noise_sigma: f64,
    pub sigma_y_rel: f64,
}

impl Default for NoiseParams {
    fn default() -> Self {
        NoiseParams { eta_noise_sigma: DEFAULT_ETA_NOISE, sigma_y_rel: DEFAULT_SIGMA_Y_REL }
    }
}

/// `n_abrupt` abrupt specs followed by `n_gradual` gradual ones, ids in order,
/// all seeds drawn from one ChaCha8 stream seeded with `base_seed`.
pub fn gen_corpus(n_abrupt: usize, n_gradual: usize, base_seed: u64, len: usize, params: &NoiseParams) -> Result<Vec<StreamSpec>> {
    let mut rng = ChaCha8Rng::seed_from_u64(base_seed);
    let kinds = core::iter::repeat_n(DriftKind::Abrupt, n_abrupt).chain(core::iter::repeat_n(DriftKind::Gradual, n_gradual));
    kinds.enumerate().map(|(id, kind)| StreamSpec::draw(id, kind, len, params, &mut rng)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn abrupt_breakpoints_hold_exactly() {
        let p = EfficiencyProfile::from_segments(DriftKind::Abrupt, &[300, 400, 500], 2000, 0.0, 0).unwrap();
        for (i, v) in p.breakpoints() {
            assert!((p.clean()[i] - v).abs() < 1e-12, "t={i}");
        }
        assert_eq!(p.jumps(), vec![300, 700]);
        assert!((p.clean()[299] - 0.9).abs() < 1e-12 && (p.clean()[300] - 1.1).abs() < 1e-12);
        assert!((p.clean()[1199] - 1.1).abs() < 1e-12);
        assert!(p.clean().iter().all(|e| (0.8..=1.2).contains(e)));
    }

    #[test]
    fn gradual_endpoints() {
        let p = EfficiencyProfile::from_segments(DriftKind::Gradual, &[200, 800], 2000, 0.0, 0).unwrap();
        assert_eq!(p.clean()[0], 1.1);
        assert!((p.clean()[1999] - 0.9).abs() < 1e-12);
        for (i, v) in p.breakpoints() {
            assert!((p.clean()[i] - v).abs() < 1e-12);
        }
        assert!(p.jumps().is_empty());
    }

    #[test]
    fn bad_segments_rejected() {
        assert!(EfficiencyProfile::from_segments(DriftKind::Abrupt, &[1000, 500, 500], 2000, 0.0, 0).is_err());
        assert!(EfficiencyProfile::from_segments(DriftKind::Gradual, &[10], 2000, 0.0, 0).is_err());
    }

    #[test]
    fn teacher_stays_in_range() {
        let t = Teacher::new(3);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..2000 {
            let g = t.eval(&sample_inputs(&mut rng));
            assert!(g > 50.0 && g < 150.0);
        }
    }

    #[test]
    fn corpus_counts_and_ids() {
        let c = gen_corpus(265, 235, 1, 2000, &NoiseParams::default()).unwrap();
        assert_eq!(c.len(), 500);
        assert_eq!(c.iter().filter(|s| s.kind == DriftKind::Abrupt).count(), 265);
        assert!(c.iter().enumerate().all(|(i, s)| s.id == i));
        assert!(gen_corpus(0, 0, 1, 2000, &NoiseParams::default()).unwrap().is_empty());
    }
}
