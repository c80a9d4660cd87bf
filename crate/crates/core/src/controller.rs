//! The alternating-learners state machine.
//!
//! A long-memory pair (online random-feature network `L1`, linear fallback
//! `L2`) learns everything since the current concept began at `t0`; a
//! short-memory network `S` is refit on the last `window` samples. Every batch
//! both predict, a comparison bit is queued, and when the queue says the
//! short learner keeps winning the long window is cut back to the short one
//! and the long learners restart from it.
//!
//! Step order: predict, compare, register (pop past capacity), update `L1`,
//! `L2`, slide the short window and refit `S`, then apply the reset rule. A
//! reset rebuilds `L1`/`L2` from the slid window, so right after a reset the
//! long window is exactly the short one: `t0 = t − window`.

use alloc::collections::VecDeque;
use alloc::sync::Arc;
use alloc::vec::Vec;

use crate::elm::ElmModel;
use crate::error::{Error, Result};
use crate::feature_map::{Activation, HiddenLayer, LayerSpec, Standardizer};
use crate::linear::LinearModel;
use crate::matrix::Matrix;
use crate::metrics::ErrorMetric;
use crate::monitor::{Monitor, Policy};
use crate::numerics::DEFAULT_RIDGE;
use crate::oselm::OselmState;
use crate::prequential::{run_prequential, Prediction, PrequentialLearner, ResetCause, Selector, StepRecord};
use crate::stream::Stream;

/// Seed offset for the short learner's layer when layers are not shared.
const SHORT_LAYER_SEED_OFFSET: u64 = 0x5157_0000_0000_0001;

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct ControllerConfig {
    /// Short window length `W`, also the queue capacity.
    pub window: usize,
    /// Reset threshold on the fraction of ones in the queue, in (0, 1).
    pub delta: f64,
    /// Acceptable per-batch error, in the unit of `metric` (percent for MAPE).
    pub tau: f64,
    /// leastWait `n0`: the queue must be longer than this before a reset.
    pub least_wait: usize,
    pub batch_size: usize,
    /// Number of batches in the initial dataset (`B0`).
    pub initial_batches: usize,
    pub lambda: f64,
    /// Hidden width `K`.
    pub width: usize,
    pub seed: u64,
    pub activation: Activation,
    pub metric: ErrorMetric,
    pub policy: Policy,
    /// `S` uses the same random layer as `L1`.
    pub share_layer: bool,
    /// Refit `L2` whenever `L1` restarts.
    pub reset_linear: bool,
    /// Learners see targets z-scored with initial-data statistics; the
    /// random features alone cannot carry a large constant offset.
    pub standardize_targets: bool,
}

impl Default for ControllerConfig {
    fn default() -> Self {
        ControllerConfig {
            window: 20,
            delta: 0.4,
            tau: 1.0,
            least_wait: 5,
            batch_size: 1,
            initial_batches: 100,
            lambda: DEFAULT_RIDGE,
            width: 30,
            seed: 0,
            activation: Activation::Sigmoid,
            metric: ErrorMetric::Mape,
            policy: Policy::Alternating,
            share_layer: true,
            reset_linear: true,
            standardize_targets: true,
        }
    }
}

impl ControllerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.window == 0 {
            return Err(Error::InvalidConfig("window must be >= 1"));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::InvalidConfig("delta must lie in (0, 1)"));
        }
        if !self.tau.is_finite() || self.tau <= 0.0 {
            return Err(Error::InvalidConfig("tau must be > 0"));
        }
        if self.least_wait == 0 || self.least_wait > self.window {
            return Err(Error::InvalidConfig("least_wait must satisfy 1 <= n0 <= window"));
        }
        if self.batch_size == 0 || self.initial_batches == 0 {
            return Err(Error::InvalidConfig("batch_size and initial_batches must be >= 1"));
        }
        if !self.lambda.is_finite() || self.lambda <= 0.0 {
            return Err(Error::InvalidConfig("lambda must be > 0"));
        }
        if self.width == 0 {
            return Err(Error::InvalidConfig("width must be >= 1"));
        }
        Ok(())
    }

    /// Number of labeled samples used for initial training (`B0 · b`).
    pub fn initial_len(&self) -> usize {
        self.initial_batches * self.batch_size
    }

    pub fn layer_spec(&self, input_dim: usize) -> LayerSpec {
        LayerSpec { input_dim, width: self.width, seed: self.seed, activation: self.activation }
    }

    /// Frozen target transform fitted on `y_init`, or the identity.
    pub fn target_scaler(&self, y_init: &Matrix) -> Result<Standardizer> {
        if self.standardize_targets {
            Standardizer::fit(y_init)
        } else {
            Ok(Standardizer::identity(y_init.cols()))
        }
    }

    fn short_layer_spec(&self, input_dim: usize) -> LayerSpec {
        let mut spec = self.layer_spec(input_dim);
        if !self.share_layer {
            spec.seed = spec.seed.wrapping_add(SHORT_LAYER_SEED_OFFSET);
        }
        spec
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ResetEvent {
    /// Index of the step (first sample of its batch) at which the reset fired.
    pub index: usize,
    pub cause: ResetCause,
}

/// Running state of one stream.
#[derive(Debug, Clone)]
pub struct Controller {
    cfg: ControllerConfig,
    scaler: Standardizer,
    target_scaler: Standardizer,
    l1: OselmState,
    l2: LinearModel,
    short: ElmModel,
    /// Last `window` standardized inputs and standardized targets.
    window_x: VecDeque<Vec<f64>>,
    window_y: VecDeque<Vec<f64>>,
    monitor: Monitor,
    t0: usize,
    t: usize,
    /// Index of the step being learned; reset events are logged against it.
    step_index: usize,
    resets: Vec<ResetEvent>,
}

impl Controller {
    /// Trains `L1`, `L2` on all initial samples and `S` on the last
    /// `min(window, n)` of them. Inputs and targets are standardized with
    /// statistics of the initial data, frozen from then on.
    pub fn init_phase(cfg: ControllerConfig, x_init: &Matrix, y_init: &Matrix) -> Result<Self> {
        cfg.validate()?;
        let n = x_init.rows();
        if n == 0 {
            return Err(Error::InsufficientData { needed: 1, got: 0 });
        }
        if y_init.rows() != n {
            return Err(Error::DimensionMismatch { what: "initial targets", expected: n, found: y_init.rows() });
        }
        let scaler = Standardizer::fit(x_init)?;
        let xs = scaler.transform(x_init)?;
        let target_scaler = cfg.target_scaler(y_init)?;
        let y_init = &target_scaler.transform(y_init)?;
        let d = xs.cols();
        let layer = Arc::new(HiddenLayer::new(cfg.layer_spec(d))?);
        let short_layer =
            if cfg.share_layer { layer.clone() } else { Arc::new(HiddenLayer::new(cfg.short_layer_spec(d))?) };

        let l1 = OselmState::init(layer, &xs, y_init, cfg.lambda)?;
        let l2 = LinearModel::fit(&xs, y_init, cfg.lambda)?;
        let start = n.saturating_sub(cfg.window);
        let mut window_x = VecDeque::with_capacity(cfg.window + cfg.batch_size);
        let mut window_y = VecDeque::with_capacity(cfg.window + cfg.batch_size);
        for i in start..n {
            window_x.push_back(xs.row(i).to_vec());
            window_y.push_back(y_init.row(i).to_vec());
        }
        let short = ElmModel::train(short_layer, &xs.slice_rows(start, n), &y_init.slice_rows(start, n), cfg.lambda)?;
        let monitor = Monitor::new(cfg.policy, cfg.window, cfg.delta, cfg.tau, cfg.least_wait);
        Ok(Controller { cfg, scaler, target_scaler, l1, l2, short, window_x, window_y, monitor, t0: 0, t: n, step_index: n, resets: Vec::new() })
    }

    /// `L1` once the long window holds at least `2K` samples, else `L2`.
    /// The paired-learner policy has no guard and always uses `L1`.
    pub fn overfit_guard(&self) -> Selector {
        select_long(self.cfg.policy, self.t - self.t0, self.cfg.width)
    }

    /// Applies the reset rule to the current queue. On reset the long window
    /// shrinks to the short one and the long learners restart from it.
    pub fn maybe_reset(&mut self) -> Result<bool> {
        if !self.monitor.should_reset() {
            return Ok(false);
        }
        self.restart_long(ResetCause::Alternation)?;
        Ok(true)
    }

    fn restart_long(&mut self, cause: ResetCause) -> Result<()> {
        let (xw, yw) = self.window_matrices();
        self.l1 = OselmState::warm_restart(self.l1.layer().clone(), &xw, &yw, self.cfg.lambda)?;
        if self.cfg.reset_linear {
            self.l2 = LinearModel::fit(&xw, &yw, self.cfg.lambda)?;
        }
        self.t0 = self.t - xw.rows();
        self.monitor.clear();
        self.resets.push(ResetEvent { index: self.step_index, cause });
        Ok(())
    }

    fn window_matrices(&self) -> (Matrix, Matrix) {
        let d = self.scaler.dim();
        let k = self.window_y.front().map_or(0, Vec::len);
        let mut x = Vec::with_capacity(self.window_x.len() * d);
        let mut y = Vec::with_capacity(self.window_y.len() * k);
        for row in &self.window_x {
            x.extend_from_slice(row);
        }
        for row in &self.window_y {
            y.extend_from_slice(row);
        }
        let n = self.window_x.len();
        (Matrix::from_vec(n, d, x).expect("window rows"), Matrix::from_vec(n, k, y).expect("window rows"))
    }

    pub fn config(&self) -> &ControllerConfig {
        &self.cfg
    }

    pub fn t(&self) -> usize {
        self.t
    }

    pub fn t0(&self) -> usize {
        self.t0
    }

    pub fn monitor(&self) -> &Monitor {
        &self.monitor
    }

    pub fn resets(&self) -> &[ResetEvent] {
        &self.resets
    }

    pub fn long_network(&self) -> &OselmState {
        &self.l1
    }

    pub fn long_linear(&self) -> &LinearModel {
        &self.l2
    }

    pub fn short_network(&self) -> &ElmModel {
        &self.short
    }

    pub fn standardizer(&self) -> &Standardizer {
        &self.scaler
    }

    pub fn target_standardizer(&self) -> &Standardizer {
        &self.target_scaler
    }

    pub fn window_len(&self) -> usize {
        self.window_x.len()
    }
}

pub(crate) fn select_long(policy: Policy, long_len: usize, width: usize) -> Selector {
    match policy {
        Policy::Paired(_) => Selector::L1,
        Policy::Alternating if long_len >= 2 * width => Selector::L1,
        Policy::Alternating => Selector::L2,
    }
}

impl PrequentialLearner for Controller {
    fn predict(&self, xb: &Matrix) -> Result<Prediction> {
        let xs = self.scaler.transform(xb)?;
        let selector = self.overfit_guard();
        let emitted = match selector {
            Selector::L2 => self.l2.predict(&xs)?,
            _ => self.l1.predict(&xs)?,
        };
        let emitted = self.target_scaler.inverse_transform(&emitted)?;
        let short = self.target_scaler.inverse_transform(&self.short.predict(&xs)?)?;
        Ok(Prediction { index: self.t, emitted, short: Some(short), selector })
    }

    fn learn(&mut self, prediction: Prediction, xb: &Matrix, yb: &Matrix) -> Result<StepRecord> {
        if prediction.index != self.t {
            return Err(Error::InvalidConfig("prediction does not belong to the current step"));
        }
        self.step_index = prediction.index;
        let b = xb.rows();
        if b == 0 || yb.rows() != b {
            return Err(Error::DimensionMismatch { what: "batch targets", expected: b, found: yb.rows() });
        }
        let short_pred = prediction.short.as_ref().expect("controller predictions carry S");
        let err_l = self.cfg.metric.eval(&prediction.emitted, yb)?;
        let err_s = self.cfg.metric.eval(short_pred, yb)?;
        let bit = self.monitor.record(err_l, err_s);
        let y_true = yb.clone();
        let will_reset = self.monitor.should_reset();

        let xs = self.scaler.transform(xb)?;
        let ys = self.target_scaler.transform(yb)?;
        let yb = &ys;
        let mut breakdown = false;
        if !will_reset {
            match self.l1.update(&xs, yb) {
                Ok(()) => {}
                Err(Error::NumericalBreakdown) => breakdown = true,
                Err(e) => return Err(e),
            }
        }
        if !will_reset || !self.cfg.reset_linear {
            match self.l2.update(&xs, yb) {
                Ok(()) => {}
                Err(Error::NumericalBreakdown) => breakdown = true,
                Err(e) => return Err(e),
            }
        }

        for i in 0..b {
            self.window_x.push_back(xs.row(i).to_vec());
            self.window_y.push_back(yb.row(i).to_vec());
        }
        while self.window_x.len() > self.cfg.window {
            self.window_x.pop_front();
            self.window_y.pop_front();
        }
        let (xw, yw) = self.window_matrices();
        self.short = ElmModel::train(self.short.layer().clone(), &xw, &yw, self.cfg.lambda)?;
        self.t += b;

        let mut cause = None;
        if self.maybe_reset()? {
            cause = Some(ResetCause::Alternation);
        } else if breakdown {
            self.restart_long(ResetCause::NumericalBreakdown)?;
            if !self.cfg.reset_linear {
                self.l2 = LinearModel::fit(&xw, &yw, self.cfg.lambda)?;
            }
            cause = Some(ResetCause::NumericalBreakdown);
        }

        Ok(StepRecord {
            index: prediction.index,
            y_true: y_true.into_vec(),
            y_pred: prediction.emitted.into_vec(),
            err_l,
            err_s: Some(err_s),
            q_bit: Some(bit),
            reset: cause.is_some(),
            reset_cause: cause,
            selector: prediction.selector,
            t0: self.t0,
        })
    }

    fn position(&self) -> usize {
        self.t
    }
}

/// Initial phase on the first `B0 · b` samples, then one step per batch.
/// A stream of exactly `B0 · b` samples yields no records.
pub fn run_stream(cfg: &ControllerConfig, stream: &Stream) -> Result<Vec<StepRecord>> {
    let n0 = cfg.initial_len();
    if stream.len() < n0 {
        return Err(Error::InsufficientData { needed: n0, got: stream.len() });
    }
    let (x0, y0) = stream.slice(0, n0);
    let mut ctl = Controller::init_phase(cfg.clone(), &x0, &y0)?;
    run_prequential(&mut ctl, stream, n0, cfg.batch_size)
}
