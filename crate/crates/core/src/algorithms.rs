//! The four compared algorithms behind one entry point.

use alloc::sync::Arc;
use alloc::vec::Vec;

use crate::controller::{run_stream, ControllerConfig};
use crate::elm::ElmModel;
use crate::error::{Error, Result};
use crate::feature_map::{HiddenLayer, Standardizer};
use crate::matrix::Matrix;
use crate::monitor::{PairedRegistration, Policy};
use crate::oselm::OselmState;
use crate::prequential::{run_prequential, Prediction, PrequentialLearner, Selector, StepRecord};
use crate::stream::Stream;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Algorithm {
    StaticElm,
    Oselm,
    PairedLearner,
    AlternatingLearners,
}

impl Algorithm {
    pub const ALL: [Algorithm; 4] =
        [Algorithm::StaticElm, Algorithm::Oselm, Algorithm::PairedLearner, Algorithm::AlternatingLearners];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::StaticElm => "static_elm",
            Algorithm::Oselm => "oselm",
            Algorithm::PairedLearner => "paired_learner",
            Algorithm::AlternatingLearners => "alternating_learners",
        }
    }
}

impl core::str::FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or(Error::InvalidConfig("unknown algorithm"))
    }
}

/// Batch network trained once on the initial data and never updated.
#[derive(Debug, Clone)]
pub struct StaticElm {
    cfg: ControllerConfig,
    scaler: Standardizer,
    target_scaler: Standardizer,
    model: ElmModel,
    t: usize,
}

impl StaticElm {
    pub fn init(cfg: ControllerConfig, x_init: &Matrix, y_init: &Matrix) -> Result<Self> {
        cfg.validate()?;
        let scaler = Standardizer::fit(x_init)?;
        let xs = scaler.transform(x_init)?;
        let layer = Arc::new(HiddenLayer::new(cfg.layer_spec(xs.cols()))?);
        let target_scaler = cfg.target_scaler(y_init)?;
        let model = ElmModel::train(layer, &xs, &target_scaler.transform(y_init)?, cfg.lambda)?;
        Ok(StaticElm { cfg, scaler, target_scaler, model, t: x_init.rows() })
    }
}

impl PrequentialLearner for StaticElm {
    fn predict(&self, xb: &Matrix) -> Result<Prediction> {
        let emitted = self.target_scaler.inverse_transform(&self.model.predict(&self.scaler.transform(xb)?)?)?;
        Ok(Prediction { index: self.t, emitted, short: None, selector: Selector::Static })
    }

    fn learn(&mut self, prediction: Prediction, _xb: &Matrix, yb: &Matrix) -> Result<StepRecord> {
        if prediction.index != self.t {
            return Err(Error::InvalidConfig("prediction does not belong to the current step"));
        }
        let err_l = self.cfg.metric.eval(&prediction.emitted, yb)?;
        self.t += yb.rows();
        Ok(StepRecord {
            index: prediction.index,
            y_true: yb.as_slice().to_vec(),
            y_pred: prediction.emitted.into_vec(),
            err_l,
            err_s: None,
            q_bit: None,
            reset: false,
            reset_cause: None,
            selector: Selector::Static,
            t0: 0,
        })
    }

    fn position(&self) -> usize {
        self.t
    }
}

/// Online network updated on every batch and never reset.
#[derive(Debug, Clone)]
pub struct PlainOselm {
    cfg: ControllerConfig,
    scaler: Standardizer,
    target_scaler: Standardizer,
    state: OselmState,
    t: usize,
}

impl PlainOselm {
    pub fn init(cfg: ControllerConfig, x_init: &Matrix, y_init: &Matrix) -> Result<Self> {
        cfg.validate()?;
        let scaler = Standardizer::fit(x_init)?;
        let xs = scaler.transform(x_init)?;
        let layer = Arc::new(HiddenLayer::new(cfg.layer_spec(xs.cols()))?);
        let target_scaler = cfg.target_scaler(y_init)?;
        let state = OselmState::init(layer, &xs, &target_scaler.transform(y_init)?, cfg.lambda)?;
        Ok(PlainOselm { cfg, scaler, target_scaler, state, t: x_init.rows() })
    }

    pub fn state(&self) -> &OselmState {
        &self.state
    }
}

impl PrequentialLearner for PlainOselm {
    fn predict(&self, xb: &Matrix) -> Result<Prediction> {
        let emitted = self.target_scaler.inverse_transform(&self.state.predict(&self.scaler.transform(xb)?)?)?;
        Ok(Prediction { index: self.t, emitted, short: None, selector: Selector::L1 })
    }

    fn learn(&mut self, prediction: Prediction, xb: &Matrix, yb: &Matrix) -> Result<StepRecord> {
        if prediction.index != self.t {
            return Err(Error::InvalidConfig("prediction does not belong to the current step"));
        }
        let err_l = self.cfg.metric.eval(&prediction.emitted, yb)?;
        self.state.update(&self.scaler.transform(xb)?, &self.target_scaler.transform(yb)?)?;
        self.t += yb.rows();
        Ok(StepRecord {
            index: prediction.index,
            y_true: yb.as_slice().to_vec(),
            y_pred: prediction.emitted.into_vec(),
            err_l,
            err_s: None,
            q_bit: None,
            reset: false,
            reset_cause: None,
            selector: Selector::L1,
            t0: 0,
        })
    }

    fn position(&self) -> usize {
        self.t
    }
}

fn initial_split(cfg: &ControllerConfig, stream: &Stream) -> Result<(Matrix, Matrix)> {
    let n0 = cfg.initial_len();
    if stream.len() < n0 {
        return Err(Error::InsufficientData { needed: n0, got: stream.len() });
    }
    Ok(stream.slice(0, n0))
}

/// Runs `algorithm` prequentially over `stream`. `cfg.policy` is ignored:
/// the paired learner always uses `paired`, alternating learners always use
/// [`Policy::Alternating`].
pub fn run_algorithm(
    algorithm: Algorithm,
    cfg: &ControllerConfig,
    paired: PairedRegistration,
    stream: &Stream,
) -> Result<Vec<StepRecord>> {
    match algorithm {
        Algorithm::StaticElm => {
            let (x0, y0) = initial_split(cfg, stream)?;
            let mut l = StaticElm::init(cfg.clone(), &x0, &y0)?;
            run_prequential(&mut l, stream, x0.rows(), cfg.batch_size)
        }
        Algorithm::Oselm => {
            let (x0, y0) = initial_split(cfg, stream)?;
            let mut l = PlainOselm::init(cfg.clone(), &x0, &y0)?;
            run_prequential(&mut l, stream, x0.rows(), cfg.batch_size)
        }
        Algorithm::PairedLearner => {
            let cfg = ControllerConfig { policy: Policy::Paired(paired), ..cfg.clone() };
            run_stream(&cfg, stream)
        }
        Algorithm::AlternatingLearners => {
            let cfg = ControllerConfig { policy: Policy::Alternating, ..cfg.clone() };
            run_stream(&cfg, stream)
        }
    }
}
