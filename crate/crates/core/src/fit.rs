//! The fitting loop.
//!
//! Each epoch walks the targets in mini-batches. For every batch the loss
//! gradient (with the peak term taken over that batch) drives one Adam step,
//! followed by projection of the Cholesky diagonals onto `[floor, ∞)`. After
//! the epoch the loss over the whole target set is recorded.
//!
//! Fitting a group of images yields a common model; fitting a single image
//! warm-started from a common model ([`InitStrategy::FromModel`]) yields a
//! personal one.

use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::adam::{adam_step, AdamConfig, AdamState};
use crate::error::{Error, Result};
use crate::exec::{Executor, Serial};
use crate::kernel;
use crate::loss::LossReport;
use crate::model::{CholFactor, GaussianComponent, GmModel, ImageGrid, Vec2};
use crate::params::project_constraints;

// Keeps the shuffle stream apart from the initialization stream.
const SHUFFLE_STREAM: u64 = 0x9e37_79b9_7f4a_7c15;

#[derive(Debug, Clone, PartialEq)]
pub enum InitStrategy {
    /// Seeded random components, see [`init_model`].
    Random,
    /// Start from a copy of an existing model.
    FromModel(GmModel),
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitConfig {
    pub epochs: usize,
    /// Weight of the peak-absolute-error term.
    pub alpha: f64,
    pub adam: AdamConfig,
    pub batch_size: usize,
    pub seed: u64,
    /// Lower bound enforced on `l11` and `l22` after every step.
    pub l_diag_floor: f64,
    pub init: InitStrategy,
    /// Component count for random initialization; ignored for `FromModel`.
    pub m: usize,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self {
            epochs: 2000,
            alpha: 0.1,
            adam: AdamConfig::default(),
            batch_size: 256,
            seed: 0,
            l_diag_floor: 1e-6,
            init: InitStrategy::Random,
            m: 80,
        }
    }
}

impl FitConfig {
    pub fn validate(&self) -> Result<()> {
        let a = &self.adam;
        let checks: [(bool, &'static str); 8] = [
            (self.epochs >= 1, "epochs must be at least 1"),
            (
                self.alpha.is_finite() && self.alpha >= 0.0,
                "alpha must be finite and non-negative",
            ),
            (
                a.learning_rate.is_finite() && a.learning_rate > 0.0,
                "learning rate must be finite and positive",
            ),
            (a.beta1 > 0.0 && a.beta1 < 1.0, "beta1 must lie in (0, 1)"),
            (a.beta2 > 0.0 && a.beta2 < 1.0, "beta2 must lie in (0, 1)"),
            (
                a.epsilon.is_finite() && a.epsilon > 0.0,
                "adam epsilon must be finite and positive",
            ),
            (self.batch_size >= 1, "batch size must be at least 1"),
            (
                self.l_diag_floor.is_finite() && self.l_diag_floor > 0.0,
                "diagonal floor must be finite and positive",
            ),
        ];
        for (ok, msg) in checks {
            if !ok {
                return Err(Error::InvalidConfig(msg));
            }
        }
        if matches!(self.init, InitStrategy::Random) && self.m == 0 {
            return Err(Error::InvalidConfig("component count must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpochLoss {
    /// 1-based.
    pub epoch: usize,
    pub report: LossReport,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    pub model: GmModel,
    /// One entry per epoch, over the full target set.
    pub history: Vec<EpochLoss>,
    pub final_loss: LossReport,
}

/// Passed to the observer after every optimizer step (post projection).
#[derive(Debug, Clone, Copy)]
pub struct StepEvent<'a> {
    pub epoch: usize,
    /// 1-based global step count.
    pub step: u64,
    /// Flat `[w, μ1, μ2, l11, l21, l22]*` vector.
    pub params: &'a [f64],
}

/// Seeded random model: `μ` uniform in `[0, 1]²`, `l11`, `l22` uniform in
/// `[5, 15]`, `l21 = 0`, `w` uniform in `[−0.1, 0.1]`.
pub fn init_model(m: usize, height: usize, width: usize, seed: u64) -> Result<GmModel> {
    if m == 0 {
        return Err(Error::NoComponents);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let comps = (0..m)
        .map(|_| {
            let w = rng.gen_range(-0.1..=0.1);
            let mu = Vec2::new(rng.gen_range(0.0..=1.0), rng.gen_range(0.0..=1.0));
            let l11 = rng.gen_range(5.0..=15.0);
            let l22 = rng.gen_range(5.0..=15.0);
            GaussianComponent::new(
                w,
                mu,
                CholFactor::new(l11, 0.0, l22).expect("diagonal in [5, 15]"),
            )
        })
        .collect();
    GmModel::new(comps, height, width)
}

pub fn fit(targets: &[ImageGrid], cfg: &FitConfig) -> Result<FitResult> {
    fit_with(&Serial, targets, cfg, |_| {})
}

/// [`fit`] on a chosen executor, calling `observer` after every step.
pub fn fit_with<E, F>(
    exec: &E,
    targets: &[ImageGrid],
    cfg: &FitConfig,
    mut observer: F,
) -> Result<FitResult>
where
    E: Executor,
    F: FnMut(&StepEvent<'_>),
{
    cfg.validate()?;
    let first = targets.first().ok_or(Error::EmptyTargets)?;
    let (height, width) = first.dims();
    let start = match &cfg.init {
        InitStrategy::Random => init_model(cfg.m, height, width, cfg.seed)?,
        InitStrategy::FromModel(model) => {
            if model.height() != height || model.width() != width {
                return Err(Error::DimensionMismatch {
                    index: 0,
                    expected_h: model.height(),
                    expected_w: model.width(),
                    found_h: height,
                    found_w: width,
                });
            }
            model.clone()
        }
    };
    let all: Vec<&ImageGrid> = targets.iter().collect();
    kernel::check_targets(&all, height, width)?;

    let mut params = start.to_params();
    let mut state = AdamState::new(params.len());
    let mut order: Vec<usize> = (0..targets.len()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ SHUFFLE_STREAM);
    let single_batch = targets.len() <= cfg.batch_size;
    let mut history = Vec::with_capacity(cfg.epochs);
    let mut batch: Vec<&ImageGrid> = Vec::with_capacity(cfg.batch_size.min(targets.len()));

    for epoch in 1..=cfg.epochs {
        if single_batch {
            // Shuffling a lone batch changes nothing but the summation order,
            // so keep the canonical order. The forward pass of the step then
            // equals the full-set loss of the previous epoch's model.
            let (report, grad) =
                kernel::evaluate(exec, &params, height, width, &all, cfg.alpha, true);
            if epoch > 1 {
                history.push(EpochLoss {
                    epoch: epoch - 1,
                    report,
                });
            }
            step(
                &mut params,
                &grad.expect("gradient requested"),
                &mut state,
                cfg,
            );
            observer(&StepEvent {
                epoch,
                step: state.t,
                params: &params,
            });
            continue;
        }

        order.shuffle(&mut rng);
        for chunk in order.chunks(cfg.batch_size) {
            batch.clear();
            batch.extend(chunk.iter().map(|&i| &targets[i]));
            let (_, grad) = kernel::evaluate(exec, &params, height, width, &batch, cfg.alpha, true);
            step(
                &mut params,
                &grad.expect("gradient requested"),
                &mut state,
                cfg,
            );
            observer(&StepEvent {
                epoch,
                step: state.t,
                params: &params,
            });
        }
        let (report, _) = kernel::evaluate(exec, &params, height, width, &all, cfg.alpha, false);
        history.push(EpochLoss { epoch, report });
    }
    if single_batch {
        let (report, _) = kernel::evaluate(exec, &params, height, width, &all, cfg.alpha, false);
        history.push(EpochLoss {
            epoch: cfg.epochs,
            report,
        });
    }

    let model = GmModel::from_params(&params, height, width)?;
    let final_loss = history.last().expect("epochs >= 1").report;
    Ok(FitResult {
        model,
        history,
        final_loss,
    })
}

fn step(params: &mut [f64], grad: &[f64], state: &mut AdamState, cfg: &FitConfig) {
    adam_step(params, grad, state, &cfg.adam);
    project_constraints(params, cfg.l_diag_floor);
}
