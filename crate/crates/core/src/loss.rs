//! Composite reconstruction loss `l2 + α·l_inf`.
//!
//! `l2` is the mean squared pixel error over every pixel of every target and
//! `l_inf` the peak absolute error over the same set.

use alloc::vec::Vec;

use crate::error::Result;
use crate::exec::{Executor, Serial};
use crate::kernel;
use crate::model::{GmModel, ImageGrid};

/// Location of a pixel within a target set. `image` is 0-based, `row` and
/// `col` are 1-based like pixel coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PixelIndex {
    pub image: usize,
    pub row: usize,
    pub col: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossReport {
    pub l2: f64,
    pub l_inf: f64,
    pub total: f64,
    /// First pixel (image, then row-major order) attaining `l_inf`.
    pub argmax: PixelIndex,
}

pub fn compute_loss(model: &GmModel, targets: &[ImageGrid], alpha: f64) -> Result<LossReport> {
    compute_loss_with(&Serial, model, targets, alpha)
}

pub fn compute_loss_with<E: Executor>(
    exec: &E,
    model: &GmModel,
    targets: &[ImageGrid],
    alpha: f64,
) -> Result<LossReport> {
    let refs: Vec<&ImageGrid> = targets.iter().collect();
    kernel::check_targets(&refs, model.height(), model.width())?;
    let params = model.to_params();
    let (report, _) = kernel::evaluate(
        exec,
        &params,
        model.height(),
        model.width(),
        &refs,
        alpha,
        false,
    );
    Ok(report)
}
