//! Analytic gradients of the composite loss, plus a central-difference
//! oracle for checking them.
//!
//! The `l2` part is differentiated exactly. The peak term is not
//! differentiable; its subgradient `α·sign(e)·∂f/∂θ` is taken at the single
//! argmax pixel reported by the loss (first pixel on ties).

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::exec::{Executor, Serial};
use crate::kernel;
use crate::model::{GmModel, ImageGrid, Vec2};
use crate::params::{L11, L21, L22, MU1, MU2, PARAMS_PER_COMPONENT, W};

/// Partial derivatives for one component. `L`'s strict upper entry is
/// structurally zero and has no derivative.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ComponentGradient {
    pub d_w: f64,
    pub d_mu: Vec2,
    pub d_l11: f64,
    pub d_l21: f64,
    pub d_l22: f64,
}

/// Gradient of the loss, one entry per model component.
#[derive(Debug, Clone, PartialEq)]
pub struct GradientSet {
    pub components: Vec<ComponentGradient>,
}

impl GradientSet {
    pub fn from_flat(flat: &[f64]) -> Self {
        let components = flat
            .chunks_exact(PARAMS_PER_COMPONENT)
            .map(|g| ComponentGradient {
                d_w: g[W],
                d_mu: Vec2::new(g[MU1], g[MU2]),
                d_l11: g[L11],
                d_l21: g[L21],
                d_l22: g[L22],
            })
            .collect();
        Self { components }
    }

    /// Same layout as [`GmModel::to_params`].
    pub fn to_flat(&self) -> Vec<f64> {
        self.components
            .iter()
            .flat_map(|g| [g.d_w, g.d_mu.x1, g.d_mu.x2, g.d_l11, g.d_l21, g.d_l22])
            .collect()
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }
}

/// Gradient of `l2 + α·l_inf` with respect to every `(w, μ, L)` scalar.
pub fn compute_gradients(
    model: &GmModel,
    targets: &[ImageGrid],
    alpha: f64,
) -> Result<GradientSet> {
    compute_gradients_with(&Serial, model, targets, alpha)
}

pub fn compute_gradients_with<E: Executor>(
    exec: &E,
    model: &GmModel,
    targets: &[ImageGrid],
    alpha: f64,
) -> Result<GradientSet> {
    let refs: Vec<&ImageGrid> = targets.iter().collect();
    let flat = gradient_flat(
        exec,
        &model.to_params(),
        model.height(),
        model.width(),
        &refs,
        alpha,
    )?;
    Ok(GradientSet::from_flat(&flat))
}

/// Gradient of the mean squared error alone.
pub fn compute_mse_gradients(model: &GmModel, targets: &[ImageGrid]) -> Result<GradientSet> {
    compute_gradients(model, targets, 0.0)
}

pub(crate) fn gradient_flat<E: Executor>(
    exec: &E,
    params: &[f64],
    height: usize,
    width: usize,
    targets: &[&ImageGrid],
    alpha: f64,
) -> Result<Vec<f64>> {
    kernel::check_targets(targets, height, width)?;
    let (_, grad) = kernel::evaluate(exec, params, height, width, targets, alpha, true);
    Ok(grad.expect("gradient requested"))
}

/// Central differences `(loss(θ + h) − loss(θ − h)) / 2h`, one scalar at a
/// time. No constraint projection is applied to the probes.
pub fn finite_diff_gradients(
    model: &GmModel,
    targets: &[ImageGrid],
    alpha: f64,
    h: f64,
) -> Result<GradientSet> {
    if !(h.is_finite() && h > 0.0) {
        return Err(Error::InvalidStep(h));
    }
    let refs: Vec<&ImageGrid> = targets.iter().collect();
    let (height, width) = (model.height(), model.width());
    kernel::check_targets(&refs, height, width)?;
    let mut params = model.to_params();
    let loss_at = |p: &[f64]| {
        kernel::evaluate(&Serial, p, height, width, &refs, alpha, false)
            .0
            .total
    };
    let mut flat = Vec::with_capacity(params.len());
    for i in 0..params.len() {
        let orig = params[i];
        params[i] = orig + h;
        let plus = loss_at(&params);
        params[i] = orig - h;
        let minus = loss_at(&params);
        params[i] = orig;
        flat.push((plus - minus) / (2.0 * h));
    }
    Ok(GradientSet::from_flat(&flat))
}
