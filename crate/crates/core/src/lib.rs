//! Grayscale images as a weighted sum of anisotropic 2D Gaussians.
//!
//! A model holds `m` components `(w, μ, L)` where `L` is the lower-triangular
//! Cholesky factor of the component's precision matrix `A = L·Lᵀ`. Evaluated
//! at a normalized pixel coordinate `x = (r/H, c/W)` the model is
//!
//! ```text
//! f(x) = Σᵢ wᵢ · exp(−(x − μᵢ)ᵀ Lᵢ Lᵢᵀ (x − μᵢ))
//! ```
//!
//! The crate covers:
//! - evaluation and grid rendering ([`model`]),
//! - the composite MSE + peak-absolute-error loss and its analytic gradient
//!   ([`loss`], [`grad`]),
//! - Adam updates with diagonal projection and the fitting loop ([`adam`], [`fit`]),
//! - translation, scaling and rotation as parameter arithmetic, and top-k
//!   component selection ([`transform`]).
//!
//! The crate is `no_std` and only needs `alloc`. File formats, the CLI and a
//! multi-threaded [`exec::Executor`] live in the `gmface` crate.
//!
//! Coordinates: `x1` is the row axis, `x2` the column axis. Pixel indices are
//! 1-based in coordinate math and 0-based in [`ImageGrid`] storage.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod adam;
pub mod error;
pub mod exec;
pub mod fit;
pub mod grad;
mod kernel;
pub mod loss;
mod math;
pub mod model;
pub mod params;
pub mod transform;

pub use adam::{adam_step, AdamConfig, AdamState};
pub use error::{Error, Result};
pub use exec::{Executor, Serial};
pub use fit::{fit, fit_with, init_model, FitConfig, FitResult, InitStrategy, StepEvent};
pub use grad::{
    compute_gradients, compute_gradients_with, compute_mse_gradients, finite_diff_gradients,
    ComponentGradient, GradientSet,
};
pub use loss::{compute_loss, compute_loss_with, LossReport, PixelIndex};
pub use model::{
    eval_gaussian, eval_model, parameter_size, pixel_coords, precision_matrix, render, render_with,
    CholFactor, GaussianComponent, GmModel, ImageGrid, SymMatrix2, Vec2,
};
pub use params::{project_constraints, project_model, PARAMS_PER_COMPONENT};
pub use transform::{cholesky2, rotate, scale, top_k, translate, RotationSpec};
