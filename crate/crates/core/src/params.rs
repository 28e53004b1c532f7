//! Flat parameter vectors.
//!
//! The optimizer works on a `Vec<f64>` of length `6·m` laid out per component
//! as `[w, μ1, μ2, l11, l21, l22]`. Unlike [`GmModel`], a raw vector may hold
//! an infeasible factor between an Adam step and the projection that follows.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::model::{CholFactor, GaussianComponent, GmModel, Vec2};

pub const PARAMS_PER_COMPONENT: usize = 6;

pub(crate) const W: usize = 0;
pub(crate) const MU1: usize = 1;
pub(crate) const MU2: usize = 2;
pub(crate) const L11: usize = 3;
pub(crate) const L21: usize = 4;
pub(crate) const L22: usize = 5;

impl GmModel {
    pub fn to_params(&self) -> Vec<f64> {
        self.components()
            .iter()
            .flat_map(|c| c.to_array())
            .collect()
    }

    /// Builds a model from a flat vector, validating every component.
    pub fn from_params(params: &[f64], height: usize, width: usize) -> Result<Self> {
        if params.is_empty() || params.len() % PARAMS_PER_COMPONENT != 0 {
            return Err(Error::ParamLength(params.len()));
        }
        let comps = params
            .chunks_exact(PARAMS_PER_COMPONENT)
            .enumerate()
            .map(|(index, p)| {
                let chol = CholFactor::new(p[L11], p[L21], p[L22]).map_err(|_| {
                    Error::InvalidComponent {
                        index,
                        reason: "Cholesky diagonal must be finite and strictly positive",
                    }
                })?;
                if !(p[W].is_finite() && p[MU1].is_finite() && p[MU2].is_finite()) {
                    return Err(Error::InvalidComponent {
                        index,
                        reason: "non-finite weight or center",
                    });
                }
                Ok(GaussianComponent::new(
                    p[W],
                    Vec2::new(p[MU1], p[MU2]),
                    chol,
                ))
            })
            .collect::<Result<Vec<_>>>()?;
        GmModel::new(comps, height, width)
    }
}

/// Clamps every diagonal entry of `L` to at least `floor`; `l21` and the
/// other parameters are left alone.
pub fn project_constraints(params: &mut [f64], floor: f64) {
    debug_assert!(floor > 0.0);
    for p in params.chunks_exact_mut(PARAMS_PER_COMPONENT) {
        p[L11] = p[L11].max(floor);
        p[L22] = p[L22].max(floor);
    }
}

/// [`project_constraints`] applied to a model.
pub fn project_model(model: &GmModel, floor: f64) -> GmModel {
    let mut p = model.to_params();
    project_constraints(&mut p, floor);
    GmModel::from_params(&p, model.height(), model.width())
        .expect("projection keeps the model valid")
}
