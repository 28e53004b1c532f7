//! Image transforms carried out on the parameters.
//!
//! Each transform rewrites `(μ, A)` so that the new model evaluated at `x`
//! equals the old model at the pre-image of `x`:
//!
//! | transform | new parameters | identity |
//! |-----------|----------------|----------|
//! | translate by `t` | `μ + t` | `f'(x) = f(x − t)` |
//! | scale by `k` | `μ / k`, `k²·A` | `f'(x) = f(k·x)` |
//! | rotate by `θ` about `c` | `Fᵀ(μ + F·c − c)`, `FᵀAF` | `f'(x) = f(F(x − c) + c)` |
//!
//! with `F = [[cos θ, sin θ], [−sin θ, cos θ]]`. Weights never change.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math;
use crate::model::{CholFactor, GaussianComponent, GmModel, SymMatrix2, Vec2};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RotationSpec {
    /// Radians.
    pub theta: f64,
    pub center: Vec2,
}

impl RotationSpec {
    pub fn new(theta: f64, center: Vec2) -> Self {
        Self { theta, center }
    }

    pub fn from_degrees(degrees: f64, center: Vec2) -> Self {
        Self::new(degrees.to_radians(), center)
    }
}

pub fn translate(model: &GmModel, t: Vec2) -> GmModel {
    model.map_components(|c| GaussianComponent { mu: c.mu + t, ..*c })
}

/// `k > 1` samples the old surface at `k·x`, so the content shrinks toward
/// the origin; `k < 1` enlarges it. Non-positive `k` is rejected.
pub fn scale(model: &GmModel, k: f64) -> Result<GmModel> {
    if !(k.is_finite() && k > 0.0) {
        return Err(Error::InvalidScale(k));
    }
    let inv = 1.0 / k;
    Ok(model.map_components(|c| {
        let l = c.chol;
        GaussianComponent {
            w: c.w,
            mu: c.mu * inv,
            // k²·A = (k·L)(k·L)ᵀ
            chol: CholFactor::new(l.l11() * k, l.l21() * k, l.l22() * k)
                .expect("positive multiple of a valid factor"),
        }
    }))
}

pub fn rotate(model: &GmModel, spec: RotationSpec) -> Result<GmModel> {
    if !(spec.theta.is_finite() && spec.center.is_finite()) {
        return Err(Error::NonFinite);
    }
    let (s, c) = math::sin_cos(spec.theta);
    let ctr = spec.center;
    // F·center
    let f_ctr = Vec2::new(c * ctr.x1 + s * ctr.x2, -s * ctr.x1 + c * ctr.x2);
    let comps = model
        .components()
        .iter()
        .map(|comp| {
            let v = comp.mu + f_ctr - ctr;
            // F⁻¹ = Fᵀ
            let mu = Vec2::new(c * v.x1 - s * v.x2, s * v.x1 + c * v.x2);
            let a = comp.chol.precision();
            let rotated = SymMatrix2 {
                a11: a.a11 * c * c - 2.0 * a.a12 * c * s + a.a22 * s * s,
                a12: (a.a11 - a.a22) * c * s + a.a12 * (c * c - s * s),
                a22: a.a11 * s * s + 2.0 * a.a12 * c * s + a.a22 * c * c,
            };
            Ok(GaussianComponent::new(comp.w, mu, cholesky2(&rotated)?))
        })
        .collect::<Result<Vec<_>>>()?;
    GmModel::new(comps, model.height(), model.width())
}

/// Cholesky factor of a symmetric positive definite 2×2 matrix.
pub fn cholesky2(a: &SymMatrix2) -> Result<CholFactor> {
    if !(a.a11.is_finite() && a.a12.is_finite() && a.a22.is_finite()) || a.a11 <= 0.0 {
        return Err(Error::NotPositiveDefinite);
    }
    let l11 = math::sqrt(a.a11);
    let l21 = a.a12 / l11;
    let rest = a.a22 - l21 * l21;
    if rest <= 0.0 {
        return Err(Error::NotPositiveDefinite);
    }
    CholFactor::new(l11, l21, math::sqrt(rest)).map_err(|_| Error::NotPositiveDefinite)
}

/// Keeps the `k` components with the largest `|w|` in their original order.
/// Ties go to the lower index.
pub fn top_k(model: &GmModel, k: usize) -> Result<GmModel> {
    let m = model.len();
    if k == 0 || k > m {
        return Err(Error::TopKOutOfRange { k, m });
    }
    let comps = model.components();
    let mut order: Vec<usize> = (0..m).collect();
    // stable sort keeps lower indices first among equal magnitudes
    order.sort_by(|&i, &j| math::abs(comps[j].w).total_cmp(&math::abs(comps[i].w)));
    let mut keep = order[..k].to_vec();
    keep.sort_unstable();
    GmModel::new(
        keep.into_iter().map(|i| comps[i]).collect(),
        model.height(),
        model.width(),
    )
}
