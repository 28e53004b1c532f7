//! Model types and surface evaluation.

use alloc::vec::Vec;
use core::ops::{Add, Mul, Neg, Sub};

use crate::error::{Error, Result};
use crate::exec::{Executor, Serial};
use crate::math;

/// A point in normalized image coordinates: `x1` along rows, `x2` along columns.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Vec2 {
    pub x1: f64,
    pub x2: f64,
}

impl Vec2 {
    pub const fn new(x1: f64, x2: f64) -> Self {
        Self { x1, x2 }
    }

    pub fn is_finite(self) -> bool {
        self.x1.is_finite() && self.x2.is_finite()
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    fn add(self, rhs: Vec2) -> Vec2 {
        Vec2::new(self.x1 + rhs.x1, self.x2 + rhs.x2)
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, rhs: Vec2) -> Vec2 {
        Vec2::new(self.x1 - rhs.x1, self.x2 - rhs.x2)
    }
}

impl Neg for Vec2 {
    type Output = Vec2;
    fn neg(self) -> Vec2 {
        Vec2::new(-self.x1, -self.x2)
    }
}

impl Mul<f64> for Vec2 {
    type Output = Vec2;
    fn mul(self, k: f64) -> Vec2 {
        Vec2::new(self.x1 * k, self.x2 * k)
    }
}

/// Lower-triangular factor `L = [[l11, 0], [l21, l22]]` with a strictly
/// positive diagonal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CholFactor {
    l11: f64,
    l21: f64,
    l22: f64,
}

impl CholFactor {
    pub fn new(l11: f64, l21: f64, l22: f64) -> Result<Self> {
        if !(l11.is_finite() && l22.is_finite() && l11 > 0.0 && l22 > 0.0) || !l21.is_finite() {
            return Err(Error::InvalidCholesky { l11, l22 });
        }
        Ok(Self { l11, l21, l22 })
    }

    pub const fn identity() -> Self {
        Self {
            l11: 1.0,
            l21: 0.0,
            l22: 1.0,
        }
    }

    pub fn l11(&self) -> f64 {
        self.l11
    }

    pub fn l21(&self) -> f64 {
        self.l21
    }

    pub fn l22(&self) -> f64 {
        self.l22
    }

    pub fn precision(&self) -> SymMatrix2 {
        precision_matrix(self)
    }
}

/// Symmetric 2×2 matrix `[[a11, a12], [a12, a22]]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymMatrix2 {
    pub a11: f64,
    pub a12: f64,
    pub a22: f64,
}

impl SymMatrix2 {
    pub const fn new(a11: f64, a12: f64, a22: f64) -> Self {
        Self { a11, a12, a22 }
    }

    pub const fn identity() -> Self {
        Self::new(1.0, 0.0, 1.0)
    }

    pub fn det(&self) -> f64 {
        self.a11 * self.a22 - self.a12 * self.a12
    }

    pub fn trace(&self) -> f64 {
        self.a11 + self.a22
    }

    pub fn is_positive_definite(&self) -> bool {
        self.a11 > 0.0 && self.det() > 0.0
    }

    /// `dᵀ·A·d`.
    pub fn quad_form(&self, d: Vec2) -> f64 {
        self.a11 * d.x1 * d.x1 + 2.0 * self.a12 * d.x1 * d.x2 + self.a22 * d.x2 * d.x2
    }
}

/// One weighted Gaussian bell. The weight may be negative.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianComponent {
    pub w: f64,
    pub mu: Vec2,
    pub chol: CholFactor,
}

impl GaussianComponent {
    pub fn new(w: f64, mu: Vec2, chol: CholFactor) -> Self {
        Self { w, mu, chol }
    }

    /// `(w, μ1, μ2, l11, l21, l22)`, the layout used by parameter vectors and
    /// model files.
    pub fn to_array(&self) -> [f64; 6] {
        [
            self.w,
            self.mu.x1,
            self.mu.x2,
            self.chol.l11,
            self.chol.l21,
            self.chol.l22,
        ]
    }

    pub fn from_array(p: [f64; 6]) -> Result<Self> {
        let chol = CholFactor::new(p[3], p[4], p[5])?;
        if !(p[0].is_finite() && p[1].is_finite() && p[2].is_finite()) {
            return Err(Error::InvalidComponent {
                index: 0,
                reason: "non-finite weight or center",
            });
        }
        Ok(Self::new(p[0], Vec2::new(p[1], p[2]), chol))
    }
}

/// An `m`-component model bound to an `H×W` reference grid.
#[derive(Debug, Clone, PartialEq)]
pub struct GmModel {
    components: Vec<GaussianComponent>,
    height: usize,
    width: usize,
}

impl GmModel {
    pub fn new(components: Vec<GaussianComponent>, height: usize, width: usize) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::NoComponents);
        }
        if height == 0 || width == 0 {
            return Err(Error::InvalidDimensions { height, width });
        }
        for (index, c) in components.iter().enumerate() {
            if !(c.w.is_finite() && c.mu.is_finite()) {
                return Err(Error::InvalidComponent {
                    index,
                    reason: "non-finite weight or center",
                });
            }
        }
        Ok(Self {
            components,
            height,
            width,
        })
    }

    pub fn components(&self) -> &[GaussianComponent] {
        &self.components
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    /// Always false; a model has at least one component.
    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn parameter_count(&self) -> usize {
        parameter_size(self.len()).expect("model is never empty")
    }

    /// Returns a copy with every component mapped through `f`.
    pub fn map_components(&self, f: impl FnMut(&GaussianComponent) -> GaussianComponent) -> Self {
        Self {
            components: self.components.iter().map(f).collect(),
            height: self.height,
            width: self.width,
        }
    }
}

/// Row-major `H×W` grid of intensities.
#[derive(Debug, Clone, PartialEq)]
pub struct ImageGrid {
    height: usize,
    width: usize,
    pixels: Vec<f64>,
}

impl ImageGrid {
    pub fn new(height: usize, width: usize, pixels: Vec<f64>) -> Result<Self> {
        if height == 0 || width == 0 {
            return Err(Error::InvalidDimensions { height, width });
        }
        if pixels.len() != height * width {
            return Err(Error::PixelCount {
                expected: height * width,
                found: pixels.len(),
            });
        }
        Ok(Self {
            height,
            width,
            pixels,
        })
    }

    pub fn filled(height: usize, width: usize, value: f64) -> Result<Self> {
        Self::new(height, width, alloc::vec![value; height * width])
    }

    /// Builds a grid from `f(row, col)` with 0-based indices.
    pub fn from_fn(
        height: usize,
        width: usize,
        mut f: impl FnMut(usize, usize) -> f64,
    ) -> Result<Self> {
        let mut pixels = Vec::with_capacity(height * width);
        for r in 0..height {
            for c in 0..width {
                pixels.push(f(r, c));
            }
        }
        Self::new(height, width, pixels)
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.height, self.width)
    }

    pub fn pixels(&self) -> &[f64] {
        &self.pixels
    }

    pub fn into_pixels(self) -> Vec<f64> {
        self.pixels
    }

    /// 0-based access.
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.pixels[row * self.width + col]
    }

    pub fn row(&self, row: usize) -> &[f64] {
        &self.pixels[row * self.width..(row + 1) * self.width]
    }

    /// Index of the first pixel outside `[0, 1]`, if any.
    pub fn first_out_of_unit_range(&self) -> Option<usize> {
        self.pixels.iter().position(|&p| !(0.0..=1.0).contains(&p))
    }

    pub fn clamped(&self) -> Self {
        Self {
            height: self.height,
            width: self.width,
            pixels: self.pixels.iter().map(|p| p.clamp(0.0, 1.0)).collect(),
        }
    }
}

/// Normalized coordinate of the 1-based pixel `(r, c)`: `(r/H, c/W)`.
pub fn pixel_coords(r: usize, c: usize, height: usize, width: usize) -> Result<Vec2> {
    if r == 0 || c == 0 || r > height || c > width {
        return Err(Error::PixelOutOfRange {
            row: r,
            col: c,
            height,
            width,
        });
    }
    Ok(coord_unchecked(r, c, height, width))
}

#[inline(always)]
pub(crate) fn coord_unchecked(r: usize, c: usize, height: usize, width: usize) -> Vec2 {
    Vec2::new(r as f64 / height as f64, c as f64 / width as f64)
}

/// `A = L·Lᵀ`.
pub fn precision_matrix(chol: &CholFactor) -> SymMatrix2 {
    SymMatrix2 {
        a11: chol.l11 * chol.l11,
        a12: chol.l11 * chol.l21,
        a22: chol.l21 * chol.l21 + chol.l22 * chol.l22,
    }
}

/// Unweighted bell value `exp(−|Lᵀ(x − μ)|²)`, in `(0, 1]`.
pub fn eval_gaussian(comp: &GaussianComponent, x: Vec2) -> f64 {
    let d = x - comp.mu;
    let u1 = comp.chol.l11 * d.x1 + comp.chol.l21 * d.x2;
    let u2 = comp.chol.l22 * d.x2;
    math::exp(-(u1 * u1 + u2 * u2))
}

/// `Σ wᵢ·Gᵢ(x)`, unclamped.
pub fn eval_model(model: &GmModel, x: Vec2) -> f64 {
    model
        .components
        .iter()
        .map(|c| c.w * eval_gaussian(c, x))
        .sum()
}

/// Evaluates the model on its own `H×W` pixel grid.
pub fn render(model: &GmModel) -> ImageGrid {
    render_with(&Serial, model)
}

pub fn render_with<E: Executor>(exec: &E, model: &GmModel) -> ImageGrid {
    let (h, w) = (model.height, model.width);
    let rows = exec.map_tasks(h, |r| {
        (1..=w)
            .map(|c| eval_model(model, coord_unchecked(r + 1, c, h, w)))
            .collect::<Vec<f64>>()
    });
    let pixels = rows.into_iter().flatten().collect();
    ImageGrid {
        height: h,
        width: w,
        pixels,
    }
}

/// Number of scalar parameters of an `m`-component model.
pub fn parameter_size(m: usize) -> Result<usize> {
    if m == 0 {
        return Err(Error::NoComponents);
    }
    Ok(6 * m)
}
