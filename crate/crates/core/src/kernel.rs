// Shared pixel-reduction kernel for the loss and gradient passes. Operates on
// raw parameter vectors so the finite-difference oracle can probe points that
// a validated model would reject.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::exec::{bands, Band, Executor};
use crate::loss::{LossReport, PixelIndex};
use crate::math;
use crate::model::{coord_unchecked, ImageGrid};
use crate::params::{L11, L21, L22, MU1, MU2, PARAMS_PER_COMPONENT, W};

/// Structure-of-arrays copy of the parameters for the inner loops.
pub(crate) struct Prepared {
    w: Vec<f64>,
    mu1: Vec<f64>,
    mu2: Vec<f64>,
    l11: Vec<f64>,
    l21: Vec<f64>,
    l22: Vec<f64>,
}

impl Prepared {
    pub fn new(params: &[f64]) -> Self {
        let m = params.len() / PARAMS_PER_COMPONENT;
        let mut p = Prepared {
            w: Vec::with_capacity(m),
            mu1: Vec::with_capacity(m),
            mu2: Vec::with_capacity(m),
            l11: Vec::with_capacity(m),
            l21: Vec::with_capacity(m),
            l22: Vec::with_capacity(m),
        };
        for c in params.chunks_exact(PARAMS_PER_COMPONENT) {
            p.w.push(c[W]);
            p.mu1.push(c[MU1]);
            p.mu2.push(c[MU2]);
            p.l11.push(c[L11]);
            p.l21.push(c[L21]);
            p.l22.push(c[L22]);
        }
        p
    }

    pub fn len(&self) -> usize {
        self.w.len()
    }

    /// Fills `g` with the unweighted bells at `(x1, x2)` and returns `Σ w·g`.
    #[inline]
    #[allow(clippy::needless_range_loop)]
    fn eval_into(&self, x1: f64, x2: f64, g: &mut [f64]) -> f64 {
        let mut sum = 0.0;
        for k in 0..self.len() {
            let d1 = x1 - self.mu1[k];
            let d2 = x2 - self.mu2[k];
            let u1 = self.l11[k] * d1 + self.l21[k] * d2;
            let u2 = self.l22[k] * d2;
            let gk = math::exp(-(u1 * u1 + u2 * u2));
            g[k] = gk;
            sum += self.w[k] * gk;
        }
        sum
    }

    /// Adds `coef · ∂f/∂θ` at `(x1, x2)` to `grad`, given the bells `g` there.
    ///
    /// With `d = x − μ` and `u = Lᵀd`, the bell is `exp(−|u|²)` and
    /// - `∂f/∂w = G`
    /// - `∂f/∂μ = 2wG·A·d = 2wG·L·u`
    /// - `∂f/∂L = −2wG·d·dᵀ·L`, kept on the lower triangle only.
    #[inline]
    fn accumulate(&self, x1: f64, x2: f64, g: &[f64], coef: f64, grad: &mut [f64]) {
        for (k, gr) in grad.chunks_exact_mut(PARAMS_PER_COMPONENT).enumerate() {
            let d1 = x1 - self.mu1[k];
            let d2 = x2 - self.mu2[k];
            let (l11, l21, l22) = (self.l11[k], self.l21[k], self.l22[k]);
            let u1 = l11 * d1 + l21 * d2;
            let u2 = l22 * d2;
            let cg = coef * g[k];
            let two_cwg = 2.0 * cg * self.w[k];
            gr[W] += cg;
            gr[MU1] += two_cwg * (l11 * u1);
            gr[MU2] += two_cwg * (l21 * u1 + l22 * u2);
            gr[L11] -= two_cwg * (u1 * d1);
            gr[L21] -= two_cwg * (u1 * d2);
            gr[L22] -= two_cwg * (u2 * d2);
        }
    }
}

/// Validates a target set against the model grid.
pub(crate) fn check_targets(targets: &[&ImageGrid], height: usize, width: usize) -> Result<()> {
    if targets.is_empty() {
        return Err(Error::EmptyTargets);
    }
    for (index, t) in targets.iter().enumerate() {
        if t.dims() != (height, width) {
            return Err(Error::DimensionMismatch {
                index,
                expected_h: height,
                expected_w: width,
                found_h: t.height(),
                found_w: t.width(),
            });
        }
        if let Some(pixel) = t.first_out_of_unit_range() {
            return Err(Error::TargetRange { index, pixel });
        }
    }
    Ok(())
}

#[derive(Clone, Copy)]
struct Peak {
    abs_err: f64,
    err: f64,
    image: usize,
    row: usize,
    col: usize,
}

struct Partial {
    sum_sq: f64,
    peak: Peak,
    grad: Vec<f64>,
}

fn band_pass(prep: &Prepared, target: &ImageGrid, band: Band, with_grad: bool) -> Partial {
    let (h, w) = target.dims();
    let m = prep.len();
    let mut g = vec![0.0; m];
    let mut grad = if with_grad {
        vec![0.0; m * PARAMS_PER_COMPONENT]
    } else {
        Vec::new()
    };
    let mut sum_sq = 0.0;
    let mut peak = Peak {
        abs_err: -1.0,
        err: 0.0,
        image: band.image,
        row: band.row_start,
        col: 0,
    };
    for r in band.row_start..band.row_end {
        let row = target.row(r);
        for (c, &t) in row.iter().enumerate() {
            let x = coord_unchecked(r + 1, c + 1, h, w);
            let e = prep.eval_into(x.x1, x.x2, &mut g) - t;
            sum_sq += e * e;
            let a = math::abs(e);
            if a > peak.abs_err {
                peak = Peak {
                    abs_err: a,
                    err: e,
                    image: band.image,
                    row: r,
                    col: c,
                };
            }
            if with_grad {
                prep.accumulate(x.x1, x.x2, &g, e, &mut grad);
            }
        }
    }
    Partial { sum_sq, peak, grad }
}

/// Loss of `params` against `targets` and, with `with_grad`, the gradient of
/// `l2 + α·l_inf`.
pub(crate) fn evaluate<E: Executor>(
    exec: &E,
    params: &[f64],
    height: usize,
    width: usize,
    targets: &[&ImageGrid],
    alpha: f64,
    with_grad: bool,
) -> (LossReport, Option<Vec<f64>>) {
    let prep = Prepared::new(params);
    let tasks = bands(targets.len(), height);
    let partials = exec.map_tasks(tasks.len(), |i| {
        let band = tasks[i];
        band_pass(&prep, targets[band.image], band, with_grad)
    });

    let mut sum_sq = 0.0;
    let mut peak = partials[0].peak;
    let mut grad = if with_grad {
        vec![0.0; params.len()]
    } else {
        Vec::new()
    };
    for p in &partials {
        sum_sq += p.sum_sq;
        // strict comparison keeps the earliest pixel on ties
        if p.peak.abs_err > peak.abs_err {
            peak = p.peak;
        }
        if with_grad {
            for (acc, v) in grad.iter_mut().zip(&p.grad) {
                *acc += v;
            }
        }
    }

    let count = (targets.len() * height * width) as f64;
    let l2 = sum_sq / count;
    let l_inf = peak.abs_err;
    let report = LossReport {
        l2,
        l_inf,
        total: l2 + alpha * l_inf,
        argmax: PixelIndex {
            image: peak.image,
            row: peak.row + 1,
            col: peak.col + 1,
        },
    };

    if !with_grad {
        return (report, None);
    }
    let scale = 2.0 / count;
    for v in grad.iter_mut() {
        *v *= scale;
    }
    if alpha != 0.0 && peak.err != 0.0 {
        // subgradient of the peak term, routed through the argmax pixel only
        let sign = if peak.err > 0.0 { 1.0 } else { -1.0 };
        let x = coord_unchecked(peak.row + 1, peak.col + 1, height, width);
        let mut g = vec![0.0; prep.len()];
        prep.eval_into(x.x1, x.x2, &mut g);
        prep.accumulate(x.x1, x.x2, &g, alpha * sign, &mut grad);
    }
    (report, Some(grad))
}
