//! Task execution for the pixel reductions.
//!
//! Loss, gradient and render passes are split into a fixed list of tasks (a
//! band of rows of one image each). An [`Executor`] runs the tasks and
//! returns their results in task order; callers fold them in that order.
//! Because the split never depends on the executor, every executor yields
//! bit-identical results.

use alloc::vec::Vec;

/// Rows per reduction task.
pub const ROW_BAND: usize = 8;

pub trait Executor: Sync {
    /// Runs `f(0..tasks)` and returns the results indexed by task.
    fn map_tasks<T, F>(&self, tasks: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send;
}

/// Runs every task on the calling thread.
#[derive(Debug, Clone, Copy, Default)]
pub struct Serial;

impl Executor for Serial {
    fn map_tasks<T, F>(&self, tasks: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        (0..tasks).map(f).collect()
    }
}

/// A band of rows `[row_start, row_end)` (0-based) inside image `image`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct Band {
    pub image: usize,
    pub row_start: usize,
    pub row_end: usize,
}

pub(crate) fn bands(images: usize, height: usize) -> Vec<Band> {
    let per_image = height.div_ceil(ROW_BAND);
    let mut out = Vec::with_capacity(images * per_image);
    for image in 0..images {
        let mut row_start = 0;
        while row_start < height {
            let row_end = (row_start + ROW_BAND).min(height);
            out.push(Band {
                image,
                row_start,
                row_end,
            });
            row_start = row_end;
        }
    }
    out
}
