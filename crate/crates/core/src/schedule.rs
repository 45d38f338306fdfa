//! Tiling of 2D iteration spaces and the worker pool that executes tiles.
//!
//! Tiles are visited along anti-diagonals (`row + col` ascending, then row
//! ascending) so consecutive tiles fall in different row bands. Workers pull
//! tile indices from a shared counter over that precomputed order; every tile
//! task writes a disjoint part of the output, so the result never depends on
//! which worker ran which tile.

use std::any::Any;
use std::marker::PhantomData;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use std::sync::Mutex;

use crate::error::{Error, Result};

/// Environment variable consulted for the default worker count.
pub const WORKERS_ENV: &str = "REARRANGE_WORKERS";

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TileConfig {
    pub tile_rows: usize,
    pub tile_cols: usize,
    /// Inner-loop unroll factor; 32 rows / 4 gives the classic 32×8 work split.
    pub elements_per_work_item: usize,
}

impl Default for TileConfig {
    fn default() -> Self {
        TileConfig {
            tile_rows: 32,
            tile_cols: 32,
            elements_per_work_item: 4,
        }
    }
}

impl TileConfig {
    pub fn new(tile_rows: usize, tile_cols: usize, elements_per_work_item: usize) -> Result<Self> {
        let cfg = TileConfig {
            tile_rows,
            tile_cols,
            elements_per_work_item,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.tile_rows == 0 || self.tile_cols == 0 {
            return Err(Error::Spec(format!(
                "tile must be at least 1x1, got {}x{}",
                self.tile_rows, self.tile_cols
            )));
        }
        if self.elements_per_work_item == 0 || !self.tile_rows.is_multiple_of(self.elements_per_work_item) {
            return Err(Error::Spec(format!(
                "elements_per_work_item {} must divide tile_rows {}",
                self.elements_per_work_item, self.tile_rows
            )));
        }
        Ok(())
    }

    pub fn tile_area(&self) -> usize {
        self.tile_rows * self.tile_cols
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TileCoord {
    pub row: usize,
    pub col: usize,
}

impl TileCoord {
    pub fn new(row: usize, col: usize) -> Self {
        TileCoord { row, col }
    }
}

/// Half-open rectangle `[row0, row0 + rows) × [col0, col0 + cols)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TileRegion {
    pub row0: usize,
    pub rows: usize,
    pub col0: usize,
    pub cols: usize,
}

/// Tiling and worker settings shared by every kernel.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Executor {
    pub tile: TileConfig,
    pub workers: usize,
}

impl Default for Executor {
    /// Default tiles and [`default_workers`].
    fn default() -> Self {
        Executor {
            tile: TileConfig::default(),
            workers: default_workers(),
        }
    }
}

impl Executor {
    pub fn new(tile: TileConfig, workers: usize) -> Self {
        Executor {
            tile,
            workers: workers.max(1),
        }
    }

    pub fn with_workers(workers: usize) -> Self {
        Executor::new(TileConfig::default(), workers)
    }
}

/// Number of tile rows and columns covering the extents; edge tiles are partial.
pub fn tile_grid(extent_rows: usize, extent_cols: usize, config: &TileConfig) -> Result<(usize, usize)> {
    config.validate()?;
    if extent_rows == 0 || extent_cols == 0 {
        return Err(Error::Spec(format!(
            "empty iteration space {extent_rows}x{extent_cols}"
        )));
    }
    Ok((
        extent_rows.div_ceil(config.tile_rows),
        extent_cols.div_ceil(config.tile_cols),
    ))
}

/// The part of the iteration space owned by `tile`, clipped to the extents.
pub fn tile_region(tile: TileCoord, extent_rows: usize, extent_cols: usize, config: &TileConfig) -> TileRegion {
    let row0 = tile.row * config.tile_rows;
    let col0 = tile.col * config.tile_cols;
    TileRegion {
        row0,
        rows: config.tile_rows.min(extent_rows.saturating_sub(row0)),
        col0,
        cols: config.tile_cols.min(extent_cols.saturating_sub(col0)),
    }
}

/// Every tile of a `grid_rows × grid_cols` grid, swept by anti-diagonal.
pub fn diagonal_tile_order(grid_rows: usize, grid_cols: usize) -> Vec<TileCoord> {
    let mut order = Vec::with_capacity(grid_rows * grid_cols);
    if grid_rows == 0 || grid_cols == 0 {
        return order;
    }
    for d in 0..grid_rows + grid_cols - 1 {
        let first = d.saturating_sub(grid_cols - 1);
        let last = d.min(grid_rows - 1);
        order.extend((first..=last).map(|row| TileCoord::new(row, d - row)));
    }
    order
}

/// Worker count from `REARRANGE_WORKERS`, else the logical core count.
pub fn default_workers() -> usize {
    std::env::var(WORKERS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
        .unwrap_or_else(max_workers)
}

pub fn max_workers() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

fn panic_message(payload: Box<dyn Any + Send>) -> String {
    if let Some(s) = payload.downcast_ref::<&str>() {
        (*s).to_string()
    } else if let Some(s) = payload.downcast_ref::<String>() {
        s.clone()
    } else {
        "tile task panicked".to_string()
    }
}

fn run_one<F>(tile: TileCoord, task: &F) -> Result<()>
where
    F: Fn(TileCoord) -> Result<()>,
{
    match catch_unwind(AssertUnwindSafe(|| task(tile))) {
        Ok(Ok(())) => Ok(()),
        Ok(Err(e)) => Err(Error::TaskFailed {
            row: tile.row,
            col: tile.col,
            message: e.to_string(),
        }),
        Err(payload) => Err(Error::TaskFailed {
            row: tile.row,
            col: tile.col,
            message: panic_message(payload),
        }),
    }
}

/// Runs `task` once per tile in `order` on up to `workers` threads.
///
/// The first failing or panicking tile stops the remaining workers from
/// picking up new tiles and is reported as [`Error::TaskFailed`].
pub fn run_tiles<F>(order: &[TileCoord], workers: usize, task: F) -> Result<()>
where
    F: Fn(TileCoord) -> Result<()> + Sync,
{
    let workers = workers.max(1).min(order.len());
    if workers <= 1 {
        return order.iter().try_for_each(|&t| run_one(t, &task));
    }

    let next = AtomicUsize::new(0);
    let abort = AtomicBool::new(false);
    let failure: Mutex<Option<(usize, Error)>> = Mutex::new(None);
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| {
                while !abort.load(Ordering::Relaxed) {
                    let k = next.fetch_add(1, Ordering::Relaxed);
                    let Some(&tile) = order.get(k) else { break };
                    if let Err(e) = run_one(tile, &task) {
                        abort.store(true, Ordering::Relaxed);
                        let mut slot = failure.lock().unwrap_or_else(|p| p.into_inner());
                        // keep the earliest tile in visit order
                        if slot.as_ref().is_none_or(|(j, _)| k < *j) {
                            *slot = Some((k, e));
                        }
                        break;
                    }
                }
            });
        }
    });
    match failure.into_inner().unwrap_or_else(|p| p.into_inner()) {
        Some((_, e)) => Err(e),
        None => Ok(()),
    }
}

/// Shared handle to an output buffer whose tiles are written by different
/// workers.
///
/// Callers promise that concurrently live sub-slices never overlap; every
/// kernel in this crate derives its tile regions from a partition of the
/// output index space.
pub(crate) struct DisjointOut<'a, T> {
    ptr: *mut T,
    len: usize,
    _buf: PhantomData<&'a mut [T]>,
}

unsafe impl<T: Send> Send for DisjointOut<'_, T> {}
unsafe impl<T: Send> Sync for DisjointOut<'_, T> {}

impl<'a, T> DisjointOut<'a, T> {
    pub(crate) fn new(buf: &'a mut [T]) -> Self {
        DisjointOut {
            ptr: buf.as_mut_ptr(),
            len: buf.len(),
            _buf: PhantomData,
        }
    }

    /// # Safety
    /// No other live slice obtained from this handle may overlap
    /// `[start, start + len)`.
    #[allow(clippy::mut_from_ref)]
    pub(crate) unsafe fn slice(&self, start: usize, len: usize) -> &mut [T] {
        assert!(
            start <= self.len && len <= self.len - start,
            "tile write [{start}, {start}+{len}) outside buffer of {}",
            self.len
        );
        std::slice::from_raw_parts_mut(self.ptr.add(start), len)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    #[test]
    fn grid_examples() {
        let cfg = TileConfig::default();
        assert_eq!(tile_grid(64, 64, &cfg).unwrap(), (2, 2));
        assert_eq!(tile_grid(33, 1, &cfg).unwrap(), (2, 1));
        assert_eq!(tile_grid(32, 32, &cfg).unwrap(), (1, 1));
        assert!(tile_grid(0, 4, &cfg).is_err());
    }

    #[test]
    fn config_validation() {
        assert!(TileConfig::new(32, 32, 4).is_ok());
        assert!(TileConfig::new(32, 32, 5).is_err());
        assert!(TileConfig::new(0, 32, 1).is_err());
        assert!(TileConfig::new(1, 1, 1).is_ok());
    }

    #[test]
    fn diagonal_examples() {
        let c = |r, c| TileCoord::new(r, c);
        assert_eq!(diagonal_tile_order(1, 1), vec![c(0, 0)]);
        assert_eq!(diagonal_tile_order(2, 2), vec![c(0, 0), c(0, 1), c(1, 0), c(1, 1)]);
        assert_eq!(
            diagonal_tile_order(3, 2),
            vec![c(0, 0), c(0, 1), c(1, 0), c(1, 1), c(2, 0), c(2, 1)]
        );
        assert!(diagonal_tile_order(0, 5).is_empty());
    }

    #[test]
    fn diagonal_order_is_a_bijection() {
        for r in 1..=20 {
            for c in 1..=20 {
                let order = diagonal_tile_order(r, c);
                assert_eq!(order.len(), r * c);
                let set: HashSet<_> = order.iter().copied().collect();
                assert_eq!(set.len(), r * c);
                assert!(order.iter().all(|t| t.row < r && t.col < c));
                assert!(order.windows(2).all(|w| {
                    let (a, b) = (w[0], w[1]);
                    (a.row + a.col, a.row) < (b.row + b.col, b.row)
                }));
            }
        }
    }

    #[test]
    fn regions_partition_the_space() {
        let cfg = TileConfig::new(8, 4, 2).unwrap();
        let (rows, cols) = (21, 10);
        let (gr, gc) = tile_grid(rows, cols, &cfg).unwrap();
        let mut hits = vec![0u8; rows * cols];
        for t in diagonal_tile_order(gr, gc) {
            let reg = tile_region(t, rows, cols, &cfg);
            assert!(reg.rows > 0 && reg.cols > 0);
            for r in reg.row0..reg.row0 + reg.rows {
                for c in reg.col0..reg.col0 + reg.cols {
                    hits[r * cols + c] += 1;
                }
            }
        }
        assert!(hits.iter().all(|&h| h == 1));
    }

    fn fill(order: &[TileCoord], workers: usize) -> Vec<usize> {
        let mut out = vec![0usize; order.len() * 16];
        let shared = DisjointOut::new(&mut out);
        run_tiles(order, workers, |t| {
            let k = t.row * 2 + t.col;
            let s = unsafe { shared.slice(k * 16, 16) };
            for (i, v) in s.iter_mut().enumerate() {
                *v = k * 100 + i;
            }
            Ok(())
        })
        .unwrap();
        out
    }

    #[test]
    fn output_independent_of_workers() {
        let order = diagonal_tile_order(2, 2);
        let seq = fill(&order, 1);
        assert_eq!(fill(&order, 4), seq);
        assert_eq!(fill(&order, 2), seq);
    }

    #[test]
    fn empty_order_completes() {
        run_tiles(&[], 4, |_| panic!("never called")).unwrap();
    }

    #[test]
    fn failing_tile_is_reported() {
        let order = diagonal_tile_order(3, 3);
        for workers in [1, 3] {
            let err = run_tiles(&order, workers, |t| {
                if t == TileCoord::new(1, 2) {
                    panic!("boom");
                }
                Ok(())
            })
            .unwrap_err();
            match err {
                Error::TaskFailed { row, col, message } => {
                    assert_eq!((row, col), (1, 2));
                    assert!(message.contains("boom"));
                }
                other => panic!("unexpected {other:?}"),
            }
        }
        let err = run_tiles(&order, 2, |t| {
            if t.row == 2 {
                Err(Error::Spec("bad tile".into()))
            } else {
                Ok(())
            }
        })
        .unwrap_err();
        assert!(matches!(err, Error::TaskFailed { row: 2, .. }));
    }
}
