//! n-way round-robin interlace and its inverse.
//!
//! Work is cut into blocks of [`STAGING_BLOCK`] elements per array. A block
//! is copied into scratch array by array and then emitted in interleaved
//! order, so both the per-array side and the interleaved side are touched
//! with unit stride.

use crate::error::{Error, Result};
use crate::layout::Element;
use crate::schedule::{diagonal_tile_order, run_tiles, DisjointOut, Executor};

/// Elements per array staged at once.
pub const STAGING_BLOCK: usize = 64;

/// `n_arrays` arrays of `array_len` elements each.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct InterlaceSpec {
    pub n_arrays: usize,
    pub array_len: usize,
}

impl InterlaceSpec {
    pub fn new(n_arrays: usize, array_len: usize) -> Result<Self> {
        if n_arrays == 0 {
            return Err(Error::Spec("interlace needs at least one array".into()));
        }
        if array_len == 0 {
            return Err(Error::Spec("interlace arrays must be non-empty".into()));
        }
        Ok(InterlaceSpec { n_arrays, array_len })
    }

    pub fn for_arrays<T>(arrays: &[&[T]]) -> Result<Self> {
        let first = arrays.first().map_or(0, |a| a.len());
        if arrays.iter().any(|a| a.len() != first) {
            return Err(Error::Spec("interlace inputs differ in length".into()));
        }
        InterlaceSpec::new(arrays.len(), first)
    }

    pub fn for_buffer(len: usize, n_arrays: usize) -> Result<Self> {
        if n_arrays == 0 || !len.is_multiple_of(n_arrays) {
            return Err(Error::Spec(format!(
                "cannot split {len} elements into {n_arrays} arrays"
            )));
        }
        InterlaceSpec::new(n_arrays, len / n_arrays)
    }

    pub fn interlaced_len(&self) -> usize {
        self.n_arrays * self.array_len
    }
}

impl Executor {
    /// Blocks per scheduled task and the resulting task count.
    fn interlace_tasks(&self, spec: &InterlaceSpec) -> (usize, usize) {
        let per_task = STAGING_BLOCK * self.tile.tile_rows;
        (per_task, spec.array_len.div_ceil(per_task))
    }

    /// `out[k·n + a] = arrays[a][k]`.
    pub fn interlace<T: Element>(&self, arrays: &[&[T]]) -> Result<Vec<T>> {
        let spec = InterlaceSpec::for_arrays(arrays)?;
        let mut out = vec![T::default(); spec.interlaced_len()];
        self.interlace_into(arrays, &mut out)?;
        Ok(out)
    }

    pub fn interlace_into<T: Element>(&self, arrays: &[&[T]], out: &mut [T]) -> Result<()> {
        let spec = InterlaceSpec::for_arrays(arrays)?;
        if out.len() != spec.interlaced_len() {
            return Err(Error::Spec(format!(
                "interlace output holds {} elements, needs {}",
                out.len(),
                spec.interlaced_len()
            )));
        }
        let n = spec.n_arrays;
        let (per_task, tasks) = self.interlace_tasks(&spec);
        let shared = DisjointOut::new(out);
        run_tiles(&diagonal_tile_order(tasks, 1), self.workers, |tile| {
            let start = tile.row * per_task;
            let end = (start + per_task).min(spec.array_len);
            let mut scratch = vec![T::default(); n * STAGING_BLOCK];
            for k0 in (start..end).step_by(STAGING_BLOCK) {
                let b = STAGING_BLOCK.min(end - k0);
                for (a, arr) in arrays.iter().enumerate() {
                    scratch[a * STAGING_BLOCK..][..b].copy_from_slice(&arr[k0..k0 + b]);
                }
                // SAFETY: blocks of the element range are disjoint.
                let dst = unsafe { shared.slice(k0 * n, b * n) };
                for (i, group) in dst.chunks_exact_mut(n).enumerate() {
                    for (a, d) in group.iter_mut().enumerate() {
                        *d = scratch[a * STAGING_BLOCK + i];
                    }
                }
            }
            Ok(())
        })
    }

    /// Splits a round-robin buffer back into `n` arrays.
    pub fn deinterlace<T: Element>(&self, buf: &[T], n: usize) -> Result<Vec<Vec<T>>> {
        let spec = InterlaceSpec::for_buffer(buf.len(), n)?;
        let mut outs = vec![vec![T::default(); spec.array_len]; n];
        let mut views: Vec<&mut [T]> = outs.iter_mut().map(|v| v.as_mut_slice()).collect();
        self.deinterlace_into(buf, &mut views)?;
        Ok(outs)
    }

    pub fn deinterlace_into<T: Element>(&self, buf: &[T], outs: &mut [&mut [T]]) -> Result<()> {
        let n = outs.len();
        let spec = InterlaceSpec::for_buffer(buf.len(), n)?;
        if outs.iter().any(|o| o.len() != spec.array_len) {
            return Err(Error::Spec(format!(
                "deinterlace outputs must each hold {} elements",
                spec.array_len
            )));
        }
        let (per_task, tasks) = self.interlace_tasks(&spec);
        let shared: Vec<DisjointOut<'_, T>> = outs.iter_mut().map(|o| DisjointOut::new(o)).collect();
        run_tiles(&diagonal_tile_order(tasks, 1), self.workers, |tile| {
            let start = tile.row * per_task;
            let end = (start + per_task).min(spec.array_len);
            let mut scratch = vec![T::default(); n * STAGING_BLOCK];
            for k0 in (start..end).step_by(STAGING_BLOCK) {
                let b = STAGING_BLOCK.min(end - k0);
                let src = &buf[k0 * n..(k0 + b) * n];
                for (i, group) in src.chunks_exact(n).enumerate() {
                    for (a, &v) in group.iter().enumerate() {
                        scratch[a * STAGING_BLOCK + i] = v;
                    }
                }
                for (a, out) in shared.iter().enumerate() {
                    // SAFETY: blocks of the element range are disjoint.
                    let dst = unsafe { out.slice(k0, b) };
                    dst.copy_from_slice(&scratch[a * STAGING_BLOCK..][..b]);
                }
            }
            Ok(())
        })
    }
}
