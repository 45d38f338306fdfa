//! The strided-gather engine behind copy, permute, reorder and N-to-M reorder.
//!
//! Every one of those kernels writes its output in canonical order and reads
//! the input through a list of per-dimension gather strides plus a base
//! offset. The engine first simplifies that view (size-1 dimensions dropped,
//! neighbouring dimensions fused when they are contiguous in both spaces) and
//! then picks one of three access paths:
//!
//! * **streamed**: the output's fastest dimension is also unit-stride in the
//!   input; runs are copied straight through.
//! * **staged**: some other output dimension is unit-stride in the input. The
//!   2D plane spanned by the two is cut into tiles that are read along one
//!   axis into scratch and written along the other, so both sides stream.
//! * **strided**: nothing is unit-stride in the input (an N-to-M reorder that
//!   drops or pins input dimension 0). Same tiling as staged, but the reads
//!   can no longer be contiguous.

use std::fmt;

use crate::error::{Error, Result};
use crate::layout::Element;
use crate::schedule::{diagonal_tile_order, run_tiles, DisjointOut, Executor};

/// Memory access pattern a gather runs with.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum AccessPath {
    Streamed,
    Staged,
    Strided,
}

impl AccessPath {
    pub fn name(self) -> &'static str {
        match self {
            AccessPath::Streamed => "streamed",
            AccessPath::Staged => "staged",
            AccessPath::Strided => "strided",
        }
    }
}

impl fmt::Display for AccessPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A simplified gather view: output dims fastest first, with canonical
/// output strides implied by `sizes`.
#[derive(Clone, Debug, PartialEq)]
pub(crate) struct GatherPlan {
    base: usize,
    sizes: Vec<usize>,
    gather: Vec<usize>,
    out_strides: Vec<usize>,
    len: usize,
}

impl GatherPlan {
    /// `out_sizes[k]` and `gather[k]` describe output dim `k`; `base` is the
    /// input offset of the output origin.
    pub(crate) fn new(base: usize, out_sizes: &[usize], gather: &[usize]) -> Self {
        debug_assert_eq!(out_sizes.len(), gather.len());
        let mut sizes: Vec<usize> = Vec::with_capacity(out_sizes.len());
        let mut strides: Vec<usize> = Vec::with_capacity(out_sizes.len());
        for (&s, &g) in out_sizes.iter().zip(gather) {
            if s == 1 {
                continue;
            }
            match (sizes.last_mut(), strides.last()) {
                (Some(ps), Some(&pg)) if pg * *ps == g => *ps *= s,
                _ => {
                    sizes.push(s);
                    strides.push(g);
                }
            }
        }
        if sizes.is_empty() {
            sizes.push(1);
            strides.push(1);
        }
        let mut out_strides = Vec::with_capacity(sizes.len());
        let mut acc = 1;
        for &s in &sizes {
            out_strides.push(acc);
            acc *= s;
        }
        GatherPlan {
            base,
            sizes,
            gather: strides,
            out_strides,
            len: acc,
        }
    }

    pub(crate) fn len(&self) -> usize {
        self.len
    }

    /// Output dimension paired with dim 0 for plane tiling, if any.
    fn plane_partner(&self) -> Option<usize> {
        (1..self.sizes.len()).min_by_key(|&k| (self.gather[k], k))
    }

    pub(crate) fn access_path(&self) -> AccessPath {
        if self.gather[0] == 1 {
            return AccessPath::Streamed;
        }
        match self.plane_partner() {
            Some(a) if self.gather[a] == 1 => AccessPath::Staged,
            _ => AccessPath::Strided,
        }
    }

    /// Largest input offset the plan touches, for bounds validation.
    pub(crate) fn max_input_offset(&self) -> usize {
        self.base
            + self
                .sizes
                .iter()
                .zip(&self.gather)
                .map(|(s, g)| (s - 1) * g)
                .sum::<usize>()
    }
}

/// Walks a set of dimensions in canonical order, tracking input and output
/// offsets.
struct Odometer<'a> {
    sizes: &'a [usize],
    gather: &'a [usize],
    out_strides: &'a [usize],
    idx: Vec<usize>,
    input: usize,
    output: usize,
}

impl<'a> Odometer<'a> {
    fn at(sizes: &'a [usize], gather: &'a [usize], out_strides: &'a [usize], mut linear: usize) -> Self {
        let mut idx = vec![0; sizes.len()];
        let (mut input, mut output) = (0, 0);
        for k in 0..sizes.len() {
            idx[k] = linear % sizes[k];
            linear /= sizes[k];
            input += idx[k] * gather[k];
            output += idx[k] * out_strides[k];
        }
        Odometer {
            sizes,
            gather,
            out_strides,
            idx,
            input,
            output,
        }
    }

    fn advance(&mut self) {
        for k in 0..self.sizes.len() {
            self.idx[k] += 1;
            self.input += self.gather[k];
            self.output += self.out_strides[k];
            if self.idx[k] < self.sizes[k] {
                return;
            }
            self.input -= self.sizes[k] * self.gather[k];
            self.output -= self.sizes[k] * self.out_strides[k];
            self.idx[k] = 0;
        }
    }
}

#[inline]
fn copy_run<T: Element>(src: &[T], start: usize, stride: usize, dst: &mut [T]) {
    if stride == 1 {
        dst.copy_from_slice(&src[start..start + dst.len()]);
    } else {
        for (i, d) in dst.iter_mut().enumerate() {
            *d = src[start + i * stride];
        }
    }
}

impl Executor {
    /// Executes `plan`, reading `src` and writing all of `out`.
    pub(crate) fn gather_into<T: Element>(&self, plan: &GatherPlan, src: &[T], out: &mut [T]) -> Result<()> {
        if out.len() != plan.len() {
            return Err(Error::Shape(format!(
                "output buffer of {} elements, kernel produces {}",
                out.len(),
                plan.len()
            )));
        }
        if plan.max_input_offset() >= src.len() {
            return Err(Error::Shape(format!(
                "gather reaches offset {} of a {}-element input",
                plan.max_input_offset(),
                src.len()
            )));
        }
        match plan.access_path() {
            AccessPath::Streamed => self.gather_runs(plan, src, out),
            _ if plan.sizes.len() == 1 => self.gather_runs(plan, src, out),
            _ => self.gather_plane(plan, src, out),
        }
    }

    /// Copies whole or partial runs along output dim 0.
    fn gather_runs<T: Element>(&self, plan: &GatherPlan, src: &[T], out: &mut [T]) -> Result<()> {
        let run = plan.sizes[0];
        let runs = plan.len / run;
        let chunk = (self.tile.tile_area() * self.tile.elements_per_work_item).max(1);
        // Each task owns `runs_per_task` whole runs, or one `piece`-long part of a run.
        let (runs_per_task, piece) = if run >= chunk { (1, chunk) } else { (chunk / run, run) };
        let grid_rows = runs.div_ceil(runs_per_task);
        let grid_cols = run.div_ceil(piece);
        let order = diagonal_tile_order(grid_rows, grid_cols);
        let shared = DisjointOut::new(out);
        let g0 = plan.gather[0];
        let batch = (&plan.sizes[1..], &plan.gather[1..], &plan.out_strides[1..]);

        run_tiles(&order, self.workers, |tile| {
            let first = tile.row * runs_per_task;
            let count = runs_per_task.min(runs - first);
            let p0 = tile.col * piece;
            let plen = piece.min(run - p0);
            let mut odo = Odometer::at(batch.0, batch.1, batch.2, first);
            for _ in 0..count {
                let in0 = plan.base + odo.input + p0 * g0;
                // SAFETY: (run, piece) pairs partition the output.
                let dst = unsafe { shared.slice(odo.output + p0, plen) };
                copy_run(src, in0, g0, dst);
                odo.advance();
            }
            Ok(())
        })
    }

    /// Tiles the plane of output dims (0, a) and batches the rest.
    fn gather_plane<T: Element>(&self, plan: &GatherPlan, src: &[T], out: &mut [T]) -> Result<()> {
        let a = plan.plane_partner().expect("plane needs two dims");
        let (n0, na) = (plan.sizes[0], plan.sizes[a]);
        let (g0, ga, oa) = (plan.gather[0], plan.gather[a], plan.out_strides[a]);
        let (mut bs, mut bg, mut bo) = (Vec::new(), Vec::new(), Vec::new());
        for k in (1..plan.sizes.len()).filter(|&k| k != a) {
            bs.push(plan.sizes[k]);
            bg.push(plan.gather[k]);
            bo.push(plan.out_strides[k]);
        }
        let batches: usize = bs.iter().product();
        let (tr, tc) = (self.tile.tile_rows, self.tile.tile_cols);
        // tile rows run along dim a, tile columns along dim 0
        let per_batch_rows = na.div_ceil(tr);
        let grid_cols = n0.div_ceil(tc);
        let order = diagonal_tile_order(per_batch_rows * batches, grid_cols);
        let shared = DisjointOut::new(out);

        run_tiles(&order, self.workers, |tile| {
            let batch = tile.row / per_batch_rows;
            let a0 = (tile.row % per_batch_rows) * tr;
            let c0 = tile.col * tc;
            let ra = tr.min(na - a0);
            let rc = tc.min(n0 - c0);
            let odo = Odometer::at(&bs, &bg, &bo, batch);
            let in_origin = plan.base + odo.input + a0 * ga + c0 * g0;
            let out_origin = odo.output + a0 * oa + c0;

            let mut scratch = vec![T::default(); ra * rc];
            // read along dim a (unit stride in the input when staged)
            for (x, line) in scratch.chunks_exact_mut(ra).enumerate() {
                copy_run(src, in_origin + x * g0, ga, line);
            }
            // write along dim 0 (unit stride in the output)
            for y in 0..ra {
                // SAFETY: each (batch, a, dim-0 span) segment belongs to one tile.
                let dst = unsafe { shared.slice(out_origin + y * oa, rc) };
                for (x, d) in dst.iter_mut().enumerate() {
                    *d = scratch[x * ra + y];
                }
            }
            Ok(())
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plan_squeezes_and_fuses() {
        // identity over [4, 3, 2] fuses to one run
        let p = GatherPlan::new(0, &[4, 3, 2], &[1, 4, 12]);
        assert_eq!((p.sizes.clone(), p.gather.clone()), (vec![24], vec![1]));
        assert_eq!(p.access_path(), AccessPath::Streamed);

        // [1,2,0] on [a,b,c] becomes a 2D transpose
        let p = GatherPlan::new(0, &[3, 2, 4], &[4, 12, 1]);
        assert_eq!((p.sizes.clone(), p.gather.clone()), (vec![6, 4], vec![4, 1]));
        assert_eq!(p.access_path(), AccessPath::Staged);

        // size-1 dims vanish
        let p = GatherPlan::new(5, &[1, 7, 1], &[99, 3, 1000]);
        assert_eq!((p.sizes.clone(), p.gather.clone()), (vec![7], vec![3]));
        assert_eq!(p.access_path(), AccessPath::Strided);

        let p = GatherPlan::new(2, &[1, 1], &[4, 8]);
        assert_eq!(p.len(), 1);
        assert_eq!(p.max_input_offset(), 2);
    }

    #[test]
    fn odometer_matches_delinearize() {
        let sizes = [3, 1, 4];
        let gather = [5, 7, 11];
        let outs = [1, 3, 3];
        let mut odo = Odometer::at(&sizes, &gather, &outs, 0);
        for lin in 0..12 {
            let fresh = Odometer::at(&sizes, &gather, &outs, lin);
            assert_eq!((odo.input, odo.output), (fresh.input, fresh.output));
            odo.advance();
        }
    }
}
