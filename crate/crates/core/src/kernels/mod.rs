//! Data-movement kernels. All of them are out-of-place, tiled, and run on
//! the [`Executor`]'s worker pool; results never depend on the worker count.
//!
//! Index semantics follow the gather rule: reordering by `order` produces
//! `out[j] = in[i]` with `i[order[k]] = j[k]`, so output dimension `k` is
//! input dimension `order[k]`.

mod gather;
mod interlace;

use crate::error::{Error, Result};
use crate::layout::{permuted_view_strides, Element, OrderVec, Shape, SliceSpec, Tensor};
use crate::schedule::Executor;

pub use gather::AccessPath;
pub(crate) use gather::GatherPlan;
pub use interlace::{InterlaceSpec, STAGING_BLOCK};

fn reorder_plan(shape: &Shape, order: &OrderVec) -> Result<(Shape, GatherPlan)> {
    if order.len() != shape.ndim() {
        return Err(Error::Permutation {
            order: order.as_slice().to_vec(),
            len: shape.ndim(),
        });
    }
    let (out_shape, gather) = permuted_view_strides(shape, order)?;
    let plan = GatherPlan::new(0, out_shape.sizes(), gather.as_slice());
    Ok((out_shape, plan))
}

fn reorder_nm_plan(shape: &Shape, keep: &[usize], slice: &SliceSpec) -> Result<(Shape, GatherPlan)> {
    slice.validate(shape, keep)?;
    let base = shape.strides().linearize(&slice.base);
    let sizes: Vec<usize> = keep.iter().map(|&d| slice.range[d]).collect();
    let gather: Vec<usize> = keep.iter().map(|&d| shape.strides()[d]).collect();
    let plan = GatherPlan::new(base, &sizes, &gather);
    Ok((Shape::new(sizes)?, plan))
}

fn check_permute3d(shape: &Shape, order: &OrderVec) -> Result<()> {
    if shape.ndim() != 3 {
        return Err(Error::Shape(format!("permute3d needs a 3-d tensor, got {shape}")));
    }
    if order.len() != 3 {
        return Err(Error::Permutation {
            order: order.as_slice().to_vec(),
            len: 3,
        });
    }
    Ok(())
}

/// Access path a reorder of `shape` by `order` takes.
pub fn reorder_access_path(shape: &Shape, order: &OrderVec) -> Result<AccessPath> {
    Ok(reorder_plan(shape, order)?.1.access_path())
}

/// Access path of an N-to-M reorder. [`AccessPath::Strided`] means no input
/// dimension with unit stride survives the slice, so reads cannot stream.
pub fn reorder_nm_access_path(shape: &Shape, keep: &[usize], slice: &SliceSpec) -> Result<AccessPath> {
    Ok(reorder_nm_plan(shape, keep, slice)?.1.access_path())
}

fn alloc<T: Element>(len: usize) -> Result<Vec<T>> {
    let mut v = Vec::new();
    v.try_reserve_exact(len).map_err(|_| Error::Allocation {
        bytes: len.saturating_mul(std::mem::size_of::<T>()),
    })?;
    v.resize(len, T::default());
    Ok(v)
}

impl Executor {
    /// Tiled streaming copy; the bandwidth baseline every other kernel is
    /// measured against.
    pub fn copy<T: Element>(&self, src: &Tensor<T>) -> Result<Tensor<T>> {
        let mut out = alloc(src.shape().len())?;
        self.copy_into(src.data(), &mut out)?;
        Tensor::new(src.shape().clone(), out)
    }

    pub fn copy_into<T: Element>(&self, src: &[T], out: &mut [T]) -> Result<()> {
        if src.len() != out.len() {
            return Err(Error::Shape(format!(
                "copy of {} elements into {}",
                src.len(),
                out.len()
            )));
        }
        if src.is_empty() {
            return Ok(());
        }
        self.gather_into(&GatherPlan::new(0, &[src.len()], &[1]), src, out)
    }

    /// Permutes a 3-d tensor; one of the six orders of `[0, 1, 2]`.
    pub fn permute3d<T: Element>(&self, src: &Tensor<T>, order: &OrderVec) -> Result<Tensor<T>> {
        check_permute3d(src.shape(), order)?;
        self.reorder(src, order)
    }

    pub fn permute3d_into<T: Element>(&self, src: &Tensor<T>, order: &OrderVec, out: &mut [T]) -> Result<Shape> {
        check_permute3d(src.shape(), order)?;
        self.reorder_into(src, order, out)
    }

    /// Generic N-dimensional reorder.
    pub fn reorder<T: Element>(&self, src: &Tensor<T>, order: &OrderVec) -> Result<Tensor<T>> {
        let (shape, plan) = reorder_plan(src.shape(), order)?;
        let mut out = alloc(plan.len())?;
        self.gather_into(&plan, src.data(), &mut out)?;
        Tensor::new(shape, out)
    }

    /// Reorders into a preallocated buffer and returns the output shape.
    pub fn reorder_into<T: Element>(&self, src: &Tensor<T>, order: &OrderVec, out: &mut [T]) -> Result<Shape> {
        let (shape, plan) = reorder_plan(src.shape(), order)?;
        self.gather_into(&plan, src.data(), out)?;
        Ok(shape)
    }

    /// N-to-M reorder: output dim `k` walks input dim `keep[k]` from
    /// `slice.base` over `slice.range`; every other input dim is pinned at its
    /// base (and must have range 1).
    pub fn reorder_nm<T: Element>(&self, src: &Tensor<T>, keep: &[usize], slice: &SliceSpec) -> Result<Tensor<T>> {
        let (shape, plan) = reorder_nm_plan(src.shape(), keep, slice)?;
        let mut out = alloc(plan.len())?;
        self.gather_into(&plan, src.data(), &mut out)?;
        Tensor::new(shape, out)
    }

    pub fn reorder_nm_into<T: Element>(
        &self,
        src: &Tensor<T>,
        keep: &[usize],
        slice: &SliceSpec,
        out: &mut [T],
    ) -> Result<Shape> {
        let (shape, plan) = reorder_nm_plan(src.shape(), keep, slice)?;
        self.gather_into(&plan, src.data(), out)?;
        Ok(shape)
    }
}

pub fn copy_kernel<T: Element>(src: &Tensor<T>) -> Result<Tensor<T>> {
    Executor::default().copy(src)
}

pub fn permute3d<T: Element>(src: &Tensor<T>, order: &OrderVec) -> Result<Tensor<T>> {
    Executor::default().permute3d(src, order)
}

pub fn reorder<T: Element>(src: &Tensor<T>, order: &OrderVec) -> Result<Tensor<T>> {
    Executor::default().reorder(src, order)
}

pub fn reorder_nm<T: Element>(src: &Tensor<T>, keep: &[usize], slice: &SliceSpec) -> Result<Tensor<T>> {
    Executor::default().reorder_nm(src, keep, slice)
}

pub fn interlace<T: Element>(arrays: &[&[T]]) -> Result<Vec<T>> {
    Executor::default().interlace(arrays)
}

pub fn deinterlace<T: Element>(buf: &[T], n: usize) -> Result<Vec<Vec<T>>> {
    Executor::default().deinterlace(buf, n)
}
