//! Naive per-element reference implementations.
//!
//! Each function here computes the same result as its tiled counterpart with
//! the most direct loop possible: delinearize, map the index, linearize. They
//! share only types with the rest of the crate, never the tiled code paths,
//! and are single-threaded.

use num_traits::Float;

use crate::error::{Error, Result};
use crate::layout::{Element, OrderVec, Shape, SliceSpec, Tensor};
use crate::stencil::{BoundaryPolicy, Grid2D, StencilSpec};

/// `out[j] = src[i]` with `i[order[k]] = j[k]`.
pub fn naive_reorder<T: Element>(src: &Tensor<T>, order: &OrderVec) -> Result<Tensor<T>> {
    let shape = src.shape();
    if order.len() != shape.ndim() {
        return Err(Error::Permutation {
            order: order.as_slice().to_vec(),
            len: shape.ndim(),
        });
    }
    let out_sizes: Vec<usize> = order.as_slice().iter().map(|&d| shape.sizes()[d]).collect();
    let out_shape = Shape::new(out_sizes)?;
    let mut data = Vec::with_capacity(out_shape.len());
    let mut i = vec![0; shape.ndim()];
    let mut j = vec![0; shape.ndim()];
    for o in 0..out_shape.len() {
        out_shape.delinearize_into(o, &mut j);
        for (k, &d) in order.as_slice().iter().enumerate() {
            i[d] = j[k];
        }
        data.push(src.data()[shape.linearize(&i)?]);
    }
    Tensor::new(out_shape, data)
}

/// N-to-M gather: `out[j] = src[i]` with `i[keep[k]] = base[keep[k]] + j[k]`
/// and every dropped dimension pinned at its base.
pub fn naive_slice<T: Element>(src: &Tensor<T>, keep: &[usize], slice: &SliceSpec) -> Result<Tensor<T>> {
    let shape = src.shape();
    slice.validate(shape, keep)?;
    let out_shape = Shape::new(keep.iter().map(|&d| slice.range[d]).collect::<Vec<_>>())?;
    let mut data = Vec::with_capacity(out_shape.len());
    let mut i = slice.base.clone();
    let mut j = vec![0; keep.len()];
    for o in 0..out_shape.len() {
        out_shape.delinearize_into(o, &mut j);
        for (k, &d) in keep.iter().enumerate() {
            i[d] = slice.base[d] + j[k];
        }
        data.push(src.data()[shape.linearize(&i)?]);
    }
    Tensor::new(out_shape, data)
}

/// Round-robin merge: `out[k·n + a] = arrays[a][k]`.
pub fn naive_interlace<T: Element>(arrays: &[&[T]]) -> Result<Vec<T>> {
    let Some(first) = arrays.first() else {
        return Err(Error::Spec("interlace needs at least one array".into()));
    };
    let len = first.len();
    if arrays.iter().any(|a| a.len() != len) {
        return Err(Error::Spec("interlace inputs differ in length".into()));
    }
    let mut out = Vec::with_capacity(len * arrays.len());
    for k in 0..len {
        for a in arrays {
            out.push(a[k]);
        }
    }
    Ok(out)
}

/// Inverse of [`naive_interlace`].
pub fn naive_deinterlace<T: Element>(buf: &[T], n: usize) -> Result<Vec<Vec<T>>> {
    if n == 0 || !buf.len().is_multiple_of(n) {
        return Err(Error::Spec(format!(
            "cannot split {} elements into {n} arrays",
            buf.len()
        )));
    }
    let mut out = vec![Vec::with_capacity(buf.len() / n); n];
    for (p, &v) in buf.iter().enumerate() {
        out[p % n].push(v);
    }
    Ok(out)
}

/// Untiled stencil application: one full scan, taps accumulated in list
/// order starting from zero.
pub fn naive_stencil<T: Element + Float>(
    grid: &Grid2D<T>,
    stencil: &StencilSpec<T>,
    boundary: BoundaryPolicy,
) -> Result<Grid2D<T>> {
    let (rows, cols) = (grid.rows(), grid.cols());
    let radius = stencil.radius();
    if boundary == BoundaryPolicy::SkipBorder && (rows <= 2 * radius || cols <= 2 * radius) {
        return Err(Error::Spec(format!(
            "{rows}x{cols} grid too small for skip-border with radius {radius}"
        )));
    }
    let read = |r: isize, c: isize| -> T {
        let inside = r >= 0 && c >= 0 && (r as usize) < rows && (c as usize) < cols;
        match boundary {
            _ if inside => grid.data()[r as usize * cols + c as usize],
            BoundaryPolicy::ZeroPad | BoundaryPolicy::SkipBorder => T::zero(),
            BoundaryPolicy::ClampToEdge => {
                let r = r.clamp(0, rows as isize - 1) as usize;
                let c = c.clamp(0, cols as isize - 1) as usize;
                grid.data()[r * cols + c]
            }
        }
    };
    let mut data = Vec::with_capacity(rows * cols);
    for r in 0..rows {
        for c in 0..cols {
            let border = r < radius || c < radius || r >= rows - radius || c >= cols - radius;
            if boundary == BoundaryPolicy::SkipBorder && border {
                data.push(grid.data()[r * cols + c]);
                continue;
            }
            let mut acc = T::zero();
            for tap in stencil.taps() {
                acc = acc + tap.weight * read(r as isize + tap.drow, c as isize + tap.dcol);
            }
            data.push(acc);
        }
    }
    Grid2D::new(rows, cols, data)
}
