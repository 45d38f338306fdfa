//! Tiled, worker-parallel data-rearrangement kernels over linearized
//! multi-dimensional arrays.
//!
//! * [`layout`]: shapes, storage orders, strides, and the [`Tensor`] type.
//!   Dimension 0 is always the fastest-changing one.
//! * [`schedule`]: tiling, the anti-diagonal tile order, and the worker pool.
//! * [`kernels`]: copy, 3-d permute, N-d reorder, N-to-M reorder,
//!   interlace/de-interlace.
//! * [`stencil`]: generic 2D stencils with apron handling and finite-difference
//!   Laplacians of orders 1 to 4.
//! * [`oracle`]: naive reference implementations of all of the above.
//! * [`format`]: the `.rrt` tensor file format.
//! * [`bench`]: effective-bandwidth measurement relative to a copy baseline.
//!
//! ```
//! use rearrange::{reorder, OrderVec, Tensor};
//!
//! let t = Tensor::from_vec(vec![3, 2], vec![0.0f32, 1.0, 2.0, 3.0, 4.0, 5.0])?;
//! let out = reorder(&t, &OrderVec::new(vec![1, 0])?)?;
//! assert_eq!(out.shape().sizes(), &[2, 3]);
//! assert_eq!(out.data(), &[0.0, 3.0, 1.0, 4.0, 2.0, 5.0]);
//! # Ok::<(), rearrange::Error>(())
//! ```

pub mod bench;
pub mod error;
pub mod format;
pub mod kernels;
pub mod layout;
pub mod oracle;
pub mod schedule;
pub mod stencil;

pub use error::{Error, Result};
pub use kernels::{
    copy_kernel, deinterlace, interlace, permute3d, reorder, reorder_access_path, reorder_nm,
    reorder_nm_access_path, AccessPath, InterlaceSpec,
};
pub use layout::{
    bit_identical, compute_strides, parse_index_list, permuted_view_strides, Element, OrderVec, Shape, SliceSpec, Strides, Tensor,
};
pub use schedule::{diagonal_tile_order, run_tiles, tile_grid, Executor, TileConfig, TileCoord};
pub use stencil::{apply_stencil, fd_stencil, BoundaryPolicy, Grid2D, StencilSpec, StencilVariant, Tap};
