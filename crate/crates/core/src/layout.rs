//! Shapes, storage orders and stride arithmetic.
//!
//! Every tensor in this crate is stored linearized with **dimension 0 as the
//! fastest-changing dimension**: the element at multi-index `i` lives at
//! offset `Σ i[d] · strides[d]` with `strides[0] = 1` and
//! `strides[d] = strides[d-1] · sizes[d-1]`. For a matrix with `sizes =
//! [cols, rows]` this is the familiar row-contiguous layout; an order vector
//! lists dimensions fastest first, so `[0, 1, …, N-1]` is the identity.
//!
//! All values here are immutable once built and can be shared freely across
//! worker threads.

use std::fmt;

use crate::error::{Error, Result};

/// Plain fixed-size element that kernels move around without interpreting.
pub trait Element: Copy + Default + PartialEq + fmt::Debug + Send + Sync + 'static {
    /// Raw bit pattern, used for bit-exact comparisons (NaN payloads included).
    fn to_bits_u64(self) -> u64;
}

macro_rules! impl_element {
    ($($t:ty => |$v:ident| $bits:expr;)*) => {
        $(impl Element for $t {
            #[inline]
            fn to_bits_u64(self) -> u64 {
                let $v = self;
                $bits
            }
        })*
    };
}

impl_element! {
    f32 => |v| v.to_bits() as u64;
    f64 => |v| v.to_bits();
    u8 => |v| v as u64;
    u16 => |v| v as u64;
    u32 => |v| v as u64;
    u64 => |v| v;
    usize => |v| v as u64;
    i8 => |v| v as u8 as u64;
    i16 => |v| v as u16 as u64;
    i32 => |v| v as u32 as u64;
    i64 => |v| v as u64;
}

/// True when both slices have the same length and identical bit patterns.
pub fn bit_identical<T: Element>(a: &[T], b: &[T]) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| x.to_bits_u64() == y.to_bits_u64())
}

/// Position of the first element whose bits differ, if any.
pub fn first_mismatch<T: Element>(a: &[T], b: &[T]) -> Option<usize> {
    if a.len() != b.len() {
        return Some(a.len().min(b.len()));
    }
    a.iter()
        .zip(b)
        .position(|(x, y)| x.to_bits_u64() != y.to_bits_u64())
}

/// Element strides in canonical order, dimension 0 first.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Strides(Vec<usize>);

impl Strides {
    pub fn new(strides: Vec<usize>) -> Self {
        Strides(strides)
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// `Σ index[d] · strides[d]`, without bounds checking.
    ///
    /// Panics if `index` and the strides differ in length.
    pub fn linearize(&self, index: &[usize]) -> usize {
        assert_eq!(index.len(), self.0.len(), "index rank mismatch");
        index.iter().zip(&self.0).map(|(i, s)| i * s).sum()
    }
}

impl std::ops::Index<usize> for Strides {
    type Output = usize;
    fn index(&self, d: usize) -> &usize {
        &self.0[d]
    }
}

/// Canonical strides for `sizes`, rejecting empty shapes, zero extents and
/// element counts that do not fit the 64-bit offset space.
pub fn compute_strides(sizes: &[usize]) -> Result<Strides> {
    if sizes.is_empty() {
        return Err(Error::Shape("a shape needs at least one dimension".into()));
    }
    if let Some(d) = sizes.iter().position(|&s| s == 0) {
        return Err(Error::Shape(format!("dimension {d} has size 0")));
    }
    let mut strides = Vec::with_capacity(sizes.len());
    let mut acc: u64 = 1;
    for &s in sizes {
        let stride = usize::try_from(acc).map_err(|_| Error::SizeOverflow(sizes.to_vec()))?;
        strides.push(stride);
        acc = acc
            .checked_mul(s as u64)
            .ok_or_else(|| Error::SizeOverflow(sizes.to_vec()))?;
    }
    usize::try_from(acc).map_err(|_| Error::SizeOverflow(sizes.to_vec()))?;
    Ok(Strides(strides))
}

/// Per-dimension extents of a linearized array.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Shape {
    sizes: Vec<usize>,
    strides: Strides,
    len: usize,
}

impl Shape {
    pub fn new(sizes: impl Into<Vec<usize>>) -> Result<Self> {
        let sizes = sizes.into();
        let strides = compute_strides(&sizes)?;
        let len = sizes.iter().product();
        Ok(Shape { sizes, strides, len })
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn ndim(&self) -> usize {
        self.sizes.len()
    }

    /// Total element count.
    pub fn len(&self) -> usize {
        self.len
    }

    /// Always false; kept for API symmetry with `len`.
    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn strides(&self) -> &Strides {
        &self.strides
    }

    pub fn contains(&self, index: &[usize]) -> bool {
        index.len() == self.sizes.len() && index.iter().zip(&self.sizes).all(|(i, s)| i < s)
    }

    pub fn linearize(&self, index: &[usize]) -> Result<usize> {
        if !self.contains(index) {
            return Err(Error::IndexOutOfBounds {
                index: index.to_vec(),
                sizes: self.sizes.clone(),
            });
        }
        Ok(self.strides.linearize(index))
    }

    pub fn delinearize(&self, offset: usize) -> Result<Vec<usize>> {
        if offset >= self.len {
            return Err(Error::OffsetOutOfRange {
                offset: offset as u64,
                count: self.len as u64,
            });
        }
        let mut index = vec![0; self.ndim()];
        self.delinearize_into(offset, &mut index);
        Ok(index)
    }

    /// Unchecked variant writing into a caller-provided buffer.
    pub fn delinearize_into(&self, mut offset: usize, index: &mut [usize]) {
        for (slot, &size) in index.iter_mut().zip(&self.sizes) {
            *slot = offset % size;
            offset /= size;
        }
    }
}

impl fmt::Debug for Shape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Shape({:?})", self.sizes)
    }
}

impl fmt::Display for Shape {
    /// `128x256x512`, dimension 0 first.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.sizes.iter().map(|s| s.to_string()).collect();
        f.write_str(&parts.join("x"))
    }
}

impl std::str::FromStr for Shape {
    type Err = Error;
    /// Parses `128x256x512`.
    fn from_str(s: &str) -> Result<Self> {
        let sizes = s
            .split('x')
            .map(|p| p.trim().parse::<usize>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|_| Error::Shape(format!("cannot parse shape `{s}`")))?;
        Shape::new(sizes)
    }
}

/// Parses a comma-separated list such as `1,0,2`.
pub fn parse_index_list(s: &str) -> Result<Vec<usize>> {
    s.split(',')
        .map(|p| p.trim().parse::<usize>())
        .collect::<std::result::Result<Vec<_>, _>>()
        .map_err(|_| Error::Spec(format!("cannot parse index list `{s}`")))
}

/// A storage order: a permutation of `0..N`, fastest-changing dimension first.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct OrderVec(Vec<usize>);

impl OrderVec {
    pub fn new(order: impl Into<Vec<usize>>) -> Result<Self> {
        let order = order.into();
        let n = order.len();
        let mut seen = vec![false; n];
        for &d in &order {
            if d >= n || std::mem::replace(&mut seen[d], true) {
                return Err(Error::Permutation { order, len: n });
            }
        }
        if n == 0 {
            return Err(Error::Permutation { order, len: 0 });
        }
        Ok(OrderVec(order))
    }

    pub fn identity(n: usize) -> Self {
        OrderVec((0..n).collect())
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_identity(&self) -> bool {
        self.0.iter().enumerate().all(|(k, &d)| k == d)
    }

    /// The order that undoes this one: `reorder(reorder(x, p), p.inverse()) == x`.
    pub fn inverse(&self) -> OrderVec {
        let mut inv = vec![0; self.0.len()];
        for (k, &d) in self.0.iter().enumerate() {
            inv[d] = k;
        }
        OrderVec(inv)
    }

    /// Order equivalent to reordering by `self` and then by `then`:
    /// `result[m] = self[then[m]]`.
    pub fn then(&self, then: &OrderVec) -> Result<OrderVec> {
        if then.len() != self.len() {
            return Err(Error::Shape(format!(
                "cannot compose orders of length {} and {}",
                self.len(),
                then.len()
            )));
        }
        Ok(OrderVec(then.0.iter().map(|&m| self.0[m]).collect()))
    }
}

impl std::str::FromStr for OrderVec {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        OrderVec::new(parse_index_list(s)?)
    }
}

impl std::ops::Index<usize> for OrderVec {
    type Output = usize;
    fn index(&self, k: usize) -> &usize {
        &self.0[k]
    }
}

impl fmt::Display for OrderVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|s| s.to_string()).collect();
        f.write_str(&parts.join(","))
    }
}

/// Output shape and input-space gather strides for reordering `shape` by
/// `order`: output element `j` is input element `Σ j[k] · gather[k]`.
pub fn permuted_view_strides(shape: &Shape, order: &OrderVec) -> Result<(Shape, Strides)> {
    if order.len() != shape.ndim() {
        return Err(Error::Shape(format!(
            "order of length {} for a {}-d shape",
            order.len(),
            shape.ndim()
        )));
    }
    let sizes: Vec<usize> = order.as_slice().iter().map(|&d| shape.sizes()[d]).collect();
    let gather = order.as_slice().iter().map(|&d| shape.strides()[d]).collect();
    Ok((Shape::new(sizes)?, Strides(gather)))
}

/// Base index and extent per dimension, selecting the sub-box read by an
/// N-to-M reorder.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SliceSpec {
    pub base: Vec<usize>,
    pub range: Vec<usize>,
}

impl SliceSpec {
    pub fn new(base: Vec<usize>, range: Vec<usize>) -> Self {
        SliceSpec { base, range }
    }

    /// The whole of `shape`.
    pub fn full(shape: &Shape) -> Self {
        SliceSpec {
            base: vec![0; shape.ndim()],
            range: shape.sizes().to_vec(),
        }
    }

    /// Checks the slice against `shape` and the keep-list of an N-to-M reorder.
    pub fn validate(&self, shape: &Shape, keep: &[usize]) -> Result<()> {
        let n = shape.ndim();
        if self.base.len() != n || self.range.len() != n {
            return Err(Error::Spec(format!(
                "slice has base/range of length {}/{} for a {n}-d shape",
                self.base.len(),
                self.range.len()
            )));
        }
        if keep.is_empty() || keep.len() > n {
            return Err(Error::Spec(format!("keep-list of length {} for {n} dims", keep.len())));
        }
        let mut kept = vec![false; n];
        for &d in keep {
            if d >= n || std::mem::replace(&mut kept[d], true) {
                return Err(Error::Spec(format!("keep-list {keep:?} is not a set of distinct dims < {n}")));
            }
        }
        for d in 0..n {
            let (b, r, s) = (self.base[d], self.range[d], shape.sizes()[d]);
            if r == 0 {
                return Err(Error::Spec(format!("range[{d}] is 0")));
            }
            if b.checked_add(r).is_none_or(|end| end > s) {
                return Err(Error::Spec(format!("base {b} + range {r} exceeds size {s} in dim {d}")));
            }
            if !kept[d] && r != 1 {
                return Err(Error::Spec(format!("dropped dim {d} must have range 1, got {r}")));
            }
        }
        Ok(())
    }
}

/// A dense array stored linearized with dimension 0 fastest.
#[derive(Clone, Debug, PartialEq)]
pub struct Tensor<T = f32> {
    shape: Shape,
    data: Vec<T>,
}

impl<T: Element> Tensor<T> {
    pub fn new(shape: Shape, data: Vec<T>) -> Result<Self> {
        if data.len() != shape.len() {
            return Err(Error::Shape(format!(
                "buffer holds {} elements but shape {shape} needs {}",
                data.len(),
                shape.len()
            )));
        }
        Ok(Tensor { shape, data })
    }

    pub fn from_vec(sizes: impl Into<Vec<usize>>, data: Vec<T>) -> Result<Self> {
        Tensor::new(Shape::new(sizes)?, data)
    }

    pub fn zeros(shape: Shape) -> Self {
        let data = vec![T::default(); shape.len()];
        Tensor { shape, data }
    }

    /// Builds a tensor by evaluating `f` at every linear offset.
    pub fn from_fn(shape: Shape, f: impl FnMut(usize) -> T) -> Self {
        let data = (0..shape.len()).map(f).collect();
        Tensor { shape, data }
    }

    pub fn shape(&self) -> &Shape {
        &self.shape
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [T] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<T> {
        self.data
    }

    pub fn get(&self, index: &[usize]) -> Result<T> {
        Ok(self.data[self.shape.linearize(index)?])
    }

    pub fn bit_eq(&self, other: &Tensor<T>) -> bool {
        self.shape == other.shape && bit_identical(&self.data, &other.data)
    }
}
