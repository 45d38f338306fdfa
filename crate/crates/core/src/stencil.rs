//! Generic tiled 2D stencils.
//!
//! A [`StencilSpec`] is an ordered list of weighted taps. Applying it computes
//! `out(r, c) = Σ weight · in(r + drow, c + dcol)` with the sum accumulated in
//! tap order starting from zero, so the tiled executor and
//! [`naive_stencil`](crate::oracle::naive_stencil) agree bit for bit.
//!
//! Each tile loads its extent grown by the stencil radius (the apron) and runs
//! a branch-free inner loop over it. Reads outside the grid are resolved by the
//! [`BoundaryPolicy`].

use std::fmt;
use std::str::FromStr;

use num_traits::Float;

use crate::error::{Error, Result};
use crate::layout::{Element, Shape, Tensor};
use crate::schedule::{diagonal_tile_order, run_tiles, tile_grid, tile_region, DisjointOut, Executor, TileRegion};

/// One weighted neighbour.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tap<T> {
    pub drow: isize,
    pub dcol: isize,
    pub weight: T,
}

impl<T> Tap<T> {
    pub fn new(drow: isize, dcol: isize, weight: T) -> Self {
        Tap { drow, dcol, weight }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct StencilSpec<T> {
    taps: Vec<Tap<T>>,
    radius: usize,
}

impl<T: Element> StencilSpec<T> {
    pub fn new(taps: Vec<Tap<T>>) -> Result<Self> {
        if taps.is_empty() {
            return Err(Error::Spec("stencil has no taps".into()));
        }
        for (k, t) in taps.iter().enumerate() {
            if taps[..k].iter().any(|u| (u.drow, u.dcol) == (t.drow, t.dcol)) {
                return Err(Error::Spec(format!("duplicate tap offset ({}, {})", t.drow, t.dcol)));
            }
        }
        let radius = taps
            .iter()
            .map(|t| t.drow.unsigned_abs().max(t.dcol.unsigned_abs()))
            .max()
            .unwrap_or(0);
        Ok(StencilSpec { taps, radius })
    }

    pub fn taps(&self) -> &[Tap<T>] {
        &self.taps
    }

    /// Largest `|offset|` over all taps.
    pub fn radius(&self) -> usize {
        self.radius
    }
}

/// How reads outside the grid are resolved.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum BoundaryPolicy {
    #[default]
    ZeroPad,
    ClampToEdge,
    /// Points within `radius` of the edge are copied from the input.
    SkipBorder,
}

impl BoundaryPolicy {
    pub const ALL: [BoundaryPolicy; 3] = [
        BoundaryPolicy::ZeroPad,
        BoundaryPolicy::ClampToEdge,
        BoundaryPolicy::SkipBorder,
    ];

    pub fn name(self) -> &'static str {
        match self {
            BoundaryPolicy::ZeroPad => "zero-pad",
            BoundaryPolicy::ClampToEdge => "clamp-to-edge",
            BoundaryPolicy::SkipBorder => "skip-border",
        }
    }
}

impl fmt::Display for BoundaryPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for BoundaryPolicy {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        BoundaryPolicy::ALL
            .into_iter()
            .find(|p| p.name() == s.trim())
            .ok_or_else(|| Error::Spec(format!("unknown boundary policy `{s}`")))
    }
}

/// How a tile obtains its apron.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum StencilVariant {
    /// Tiles whose apron lies inside the grid read the input directly; only
    /// edge tiles go through scratch.
    Direct,
    /// Every tile copies its apron into tile-local scratch first.
    #[default]
    Staged,
}

impl StencilVariant {
    pub fn name(self) -> &'static str {
        match self {
            StencilVariant::Direct => "direct",
            StencilVariant::Staged => "staged",
        }
    }
}

impl fmt::Display for StencilVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for StencilVariant {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "direct" => Ok(StencilVariant::Direct),
            "staged" => Ok(StencilVariant::Staged),
            other => Err(Error::Spec(format!("unknown stencil variant `{other}`"))),
        }
    }
}

/// Row-contiguous 2D grid: element `(r, c)` lives at `r * cols + c`.
#[derive(Clone, Debug, PartialEq)]
pub struct Grid2D<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Element> Grid2D<T> {
    pub fn new(rows: usize, cols: usize, data: Vec<T>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::Shape(format!("empty grid {rows}x{cols}")));
        }
        if rows.checked_mul(cols) != Some(data.len()) {
            return Err(Error::Shape(format!(
                "{rows}x{cols} grid given {} elements",
                data.len()
            )));
        }
        Ok(Grid2D { rows, cols, data })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Result<Self> {
        let data = (0..rows * cols).map(|o| f(o / cols, o % cols)).collect();
        Grid2D::new(rows, cols, data)
    }

    /// A 2-d tensor with sizes `[cols, rows]` (dimension 0 is the column).
    pub fn from_tensor(t: Tensor<T>) -> Result<Self> {
        let &[cols, rows] = t.shape().sizes() else {
            return Err(Error::Shape(format!("stencil input must be 2-d, got {}", t.shape())));
        };
        Grid2D::new(rows, cols, t.into_data())
    }

    pub fn into_tensor(self) -> Tensor<T> {
        let shape = Shape::new(vec![self.cols, self.rows]).expect("grid extents are valid");
        Tensor::new(shape, self.data).expect("grid buffer matches its extents")
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    pub fn at(&self, r: usize, c: usize) -> T {
        self.data[r * self.cols + c]
    }
}

/// Central-difference second derivative coefficients `c_0..=c_k` for half-width `k`.
const FD_COEFFS: [&[f64]; 4] = [
    &[-2.0, 1.0],
    &[-5.0 / 2.0, 4.0 / 3.0, -1.0 / 12.0],
    &[-49.0 / 18.0, 3.0 / 2.0, -3.0 / 20.0, 1.0 / 90.0],
    &[-205.0 / 72.0, 8.0 / 5.0, -1.0 / 5.0, 8.0 / 315.0, -1.0 / 560.0],
];

/// Axis-cross Laplacian of half-width `order` (1..=4), accurate to
/// `O(h^(2·order))`, on unit spacing. Taps: centre first, then for each
/// distance `k` the north, south, west and east neighbours.
pub fn fd_stencil<T: Element + Float>(order: usize) -> Result<StencilSpec<T>> {
    let coeffs = order
        .checked_sub(1)
        .and_then(|i| FD_COEFFS.get(i))
        .ok_or_else(|| Error::Spec(format!("finite-difference order must be 1..=4, got {order}")))?;
    let w = |x: f64| T::from(x).expect("coefficient representable");
    let mut taps = vec![Tap::new(0, 0, w(2.0 * coeffs[0]))];
    for (k, &c) in coeffs.iter().enumerate().skip(1) {
        let k = k as isize;
        taps.extend([
            Tap::new(-k, 0, w(c)),
            Tap::new(k, 0, w(c)),
            Tap::new(0, -k, w(c)),
            Tap::new(0, k, w(c)),
        ]);
    }
    StencilSpec::new(taps)
}

/// Parses the text stencil format: one `drow dcol weight` tap per line, `#`
/// comments, and an optional `boundary: <policy>` line (zero-pad otherwise).
pub fn parse_stencil<T: Element + FromStr>(text: &str) -> Result<(StencilSpec<T>, BoundaryPolicy)> {
    let mut boundary = BoundaryPolicy::default();
    let mut taps = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if let Some(policy) = line.strip_prefix("boundary:") {
            boundary = policy.parse()?;
            continue;
        }
        let bad = || Error::Spec(format!("line {}: expected `drow dcol weight`, got `{raw}`", lineno + 1));
        let fields: Vec<&str> = line.split_whitespace().collect();
        let [dr, dc, w] = fields[..] else { return Err(bad()) };
        taps.push(Tap::new(
            dr.parse().map_err(|_| bad())?,
            dc.parse().map_err(|_| bad())?,
            w.parse().map_err(|_| bad())?,
        ));
    }
    Ok((StencilSpec::new(taps)?, boundary))
}

/// Renders a stencil in the format read by [`parse_stencil`].
pub fn format_stencil<T: Element + fmt::Display>(spec: &StencilSpec<T>, boundary: BoundaryPolicy) -> String {
    let mut s = format!("boundary: {boundary}\n");
    for t in spec.taps() {
        s.push_str(&format!("{} {} {}\n", t.drow, t.dcol, t.weight));
    }
    s
}

/// Input rectangle a tile reads: its region grown by `radius` on every side,
/// as signed bounds `[r0, r1) × [c0, c1)` that may leave the grid.
pub fn apron_bounds(region: &TileRegion, radius: usize) -> (isize, isize, isize, isize) {
    let r = radius as isize;
    (
        region.row0 as isize - r,
        (region.row0 + region.rows) as isize + r,
        region.col0 as isize - r,
        (region.col0 + region.cols) as isize + r,
    )
}

fn check_grid<T: Element>(grid: &Grid2D<T>, radius: usize, boundary: BoundaryPolicy) -> Result<()> {
    if boundary == BoundaryPolicy::SkipBorder && (grid.rows <= 2 * radius || grid.cols <= 2 * radius) {
        return Err(Error::Spec(format!(
            "{}x{} grid too small for skip-border with radius {radius}",
            grid.rows, grid.cols
        )));
    }
    Ok(())
}

/// Fills `scratch` (row width `sw`) with the apron of `region`.
fn load_apron<T: Element + Float>(
    grid: &Grid2D<T>,
    region: &TileRegion,
    radius: usize,
    boundary: BoundaryPolicy,
    scratch: &mut [T],
) {
    let (r0, r1, c0, c1) = apron_bounds(region, radius);
    let sw = (c1 - c0) as usize;
    let (rows, cols) = (grid.rows as isize, grid.cols as isize);
    // columns of the apron that fall inside the grid
    let in_c0 = c0.max(0);
    let in_c1 = c1.min(cols);
    let left = (in_c0 - c0) as usize;
    let mid = (in_c1 - in_c0) as usize;
    for (ar, dst) in (r0..r1).zip(scratch.chunks_exact_mut(sw)) {
        let src_row = match boundary {
            BoundaryPolicy::ClampToEdge => Some(ar.clamp(0, rows - 1)),
            _ if (0..rows).contains(&ar) => Some(ar),
            _ => None,
        };
        let Some(sr) = src_row else {
            dst.fill(T::zero());
            continue;
        };
        let row = &grid.data[sr as usize * grid.cols..][..grid.cols];
        dst[left..left + mid].copy_from_slice(&row[in_c0 as usize..in_c1 as usize]);
        let (lo, hi) = match boundary {
            BoundaryPolicy::ClampToEdge => (row[0], row[grid.cols - 1]),
            _ => (T::zero(), T::zero()),
        };
        dst[..left].fill(lo);
        dst[left + mid..].fill(hi);
    }
}

impl Executor {
    /// Applies `stencil` to `grid`, tiled and in parallel.
    pub fn apply_stencil<T: Element + Float>(
        &self,
        grid: &Grid2D<T>,
        stencil: &StencilSpec<T>,
        boundary: BoundaryPolicy,
        variant: StencilVariant,
    ) -> Result<Grid2D<T>> {
        let mut out = vec![T::zero(); grid.data.len()];
        self.apply_stencil_into(grid, stencil, boundary, variant, &mut out)?;
        Grid2D::new(grid.rows, grid.cols, out)
    }

    /// As [`Executor::apply_stencil`], writing into a preallocated buffer of
    /// `rows * cols` elements.
    pub fn apply_stencil_into<T: Element + Float>(
        &self,
        grid: &Grid2D<T>,
        stencil: &StencilSpec<T>,
        boundary: BoundaryPolicy,
        variant: StencilVariant,
        out: &mut [T],
    ) -> Result<()> {
        let radius = stencil.radius();
        check_grid(grid, radius, boundary)?;
        if out.len() != grid.data.len() {
            return Err(Error::Shape(format!(
                "output buffer of {} elements for a {}x{} grid",
                out.len(),
                grid.rows,
                grid.cols
            )));
        }
        let (rows, cols) = (grid.rows, grid.cols);
        let (grid_rows, grid_cols) = tile_grid(rows, cols, &self.tile)?;
        let order = diagonal_tile_order(grid_rows, grid_cols);
        let shared = DisjointOut::new(out);
        let skip = boundary == BoundaryPolicy::SkipBorder;
        let rad = radius as isize;

        run_tiles(&order, self.workers, |tile| {
            let region = tile_region(tile, rows, cols, &self.tile);
            let (r0, r1, c0, c1) = apron_bounds(&region, radius);
            let inside = r0 >= 0 && c0 >= 0 && r1 <= rows as isize && c1 <= cols as isize;

            // source buffer, its row width, and the offset of the tile origin in it
            let staged;
            let (src, width, origin): (&[T], isize, isize) = if variant == StencilVariant::Direct && inside {
                (&grid.data, cols as isize, (region.row0 * cols + region.col0) as isize)
            } else {
                let sw = (c1 - c0) as usize;
                let mut scratch = vec![T::zero(); sw * (r1 - r0) as usize];
                load_apron(grid, &region, radius, boundary, &mut scratch);
                staged = scratch;
                (&staged, sw as isize, rad * sw as isize + rad)
            };
            let offsets: Vec<(isize, T)> = stencil
                .taps()
                .iter()
                .map(|t| (t.drow * width + t.dcol, t.weight))
                .collect();

            let mut acc = vec![T::zero(); region.cols];
            for lr in 0..region.rows {
                let r = region.row0 + lr;
                let input_row = &grid.data[r * cols + region.col0..][..region.cols];
                // SAFETY: tiles partition the grid, each row segment belongs to one tile.
                let dst = unsafe { shared.slice(r * cols + region.col0, region.cols) };
                if skip && (r < radius || r >= rows - radius) {
                    dst.copy_from_slice(input_row);
                    continue;
                }
                acc.fill(T::zero());
                let row_origin = origin + lr as isize * width;
                for &(off, w) in &offsets {
                    let start = (row_origin + off) as usize;
                    for (a, &x) in acc.iter_mut().zip(&src[start..start + region.cols]) {
                        *a = *a + w * x;
                    }
                }
                dst.copy_from_slice(&acc);
                if skip {
                    for (lc, d) in dst.iter_mut().enumerate() {
                        let c = region.col0 + lc;
                        if c < radius || c >= cols - radius {
                            *d = input_row[lc];
                        }
                    }
                }
            }
            Ok(())
        })
    }
}

/// [`Executor::apply_stencil`] with the default executor and staged aprons.
pub fn apply_stencil<T: Element + Float>(
    grid: &Grid2D<T>,
    stencil: &StencilSpec<T>,
    boundary: BoundaryPolicy,
) -> Result<Grid2D<T>> {
    Executor::default().apply_stencil(grid, stencil, boundary, StencilVariant::Staged)
}
