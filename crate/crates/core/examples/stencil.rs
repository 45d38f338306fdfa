//! Finite-difference Laplacians and a custom stencil read from text.
//!
//! cargo run --release --example stencil

use rearrange::oracle::naive_stencil;
use rearrange::stencil::{format_stencil, parse_stencil};
use rearrange::{fd_stencil, BoundaryPolicy, Executor, Grid2D, StencilVariant};

const BLUR: &str = "\
boundary: clamp-to-edge
# 3x3 box blur
-1 -1 0.1111111
-1  0 0.1111111
-1  1 0.1111111
 0 -1 0.1111111
 0  0 0.1111111
 0  1 0.1111111
 1 -1 0.1111111
 1  0 0.1111111
 1  1 0.1111111
";

fn main() -> rearrange::Result<()> {
    let exec = Executor::default();
    // f(x, y) = x^2 + y^2 has Laplacian 4 everywhere
    let grid = Grid2D::from_fn(64, 64, |r, c| (r * r + c * c) as f64)?;
    for k in 1..=4 {
        let lap = fd_stencil::<f64>(k)?;
        let out = exec.apply_stencil(&grid, &lap, BoundaryPolicy::ZeroPad, StencilVariant::Staged)?;
        println!("order {k}: {} taps, interior value {}, corner value {}", lap.taps().len(), out.at(32, 32), out.at(0, 0));
    }
    println!("\norder 2 as a stencil file:\n{}", format_stencil(&fd_stencil::<f64>(2)?, BoundaryPolicy::ZeroPad));

    let (blur, boundary) = parse_stencil::<f32>(BLUR)?;
    let img = Grid2D::from_fn(100, 150, |r, c| ((r / 10 + c / 10) % 2) as f32)?;
    for variant in [StencilVariant::Direct, StencilVariant::Staged] {
        let out = exec.apply_stencil(&img, &blur, boundary, variant)?;
        assert_eq!(out.data(), naive_stencil(&img, &blur, boundary)?.data());
        println!("box blur ({variant:?}, {boundary}): edge pixel {:.4}", out.at(10, 5));
    }
    Ok(())
}
