//! The plain-copy kernel and the bandwidth every other kernel is compared to.
//!
//! cargo run --release --example copy_baseline -- [elements]

use rearrange::bench::{bandwidth_gbps, Harness};
use rearrange::{Executor, Shape, Tensor};
use std::time::Instant;

fn main() -> rearrange::Result<()> {
    let n: usize = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(1 << 22);
    let src = Tensor::from_fn(Shape::new(vec![n])?, |i| i as f32);

    let exec = Executor::default();
    let start = Instant::now();
    let out = exec.copy(&src)?;
    let secs = start.elapsed().as_secs_f64();
    assert!(out.bit_eq(&src));

    let bytes = (2 * n * 4) as u64;
    println!("tiled copy of {n} f32: {:.2} GB/s (single cold run)", bandwidth_gbps(bytes, secs));

    let harness = Harness::new(exec, 1);
    let baseline = harness.measure_baseline(n * 4, 10)?;
    println!("copy baseline, median of 10: {baseline:.2} GB/s");
    Ok(())
}
