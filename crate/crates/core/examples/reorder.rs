//! N-d reorder. Size-1 dims and dims that stay adjacent are merged before
//! tiling, so the 5-d case below runs as a plain 3-d transpose.
//!
//! cargo run --release --example reorder

use rearrange::oracle::naive_reorder;
use rearrange::{reorder, reorder_access_path, OrderVec, Shape, Tensor};

fn main() -> rearrange::Result<()> {
    let cases = [
        ("256x256x1x256", "3,2,0,1"),
        ("64x16x1x64x16", "3,0,2,1,4"),
        ("7x5x3x2", "1,0,2,3"),
    ];
    for (shape, order) in cases {
        let shape: Shape = shape.parse()?;
        let order: OrderVec = order.parse()?;
        let src = Tensor::from_fn(shape.clone(), |i| i as f32);
        let out = reorder(&src, &order)?;
        assert!(out.bit_eq(&naive_reorder(&src, &order)?));
        println!("{shape} order {order} -> {}  ({})", out.shape(), reorder_access_path(&shape, &order)?);
    }

    // two reorders compose into one
    let src = Tensor::from_fn("4x3x2".parse()?, |i| i as f32);
    let (p, q): (OrderVec, OrderVec) = ("1,2,0".parse()?, "2,1,0".parse()?);
    let twice = reorder(&reorder(&src, &p)?, &q)?;
    assert!(twice.bit_eq(&reorder(&src, &p.then(&q)?)?));
    println!("reorder by {p} then {q} equals reorder by {}", p.then(&q)?);
    Ok(())
}
