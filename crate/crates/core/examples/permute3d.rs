//! All six orders of a 3-d array, checked against the oracle and inverted.
//!
//! cargo run --release --example permute3d

use rearrange::oracle::naive_reorder;
use rearrange::{permute3d, reorder_access_path, OrderVec, Shape, Tensor};

fn main() -> rearrange::Result<()> {
    let shape = Shape::new(vec![48, 32, 24])?;
    let src = Tensor::from_fn(shape.clone(), |i| i as f32);

    for order in ["0,1,2", "0,2,1", "1,0,2", "1,2,0", "2,0,1", "2,1,0"] {
        let order: OrderVec = order.parse()?;
        let out = permute3d(&src, &order)?;
        assert!(out.bit_eq(&naive_reorder(&src, &order)?));
        assert!(permute3d(&out, &order.inverse())?.bit_eq(&src));
        println!(
            "order {order}: {shape} -> {}  path {}",
            out.shape(),
            reorder_access_path(&shape, &order)?
        );
    }
    Ok(())
}
