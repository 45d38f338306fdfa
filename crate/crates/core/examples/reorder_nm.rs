//! N-to-M reorder: pick a sub-box, drop some dims, permute the rest.
//!
//! cargo run --release --example reorder_nm

use rearrange::oracle::naive_slice;
use rearrange::{reorder_nm, Shape, SliceSpec, Tensor};

fn main() -> rearrange::Result<()> {
    // a stack of 8 images, 6 wide and 5 tall
    let src = Tensor::from_fn(Shape::new(vec![6, 5, 8])?, |i| i as f32);

    // image 3, transposed
    let slice = SliceSpec::new(vec![0, 0, 3], vec![6, 5, 1]);
    let img = reorder_nm(&src, &[1, 0], &slice)?;
    assert!(img.bit_eq(&naive_slice(&src, &[1, 0], &slice)?));
    println!("image 3 transposed: {}", img.shape());

    // column 2 of every image, as an [8, 5] matrix
    let slice = SliceSpec::new(vec![2, 0, 0], vec![1, 5, 8]);
    let cols = reorder_nm(&src, &[2, 1], &slice)?;
    println!("column 2 of each image: {}", cols.shape());
    for r in 0..5 {
        let row: Vec<f32> = (0..8).map(|i| cols.get(&[i, r]).unwrap()).collect();
        println!("  {row:?}");
    }
    Ok(())
}
