//! Writing and reading `.rrt` tensor files.
//!
//! cargo run --release --example tensor_file -- [path]

use rearrange::format::{self, AnyTensor};
use rearrange::{reorder, OrderVec, Shape, Tensor};

fn main() -> rearrange::Result<()> {
    let path = std::env::args()
        .nth(1)
        .unwrap_or_else(|| std::env::temp_dir().join("example.rrt").display().to_string());

    let t = Tensor::from_fn(Shape::new(vec![4, 3, 2])?, |i| i as f64 * 0.5);
    format::save(&path, &t)?;
    let bytes = std::fs::metadata(&path)?.len();
    println!("wrote {path}: {} f64 in {bytes} bytes", t.shape().len());

    match format::load(&path)? {
        AnyTensor::F64(back) => {
            assert!(back.bit_eq(&t));
            let out = reorder(&back, &OrderVec::new(vec![2, 1, 0])?)?;
            println!("read back {}, reordered to {}", back.shape(), out.shape());
        }
        AnyTensor::F32(_) => unreachable!("saved as f64"),
    }

    let head = format::encode(&Tensor::from_vec(vec![2], vec![1.0f32, 2.0])?)?;
    println!("header of a 2-element f32 file: {:02x?}", &head[..14]);
    Ok(())
}
