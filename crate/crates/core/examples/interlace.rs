//! Splitting interleaved complex samples into real and imaginary planes and
//! merging them back.
//!
//! cargo run --release --example interlace

use rearrange::{deinterlace, interlace};

fn main() -> rearrange::Result<()> {
    let n = 1 << 20;
    // re, im, re, im, ...
    let samples: Vec<f32> = (0..2 * n).map(|i| if i % 2 == 0 { (i / 2) as f32 } else { -((i / 2) as f32) }).collect();

    let planes = deinterlace(&samples, 2)?;
    let (re, im) = (&planes[0], &planes[1]);
    println!("re[..4] = {:?}", &re[..4]);
    println!("im[..4] = {:?}", &im[..4]);

    let back = interlace(&[re.as_slice(), im.as_slice()])?;
    assert_eq!(back, samples);

    // wider records: xyz + rgb
    let fields: Vec<Vec<f32>> = (0..6).map(|f| vec![f as f32; 4]).collect();
    let refs: Vec<&[f32]> = fields.iter().map(Vec::as_slice).collect();
    println!("6 fields interleaved: {:?}", &interlace(&refs)?[..12]);
    Ok(())
}
