//! The anti-diagonal order tiles are handed to workers in.
//!
//! cargo run --example tile_schedule -- [rows] [cols]

use rearrange::schedule::{tile_region, TileConfig};
use rearrange::{diagonal_tile_order, tile_grid};

fn main() -> rearrange::Result<()> {
    let mut args = std::env::args().skip(1).map(|a| a.parse::<usize>().expect("size"));
    let rows = args.next().unwrap_or(100);
    let cols = args.next().unwrap_or(150);
    let cfg = TileConfig::default();
    let (gr, gc) = tile_grid(rows, cols, &cfg)?;
    let order = diagonal_tile_order(gr, gc);

    println!("{rows}x{cols} with {}x{} tiles: {gr}x{gc} grid, launch order:", cfg.tile_rows, cfg.tile_cols);
    let mut rank = vec![0; gr * gc];
    for (i, t) in order.iter().enumerate() {
        rank[t.row * gc + t.col] = i;
    }
    for r in 0..gr {
        let line: Vec<String> = (0..gc).map(|c| format!("{:>3}", rank[r * gc + c])).collect();
        println!("  {}", line.join(""));
    }
    let last = order.last().unwrap();
    println!("last tile {last:?} covers {:?}", tile_region(*last, rows, cols, &cfg));
    Ok(())
}
