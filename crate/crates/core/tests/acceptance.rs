//! Acceptance suite. Each criterion prints one PASS/FAIL line; the process
//! exits nonzero if any criterion fails. Pass a substring to run a subset.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::collections::HashSet;
use std::panic::{self, AssertUnwindSafe};
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use itertools::Itertools;
use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};

use rearrange::bench::{median, BandwidthRow, REPORT_COLUMNS};
use rearrange::format::{self, AnyTensor};
use rearrange::oracle::{naive_deinterlace, naive_interlace, naive_reorder, naive_slice, naive_stencil};
use rearrange::schedule::max_workers;
use rearrange::{
    diagonal_tile_order, fd_stencil, BoundaryPolicy, Executor, Grid2D, OrderVec, Shape, SliceSpec, StencilSpec,
    StencilVariant, Tap, Tensor, TileConfig,
};

type Outcome = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn ok<T, E: std::fmt::Display>(r: Result<T, E>) -> Result<T, String> {
    r.map_err(|e| e.to_string())
}

fn random_tensor(rng: &mut StdRng, sizes: Vec<usize>) -> Tensor<f32> {
    let shape = Shape::new(sizes).unwrap();
    Tensor::from_fn(shape, |_| rng.gen::<f32>() * 2.0 - 1.0)
}

fn executors() -> Vec<Executor> {
    vec![
        Executor::default(),
        Executor::new(TileConfig::new(2, 2, 1).unwrap(), 2),
        Executor::new(TileConfig::new(4, 3, 2).unwrap(), 3),
        Executor::new(TileConfig::new(8, 16, 4).unwrap(), 1),
    ]
}

fn random_executor(rng: &mut StdRng) -> Executor {
    let execs = executors();
    execs[rng.gen_range(0..execs.len())]
}

fn reorder_exhaustive() -> Outcome {
    let execs = executors();
    let mut cases = 0;
    for n in 1..=4usize {
        for sizes in (0..n).map(|_| 1..=3usize).multi_cartesian_product() {
            let len: usize = sizes.iter().product();
            let t = Tensor::from_vec(sizes.clone(), (0..len).map(|v| v as f32 + 0.5).collect()).unwrap();
            for perm in (0..n).permutations(n) {
                let order = OrderVec::new(perm).unwrap();
                let want = ok(naive_reorder(&t, &order))?;
                for exec in &execs {
                    let got = ok(exec.reorder(&t, &order))?;
                    ensure!(got.bit_eq(&want), "sizes {sizes:?} order {order} tile {:?}", exec.tile);
                    cases += 1;
                }
            }
        }
    }
    Ok(format!("{cases} tiled runs bit-identical"))
}

fn permute3d_random() -> Outcome {
    let mut rng = StdRng::seed_from_u64(2);
    for trial in 0..20 {
        let sizes: Vec<usize> = (0..3).map(|_| rng.gen_range(1..=64)).collect();
        let t = random_tensor(&mut rng, sizes.clone());
        let exec = random_executor(&mut rng);
        for perm in (0..3).permutations(3) {
            let order = OrderVec::new(perm).unwrap();
            let got = ok(exec.permute3d(&t, &order))?;
            ensure!(
                got.bit_eq(&ok(naive_reorder(&t, &order))?),
                "trial {trial} sizes {sizes:?} order {order}"
            );
            let back = ok(exec.permute3d(&got, &order.inverse()))?;
            ensure!(back.bit_eq(&t), "round trip trial {trial} sizes {sizes:?} order {order}");
        }
    }
    Ok("20 trials x 6 orders, round trips exact".into())
}

fn reorder_nm_random() -> Outcome {
    let mut rng = StdRng::seed_from_u64(3);
    for case in 0..200 {
        let n = rng.gen_range(1..=5);
        let sizes: Vec<usize> = (0..n).map(|_| rng.gen_range(1..=9)).collect();
        let t = random_tensor(&mut rng, sizes.clone());
        let mut dims: Vec<usize> = (0..n).collect();
        dims.shuffle(&mut rng);
        let keep = dims[..rng.gen_range(1..=n)].to_vec();
        let mut base = vec![0; n];
        let mut range = vec![1; n];
        for d in 0..n {
            base[d] = rng.gen_range(0..sizes[d]);
            if keep.contains(&d) {
                range[d] = rng.gen_range(1..=sizes[d] - base[d]);
            }
        }
        let slice = SliceSpec::new(base, range);
        let exec = random_executor(&mut rng);
        let got = ok(exec.reorder_nm(&t, &keep, &slice))?;
        ensure!(
            got.bit_eq(&ok(naive_slice(&t, &keep, &slice))?),
            "case {case} sizes {sizes:?} keep {keep:?} slice {slice:?}"
        );
    }
    for case in 0..20 {
        let n = rng.gen_range(1..=5);
        let sizes: Vec<usize> = (0..n).map(|_| rng.gen_range(1..=9)).collect();
        let t = random_tensor(&mut rng, sizes.clone());
        let mut keep: Vec<usize> = (0..n).collect();
        keep.shuffle(&mut rng);
        let full = ok(Executor::default().reorder_nm(&t, &keep, &SliceSpec::full(t.shape())))?;
        let order = OrderVec::new(keep.clone()).unwrap();
        ensure!(
            full.bit_eq(&ok(Executor::default().reorder(&t, &order))?),
            "full-range case {case} sizes {sizes:?} keep {keep:?}"
        );
    }
    Ok("200 sliced cases match, 20 full-range cases equal reorder".into())
}

fn interlace_round_trip() -> Outcome {
    let mut rng = StdRng::seed_from_u64(4);
    let mut checked = 0;
    for n in 1..=9 {
        for len in [1, 63, 65, rng.gen_range(1..=1000), rng.gen_range(1..=1_000_000), 1_000_000] {
            let arrays: Vec<Vec<f32>> = (0..n).map(|_| (0..len).map(|_| rng.gen()).collect()).collect();
            let refs: Vec<&[f32]> = arrays.iter().map(Vec::as_slice).collect();
            let exec = random_executor(&mut rng);
            let merged = ok(exec.interlace(&refs))?;
            ensure!(
                rearrange::bit_identical(&merged, &ok(naive_interlace(&refs))?),
                "interlace n={n} len={len}"
            );
            let split = ok(exec.deinterlace(&merged, n))?;
            ensure!(split.len() == n, "deinterlace n={n} returned {} arrays", split.len());
            for (a, b) in split.iter().zip(&arrays) {
                ensure!(rearrange::bit_identical(a, b), "round trip n={n} len={len}");
            }
            let naive = ok(naive_deinterlace(&merged, n))?;
            ensure!(split == naive, "deinterlace vs oracle n={n} len={len}");
            checked += 1;
        }
    }
    Ok(format!("{checked} (n, length) pairs, n = 1..9"))
}

fn random_stencil(rng: &mut StdRng, radius: isize) -> StencilSpec<f32> {
    let offsets: Vec<(isize, isize)> = (-radius..=radius).cartesian_product(-radius..=radius).collect();
    let edge: Vec<_> = offsets
        .iter()
        .copied()
        .filter(|(r, c)| r.abs().max(c.abs()) == radius)
        .collect();
    let mut chosen = vec![*edge.choose(rng).unwrap()];
    for &o in &offsets {
        if !chosen.contains(&o) && rng.gen_bool(0.3) {
            chosen.push(o);
        }
    }
    chosen.shuffle(rng);
    let taps = chosen
        .into_iter()
        .map(|(r, c)| Tap::new(r, c, rng.gen_range(-2.0f32..2.0)))
        .collect();
    StencilSpec::new(taps).unwrap()
}

fn stencil_random() -> Outcome {
    let mut rng = StdRng::seed_from_u64(5);
    for case in 0..100 {
        let radius = rng.gen_range(1..=4);
        let boundary = BoundaryPolicy::ALL[case % 3];
        let min = if boundary == BoundaryPolicy::SkipBorder { 2 * radius + 1 } else { 1 };
        let rows = rng.gen_range(min..=512);
        let cols = rng.gen_range(min..=512);
        let grid = Grid2D::from_fn(rows, cols, |_, _| rng.gen_range(-1.0f32..1.0)).unwrap();
        let stencil = random_stencil(&mut rng, radius as isize);
        let want = ok(naive_stencil(&grid, &stencil, boundary))?;
        let exec = random_executor(&mut rng);
        for variant in [StencilVariant::Direct, StencilVariant::Staged] {
            let got = ok(exec.apply_stencil(&grid, &stencil, boundary, variant))?;
            ensure!(
                rearrange::bit_identical(got.data(), want.data()),
                "case {case} {rows}x{cols} radius {radius} {boundary} {variant:?}"
            );
        }
    }
    Ok("100 cases, both variants bit-identical".into())
}

fn stencil_polynomial() -> Outcome {
    const N: usize = 64;
    let quad = Grid2D::from_fn(N, N, |r, c| (c * c + r * r) as f64).unwrap();
    let affine = Grid2D::from_fn(N, N, |r, c| 0.5 + 1.25 * c as f64 - 0.75 * r as f64).unwrap();
    let mut worst_rel = 0.0f64;
    let mut worst_abs = 0.0f64;
    for k in 1..=4 {
        let stencil = ok(fd_stencil::<f64>(k))?;
        for variant in [StencilVariant::Direct, StencilVariant::Staged] {
            let exec = Executor::default();
            let q = ok(exec.apply_stencil(&quad, &stencil, BoundaryPolicy::ZeroPad, variant))?;
            let a = ok(exec.apply_stencil(&affine, &stencil, BoundaryPolicy::ZeroPad, variant))?;
            for r in k..N - k {
                for c in k..N - k {
                    let rel = (q.at(r, c) - 4.0).abs() / 4.0;
                    let abs = a.at(r, c).abs();
                    ensure!(rel <= 1e-4, "order {k} quadratic at ({r},{c}) = {}", q.at(r, c));
                    ensure!(abs <= 1e-6, "order {k} affine at ({r},{c}) = {}", a.at(r, c));
                    worst_rel = worst_rel.max(rel);
                    worst_abs = worst_abs.max(abs);
                }
            }
        }
    }
    Ok(format!("orders 1..4, worst rel {worst_rel:.1e}, worst abs {worst_abs:.1e}"))
}

fn determinism() -> Outcome {
    let mut rng = StdRng::seed_from_u64(7);
    let tile = TileConfig::new(16, 16, 4).unwrap();
    let counts = [1, 2, max_workers()];
    let execs: Vec<Executor> = counts.iter().map(|&w| Executor::new(tile, w)).collect();

    fn same<T: PartialEq + std::fmt::Debug>(kernel: &str, case: usize, outs: &[T]) -> Result<(), String> {
        ensure!(outs.windows(2).all(|w| w[0] == w[1]), "{kernel} case {case} differs across worker counts");
        Ok(())
    }
    let bits = |v: &[f32]| v.iter().map(|x| x.to_bits()).collect::<Vec<_>>();

    for case in 0..10 {
        let len = rng.gen_range(1..=200_000);
        let t = random_tensor(&mut rng, vec![len]);
        let outs: Vec<_> = execs.iter().map(|e| e.copy(&t).map(|o| bits(o.data()))).collect::<Result<_, _>>().map_err(|e| e.to_string())?;
        same("copy", case, &outs)?;

        let sizes: Vec<usize> = (0..3).map(|_| rng.gen_range(1..=48)).collect();
        let t = random_tensor(&mut rng, sizes);
        let mut perm: Vec<usize> = (0..3).collect();
        perm.shuffle(&mut rng);
        let order = OrderVec::new(perm).unwrap();
        let outs: Vec<_> = execs.iter().map(|e| e.permute3d(&t, &order).map(|o| bits(o.data()))).collect::<Result<_, _>>().map_err(|e| e.to_string())?;
        same("permute3d", case, &outs)?;

        let n = rng.gen_range(1..=5);
        let sizes: Vec<usize> = (0..n).map(|_| rng.gen_range(1..=12)).collect();
        let t = random_tensor(&mut rng, sizes.clone());
        let mut perm: Vec<usize> = (0..n).collect();
        perm.shuffle(&mut rng);
        let order = OrderVec::new(perm.clone()).unwrap();
        let outs: Vec<_> = execs.iter().map(|e| e.reorder(&t, &order).map(|o| bits(o.data()))).collect::<Result<_, _>>().map_err(|e| e.to_string())?;
        same("reorder", case, &outs)?;

        let keep = perm[..rng.gen_range(1..=n)].to_vec();
        let base: Vec<usize> = sizes.iter().map(|&s| rng.gen_range(0..s)).collect();
        let range: Vec<usize> = (0..n)
            .map(|d| if keep.contains(&d) { sizes[d] - base[d] } else { 1 })
            .collect();
        let slice = SliceSpec::new(base, range);
        let outs: Vec<_> = execs.iter().map(|e| e.reorder_nm(&t, &keep, &slice).map(|o| bits(o.data()))).collect::<Result<_, _>>().map_err(|e| e.to_string())?;
        same("reorder-nm", case, &outs)?;

        let k = rng.gen_range(1..=9);
        let len = rng.gen_range(1..=50_000);
        let arrays: Vec<Vec<f32>> = (0..k).map(|_| (0..len).map(|_| rng.gen()).collect()).collect();
        let refs: Vec<&[f32]> = arrays.iter().map(Vec::as_slice).collect();
        let outs: Vec<_> = execs.iter().map(|e| e.interlace(&refs).map(|o| bits(&o))).collect::<Result<_, _>>().map_err(|e| e.to_string())?;
        same("interlace", case, &outs)?;

        let merged: Vec<f32> = (0..k * len).map(|_| rng.gen()).collect();
        let outs: Vec<_> = execs
            .iter()
            .map(|e| e.deinterlace(&merged, k).map(|o| o.iter().map(|a| bits(a)).collect::<Vec<_>>()))
            .collect::<Result<_, _>>()
            .map_err(|e| e.to_string())?;
        same("deinterlace", case, &outs)?;

        let radius = rng.gen_range(1..=4);
        let grid = Grid2D::from_fn(rng.gen_range(9..=200), rng.gen_range(9..=200), |_, _| rng.gen::<f32>()).unwrap();
        let stencil = random_stencil(&mut rng, radius);
        let boundary = BoundaryPolicy::ALL[case % 3];
        for variant in [StencilVariant::Direct, StencilVariant::Staged] {
            let outs: Vec<_> = execs
                .iter()
                .map(|e| e.apply_stencil(&grid, &stencil, boundary, variant).map(|o| bits(o.data())))
                .collect::<Result<_, _>>()
                .map_err(|e| e.to_string())?;
            same("stencil", case, &outs)?;
        }
    }
    Ok(format!("7 kernels x 10 cases, workers {counts:?}"))
}

fn diagonal_bijection() -> Outcome {
    for rows in 1..=64 {
        for cols in 1..=64 {
            let order = diagonal_tile_order(rows, cols);
            ensure!(order.len() == rows * cols, "{rows}x{cols}: {} tiles", order.len());
            let mut seen = vec![false; rows * cols];
            let mut last_diag = 0;
            for t in &order {
                ensure!(t.row < rows && t.col < cols, "{rows}x{cols}: tile {t:?} out of range");
                ensure!(!std::mem::replace(&mut seen[t.row * cols + t.col], true), "{rows}x{cols}: {t:?} twice");
                ensure!(t.row + t.col >= last_diag, "{rows}x{cols}: diagonal order broken at {t:?}");
                last_diag = t.row + t.col;
            }
        }
    }
    Ok("all grids up to 64x64".into())
}

fn run_bench(args: &[&str]) -> Result<(), String> {
    let out = Command::new(env!("CARGO_BIN_EXE_rearrange"))
        .arg("bench")
        .args(args)
        .output()
        .map_err(|e| e.to_string())?;
    ensure!(
        out.status.success(),
        "bench {args:?} exited with {}: {}",
        out.status,
        String::from_utf8_lossy(&out.stderr)
    );
    Ok(())
}

fn check_rows(rows: &[BandwidthRow]) -> Result<(), String> {
    for row in rows {
        let want = row.bandwidth_gbps / row.baseline_gbps;
        ensure!(
            (row.relative_efficiency - want).abs() <= 1e-9 * want.abs().max(1.0),
            "{} {} {}: relative_efficiency {} vs {}",
            row.kernel,
            row.shape,
            row.params,
            row.relative_efficiency,
            want
        );
        ensure!(row.bandwidth_gbps > 0.0 && row.elapsed_s > 0.0, "{} {}: non-positive timing", row.kernel, row.shape);
    }
    Ok(())
}

fn json_key_order(text: &str) -> Result<Vec<String>, String> {
    let value: serde_json::Value = ok(serde_json::from_str(text))?;
    let first = value.as_array().and_then(|a| a.first()).ok_or("empty JSON report")?;
    let obj = first.as_object().ok_or("JSON row is not an object")?;
    let mut keys: Vec<String> = obj.keys().cloned().collect();
    let head = &text[..text.find('}').ok_or("unterminated JSON object")?];
    keys.sort_by_key(|k| head.find(&format!("\"{k}\"")));
    Ok(keys)
}

fn bench_suite() -> Outcome {
    let dir = ok(tempfile::tempdir())?;
    let csv_path = dir.path().join("suite.csv");
    let start = Instant::now();
    run_bench(&["--suite", "paper", "--format", "csv", "--out", csv_path.to_str().unwrap()])?;
    let suite_time = start.elapsed();
    ensure!(suite_time < Duration::from_secs(300), "suite took {suite_time:?}");

    let mut reader = ok(csv::Reader::from_path(&csv_path))?;
    let header: Vec<String> = ok(reader.headers())?.iter().map(String::from).collect();
    ensure!(header == REPORT_COLUMNS, "CSV header {header:?}");
    let rows: Vec<BandwidthRow> = ok(reader.deserialize().collect())?;
    ensure!(!rows.is_empty(), "empty report");
    check_rows(&rows)?;
    let kernels: HashSet<&str> = rows.iter().map(|r| r.kernel.as_str()).collect();
    for k in ["copy", "permute3d", "reorder", "interlace", "deinterlace", "stencil"] {
        ensure!(kernels.contains(k), "no {k} rows");
    }
    let identity = rows
        .iter()
        .find(|r| r.kernel == "permute3d" && r.params.contains("order=0,1,2"))
        .ok_or("no identity permute3d row")?;
    ensure!(
        (0.85..=1.15).contains(&identity.relative_efficiency),
        "identity permute relative_efficiency {}",
        identity.relative_efficiency
    );

    let json_path = dir.path().join("one.json");
    run_bench(&[
        "--op", "reorder-nm", "--shape", "64x64x64", "--keep", "0,2", "--base", "0,5,0", "--range", "64,1,64",
        "--reps", "3", "--warmup", "1", "--format", "json", "--out", json_path.to_str().unwrap(),
    ])?;
    let text = ok(std::fs::read_to_string(&json_path))?;
    ensure!(json_key_order(&text)? == REPORT_COLUMNS, "JSON keys {:?}", json_key_order(&text)?);
    let json_rows: Vec<BandwidthRow> = ok(serde_json::from_str(&text))?;
    check_rows(&json_rows)?;

    Ok(format!(
        "{} rows in {:.0} s, identity permute at {:.3} of copy",
        rows.len(),
        suite_time.as_secs_f64(),
        identity.relative_efficiency
    ))
}

fn median_seconds(reps: usize, mut f: impl FnMut()) -> f64 {
    let samples: Vec<f64> = (0..reps)
        .map(|_| {
            let t = Instant::now();
            f();
            t.elapsed().as_secs_f64()
        })
        .collect();
    median(&samples)
}

fn transpose_sanity() -> Outcome {
    const SIDE: usize = 2048;
    let mut rng = StdRng::seed_from_u64(10);
    let t = random_tensor(&mut rng, vec![SIDE, SIDE]);
    let order = OrderVec::new(vec![1, 0]).unwrap();
    let exec = Executor::default();
    let bytes = (2 * SIDE * SIDE * 4) as f64;

    let tiled = exec.reorder(&t, &order).unwrap();
    ensure!(tiled.bit_eq(&naive_reorder(&t, &order).unwrap()), "tiled transpose differs from oracle");
    let tiled_s = median_seconds(10, || {
        std::hint::black_box(exec.reorder(&t, &order).unwrap());
    });
    let naive_s = median_seconds(10, || {
        std::hint::black_box(naive_reorder(&t, &order).unwrap());
    });
    let copy_s = median_seconds(10, || {
        std::hint::black_box(exec.copy(&t).unwrap());
    });
    let (tiled_bw, naive_bw, copy_bw) = (bytes / tiled_s / 1e9, bytes / naive_s / 1e9, bytes / copy_s / 1e9);
    ensure!(tiled_bw >= naive_bw, "tiled {tiled_bw:.2} GB/s below naive {naive_bw:.2} GB/s");
    Ok(format!(
        "tiled {tiled_bw:.2} GB/s, naive {naive_bw:.2} GB/s ({:.1}x), copy {copy_bw:.2} GB/s; \
         tiled reaches {:.0}% of copy (GPU reference figure: 80-90%, not gated)",
        tiled_bw / naive_bw,
        100.0 * tiled_bw / copy_bw
    ))
}

fn round_trip(path: &Path, tensor: AnyTensor) -> Result<(), String> {
    match &tensor {
        AnyTensor::F32(t) => ok(format::save(path, t))?,
        AnyTensor::F64(t) => ok(format::save(path, t))?,
    }
    let back = ok(format::load(path))?;
    let same = match (&tensor, &back) {
        (AnyTensor::F32(a), AnyTensor::F32(b)) => a.bit_eq(b),
        (AnyTensor::F64(a), AnyTensor::F64(b)) => a.bit_eq(b),
        _ => false,
    };
    ensure!(same, "{:?} {} did not survive", tensor.dtype(), tensor.shape());
    Ok(())
}

fn file_round_trip() -> Outcome {
    let mut rng = StdRng::seed_from_u64(11);
    let dir = ok(tempfile::tempdir())?;
    let mut files = 0;
    for ndim in 1..=5 {
        for rep in 0..10 {
            let sizes: Vec<usize> = (0..ndim).map(|_| rng.gen_range(1..=8)).collect();
            let shape = Shape::new(sizes).unwrap();
            // raw bit patterns cover NaN payloads, infinities and subnormals
            let a = Tensor::from_fn(shape.clone(), |_| f32::from_bits(rng.gen()));
            let b = Tensor::from_fn(shape, |_| f64::from_bits(rng.gen()));
            round_trip(&dir.path().join(format!("f32_{ndim}_{rep}.rrt")), a.into())?;
            round_trip(&dir.path().join(format!("f64_{ndim}_{rep}.rrt")), b.into())?;
            files += 2;
        }
    }
    Ok(format!("{files} files, both dtypes, 1..5 dims"))
}

struct Criterion {
    id: usize,
    name: &'static str,
    limit: Option<Duration>,
    run: fn() -> Outcome,
}

fn main() {
    let criteria = [
        Criterion { id: 1, name: "reorder_exhaustive_small", limit: Some(Duration::from_secs(60)), run: reorder_exhaustive },
        Criterion { id: 2, name: "permute3d_random_and_round_trip", limit: Some(Duration::from_secs(30)), run: permute3d_random },
        Criterion { id: 3, name: "reorder_nm_random", limit: Some(Duration::from_secs(30)), run: reorder_nm_random },
        Criterion { id: 4, name: "interlace_round_trip", limit: Some(Duration::from_secs(30)), run: interlace_round_trip },
        Criterion { id: 5, name: "stencil_bit_exact", limit: Some(Duration::from_secs(60)), run: stencil_random },
        Criterion { id: 6, name: "stencil_polynomial_exactness", limit: Some(Duration::from_secs(5)), run: stencil_polynomial },
        Criterion { id: 7, name: "determinism_across_workers", limit: Some(Duration::from_secs(60)), run: determinism },
        Criterion { id: 8, name: "diagonal_order_bijection", limit: Some(Duration::from_secs(5)), run: diagonal_bijection },
        Criterion { id: 9, name: "bench_suite_methodology", limit: Some(Duration::from_secs(300)), run: bench_suite },
        Criterion { id: 10, name: "transpose_not_pessimal", limit: None, run: transpose_sanity },
        Criterion { id: 11, name: "rrt_round_trip", limit: Some(Duration::from_secs(10)), run: file_round_trip },
    ];

    let filters: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    let mut ran = 0;
    for c in &criteria {
        if !filters.is_empty() && !filters.iter().any(|f| c.name.contains(f.as_str())) {
            continue;
        }
        ran += 1;
        let start = Instant::now();
        let outcome = panic::catch_unwind(AssertUnwindSafe(c.run)).unwrap_or_else(|payload| {
            let msg = payload
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| payload.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into());
            Err(format!("panic: {msg}"))
        });
        let elapsed = start.elapsed();
        let outcome = match (outcome, c.limit) {
            (Ok(_), Some(limit)) if elapsed > limit => Err(format!("took {elapsed:.1?}, limit {limit:?}")),
            (o, _) => o,
        };
        let secs = elapsed.as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS  {:>2} {:<34} {secs:>7.2}s  {detail}", c.id, c.name),
            Err(why) => {
                failed += 1;
                println!("FAIL  {:>2} {:<34} {secs:>7.2}s  {why}", c.id, c.name);
            }
        }
    }
    println!("\nacceptance: {} passed, {failed} failed", ran - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
