//! Command-line front end: `bench`, `verify` and `run`.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_traits::Float;

use rearrange::bench::{
    default_memory_budget, emit_report, paper_suite, BenchmarkCase, Harness, KernelParams, ReportFormat,
    StencilSource,
};
use rearrange::format::{self, AnyTensor, FileElement};
use rearrange::stencil::{fd_stencil, parse_stencil, StencilSpec};
use rearrange::{
    parse_index_list, BoundaryPolicy, Error, Executor, Grid2D, OrderVec, Result, Shape, SliceSpec, StencilVariant,
    Tensor, TileConfig,
};

#[derive(Parser)]
#[command(name = "rearrange", version, about = "Tiled data-rearrangement kernels and their bandwidth harness")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Measure effective bandwidth relative to a copy baseline.
    Bench(BenchArgs),
    /// Check a tiled kernel against its reference oracle on random input.
    Verify(VerifyArgs),
    /// Apply a kernel to a tensor file.
    Run(RunArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Op {
    Copy,
    Permute3d,
    Reorder,
    ReorderNm,
    Interlace,
    Deinterlace,
    Stencil,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Suite {
    Paper,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Variant {
    Direct,
    Staged,
}

#[derive(Args, Debug)]
struct KernelArgs {
    /// Storage order, fastest dimension first, e.g. 1,0,2
    #[arg(long)]
    order: Option<String>,
    /// Input dimensions kept by reorder-nm, in output order
    #[arg(long)]
    keep: Option<String>,
    /// Per-dimension base index for reorder-nm
    #[arg(long)]
    base: Option<String>,
    /// Per-dimension range for reorder-nm
    #[arg(long)]
    range: Option<String>,
    /// Number of arrays to interlace or split into
    #[arg(long)]
    n: Option<usize>,
    /// Stencil definition file (`drow dcol weight` per line)
    #[arg(long, conflicts_with = "fd_order")]
    stencil_file: Option<PathBuf>,
    /// Built-in finite-difference Laplacian of order 1..4
    #[arg(long)]
    fd_order: Option<usize>,
    /// Boundary policy: zero-pad, clamp-to-edge or skip-border
    #[arg(long)]
    boundary: Option<String>,
    #[arg(long, value_enum, default_value = "staged")]
    variant: Variant,
    /// Worker threads
    #[arg(long, env = "REARRANGE_WORKERS")]
    workers: Option<usize>,
    #[arg(long, default_value_t = 32)]
    tile_rows: usize,
    #[arg(long, default_value_t = 32)]
    tile_cols: usize,
}

#[derive(Args, Debug)]
struct BenchArgs {
    #[arg(long, value_enum, conflicts_with = "op", required_unless_present = "op")]
    suite: Option<Suite>,
    #[arg(long, value_enum)]
    op: Option<Op>,
    /// Shape such as 128x256x512 (per-array length for interlace, cols x rows for stencils)
    #[arg(long)]
    shape: Option<String>,
    #[command(flatten)]
    kernel: KernelArgs,
    #[arg(long, default_value_t = 10)]
    reps: usize,
    #[arg(long, default_value_t = 3)]
    warmup: usize,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
    /// Report path; stdout when absent
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value_t = 0x5eed)]
    seed: u64,
    /// Working-set cap per case in MiB; larger cases are scaled down
    #[arg(long)]
    max_mem_mib: Option<usize>,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    #[arg(long, value_enum)]
    op: Op,
    #[arg(long)]
    shape: String,
    #[command(flatten)]
    kernel: KernelArgs,
    #[arg(long, default_value_t = 0x5eed)]
    seed: u64,
}

#[derive(Args, Debug)]
struct RunArgs {
    #[arg(long, value_enum)]
    op: Op,
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    kernel: KernelArgs,
}

fn required<T>(value: Option<T>, flag: &str, op: Op) -> Result<T> {
    value.ok_or_else(|| Error::Spec(format!("--{flag} is required for {op:?}")))
}

impl KernelArgs {
    fn executor(&self) -> Result<Executor> {
        let unroll = if self.tile_rows.is_multiple_of(4) { 4 } else { 1 };
        let tile = TileConfig::new(self.tile_rows, self.tile_cols, unroll)?;
        Ok(match self.workers {
            Some(w) => Executor::new(tile, w),
            None => Executor {
                tile,
                ..Executor::default()
            },
        })
    }

    fn order(&self, op: Op) -> Result<OrderVec> {
        required(self.order.as_deref(), "order", op)?.parse()
    }

    fn nm(&self, op: Op) -> Result<(Vec<usize>, SliceSpec)> {
        let keep = parse_index_list(required(self.keep.as_deref(), "keep", op)?)?;
        let base = parse_index_list(required(self.base.as_deref(), "base", op)?)?;
        let range = parse_index_list(required(self.range.as_deref(), "range", op)?)?;
        Ok((keep, SliceSpec::new(base, range)))
    }

    fn stencil<T>(&self) -> Result<(StencilSpec<T>, BoundaryPolicy, StencilSource)>
    where
        T: rearrange::Element + Float + FromStr,
    {
        let (spec, file_boundary, source) = match &self.stencil_file {
            Some(path) => {
                let (spec, b) = parse_stencil(&std::fs::read_to_string(path)?)?;
                let name = path.file_name().map_or_else(|| "file".into(), |n| n.to_string_lossy().into_owned());
                (spec, b, StencilSource::Custom(name))
            }
            None => {
                let k = self.fd_order.unwrap_or(1);
                (fd_stencil(k)?, BoundaryPolicy::default(), StencilSource::FiniteDifference(k))
            }
        };
        let boundary = match &self.boundary {
            Some(b) => b.parse()?,
            None => file_boundary,
        };
        Ok((spec, boundary, source))
    }

    fn variant(&self) -> StencilVariant {
        match self.variant {
            Variant::Direct => StencilVariant::Direct,
            Variant::Staged => StencilVariant::Staged,
        }
    }

    fn params(&self, op: Op) -> Result<KernelParams> {
        Ok(match op {
            Op::Copy => KernelParams::Copy,
            Op::Permute3d => KernelParams::Permute3d(self.order(op)?),
            Op::Reorder => KernelParams::Reorder(self.order(op)?),
            Op::ReorderNm => {
                let (keep, slice) = self.nm(op)?;
                KernelParams::ReorderNm { keep, slice }
            }
            Op::Interlace => KernelParams::Interlace {
                n: required(self.n, "n", op)?,
            },
            Op::Deinterlace => KernelParams::Deinterlace {
                n: required(self.n, "n", op)?,
            },
            Op::Stencil => {
                let (stencil, boundary, source) = self.stencil()?;
                KernelParams::Stencil {
                    stencil,
                    source,
                    boundary,
                    variant: self.variant(),
                }
            }
        })
    }
}

fn bench(args: BenchArgs) -> Result<bool> {
    let harness = Harness::new(args.kernel.executor()?, args.seed);
    let budget = args.max_mem_mib.map_or_else(default_memory_budget, |m| m << 20);
    let cases = match (args.suite, args.op) {
        (Some(Suite::Paper), _) => paper_suite(args.reps, args.warmup),
        (None, Some(op)) => {
            let shape: Shape = required(args.shape.as_deref(), "shape", op)?.parse()?;
            vec![BenchmarkCase::new(args.kernel.params(op)?, shape).with_reps(args.reps, args.warmup)]
        }
        (None, None) => unreachable!("clap requires --suite or --op"),
    };

    let mut rows = Vec::new();
    let mut all_ok = true;
    for case in &cases {
        match harness.run_case_scaled(case, budget) {
            Ok(row) => {
                if row.shape != case.shape.to_string() {
                    eprintln!("note: {} {} scaled down to {}", row.kernel, case.shape, row.shape);
                }
                eprintln!(
                    "{:<12} {:<18} {:<28} {:>8.2} GB/s  ({:.3} of copy)",
                    row.kernel, row.shape, row.params, row.bandwidth_gbps, row.relative_efficiency
                );
                rows.push(row);
            }
            Err(e) => {
                all_ok = false;
                eprintln!("error: {} {}: {e}", case.params.kernel_name(), case.shape);
            }
        }
    }
    if rows.is_empty() {
        return Ok(false);
    }
    let format = match args.format {
        Format::Csv => ReportFormat::Csv,
        Format::Json => ReportFormat::Json,
    };
    match &args.out {
        Some(path) => emit_report(&rows, format, BufWriter::new(File::create(path)?))?,
        None => emit_report(&rows, format, io::stdout().lock())?,
    }
    Ok(all_ok)
}

fn verify(args: VerifyArgs) -> Result<bool> {
    let harness = Harness::new(args.kernel.executor()?, args.seed);
    let case = BenchmarkCase::new(args.kernel.params(args.op)?, args.shape.parse()?);
    match harness.verify_case(&case) {
        Ok(()) => {
            println!("ok: {} {} {} matches the oracle", case.params.kernel_name(), case.shape, case.params.label());
            Ok(true)
        }
        Err(e @ Error::Verification { .. }) => {
            println!("MISMATCH: {e}");
            Ok(false)
        }
        Err(e) => Err(e),
    }
}

/// Applies `op` to one tensor. Interlace reads `[len, n]` (array `a` is the
/// slice at index `a` of dim 1) and writes `[n * len]`; de-interlace does the
/// reverse.
fn apply<T>(t: Tensor<T>, op: Op, args: &KernelArgs) -> Result<Tensor<T>>
where
    T: FileElement + Float + FromStr,
{
    let exec = args.executor()?;
    match op {
        Op::Copy => exec.copy(&t),
        Op::Permute3d => exec.permute3d(&t, &args.order(op)?),
        Op::Reorder => exec.reorder(&t, &args.order(op)?),
        Op::ReorderNm => {
            let (keep, slice) = args.nm(op)?;
            exec.reorder_nm(&t, &keep, &slice)
        }
        Op::Interlace => {
            let &[len, n] = t.shape().sizes() else {
                return Err(Error::Shape(format!("interlace input must be [len, n], got {}", t.shape())));
            };
            let arrays: Vec<&[T]> = t.data().chunks_exact(len).collect();
            Tensor::from_vec(vec![n * len], exec.interlace(&arrays)?)
        }
        Op::Deinterlace => {
            let n = required(args.n, "n", op)?;
            let parts = exec.deinterlace(t.data(), n)?;
            let len = t.shape().len() / n;
            Tensor::from_vec(vec![len, n], parts.concat())
        }
        Op::Stencil => {
            let (stencil, boundary, _) = args.stencil::<T>()?;
            let grid = Grid2D::from_tensor(t)?;
            Ok(exec.apply_stencil(&grid, &stencil, boundary, args.variant())?.into_tensor())
        }
    }
}

fn run(args: RunArgs) -> Result<bool> {
    match format::load(&args.input)? {
        AnyTensor::F32(t) => format::save(&args.out, &apply(t, args.op, &args.kernel)?)?,
        AnyTensor::F64(t) => format::save(&args.out, &apply(t, args.op, &args.kernel)?)?,
    }
    Ok(true)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Bench(a) => bench(a),
        Command::Verify(a) => verify(a),
        Command::Run(a) => run(a),
    };
    let _ = io::stdout().flush();
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
