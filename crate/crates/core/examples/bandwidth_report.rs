//! A small bandwidth report: each case is checked against its oracle, timed
//! with interleaved copy baselines and written as CSV.
//!
//! cargo run --release --example bandwidth_report

use rearrange::bench::{emit_report, BenchmarkCase, Harness, KernelParams, ReportFormat, StencilSource};
use rearrange::{fd_stencil, BoundaryPolicy, StencilVariant};

fn main() -> rearrange::Result<()> {
    let cases = vec![
        BenchmarkCase::new(KernelParams::Copy, "4194304".parse()?),
        BenchmarkCase::new(KernelParams::Permute3d("0,1,2".parse()?), "128x128x256".parse()?),
        BenchmarkCase::new(KernelParams::Permute3d("2,1,0".parse()?), "128x128x256".parse()?),
        BenchmarkCase::new(KernelParams::Interlace { n: 4 }, "1048576".parse()?),
        BenchmarkCase::new(
            KernelParams::Stencil {
                stencil: fd_stencil(2)?,
                source: StencilSource::FiniteDifference(2),
                boundary: BoundaryPolicy::ZeroPad,
                variant: StencilVariant::Staged,
            },
            "1024x1024".parse()?,
        ),
    ];
    let harness = Harness::default();
    let rows = cases
        .iter()
        .map(|c| harness.run_case(&c.clone().with_reps(5, 1)))
        .collect::<rearrange::Result<Vec<_>>>()?;
    emit_report(&rows, ReportFormat::Csv, std::io::stdout().lock())
}
