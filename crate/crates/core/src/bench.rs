//! Effective-bandwidth measurement relative to a plain-copy baseline.
//!
//! Every kernel is credited with one read and one write per output element
//! (`bytes_moved = 2 · elements · size_of::<f32>()`); stencil apron re-reads
//! are overhead and are not credited. Bandwidth is reported in GB/s with
//! GB = 10⁹ bytes. Each case is checked against its reference oracle before
//! any timing happens, and its repetitions are interleaved with copies of an
//! equally sized buffer so the baseline sees the same machine state.

use std::fmt;
use std::io::Write;
use std::str::FromStr;
use std::time::Instant;

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::{reorder_access_path, reorder_nm_access_path, AccessPath};
use crate::layout::{first_mismatch, OrderVec, Shape, SliceSpec, Tensor};
use crate::oracle::{naive_deinterlace, naive_interlace, naive_reorder, naive_slice, naive_stencil};
use crate::schedule::Executor;
use crate::stencil::{fd_stencil, BoundaryPolicy, Grid2D, StencilSpec, StencilVariant};

/// Benchmarks run on single-precision data.
pub type BenchElem = f32;
const ELEM_BYTES: usize = std::mem::size_of::<BenchElem>();

/// Payloads below this are dominated by timer noise.
pub const MIN_BASELINE_BYTES: usize = 1 << 20;

/// Column order of every report.
pub const REPORT_COLUMNS: [&str; 9] = [
    "kernel",
    "shape",
    "params",
    "variant",
    "bytes_moved",
    "elapsed_s",
    "bandwidth_gbps",
    "baseline_gbps",
    "relative_efficiency",
];

/// `bytes / seconds` in GB/s (10⁹ bytes).
pub fn bandwidth_gbps(bytes: u64, seconds: f64) -> f64 {
    bytes as f64 / seconds / 1e9
}

/// Median of a non-empty sample; the mean of the middle pair for even sizes.
pub fn median(samples: &[f64]) -> f64 {
    assert!(!samples.is_empty(), "median of no samples");
    let mut v = samples.to_vec();
    v.sort_by(f64::total_cmp);
    let mid = v.len() / 2;
    if v.len() % 2 == 1 {
        v[mid]
    } else {
        (v[mid - 1] + v[mid]) / 2.0
    }
}

/// Where a stencil's taps come from, for report labels.
#[derive(Clone, Debug, PartialEq)]
pub enum StencilSource {
    FiniteDifference(usize),
    Custom(String),
}

#[derive(Clone, Debug, PartialEq)]
pub enum KernelParams {
    Copy,
    Permute3d(OrderVec),
    Reorder(OrderVec),
    ReorderNm { keep: Vec<usize>, slice: SliceSpec },
    Interlace { n: usize },
    Deinterlace { n: usize },
    Stencil {
        stencil: StencilSpec<BenchElem>,
        source: StencilSource,
        boundary: BoundaryPolicy,
        variant: StencilVariant,
    },
}

fn join(v: &[usize]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

impl KernelParams {
    pub fn kernel_name(&self) -> &'static str {
        match self {
            KernelParams::Copy => "copy",
            KernelParams::Permute3d(_) => "permute3d",
            KernelParams::Reorder(_) => "reorder",
            KernelParams::ReorderNm { .. } => "reorder-nm",
            KernelParams::Interlace { .. } => "interlace",
            KernelParams::Deinterlace { .. } => "deinterlace",
            KernelParams::Stencil { .. } => "stencil",
        }
    }

    pub fn label(&self) -> String {
        match self {
            KernelParams::Copy => String::new(),
            KernelParams::Permute3d(o) | KernelParams::Reorder(o) => format!("order={o}"),
            KernelParams::ReorderNm { keep, slice } => format!(
                "keep={};base={};range={}",
                join(keep),
                join(&slice.base),
                join(&slice.range)
            ),
            KernelParams::Interlace { n } | KernelParams::Deinterlace { n } => format!("n={n}"),
            KernelParams::Stencil {
                stencil,
                source,
                boundary,
                ..
            } => match source {
                StencilSource::FiniteDifference(k) => format!("fd-order={k};boundary={boundary}"),
                StencilSource::Custom(name) => {
                    format!("stencil={name};taps={};boundary={boundary}", stencil.taps().len())
                }
            },
        }
    }
}

/// One kernel invocation to measure.
///
/// `shape` is the input tensor for copy and the reorders, the per-array
/// length (1-d) for interlace and de-interlace, and `[cols, rows]` for
/// stencils.
#[derive(Clone, Debug, PartialEq)]
pub struct BenchmarkCase {
    pub params: KernelParams,
    pub shape: Shape,
    pub reps: usize,
    pub warmup: usize,
}

impl BenchmarkCase {
    pub fn new(params: KernelParams, shape: Shape) -> Self {
        BenchmarkCase {
            params,
            shape,
            reps: 10,
            warmup: 3,
        }
    }

    pub fn with_reps(mut self, reps: usize, warmup: usize) -> Self {
        self.reps = reps;
        self.warmup = warmup;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.reps == 0 {
            return Err(Error::Spec("repetitions must be at least 1".into()));
        }
        let ndim = self.shape.ndim();
        match &self.params {
            KernelParams::Copy => Ok(()),
            KernelParams::Permute3d(order) => {
                if ndim != 3 {
                    return Err(Error::Shape(format!("permute3d needs a 3-d shape, got {}", self.shape)));
                }
                reorder_access_path(&self.shape, order).map(drop)
            }
            KernelParams::Reorder(order) => reorder_access_path(&self.shape, order).map(drop),
            KernelParams::ReorderNm { keep, slice } => slice.validate(&self.shape, keep),
            KernelParams::Interlace { n } | KernelParams::Deinterlace { n } => {
                if *n == 0 {
                    return Err(Error::Spec("interlace needs at least one array".into()));
                }
                if ndim != 1 {
                    return Err(Error::Shape(format!(
                        "interlace shape is the per-array length (1-d), got {}",
                        self.shape
                    )));
                }
                Ok(())
            }
            KernelParams::Stencil { stencil, boundary, .. } => {
                let &[cols, rows] = self.shape.sizes() else {
                    return Err(Error::Shape(format!("stencil needs a 2-d shape, got {}", self.shape)));
                };
                let r = stencil.radius();
                if *boundary == BoundaryPolicy::SkipBorder && (rows <= 2 * r || cols <= 2 * r) {
                    return Err(Error::Spec(format!("grid {} too small for skip-border", self.shape)));
                }
                Ok(())
            }
        }
    }

    /// Elements written by one kernel invocation.
    pub fn output_elements(&self) -> usize {
        match &self.params {
            KernelParams::ReorderNm { keep, slice } => keep.iter().map(|&d| slice.range[d]).product(),
            KernelParams::Interlace { n } | KernelParams::Deinterlace { n } => n * self.shape.len(),
            _ => self.shape.len(),
        }
    }

    pub fn bytes_moved(&self) -> u64 {
        2 * (self.output_elements() * ELEM_BYTES) as u64
    }

    /// Peak bytes held while running: input, output, and one more
    /// output-sized buffer for the oracle result or the baseline copy.
    pub fn working_set_bytes(&self) -> usize {
        let input = match &self.params {
            KernelParams::Interlace { n } | KernelParams::Deinterlace { n } => n * self.shape.len(),
            _ => self.shape.len(),
        };
        (input + 2 * self.output_elements()) * ELEM_BYTES
    }

    /// Report label for the memory access pattern.
    pub fn variant(&self) -> String {
        match &self.params {
            KernelParams::Copy => AccessPath::Streamed.to_string(),
            KernelParams::Permute3d(o) | KernelParams::Reorder(o) => {
                reorder_access_path(&self.shape, o).map_or_else(|_| "-".into(), |p| p.to_string())
            }
            KernelParams::ReorderNm { keep, slice } => reorder_nm_access_path(&self.shape, keep, slice)
                .map_or_else(|_| "-".into(), |p| p.to_string()),
            KernelParams::Interlace { .. } | KernelParams::Deinterlace { .. } => AccessPath::Staged.to_string(),
            KernelParams::Stencil { variant, .. } => variant.to_string(),
        }
    }

    /// The same case with its largest dimension halved, when that keeps it
    /// valid. Reorder-nm slices are never rescaled.
    pub fn scaled_down(&self) -> Option<BenchmarkCase> {
        if matches!(self.params, KernelParams::ReorderNm { .. }) {
            return None;
        }
        let sizes = self.shape.sizes();
        let (d, &largest) = sizes.iter().enumerate().max_by_key(|&(d, &s)| (s, std::cmp::Reverse(d)))?;
        if largest < 2 {
            return None;
        }
        let mut smaller = sizes.to_vec();
        smaller[d] = largest / 2;
        let case = BenchmarkCase {
            shape: Shape::new(smaller).ok()?,
            ..self.clone()
        };
        case.validate().ok().map(|_| case)
    }
}

/// One report row. Field order is the CSV column order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BandwidthRow {
    pub kernel: String,
    pub shape: String,
    pub params: String,
    pub variant: String,
    pub bytes_moved: u64,
    pub elapsed_s: f64,
    pub bandwidth_gbps: f64,
    pub baseline_gbps: f64,
    pub relative_efficiency: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    Json,
}

impl FromStr for ReportFormat {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(ReportFormat::Csv),
            "json" => Ok(ReportFormat::Json),
            other => Err(Error::Spec(format!("unknown report format `{other}`"))),
        }
    }
}

impl fmt::Display for ReportFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ReportFormat::Csv => "csv",
            ReportFormat::Json => "json",
        })
    }
}

pub fn emit_report(rows: &[BandwidthRow], format: ReportFormat, out: impl Write) -> Result<()> {
    if rows.is_empty() {
        return Err(Error::Spec("report has no rows".into()));
    }
    match format {
        ReportFormat::Csv => {
            let mut w = csv::Writer::from_writer(out);
            for row in rows {
                w.serialize(row)?;
            }
            w.flush()?;
        }
        ReportFormat::Json => {
            let mut out = out;
            serde_json::to_writer_pretty(&mut out, rows)?;
            writeln!(out)?;
        }
    }
    Ok(())
}

fn try_alloc(len: usize) -> Result<Vec<BenchElem>> {
    let mut v = Vec::new();
    v.try_reserve_exact(len).map_err(|_| Error::Allocation {
        bytes: len.saturating_mul(ELEM_BYTES),
    })?;
    v.resize(len, 0.0);
    Ok(v)
}

fn random_vec(rng: &mut StdRng, len: usize) -> Result<Vec<BenchElem>> {
    let mut v = try_alloc(len)?;
    rng.fill(v.as_mut_slice());
    Ok(v)
}

/// Inputs and output buffers for one case.
enum Prepared {
    Tensor(Tensor<BenchElem>),
    Arrays(Vec<Vec<BenchElem>>),
    Interlaced(Vec<BenchElem>),
    Grid(Grid2D<BenchElem>),
}

/// Runs the measurement protocol with a fixed executor and input seed.
#[derive(Clone, Debug)]
pub struct Harness {
    pub exec: Executor,
    pub seed: u64,
}

impl Default for Harness {
    fn default() -> Self {
        Harness {
            exec: Executor::default(),
            seed: 0x5eed,
        }
    }
}

impl Harness {
    pub fn new(exec: Executor, seed: u64) -> Self {
        Harness { exec, seed }
    }

    fn prepare(&self, case: &BenchmarkCase) -> Result<Prepared> {
        let mut rng = StdRng::seed_from_u64(self.seed);
        Ok(match &case.params {
            KernelParams::Interlace { n } => {
                Prepared::Arrays((0..*n).map(|_| random_vec(&mut rng, case.shape.len())).collect::<Result<_>>()?)
            }
            KernelParams::Deinterlace { n } => Prepared::Interlaced(random_vec(&mut rng, n * case.shape.len())?),
            KernelParams::Stencil { .. } => {
                let &[cols, rows] = case.shape.sizes() else { unreachable!("validated") };
                let mut data = try_alloc(rows * cols)?;
                data.iter_mut().for_each(|v| *v = rng.gen_range(-1.0..1.0));
                Prepared::Grid(Grid2D::new(rows, cols, data)?)
            }
            _ => Prepared::Tensor(Tensor::new(case.shape.clone(), random_vec(&mut rng, case.shape.len())?)?),
        })
    }

    /// Runs the tiled kernel, writing into `out` (one buffer per output array).
    fn run_kernel(&self, case: &BenchmarkCase, input: &Prepared, out: &mut [Vec<BenchElem>]) -> Result<()> {
        let exec = &self.exec;
        match (&case.params, input) {
            (KernelParams::Copy, Prepared::Tensor(t)) => exec.copy_into(t.data(), &mut out[0]),
            (KernelParams::Permute3d(o), Prepared::Tensor(t)) => exec.permute3d_into(t, o, &mut out[0]).map(drop),
            (KernelParams::Reorder(o), Prepared::Tensor(t)) => exec.reorder_into(t, o, &mut out[0]).map(drop),
            (KernelParams::ReorderNm { keep, slice }, Prepared::Tensor(t)) => {
                exec.reorder_nm_into(t, keep, slice, &mut out[0]).map(drop)
            }
            (KernelParams::Interlace { .. }, Prepared::Arrays(arrays)) => {
                let views: Vec<&[BenchElem]> = arrays.iter().map(|a| a.as_slice()).collect();
                exec.interlace_into(&views, &mut out[0])
            }
            (KernelParams::Deinterlace { .. }, Prepared::Interlaced(buf)) => {
                let mut views: Vec<&mut [BenchElem]> = out.iter_mut().map(|v| v.as_mut_slice()).collect();
                exec.deinterlace_into(buf, &mut views)
            }
            (
                KernelParams::Stencil {
                    stencil,
                    boundary,
                    variant,
                    ..
                },
                Prepared::Grid(g),
            ) => exec.apply_stencil_into(g, stencil, *boundary, *variant, &mut out[0]),
            _ => unreachable!("inputs are prepared per kernel"),
        }
    }

    fn oracle(&self, case: &BenchmarkCase, input: &Prepared) -> Result<Vec<Vec<BenchElem>>> {
        Ok(match (&case.params, input) {
            (KernelParams::Copy, Prepared::Tensor(t)) => vec![t.data().to_vec()],
            (KernelParams::Permute3d(o) | KernelParams::Reorder(o), Prepared::Tensor(t)) => {
                vec![naive_reorder(t, o)?.into_data()]
            }
            (KernelParams::ReorderNm { keep, slice }, Prepared::Tensor(t)) => {
                vec![naive_slice(t, keep, slice)?.into_data()]
            }
            (KernelParams::Interlace { .. }, Prepared::Arrays(arrays)) => {
                let views: Vec<&[BenchElem]> = arrays.iter().map(|a| a.as_slice()).collect();
                vec![naive_interlace(&views)?]
            }
            (KernelParams::Deinterlace { n }, Prepared::Interlaced(buf)) => naive_deinterlace(buf, *n)?,
            (KernelParams::Stencil { stencil, boundary, .. }, Prepared::Grid(g)) => {
                vec![naive_stencil(g, stencil, *boundary)?.data().to_vec()]
            }
            _ => unreachable!("inputs are prepared per kernel"),
        })
    }

    /// Median copy bandwidth over `reps` runs on a buffer of `payload_bytes`
    /// (each run reads and writes the buffer once).
    pub fn measure_baseline(&self, payload_bytes: usize, reps: usize) -> Result<f64> {
        if payload_bytes < MIN_BASELINE_BYTES {
            return Err(Error::Spec(format!(
                "baseline payload of {payload_bytes} bytes is below {MIN_BASELINE_BYTES}"
            )));
        }
        if reps == 0 {
            return Err(Error::Spec("repetitions must be at least 1".into()));
        }
        let len = payload_bytes / ELEM_BYTES;
        let src = random_vec(&mut StdRng::seed_from_u64(self.seed), len)?;
        let mut dst = try_alloc(len)?;
        self.exec.copy_into(&src, &mut dst)?;
        let bytes = 2 * (len * ELEM_BYTES) as u64;
        let mut samples = Vec::with_capacity(reps);
        for _ in 0..reps {
            let t0 = Instant::now();
            self.exec.copy_into(&src, &mut dst)?;
            samples.push(bandwidth_gbps(bytes, t0.elapsed().as_secs_f64()));
        }
        Ok(median(&samples))
    }

    fn alloc_outputs(&self, case: &BenchmarkCase) -> Result<Vec<Vec<BenchElem>>> {
        match &case.params {
            KernelParams::Deinterlace { n } => (0..*n).map(|_| try_alloc(case.shape.len())).collect(),
            _ => Ok(vec![try_alloc(case.output_elements())?]),
        }
    }

    /// Runs the kernel once and compares every output bit for bit with the oracle.
    fn check(&self, case: &BenchmarkCase, input: &Prepared, out: &mut [Vec<BenchElem>]) -> Result<()> {
        self.run_kernel(case, input, out)?;
        let want = self.oracle(case, input)?;
        for (a, (got, want)) in out.iter().zip(&want).enumerate() {
            if let Some(at) = first_mismatch(got, want) {
                return Err(Error::Verification {
                    kernel: case.params.kernel_name().into(),
                    detail: format!("output {a} differs first at element {at}"),
                });
            }
        }
        Ok(())
    }

    /// Tiled kernel against the oracle on seeded random input, without timing.
    pub fn verify_case(&self, case: &BenchmarkCase) -> Result<()> {
        case.validate()?;
        let input = self.prepare(case)?;
        let mut out = self.alloc_outputs(case)?;
        self.check(case, &input, &mut out)
    }

    /// Verifies the kernel against its oracle, then times it.
    pub fn run_case(&self, case: &BenchmarkCase) -> Result<BandwidthRow> {
        case.validate()?;
        let input = self.prepare(case)?;
        let mut out = self.alloc_outputs(case)?;
        self.check(case, &input, &mut out)?;

        // the baseline copies an equally sized contiguous buffer: the
        // interlaced input for de-interlace, the kernel's output otherwise
        let baseline_len = case.output_elements();
        let mut baseline_dst = try_alloc(baseline_len)?;
        let baseline = |out: &[Vec<BenchElem>], dst: &mut [BenchElem]| match &input {
            Prepared::Interlaced(buf) => self.exec.copy_into(buf, dst),
            _ => self.exec.copy_into(&out[0], dst),
        };
        let bytes = case.bytes_moved();
        for _ in 0..case.warmup {
            self.run_kernel(case, &input, &mut out)?;
            baseline(&out, &mut baseline_dst)?;
        }
        let mut kernel_s = Vec::with_capacity(case.reps);
        let mut copy_s = Vec::with_capacity(case.reps);
        for _ in 0..case.reps {
            let t0 = Instant::now();
            self.run_kernel(case, &input, &mut out)?;
            kernel_s.push(t0.elapsed().as_secs_f64());
            let t0 = Instant::now();
            baseline(&out, &mut baseline_dst)?;
            copy_s.push(t0.elapsed().as_secs_f64());
        }
        let elapsed = median(&kernel_s);
        let bandwidth = bandwidth_gbps(bytes, elapsed);
        let baseline = bandwidth_gbps(bytes, median(&copy_s));
        Ok(BandwidthRow {
            kernel: case.params.kernel_name().into(),
            shape: case.shape.to_string(),
            params: case.params.label(),
            variant: case.variant(),
            bytes_moved: bytes,
            elapsed_s: elapsed,
            bandwidth_gbps: bandwidth,
            baseline_gbps: baseline,
            relative_efficiency: bandwidth / baseline,
        })
    }

    /// Runs a case, halving it until it fits `max_bytes` of working set and
    /// its buffers can be allocated.
    pub fn run_case_scaled(&self, case: &BenchmarkCase, max_bytes: usize) -> Result<BandwidthRow> {
        let mut case = case.clone();
        while case.working_set_bytes() > max_bytes {
            match case.scaled_down() {
                Some(smaller) => case = smaller,
                None => break,
            }
        }
        loop {
            match self.run_case(&case) {
                Err(Error::Allocation { .. }) if case.scaled_down().is_some() => {
                    case = case.scaled_down().expect("checked");
                }
                other => return other,
            }
        }
    }
}

fn shape(sizes: &[usize]) -> Shape {
    Shape::new(sizes.to_vec()).expect("suite shapes are valid")
}

fn order(o: &[usize]) -> OrderVec {
    OrderVec::new(o.to_vec()).expect("suite orders are valid")
}

/// The measurement suite: copy over a range of sizes, all six 3-d permutes
/// on 128×256×512, four generic reorders, interlace and de-interlace of 4 to
/// 9 arrays, and finite-difference stencils on a 4096×4096 grid.
pub fn paper_suite(reps: usize, warmup: usize) -> Vec<BenchmarkCase> {
    let mut cases = Vec::new();
    for exp in [18, 20, 22, 24] {
        cases.push(BenchmarkCase::new(KernelParams::Copy, shape(&[1 << exp])));
    }
    for o in [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]] {
        cases.push(BenchmarkCase::new(KernelParams::Permute3d(order(&o)), shape(&[128, 256, 512])));
    }
    let reorders: [(&[usize], &[usize]); 4] = [
        (&[1, 0, 2], &[256, 256, 256]),
        (&[1, 0, 2, 3], &[256, 256, 256, 1]),
        (&[3, 2, 0, 1], &[256, 256, 1, 256]),
        (&[3, 0, 2, 1, 4], &[256, 16, 1, 256, 16]),
    ];
    for (o, s) in reorders {
        cases.push(BenchmarkCase::new(KernelParams::Reorder(order(o)), shape(s)));
    }
    for n in 4..=9 {
        cases.push(BenchmarkCase::new(KernelParams::Interlace { n }, shape(&[1 << 24])));
        cases.push(BenchmarkCase::new(KernelParams::Deinterlace { n }, shape(&[1 << 24])));
    }
    let fd = |k: usize, variant| KernelParams::Stencil {
        stencil: fd_stencil(k).expect("orders 1..=4 exist"),
        source: StencilSource::FiniteDifference(k),
        boundary: BoundaryPolicy::ZeroPad,
        variant,
    };
    for variant in [StencilVariant::Direct, StencilVariant::Staged] {
        cases.push(BenchmarkCase::new(fd(1, variant), shape(&[4096, 4096])));
    }
    for k in 2..=4 {
        cases.push(BenchmarkCase::new(fd(k, StencilVariant::Staged), shape(&[4096, 4096])));
    }
    cases.into_iter().map(|c| c.with_reps(reps, warmup)).collect()
}

/// Half of the currently available memory (from `/proc/meminfo`), or 2 GiB
/// when that cannot be read.
pub fn default_memory_budget() -> usize {
    let available = std::fs::read_to_string("/proc/meminfo").ok().and_then(|text| {
        text.lines()
            .find(|l| l.starts_with("MemAvailable:"))
            .and_then(|l| l.split_whitespace().nth(1))
            .and_then(|kb| kb.parse::<usize>().ok())
            .map(|kb| kb * 1024)
    });
    available.map_or(2 << 30, |bytes| bytes / 2)
}
