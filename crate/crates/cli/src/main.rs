use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use genwalsh::basis::{walsh_eval, GridSignal};
use genwalsh::compression::{self, example_signal, DenseTransform, OrthogonalTransform, WalshTransform};
use genwalsh::fixtures::{builtin, default_tol};
use genwalsh::io::{self, coeff_header, format_complex, format_sig12, SignalHeader, TsvValue, CURVE_HEADER};
use genwalsh::linalg::{validate_walsh, ComplexMatrix, WalshMatrix, DEFAULT_VALIDATION_TOL, MAX_EXPLICIT_DIM};
use genwalsh::recovery::{recover, uniqueness_ok, PuncturedSpectrum, DEFAULT_TIE_TOL};
use genwalsh::transform::{change_basis, forward_naive, op_count, Direction, TransformPlan};
use genwalsh::uncertainty::{alpha_of, check_uncertainty, mu_bounds, mu_of_tensor_power, DEFAULT_SUPPORT_RTOL};
use genwalsh::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Parser, Debug)]
#[command(name = "genwalsh", version, about = "Generalized Walsh transforms, uncertainty and compression")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct MatrixArgs {
    /// Builtin name (walsh2, gw3a, gw3b, gw4, fourier:N, dct:N) or matrix file
    #[arg(long)]
    matrix: String,
    /// Validation tolerance; defaults depend on the matrix
    #[arg(long)]
    tol: Option<f64>,
}

#[derive(Args, Debug, Clone)]
struct SignalArgs {
    #[command(flatten)]
    matrix: MatrixArgs,
    /// Resolution p; inferred from the input length when omitted
    #[arg(short = 'p', long = "resolution")]
    resolution: Option<usize>,
    /// Signal or coefficient file, or example2:LEN
    #[arg(long)]
    input: String,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Analysis coefficients of a grid signal
    Transform(SignalArgs),
    /// Synthesize a grid signal from coefficients
    Inverse(SignalArgs),
    /// Evaluate one basis function at a point
    Eval {
        #[command(flatten)]
        matrix: MatrixArgs,
        #[arg(short = 'p', long = "resolution")]
        resolution: usize,
        /// Basis index
        #[arg(short = 'n')]
        index: usize,
        /// Point in [0, 1)
        #[arg(short = 'x')]
        point: f64,
    },
    /// Convert coefficients from one generator to another
    ChangeBasis {
        #[command(flatten)]
        signal: SignalArgs,
        /// Target generator
        #[arg(long)]
        to: String,
    },
    /// Support sizes of a signal and its transform against the bound
    Uncertainty {
        #[command(flatten)]
        matrix: MatrixArgs,
        #[arg(short = 'p', long = "resolution")]
        resolution: Option<usize>,
        #[arg(long)]
        input: Option<String>,
    },
    /// Brute-force uncertainty constant of a tensor power
    Mu {
        #[command(flatten)]
        matrix: MatrixArgs,
        #[arg(short = 'p', long = "resolution", default_value_t = 1)]
        resolution: usize,
    },
    /// Recover a sparse signal from a punctured spectrum
    Recover {
        #[command(flatten)]
        matrix: MatrixArgs,
        #[arg(short = 'p', long = "resolution")]
        resolution: Option<usize>,
        /// Coefficient file; entries outside the mask are ignored
        #[arg(long)]
        coeffs: PathBuf,
        /// Observed frequency indices, one per line
        #[arg(long)]
        mask: PathBuf,
        /// Sparsity bound
        #[arg(long)]
        nf: usize,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Compare transforms by the largest-variance criterion
    Compress {
        /// Real signal file or example2:LEN
        #[arg(long)]
        input: String,
        /// Fraction of components kept
        #[arg(long, default_value_t = 0.45)]
        keep: f64,
        /// Generators compared besides the DCT; chosen from the length when omitted
        #[arg(long, value_delimiter = ',')]
        matrix: Vec<String>,
        /// Directory receiving summary.tsv and one curve per transform
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Validate a generator and report its constants
    Check {
        #[command(flatten)]
        matrix: MatrixArgs,
    },
    /// Time the fast transform against the explicit matrix
    Bench {
        #[command(flatten)]
        matrix: MatrixArgs,
        #[arg(short = 'p', long = "resolution")]
        resolution: usize,
        #[arg(long, default_value_t = 5)]
        reps: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

/// Module-qualified message, e.g. `linalg: matrix is not unitary ...`.
fn qualified<E: Into<genwalsh::Error>>(e: E) -> anyhow::Error {
    anyhow::Error::msg(e.into().to_string())
}

fn load_matrix(source: &str) -> Result<ComplexMatrix> {
    if let Some(m) = builtin(source) {
        return Ok(m);
    }
    let path = Path::new(source);
    if !path.exists() {
        bail!("{source:?} is neither a builtin matrix nor a file");
    }
    io::parse_matrix_file(path).map_err(qualified).with_context(|| format!("reading {source}"))
}

fn matrix_tol(args: &MatrixArgs) -> f64 {
    args.tol.unwrap_or_else(|| if builtin(&args.matrix).is_some() { default_tol(&args.matrix) } else { DEFAULT_VALIDATION_TOL })
}

fn load_walsh(args: &MatrixArgs) -> Result<WalshMatrix> {
    let m = load_matrix(&args.matrix)?;
    validate_walsh(m, matrix_tol(args)).map_err(qualified).with_context(|| format!("validating {}", args.matrix))
}

fn infer_resolution(base: usize, len: usize) -> Result<usize> {
    let mut size = 1usize;
    for p in 0..usize::BITS as usize {
        if size == len {
            return Ok(p);
        }
        size = match size.checked_mul(base) {
            Some(s) if s <= len => s,
            _ => break,
        };
    }
    bail!("length {len} is not a power of {base}")
}

/// Values and header of a signal source. `example2:LEN` yields the
/// compression example signal.
fn load_signal(source: &str) -> Result<(SignalHeader, Vec<Complex64>)> {
    if let Some(len) = source.strip_prefix("example2:") {
        let len: usize = len.parse().with_context(|| format!("bad length in {source:?}"))?;
        let values = example_signal(len).into_iter().map(|v| Complex64::new(v, 0.0)).collect();
        return Ok((SignalHeader::default(), values));
    }
    let text = io::read_file(Path::new(source)).map_err(qualified)?;
    let file = io::parse_signal(&text).map_err(qualified).with_context(|| format!("reading {source}"))?;
    Ok((file.header, file.values))
}

fn resolve_resolution(a: &WalshMatrix, header: &SignalHeader, requested: Option<usize>, len: usize) -> Result<usize> {
    if let Some(base) = header.base {
        if base != a.n() {
            bail!("input has base {base}, generator has size {}", a.n());
        }
    }
    let inferred = infer_resolution(a.n(), len)?;
    for (what, p) in [("requested", requested), ("header", header.resolution)] {
        if let Some(p) = p {
            if p != inferred {
                bail!("{what} resolution {p} does not match input length {len}");
            }
        }
    }
    Ok(inferred)
}

/// Writes to `path`, or stdout when no path is given.
fn deliver(path: Option<&Path>, contents: &str) -> Result<()> {
    match path {
        Some(p) => io::write_file(p, contents).map_err(qualified),
        None => {
            print!("{contents}");
            Ok(())
        }
    }
}

fn cmd_transform(args: &SignalArgs, direction: Direction) -> Result<()> {
    let a = load_walsh(&args.matrix)?;
    let (header, values) = load_signal(&args.input)?;
    let p = resolve_resolution(&a, &header, args.resolution, values.len())?;
    let plan = TransformPlan::new(&a, p, Direction::Analysis).map_err(qualified)?;
    let text = match direction {
        Direction::Analysis => {
            let coeffs = plan.forward(&values).map_err(qualified)?;
            io::serialize_signal(&coeff_header(a.n(), p), &coeffs)
        }
        Direction::Synthesis => {
            let signal = plan.inverse(&values).map_err(qualified)?;
            let header = SignalHeader { base: Some(a.n()), resolution: Some(p), ..Default::default() };
            io::serialize_signal(&header, signal.values())
        }
    };
    deliver(args.output.as_deref(), &text)
}

fn cmd_change_basis(args: &SignalArgs, to: &str) -> Result<()> {
    let from = load_walsh(&args.matrix)?;
    let target = MatrixArgs { matrix: to.to_string(), tol: args.matrix.tol };
    let to = load_walsh(&target)?;
    let (header, coeffs) = load_signal(&args.input)?;
    let p = resolve_resolution(&from, &header, args.resolution, coeffs.len())?;
    let out = change_basis(&from, &to, p, &coeffs).map_err(qualified)?;
    deliver(args.output.as_deref(), &io::serialize_signal(&coeff_header(to.n(), p), &out))
}

fn cmd_eval(matrix: &MatrixArgs, p: usize, index: usize, x: f64) -> Result<()> {
    let a = load_walsh(matrix)?;
    let value = walsh_eval(&a, index, x, p).map_err(qualified)?;
    println!("{}", format_complex(value));
    Ok(())
}

fn cmd_uncertainty(matrix: &MatrixArgs, resolution: Option<usize>, input: Option<&str>) -> Result<()> {
    let a = load_walsh(matrix)?;
    let profile = alpha_of(&a);
    let Some(source) = input else {
        let p = resolution.unwrap_or(1);
        println!(
            "alpha={} max_entry={} bound={}",
            format_sig12(profile.alpha),
            format_sig12(profile.max_entry),
            format_sig12(profile.bound(p))
        );
        return Ok(());
    };
    let (header, values) = load_signal(source)?;
    let p = resolve_resolution(&a, &header, resolution, values.len())?;
    let signal = GridSignal::new(a.n(), p, values).map_err(qualified)?;
    let report = check_uncertainty(&a, p, &signal, DEFAULT_SUPPORT_RTOL).map_err(qualified)?;
    println!(
        "support_f={} support_tf={} product={} bound={} holds={}",
        report.support_f,
        report.support_tf,
        report.product,
        format_sig12(report.bound),
        yes_no(report.holds)
    );
    Ok(())
}

fn yes_no(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}

fn index_list(v: &[usize]) -> String {
    let items: Vec<String> = v.iter().map(usize::to_string).collect();
    format!("[{}]", items.join(","))
}

fn cmd_mu(matrix: &MatrixArgs, p: usize) -> Result<()> {
    let a = load_walsh(matrix)?;
    let result = mu_of_tensor_power(&a, p).map_err(qualified)?;
    let bounds = mu_bounds(&a, p).map_err(qualified)?;
    println!(
        "mu={} support_f={} support_af={} lower={} upper={}",
        result.mu,
        index_list(&result.support_f),
        index_list(&result.support_af),
        format_sig12(bounds.lower),
        format_sig12(bounds.upper)
    );
    Ok(())
}

fn cmd_recover(
    matrix: &MatrixArgs,
    resolution: Option<usize>,
    coeffs_path: &Path,
    mask_path: &Path,
    nf: usize,
    output: Option<&Path>,
) -> Result<()> {
    let a = load_walsh(matrix)?;
    let (header, coeffs) = load_signal(&coeffs_path.to_string_lossy())?;
    let p = resolve_resolution(&a, &header, resolution, coeffs.len())?;
    let mask_text = io::read_file(mask_path).map_err(qualified)?;
    let observed = io::parse_mask(&mask_text).map_err(qualified)?;
    let ps = PuncturedSpectrum::new(&a, p, coeffs, &observed, nf).map_err(qualified)?;
    let recovered = recover(&ps, DEFAULT_TIE_TOL).map_err(qualified)?;
    let header = SignalHeader { base: Some(a.n()), resolution: Some(p), ..Default::default() };
    let text = io::serialize_signal(&header, recovered.signal.values());
    let condition = uniqueness_ok(nf, ps.nw(), &alpha_of(&a), p);
    deliver(output, &text)?;
    let summary = format!(
        "support={} residual={} unique={} uniqueness_condition={}",
        index_list(&recovered.support),
        format_sig12(recovered.residual),
        yes_no(recovered.unique),
        yes_no(condition)
    );
    if output.is_some() {
        println!("{summary}");
    } else {
        eprintln!("{summary}");
    }
    Ok(())
}

fn default_generators(len: usize) -> Vec<String> {
    if infer_resolution(4, len).is_ok() {
        vec!["walsh2".into(), "gw4".into()]
    } else if infer_resolution(2, len).is_ok() {
        vec!["walsh2".into()]
    } else if infer_resolution(3, len).is_ok() {
        vec!["gw3a".into(), "gw3b".into()]
    } else {
        Vec::new()
    }
}

fn cmd_compress(input: &str, keep: f64, generators: &[String], output: Option<&Path>) -> Result<()> {
    if !(keep > 0.0 && keep <= 1.0) {
        bail!("--keep must lie in (0, 1], got {keep}");
    }
    let (_, values) = load_signal(input)?;
    if values.iter().any(|z| z.im != 0.0) {
        bail!("compression needs a real signal");
    }
    let x: Vec<f64> = values.iter().map(|z| z.re).collect();
    let len = x.len();
    let m = ((keep * len as f64).round() as usize).clamp(1, len.max(1));
    let names = if generators.is_empty() { default_generators(len) } else { generators.to_vec() };

    let mut transforms: Vec<Box<dyn OrthogonalTransform>> = vec![Box::new(DenseTransform::dct(len))];
    for name in &names {
        let a = load_walsh(&MatrixArgs { matrix: name.clone(), tol: None })?;
        let p = infer_resolution(a.n(), len)?;
        transforms.push(Box::new(WalshTransform::new(name.clone(), &a, p).map_err(qualified)?));
    }
    let mut reports = Vec::new();
    for t in &transforms {
        let (report, _) = compression::compress(t.as_ref(), &x, m)
            .map_err(qualified)
            .with_context(|| format!("compressing with {}", t.name()))?;
        reports.push(report);
    }
    reports.sort_by(|a, b| a.error.total_cmp(&b.error));

    let summary_rows: Vec<Vec<TsvValue>> = reports
        .iter()
        .map(|r| vec![TsvValue::Text(r.transform_name.clone()), TsvValue::Int(r.kept), TsvValue::Float(r.error)])
        .collect();
    let summary = io::tsv_string(&["transform", "kept", "error"], &summary_rows);
    if let Some(dir) = output {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        for r in &reports {
            let name = r.transform_name.replace([':', '/'], "_");
            io::emit_tsv(&dir.join(format!("curve_{name}.tsv")), &CURVE_HEADER, &io::curve_rows(&r.variance_curve))
                .map_err(qualified)?;
        }
        io::write_file(&dir.join("summary.tsv"), &summary).map_err(qualified)?;
    }
    print!("{summary}");
    Ok(())
}

fn cmd_check(matrix: &MatrixArgs) -> Result<()> {
    let m = load_matrix(&matrix.matrix)?;
    if !m.is_square() {
        bail!("matrix is {}x{}, not square", m.rows(), m.cols());
    }
    let n = m.rows();
    let tol = matrix_tol(matrix);
    let target = 1.0 / (n as f64).sqrt();
    let first_row_dev = m.row(0).iter().map(|z| (z - target).norm()).fold(0.0, f64::max);
    let unitary_dev = m.unitarity_deviation();
    let unitary = unitary_dev <= tol;
    let first_row = first_row_dev <= tol;
    let status = |ok: bool| if ok { "ok" } else { "fail" };
    match validate_walsh(m, tol) {
        Ok(a) => {
            let profile = alpha_of(&a);
            println!(
                "unitary={} first_row={} hadamard={} alpha={}",
                status(unitary),
                status(first_row),
                yes_no(profile.hadamard),
                format_sig12(profile.alpha)
            );
            Ok(())
        }
        Err(e) => {
            println!(
                "unitary={} first_row={} unitary_dev={} first_row_dev={}",
                status(unitary),
                status(first_row),
                format_sig12(unitary_dev),
                format_sig12(first_row_dev)
            );
            Err(qualified(e))
        }
    }
}

fn median_seconds(reps: usize, mut run: impl FnMut() -> Result<()>) -> Result<f64> {
    let mut times = Vec::with_capacity(reps);
    for _ in 0..reps.max(1) {
        let start = Instant::now();
        run()?;
        times.push(start.elapsed().as_secs_f64());
    }
    times.sort_by(f64::total_cmp);
    Ok(times[times.len() / 2])
}

fn cmd_bench(matrix: &MatrixArgs, p: usize, reps: usize, seed: u64) -> Result<()> {
    let a = load_walsh(matrix)?;
    let plan = TransformPlan::new(&a, p, Direction::Analysis).map_err(qualified)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let f: Vec<Complex64> =
        (0..plan.len()).map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
    let fast = median_seconds(reps, || plan.forward(&f).map(drop).map_err(qualified))?;
    let naive = if plan.len() <= MAX_EXPLICIT_DIM {
        let t = median_seconds(reps, || forward_naive(&a, p, &f).map(drop).map_err(qualified))?;
        format_sig12(t)
    } else {
        "skipped".to_string()
    };
    println!(
        "n={} p={} len={} fast_seconds={} naive_seconds={} op_count={}",
        a.n(),
        p,
        plan.len(),
        format_sig12(fast),
        naive,
        op_count(a.n(), p)
    );
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match &cli.command {
        Command::Transform(args) => cmd_transform(args, Direction::Analysis),
        Command::Inverse(args) => cmd_transform(args, Direction::Synthesis),
        Command::Eval { matrix, resolution, index, point } => cmd_eval(matrix, *resolution, *index, *point),
        Command::ChangeBasis { signal, to } => cmd_change_basis(signal, to),
        Command::Uncertainty { matrix, resolution, input } => cmd_uncertainty(matrix, *resolution, input.as_deref()),
        Command::Mu { matrix, resolution } => cmd_mu(matrix, *resolution),
        Command::Recover { matrix, resolution, coeffs, mask, nf, output } => {
            cmd_recover(matrix, *resolution, coeffs, mask, *nf, output.as_deref())
        }
        Command::Compress { input, keep, matrix, output } => cmd_compress(input, *keep, matrix, output.as_deref()),
        Command::Check { matrix } => cmd_check(matrix),
        Command::Bench { matrix, resolution, reps, seed } => cmd_bench(matrix, *resolution, *reps, *seed),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn resolution_inference() {
        assert_eq!(infer_resolution(2, 8).unwrap(), 3);
        assert_eq!(infer_resolution(3, 1).unwrap(), 0);
        assert!(infer_resolution(3, 10).is_err());
        assert_eq!(default_generators(256), vec!["walsh2", "gw4"]);
        assert_eq!(default_generators(729), vec!["gw3a", "gw3b"]);
    }

    #[test]
    fn cli_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
