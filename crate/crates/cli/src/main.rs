//! `schauder`: featurize signed diagrams, compare them, and run the invariant suites.
//!
//! Exit status: 0 on success, 1 when `check` finds a violation, 2 on any input
//! or configuration error.

use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use schauder_core::verify::{run_checks, SUITES};
use schauder_core::{
    batch_vectorize_sparse, columns, diagram_norm, embed_lp, parse_mixup_csv, tail_bound, viz_bundle,
    wasserstein1_matching, write_dense_csv, Basis, BasisConfig, BasisKind, DiagramFormat, LipschitzSchedule,
    PolyhedralPair, SignedBarcode, SignedDiagram, TriangulationConfig,
};

#[derive(Parser)]
#[command(
    name = "schauder",
    version,
    about = "Schauder-basis vectorization of signed persistence diagrams"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Featurize one or more diagram files.
    Vectorize(VectorizeArgs),
    /// Exact 1-Wasserstein distance between two diagram files.
    Distance(DistanceArgs),
    /// Run the seeded invariant suites and print a JSON report.
    Check(CheckArgs),
    /// Per-point segment data for plotting.
    VizExport(VizArgs),
    /// Summarize a basis configuration.
    BasisInfo(InfoArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    /// `weight,c1,...,cd` rows.
    Csv,
    /// `{"w": weight, "x": [..]}` lines.
    Jsonl,
    /// Signed rectangle barcode JSON.
    Rects,
    /// `b,dprime,d` mixup triples.
    Mixup,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Kind {
    Plain,
    Stacked,
}

#[derive(Args)]
struct PairArgs {
    /// Pair spec: a JSON file, or one of `plane`, `mixup`, `barcode:<k>`.
    #[arg(long)]
    pair: Option<String>,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
}

#[derive(Args)]
struct BasisArgs {
    #[arg(long, default_value_t = 2)]
    z: u32,
    /// `standard`, `geometric:<L0>,<rho>` or `split:<L0>,<L1>,<rho>`.
    #[arg(long, default_value = "standard")]
    schedule: String,
    #[arg(long, default_value_t = 6)]
    layers: u32,
    #[arg(long, default_value_t = 8)]
    rafter: u32,
    #[arg(long, value_enum, default_value = "plain")]
    kind: Kind,
}

#[derive(Args)]
struct VectorizeArgs {
    #[command(flatten)]
    input: PairArgs,
    #[command(flatten)]
    basis: BasisArgs,
    /// Write dense CSV rows plus a `<out>.columns.json` sidecar instead of sparse JSON.
    #[arg(long)]
    dense: bool,
    /// Report the l^p embedding norm as well (p >= 1).
    #[arg(long)]
    p: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(required = true)]
    files: Vec<PathBuf>,
}

#[derive(Args)]
struct DistanceArgs {
    #[command(flatten)]
    input: PairArgs,
    /// Print the optimal matching after the distance.
    #[arg(long)]
    matching: bool,
    /// Largest combined number of points on both sides.
    #[arg(long, default_value_t = schauder_core::wasserstein::DEFAULT_POINT_CAP)]
    cap: usize,
    a: PathBuf,
    b: PathBuf,
}

#[derive(Args)]
struct CheckArgs {
    /// Validated before any suite runs.
    #[arg(long)]
    pair: Option<String>,
    /// Suite to run; repeat for several. Defaults to all.
    #[arg(long = "suite", value_parser = clap::builder::PossibleValuesParser::new(SUITES))]
    suites: Vec<String>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct VizArgs {
    #[command(flatten)]
    input: PairArgs,
    #[command(flatten)]
    basis: BasisArgs,
    #[arg(long)]
    out: Option<PathBuf>,
    file: PathBuf,
}

#[derive(Args)]
struct InfoArgs {
    #[arg(long)]
    pair: Option<String>,
    #[command(flatten)]
    basis: BasisArgs,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Vectorize(a) => cmd_vectorize(a),
        Command::Distance(a) => cmd_distance(a),
        Command::Check(a) => cmd_check(a),
        Command::VizExport(a) => cmd_viz(a),
        Command::BasisInfo(a) => cmd_basis_info(a),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn parse_pair(spec: &str) -> Result<PolyhedralPair> {
    match spec {
        "plane" => return Ok(PolyhedralPair::persistence_plane()),
        "mixup" => return Ok(PolyhedralPair::mixup()),
        _ => {}
    }
    if let Some(k) = spec.strip_prefix("barcode:") {
        let k: usize = k.parse().with_context(|| format!("bad parameter count in {spec:?}"))?;
        return Ok(PolyhedralPair::barcode_space(k)?);
    }
    let file = File::open(spec).with_context(|| format!("cannot open pair spec {spec}"))?;
    serde_json::from_reader(BufReader::new(file)).with_context(|| format!("invalid pair spec {spec}"))
}

fn parse_schedule(text: &str, z: u32) -> Result<LipschitzSchedule> {
    let nums = |rest: &str, n: usize| -> Result<Vec<f64>> {
        let v = rest
            .split(',')
            .map(|s| s.trim().parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .with_context(|| format!("bad number in schedule {text:?}"))?;
        if v.len() != n {
            bail!("schedule {text:?} needs {n} comma-separated values");
        }
        Ok(v)
    };
    let schedule = if text == "standard" {
        LipschitzSchedule::standard(z)
    } else if let Some(rest) = text.strip_prefix("geometric:") {
        let v = nums(rest, 2)?;
        LipschitzSchedule::Geometric { l0: v[0], ratio: v[1] }
    } else if let Some(rest) = text.strip_prefix("split:") {
        let v = nums(rest, 3)?;
        LipschitzSchedule::Split {
            first: v[0],
            rest: v[1],
            ratio: v[2],
        }
    } else {
        bail!("unknown schedule {text:?}; expected standard, geometric:<L0>,<rho> or split:<L0>,<L1>,<rho>");
    };
    schedule.validate()?;
    Ok(schedule)
}

fn build_basis(pair: PolyhedralPair, args: &BasisArgs) -> Result<Basis> {
    let tri = TriangulationConfig::new(pair, args.z)?;
    let kind = match args.kind {
        Kind::Plain => BasisKind::Plain,
        Kind::Stacked => BasisKind::Stacked,
    };
    let cfg =
        BasisConfig::new(tri, args.layers, args.rafter, kind).with_schedule(parse_schedule(&args.schedule, args.z)?);
    Ok(Basis::new(cfg)?)
}

/// The pair implied by the format, reconciled with `--pair`.
fn resolve_pair(args: &PairArgs, implied: Option<PolyhedralPair>) -> Result<PolyhedralPair> {
    let given = args.pair.as_deref().map(parse_pair).transpose()?;
    match (given, implied) {
        (Some(g), Some(i)) if g != i => bail!("--pair {g} does not match the {:?} input pair {i}", args.format),
        (Some(g), _) => Ok(g),
        (None, Some(i)) => Ok(i),
        (None, None) => Ok(PolyhedralPair::persistence_plane()),
    }
}

fn read_diagram(path: &Path, args: &PairArgs) -> Result<SignedDiagram> {
    let open = || -> Result<BufReader<File>> {
        Ok(BufReader::new(
            File::open(path).with_context(|| format!("cannot open {}", path.display()))?,
        ))
    };
    let ctx = || format!("in {}", path.display());
    let diagram = match args.format {
        Format::Csv | Format::Jsonl => {
            let pair = resolve_pair(args, None)?;
            let fmt = if args.format == Format::Csv {
                DiagramFormat::Csv
            } else {
                DiagramFormat::Jsonl
            };
            SignedDiagram::parse(open()?, fmt, &pair).with_context(ctx)?
        }
        Format::Rects => {
            let bars = SignedBarcode::from_json(open()?).with_context(ctx)?;
            let d = bars.to_diagram().with_context(ctx)?;
            resolve_pair(args, Some(d.pair().clone()))?;
            d
        }
        Format::Mixup => {
            let d = parse_mixup_csv(open()?).with_context(ctx)?;
            resolve_pair(args, Some(PolyhedralPair::mixup()))?;
            d
        }
    };
    Ok(diagram)
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(
        File::create(path).with_context(|| format!("cannot write {}", path.display()))?,
    ))
}

fn cmd_vectorize(args: VectorizeArgs) -> Result<ExitCode> {
    let diagrams = args
        .files
        .iter()
        .map(|f| read_diagram(f, &args.input))
        .collect::<Result<Vec<_>>>()?;
    let pair = diagrams[0].pair().clone();
    if let Some(d) = diagrams.iter().find(|d| d.pair() != &pair) {
        bail!("diagram pair {} differs from {pair}", d.pair());
    }
    let basis = build_basis(pair, &args.basis)?;
    let features = batch_vectorize_sparse(&basis, &diagrams)?;

    let mut stdout = io::stdout().lock();
    for ((file, d), f) in args.files.iter().zip(&diagrams).zip(&features) {
        write!(
            stdout,
            "{}\tl1={:?}\ttail_bound={:?}\tw1_empty={:?}",
            file.display(),
            f.l1_norm(),
            tail_bound(&basis, d)?,
            diagram_norm(d)?
        )?;
        if let Some(p) = args.p {
            write!(stdout, "\tl{p}={:?}", embed_lp(f, p)?.norm())?;
        }
        writeln!(stdout)?;
        let w = f.window();
        if w.exiting_points > 0 {
            eprintln!(
                "warning: {}: {} point(s) with mass {:?} lie outside the rafter window",
                file.display(),
                w.exiting_points,
                w.exiting_mass
            );
        }
    }

    let Some(out) = args.out else {
        return Ok(ExitCode::SUCCESS);
    };
    let mut w = create(&out)?;
    if args.dense {
        let len = basis.len();
        let rows: Vec<Vec<f64>> = features.iter().map(|f| f.to_dense(len)).collect();
        write_dense_csv(&mut w, &rows)?;
        let mut sidecar = out.clone().into_os_string();
        sidecar.push(".columns.json");
        let mut s = create(Path::new(&sidecar))?;
        serde_json::to_writer(&mut s, &columns(&basis)?)?;
        s.flush()?;
    } else {
        // one JSON document per line, in input order
        for f in &features {
            writeln!(w, "{}", f.to_sparse_json()?)?;
        }
    }
    w.flush()?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_distance(args: DistanceArgs) -> Result<ExitCode> {
    let a = read_diagram(&args.a, &args.input)?;
    let b = read_diagram(&args.b, &args.input)?;
    let m = wasserstein1_matching(&a, &b, args.cap)?;
    let mut out = io::stdout().lock();
    writeln!(out, "{:?}", m.cost)?;
    if args.matching {
        let show = |side: &[Vec<f64>], i: Option<usize>| match i {
            Some(i) => format!("{:?}", side[i]),
            None => "A".to_string(),
        };
        for (l, r, c) in &m.pairs {
            writeln!(out, "{} -> {}\t{:?}", show(&m.left, *l), show(&m.right, *r), c)?;
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_check(args: CheckArgs) -> Result<ExitCode> {
    if let Some(p) = &args.pair {
        parse_pair(p)?;
    }
    if args.trials == Some(0) {
        bail!("--trials must be positive");
    }
    let report = run_checks(&args.suites, args.trials, args.seed)?;
    let json = serde_json::to_string_pretty(&report)?;
    match &args.out {
        Some(path) => {
            let mut w = create(path)?;
            writeln!(w, "{json}")?;
            w.flush()?;
        }
        None => println!("{json}"),
    }
    for s in &report.suites {
        eprintln!(
            "{} {} ({} trials, {} violations)",
            if s.passed { "PASS" } else { "FAIL" },
            s.name,
            s.trials,
            s.violations
        );
    }
    Ok(if report.passed {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

fn cmd_viz(args: VizArgs) -> Result<ExitCode> {
    let diagram = read_diagram(&args.file, &args.input)?;
    let basis = build_basis(diagram.pair().clone(), &args.basis)?;
    let bundle = viz_bundle(&basis, &diagram, args.input.format == Format::Rects)?;
    let json = serde_json::to_string(&bundle)?;
    match &args.out {
        Some(path) => {
            let mut w = create(path)?;
            writeln!(w, "{json}")?;
            w.flush()?;
        }
        None => println!("{json}"),
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_basis_info(args: InfoArgs) -> Result<ExitCode> {
    let pair = match &args.pair {
        Some(p) => parse_pair(p)?,
        None => PolyhedralPair::persistence_plane(),
    };
    let basis = build_basis(pair.clone(), &args.basis)?;
    let d = pair.dim() as f64;
    let sched = basis.schedule();
    let n = basis.max_layer();
    let total = sched.total();
    let tri = basis.triangulation();
    let mut out = io::stdout().lock();
    writeln!(out, "pair: {pair}")?;
    writeln!(out, "z: {}", tri.z)?;
    let kind = match basis.kind() {
        BasisKind::Plain => "plain",
        BasisKind::Stacked => "stacked",
    };
    writeln!(out, "kind: {kind}")?;
    writeln!(out, "layers: 0..={n}")?;
    writeln!(out, "rafter: {}", basis.ordering().rafter())?;
    writeln!(out, "indices: {}", basis.len())?;
    for layer in 0..=n {
        writeln!(
            out,
            "layer {layer}: vertices={} L_n={:?} mesh_diameter={:?}",
            basis.ordering().layer_size(layer),
            sched.at(layer),
            tri.mesh_diameter(layer)
        )?;
    }
    writeln!(out, "L: {total:?}")?;
    writeln!(out, "M: {:?}", (d + 1.0) * total)?;
    writeln!(out, "stability_constant: {:?}", (2.0 * d).sqrt() * total)?;
    let tail = match basis.kind() {
        BasisKind::Plain => (2.0 * d).sqrt() * sched.tail(n),
        BasisKind::Stacked => (tri.z as f64).powi(-2 * (n as i32 + 1)),
    };
    writeln!(out, "tail_coefficient: {tail:?}")?;
    Ok(ExitCode::SUCCESS)
}
