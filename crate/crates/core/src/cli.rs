//! Command-line front end.
//!
//! Exit codes: 0 on success, 1 on usage errors, 2 on data errors.

use std::fs::File;
use std::io::{self, BufRead, BufReader, Read, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::bench::{
    error_benchmark, knn_accuracy, snapshot_distance_series, write_classification, write_error_rows,
    write_snapshot_rows, KnnConfig,
};
use crate::descriptors::{
    compute_descriptor, descriptor_distance, DescriptorKind, DescriptorRecord, DescriptorSpec, Method, TimeGrid,
    DEFAULT_GRID_POINTS, DEFAULT_INTERPOLATION_K, DEFAULT_T_MAX, DEFAULT_T_MIN,
};
use crate::error::Error;
use crate::graph_io::{erdos_renyi, load_snapshots, load_tu_dataset, parse_edge_list, EdgeListOptions, Graph};
use crate::slq::{ProbeDistribution, SlqConfig};

#[derive(Debug, Parser)]
#[command(name = "slaq", version, about = "Spectral graph descriptors via stochastic Lanczos quadrature")]
pub struct Cli {
    /// Worker threads (default: all cores). Results do not depend on it.
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    /// Log verbosity on stderr.
    #[arg(long, global = true, default_value = "warn")]
    pub log_level: log::LevelFilter,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compute one descriptor of one graph and write it as JSON.
    Descriptor(DescriptorArgs),
    /// Print the descriptor distance between two graphs.
    Compare(CompareArgs),
    /// Relative error of approximate methods against the exact descriptor.
    BenchError(BenchErrorArgs),
    /// 1-nearest-neighbour classification accuracy on descriptor features.
    Classify(ClassifyArgs),
    /// Distance of every temporal snapshot to the first one.
    Snapshots(SnapshotArgs),
    /// Generate a synthetic graph as an edge list.
    #[command(subcommand)]
    Generate(GenerateCommand),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum KindArg {
    Netlsd,
    Vnge,
}

impl From<KindArg> for DescriptorKind {
    fn from(k: KindArg) -> Self {
        match k {
            KindArg::Netlsd => DescriptorKind::Netlsd,
            KindArg::Vnge => DescriptorKind::Vnge,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DistributionArg {
    Rademacher,
    Gaussian,
}

impl From<DistributionArg> for ProbeDistribution {
    fn from(d: DistributionArg) -> Self {
        match d {
            DistributionArg::Rademacher => ProbeDistribution::Rademacher,
            DistributionArg::Gaussian => ProbeDistribution::Gaussian,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FormatArg {
    Json,
    Csv,
}

fn parse_method(s: &str) -> Result<Method, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

/// Graph input options shared by every subcommand that reads edge lists.
#[derive(Debug, Clone, Args, Serialize)]
pub struct GraphInputArgs {
    /// Edge lists carry a third weight column.
    #[arg(long)]
    pub weighted: bool,

    /// Field separator (default: any whitespace).
    #[arg(long)]
    pub separator: Option<char>,
}

impl GraphInputArgs {
    fn options(&self) -> EdgeListOptions {
        EdgeListOptions {
            separator: self.separator,
            weighted: self.weighted,
            ..Default::default()
        }
    }
}

/// Descriptor selection and estimator parameters.
#[derive(Debug, Clone, Args, Serialize)]
pub struct MethodArgs {
    /// Descriptor kind.
    #[arg(long, value_enum, default_value = "netlsd")]
    pub kind: KindArg,

    /// exact, slaq, taylor, taylor-as-printed, linear, finger-bar, finger-hat.
    #[arg(long, value_parser = parse_method, default_value = "slaq")]
    pub method: Method,

    /// Number of probe vectors.
    #[arg(long, default_value_t = 100)]
    pub n_v: usize,

    /// Lanczos steps per probe.
    #[arg(long, default_value_t = 10)]
    pub steps: usize,

    /// Random seed for probe vectors.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    /// Probe distribution.
    #[arg(long, value_enum, default_value = "rademacher")]
    pub distribution: DistributionArg,

    /// Smallest heat-trace time.
    #[arg(long, default_value_t = DEFAULT_T_MIN)]
    pub t_min: f64,

    /// Largest heat-trace time.
    #[arg(long, default_value_t = DEFAULT_T_MAX)]
    pub t_max: f64,

    /// Number of logarithmically spaced time points.
    #[arg(long, default_value_t = DEFAULT_GRID_POINTS)]
    pub d: usize,

    /// Extremal eigenvalues per spectrum end for the linear baseline.
    #[arg(long, default_value_t = DEFAULT_INTERPOLATION_K)]
    pub k: usize,

    /// Subtract a quadratic control variate with an exactly known trace.
    #[arg(long)]
    pub control_variate: bool,
}

impl MethodArgs {
    fn spec(&self) -> Result<DescriptorSpec, CliError> {
        let grid = TimeGrid::logspace(self.t_min, self.t_max, self.d).map_err(CliError::usage)?;
        let slq = SlqConfig {
            n_v: self.n_v,
            steps: self.steps,
            distribution: self.distribution.into(),
            seed: self.seed,
            control_variate: self.control_variate,
            ..Default::default()
        };
        let spec = DescriptorSpec {
            kind: self.kind.into(),
            method: self.method,
            grid,
            slq,
            k: self.k,
        };
        if !spec.method.supports(spec.kind) {
            return Err(CliError::Usage(format!(
                "method {} does not apply to {}",
                spec.method, spec.kind
            )));
        }
        Ok(spec)
    }
}

#[derive(Debug, Args, Serialize)]
pub struct DescriptorArgs {
    /// Edge-list file, or `-` for stdin.
    #[arg(long)]
    pub input: PathBuf,

    #[command(flatten)]
    pub graph: GraphInputArgs,

    #[command(flatten)]
    pub method: MethodArgs,

    /// Output file (default: stdout).
    #[arg(long)]
    pub output: Option<PathBuf>,

    /// json writes the descriptor record; csv writes `t,value` rows.
    #[arg(long, value_enum, default_value = "json")]
    pub format: FormatArg,
}

#[derive(Debug, Args, Serialize)]
pub struct CompareArgs {
    /// First edge-list file.
    #[arg(long)]
    pub a: PathBuf,

    /// Second edge-list file.
    #[arg(long)]
    pub b: PathBuf,

    #[command(flatten)]
    pub graph: GraphInputArgs,

    #[command(flatten)]
    pub method: MethodArgs,
}

#[derive(Debug, Args, Serialize)]
pub struct BenchErrorArgs {
    /// Edge-list files; each becomes one graph named by its path.
    #[arg(long, num_args = 1.., required = true)]
    pub input: Vec<PathBuf>,

    /// Methods to compare against the exact descriptor.
    #[arg(long, value_parser = parse_method, value_delimiter = ',', default_value = "slaq,taylor")]
    pub methods: Vec<Method>,

    /// Leave the seconds column empty so output is reproducible byte for byte.
    #[arg(long)]
    pub no_timing: bool,

    #[command(flatten)]
    pub graph: GraphInputArgs,

    #[command(flatten)]
    pub method: MethodArgs,

    /// Output CSV file (default: stdout).
    #[arg(long)]
    pub output: Option<PathBuf>,

    /// Output format.
    #[arg(long, value_enum, default_value = "csv")]
    pub format: FormatArg,
}

#[derive(Debug, Args, Serialize)]
pub struct ClassifyArgs {
    /// Manifest with one `path<TAB>label` line per graph; paths are
    /// relative to the manifest.
    #[arg(long, conflicts_with = "tu_dir", required_unless_present = "tu_dir")]
    pub manifest: Option<PathBuf>,

    /// Directory holding a dataset in TU Dortmund text layout.
    #[arg(long, requires = "tu_name")]
    pub tu_dir: Option<PathBuf>,

    /// Dataset name inside `--tu-dir`, e.g. DD.
    #[arg(long)]
    pub tu_name: Option<String>,

    /// Training fraction of each random split.
    #[arg(long, default_value_t = 0.8)]
    pub train_frac: f64,

    /// Number of random splits.
    #[arg(long, default_value_t = 1000)]
    pub repeats: usize,

    /// Seed for the random splits.
    #[arg(long, default_value_t = 0)]
    pub split_seed: u64,

    #[command(flatten)]
    pub graph: GraphInputArgs,

    #[command(flatten)]
    pub method: MethodArgs,

    /// Output CSV file (default: stdout).
    #[arg(long)]
    pub output: Option<PathBuf>,

    /// Output format.
    #[arg(long, value_enum, default_value = "csv")]
    pub format: FormatArg,
}

#[derive(Debug, Args, Serialize)]
pub struct SnapshotArgs {
    /// Event stream with `timestamp add|del src dst` lines, or `-` for stdin.
    #[arg(long)]
    pub input: PathBuf,

    /// Bucket width in timestamp units.
    #[arg(long, default_value_t = 1)]
    pub granularity: i64,

    /// Report distances divided by the series maximum.
    #[arg(long)]
    pub normalize: bool,

    #[command(flatten)]
    pub method: MethodArgs,

    /// Output CSV file (default: stdout).
    #[arg(long)]
    pub output: Option<PathBuf>,

    /// Output format.
    #[arg(long, value_enum, default_value = "csv")]
    pub format: FormatArg,
}

#[derive(Debug, Subcommand)]
pub enum GenerateCommand {
    /// Erdős–Rényi G(n, p) with p = avg_degree / (n - 1).
    Er(GenerateErArgs),
}

#[derive(Debug, Args, Serialize)]
pub struct GenerateErArgs {
    /// Number of vertices.
    #[arg(long)]
    pub n: usize,

    /// Expected vertex degree.
    #[arg(long)]
    pub avg_degree: f64,

    /// Random seed.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    /// Output edge-list file (default: stdout).
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Data(String),
}

impl CliError {
    fn usage(e: Error) -> Self {
        CliError::Usage(e.to_string())
    }

    fn data(context: impl std::fmt::Display) -> impl FnOnce(Error) -> CliError {
        move |e| CliError::Data(format!("{context}: {e}"))
    }

    fn code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Data(m) => write!(f, "error: {m}"),
        }
    }
}

type CliResult<T> = Result<T, CliError>;

/// Parses `argv` (including the program name) and runs the command.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    let _ = env_logger::Builder::new()
        .filter_level(cli.log_level)
        .format_timestamp(None)
        .try_init();

    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(t) = cli.threads {
        if t == 0 {
            eprintln!("usage error: --threads must be positive");
            return 1;
        }
        pool = pool.num_threads(t);
    }
    let pool = match pool.build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: cannot start worker pool: {e}");
            return 2;
        }
    };
    match pool.install(|| dispatch(&cli.command)) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("{e}");
            e.code()
        }
    }
}

fn dispatch(command: &Command) -> CliResult<()> {
    match command {
        Command::Descriptor(a) => cmd_descriptor(a),
        Command::Compare(a) => cmd_compare(a),
        Command::BenchError(a) => cmd_bench_error(a),
        Command::Classify(a) => cmd_classify(a),
        Command::Snapshots(a) => cmd_snapshots(a),
        Command::Generate(GenerateCommand::Er(a)) => cmd_generate_er(a),
    }
}

fn open_input(path: &Path) -> CliResult<Box<dyn BufRead>> {
    if path == Path::new("-") {
        let mut buf = Vec::new();
        io::stdin()
            .read_to_end(&mut buf)
            .map_err(|e| CliError::Data(format!("stdin: {e}")))?;
        Ok(Box::new(io::Cursor::new(buf)))
    } else {
        let file = File::open(path).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
        Ok(Box::new(BufReader::new(file)))
    }
}

fn read_graph(path: &Path, opts: &GraphInputArgs) -> CliResult<Graph> {
    let reader = open_input(path)?;
    parse_edge_list(reader, &opts.options()).map_err(CliError::data(path.display()))
}

/// Writes to the output path, or stdout when none is given. For tabular
/// output the resolved configuration goes to `<output>.config.json`, or to
/// stderr when writing to stdout.
fn emit(output: Option<&Path>, bytes: &[u8], config: Option<&serde_json::Value>) -> CliResult<()> {
    match output {
        Some(p) if p != Path::new("-") => {
            std::fs::write(p, bytes).map_err(|e| CliError::Data(format!("{}: {e}", p.display())))?;
            if let Some(cfg) = config {
                let mut side = p.as_os_str().to_owned();
                side.push(".config.json");
                let text = serde_json::to_string_pretty(cfg).expect("config serializes");
                std::fs::write(&side, text + "\n")
                    .map_err(|e| CliError::Data(format!("{}: {e}", Path::new(&side).display())))?;
            }
        }
        _ => {
            let mut out = io::stdout().lock();
            out.write_all(bytes)
                .and_then(|_| out.flush())
                .map_err(|e| CliError::Data(format!("stdout: {e}")))?;
            if let Some(cfg) = config {
                eprintln!("config: {cfg}");
            }
        }
    }
    Ok(())
}

fn config_json<T: Serialize>(subcommand: &str, args: &T, spec: &DescriptorSpec) -> serde_json::Value {
    serde_json::json!({
        "subcommand": subcommand,
        "args": args,
        "resolved": spec,
    })
}

fn cmd_descriptor(a: &DescriptorArgs) -> CliResult<()> {
    let spec = a.method.spec()?;
    let g = read_graph(&a.input, &a.graph)?;
    let d = compute_descriptor(&g, &spec).map_err(CliError::data(a.input.display()))?;
    let config = config_json("descriptor", a, &spec);
    match a.format {
        FormatArg::Json => {
            let mut rec = DescriptorRecord::new(&d, g.content_hash());
            rec.config = Some(config);
            let text = serde_json::to_string_pretty(&rec).expect("record serializes") + "\n";
            emit(a.output.as_deref(), text.as_bytes(), None)
        }
        FormatArg::Csv => {
            let mut text = String::from("t,value\n");
            match &d {
                crate::descriptors::Descriptor::HeatTrace(h) => {
                    for (t, v) in h.grid.values.iter().zip(&h.values) {
                        text.push_str(&format!("{t},{v}\n"));
                    }
                }
                crate::descriptors::Descriptor::Entropy(e) => text.push_str(&format!(",{}\n", e.value)),
            }
            emit(a.output.as_deref(), text.as_bytes(), Some(&config))
        }
    }
}

fn cmd_compare(a: &CompareArgs) -> CliResult<()> {
    let spec = a.method.spec()?;
    let ga = read_graph(&a.a, &a.graph)?;
    let gb = read_graph(&a.b, &a.graph)?;
    let da = compute_descriptor(&ga, &spec).map_err(CliError::data(a.a.display()))?;
    let db = compute_descriptor(&gb, &spec).map_err(CliError::data(a.b.display()))?;
    let dist = descriptor_distance(&da, &db).map_err(CliError::data("compare"))?;
    log::info!("config: {}", config_json("compare", a, &spec));
    emit(None, format!("{dist}\n").as_bytes(), None)
}

fn cmd_bench_error(a: &BenchErrorArgs) -> CliResult<()> {
    let spec = a.method.spec()?;
    for m in &a.methods {
        if !m.supports(spec.kind) {
            return Err(CliError::Usage(format!("method {m} does not apply to {}", spec.kind)));
        }
    }
    let graphs = a
        .input
        .iter()
        .map(|p| Ok((p.display().to_string(), read_graph(p, &a.graph)?)))
        .collect::<CliResult<Vec<_>>>()?;
    let mut rows = error_benchmark(&graphs, &spec, &a.methods).map_err(CliError::data("bench-error"))?;
    if a.no_timing {
        rows.iter_mut().for_each(|r| r.seconds = None);
    }
    let config = config_json("bench-error", a, &spec);
    let bytes = match a.format {
        FormatArg::Csv => {
            let mut out = Vec::new();
            write_error_rows(&mut out, &rows).map_err(CliError::data("bench-error"))?;
            out
        }
        FormatArg::Json => json_bytes(&serde_json::json!({ "config": config, "rows": rows })),
    };
    emit(a.output.as_deref(), &bytes, (a.format == FormatArg::Csv).then_some(&config))
}

fn json_bytes(v: &serde_json::Value) -> Vec<u8> {
    (serde_json::to_string_pretty(v).expect("value serializes") + "\n").into_bytes()
}

/// Reads `path<TAB>label` lines. Labels are arbitrary strings, numbered in
/// sorted order.
fn read_manifest(path: &Path, opts: &GraphInputArgs) -> CliResult<Vec<(Graph, i64)>> {
    let reader = open_input(path)?;
    let base = path.parent().unwrap_or(Path::new("."));
    let mut entries = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (file, label) = line
            .split_once('\t')
            .ok_or_else(|| CliError::Data(format!("{}:{}: expected path<TAB>label", path.display(), i + 1)))?;
        entries.push((base.join(file.trim()), label.trim().to_string()));
    }
    let mut names: Vec<&String> = entries.iter().map(|(_, l)| l).collect();
    names.sort();
    names.dedup();
    entries
        .iter()
        .map(|(p, l)| {
            let label = names.binary_search(&l).expect("label present") as i64;
            Ok((read_graph(p, opts)?, label))
        })
        .collect()
}

fn cmd_classify(a: &ClassifyArgs) -> CliResult<()> {
    let spec = a.method.spec()?;
    let (dataset, graphs) = match (&a.manifest, &a.tu_dir, &a.tu_name) {
        (Some(m), _, _) => (m.display().to_string(), read_manifest(m, &a.graph)?),
        (None, Some(dir), Some(name)) => (
            name.clone(),
            load_tu_dataset(dir, name).map_err(CliError::data(dir.join(name).display()))?,
        ),
        _ => return Err(CliError::Usage("give --manifest or --tu-dir with --tu-name".into())),
    };
    let features = graphs
        .iter()
        .enumerate()
        .map(|(i, (g, _))| {
            compute_descriptor(g, &spec)
                .map(|d| d.as_features())
                .map_err(CliError::data(format!("{dataset} graph {i}")))
        })
        .collect::<CliResult<Vec<_>>>()?;
    let labels: Vec<i64> = graphs.iter().map(|(_, l)| *l).collect();
    let knn = KnnConfig {
        train_frac: a.train_frac,
        repeats: a.repeats,
        seed: a.split_seed,
    };
    let result = knn_accuracy(&features, &labels, &knn).map_err(CliError::data(&dataset))?;
    let config = config_json("classify", a, &spec);
    let bytes = match a.format {
        FormatArg::Csv => {
            let mut out = Vec::new();
            write_classification(&mut out, &dataset, spec.kind, spec.method, &result)
                .map_err(CliError::data("classify"))?;
            out
        }
        FormatArg::Json => json_bytes(&serde_json::json!({ "config": config, "dataset": dataset, "result": result })),
    };
    emit(a.output.as_deref(), &bytes, (a.format == FormatArg::Csv).then_some(&config))
}

fn cmd_snapshots(a: &SnapshotArgs) -> CliResult<()> {
    let spec = a.method.spec()?;
    if a.granularity <= 0 {
        return Err(CliError::Usage("--granularity must be positive".into()));
    }
    let series = load_snapshots(open_input(&a.input)?, a.granularity).map_err(CliError::data(a.input.display()))?;
    let rows = snapshot_distance_series(&series, &spec).map_err(CliError::data(a.input.display()))?;
    let config = config_json("snapshots", a, &spec);
    let bytes = match a.format {
        FormatArg::Csv => {
            let mut out = Vec::new();
            write_snapshot_rows(&mut out, &rows, a.normalize).map_err(CliError::data("snapshots"))?;
            out
        }
        FormatArg::Json => json_bytes(&serde_json::json!({ "config": config, "rows": rows })),
    };
    emit(a.output.as_deref(), &bytes, (a.format == FormatArg::Csv).then_some(&config))
}

fn cmd_generate_er(a: &GenerateErArgs) -> CliResult<()> {
    let g = erdos_renyi(a.n, a.avg_degree, a.seed).map_err(CliError::usage)?;
    emit(a.output.as_deref(), g.to_edge_list(false).as_bytes(), None)
}
