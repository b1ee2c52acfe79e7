use std::collections::BTreeMap;
use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use lobscale::book::{book_at, replay_day, ClassifiedEvent, DayReplay};
use lobscale::dfa::{
    daily_curve_and_alpha, fluctuation, local_alphas_with, log_spaced_scales, Band, FitBand,
};
use lobscale::durations::{self, concat_days, extract, DurationSeries, Variable};
use lobscale::econ::{correlate, daily_economics};
use lobscale::ingest::{
    apply_session_filter, encode_binary_log, parse_clock, read_log_file, write_csv_log, LogFileName,
    SessionWindow, Side,
};
use lobscale::report::{
    fmt_f64, fmt_opt, run_pipeline, validate_suite, write_corpus, CorpusSpec, RunConfig,
};
use lobscale::synth::{generate, synth_order_flow, DurationSource, GeneratorSpec, OrderFlowSpec, SignalKind};

#[derive(Parser)]
#[command(name = "lobscale", version, about = "Scaling analysis of limit-order-book durations")]
struct Cli {
    /// TOML run configuration; supplies defaults for every subcommand.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output file or directory (subcommand dependent).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads, 0 for all cores.
    #[arg(long, global = true, default_value_t = 0)]
    jobs: usize,
    /// Base seed for synthetic data and validation.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse, validate and session-filter a log; optionally convert it.
    Ingest {
        input: PathBuf,
        #[command(flatten)]
        session: SessionArgs,
        /// Encoding written to --out.
        #[arg(long, value_enum, default_value_t = Encoding::Csv)]
        to: Encoding,
    },
    /// Replay a log and print classified events as CSV.
    Replay {
        input: PathBuf,
        #[command(flatten)]
        session: SessionArgs,
        #[command(flatten)]
        flags: FlowFlags,
        /// Print the book as JSON after all events up to this time (ms or HH:MM:SS).
        #[arg(long)]
        dump_book_at: Option<String>,
    },
    /// Extract duration series from a log.
    Durations {
        input: PathBuf,
        #[command(flatten)]
        session: SessionArgs,
        #[command(flatten)]
        flags: FlowFlags,
        #[command(flatten)]
        select: Selection,
    },
    /// Daily exponent of each series in a durations CSV (or of a plain
    /// one-value-per-line series).
    Dfa {
        input: PathBuf,
        #[command(flatten)]
        dfa: DfaFlags,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
    /// Concatenated-series fluctuation curve and band exponents.
    Crossover {
        /// Durations CSV files (all days of the series).
        inputs: Vec<PathBuf>,
        #[command(flatten)]
        dfa: DfaFlags,
        /// Also write the curves here.
        #[arg(long)]
        curve_out: Option<PathBuf>,
    },
    /// Daily economic variables of one log.
    Econ {
        input: PathBuf,
        #[command(flatten)]
        session: SessionArgs,
        #[command(flatten)]
        flags: FlowFlags,
        #[command(flatten)]
        select: Selection,
        #[command(flatten)]
        rv: RvFlags,
    },
    /// Pearson correlation of two CSV columns with the 1% two-sided test.
    Correlate {
        input: PathBuf,
        #[arg(long)]
        x: String,
        #[arg(long)]
        y: String,
    },
    /// Full pipeline over the configured inputs.
    Run {
        /// Log files or directories, added to the configured inputs.
        inputs: Vec<PathBuf>,
        #[command(flatten)]
        flags: FlowFlags,
        #[command(flatten)]
        dfa: DfaFlags,
        #[command(flatten)]
        rv: RvFlags,
        #[arg(long)]
        no_cache: bool,
    },
    /// Synthetic signals, days and corpora.
    #[command(subcommand)]
    Synth(SynthCommand),
    /// Estimator self-checks.
    Validate,
}

#[derive(Subcommand)]
enum SynthCommand {
    /// One value per line.
    Signal {
        #[arg(long, default_value = "fgn")]
        kind: SignalKind,
        #[arg(long, default_value_t = 0.7)]
        hurst: f64,
        #[arg(long, default_value_t = 65536)]
        length: usize,
    },
    /// A directory of daily logs.
    Corpus {
        #[arg(long, default_value = "SYN")]
        stock: String,
        #[arg(long, default_value_t = 20)]
        days: usize,
        #[arg(long, default_value_t = 20100104)]
        first_day: u32,
        #[command(flatten)]
        flow: FlowShape,
        /// Write `.lob` binary logs instead of CSV.
        #[arg(long)]
        binary: bool,
    },
}

#[derive(Args)]
struct FlowShape {
    #[arg(long, default_value = "tr-tr")]
    target: Variable,
    #[arg(long, default_value = "BID")]
    side: Side,
    #[arg(long, default_value_t = 2000)]
    durations: usize,
    #[arg(long, default_value_t = 5000.0)]
    mean_ms: f64,
    /// Drive log-durations with fGn of this Hurst exponent; omit for
    /// i.i.d. exponential durations.
    #[arg(long)]
    hurst: Option<f64>,
    #[arg(long, default_value_t = 0.25)]
    sigma: f64,
}

#[derive(Args, Default)]
struct SessionArgs {
    #[arg(long)]
    open: Option<String>,
    #[arg(long)]
    close: Option<String>,
    #[arg(long)]
    trim_minutes: Option<u32>,
    /// Keep every event regardless of time.
    #[arg(long)]
    no_session: bool,
}

#[derive(Args, Default)]
struct FlowFlags {
    #[arg(long)]
    deletes_are_cancels: Option<bool>,
    #[arg(long)]
    drop_zeros: bool,
}

#[derive(Args, Default)]
struct Selection {
    /// Variables, comma separated.
    #[arg(long, value_delimiter = ',')]
    variable: Vec<Variable>,
    #[arg(long, value_delimiter = ',')]
    side: Vec<Side>,
}

#[derive(Args, Default)]
struct DfaFlags {
    #[arg(long)]
    order: Option<usize>,
    #[arg(long)]
    both_ends: bool,
    #[arg(long)]
    fit_band: Option<FitBand>,
}

#[derive(Args, Default)]
struct RvFlags {
    #[arg(long)]
    rv_offsets: Option<u32>,
    #[arg(long)]
    rv_grid_seconds: Option<u32>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Encoding {
    Csv,
    Lob,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

type AnyResult<T> = Result<T, Box<dyn std::error::Error>>;

struct Ctx {
    config: RunConfig,
    out: Option<PathBuf>,
    jobs: usize,
    seed: u64,
}

impl Ctx {
    fn writer(&self) -> AnyResult<Box<dyn Write>> {
        Ok(match &self.out {
            Some(p) => Box::new(BufWriter::new(File::create(p)?)),
            None => Box::new(BufWriter::new(io::stdout().lock())),
        })
    }

    fn session(&self, stock: &str, args: &SessionArgs) -> AnyResult<Option<SessionWindow>> {
        if args.no_session {
            return Ok(None);
        }
        let base = self.config.session_for(stock)?;
        let open = args.open.as_deref().map(parse_clock).transpose()?.unwrap_or(base.open);
        let close = args.close.as_deref().map(parse_clock).transpose()?.unwrap_or(base.close);
        let trim = args.trim_minutes.map(|m| m * 60_000).unwrap_or(base.trim);
        Ok(Some(SessionWindow::new(open, close, trim)?))
    }

    fn apply_flow(&mut self, flags: &FlowFlags) {
        if let Some(d) = flags.deletes_are_cancels {
            self.config.durations.deletes_are_cancels = d;
        }
        if flags.drop_zeros {
            self.config.durations.drop_zeros = true;
        }
    }

    fn apply_dfa(&mut self, flags: &DfaFlags) {
        if let Some(o) = flags.order {
            self.config.dfa.order = o;
        }
        if flags.both_ends {
            self.config.dfa.both_ends = true;
        }
        if let Some(b) = flags.fit_band {
            self.config.dfa.fit_band = b;
        }
    }

    fn apply_rv(&mut self, flags: &RvFlags) {
        if let Some(n) = flags.rv_offsets {
            self.config.econ.n_offsets = n;
        }
        if let Some(g) = flags.rv_grid_seconds {
            self.config.econ.grid_seconds = g;
        }
    }

    fn apply_selection(&mut self, sel: &Selection) {
        if !sel.variable.is_empty() {
            self.config.durations.variables = sel.variable.clone();
        }
        if !sel.side.is_empty() {
            self.config.durations.sides = sel.side.clone();
        }
    }
}

/// Stock and day from a canonical file name, with neutral fallbacks.
fn log_identity(path: &Path) -> (String, u32) {
    path.file_name()
        .and_then(|n| LogFileName::parse(&n.to_string_lossy()))
        .map(|n| (n.stock_id, n.day))
        .unwrap_or_else(|| ("UNKNOWN".into(), 0))
}

fn load_and_replay(ctx: &Ctx, input: &Path, session: &SessionArgs) -> AnyResult<(String, u32, Option<SessionWindow>, DayReplay)> {
    let (stock, day) = log_identity(input);
    let records = read_log_file(input)?;
    let window = ctx.session(&stock, session)?;
    let records = match &window {
        Some(w) => apply_session_filter(&records, w),
        None => records,
    };
    let replay = replay_day(&records, &ctx.config.replay_config())?;
    Ok((stock, day, window, replay))
}

fn write_events(w: &mut dyn Write, events: &[ClassifiedEvent]) -> io::Result<()> {
    writeln!(w, "timestamp,kind,side,at_best,order_id,price,quantity,lifetime_ms")?;
    for e in events {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{}",
            e.timestamp,
            e.kind.as_str(),
            e.side,
            e.at_best,
            e.order_id,
            e.price,
            e.quantity,
            e.lifetime_ms.map(|l| l.to_string()).unwrap_or_default()
        )?;
    }
    Ok(())
}

/// A durations CSV, or a bare column of numbers treated as one series.
fn read_series_file(path: &Path) -> AnyResult<Vec<(String, Vec<f64>)>> {
    let mut reader = BufReader::new(File::open(path)?);
    let mut first = String::new();
    reader.read_line(&mut first)?;
    if first.trim_end() == durations::CSV_HEADER {
        let all = durations::read_csv(BufReader::new(File::open(path)?))?;
        return Ok(all
            .into_iter()
            .map(|s| {
                let label = format!("{},{:08},{},{}", s.stock_id, s.day, s.side, s.variable);
                (label, s.as_f64())
            })
            .collect());
    }
    let mut values = Vec::new();
    for (i, line) in std::iter::once(Ok(first)).chain(reader.lines()).enumerate() {
        let line = line?;
        let t = line.trim();
        if t.is_empty() {
            continue;
        }
        match t.parse::<f64>() {
            Ok(v) => values.push(v),
            Err(_) if i == 0 => {}
            Err(e) => return Err(format!("line {}: {e}", i + 1).into()),
        }
    }
    Ok(vec![(",,,".into(), values)])
}

fn cmd_ingest(ctx: &Ctx, input: &Path, session: &SessionArgs, to: Encoding) -> AnyResult<()> {
    let (stock, _) = log_identity(input);
    let records = read_log_file(input)?;
    let kept = match ctx.session(&stock, session)? {
        Some(w) => apply_session_filter(&records, &w),
        None => records.clone(),
    };
    eprintln!("{} records parsed, {} inside the session", records.len(), kept.len());
    if let Some(out) = &ctx.out {
        match to {
            Encoding::Csv => write_csv_log(BufWriter::new(File::create(out)?), &kept)?,
            Encoding::Lob => std::fs::write(out, encode_binary_log(&kept))?,
        }
    }
    Ok(())
}

fn cmd_replay(ctx: &Ctx, input: &Path, session: &SessionArgs, dump: Option<&str>) -> AnyResult<()> {
    if let Some(at) = dump {
        let at = match at.parse::<u32>() {
            Ok(ms) => ms,
            Err(_) => parse_clock(at)?,
        };
        let (stock, _) = log_identity(input);
        let records = read_log_file(input)?;
        let records = match ctx.session(&stock, session)? {
            Some(w) => apply_session_filter(&records, &w),
            None => records,
        };
        let book = book_at(&records, &ctx.config.replay_config(), at)?;
        let mut w = ctx.writer()?;
        serde_json::to_writer_pretty(&mut w, &book.snapshot(at))?;
        writeln!(w)?;
        return Ok(());
    }
    let (_, _, _, replay) = load_and_replay(ctx, input, session)?;
    let mut w = ctx.writer()?;
    write_events(&mut w, &replay.events)?;
    Ok(())
}

fn extract_all(ctx: &Ctx, stock: &str, day: u32, replay: &DayReplay) -> Vec<DurationSeries> {
    let cfg = ctx.config.duration_config();
    let mut out = Vec::new();
    for &side in &ctx.config.durations.sides {
        for &variable in &ctx.config.durations.variables {
            out.push(extract(stock, day, &replay.events, variable, side, &cfg));
        }
    }
    out
}

fn cmd_durations(ctx: &Ctx, input: &Path, session: &SessionArgs) -> AnyResult<()> {
    let (stock, day, _, replay) = load_and_replay(ctx, input, session)?;
    let series = extract_all(ctx, &stock, day, &replay);
    match &ctx.out {
        Some(p) if p.extension().is_some_and(|e| e == "dur") => {
            std::fs::write(p, durations::encode_binary(&series))?
        }
        _ => durations::write_csv(ctx.writer()?, &series)?,
    }
    Ok(())
}

fn cmd_dfa(ctx: &Ctx, input: &Path, format: Format) -> AnyResult<()> {
    let cfg = ctx.config.daily_alpha_config();
    let mut w = ctx.writer()?;
    let mut json = Vec::new();
    if let Format::Csv = format {
        writeln!(w, "stock,day,side,variable,length,alpha,intercept,r_squared,n_points,stderr_alpha,status")?;
    }
    for (label, values) in read_series_file(input)? {
        let res = daily_curve_and_alpha(&values, &cfg, None);
        match format {
            Format::Csv => match &res {
                Ok((_, f)) => writeln!(
                    w,
                    "{label},{},{},{},{},{},{},ok",
                    values.len(),
                    fmt_f64(f.alpha),
                    fmt_f64(f.intercept),
                    fmt_f64(f.r_squared),
                    f.n_points,
                    fmt_f64(f.stderr_alpha)
                )?,
                Err(e) => writeln!(w, "{label},{},,,,,,{e}", values.len())?,
            },
            Format::Json => json.push(serde_json::json!({
                "series": label,
                "length": values.len(),
                "curve": res.as_ref().ok().map(|(c, _)| c),
                "fit": res.as_ref().ok().map(|(_, f)| f),
                "error": res.as_ref().err().map(|e| e.to_string()),
            })),
        }
    }
    if let Format::Json = format {
        serde_json::to_writer_pretty(&mut w, &json)?;
        writeln!(w)?;
    }
    Ok(())
}

fn cmd_crossover(ctx: &Ctx, inputs: &[PathBuf], curve_out: Option<&Path>) -> AnyResult<()> {
    let mut groups: BTreeMap<(String, Side, Variable), Vec<DurationSeries>> = BTreeMap::new();
    for p in inputs {
        for s in durations::read_csv(BufReader::new(File::open(p)?))? {
            groups
                .entry((s.stock_id.clone(), s.side, s.variable))
                .or_default()
                .push(s);
        }
    }
    let cfg = ctx.config.daily_alpha_config();
    let ranges = ctx.config.dfa.bands.ranges();
    let mut w = ctx.writer()?;
    let mut curves: Option<Box<dyn Write>> = match curve_out {
        Some(p) => {
            let mut f = BufWriter::new(File::create(p)?);
            writeln!(f, "stock,side,variable,scale,normalized_scale,fluctuation")?;
            Some(Box::new(f))
        }
        None => None,
    };
    writeln!(w, "stock,side,variable,band,lo,hi,alpha,intercept,r_squared,n_points,status")?;
    for ((stock, side, variable), mut days) in groups {
        days.sort_by_key(|s| s.day);
        let concat = concat_days(&days)?;
        let average = concat.len() as f64 / days.len() as f64;
        let scales = log_spaced_scales(cfg.min_scale, concat.len() / 4, cfg.scales_per_decade);
        let curve = fluctuation(&concat.as_f64(), &scales, &cfg.dfa)?.with_normalization(average);
        if let Some(cw) = curves.as_mut() {
            for (s, f) in curve.scales.iter().zip(&curve.fluctuations) {
                writeln!(cw, "{stock},{side},{variable},{s},{},{}", fmt_f64(*s as f64 / average), fmt_f64(*f))?;
            }
        }
        let local = local_alphas_with(&curve, &ranges)?;
        for band in Band::ALL {
            let r = ranges[band as usize];
            let prefix = format!("{stock},{side},{variable},{},{},{}", band.label(), fmt_f64(r.lo), fmt_f64(r.hi));
            match local.get(band) {
                Ok(f) => writeln!(
                    w,
                    "{prefix},{},{},{},{},ok",
                    fmt_f64(f.alpha),
                    fmt_f64(f.intercept),
                    fmt_f64(f.r_squared),
                    f.n_points
                )?,
                Err(e) => writeln!(w, "{prefix},,,,,{e}")?,
            }
        }
    }
    Ok(())
}

fn cmd_econ(ctx: &Ctx, input: &Path, session: &SessionArgs) -> AnyResult<()> {
    ctx.config.econ.validate()?;
    let (stock, day, window, replay) = load_and_replay(ctx, input, session)?;
    let window = match window {
        Some(w) => w,
        None => SessionWindow::new(0, lobscale::ingest::MS_PER_DAY, 0)?,
    };
    let dcfg = ctx.config.duration_config();
    let mut w = ctx.writer()?;
    writeln!(w, "stock,day,side,variable,avg_duration_ms,activity,avg_quantity,daily_log_return,realized_variance,status")?;
    for s in extract_all(ctx, &stock, day, &replay) {
        match daily_economics(&s, &replay.events, &replay.mids, &window, &dcfg, &ctx.config.econ) {
            Ok(e) => writeln!(
                w,
                "{stock},{day:08},{},{},{},{},{},{},{},ok",
                e.side,
                e.variable,
                fmt_f64(e.avg_duration_ms),
                e.activity,
                fmt_f64(e.avg_quantity),
                fmt_opt(e.daily_log_return),
                fmt_opt(e.realized_variance)
            )?,
            Err(e) => writeln!(w, "{stock},{day:08},{},{},,{},,,,{e}", s.side, s.variable, s.len())?,
        }
    }
    Ok(())
}

fn cmd_correlate(ctx: &Ctx, input: &Path, x: &str, y: &str) -> AnyResult<()> {
    let mut lines = BufReader::new(File::open(input)?).lines();
    let header = lines.next().ok_or("empty file")??;
    let cols: Vec<&str> = header.split(',').map(str::trim).collect();
    let find = |name: &str| {
        cols.iter()
            .position(|c| *c == name)
            .ok_or_else(|| format!("no column `{name}`"))
    };
    let (xi, yi) = (find(x)?, find(y)?);
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    for line in lines {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split(',').collect();
        let get = |i: usize| f.get(i).and_then(|v| v.trim().parse::<f64>().ok());
        xs.push(get(xi));
        ys.push(get(yi));
    }
    let res = correlate(&xs, &ys)?;
    let mut w = ctx.writer()?;
    serde_json::to_writer_pretty(&mut w, &res)?;
    writeln!(w)?;
    Ok(())
}

fn cmd_run(ctx: &mut Ctx, inputs: Vec<PathBuf>, no_cache: bool) -> AnyResult<ExitCode> {
    ctx.config.input.paths.extend(inputs);
    if let Some(out) = &ctx.out {
        ctx.config.output.dir = out.clone();
    }
    if no_cache {
        ctx.config.output.cache = false;
    }
    let report = run_pipeline(&ctx.config, ctx.jobs)?;
    let m = &report.manifest;
    eprintln!(
        "{}: {} of {} days processed, products in {}",
        serde_json::to_value(m.status)?.as_str().unwrap_or(""),
        m.days_processed,
        m.days_total,
        report.out_dir.display()
    );
    for s in &m.skipped_days {
        eprintln!("  skipped {}: {}", s.file, s.reason);
    }
    Ok(ExitCode::from(report.status().exit_code() as u8))
}

fn cmd_synth(ctx: &Ctx, cmd: SynthCommand) -> AnyResult<()> {
    match cmd {
        SynthCommand::Signal { kind, hurst, length } => {
            let x = generate(&GeneratorSpec { kind, hurst, length, seed: ctx.seed })?;
            let mut w = ctx.writer()?;
            writeln!(w, "value")?;
            for v in x {
                writeln!(w, "{}", fmt_f64(v))?;
            }
        }
        SynthCommand::Corpus { stock, days, first_day, flow, binary } => {
            let dir = ctx.out.clone().ok_or("synth corpus needs --out <dir>")?;
            let durations = match flow.hurst {
                Some(h) => DurationSource::LogGaussian {
                    signal: SignalKind::Fgn,
                    hurst: h,
                    mean_ms: flow.mean_ms,
                    sigma: flow.sigma,
                },
                None => DurationSource::Exponential { mean_ms: flow.mean_ms },
            };
            let spec = CorpusSpec {
                stock_id: stock,
                n_days: days,
                first_day,
                binary,
                flow: OrderFlowSpec {
                    target: flow.target,
                    side: flow.side,
                    n_durations: flow.durations,
                    durations,
                    session: ctx.config.session_for("")?,
                    ..OrderFlowSpec::default()
                },
            };
            // fail early on shape errors before spawning the corpus
            synth_order_flow(&spec.flow, ctx.seed)?;
            let files = write_corpus(&dir, &spec, ctx.seed)?;
            eprintln!("{} logs written to {}", files.len(), dir.display());
        }
    }
    Ok(())
}

fn run(cli: Cli) -> AnyResult<ExitCode> {
    let config = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    let seed = cli.seed.unwrap_or(config.seed);
    let mut ctx = Ctx { config, out: cli.out, jobs: cli.jobs, seed };
    if ctx.jobs > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(ctx.jobs)
            .build_global()
            .ok();
    }
    match cli.command {
        Command::Ingest { input, session, to } => cmd_ingest(&ctx, &input, &session, to)?,
        Command::Replay { input, session, flags, dump_book_at } => {
            ctx.apply_flow(&flags);
            cmd_replay(&ctx, &input, &session, dump_book_at.as_deref())?
        }
        Command::Durations { input, session, flags, select } => {
            ctx.apply_flow(&flags);
            ctx.apply_selection(&select);
            cmd_durations(&ctx, &input, &session)?
        }
        Command::Dfa { input, dfa, format } => {
            ctx.apply_dfa(&dfa);
            cmd_dfa(&ctx, &input, format)?
        }
        Command::Crossover { inputs, dfa, curve_out } => {
            ctx.apply_dfa(&dfa);
            cmd_crossover(&ctx, &inputs, curve_out.as_deref())?
        }
        Command::Econ { input, session, flags, select, rv } => {
            ctx.apply_flow(&flags);
            ctx.apply_selection(&select);
            ctx.apply_rv(&rv);
            cmd_econ(&ctx, &input, &session)?
        }
        Command::Correlate { input, x, y } => cmd_correlate(&ctx, &input, &x, &y)?,
        Command::Run { inputs, flags, dfa, rv, no_cache } => {
            ctx.apply_flow(&flags);
            ctx.apply_dfa(&dfa);
            ctx.apply_rv(&rv);
            return cmd_run(&mut ctx, inputs, no_cache);
        }
        Command::Synth(cmd) => cmd_synth(&ctx, cmd)?,
        Command::Validate => {
            let report = validate_suite(ctx.seed);
            print!("{report}");
            if !report.passed() {
                return Ok(ExitCode::from(1));
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
