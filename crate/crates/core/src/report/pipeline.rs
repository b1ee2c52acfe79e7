use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::cache::{self, Cache};
use super::config::RunConfig;
use super::{fmt_f64, fmt_opt, ReportError};
use crate::book::{replay_day, DayReplay};
use crate::dfa::{
    daily_curve_and_alpha, fluctuation, local_alphas_with, log_spaced_scales, summarize_alphas,
    Band, ScalingFit,
};
use crate::durations::{concat_days, extract, DurationSeries, Variable};
use crate::econ::{correlate, daily_economics, DailyEcon, EconField};
use crate::ingest::{apply_session_filter, decode_binary_log, parse_csv_log, LogFileName, LogFormat, Side};

pub const PRODUCTS: [&str; 6] = [
    "daily_alphas.csv",
    "alpha_summary.csv",
    "fluctuation_curves.csv",
    "local_alphas.csv",
    "daily_econ.csv",
    "correlations.csv",
];
pub const MANIFEST: &str = "manifest.json";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RunStatus {
    Clean,
    Partial,
    Failed,
}

impl RunStatus {
    pub fn exit_code(self) -> i32 {
        match self {
            RunStatus::Clean => 0,
            RunStatus::Partial => 2,
            RunStatus::Failed => 1,
        }
    }
}

/// One input log.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DayInput {
    pub stock_id: String,
    pub day: u32,
    pub format: LogFormat,
    pub path: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SkippedDay {
    pub stock_id: String,
    pub day: u32,
    pub file: String,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileEntry {
    pub file: String,
    pub sha256: String,
    pub bytes: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Manifest {
    pub status: RunStatus,
    pub config_sha256: String,
    pub days_total: usize,
    pub days_processed: usize,
    pub inputs: Vec<FileEntry>,
    pub products: Vec<FileEntry>,
    pub skipped_days: Vec<SkippedDay>,
}

#[derive(Debug, Clone)]
pub struct RunReport {
    pub out_dir: PathBuf,
    pub manifest: Manifest,
}

impl RunReport {
    pub fn status(&self) -> RunStatus {
        self.manifest.status
    }

    pub fn product_paths(&self) -> Vec<PathBuf> {
        self.manifest
            .products
            .iter()
            .map(|p| self.out_dir.join(&p.file))
            .collect()
    }
}

fn file_name(path: &Path) -> String {
    path.file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default()
}

/// Expand configured paths into logs sorted by (stock, day).
pub fn discover_inputs(config: &RunConfig) -> Result<Vec<DayInput>, ReportError> {
    let mut found = Vec::new();
    for path in &config.input.paths {
        if path.is_dir() {
            let mut entries: Vec<PathBuf> = std::fs::read_dir(path)?
                .map(|e| e.map(|e| e.path()))
                .collect::<Result<_, _>>()?;
            entries.sort();
            for p in entries {
                match LogFileName::parse(&file_name(&p)) {
                    Some(name) if p.is_file() => found.push((name, p)),
                    _ => log::debug!("ignoring {}", p.display()),
                }
            }
        } else if path.is_file() {
            let name = LogFileName::parse(&file_name(path)).ok_or_else(|| {
                ReportError::Config(format!(
                    "{} is not named <stock>_<yyyymmdd>.(csv|lob)",
                    path.display()
                ))
            })?;
            found.push((name, path.clone()));
        } else {
            return Err(ReportError::Config(format!("input {} does not exist", path.display())));
        }
    }
    let wanted: BTreeSet<&str> = config.input.stocks.iter().map(String::as_str).collect();
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for (name, path) in found {
        if !wanted.is_empty() && !wanted.contains(name.stock_id.as_str()) {
            continue;
        }
        if name.stock_id.contains([',', '"']) {
            return Err(ReportError::Config(format!("unsupported stock id `{}`", name.stock_id)));
        }
        if !seen.insert((name.stock_id.clone(), name.day)) {
            return Err(ReportError::Config(format!(
                "more than one log for {} on {:08}",
                name.stock_id, name.day
            )));
        }
        out.push(DayInput {
            stock_id: name.stock_id,
            day: name.day,
            format: name.format,
            path,
        });
    }
    out.sort_by(|a, b| (&a.stock_id, a.day).cmp(&(&b.stock_id, b.day)));
    Ok(out)
}

struct DayResult {
    input_sha256: String,
    input_bytes: u64,
    /// One series per (side, variable) in config order.
    series: Vec<DurationSeries>,
    econ: Vec<Result<DailyEcon, String>>,
}

fn load_replay(input: &DayInput, bytes: &[u8], config: &RunConfig) -> Result<DayReplay, String> {
    let records = match input.format {
        LogFormat::Csv => parse_csv_log(bytes),
        LogFormat::Binary => decode_binary_log(bytes),
    }
    .map_err(|e| e.to_string())?;
    let session = config.session_for(&input.stock_id).map_err(|e| e.to_string())?;
    let filtered = apply_session_filter(&records, &session);
    replay_day(&filtered, &config.replay_config()).map_err(|e| e.to_string())
}

fn process_day(input: &DayInput, config: &RunConfig, cache: Option<&Cache>) -> Result<DayResult, String> {
    let bytes = std::fs::read(&input.path).map_err(|e| e.to_string())?;
    let session = config.session_for(&input.stock_id).map_err(|e| e.to_string())?;
    let dcfg = config.duration_config();
    let rkey = cache::replay_key(&bytes, &session, config.durations.deletes_are_cancels);
    let dkey = cache::durations_key(&rkey, &dcfg, &config.durations.variables, &config.durations.sides);

    let replay = match cache.and_then(|c| c.load_replay(&rkey)) {
        Some(r) => r,
        None => {
            let r = load_replay(input, &bytes, config)?;
            if let Some(c) = cache {
                c.store_replay(&rkey, &r);
            }
            r
        }
    };
    let expected = config.durations.sides.len() * config.durations.variables.len();
    let series = match cache.and_then(|c| c.load_durations(&dkey)) {
        Some(s) if s.len() == expected => s,
        _ => {
            let mut s = Vec::with_capacity(expected);
            for &side in &config.durations.sides {
                for &variable in &config.durations.variables {
                    s.push(extract(&input.stock_id, input.day, &replay.events, variable, side, &dcfg));
                }
            }
            if let Some(c) = cache {
                c.store_durations(&dkey, &s);
            }
            s
        }
    };
    let econ = series
        .iter()
        .map(|s| {
            daily_economics(s, &replay.events, &replay.mids, &session, &dcfg, &config.econ)
                .map_err(|e| e.to_string())
        })
        .collect();
    Ok(DayResult {
        input_sha256: cache::sha256_hex(&bytes),
        input_bytes: bytes.len() as u64,
        series,
        econ,
    })
}

#[derive(Default)]
struct Tables {
    daily_alphas: String,
    alpha_summary: String,
    curves: String,
    local: String,
    econ: String,
    correlations: String,
}

impl Tables {
    fn new() -> Self {
        Self {
            daily_alphas: "stock,day,side,variable,length,alpha,intercept,r_squared,n_points,stderr_alpha,status\n".into(),
            alpha_summary: "stock,side,variable,n_days,mean,std,ci95_half_width,average_daily_count,status\n".into(),
            curves: "stock,side,variable,scale,normalized_scale,fluctuation\n".into(),
            local: "stock,side,variable,band,lo,hi,alpha,intercept,r_squared,n_points,status\n".into(),
            econ: "stock,day,side,variable,avg_duration_ms,activity,avg_quantity,daily_log_return,realized_variance,status\n".into(),
            correlations: "stock,side,variable,econ_variable,n,r,r_critical,significant_99,status\n".into(),
        }
    }
}

fn fit_cols(fit: &Result<ScalingFit, String>) -> (String, String) {
    match fit {
        Ok(f) => (
            format!(
                "{},{},{},{}",
                fmt_f64(f.alpha),
                fmt_f64(f.intercept),
                fmt_f64(f.r_squared),
                f.n_points
            ),
            "ok".into(),
        ),
        Err(e) => (",,,".into(), e.clone()),
    }
}

fn status_text(s: &str) -> String {
    s.replace([',', '\n', '"'], ";")
}

/// Per (stock, side, variable) day-ordered daily exponents.
type AlphaKey = (String, Side, Variable);

fn analyse_group(
    tables: &mut Tables,
    config: &RunConfig,
    stock: &str,
    side: Side,
    variable: Variable,
    days: &[(&DayInput, &DurationSeries, &Result<DailyEcon, String>)],
) -> Vec<Option<f64>> {
    let acfg = config.daily_alpha_config();
    let total: usize = days.iter().map(|(_, s, _)| s.len()).sum();
    let average = total as f64 / days.len() as f64;
    let normalization = (average > 0.0).then_some(average);

    let fits: Vec<Result<ScalingFit, String>> = days
        .par_iter()
        .map(|(_, s, _)| {
            daily_curve_and_alpha(&s.as_f64(), &acfg, normalization)
                .map(|(_, fit)| fit)
                .map_err(|e| e.to_string())
        })
        .collect();

    let mut alphas = Vec::with_capacity(days.len());
    for ((input, series, econ), fit) in days.iter().zip(&fits) {
        let (cols, status) = fit_cols(fit);
        let stderr = fit.as_ref().map(|f| fmt_f64(f.stderr_alpha)).unwrap_or_default();
        let _ = writeln!(
            tables.daily_alphas,
            "{stock},{:08},{side},{variable},{},{cols},{stderr},{}",
            input.day,
            series.len(),
            status_text(&status)
        );
        alphas.push(fit.as_ref().ok().map(|f| f.alpha));
        match econ {
            Ok(e) => {
                let _ = writeln!(
                    tables.econ,
                    "{stock},{:08},{side},{variable},{},{},{},{},{},ok",
                    input.day,
                    fmt_f64(e.avg_duration_ms),
                    e.activity,
                    fmt_f64(e.avg_quantity),
                    fmt_opt(e.daily_log_return),
                    fmt_opt(e.realized_variance)
                );
            }
            Err(msg) => {
                let _ = writeln!(
                    tables.econ,
                    "{stock},{:08},{side},{variable},,{},,,,{}",
                    input.day,
                    series.len(),
                    status_text(msg)
                );
            }
        }
    }

    let ok: Vec<f64> = alphas.iter().flatten().copied().collect();
    match summarize_alphas(&ok) {
        Ok(s) => {
            let _ = writeln!(
                tables.alpha_summary,
                "{stock},{side},{variable},{},{},{},{},{},ok",
                s.n_days,
                fmt_f64(s.mean),
                fmt_f64(s.std),
                fmt_f64(s.ci95_half_width),
                fmt_f64(average)
            );
        }
        Err(e) => {
            let _ = writeln!(
                tables.alpha_summary,
                "{stock},{side},{variable},{},,,,{},{}",
                ok.len(),
                fmt_f64(average),
                status_text(&e.to_string())
            );
        }
    }

    let owned: Vec<DurationSeries> = days.iter().map(|(_, s, _)| (*s).clone()).collect();
    let concat = concat_days(&owned).expect("group shares one key");
    let n = concat.len();
    let scales = log_spaced_scales(acfg.min_scale, n / 4, acfg.scales_per_decade);
    let curve = match normalization {
        None => Err("no qualifying events".to_string()),
        Some(a) if !scales.is_empty() => fluctuation(&concat.as_f64(), &scales, &acfg.dfa)
            .map(|c| c.with_normalization(a))
            .map_err(|e| e.to_string()),
        Some(_) => Err(format!("concatenated series of length {n} is too short")),
    };
    let ranges = config.dfa.bands.ranges();
    match curve {
        Ok(curve) => {
            for (s, f) in curve.scales.iter().zip(&curve.fluctuations) {
                let _ = writeln!(
                    tables.curves,
                    "{stock},{side},{variable},{s},{},{}",
                    fmt_f64(*s as f64 / average),
                    fmt_f64(*f)
                );
            }
            let local = local_alphas_with(&curve, &ranges).expect("curve is normalized");
            for band in Band::ALL {
                let r = ranges[band as usize];
                let fit = local.get(band).clone().map_err(|e| e.to_string());
                let (cols, status) = fit_cols(&fit);
                let _ = writeln!(
                    tables.local,
                    "{stock},{side},{variable},{},{},{},{cols},{}",
                    band.label(),
                    fmt_f64(r.lo),
                    fmt_f64(r.hi),
                    status_text(&status)
                );
            }
        }
        Err(msg) => {
            for band in Band::ALL {
                let r = ranges[band as usize];
                let _ = writeln!(
                    tables.local,
                    "{stock},{side},{variable},{},{},{},,,,,{}",
                    band.label(),
                    fmt_f64(r.lo),
                    fmt_f64(r.hi),
                    status_text(&msg)
                );
            }
        }
    }
    alphas
}

fn write_correlation(
    tables: &mut Tables,
    stock: &str,
    side: &str,
    variable: Variable,
    field: EconField,
    alphas: &[Option<f64>],
    values: &[Option<f64>],
) {
    match correlate(alphas, values) {
        Ok(c) => {
            let _ = writeln!(
                tables.correlations,
                "{stock},{side},{variable},{field},{},{},{},{},ok",
                c.n,
                fmt_f64(c.r),
                fmt_f64(c.r_critical),
                c.significant_99
            );
        }
        Err(e) => {
            let _ = writeln!(
                tables.correlations,
                "{stock},{side},{variable},{field},,,,,{}",
                status_text(&e.to_string())
            );
        }
    }
}

fn entry(name: String, bytes: &[u8]) -> FileEntry {
    FileEntry {
        file: name,
        sha256: cache::sha256_hex(bytes),
        bytes: bytes.len() as u64,
    }
}

/// Run the whole pipeline with a pool of `jobs` workers (0 = all cores).
pub fn run_pipeline(config: &RunConfig, jobs: usize) -> Result<RunReport, ReportError> {
    config.validate()?;
    let inputs = discover_inputs(config)?;
    for input in &inputs {
        config.session_for(&input.stock_id)?;
    }
    let out_dir = config.output.dir.clone();
    std::fs::create_dir_all(&out_dir)?;
    let cache = if config.output.cache {
        Some(Cache::open(&out_dir.join("cache"))?)
    } else {
        None
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| ReportError::Config(format!("worker pool: {e}")))?;

    pool.install(|| {
        let results: Vec<Result<DayResult, String>> = inputs
            .par_iter()
            .map(|input| process_day(input, config, cache.as_ref()))
            .collect();

        let mut skipped = Vec::new();
        let mut input_entries = Vec::new();
        let mut by_stock: BTreeMap<&str, Vec<(&DayInput, &DayResult)>> = BTreeMap::new();
        for (input, res) in inputs.iter().zip(&results) {
            match res {
                Ok(r) => {
                    input_entries.push(FileEntry {
                        file: file_name(&input.path),
                        sha256: r.input_sha256.clone(),
                        bytes: r.input_bytes,
                    });
                    by_stock.entry(&input.stock_id).or_default().push((input, r));
                }
                Err(reason) => {
                    log::warn!("skipping {}: {reason}", input.path.display());
                    skipped.push(SkippedDay {
                        stock_id: input.stock_id.clone(),
                        day: input.day,
                        file: file_name(&input.path),
                        reason: reason.clone(),
                    });
                }
            }
        }

        let mut tables = Tables::new();
        let vars = &config.durations.variables;
        let sides = &config.durations.sides;
        for (stock, days) in &by_stock {
            let mut alpha_map: BTreeMap<AlphaKey, Vec<Option<f64>>> = BTreeMap::new();
            for (si, &side) in sides.iter().enumerate() {
                for (vi, &variable) in vars.iter().enumerate() {
                    let idx = si * vars.len() + vi;
                    let group: Vec<_> = days
                        .iter()
                        .map(|(input, r)| (*input, &r.series[idx], &r.econ[idx]))
                        .collect();
                    let alphas = analyse_group(&mut tables, config, stock, side, variable, &group);
                    for field in EconField::ALL {
                        let values: Vec<Option<f64>> = group
                            .iter()
                            .map(|(_, _, e)| e.as_ref().ok().and_then(|e| e.field(field)))
                            .collect();
                        write_correlation(&mut tables, stock, side.as_str(), variable, field, &alphas, &values);
                    }
                    alpha_map.insert((stock.to_string(), side, variable), alphas);
                }
            }
            if sides.len() > 1 {
                // pooled across sides: per-day means of alpha and of the field
                for (vi, &variable) in vars.iter().enumerate() {
                    let per_side: Vec<&Vec<Option<f64>>> = sides
                        .iter()
                        .map(|&s| &alpha_map[&(stock.to_string(), s, variable)])
                        .collect();
                    let pooled_alpha: Vec<Option<f64>> = (0..days.len())
                        .map(|d| mean_all(per_side.iter().map(|a| a[d])))
                        .collect();
                    for field in EconField::ALL {
                        let pooled_field: Vec<Option<f64>> = days
                            .iter()
                            .map(|(_, r)| {
                                mean_all((0..sides.len()).map(|si| {
                                    r.econ[si * vars.len() + vi]
                                        .as_ref()
                                        .ok()
                                        .and_then(|e| e.field(field))
                                }))
                            })
                            .collect();
                        write_correlation(
                            &mut tables,
                            stock,
                            "BOTH",
                            variable,
                            field,
                            &pooled_alpha,
                            &pooled_field,
                        );
                    }
                }
            }
        }

        let contents = [
            tables.daily_alphas,
            tables.alpha_summary,
            tables.curves,
            tables.local,
            tables.econ,
            tables.correlations,
        ];
        let mut products = Vec::new();
        for (name, text) in PRODUCTS.iter().zip(&contents) {
            std::fs::write(out_dir.join(name), text)?;
            products.push(entry(name.to_string(), text.as_bytes()));
        }
        let days_processed = inputs.len() - skipped.len();
        let status = if days_processed == 0 {
            RunStatus::Failed
        } else if skipped.is_empty() {
            RunStatus::Clean
        } else {
            RunStatus::Partial
        };
        let manifest = Manifest {
            status,
            config_sha256: cache::sha256_hex(config.to_toml_string().as_bytes()),
            days_total: inputs.len(),
            days_processed,
            inputs: input_entries,
            products,
            skipped_days: skipped,
        };
        let json = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
        std::fs::write(out_dir.join(MANIFEST), json + "\n")?;
        Ok(RunReport { out_dir, manifest })
    })
}

/// Mean when every value is present.
fn mean_all(values: impl Iterator<Item = Option<f64>>) -> Option<f64> {
    let mut sum = 0.0;
    let mut n = 0usize;
    for v in values {
        sum += v?;
        n += 1;
    }
    (n > 0).then(|| sum / n as f64)
}
