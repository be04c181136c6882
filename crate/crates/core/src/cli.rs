//! The `freqlens` command line.
//!
//! ```text
//! freqlens synth   --target sin:k=3 --n 1001 [--seed S] [--out data.csv]
//! freqlens analyze --data data.csv [--grid lo:hi:count] [--normalize-dims] [--normalize-rdf] --out prefix
//! freqlens oracle  --data signal.csv [--delta V] [--k0 V]
//! freqlens train   --config exp.cfg --out dir
//! freqlens report  --record dir/record.json --figure {lfr|rdf|depth-epochs|layer-peaks} [--out file.csv]
//! ```
//!
//! `FREQLENS_THREADS` caps the worker pool. Declared output files are staged
//! next to their destination and renamed into place only after every one of
//! them was written.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{ArgGroup, Parser, Subcommand, ValueEnum};

use crate::dataset::LabeledDataset;
use crate::error::{Error, Result};
use crate::experiment::{run_experiment, synth_target, ExperimentConfig, ExperimentRecord, TargetKind};
use crate::filter::{lfr, lfr_sweep, rdf_from_lfr, rdf_peak, FilterWidthGrid};
use crate::network::Checkpoint;
use crate::spectral::{compare_filter_vs_spectral, exact_lfr, spectral_gaussian_lfr, UniformSignal};

pub const THREADS_ENV: &str = "FREQLENS_THREADS";

/// Relative spacing deviation tolerated by `oracle` before a grid counts as non-uniform.
pub const UNIFORM_GRID_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Parser)]
#[command(
    name = "freqlens",
    version,
    about = "Gaussian-filter LFR/RDF analysis and effective-target experiments"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Figure {
    Lfr,
    Rdf,
    DepthEpochs,
    LayerPeaks,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a synthetic dataset as CSV.
    Synth {
        /// sin:k=K, cos_combo or parity:d=D
        #[arg(long)]
        target: String,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output CSV; standard output when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// LFR sweep and RDF of a CSV dataset.
    Analyze {
        #[arg(long)]
        data: PathBuf,
        /// Log-spaced 1/δ grid as lo:hi:count.
        #[arg(long, default_value = "0.01:10000:40")]
        grid: String,
        #[arg(long)]
        normalize_dims: bool,
        #[arg(long)]
        normalize_rdf: bool,
        /// Writes <prefix>.lfr.csv and <prefix>.rdf.csv.
        #[arg(long)]
        out: String,
    },
    /// Compare the spatial filter with the exact spectrum of a 1-d uniform signal.
    #[command(group(ArgGroup::new("cut").required(true).multiple(true).args(["delta", "k0"])))]
    Oracle {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        delta: Option<f64>,
        #[arg(long)]
        k0: Option<f64>,
    },
    /// Train networks described by a config file and record effective-target curves.
    Train {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Plot-ready CSV from a training record.
    Report {
        #[arg(long)]
        record: PathBuf,
        #[arg(long, value_enum)]
        figure: Figure,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Files to publish together.
#[derive(Default)]
struct Outputs {
    files: Vec<(PathBuf, String)>,
}

impl Outputs {
    fn add(&mut self, path: impl Into<PathBuf>, contents: String) {
        self.files.push((path.into(), contents));
    }

    fn commit(self) -> Result<Vec<PathBuf>> {
        let mut staged = Vec::with_capacity(self.files.len());
        for (path, contents) in &self.files {
            let mut tmp = path.clone().into_os_string();
            tmp.push(format!(".tmp{}", std::process::id()));
            let tmp = PathBuf::from(tmp);
            if let Err(e) = fs::write(&tmp, contents) {
                for (t, _) in &staged {
                    let _ = fs::remove_file(t);
                }
                return Err(e.into());
            }
            staged.push((tmp, path.clone()));
        }
        for (tmp, path) in &staged {
            fs::rename(tmp, path)?;
        }
        Ok(staged.into_iter().map(|(_, p)| p).collect())
    }
}

pub fn main_with_args<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    configure_threads();
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    match run(cli.command, &mut out) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn configure_threads() {
    if let Some(n) = std::env::var(THREADS_ENV).ok().and_then(|v| v.parse::<usize>().ok()) {
        if n > 0 {
            // fails only if the pool was already built, which keeps its size
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
    }
}

pub fn run(command: Command, out: &mut impl std::io::Write) -> Result<()> {
    match command {
        Command::Synth {
            target,
            n,
            seed,
            out: path,
        } => cmd_synth(&target, n, seed, path.as_deref(), out),
        Command::Analyze {
            data,
            grid,
            normalize_dims,
            normalize_rdf,
            out: prefix,
        } => cmd_analyze(&data, &grid, normalize_dims, normalize_rdf, &prefix, out),
        Command::Oracle { data, delta, k0 } => cmd_oracle(&data, delta, k0, out),
        Command::Train { config, out: dir } => cmd_train(&config, &dir, out),
        Command::Report {
            record,
            figure,
            out: path,
        } => cmd_report(&record, figure, path.as_deref(), out),
    }
}

fn cmd_synth(target: &str, n: usize, seed: u64, path: Option<&Path>, out: &mut impl std::io::Write) -> Result<()> {
    let kind: TargetKind = target.parse()?;
    let data = synth_target(&kind, n, None, seed)?;
    match path {
        Some(p) => {
            let mut outputs = Outputs::default();
            outputs.add(p, data.to_csv_string());
            outputs.commit()?;
            writeln!(
                out,
                "wrote {}: {} rows, {} input columns, {} target columns",
                p.display(),
                data.len(),
                data.input_dim(),
                data.output_dim()
            )?;
        }
        None => out.write_all(data.to_csv_string().as_bytes())?,
    }
    Ok(())
}

fn cmd_analyze(
    data_path: &Path,
    grid: &str,
    normalize_dims: bool,
    normalize_rdf: bool,
    prefix: &str,
    out: &mut impl std::io::Write,
) -> Result<()> {
    let grid: FilterWidthGrid = grid.parse()?;
    let mut data = LabeledDataset::read_csv(data_path)?;
    if normalize_dims {
        data = data.normalize_dimensions();
    }
    let sweep = lfr_sweep(&data, &grid)?;
    let rdf = rdf_from_lfr(&sweep, normalize_rdf)?;
    let lfr_path = PathBuf::from(format!("{prefix}.lfr.csv"));
    let rdf_path = PathBuf::from(format!("{prefix}.rdf.csv"));
    let mut outputs = Outputs::default();
    outputs.add(&lfr_path, sweep.to_csv_string());
    outputs.add(&rdf_path, rdf.to_csv_string());
    outputs.commit()?;
    writeln!(
        out,
        "{} rows, d = {}, d_o = {}, {} widths",
        data.len(),
        data.input_dim(),
        data.output_dim(),
        grid.len()
    )?;
    match rdf_peak(&rdf) {
        Ok(p) => writeln!(out, "rdf peak at 1/delta = {p}")?,
        Err(Error::NoPeak) => writeln!(out, "rdf has no positive slope")?,
        Err(e) => return Err(e),
    }
    for w in &sweep.warnings {
        writeln!(out, "warning: lfr {} > 1 at 1/delta = {}", w.lfr, w.inv_delta)?;
    }
    writeln!(out, "wrote {} and {}", lfr_path.display(), rdf_path.display())?;
    Ok(())
}

/// Treats a sorted 1-d dataset on a uniform grid as one period of a signal.
pub fn uniform_signal_from_dataset(data: &LabeledDataset) -> Result<UniformSignal> {
    if data.input_dim() != 1 || data.output_dim() != 1 {
        return Err(Error::shape(format!(
            "oracle needs a 1-d input and scalar target, got d = {}, d_o = {}",
            data.input_dim(),
            data.output_dim()
        )));
    }
    let xs = data.points().column(0).to_vec();
    if xs.len() < 2 {
        return Err(Error::InsufficientData("oracle needs at least 2 samples".into()));
    }
    let h = xs[1] - xs[0];
    if !(h > 0.0) {
        return Err(Error::NonUniformGrid("inputs must be strictly increasing".into()));
    }
    for (i, pair) in xs.windows(2).enumerate() {
        let step = pair[1] - pair[0];
        if ((step - h) / h).abs() > UNIFORM_GRID_TOLERANCE {
            return Err(Error::NonUniformGrid(format!(
                "spacing {step} at row {} differs from {h}",
                i + 2
            )));
        }
    }
    let n = xs.len();
    let start = xs[0];
    let end = start + h * n as f64;
    UniformSignal::new(data.targets().column(0).to_vec(), start, end)
}

fn cmd_oracle(data_path: &Path, delta: Option<f64>, k0: Option<f64>, out: &mut impl std::io::Write) -> Result<()> {
    let data = LabeledDataset::read_csv(data_path)?;
    let signal = uniform_signal_from_dataset(&data)?;
    let (a, b) = signal.domain();
    writeln!(out, "samples = {}, domain = [{a}, {b})", signal.len())?;
    if let Some(k0) = k0 {
        writeln!(out, "exact_lfr(k0 = {k0}) = {}", exact_lfr(&signal, k0)?)?;
    }
    if let Some(delta) = delta {
        writeln!(out, "gaussian_lfr(delta = {delta}) = {}", lfr(&data, delta)?)?;
        writeln!(
            out,
            "spectral_gaussian_lfr(delta = {delta}) = {}",
            spectral_gaussian_lfr(&signal, delta)?
        )?;
        writeln!(
            out,
            "discrepancy(delta = {delta}) = {}",
            compare_filter_vs_spectral(&signal, delta)?
        )?;
    }
    Ok(())
}

fn cmd_train(config_path: &Path, dir: &Path, out: &mut impl std::io::Write) -> Result<()> {
    let config = ExperimentConfig::read(config_path)?;
    let (record, checkpoints) = run_experiment(&config)?;
    fs::create_dir_all(dir)?;
    let mut outputs = Outputs::default();
    outputs.add(dir.join("record.json"), record.to_json()?);
    outputs.add(dir.join("lfr.csv"), figure_csv(&record, Figure::Lfr));
    outputs.add(dir.join("rdf.csv"), figure_csv(&record, Figure::Rdf));
    outputs.add(dir.join("layer_peaks.csv"), figure_csv(&record, Figure::LayerPeaks));
    outputs.add(dir.join("depth_epochs.csv"), figure_csv(&record, Figure::DepthEpochs));
    for (spec, params) in checkpoints {
        let name = format!("checkpoint-d{}-s{}.txt", spec.num_hidden(), spec.seed);
        outputs.add(dir.join(name), Checkpoint::new(spec, params)?.to_text());
    }
    let written = outputs.commit()?;

    writeln!(out, "depth  median  epochs-to-error per seed")?;
    for (depth, results, median) in record.depth_summary() {
        let per_seed: Vec<String> = results
            .iter()
            .map(|r| r.epochs().map_or_else(|| "exceeded".to_string(), |e| e.to_string()))
            .collect();
        let median = median.map_or_else(|| "exceeded".to_string(), |m| m.to_string());
        writeln!(out, "{depth:>5}  {median:>6}  {}", per_seed.join(" "))?;
    }
    writeln!(out, "wrote {} files to {}", written.len(), dir.display())?;
    Ok(())
}

fn cmd_report(record_path: &Path, figure: Figure, path: Option<&Path>, out: &mut impl std::io::Write) -> Result<()> {
    let record = ExperimentRecord::from_json(&fs::read_to_string(record_path)?)?;
    let csv = figure_csv(&record, figure);
    match path {
        Some(p) => {
            let mut outputs = Outputs::default();
            outputs.add(p, csv);
            outputs.commit()?;
        }
        None => out.write_all(csv.as_bytes())?,
    }
    Ok(())
}

/// Flat CSV behind one figure. Records holding several runs get leading
/// `depth,seed` columns.
pub fn figure_csv(record: &ExperimentRecord, figure: Figure) -> String {
    let multi = record.runs.len() > 1;
    let mut s = String::new();
    let prefix_header = if multi { "depth,seed," } else { "" };
    match figure {
        Figure::Lfr | Figure::Rdf | Figure::LayerPeaks => {
            let header = match figure {
                Figure::Lfr => "epoch,layer,inv_delta,lfr",
                Figure::Rdf => "epoch,layer,inv_delta_mid,rdf",
                _ => "epoch,layer,peak_inv_delta",
            };
            let _ = writeln!(s, "{prefix_header}{header}");
            for run in &record.runs {
                let prefix = if multi {
                    format!("{},{},", run.depth, run.seed)
                } else {
                    String::new()
                };
                for c in &run.curves {
                    match figure {
                        Figure::Lfr => {
                            for (w, v) in c.sweep.grid.widths().iter().zip(&c.sweep.lfr_values) {
                                let _ = writeln!(s, "{prefix}{},{},{w},{v}", c.epoch, c.layer);
                            }
                        }
                        Figure::Rdf => {
                            for (w, v) in c.rdf.midpoints.iter().zip(&c.rdf.slopes) {
                                let _ = writeln!(s, "{prefix}{},{},{w},{v}", c.epoch, c.layer);
                            }
                        }
                        _ => {
                            let peak = c.peak.map_or_else(String::new, |p| p.to_string());
                            let _ = writeln!(s, "{prefix}{},{},{peak}", c.epoch, c.layer);
                        }
                    }
                }
            }
        }
        Figure::DepthEpochs => {
            s.push_str("depth,median_epochs_to_error,runs,exceeded\n");
            for (depth, results, median) in record.depth_summary() {
                let exceeded = results.iter().filter(|r| r.epochs().is_none()).count();
                let median = median.map_or_else(|| "exceeded".to_string(), |m| m.to_string());
                let _ = writeln!(s, "{depth},{median},{},{exceeded}", results.len());
            }
        }
    }
    s
}
