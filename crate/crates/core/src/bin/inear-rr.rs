use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use inear_rr::io::{
    emit_results, read_wav, write_plot_data, Engine, ForcePipeline, OutputFormat, PipelineConfig,
};
use inear_rr::lrc::{build_breathing_template, BAND_HIGH, BAND_LOW};
use inear_rr::selector::{
    mfcc_features, mixdown, synthetic_corpus, train_selector, SvmParams, SEGMENT_S,
};
use inear_rr::synth::{
    synth_active, synth_sedentary, write_ground_truth, write_wav_stereo, ActiveScenario,
    SedentaryScenario, BREATH_BAND_HIGH,
};
use inear_rr::{ActivityClass, Error, Result};

#[derive(Parser)]
#[command(name = "inear-rr", version, about = "Respiratory rate from two-channel in-ear audio")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Estimate respiratory rate for every window of a recording.
    Estimate {
        #[command(flatten)]
        run: RunArgs,
        /// Result file; stdout when omitted.
        #[arg(long)]
        output: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
    /// Generate a synthetic recording and its ground-truth sidecar.
    Synth(SynthArgs),
    /// Train the activity selector and write the model file.
    TrainSelector(TrainArgs),
    /// Build a breathing template from a reference recording.
    BuildTemplate {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_enum)]
        band: Band,
        #[arg(long)]
        output: PathBuf,
    },
    /// Dump per-window intermediate series as text columns.
    PlotData {
        #[command(flatten)]
        run: RunArgs,
        /// Directory receiving the series files and results.csv.
        #[arg(long)]
        output: PathBuf,
    },
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    input: PathBuf,
    /// key = value configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_enum)]
    force_pipeline: Option<Forced>,
    #[arg(long)]
    window_sec: Option<f64>,
    #[arg(long)]
    overlap_sec: Option<f64>,
    #[arg(long)]
    workers: Option<usize>,
    /// Extra configuration as key=value; may repeat.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Jsonl,
}

#[derive(Clone, Copy, ValueEnum)]
enum Forced {
    Auto,
    Rsa,
    LrcLow,
    LrcHigh,
}

#[derive(Clone, Copy, ValueEnum)]
enum Band {
    Low,
    High,
}

#[derive(Clone, Copy, ValueEnum)]
enum Scenario {
    Sedentary,
    Walking,
    Running,
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long, value_enum)]
    scenario: Scenario,
    /// WAV path; the ground truth goes next to it with a .truth.txt suffix.
    #[arg(long)]
    output: PathBuf,
    #[arg(long, default_value_t = 60.0)]
    duration: f64,
    #[arg(long, default_value_t = 22050.0)]
    sample_rate: f64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Signal-to-noise ratio in dB; omit for the scenario default.
    #[arg(long)]
    snr: Option<f64>,
    /// Breaths per minute (sedentary).
    #[arg(long, default_value_t = 15.0)]
    rr: f64,
    /// Mean heart rate, BPM (sedentary).
    #[arg(long, default_value_t = 70.0)]
    hr: f64,
    /// Peak interval modulation, ms (sedentary).
    #[arg(long, default_value_t = 40.0)]
    rsa_depth_ms: f64,
    /// Steps per second (walking, running).
    #[arg(long, default_value_t = 2.0)]
    stride: f64,
    /// Steps per breath (walking, running).
    #[arg(long, default_value_t = 4.0)]
    lrc: f64,
}

#[derive(Args)]
struct TrainArgs {
    #[arg(long)]
    output: PathBuf,
    /// Lines of `wav_path class` with class sedentary, active_low or
    /// active_high; every 5 s segment of each file is a sample. Without it a
    /// synthetic corpus is used.
    #[arg(long)]
    manifest: Option<PathBuf>,
    #[arg(long, default_value_t = 100)]
    per_class: usize,
    #[arg(long, default_value_t = 22050.0)]
    sample_rate: f64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

fn load_config(args: &RunArgs) -> Result<PipelineConfig> {
    let mut cfg = match &args.config {
        Some(p) => PipelineConfig::load(p)?,
        None => PipelineConfig::default(),
    };
    if let Some(f) = args.force_pipeline {
        cfg.force_pipeline = match f {
            Forced::Auto => ForcePipeline::Auto,
            Forced::Rsa => ForcePipeline::Rsa,
            Forced::LrcLow => ForcePipeline::LrcLow,
            Forced::LrcHigh => ForcePipeline::LrcHigh,
        };
    }
    if let Some(v) = args.window_sec {
        cfg.window_s = v;
    }
    if let Some(v) = args.overlap_sec {
        cfg.overlap_s = v;
    }
    if let Some(v) = args.workers {
        cfg.workers = v;
    }
    for kv in &args.set {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("--set expects KEY=VALUE, got '{kv}'")))?;
        cfg.set(k.trim(), v)?;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Error::Io {
            path: path.to_path_buf(),
            source: e,
        })
}

fn estimate(run: &RunArgs, output: Option<&Path>, format: Format) -> Result<()> {
    let engine = Engine::new(load_config(run)?)?;
    let estimates = engine.estimate_channels(&read_wav(&run.input)?)?;
    let format = match format {
        Format::Csv => OutputFormat::Csv,
        Format::Jsonl => OutputFormat::Jsonl,
    };
    match output {
        Some(p) => emit_results(&estimates, format, create(p)?),
        None => emit_results(&estimates, format, io::stdout().lock()),
    }
}

fn plot_data(run: &RunArgs, dir: &Path) -> Result<()> {
    let engine = Engine::new(load_config(run)?)?;
    let channels = read_wav(&run.input)?;
    std::fs::create_dir_all(dir).map_err(|e| Error::Io {
        path: dir.to_path_buf(),
        source: e,
    })?;
    for (i, ((start, _), trace)) in engine.trace_channels(&channels)?.iter().enumerate() {
        write_plot_data(dir, i, *start, trace)?;
    }
    let estimates = engine.estimate_channels(&channels)?;
    emit_results(&estimates, OutputFormat::Csv, create(&dir.join("results.csv"))?)
}

fn synth(a: &SynthArgs) -> Result<()> {
    let out = match a.scenario {
        Scenario::Sedentary => {
            let mut sc = SedentaryScenario::new(a.hr, a.rr, a.rsa_depth_ms / 1000.0, a.seed);
            sc.duration_s = a.duration;
            sc.sample_rate = a.sample_rate;
            if a.snr.is_some() {
                sc.noise_snr_db = a.snr;
            }
            synth_sedentary(&sc)?
        }
        Scenario::Walking | Scenario::Running => {
            let mut sc = ActiveScenario::new(a.stride, a.lrc, a.seed);
            sc.duration_s = a.duration;
            sc.sample_rate = a.sample_rate;
            if a.snr.is_some() {
                sc.noise_snr_db = a.snr;
            }
            if matches!(a.scenario, Scenario::Running) {
                sc.breath_band = BREATH_BAND_HIGH;
            }
            synth_active(&sc)?
        }
    };
    write_wav_stereo(&a.output, &out.left.signal, &out.right.signal)?;
    let mut truth = a.output.clone().into_os_string();
    truth.push(".truth.txt");
    write_ground_truth(Path::new(&truth), &out.truth)
}

fn manifest_corpus(path: &Path) -> Result<Vec<(inear_rr::selector::SegmentFeatures, ActivityClass)>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    let base = path.parent().unwrap_or(Path::new("."));
    let mut corpus = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (wav, cls) = line
            .rsplit_once(char::is_whitespace)
            .ok_or_else(|| Error::Config(format!("manifest line {}: expected 'path class'", n + 1)))?;
        let cls: ActivityClass = cls
            .trim()
            .parse()
            .map_err(|e| Error::Config(format!("manifest line {}: {e}", n + 1)))?;
        let ch = read_wav(&base.join(wav.trim()))?;
        let mono = mixdown(ch.first(), ch.get(1))?;
        let seg = (SEGMENT_S * mono.sample_rate()).round() as usize;
        for k in 0..mono.len() / seg {
            corpus.push((mfcc_features(&mono.slice(k * seg, (k + 1) * seg))?, cls));
        }
    }
    Ok(corpus)
}

fn train(a: &TrainArgs) -> Result<()> {
    let corpus = match &a.manifest {
        Some(m) => manifest_corpus(m)?,
        None => synthetic_corpus(a.per_class, a.sample_rate, a.seed)?,
    };
    let model = train_selector(&corpus, &SvmParams::default())?;
    model.save(&a.output)?;
    log::info!("trained on {} segments", corpus.len());
    Ok(())
}

fn build_template(input: &Path, band: Band, output: &Path) -> Result<()> {
    let ch = read_wav(input)?;
    let mono = mixdown(ch.first(), ch.get(1))?;
    let band = match band {
        Band::Low => BAND_LOW,
        Band::High => BAND_HIGH,
    };
    build_breathing_template(&mono, band)?.save(output)
}

fn dispatch(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Estimate { run, output, format } => estimate(&run, output.as_deref(), format),
        Command::Synth(a) => synth(&a),
        Command::TrainSelector(a) => train(&a),
        Command::BuildTemplate { input, band, output } => build_template(&input, band, &output),
        Command::PlotData { run, output } => plot_data(&run, &output),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => {
            let _ = io::stdout().flush();
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
