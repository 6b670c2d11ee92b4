use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use mrfisi::harness::{
    append_csv, detect_image, load_pbm, run_ber_sweep, run_bsc_awgn, save_pbm, write_csv, write_pbm, BerRecord,
    Mode, PbmFormat, Scenario,
};
use mrfisi::mrf::{generate_mrf, neighbor_agreement, IsingParams};
use mrfisi::rng::{stream_rng, Stream};
use mrfisi::Error;

#[derive(Parser)]
#[command(name = "mrfisi", version, about = "Iterative MRF/ISI detection experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Monte-Carlo BER sweep over an SNR grid.
    Sweep(RunArgs),
    /// BSC + AWGN restoration experiment (mode mrf-bsc-awgn).
    Bsc(RunArgs),
    /// Write a sample MRF image as PBM.
    Generate(GenerateArgs),
    /// Transmit and detect a single PBM image.
    Detect(DetectArgs),
}

/// Scenario fields settable from the command line; each overrides the config file.
#[derive(Args, Default)]
struct ScenarioArgs {
    /// key = value scenario file, applied before the other flags.
    #[arg(long)]
    config: Option<PathBuf>,
    /// concatenated, isi-only, gg-alone or mrf-bsc-awgn.
    #[arg(long)]
    mode: Option<String>,
    /// mrf, iid or pbm:PATH.
    #[arg(long)]
    source: Option<String>,
    /// Square image size.
    #[arg(long)]
    size: Option<usize>,
    #[arg(long)]
    height: Option<usize>,
    #[arg(long)]
    width: Option<usize>,
    /// MRF coupling of source and receiver.
    #[arg(long, allow_hyphen_values = true)]
    beta: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    beta_true: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    beta_assumed: Option<f64>,
    /// Probability of a 0 pixel at source and receiver.
    #[arg(long)]
    p0: Option<f64>,
    #[arg(long)]
    p0_assumed: Option<f64>,
    /// Pixel priors of the ISI detector.
    #[arg(long)]
    isi_p0: Option<f64>,
    /// SNR grid in dB: a,b,c or start:stop:step.
    #[arg(long, allow_hyphen_values = true)]
    snr: Option<String>,
    #[arg(long)]
    trials: Option<usize>,
    /// Stop a point after this many bit errors (0 disables).
    #[arg(long)]
    min_errors: Option<u64>,
    #[arg(long)]
    bsc_p: Option<f64>,
    /// Outer (ISI <-> MRF) iterations.
    #[arg(long)]
    outer: Option<usize>,
    /// Row+column ISI iterations per outer iteration.
    #[arg(long)]
    inner: Option<usize>,
    /// Row/column LLR exchange weight.
    #[arg(long)]
    weight: Option<f64>,
    /// Blur coefficients h00,h01,h10,h11.
    #[arg(long)]
    mask: Option<String>,
    /// Annealing constant.
    #[arg(long)]
    c: Option<f64>,
    /// Annealing sweeps.
    #[arg(long)]
    t_max: Option<usize>,
    /// Soft-output temperature.
    #[arg(long)]
    t_out: Option<f64>,
    /// Exchange sweeps per generated source image.
    #[arg(long)]
    sweeps: Option<usize>,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long)]
    workers: Option<usize>,
    /// Write zero in the seconds column.
    #[arg(long)]
    no_timing: bool,
}

impl ScenarioArgs {
    fn assignments(&self) -> Vec<(&'static str, String)> {
        fn push<T: ToString>(out: &mut Vec<(&'static str, String)>, key: &'static str, v: &Option<T>) {
            if let Some(v) = v {
                out.push((key, v.to_string()));
            }
        }
        let mut out = Vec::new();
        push(&mut out, "mode", &self.mode);
        push(&mut out, "source", &self.source);
        push(&mut out, "size", &self.size);
        push(&mut out, "height", &self.height);
        push(&mut out, "width", &self.width);
        push(&mut out, "beta", &self.beta);
        push(&mut out, "beta_true", &self.beta_true);
        push(&mut out, "beta_assumed", &self.beta_assumed);
        push(&mut out, "p0", &self.p0);
        push(&mut out, "p0_assumed", &self.p0_assumed);
        push(&mut out, "isi_p0", &self.isi_p0);
        push(&mut out, "snr", &self.snr);
        push(&mut out, "trials", &self.trials);
        push(&mut out, "min_errors", &self.min_errors);
        push(&mut out, "bsc_p", &self.bsc_p);
        push(&mut out, "outer", &self.outer);
        push(&mut out, "inner", &self.inner);
        push(&mut out, "weight", &self.weight);
        push(&mut out, "mask", &self.mask);
        push(&mut out, "c", &self.c);
        push(&mut out, "t_max", &self.t_max);
        push(&mut out, "t_out", &self.t_out);
        push(&mut out, "sweeps", &self.sweeps);
        push(&mut out, "workers", &self.workers);
        out.push(("seed", self.seed.to_string()));
        if self.no_timing {
            out.push(("timing", "false".into()));
        }
        out
    }

    fn scenario(&self, base: Scenario) -> Result<Scenario, Failure> {
        let mut s = base;
        if let Some(path) = &self.config {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Failure::Data(format!("{}: {e}", path.display())))?;
            s.apply_config(&text)
                .map_err(|e| Failure::Data(format!("{}: {e}", path.display())))?;
        }
        for (k, v) in self.assignments() {
            s.set(k, &v).map_err(|e| Failure::Usage(format!("--{}: {e}", k.replace('_', "-"))))?;
        }
        s.validate().map_err(|e| Failure::Usage(e.to_string()))?;
        Ok(s)
    }
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    scenario: ScenarioArgs,
    /// Append CSV rows here instead of printing them.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long, default_value_t = 64)]
    size: usize,
    #[arg(long)]
    height: Option<usize>,
    #[arg(long)]
    width: Option<usize>,
    #[arg(long, default_value_t = -3.0, allow_hyphen_values = true)]
    beta: f64,
    #[arg(long, default_value_t = 0.5)]
    p0: f64,
    #[arg(long, default_value_t = 200)]
    sweeps: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Write ASCII P1 instead of raw P4.
    #[arg(long)]
    plain: bool,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct DetectArgs {
    #[command(flatten)]
    scenario: ScenarioArgs,
    /// Image to transmit.
    #[arg(long)]
    input: PathBuf,
    /// Where to write the detected image.
    #[arg(long)]
    out: Option<PathBuf>,
}

enum Failure {
    Usage(String),
    Data(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Data(e.to_string())
    }
}

fn emit(records: &[BerRecord], out: Option<&PathBuf>, timing: bool) -> Result<(), Failure> {
    match out {
        Some(path) => append_csv(path, records, timing)
            .map_err(|e| Failure::Data(format!("{}: {e}", path.display()))),
        None => Ok(write_csv(records, true, timing, std::io::stdout().lock())?),
    }
}

fn generate(args: &GenerateArgs) -> Result<(), Failure> {
    let height = args.height.unwrap_or(args.size);
    let width = args.width.unwrap_or(args.size);
    let params = IsingParams::from_priors(args.p0, args.beta).map_err(|e| Failure::Usage(e.to_string()))?;
    let mut rng = stream_rng(args.seed, Stream::Source, &[0]);
    let image =
        generate_mrf(height, width, &params, args.sweeps, &mut rng).map_err(|e| Failure::Usage(e.to_string()))?;
    let fmt = if args.plain { PbmFormat::Plain } else { PbmFormat::Raw };
    let file = std::fs::File::create(&args.out).map_err(|e| Failure::Data(format!("{}: {e}", args.out.display())))?;
    write_pbm(&image, fmt, std::io::BufWriter::new(file))?;
    eprintln!(
        "wrote {}x{} image: {} ones, neighbour agreement {:.4}",
        height,
        width,
        image.count_ones(),
        neighbor_agreement(&image)
    );
    Ok(())
}

fn detect(args: &DetectArgs) -> Result<(), Failure> {
    let base = Scenario {
        mode: Mode::Concatenated,
        ..Scenario::default()
    };
    let s = args.scenario.scenario(base)?;
    let image = load_pbm(&args.input).map_err(|e| Failure::Data(format!("{}: {e}", args.input.display())))?;
    let bits = image.len();
    println!("snr_db,iter,errors,ber");
    let mut last = None;
    for &snr in &s.snr_db {
        let r = detect_image(&s, &image, snr)?;
        for (i, e) in r.per_iteration_errors.iter().enumerate() {
            println!("{snr},{},{e},{:e}", i + 1, *e as f64 / bits as f64);
        }
        last = Some(r.estimate);
    }
    if let (Some(path), Some(est)) = (&args.out, last) {
        save_pbm(&est, path).map_err(|e| Failure::Data(format!("{}: {e}", path.display())))?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Sweep(args) => {
            let s = args.scenario.scenario(Scenario::default())?;
            let records = run_ber_sweep(&s)?;
            emit(&records, args.out.as_ref(), s.timing)
        }
        Command::Bsc(args) => {
            let base = Scenario {
                mode: Mode::MrfBscAwgn,
                bsc_p: 0.05,
                snr_db: vec![0.0, 4.0, 8.0, 12.0],
                ..Scenario::default()
            };
            let s = args.scenario.scenario(base)?;
            let records = run_bsc_awgn(&s)?;
            emit(&records, args.out.as_ref(), s.timing)
        }
        Command::Generate(args) => generate(&args),
        Command::Detect(args) => detect(&args),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Data(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
