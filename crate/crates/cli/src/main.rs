//! Command-line driver. Machine-readable output (CSV/JSON) goes to stdout
//! or to `--out` files; human summaries go to stderr. Exit codes: 0 on
//! success, 1 when a property probe or bench run fails, 2 on usage errors.

mod config;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use lossbench::harness::{bench_losses, format_summary, train, write_bench_csv, write_run_csv};
use lossbench::losses::{
    catalogue, compare_strictness, export_loss_curve, probe_properties, write_curve_csv,
    StrictnessRegion,
};
use lossbench::{LossFamily, LossSpec, Variant};

use config::ExperimentConfig;

#[derive(Parser)]
#[command(name = "lossbench", version, about = "Alternate classification losses: evaluate, verify, compare, train, bench")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate a loss and its gradient at one point
    Eval(EvalArgs),
    /// Probe the loss axioms on a grid
    Verify(VerifyArgs),
    /// Compare two losses by gradient dominance
    Compare(CompareArgs),
    /// Export a loss curve as CSV
    Curve(CurveArgs),
    /// Train one network from a JSON config
    Train(TrainArgs),
    /// Run a loss-comparison bench from a JSON config
    Bench(BenchArgs),
}

#[derive(Args)]
struct LossArgs {
    /// Loss family (cross_entropy, m, l, tan, sec, param_m, param_l, two_param_l, param_log)
    #[arg(long)]
    loss: String,
    /// "full" or "single"
    #[arg(long, default_value = "full")]
    variant: String,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long, default_value_t = 1e-7)]
    eps_clamp: f64,
}

impl LossArgs {
    fn build(&self) -> Result<LossSpec, String> {
        build_spec(
            &self.loss,
            &self.variant,
            self.alpha,
            self.beta,
            self.eps_clamp,
        )
    }
}

fn build_spec(
    loss: &str,
    variant: &str,
    alpha: Option<f64>,
    beta: Option<f64>,
    eps_clamp: f64,
) -> Result<LossSpec, String> {
    let family =
        LossFamily::parse(loss).ok_or_else(|| format!("unknown loss family '{loss}'"))?;
    let variant = match variant.to_ascii_lowercase().as_str() {
        "full" => Variant::Full,
        "single" | "single_sided" => Variant::SingleSided,
        other => return Err(format!("unknown variant '{other}' (expected full or single)")),
    };
    // family defaults fill in whatever the flags left unset
    let defaults = match family {
        LossFamily::ParamM | LossFamily::ParamL | LossFamily::TwoParamL => {
            (Some(2.0), Some(0.5))
        }
        LossFamily::ParamLog => (Some(std::f64::consts::E), None),
        _ => (None, None),
    };
    let alpha = alpha.or(if family.has_alpha() { defaults.0 } else { None });
    let beta = beta.or(if family.has_beta() { defaults.1 } else { None });
    LossSpec::custom(family, variant, alpha, beta, eps_clamp).map_err(|e| e.to_string())
}

#[derive(Args)]
struct EvalArgs {
    #[command(flatten)]
    loss: LossArgs,
    /// Target, exactly 0 or 1
    #[arg(long)]
    y: f64,
    /// Predicted probability
    #[arg(long)]
    yhat: f64,
}

#[derive(Args)]
struct VerifyArgs {
    #[command(flatten)]
    loss: OptionalLossArgs,
    /// Probe every catalogue loss
    #[arg(long, conflicts_with = "loss")]
    all: bool,
    #[arg(long, default_value_t = 1024)]
    grid: usize,
}

// Like LossArgs but --loss is optional so --all can stand alone.
#[derive(Args)]
struct OptionalLossArgs {
    #[arg(long)]
    loss: Option<String>,
    #[arg(long, default_value = "full")]
    variant: String,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long, default_value_t = 1e-7)]
    eps_clamp: f64,
}

#[derive(Args)]
struct CompareArgs {
    #[arg(long)]
    loss1: String,
    #[arg(long, default_value = "full")]
    variant1: String,
    #[arg(long)]
    alpha1: Option<f64>,
    #[arg(long)]
    beta1: Option<f64>,
    #[arg(long)]
    loss2: String,
    #[arg(long, default_value = "full")]
    variant2: String,
    #[arg(long)]
    alpha2: Option<f64>,
    #[arg(long)]
    beta2: Option<f64>,
    #[arg(long, default_value_t = 1e-7)]
    eps_clamp: f64,
    #[arg(long, default_value_t = 1e-7)]
    lo: f64,
    #[arg(long, default_value_t = 0.99)]
    hi: f64,
    #[arg(long, default_value_t = 512)]
    points: usize,
    /// Restrict the grid to y = 1 instead of both targets
    #[arg(long)]
    target_one: bool,
}

#[derive(Args)]
struct CurveArgs {
    #[command(flatten)]
    loss: LossArgs,
    #[arg(long, default_value_t = 1.0)]
    y: f64,
    #[arg(long, default_value_t = 256)]
    points: usize,
    /// Output CSV path; stdout when omitted
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct TrainArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    lr: Option<f64>,
    #[arg(long)]
    batch_size: Option<usize>,
    /// Per-epoch CSV path; stdout when omitted
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long)]
    config: PathBuf,
    /// Override the config's seed list
    #[arg(long, value_delimiter = ',')]
    seeds: Option<Vec<u64>>,
    /// Per-epoch CSV path; stdout when omitted
    #[arg(long)]
    out: Option<PathBuf>,
}

const OK: u8 = 0;
const FAILED: u8 = 1;
const USAGE: u8 = 2;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Eval(args) => cmd_eval(args),
        Command::Verify(args) => cmd_verify(args),
        Command::Compare(args) => cmd_compare(args),
        Command::Curve(args) => cmd_curve(args),
        Command::Train(args) => cmd_train(args),
        Command::Bench(args) => cmd_bench(args),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(message) => {
            eprintln!("error: {message}");
            ExitCode::from(USAGE)
        }
    }
}

fn cmd_eval(args: EvalArgs) -> Result<u8, String> {
    let spec = args.loss.build()?;
    let loss = spec.eval(args.y, args.yhat).map_err(|e| e.to_string())?;
    let grad = spec.grad(args.y, args.yhat).map_err(|e| e.to_string())?;
    println!("loss {loss}");
    println!("grad {grad}");
    Ok(OK)
}

fn cmd_verify(args: VerifyArgs) -> Result<u8, String> {
    let specs: Vec<LossSpec> = if args.all {
        catalogue()
    } else {
        let name = args
            .loss
            .loss
            .as_deref()
            .ok_or("verify needs --loss or --all")?;
        vec![build_spec(
            name,
            &args.loss.variant,
            args.loss.alpha,
            args.loss.beta,
            args.loss.eps_clamp,
        )?]
    };
    let mut reports = Vec::new();
    let mut all_passed = true;
    for spec in &specs {
        let report = probe_properties(spec, args.grid).map_err(|e| e.to_string())?;
        for check in &report.checks {
            let status = if check.passed { "pass" } else { "FAIL" };
            eprintln!("{} {}: {status}", report.loss_name, check.name);
            for w in &check.witnesses {
                eprintln!("  at y={} y_hat={}: {}", w.y, w.y_hat, w.detail);
            }
        }
        all_passed &= report.all_passed();
        reports.push(report);
    }
    println!(
        "{}",
        serde_json::to_string_pretty(&reports).map_err(|e| e.to_string())?
    );
    Ok(if all_passed { OK } else { FAILED })
}

fn cmd_compare(args: CompareArgs) -> Result<u8, String> {
    let l1 = build_spec(&args.loss1, &args.variant1, args.alpha1, args.beta1, args.eps_clamp)?;
    let l2 = build_spec(&args.loss2, &args.variant2, args.alpha2, args.beta2, args.eps_clamp)?;
    let region = if args.target_one {
        StrictnessRegion::target_one(args.lo, args.hi, args.points)
    } else {
        StrictnessRegion::both_targets(args.lo, args.hi, args.points)
    };
    let report = compare_strictness(&l1, &l2, &region).map_err(|e| e.to_string())?;
    eprintln!(
        "{} vs {}: literal {}, magnitude {}",
        report.l1_name, report.l2_name, report.literal.verdict, report.magnitude.verdict
    );
    println!(
        "{}",
        serde_json::to_string_pretty(&report).map_err(|e| e.to_string())?
    );
    Ok(OK)
}

fn cmd_curve(args: CurveArgs) -> Result<u8, String> {
    let spec = args.loss.build()?;
    let rows = export_loss_curve(&spec, args.y, args.points).map_err(|e| e.to_string())?;
    write_out(args.out.as_deref(), |w| write_curve_csv(&rows, w))?;
    Ok(OK)
}

fn cmd_train(args: TrainArgs) -> Result<u8, String> {
    let mut cfg = ExperimentConfig::load(&args.config)?;
    if let Some(seed) = args.seed {
        cfg.train.seed = seed;
    }
    if let Some(epochs) = args.epochs {
        cfg.train.epochs = epochs;
    }
    if let Some(lr) = args.lr {
        cfg.train.optimizer.learning_rate = lr;
    }
    if let Some(batch_size) = args.batch_size {
        cfg.train.batch_size = batch_size;
    }
    let (train_ds, test_ds) = cfg.materialize()?;
    let record = train(&cfg.train, &train_ds, &test_ds).map_err(|e| e.to_string())?;
    let run_id = format!("{}-s{}", cfg.train.loss.name(), cfg.train.seed);
    write_out(args.out.as_deref(), |w| write_run_csv(&record, &run_id, w))?;
    eprintln!(
        "{run_id}: train_acc {:.4} test_acc {:.4} ({:.1}s)",
        record.final_train_acc, record.final_test_acc, record.wall_time_secs
    );
    if let Some(epoch) = record.diverged_at {
        eprintln!("{run_id}: diverged at epoch {epoch}");
        return Ok(FAILED);
    }
    Ok(OK)
}

fn cmd_bench(args: BenchArgs) -> Result<u8, String> {
    let mut cfg = ExperimentConfig::load(&args.config)?;
    if let Some(seeds) = args.seeds {
        cfg.seeds = seeds;
    }
    if cfg.losses.is_empty() {
        return Err("bench config needs a non-empty \"losses\" list".into());
    }
    if cfg.seeds.is_empty() {
        return Err("bench config needs a non-empty \"seeds\" list".into());
    }
    let (train_ds, test_ds) = cfg.materialize()?;
    let table = bench_losses(&cfg.losses, &cfg.train, &train_ds, &test_ds, &cfg.seeds)
        .map_err(|e| e.to_string())?;
    write_out(args.out.as_deref(), |w| write_bench_csv(&table, w))?;
    eprint!("{}", format_summary(&table));
    let diverged = table
        .cells
        .iter()
        .filter(|c| c.record.diverged())
        .count();
    if diverged > 0 {
        eprintln!("{diverged} cell(s) diverged");
        return Ok(FAILED);
    }
    Ok(OK)
}

fn write_out(
    path: Option<&std::path::Path>,
    f: impl FnOnce(&mut dyn Write) -> std::io::Result<()>,
) -> Result<(), String> {
    match path {
        Some(path) => {
            let mut file = std::fs::File::create(path)
                .map_err(|e| format!("cannot write {}: {e}", path.display()))?;
            f(&mut file).map_err(|e| e.to_string())
        }
        None => f(&mut std::io::stdout().lock()).map_err(|e| e.to_string()),
    }
}
