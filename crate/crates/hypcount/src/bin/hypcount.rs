use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use hypcount::field::FieldSpec;
use hypcount::geom::{MultiPoint, Point};
use hypcount::lab::{
    csv_string, fit_error_exponent, parse_config, run_count_experiment, transform_suite,
    write_csv, ExperimentConfig, ExperimentKind,
};
use hypcount::orbit::{enumerate_box_orbit, naive_oracle};
use hypcount::{Error, Result};

#[derive(Parser)]
#[command(name = "hypcount", version, about = "Exact orbit counting on products of hyperbolic planes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct ConfigArgs {
    /// Config file (key = value lines).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Set or override a config key, e.g. --set grid.max=8. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Run a counting sweep and emit CSV.
    Count {
        #[command(flatten)]
        cfg: ConfigArgs,
    },
    /// Run a strip counting sweep (the config must declare a strip region).
    Strip {
        #[command(flatten)]
        cfg: ConfigArgs,
    },
    /// Numerical property battery for the Selberg transform machinery.
    TransformSuite,
    /// Counting sweep plus an error-exponent fit.
    Experiment {
        #[command(flatten)]
        cfg: ConfigArgs,
    },
    /// Compare the enumeration engine against a brute-force matrix scan.
    OracleCheck,
}

fn load_config(args: &ConfigArgs) -> Result<ExperimentConfig> {
    let mut text = match &args.config {
        Some(path) => std::fs::read_to_string(path)?,
        None => String::new(),
    };
    // --set lines append after the file, so they win for scalar keys
    for kv in &args.set {
        text.push('\n');
        text.push_str(kv);
    }
    parse_config(&text)
}

fn emit(cfg: &ExperimentConfig, reports: &[hypcount::lab::CountReport]) -> Result<()> {
    match &cfg.out_path {
        Some(p) => {
            write_csv(reports, Path::new(p))?;
            eprintln!("wrote {} rows to {p}", reports.len());
        }
        None => print!("{}", csv_string(reports)),
    }
    Ok(())
}

fn cmd_count(args: &ConfigArgs, require_strip: bool) -> Result<()> {
    let cfg = load_config(args)?;
    if require_strip && !matches!(cfg.kind, ExperimentKind::Strip { .. }) {
        return Err(Error::Parse {
            line: 0,
            msg: "strip subcommand needs experiment.kind = strip".into(),
        });
    }
    let reports = run_count_experiment(&cfg)?;
    emit(&cfg, &reports)
}

fn cmd_experiment(args: &ConfigArgs) -> Result<()> {
    let cfg = load_config(args)?;
    let reports = run_count_experiment(&cfg)?;
    emit(&cfg, &reports)?;
    match fit_error_exponent(&reports) {
        Ok(fit) => {
            eprintln!(
                "error exponent fit: slope = {:.4}, intercept = {:.4}, r2 = {:.4}, sign changes: {}",
                fit.slope, fit.intercept, fit.r2, fit.sign_changes
            );
        }
        Err(Error::DegenerateFit) => eprintln!("error exponent fit: degenerate (no nonzero excess)"),
        Err(e) => return Err(e),
    }
    Ok(())
}

fn cmd_transform_suite() -> Result<()> {
    let checks = transform_suite()?;
    let mut failed = 0usize;
    for c in &checks {
        let tag = if c.passed { "pass" } else { "FAIL" };
        println!("[{tag}] {} ({})", c.name, c.detail);
        if !c.passed {
            failed += 1;
        }
    }
    if failed > 0 {
        return Err(Error::QuadratureFail(0.0, failed as f64));
    }
    Ok(())
}

fn cmd_oracle_check() -> Result<()> {
    struct Case {
        name: &'static str,
        m: Option<i64>,
        z: Vec<(f64, f64)>,
        v: Vec<f64>,
        entry_bound: i64,
    }
    // base points z = (i, ..., i): there 4 u_j + 2 is the trace form of the
    // j-th embedding, so V implies the entry bound sqrt(4 max V + 2) and the
    // scan is provably complete
    let cases = vec![
        Case { name: "modular, z = i, V = 2", m: None, z: vec![(0.0, 1.0)], v: vec![2.0], entry_bound: 4 },
        Case { name: "modular, z = i, V = 5", m: None, z: vec![(0.0, 1.0)], v: vec![5.0], entry_bound: 5 },
        Case {
            name: "hilbert m = 5, z = (i, i), V = (1.501, 1.501)",
            m: Some(5),
            z: vec![(0.0, 1.0), (0.0, 1.0)],
            v: vec![1.501, 1.501],
            entry_bound: 4,
        },
        Case {
            name: "hilbert m = 2, z = (i, i), V = (1, 1)",
            m: Some(2),
            z: vec![(0.0, 1.0), (0.0, 1.0)],
            v: vec![1.0, 1.0],
            entry_bound: 3,
        },
        Case {
            name: "hilbert m = 3, z = (i, i), V = (1, 1)",
            m: Some(3),
            z: vec![(0.0, 1.0), (0.0, 1.0)],
            v: vec![1.0, 1.0],
            entry_bound: 3,
        },
    ];
    for case in cases {
        let spec = match case.m {
            None => FieldSpec::rationals(),
            Some(m) => FieldSpec::real_quadratic(m)?,
        };
        let z = MultiPoint::new(case.z.iter().map(|&(x, y)| Point::new(x, y)).collect());
        let fast = enumerate_box_orbit(&z, &case.v, &spec)?;
        let slow = naive_oracle(&z, &case.v, case.entry_bound, &spec)?;
        let ok = fast.len() == slow.len();
        println!(
            "[{}] {}: engine {} vs oracle {}",
            if ok { "pass" } else { "FAIL" },
            case.name,
            fast.len(),
            slow.len()
        );
        if !ok {
            return Err(Error::CostGuard(0));
        }
    }
    Ok(())
}

fn exit_code_for(err: &Error) -> ExitCode {
    match err {
        Error::Parse { .. }
        | Error::InvalidStrip
        | Error::InvalidBump
        | Error::InvalidTau(_)
        | Error::EmptyGrid
        | Error::UnsupportedField(_)
        | Error::Io(_) => ExitCode::from(2),
        _ => ExitCode::from(3),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Count { cfg } => cmd_count(cfg, false),
        Command::Strip { cfg } => cmd_count(cfg, true),
        Command::TransformSuite => cmd_transform_suite(),
        Command::Experiment { cfg } => cmd_experiment(cfg),
        Command::OracleCheck => cmd_oracle_check(),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code_for(&e)
        }
    }
}
