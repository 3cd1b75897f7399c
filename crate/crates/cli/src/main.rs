use std::path::PathBuf;
use std::process::ExitCode;

use bv_sharp_cli::{csv_columns, run, CliError, RawConfig, Task};
use clap::Parser;

fn columns_help() -> String {
    let mut s = String::from("detail.csv columns by task:\n");
    for task in Task::ALL {
        s.push_str(&format!("  {:<20}{}\n", task.name(), csv_columns(task).join(",")));
    }
    s.push_str(
        "\nConfig files hold `key = value` lines with `#` comments. Any key may also be\n\
         given as `--key value` after the task; flags win over the file.\n\
         Set BV_SHARP_THREADS to cap the worker threads.",
    );
    s
}

#[derive(Parser)]
#[command(name = "bv-sharp", version, about = "Sharp BV Poincaré–Sobolev constants: certificates, sweeps, audits and a grid solver", after_long_help = columns_help())]
struct Args {
    /// constants | domain-certificate | domain-sweep | solve | surface-classify | sphere-certificate | expansion-audit
    task: String,
    /// Config file with `key = value` lines.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Overrides as `--key value` pairs, e.g. `--q 0.5,1 --out results`.
    #[arg(trailing_var_arg = true, allow_hyphen_values = true, value_name = "--KEY VALUE")]
    overrides: Vec<String>,
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(v) = std::env::var("BV_SHARP_THREADS") else { return Ok(()) };
    let n: usize = v
        .parse()
        .ok()
        .filter(|n| *n >= 1)
        .ok_or_else(|| CliError::field("BV_SHARP_THREADS", format!("expected a positive integer, got `{v}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::field("BV_SHARP_THREADS", e.to_string()))
}

fn load(args: &Args) -> Result<RawConfig, CliError> {
    let mut raw = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
            RawConfig::parse(&text)?
        }
        None => RawConfig::default(),
    };
    let mut it = args.overrides.iter();
    while let Some(flag) = it.next() {
        let key = flag
            .strip_prefix("--")
            .ok_or_else(|| CliError::field("arguments", format!("expected `--key`, got `{flag}`")))?;
        let value = it
            .next()
            .ok_or_else(|| CliError::field("arguments", format!("missing value for `--{key}`")))?;
        raw.set(key, value)?;
    }
    raw.set("task", &args.task)?;
    Ok(raw)
}

fn main() -> ExitCode {
    let args = Args::parse();
    let config = match configure_threads().and_then(|_| load(&args)).and_then(|raw| raw.resolve()) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("bv-sharp: {e}");
            return ExitCode::from(2);
        }
    };
    match run(&config) {
        Ok(_) => {
            println!("{}", config.out.join("summary.json").display());
            println!("{}", config.out.join("detail.csv").display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("bv-sharp: {e}");
            ExitCode::from(1)
        }
    }
}
