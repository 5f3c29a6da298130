use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde_json::{json, Value};

use dsfrob_core::dressing::{DEFAULT_ATTEMPTS, DEFAULT_WINDOW};
use dsfrob_core::exact::quadratic::Sign;
use dsfrob_core::frobenius::{self, Level, PipelineOptions};
use dsfrob_core::grading::{validate_class, ValidationReport};
use dsfrob_core::registry::{ConjugacyClassRecord, Registry, REGISTRY_ENV};
use dsfrob_core::rgroup::{self, RGroupError, RGroupOptions, DEFAULT_MAX_ELEMENTS};

const EXIT_FAIL: u8 = 1;
const EXIT_USAGE: u8 = 2;

#[derive(Parser)]
#[command(name = "dsfrob", version, about = "Frobenius manifolds from regular primitive Weyl group classes")]
struct Cli {
    /// registry file; falls back to the built-in table
    #[arg(long, global = true, env = REGISTRY_ENV)]
    registry: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// worker threads for multi-class runs
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum BranchArg {
    Plus,
    Minus,
}

#[derive(Clone, Copy, ValueEnum)]
enum LevelArg {
    Fast,
    Full,
}

#[derive(Subcommand)]
enum Command {
    /// Table of registry classes
    List,
    /// Consistency checks of registry rows; all classes when none are named
    Validate { classes: Vec<String> },
    /// Run the Frobenius pipeline
    Frobenius {
        #[arg(required = true)]
        classes: Vec<String>,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Generators and relations of the R-group
    Rgroup {
        #[arg(required = true)]
        classes: Vec<String>,
        #[command(flatten)]
        run: RunArgs,
        /// attempt classes outside the simply-laced and Coxeter cases
        #[arg(long)]
        experimental: bool,
        #[arg(long, default_value_t = DEFAULT_MAX_ELEMENTS)]
        max_elements: usize,
    },
}

#[derive(Args)]
struct RunArgs {
    /// seed for the Λ search; without it the worked Λ is used where one exists
    #[arg(long)]
    seed: Option<u64>,
    /// loop-power window as LO,HI
    #[arg(long, value_parser = parse_window, allow_hyphen_values = true)]
    window: Option<(i64, i64)>,
    #[arg(long, value_enum, default_value_t = BranchArg::Plus)]
    branch: BranchArg,
    #[arg(long, value_enum, default_value_t = LevelArg::Full)]
    level: LevelArg,
    #[arg(long, default_value_t = DEFAULT_ATTEMPTS)]
    attempts: usize,
}

fn parse_window(s: &str) -> Result<(i64, i64), String> {
    let (a, b) = s.split_once(',').ok_or("expected LO,HI")?;
    let lo: i64 = a.trim().parse().map_err(|e| format!("{e}"))?;
    let hi: i64 = b.trim().parse().map_err(|e| format!("{e}"))?;
    if lo > 0 || hi < 1 {
        return Err("window must contain powers 0 and 1".into());
    }
    Ok((lo, hi))
}

impl RunArgs {
    fn options(&self) -> PipelineOptions {
        PipelineOptions {
            seed: self.seed,
            window: self.window.unwrap_or(DEFAULT_WINDOW),
            branch: match self.branch {
                BranchArg::Plus => Sign::Plus,
                BranchArg::Minus => Sign::Minus,
            },
            level: match self.level {
                LevelArg::Fast => Level::Fast,
                LevelArg::Full => Level::Full,
            },
            attempts: self.attempts,
        }
    }
}

/// Outcome of one class: rendered output and whether it verified.
struct Outcome {
    text: String,
    json: Value,
    status: u8,
}

impl Outcome {
    fn error(class: &str, stage: &str, msg: String, status: u8) -> Self {
        Outcome {
            text: format!("{class}: {stage} failed: {msg}\n"),
            json: json!({"class": class, "stage": stage, "error": msg, "passed": false}),
            status,
        }
    }
}

fn resolve<'a>(reg: &'a Registry, labels: &[String]) -> Result<Vec<&'a ConjugacyClassRecord>, String> {
    labels
        .iter()
        .map(|l| reg.find(l).ok_or_else(|| format!("unknown class {l}")))
        .collect()
}

fn validation_text(r: &ValidationReport) -> String {
    let mut s = format!("{} {}\n", r.class, if r.passed() { "PASS" } else { "FAIL" });
    for c in &r.checks {
        s += &format!("  {:<4} {:<10} {}\n", if c.passed { "ok" } else { "FAIL" }, c.name, c.detail);
    }
    s
}

fn validation_json(r: &ValidationReport) -> Value {
    json!({
        "version": 1,
        "class": r.class,
        "passed": r.passed(),
        "checks": r.checks.iter().map(|c| json!({"name": c.name, "passed": c.passed, "detail": c.detail})).collect::<Vec<_>>(),
    })
}

fn list(reg: &Registry, format: Format) -> String {
    if format == Format::Json {
        return reg.to_json() + "\n";
    }
    let join = |v: &[i64]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ");
    let mut s = format!("{:<4} {:<10} {:>4}  {:<28} {:<40} {}\n", "alg", "class", "N_w", "I(w)", "Pr_w", "g0");
    for r in reg.records() {
        s += &format!(
            "{:<4} {:<10} {:>4}  {:<28} {:<40} {}\n",
            format!("{}{}", r.algebra, r.rank),
            r.label,
            r.order,
            join(&r.exponents),
            join(&r.weights),
            pretty_g0(&r.g0)
        );
    }
    s
}

/// "u1^2 + su3" as "u(1)² ⊕ su(3)".
fn pretty_g0(g0: &str) -> String {
    const SUP: [char; 10] = ['⁰', '¹', '²', '³', '⁴', '⁵', '⁶', '⁷', '⁸', '⁹'];
    g0.split('+')
        .map(|t| {
            let t = t.trim();
            let (base, pow) = t.split_once('^').unwrap_or((t, ""));
            let split = base.find(|c: char| c.is_ascii_digit()).unwrap_or(base.len());
            let (name, n) = base.split_at(split);
            let mut out = if n.is_empty() { name.to_string() } else { format!("{name}({n})") };
            out.extend(pow.chars().filter_map(|c| c.to_digit(10).map(|d| SUP[d as usize])));
            out
        })
        .collect::<Vec<_>>()
        .join(" ⊕ ")
}

fn frobenius_one(rec: &ConjugacyClassRecord, opts: &PipelineOptions) -> Outcome {
    match frobenius::run(rec, opts) {
        Ok(rep) => Outcome {
            text: rep.to_text(),
            json: rep.to_json(),
            status: if rep.passed() { 0 } else { EXIT_FAIL },
        },
        Err(e) => Outcome::error(&rec.label, "frobenius", e.to_string(), EXIT_FAIL),
    }
}

fn rgroup_one(rec: &ConjugacyClassRecord, opts: &RGroupOptions) -> Outcome {
    match rgroup::run(rec, opts) {
        Ok(rep) => Outcome {
            text: rep.to_text(),
            json: rep.to_json(),
            status: if rep.passed() { 0 } else { EXIT_FAIL },
        },
        Err(e @ RGroupError::Experimental(_)) => Outcome::error(&rec.label, "rgroup", e.to_string(), EXIT_USAGE),
        Err(e) => Outcome::error(&rec.label, "rgroup", e.to_string(), EXIT_FAIL),
    }
}

fn emit(outcomes: Vec<Outcome>, format: Format) -> ExitCode {
    let status = outcomes.iter().map(|o| o.status).max().unwrap_or(0);
    match format {
        Format::Text => {
            let parts: Vec<String> = outcomes.into_iter().map(|o| o.text).collect();
            print!("{}", parts.join("\n"));
        }
        Format::Json => {
            let v: Vec<Value> = outcomes.into_iter().map(|o| o.json).collect();
            println!("{}", serde_json::to_string_pretty(&Value::Array(v)).expect("json"));
        }
    }
    ExitCode::from(status)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("dsfrob: {e}");
            return ExitCode::from(EXIT_USAGE);
        }
    }
    let reg = match Registry::resolve(cli.registry.as_deref()) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("dsfrob: registry: {e}");
            return ExitCode::from(EXIT_USAGE);
        }
    };
    let recs = |labels: &[String]| match resolve(&reg, labels) {
        Ok(r) => Ok(r),
        Err(e) => {
            eprintln!("dsfrob: {e}");
            Err(ExitCode::from(EXIT_USAGE))
        }
    };
    match &cli.cmd {
        Command::List => {
            print!("{}", list(&reg, cli.format));
            ExitCode::SUCCESS
        }
        Command::Validate { classes } => {
            let chosen: Vec<&ConjugacyClassRecord> = if classes.is_empty() {
                reg.records().iter().collect()
            } else {
                match recs(classes) {
                    Ok(r) => r,
                    Err(c) => return c,
                }
            };
            let outcomes = chosen
                .par_iter()
                .map(|r| {
                    let v = validate_class(r);
                    Outcome {
                        text: validation_text(&v),
                        json: validation_json(&v),
                        status: if v.passed() { 0 } else { EXIT_FAIL },
                    }
                })
                .collect();
            emit(outcomes, cli.format)
        }
        Command::Frobenius { classes, run } => {
            let chosen = match recs(classes) {
                Ok(r) => r,
                Err(c) => return c,
            };
            let opts = run.options();
            emit(chosen.par_iter().map(|r| frobenius_one(r, &opts)).collect(), cli.format)
        }
        Command::Rgroup {
            classes,
            run,
            experimental,
            max_elements,
        } => {
            let chosen = match recs(classes) {
                Ok(r) => r,
                Err(c) => return c,
            };
            let opts = RGroupOptions {
                pipeline: run.options(),
                max_elements: *max_elements,
                experimental: *experimental,
            };
            emit(chosen.par_iter().map(|r| rgroup_one(r, &opts)).collect(), cli.format)
        }
    }
}
