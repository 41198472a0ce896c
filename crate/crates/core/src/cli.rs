//! Command-line front end. Every verb reads JSON inputs and writes one JSON
//! document; exit codes are 0 on success, 1 when a verification suite finds
//! a failure and 2 on malformed input.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::fragment::{Fragment, TypeDescriptor};
use crate::measure::{dim_meas_definable, dim_meas_tuple, dim_meas_type, DefinableSet};
use crate::tree::{validate_plan, PlanFile, TreePlan};
use crate::verify::{run_suite, Suite, SuiteConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILED: i32 = 1;
pub const EXIT_MALFORMED: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "nic-measure", version, about = "Exact (dim, meas) on fragments of NIC structures")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check a plan file and list its violations.
    PlanValidate {
        /// Plan file (alternatively --plan).
        file: Option<PathBuf>,
        #[arg(long)]
        plan: Option<PathBuf>,
    },
    /// Grow a random fragment and print its dump.
    FragmentBuild {
        #[arg(long)]
        plan: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 10)]
        max_nodes: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// h of a definable set or of a complete type.
    Measure(MeasureArgs),
    /// The complete types making up a definable set, with their values.
    Decompose(MeasureArgs),
    /// Run verification suites on seeded random fragments.
    Verify {
        #[arg(long)]
        plan: PathBuf,
        #[arg(long, default_value = "all")]
        suite: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 10)]
        max_nodes: usize,
        #[arg(long, default_value_t = 20)]
        trials: usize,
        /// Report elapsed_ms as 0 so that output is byte-deterministic.
        #[arg(long)]
        no_timing: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
struct MeasureArgs {
    #[arg(long)]
    plan: PathBuf,
    /// Definable set file.
    #[arg(long, conflicts_with = "type", required_unless_present = "type")]
    set: Option<PathBuf>,
    /// Type descriptor file.
    #[arg(long = "type")]
    r#type: Option<PathBuf>,
    /// Fragment dump holding the parameters; without it, the parameters are
    /// materialized in an otherwise empty fragment.
    #[arg(long)]
    fragment: Option<PathBuf>,
    /// Seed for the relations of materialized parameters.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Exit code and the text destined for standard output and standard error.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

impl Outcome {
    fn json(code: i32, v: &Value) -> Outcome {
        Outcome { code, stdout: pretty(v), stderr: String::new() }
    }

    fn malformed(msg: impl std::fmt::Display) -> Outcome {
        Outcome { code: EXIT_MALFORMED, stdout: String::new(), stderr: format!("error: {msg}\n") }
    }
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("JSON values serialize");
    s.push('\n');
    s
}

/// Parses `argv` (including the program name) and runs the command.
pub fn run<I, T>(argv: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_MALFORMED } else { EXIT_OK };
            let text = e.render().to_string();
            return if e.use_stderr() {
                Outcome { code, stdout: String::new(), stderr: text }
            } else {
                Outcome { code, stdout: text, stderr: String::new() }
            };
        }
    };
    match execute(cli.command) {
        Ok(o) => o,
        Err(o) => o,
    }
}

fn read(path: &Path) -> Result<String, Outcome> {
    std::fs::read_to_string(path).map_err(|e| Outcome::malformed(format!("{}: {e}", path.display())))
}

fn load_plan(path: &Path) -> Result<Arc<TreePlan>, Outcome> {
    TreePlan::from_json(&read(path)?).map(Arc::new).map_err(|e| Outcome::malformed(format!("{}: {e}", path.display())))
}

/// Writes to `out` if given (stdout then stays empty), else returns `o`.
fn emit(o: Outcome, out: Option<&Path>) -> Result<Outcome, Outcome> {
    match out {
        None => Ok(o),
        Some(p) => {
            std::fs::write(p, &o.stdout).map_err(|e| Outcome::malformed(format!("{}: {e}", p.display())))?;
            Ok(Outcome { stdout: String::new(), ..o })
        }
    }
}

fn execute(cmd: Command) -> Result<Outcome, Outcome> {
    match cmd {
        Command::PlanValidate { file, plan } => {
            let path = file.or(plan).ok_or_else(|| Outcome::malformed("a plan file is required"))?;
            let file: PlanFile = serde_json::from_str(&read(&path)?)
                .map_err(|e| Outcome::malformed(format!("{}: malformed plan file: {e}", path.display())))?;
            let violations: Vec<String> = validate_plan(&file.nodes).iter().map(ToString::to_string).collect();
            let code = if violations.is_empty() { EXIT_OK } else { EXIT_MALFORMED };
            Ok(Outcome::json(code, &json!({ "valid": violations.is_empty(), "violations": violations })))
        }
        Command::FragmentBuild { plan, seed, max_nodes, out } => {
            let plan = load_plan(&plan)?;
            let frag = Fragment::grow_random(plan, seed, max_nodes);
            let mut text = frag.to_json();
            text.push('\n');
            emit(Outcome { code: EXIT_OK, stdout: text, stderr: String::new() }, out.as_deref())
        }
        Command::Measure(args) => {
            let out = args.out.clone();
            let v = measure(&args, false)?;
            emit(Outcome::json(EXIT_OK, &v), out.as_deref())
        }
        Command::Decompose(args) => {
            let out = args.out.clone();
            let v = measure(&args, true)?;
            emit(Outcome::json(EXIT_OK, &v), out.as_deref())
        }
        Command::Verify { plan, suite, seed, max_nodes, trials, no_timing, out } => {
            let plan = load_plan(&plan)?;
            let suite = Suite::parse(&suite).ok_or_else(|| {
                Outcome::malformed(format!("unknown suite {suite:?}; expected cms, ms, nic, oracle or all"))
            })?;
            let cfg = SuiteConfig { seed, max_nodes, trials, ..SuiteConfig::default() };
            let mut reports = run_suite(&plan, suite, &cfg);
            if no_timing {
                reports.iter_mut().for_each(|r| r.elapsed_ms = 0);
            }
            let code = if reports.iter().all(|r| r.passed()) { EXIT_OK } else { EXIT_FAILED };
            let v = serde_json::to_value(&reports).expect("reports serialize");
            emit(Outcome::json(code, &v), out.as_deref())
        }
    }
}

fn measure(args: &MeasureArgs, decompose: bool) -> Result<Value, Outcome> {
    let plan = load_plan(&args.plan)?;
    let mut frag = match &args.fragment {
        Some(p) => {
            let f = Fragment::from_json(&read(p)?).map_err(|e| Outcome::malformed(format!("{}: {e}", p.display())))?;
            if *f.plan() != *plan {
                return Err(Outcome::malformed("fragment was built over a different plan"));
            }
            f
        }
        None => Fragment::new(plan),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    let bad = |e: &dyn std::fmt::Display| Outcome::malformed(e);
    if let Some(path) = &args.r#type {
        if decompose {
            return Err(Outcome::malformed("decompose takes --set"));
        }
        let desc: TypeDescriptor = serde_json::from_str(&read(path)?)
            .map_err(|e| Outcome::malformed(format!("{}: malformed type: {e}", path.display())))?;
        if args.fragment.is_none() {
            for n in &desc.base {
                frag.materialize(n, &mut rng).map_err(|e| bad(&e))?;
            }
        }
        let h = dim_meas_type(&frag, &desc).map_err(|e| bad(&e))?;
        return Ok(serde_json::to_value(h).expect("serializes"));
    }
    let path = args.set.as_ref().expect("clap requires --set or --type");
    let set = DefinableSet::from_json(&read(path)?).map_err(|e| Outcome::malformed(format!("{}: {e}", path.display())))?;
    if args.fragment.is_none() {
        for p in &set.params {
            frag.materialize(p, &mut rng).map_err(|e| bad(&e))?;
        }
    }
    if !decompose {
        let h = dim_meas_definable(&frag, &set).map_err(|e| bad(&e))?;
        return Ok(serde_json::to_value(h).expect("serializes"));
    }
    let parts = set.decompose(&frag).map_err(|e| bad(&e))?;
    let mut types = Vec::new();
    for r in &parts {
        let h = dim_meas_tuple(&r.fragment, &r.tuple, &r.descriptor.base).map_err(|e| bad(&e))?;
        types.push(json!({ "descriptor": r.descriptor, "h": h }));
    }
    let total = dim_meas_definable(&frag, &set).map_err(|e| bad(&e))?;
    Ok(json!({ "types": types, "total": total }))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn help_exits_zero() {
        let o = run(["nic-measure", "--help"]);
        assert_eq!(o.code, 0);
        assert!(o.stdout.contains("verify"));
    }

    #[test]
    fn unknown_flag_is_malformed() {
        assert_eq!(run(["nic-measure", "verify", "--bogus"]).code, EXIT_MALFORMED);
    }

    #[test]
    fn missing_file_is_malformed() {
        let o = run(["nic-measure", "plan-validate", "/nonexistent/plan.json"]);
        assert_eq!(o.code, EXIT_MALFORMED);
        assert!(o.stderr.contains("/nonexistent/plan.json"));
    }
}
