use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use dincl::inputs::InputScheme;
use dincl::montecarlo::{sample_and_check, McConfig};
use dincl::reach::{evolve, poincare_crossing, EvolutionConfig, ReachError, Split, SweepPolicy};
use dincl::report::{polygon_csv, projection_polygon, Results};
use dincl::scenario::{builtin, Scenario, BUILTINS};
use dincl::tables::{table, TABLES};

const EXIT_INVALID: u8 = 2;
const EXIT_CERTIFICATION: u8 = 3;
const EXIT_CONTAINMENT: u8 = 4;

#[derive(Parser)]
#[command(name = "dincl", version, about = "Validated reachable sets of input-affine differential inclusions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evolve a scenario and write its results.
    Run(RunArgs),
    /// Reproduce a published table.
    Table {
        #[arg(value_parser = clap::builder::PossibleValuesParser::new(TABLES))]
        id: String,
        /// Also write `<id>.json` into this directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print a built-in scenario as JSON.
    Show {
        #[arg(value_parser = clap::builder::PossibleValuesParser::new(BUILTINS))]
        name: String,
    },
}

#[derive(Args)]
struct RunArgs {
    /// Scenario file (JSON).
    file: Option<PathBuf>,
    #[arg(long, conflicts_with = "file")]
    scenario: Option<PathBuf>,
    #[arg(long, conflicts_with_all = ["file", "scenario"],
          value_parser = clap::builder::PossibleValuesParser::new(BUILTINS))]
    builtin: Option<String>,
    #[arg(long)]
    step: Option<f64>,
    #[arg(long)]
    time: Option<f64>,
    #[arg(long)]
    steps: Option<usize>,
    #[arg(long)]
    scheme: Option<InputScheme>,
    /// `auto`, `1`, `2`, `3` or a bound name.
    #[arg(long)]
    order: Option<String>,
    /// Split at time `t` along `axis`, written `t:axis`.
    #[arg(long = "split", value_parser = parse_split)]
    splits: Vec<Split>,
    /// Drop the scenario's split schedule.
    #[arg(long, conflicts_with = "splits")]
    no_split: bool,
    #[arg(long)]
    max_params: Option<usize>,
    /// `smallest-first` or `oldest-first[:age]`.
    #[arg(long)]
    sweep: Option<SweepPolicy>,
    /// Input bounds `V_1,V_2,...`, replacing the scenario's.
    #[arg(long, value_delimiter = ',')]
    noise: Option<Vec<f64>>,
    /// Replace the initial box by its center widened by this half-width.
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Write per-step projection polygons onto coordinates `i,j`.
    #[arg(long, value_parser = parse_pair)]
    project: Option<[usize; 2]>,
    /// Check this many sampled trajectories against the enclosures.
    #[arg(long, value_name = "N")]
    mc_check: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

fn parse_split(s: &str) -> Result<Split, String> {
    let (t, axis) = s.split_once(':').ok_or_else(|| format!("expected t:axis, got `{s}`"))?;
    Ok(Split {
        t: t.trim().parse().map_err(|e| format!("split time `{t}`: {e}"))?,
        axis: axis.trim().parse().map_err(|e| format!("split axis `{axis}`: {e}"))?,
    })
}

fn parse_pair(s: &str) -> Result<[usize; 2], String> {
    let (i, j) = s.split_once(',').ok_or_else(|| format!("expected i,j, got `{s}`"))?;
    let p = |x: &str| x.trim().parse::<usize>().map_err(|e| format!("coordinate `{x}`: {e}"));
    Ok([p(i)?, p(j)?])
}

/// Errors carrying their exit status.
#[derive(Debug)]
struct Failure {
    code: u8,
    error: anyhow::Error,
}

fn invalid(error: impl Into<anyhow::Error>) -> Failure {
    Failure { code: EXIT_INVALID, error: error.into() }
}

fn other(error: impl Into<anyhow::Error>) -> Failure {
    Failure { code: 1, error: error.into() }
}

fn load(args: &RunArgs) -> Result<Scenario> {
    let mut sc = if let Some(name) = &args.builtin {
        builtin(name).ok_or_else(|| anyhow!("unknown builtin `{name}`"))?
    } else {
        let path = args.file.as_ref().or(args.scenario.as_ref()).ok_or_else(|| {
            anyhow!("no scenario given; pass a file or --builtin {{{}}}", BUILTINS.join(","))
        })?;
        let text = fs::read_to_string(path).with_context(|| format!("cannot read scenario file {}", path.display()))?;
        Scenario::from_json(&text).with_context(|| format!("in scenario file {}", path.display()))?
    };
    if let Some(t) = args.time {
        sc.time = t;
    }
    if let Some(h) = args.step {
        sc.step = Some(h);
        sc.steps = None;
    }
    if let Some(n) = args.steps {
        sc.steps = Some(n);
    }
    if let Some(s) = args.scheme {
        sc.scheme = s;
    }
    if let Some(o) = &args.order {
        sc.order = o.clone();
    }
    if args.no_split {
        sc.splits.clear();
    }
    if !args.splits.is_empty() {
        sc.splits = args.splits.clone();
    }
    if let Some(b) = args.max_params {
        sc.max_params = Some(b);
    }
    if let Some(p) = args.sweep {
        sc.sweep = Some(p);
    }
    if let Some(v) = &args.noise {
        if v.len() != sc.system.inputs.len() {
            bail!("--noise has {} values but the scenario has {} inputs", v.len(), sc.system.inputs.len());
        }
        for (ch, &b) in sc.system.inputs.iter_mut().zip(v) {
            ch.bound = b;
        }
    }
    if let Some(d) = args.delta {
        if !(d >= 0.0) {
            bail!("--delta must be nonnegative");
        }
        for c in &mut sc.initial {
            let mid = 0.5 * (c[0] + c[1]);
            *c = [mid - d, mid + d];
        }
    }
    if let Some(p) = args.project {
        sc.project = Some(p);
    }
    Ok(sc)
}

fn certification_failure(e: ReachError) -> Failure {
    let hint = match &e {
        ReachError::DomainExceeded { .. } => "; enlarge the region or shorten the horizon",
        ReachError::NoErrorBound { .. } => "; reduce the step size",
        ReachError::NoCrossing { .. } => "; extend the final time",
        _ => "",
    };
    Failure { code: EXIT_CERTIFICATION, error: anyhow!(e).context(format!("certification failed{hint}")) }
}

fn write(path: &Path, contents: &str) -> Result<(), Failure> {
    fs::write(path, contents).with_context(|| format!("cannot write {}", path.display())).map_err(other)
}

fn write_polygons(dir: &Path, cfg: &EvolutionConfig, trace: &dincl::reach::EvolutionTrace, p: [usize; 2]) -> Result<(), Failure> {
    let n = cfg.system.dim();
    if p[0] >= n || p[1] >= n || p[0] == p[1] {
        return Err(invalid(anyhow!("projection {},{} is invalid for dimension {n}", p[0], p[1])));
    }
    for (k, branch) in trace.branches.iter().enumerate() {
        for (index, set) in branch.sets.iter().enumerate() {
            let csv = polygon_csv(&projection_polygon(&set.model, p[0], p[1]));
            write(&dir.join(format!("branch{k}_t{index}.csv")), &csv)?;
        }
    }
    Ok(())
}

fn run(args: &RunArgs) -> Result<(), Failure> {
    let sc = load(args).map_err(invalid)?;
    let cfg = sc.to_config().map_err(invalid)?;
    fs::create_dir_all(&args.out).with_context(|| format!("cannot create {}", args.out.display())).map_err(other)?;

    let start = Instant::now();
    let trace = evolve(&cfg).map_err(certification_failure)?;
    let evolve_secs = start.elapsed().as_secs_f64();

    let mut results = Results::new(&sc.name, &cfg, &trace);
    if let Some(sec) = sc.section {
        results.crossing = Some(poincare_crossing(&trace, sec.coord, sec.direction).map_err(certification_failure)?);
    }
    if let Some(samples) = args.mc_check {
        let mc = McConfig { samples, seed: args.seed, ..McConfig::default() };
        results.monte_carlo = Some(sample_and_check(&cfg.system, &cfg.initial, &trace, &mc));
    }
    let total_secs = start.elapsed().as_secs_f64();

    write(&args.out.join("results.json"), &results.to_json())?;
    let timing = serde_json::json!({ "evolve_seconds": evolve_secs, "total_seconds": total_secs });
    write(&args.out.join("timing.json"), &serde_json::to_string_pretty(&timing).expect("timing serializes"))?;
    if let Some(p) = args.project {
        write_polygons(&args.out, &cfg, &trace, p)?;
    }

    println!("{}: {} steps, {} branch(es), first step eps {:e} ({})", sc.name, results.steps, results.branches.len(), results.first_eps, results.first_order);
    if let Some(a) = &results.analytic {
        println!("region constants: K={} K'={} L={} Lambda={} H={}", a.k, a.k_prime, a.l, a.lambda, a.h);
    }
    for b in &results.branches {
        let label = if b.path.is_empty() { "-" } else { &b.path };
        println!("branch {label}: {} diameter {}", fmt_box(&b.final_box.bounds), b.final_box.diameter);
    }
    println!("hull: {} diameter {} radius {}", fmt_box(&results.hull.bounds), results.hull.diameter, results.hull.radius);
    if let Some(c) = &results.crossing {
        println!("crossing: t in [{}, {}], hull {}", c.time.lo(), c.time.hi(), c.hull);
    }
    println!("wall time: {total_secs:.3} s; results in {}", args.out.display());
    if let Some(mc) = &results.monte_carlo {
        println!("monte carlo: {} samples, {} points, {} violations", mc.samples, mc.points, mc.violations);
        if !mc.passed() {
            return Err(Failure {
                code: EXIT_CONTAINMENT,
                error: anyhow!("{} sampled states lie outside the enclosures (max excess {:e})", mc.violations, mc.max_excess),
            });
        }
    }
    Ok(())
}

fn fmt_box(b: &[[f64; 2]]) -> String {
    b.iter().map(|c| format!("[{}, {}]", c[0], c[1])).collect::<Vec<_>>().join(" x ")
}

fn run_table(id: &str, out: Option<&Path>) -> Result<(), Failure> {
    let t = table(id).ok_or_else(|| invalid(anyhow!("unknown table `{id}`")))?.map_err(certification_failure)?;
    print!("{t}");
    if let Some(dir) = out {
        fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display())).map_err(other)?;
        write(&dir.join(format!("{id}.json")), &serde_json::to_string_pretty(&t).expect("table serializes"))?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Run(args) => run(args),
        Command::Table { id, out } => run_table(id, out.as_deref()),
        Command::Show { name } => {
            println!("{}", builtin(name).expect("listed builtin").to_json());
            Ok(())
        }
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {:#}", f.error);
            ExitCode::from(f.code)
        }
    }
}
