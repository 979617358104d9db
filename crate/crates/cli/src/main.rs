use std::f64::consts::SQRT_2;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use minbcast::algorithms::{brute_force_optimum, cell_alg, mst_heuristic, oct::min_tiling_constant, oct_broadcast};
use minbcast::bench::{self, ExperimentConfig, SourceRule, SweepConfig};
use minbcast::bounds::{cover_cost_floor, min_l_threshold, theorem2_bound, BoundParams};
use minbcast::grid::{sample_instance, Coord, GridSpec, Instance};
use minbcast::protocol::{lifetime, trace_to_text, PivotPolicy, SimConfig, Simulation};
use minbcast::range::{cost, is_broadcast_feasible, RangeAssignment};

#[derive(Parser)]
#[command(name = "minbcast", version, about = "Energy-efficient broadcast on random grid networks")]
struct Cli {
    /// Directory for relative output paths.
    #[arg(long, global = true, env = "MINBCAST_OUT_DIR", default_value = ".")]
    out_dir: PathBuf,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Sample a random grid instance.
    Generate {
        #[arg(long)]
        side: u32,
        #[arg(long)]
        p: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output file (stdout if omitted).
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Compute a range assignment for an instance.
    Assign {
        #[command(flatten)]
        input: InstanceArgs,
        #[arg(long, value_enum)]
        algo: AssignAlgo,
        /// Pivot range for `cell` (default 2√2·log₂ n).
        #[arg(long)]
        l: Option<f64>,
        /// Tiling constant for `oct` (default 16/p_min).
        #[arg(long)]
        c: Option<f64>,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Simulate the distributed protocol phase by phase.
    Simulate {
        #[command(flatten)]
        input: InstanceArgs,
        /// Pivot range (default 2√2·log₂ n).
        #[arg(long)]
        l: Option<f64>,
        /// Cell side (default l/(2√2)).
        #[arg(long)]
        lambda: Option<f64>,
        #[arg(long, default_value_t = 1)]
        phases: u64,
        /// Initial battery per node (unlimited if omitted).
        #[arg(long)]
        battery: Option<f64>,
        #[arg(long, value_enum, default_value_t = Switch::Off)]
        staging: Switch,
        #[arg(long, value_enum, default_value_t = Policy::RoundRobin)]
        policy: Policy,
        /// Report the lifetime instead of running a fixed number of phases.
        #[arg(long, requires = "battery")]
        lifetime: bool,
        /// Write every transmission to this file.
        #[arg(long)]
        trace: Option<PathBuf>,
        /// Tiling constant used for the range threshold warning.
        #[arg(long)]
        c: Option<f64>,
    },
    /// Evaluate the lower-bound formulas.
    Bound {
        #[arg(long)]
        n: u64,
        #[arg(long)]
        epsilon: f64,
        #[arg(long)]
        delta: f64,
        #[arg(long, alias = "pmin")]
        p_min: f64,
        #[arg(long, alias = "pmax")]
        p_max: f64,
        #[arg(long)]
        l: f64,
    },
    /// Batch experiment: CELL-ALG against the MST baseline.
    Experiment {
        /// Flat key = value configuration file.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Preset::Table1)]
        preset: Preset,
        #[arg(long, value_delimiter = ',')]
        sides: Option<Vec<u32>>,
        #[arg(long, value_delimiter = ',')]
        probs: Option<Vec<f64>>,
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        /// File name stem for the `.csv` and `.dat` outputs.
        #[arg(long, default_value = "experiment")]
        name: String,
    },
    /// Tabulate the cost floor and probability bound against observed costs.
    Sweep {
        #[arg(long, value_delimiter = ',', default_value = "13,20,30,50")]
        sides: Vec<u32>,
        #[arg(long, default_value_t = 0.5)]
        p: f64,
        #[arg(long, default_value_t = 0.1)]
        epsilon: f64,
        #[arg(long, default_value_t = 0.5)]
        delta: f64,
        /// Range for the bound (default: its minimal admissible value).
        #[arg(long)]
        l: Option<f64>,
        #[arg(long, default_value_t = 20)]
        trials: usize,
        #[arg(long, default_value_t = 2007)]
        seed: u64,
    },
}

#[derive(Args)]
struct InstanceArgs {
    /// Instance file as written by `generate`.
    #[arg(long)]
    instance: PathBuf,
    /// Source node as `x,y` (default: node nearest the grid center).
    #[arg(long)]
    source: Option<String>,
}

#[derive(Clone, Copy, ValueEnum)]
enum AssignAlgo {
    Cell,
    Oct,
    Mst,
    Opt,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Switch {
    On,
    Off,
}

#[derive(Clone, Copy, ValueEnum)]
enum Policy {
    RoundRobin,
    Fixed,
}

#[derive(Clone, Copy, ValueEnum)]
enum Preset {
    /// `l = √2 log₂ n`, `λ = log₂ n`.
    Table1,
    /// `l = 2√2·c·√log₂ n` with `c = 16/p`.
    Safe,
}

fn resolve(out_dir: &Path, p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        out_dir.join(p)
    }
}

fn write_output(out_dir: &Path, out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => {
            let path = resolve(out_dir, p);
            fs::write(&path, text).with_context(|| format!("writing {}", path.display()))
        }
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn load_instance(args: &InstanceArgs) -> Result<(Instance, Coord)> {
    let text = fs::read_to_string(&args.instance).with_context(|| format!("reading {}", args.instance.display()))?;
    let instance: Instance = text.parse()?;
    if instance.is_empty() {
        bail!("instance has no nodes");
    }
    let source = match &args.source {
        Some(s) => {
            let (x, y) = s.split_once(',').ok_or_else(|| anyhow!("source must be x,y"))?;
            Coord::new(x.trim().parse()?, y.trim().parse()?)
        }
        None => bench::choose_source(&instance, SourceRule::Center, 0).expect("non-empty"),
    };
    if !instance.contains(source) {
        bail!("source {source} is not a node");
    }
    Ok((instance, source))
}

fn default_l(instance: &Instance) -> f64 {
    2.0 * SQRT_2 * (instance.n() as f64).log2()
}

fn assign(out_dir: &Path, input: &InstanceArgs, algo: AssignAlgo, l: Option<f64>, c: Option<f64>, out: Option<&Path>) -> Result<()> {
    let (instance, source) = load_instance(input)?;
    let assignment: RangeAssignment = match algo {
        AssignAlgo::Cell => cell_alg(&instance, source, l.unwrap_or_else(|| default_l(&instance)))?,
        AssignAlgo::Oct => oct_broadcast(&instance, source, c.unwrap_or_else(|| min_tiling_constant(instance.spec().p_min())))?,
        AssignAlgo::Mst => mst_heuristic(&instance, source)?,
        AssignAlgo::Opt => brute_force_optimum(&instance, source, None)?,
    };
    let feasible = is_broadcast_feasible(&instance, &assignment, source)?;
    eprintln!("cost {} transmitters {} feasible {}", cost(&assignment), assignment.transmitters(), feasible);
    write_output(out_dir, out, &assignment.to_text(&instance))
}

#[allow(clippy::too_many_arguments)]
fn simulate(
    out_dir: &Path,
    input: &InstanceArgs,
    l: Option<f64>,
    lambda: Option<f64>,
    phases: u64,
    battery: Option<f64>,
    staging: Switch,
    policy: Policy,
    want_lifetime: bool,
    trace: Option<&Path>,
    c: Option<f64>,
) -> Result<()> {
    let (instance, source) = load_instance(input)?;
    let l = l.unwrap_or_else(|| default_l(&instance));
    let mut config = SimConfig::new(l, instance.spec().p_min());
    if let Some(lambda) = lambda {
        config.lambda = lambda;
    }
    if let Some(b) = battery {
        config.battery = b;
    }
    config.staging = staging == Switch::On;
    config.policy = match policy {
        Policy::RoundRobin => PivotPolicy::RoundRobin,
        Policy::Fixed => PivotPolicy::Fixed,
    };
    let c = c.unwrap_or_else(|| min_tiling_constant(instance.spec().p_min()));
    if config.below_threshold(instance.n(), c) {
        eprintln!("warning: l = {l} is below 2√2·c·√log₂ n with c = {c}; cells may run out of pivots");
    }
    if want_lifetime {
        let lt = lifetime(&instance, source, &config)?;
        let excl = lt.excluding_source.map_or("unbounded".to_string(), |v| v.to_string());
        println!("lifetime including_source {} excluding_source {}", lt.including_source, excl);
        return Ok(());
    }
    let mut sim = Simulation::new(&instance, source, config)?;
    let summary = sim.run_many(phases);
    println!("# k steps transmissions work");
    for r in &summary.reports {
        println!("{} {} {} {}", r.phase, r.steps, r.transmissions, r.work);
    }
    println!(
        "# phases {} total_steps {} amortized_steps {} total_work {} rotations {} eccentricity {}",
        summary.phases_completed,
        summary.total_steps,
        summary.amortized_steps(),
        summary.total_work,
        sim.rotations(),
        sim.eccentricity()
    );
    if let Some(path) = trace {
        let events: Vec<_> = summary.reports.iter().flat_map(|r| r.trace.iter().copied()).collect();
        write_output(out_dir, Some(path), &trace_to_text(&events))?;
    }
    if let Some(e) = summary.failure {
        bail!("stopped after {} phase(s): {e}", summary.phases_completed);
    }
    Ok(())
}

fn bound(n: u64, epsilon: f64, delta: f64, p_min: f64, p_max: f64, l: f64) -> Result<()> {
    let params = BoundParams::new(n, epsilon, delta, p_min, p_max, l)?;
    println!("# log base 2");
    println!("t {}", params.t);
    println!("min_l {}", min_l_threshold(epsilon, delta, p_min));
    println!("cost_floor {}", cover_cost_floor(n, epsilon));
    let b = theorem2_bound(&params)?;
    println!("bound {:e}", b.value);
    println!("ln_bound {}", b.ln_value);
    println!("small_n {}", b.small_n);
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn experiment(
    out_dir: &Path,
    config_file: Option<&Path>,
    preset: Preset,
    sides: Option<Vec<u32>>,
    probs: Option<Vec<f64>>,
    trials: Option<usize>,
    seed: Option<u64>,
    name: &str,
) -> Result<ExitCode> {
    let mut config = match preset {
        Preset::Table1 => ExperimentConfig::default(),
        Preset::Safe => {
            let p_min = probs.as_ref().and_then(|p| p.iter().copied().reduce(f64::min)).unwrap_or(0.2);
            ExperimentConfig::safe_threshold(p_min)
        }
    };
    if let Some(path) = config_file {
        let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        config.apply_key_values(&text)?;
    }
    if let Some(v) = sides {
        config.sides = v;
    }
    if let Some(v) = probs {
        config.probs = v;
    }
    if let Some(v) = trials {
        config.trials = v;
    }
    if let Some(v) = seed {
        config.master_seed = v;
    }
    let rows = bench::run_experiment(&config)?;
    fs::create_dir_all(out_dir).with_context(|| format!("creating {}", out_dir.display()))?;
    bench::emit_csv(&rows, &out_dir.join(format!("{name}.csv")))?;
    bench::emit_plotdata(&rows, &out_dir.join(format!("{name}.dat")))?;
    print!("{}", bench::rows_to_csv(&rows));
    let worst = rows.iter().map(|r| r.errors as f64 / r.trials as f64).fold(0.0, f64::max);
    if worst > config.max_error_fraction {
        eprintln!("error fraction {worst} exceeds {}", config.max_error_fraction);
        return Ok(ExitCode::from(2));
    }
    Ok(ExitCode::SUCCESS)
}

fn run(cli: Cli) -> Result<ExitCode> {
    let out_dir = cli.out_dir.as_path();
    match cli.cmd {
        Cmd::Generate { side, p, seed, out } => {
            let spec = GridSpec::uniform(side, p)?;
            let instance = sample_instance(&spec, seed);
            write_output(out_dir, out.as_deref(), &instance.to_text())?;
        }
        Cmd::Assign { input, algo, l, c, out } => assign(out_dir, &input, algo, l, c, out.as_deref())?,
        Cmd::Simulate { input, l, lambda, phases, battery, staging, policy, lifetime, trace, c } => {
            simulate(out_dir, &input, l, lambda, phases, battery, staging, policy, lifetime, trace.as_deref(), c)?
        }
        Cmd::Bound { n, epsilon, delta, p_min, p_max, l } => bound(n, epsilon, delta, p_min, p_max, l)?,
        Cmd::Experiment { config, preset, sides, probs, trials, seed, name } => {
            return experiment(out_dir, config.as_deref(), preset, sides, probs, trials, seed, &name)
        }
        Cmd::Sweep { sides, p, epsilon, delta, l, trials, seed } => {
            let l = l.unwrap_or_else(|| min_l_threshold(epsilon, delta, p));
            let lines = bench::run_sweep_bounds(&SweepConfig { sides, p, epsilon, delta, l, trials, master_seed: seed })?;
            print!("{}", bench::sweep_to_text(&lines));
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
