//! Batch experiments: CELL-ALG against the MST baseline over random grids,
//! with CSV and plot-data output.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;

use crate::algorithms::{brute_force_optimum, cell_alg_with, mst_heuristic, PivotRule};
use crate::bounds::{cover_cost_floor, theorem2_bound, BoundParams};
use crate::error::{Error, Result};
use crate::grid::{derive_seed, sample_instance, Coord, GridSpec, Instance, RNG_NAME};
use crate::range::{cost, is_broadcast_feasible, prune_redundant, RangeSet};

/// A length expressed as `coef · (log₂ n)^pow`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogRule {
    pub coef: f64,
    pub pow: f64,
}

impl LogRule {
    pub const fn new(coef: f64, pow: f64) -> Self {
        LogRule { coef, pow }
    }

    pub fn eval(&self, n: u64) -> f64 {
        self.coef * (n as f64).log2().powf(self.pow)
    }
}

/// Algorithms that can appear in a ratio.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Algo {
    Cell,
    Mst,
    Opt,
}

impl std::str::FromStr for Algo {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cell" => Ok(Algo::Cell),
            "mst" => Ok(Algo::Mst),
            "opt" => Ok(Algo::Opt),
            other => Err(Error::InvalidParameter(format!("unknown algorithm {other:?}"))),
        }
    }
}

/// How the broadcast source is picked in each trial.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SourceRule {
    /// Uniformly random node, drawn from the trial seed.
    Random,
    /// Node closest to the grid center.
    Center,
    /// Smallest row-major label.
    First,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub sides: Vec<u32>,
    pub probs: Vec<f64>,
    pub trials: usize,
    pub master_seed: u64,
    pub numerator: Algo,
    pub denominator: Algo,
    /// Pivot range `l`.
    pub l_rule: LogRule,
    /// Cell side `λ`.
    pub lambda_rule: LogRule,
    pub pivot_rule: PivotRule,
    pub prune: bool,
    pub source: SourceRule,
    /// Largest tolerated fraction of trials ending in a construction error.
    pub max_error_fraction: f64,
}

impl Default for ExperimentConfig {
    /// The reference experiment: `l = √2 log n`, `λ = log n`, both tunings on.
    fn default() -> Self {
        ExperimentConfig {
            sides: vec![13, 20, 25, 30, 50, 100],
            probs: vec![0.2, 0.5],
            trials: 1000,
            master_seed: 2007,
            numerator: Algo::Cell,
            denominator: Algo::Mst,
            l_rule: LogRule::new(std::f64::consts::SQRT_2, 1.0),
            lambda_rule: LogRule::new(1.0, 1.0),
            pivot_rule: PivotRule::Central,
            prune: true,
            source: SourceRule::Random,
            max_error_fraction: 0.05,
        }
    }
}

impl std::str::FromStr for SourceRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "random" => Ok(SourceRule::Random),
            "center" => Ok(SourceRule::Center),
            "first" => Ok(SourceRule::First),
            other => Err(Error::InvalidParameter(format!("unknown source rule {other:?}"))),
        }
    }
}

fn parse_list<T: std::str::FromStr>(key: &str, v: &str) -> Result<Vec<T>> {
    v.split(',')
        .map(|t| t.trim().parse::<T>().map_err(|_| Error::InvalidParameter(format!("bad value {t:?} for {key}"))))
        .collect()
}

fn parse_one<T: std::str::FromStr>(key: &str, v: &str) -> Result<T> {
    v.parse::<T>().map_err(|_| Error::InvalidParameter(format!("bad value {v:?} for {key}")))
}

impl ExperimentConfig {
    /// Overrides fields from flat `key = value` lines; `#` starts a comment.
    /// Keys: `sides`, `probs` (comma lists), `trials`, `master_seed`,
    /// `numerator`, `denominator`, `l_coef`, `l_pow`, `lambda_coef`,
    /// `lambda_pow`, `pivot` (`central`/`first`), `prune`, `source`
    /// (`random`/`center`/`first`), `max_error_fraction`.
    pub fn apply_key_values(&mut self, text: &str) -> Result<()> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Parse { line: i + 1, msg: format!("expected key = value, got {line:?}") })?;
            let (key, v) = (key.trim(), value.trim());
            match key {
                "sides" => self.sides = parse_list(key, v)?,
                "probs" => self.probs = parse_list(key, v)?,
                "trials" => self.trials = parse_one(key, v)?,
                "master_seed" => self.master_seed = parse_one(key, v)?,
                "numerator" => self.numerator = v.parse()?,
                "denominator" => self.denominator = v.parse()?,
                "l_coef" => self.l_rule.coef = parse_one(key, v)?,
                "l_pow" => self.l_rule.pow = parse_one(key, v)?,
                "lambda_coef" => self.lambda_rule.coef = parse_one(key, v)?,
                "lambda_pow" => self.lambda_rule.pow = parse_one(key, v)?,
                "pivot" => {
                    self.pivot_rule = match v {
                        "central" => PivotRule::Central,
                        "first" => PivotRule::FirstNode,
                        other => return Err(Error::InvalidParameter(format!("unknown pivot rule {other:?}"))),
                    }
                }
                "prune" => self.prune = parse_one(key, v)?,
                "source" => self.source = v.parse()?,
                "max_error_fraction" => self.max_error_fraction = parse_one(key, v)?,
                other => return Err(Error::Parse { line: i + 1, msg: format!("unknown key {other:?}") }),
            }
        }
        Ok(())
    }

    /// Range and cell side at or above the w.h.p. feasibility threshold
    /// `l = 2√2·c·√log n` with `c = 16/p`, `λ = l/(2√2)`.
    pub fn safe_threshold(p_min: f64) -> Self {
        let c = 16.0 / p_min;
        ExperimentConfig {
            l_rule: LogRule::new(2.0 * std::f64::consts::SQRT_2 * c, 0.5),
            lambda_rule: LogRule::new(c, 0.5),
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::InvalidParameter("trials must be at least 1".into()));
        }
        for &side in &self.sides {
            let n = side as u64 * side as u64;
            if !(self.l_rule.eval(n) > 0.0 && self.lambda_rule.eval(n) > 0.0) {
                return Err(Error::InvalidParameter(format!("l or λ not positive at side {side}")));
            }
        }
        for &p in &self.probs {
            GridSpec::uniform(2, p)?;
        }
        if self.sides.iter().any(|&s| s < 2) {
            return Err(Error::InvalidParameter("side must be at least 2".into()));
        }
        Ok(())
    }
}

/// Outcome of one trial.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialOutcome {
    pub nodes: usize,
    pub feasible: bool,
    pub numerator_cost: f64,
    pub denominator_cost: f64,
    /// A construction failed; the trial counts as infeasible.
    pub error: bool,
}

impl TrialOutcome {
    /// `numerator / denominator`, if both are positive.
    pub fn ratio(&self) -> Option<f64> {
        (self.feasible && self.numerator_cost > 0.0 && self.denominator_cost > 0.0)
            .then(|| self.numerator_cost / self.denominator_cost)
    }
}

/// One line of the results table.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentRow {
    pub side: u32,
    pub p: f64,
    pub feasible_count: usize,
    pub trials: usize,
    /// Ratio statistics (numerator over denominator), feasible trials only.
    pub min_ratio: f64,
    pub avg_ratio: f64,
    pub max_ratio: f64,
    /// Average of the inverse ratio over the same trials.
    pub avg_inverse_ratio: f64,
    /// Trials in which a construction returned an error.
    pub errors: usize,
}

impl ExperimentRow {
    fn from_outcomes(side: u32, p: f64, outcomes: &[TrialOutcome]) -> Self {
        let ratios: Vec<f64> = outcomes.iter().filter_map(TrialOutcome::ratio).collect();
        let feasible_count = outcomes.iter().filter(|o| o.feasible).count();
        let (min, max, avg, inv) = if ratios.is_empty() {
            (f64::NAN, f64::NAN, f64::NAN, f64::NAN)
        } else {
            let k = ratios.len() as f64;
            (
                ratios.iter().copied().fold(f64::INFINITY, f64::min),
                ratios.iter().copied().fold(f64::NEG_INFINITY, f64::max),
                ratios.iter().sum::<f64>() / k,
                ratios.iter().map(|r| 1.0 / r).sum::<f64>() / k,
            )
        };
        ExperimentRow {
            side,
            p,
            feasible_count,
            trials: outcomes.len(),
            min_ratio: min,
            avg_ratio: avg,
            max_ratio: max,
            avg_inverse_ratio: inv,
            errors: outcomes.iter().filter(|o| o.error).count(),
        }
    }
}

/// Picks the trial's source node.
pub fn choose_source(instance: &Instance, rule: SourceRule, trial_seed: u64) -> Option<Coord> {
    if instance.is_empty() {
        return None;
    }
    match rule {
        SourceRule::Random => {
            let mut rng = ChaCha20Rng::seed_from_u64(derive_seed(trial_seed, u64::MAX));
            Some(instance.node(rng.gen_range(0..instance.len())))
        }
        SourceRule::First => Some(instance.node(0)),
        SourceRule::Center => {
            let mid = (instance.side() - 1) as i64;
            instance.nodes().iter().copied().min_by_key(|c| {
                let dx = 2 * c.x as i64 - mid;
                let dy = 2 * c.y as i64 - mid;
                dx * dx + dy * dy
            })
        }
    }
}

fn algo_cost(config: &ExperimentConfig, algo: Algo, instance: &Instance, source: Coord) -> Result<(f64, bool)> {
    let n = instance.n();
    match algo {
        Algo::Cell => {
            let l = config.l_rule.eval(n);
            let lambda = config.lambda_rule.eval(n);
            let rule = config.pivot_rule;
            let out = cell_alg_with(instance, source, l, lambda, rule)?;
            let assignment = out.assignment.with_gamma(instance, RangeSet::new(vec![l])?)?;
            if !is_broadcast_feasible(instance, &assignment, source)? {
                return Ok((cost(&assignment), false));
            }
            let assignment = if config.prune { prune_redundant(instance, &assignment, source)? } else { assignment };
            Ok((cost(&assignment), true))
        }
        Algo::Mst => Ok((cost(&mst_heuristic(instance, source)?), true)),
        Algo::Opt => Ok((cost(&brute_force_optimum(instance, source, None)?), true)),
    }
}

/// Runs a single trial. Errors from the constructions count as infeasible.
pub fn run_trial(config: &ExperimentConfig, side: u32, p: f64, trial: usize) -> Result<TrialOutcome> {
    let spec = GridSpec::uniform(side, p)?;
    let seed = derive_seed(config.master_seed, trial as u64);
    let instance = sample_instance(&spec, seed);
    let Some(source) = choose_source(&instance, config.source, seed) else {
        return Ok(TrialOutcome { nodes: 0, feasible: false, numerator_cost: 0.0, denominator_cost: 0.0, error: false });
    };
    let num = algo_cost(config, config.numerator, &instance, source);
    let den = algo_cost(config, config.denominator, &instance, source);
    let (numerator_cost, den_cost, feasible, error) = match (num, den) {
        (Ok((a, fa)), Ok((b, fb))) => (a, b, fa && fb, false),
        _ => (0.0, 0.0, false, true),
    };
    Ok(TrialOutcome { nodes: instance.len(), feasible, numerator_cost, denominator_cost: den_cost, error })
}

/// Runs every `(side, p)` combination. Trials run in parallel and are
/// aggregated in trial order, so rows depend only on `master_seed`.
pub fn run_experiment(config: &ExperimentConfig) -> Result<Vec<ExperimentRow>> {
    config.validate()?;
    let mut rows = Vec::new();
    for &side in &config.sides {
        for &p in &config.probs {
            let outcomes = (0..config.trials)
                .into_par_iter()
                .map(|t| run_trial(config, side, p, t))
                .collect::<Result<Vec<_>>>()?;
            rows.push(ExperimentRow::from_outcomes(side, p, &outcomes));
        }
    }
    Ok(rows)
}

pub const CSV_HEADER: &str = "side,p,feasible,trials,min_ratio,avg_ratio,max_ratio";

/// CSV text. A leading `#` line records the generator and log base.
pub fn rows_to_csv(rows: &[ExperimentRow]) -> String {
    let mut out = format!("# rng {RNG_NAME} log base 2\n{CSV_HEADER}\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.side, r.p, r.feasible_count, r.trials, r.min_ratio, r.avg_ratio, r.max_ratio
        );
    }
    out
}

/// Parses [`rows_to_csv`] output. The inverse ratio and error count are not
/// stored and come back as NaN and 0.
pub fn rows_from_csv(text: &str) -> Result<Vec<ExperimentRow>> {
    let mut rows = Vec::new();
    let mut header_seen = false;
    for (ln, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if !header_seen {
            if line != CSV_HEADER {
                return Err(Error::Parse { line: ln + 1, msg: "unexpected header".into() });
            }
            header_seen = true;
            continue;
        }
        let f: Vec<&str> = line.split(',').collect();
        let err = || Error::Parse { line: ln + 1, msg: "bad row".into() };
        if f.len() != 7 {
            return Err(err());
        }
        let num = |i: usize| f[i].parse::<f64>().map_err(|_| err());
        rows.push(ExperimentRow {
            side: f[0].parse().map_err(|_| err())?,
            p: num(1)?,
            feasible_count: f[2].parse().map_err(|_| err())?,
            trials: f[3].parse().map_err(|_| err())?,
            min_ratio: num(4)?,
            avg_ratio: num(5)?,
            max_ratio: num(6)?,
            avg_inverse_ratio: f64::NAN,
            errors: 0,
        });
    }
    Ok(rows)
}

pub fn emit_csv(rows: &[ExperimentRow], path: &Path) -> Result<()> {
    fs::write(path, rows_to_csv(rows))?;
    Ok(())
}

/// Whitespace-separated columns for gnuplot and friends.
pub fn rows_to_plotdata(rows: &[ExperimentRow]) -> String {
    let mut out = String::from("# side p feasible_fraction min_ratio avg_ratio max_ratio avg_inverse_ratio\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{} {} {} {} {} {} {}",
            r.side,
            r.p,
            r.feasible_count as f64 / r.trials as f64,
            r.min_ratio,
            r.avg_ratio,
            r.max_ratio,
            r.avg_inverse_ratio
        );
    }
    out
}

pub fn emit_plotdata(rows: &[ExperimentRow], path: &Path) -> Result<()> {
    fs::write(path, rows_to_plotdata(rows))?;
    Ok(())
}

/// One line of the theory-versus-observation sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepLine {
    pub side: u32,
    pub n: u64,
    pub floor: f64,
    pub bound: f64,
    /// Natural log of `bound`, finite even where `bound` overflows.
    pub ln_bound: f64,
    pub small_n: bool,
    /// Cheapest feasible CELL-ALG or MST cost seen over the trials.
    pub best_observed: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub sides: Vec<u32>,
    pub p: f64,
    pub epsilon: f64,
    pub delta: f64,
    pub l: f64,
    pub trials: usize,
    pub master_seed: u64,
}

/// Tabulates the cost floor and the probability bound next to the best
/// heuristic cost observed on sampled instances.
pub fn run_sweep_bounds(config: &SweepConfig) -> Result<Vec<SweepLine>> {
    let exp = ExperimentConfig {
        sides: config.sides.clone(),
        probs: vec![config.p],
        trials: config.trials,
        master_seed: config.master_seed,
        ..ExperimentConfig::default()
    };
    let mut lines = Vec::new();
    for &side in &config.sides {
        let n = side as u64 * side as u64;
        let params = BoundParams::new(n, config.epsilon, config.delta, config.p, config.p, config.l)?;
        let bound = theorem2_bound(&params)?;
        let best = (0..config.trials)
            .into_par_iter()
            .map(|t| run_trial(&exp, side, config.p, t))
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .flat_map(|o| {
                let cell = o.feasible.then_some(o.numerator_cost);
                [cell, (o.denominator_cost > 0.0).then_some(o.denominator_cost)]
            })
            .flatten()
            .fold(f64::INFINITY, f64::min);
        lines.push(SweepLine {
            side,
            n,
            floor: cover_cost_floor(n, config.epsilon),
            bound: bound.value,
            ln_bound: bound.ln_value,
            small_n: bound.small_n,
            best_observed: best,
        });
    }
    Ok(lines)
}

pub fn sweep_to_text(lines: &[SweepLine]) -> String {
    let mut out = String::from("# log base 2\nside n floor bound ln_bound small_n best_observed\n");
    for l in lines {
        let _ = writeln!(out, "{} {} {} {:e} {} {} {}", l.side, l.n, l.floor, l.bound, l.ln_bound, l.small_n, l.best_observed);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quick() -> ExperimentConfig {
        ExperimentConfig { sides: vec![13], probs: vec![0.5], trials: 5, ..ExperimentConfig::default() }
    }

    #[test]
    fn deterministic_rows() {
        let c = ExperimentConfig { trials: 1, ..quick() };
        assert_eq!(run_experiment(&c).unwrap(), run_experiment(&c).unwrap());
    }

    #[test]
    fn row_statistics_are_ordered() {
        let rows = run_experiment(&quick()).unwrap();
        let r = &rows[0];
        assert!(r.feasible_count <= r.trials);
        if r.feasible_count > 0 {
            assert!(r.min_ratio <= r.avg_ratio && r.avg_ratio <= r.max_ratio);
        }
    }

    #[test]
    fn csv_shapes() {
        assert_eq!(rows_to_csv(&[]).lines().filter(|l| !l.starts_with('#')).count(), 1);
        let rows = run_experiment(&ExperimentConfig { trials: 2, ..quick() }).unwrap();
        let text = rows_to_csv(&rows);
        assert_eq!(text.lines().filter(|l| !l.starts_with('#')).count(), 2);
        let back = rows_from_csv(&text).unwrap();
        assert_eq!(back.len(), 1);
        let (a, b) = (&rows[0], &back[0]);
        assert_eq!((a.side, a.p, a.feasible_count, a.trials), (b.side, b.p, b.feasible_count, b.trials));
        assert_eq!((a.min_ratio, a.avg_ratio, a.max_ratio), (b.min_ratio, b.avg_ratio, b.max_ratio));
    }

    #[test]
    fn invalid_configs() {
        assert!(ExperimentConfig { trials: 0, ..quick() }.validate().is_err());
        assert!(ExperimentConfig { probs: vec![1.0], ..quick() }.validate().is_err());
    }

    #[test]
    fn key_value_config() {
        let mut c = ExperimentConfig::default();
        c.apply_key_values("# table run\nsides = 13, 20\nprobs=0.5\ntrials = 7 # short\nsource = center\nprune = false\n").unwrap();
        assert_eq!(c.sides, vec![13, 20]);
        assert_eq!(c.probs, vec![0.5]);
        assert_eq!(c.trials, 7);
        assert_eq!(c.source, SourceRule::Center);
        assert!(!c.prune);
        assert!(c.apply_key_values("colour = red").is_err());
        assert!(c.apply_key_values("trials").is_err());
    }

    #[test]
    fn unwritable_path_errors() {
        assert!(emit_csv(&[], Path::new("/nonexistent-dir/x.csv")).is_err());
    }
}
