//! Discrete-time simulation of the distributed broadcast protocol: pivots are
//! elected per cell by local counters during the first `⌈γλ²⌉` phases and
//! rotated round-robin afterwards.
//!
//! Reception is modelled at cell level: a pivot's transmission reaches every
//! node of its own cell and of the 8 surrounding cells (range `l = 2√2λ`
//! always suffices for those), and only those receptions drive the protocol.
//! Time is counted in logical steps. The source transmits at step 0; a cell
//! first reached at step `t` starts counting at `t + 1`.

use std::collections::VecDeque;
use std::f64::consts::SQRT_2;
use std::fmt::Write as _;

use crate::algorithms::{CellId, CellPartition};
use crate::error::{Error, Result};
use crate::grid::{Coord, Instance};

/// Stages of the collision-free schedule: colors `(cx mod 5, cy mod 5)`.
pub const STAGES: u64 = 25;

/// Which node of a cell transmits once the election phases are over.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PivotPolicy {
    /// `P[k mod ⌈γλ²⌉]`.
    #[default]
    RoundRobin,
    /// `P[1]` in every phase.
    Fixed,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub l: f64,
    pub lambda: f64,
    pub gamma: f64,
    pub battery: f64,
    pub beta: f64,
    pub staging: bool,
    pub policy: PivotPolicy,
    /// Source transmissions do not drain its battery.
    pub source_exempt: bool,
}

impl SimConfig {
    /// `λ = l/(2√2)`, `γ = p_min/2`, `β = 1`, unlimited battery.
    pub fn new(l: f64, p_min: f64) -> Self {
        SimConfig {
            l,
            lambda: l / (2.0 * SQRT_2),
            gamma: p_min / 2.0,
            battery: f64::INFINITY,
            beta: 1.0,
            staging: false,
            policy: PivotPolicy::RoundRobin,
            source_exempt: false,
        }
    }

    /// Number of election phases `⌈γλ²⌉`.
    pub fn rotations(&self) -> u64 {
        (self.gamma * self.lambda * self.lambda).ceil() as u64
    }

    /// Energy of one transmission, `β·l²`.
    pub fn tx_energy(&self) -> f64 {
        self.beta * self.l * self.l
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::InvalidParameter(format!("{name} = {v}")))
            }
        };
        positive("l", self.l)?;
        positive("lambda", self.lambda)?;
        positive("gamma", self.gamma)?;
        positive("beta", self.beta)?;
        if self.battery.is_nan() || self.battery <= 0.0 {
            return Err(Error::InvalidParameter(format!("battery = {}", self.battery)));
        }
        if self.gamma * self.lambda * self.lambda < 1.0 {
            return Err(Error::InvalidParameter(format!(
                "gamma * lambda^2 = {} is below 1",
                self.gamma * self.lambda * self.lambda
            )));
        }
        Ok(())
    }

    /// True when `l` is below `2√2·c·√(log₂ n)`, where the occupancy
    /// argument no longer guarantees enough nodes per cell.
    pub fn below_threshold(&self, n: u64, c: f64) -> bool {
        self.l < 2.0 * SQRT_2 * c * (n as f64).log2().sqrt()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NodeState {
    pub coord: Coord,
    pub cell: CellId,
    pub local_label: u32,
    pub counter: i64,
    pub active: bool,
    /// Pivot label recorded in each election phase.
    pub pivots: Vec<u32>,
    pub battery: f64,
    pub transmissions: u64,
}

/// One transmission of a phase.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceEvent {
    pub phase: u64,
    pub step: u64,
    pub cell: CellId,
    pub node: Coord,
    pub label: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhaseReport {
    pub phase: u64,
    /// Steps from the source's transmission to the last one, inclusive;
    /// multiplied by [`STAGES`] under staging.
    pub steps: u64,
    pub transmissions: u64,
    pub work: f64,
    /// Local label of the transmitting node, per cell in flat order.
    pub pivots: Vec<(CellId, u32)>,
    pub completed: bool,
    /// Node-slots in which a node heard two or more transmissions.
    pub collisions: u64,
    pub trace: Vec<TraceEvent>,
}

#[derive(Debug)]
pub struct RunSummary {
    pub reports: Vec<PhaseReport>,
    pub total_steps: u64,
    pub total_work: f64,
    pub phases_completed: u64,
    /// Why the run stopped before the requested number of phases.
    pub failure: Option<Error>,
}

impl RunSummary {
    pub fn amortized_steps(&self) -> f64 {
        if self.phases_completed == 0 {
            0.0
        } else {
            self.total_steps as f64 / self.phases_completed as f64
        }
    }
}

/// Complete protocol state for one instance and source.
#[derive(Debug, Clone)]
pub struct Simulation {
    config: SimConfig,
    partition: CellPartition,
    nodes: Vec<NodeState>,
    source: usize,
    source_cell: usize,
    /// Per cell (flat): node index by local label, `usize::MAX` if absent.
    by_label: Vec<Vec<usize>>,
    side_positions: u32,
    rotations: u64,
    phase: u64,
    unreachable: usize,
    eccentricity: u64,
}

impl Simulation {
    pub fn new(instance: &Instance, source: Coord, config: SimConfig) -> Result<Self> {
        config.validate()?;
        let s = instance.index_of(source).ok_or(Error::NotANode(source))?;
        let partition = CellPartition::new(instance, config.lambda)?;
        let side_positions = config.lambda.ceil() as u32;
        let max_label = (side_positions * side_positions) as usize;
        let mut by_label = vec![Vec::new(); partition.cell_count()];
        let mut nodes = Vec::with_capacity(instance.len());
        for (i, &c) in instance.nodes().iter().enumerate() {
            let cell = partition.cell_of(c);
            let ((x0, _), (y0, _)) = partition.bounds(cell);
            let local_label = (c.y - y0) * side_positions + (c.x - x0) + 1;
            let table = &mut by_label[partition.flat(cell)];
            if table.is_empty() {
                *table = vec![usize::MAX; max_label + 1];
            }
            table[local_label as usize] = i;
            nodes.push(NodeState {
                coord: c,
                cell,
                local_label,
                counter: -1,
                active: false,
                pivots: Vec::new(),
                battery: config.battery,
                transmissions: 0,
            });
        }
        let source_cell = partition.flat(partition.cell_of(source));
        let hops = cell_hops(&partition, source_cell);
        let unreachable = partition.non_empty().filter(|&id| hops[partition.flat(id)].is_none()).count();
        let eccentricity = hops.iter().flatten().copied().max().unwrap_or(0);
        let rotations = config.rotations();
        Ok(Simulation {
            config,
            partition,
            nodes,
            source: s,
            source_cell,
            by_label,
            side_positions,
            rotations,
            phase: 0,
            unreachable,
            eccentricity,
        })
    }

    pub fn config(&self) -> &SimConfig {
        &self.config
    }

    pub fn partition(&self) -> &CellPartition {
        &self.partition
    }

    pub fn nodes(&self) -> &[NodeState] {
        &self.nodes
    }

    /// Phases run so far.
    pub fn phase(&self) -> u64 {
        self.phase
    }

    /// `⌈γλ²⌉`.
    pub fn rotations(&self) -> u64 {
        self.rotations
    }

    /// Largest local label, `⌈λ⌉²`.
    pub fn max_label(&self) -> u32 {
        self.side_positions * self.side_positions
    }

    /// Hop eccentricity of the source's cell among non-empty cells.
    pub fn eccentricity(&self) -> u64 {
        self.eccentricity
    }

    /// Phases that elect a new pivot: all `⌈γλ²⌉` under round-robin, only
    /// the first under the fixed policy.
    pub fn election_phases(&self) -> u64 {
        match self.config.policy {
            PivotPolicy::RoundRobin => self.rotations,
            PivotPolicy::Fixed => 1,
        }
    }

    /// Smallest number of distinct pivots a cell other than the source's
    /// cycles through: `min(|cell|, election phases)`.
    pub fn min_pivot_pool(&self) -> Option<u64> {
        self.partition
            .non_empty()
            .filter(|&id| self.partition.flat(id) != self.source_cell)
            .map(|id| (self.partition.members(id).len() as u64).min(self.election_phases()))
            .min()
    }

    fn exempt(&self, node: usize) -> bool {
        self.config.source_exempt && node == self.source
    }

    fn transmit(&mut self, node: usize, cell: usize, phase: u64) -> Result<()> {
        let energy = self.config.tx_energy();
        if !self.exempt(node) {
            let n = &self.nodes[node];
            if (n.transmissions + 1) as f64 * energy > self.config.battery * (1.0 + 1e-12) {
                return Err(Error::BatteryDead { node: n.coord, cell: self.partition.id(cell), phase });
            }
            self.nodes[node].battery = self.config.battery - (n.transmissions + 1) as f64 * energy;
        }
        self.nodes[node].transmissions += 1;
        Ok(())
    }

    /// Pivot label of a cell in a phase after the elections.
    fn steady_label(&self, cell: usize, k: u64) -> u32 {
        let first = self.partition.members(self.partition.id(cell))[0];
        let history = &self.nodes[first].pivots;
        let slot = match self.config.policy {
            PivotPolicy::Fixed => 1,
            PivotPolicy::RoundRobin => match k % self.rotations {
                0 => self.rotations,
                r => r,
            },
        };
        history[slot as usize - 1]
    }

    /// Runs the next phase.
    pub fn run_phase(&mut self) -> Result<PhaseReport> {
        if self.unreachable > 0 {
            return Err(Error::EmptyCellUnreachable(self.unreachable));
        }
        let k = self.phase + 1;
        let election = k <= self.election_phases();
        let cells = self.partition.cell_count();
        let mut reached = vec![false; cells];
        let mut trace = Vec::new();
        let mut pivots = Vec::new();
        // Cells counting (election) or about to transmit (steady), by flat index.
        let mut waiting: Vec<usize> = Vec::new();
        let mut sending: Vec<(usize, usize)> = vec![(self.source_cell, self.source)];
        reached[self.source_cell] = true;
        let mut step = 0u64;
        let mut last_tx = 0u64;
        let mut collisions = 0u64;
        loop {
            for &(cell, node) in &sending {
                self.transmit(node, cell, k)?;
                let n = &self.nodes[node];
                trace.push(TraceEvent { phase: k, step, cell: n.cell, node: n.coord, label: n.local_label });
                pivots.push((n.cell, n.local_label));
                last_tx = step;
            }
            collisions += self.count_collisions(&sending);
            for &(cell, _) in &sending {
                let id = self.partition.id(cell);
                for nb in self.partition.neighbors(id).collect::<Vec<_>>() {
                    let f = self.partition.flat(nb);
                    if !reached[f] && !self.partition.members(nb).is_empty() {
                        reached[f] = true;
                        waiting.push(f);
                        if election {
                            for &i in self.partition.members(nb) {
                                self.nodes[i].active = true;
                            }
                        }
                    }
                }
            }
            if waiting.is_empty() {
                break;
            }
            step += 1;
            sending.clear();
            let mut still = Vec::new();
            for cell in waiting.drain(..) {
                if !election {
                    let label = self.steady_label(cell, k);
                    sending.push((cell, self.by_label[cell][label as usize]));
                    continue;
                }
                let id = self.partition.id(cell);
                let mut counter = 0;
                for &i in self.partition.members(id) {
                    self.nodes[i].counter += 1;
                    counter = self.nodes[i].counter;
                }
                if counter > self.max_label() as i64 {
                    return Err(Error::StalledCell { cell: id, phase: k });
                }
                let pivot = self.by_label[cell].get(counter as usize).copied().filter(|&p| p != usize::MAX);
                match pivot {
                    Some(p) => {
                        let label = self.nodes[p].local_label;
                        for &i in self.partition.members(id) {
                            self.nodes[i].pivots.push(label);
                            self.nodes[i].active = false;
                        }
                        sending.push((cell, p));
                    }
                    None => still.push(cell),
                }
            }
            waiting = still;
        }
        pivots.sort_by_key(|&(id, _)| self.partition.flat(id));
        let transmissions = trace.len() as u64;
        let factor = if self.config.staging { STAGES } else { 1 };
        self.phase = k;
        Ok(PhaseReport {
            phase: k,
            steps: (last_tx + 1) * factor,
            transmissions,
            work: transmissions as f64 * (self.config.l * self.config.l),
            pivots,
            completed: reached.iter().enumerate().all(|(f, &r)| r || self.partition.members(self.partition.id(f)).is_empty()),
            collisions,
            trace,
        })
    }

    /// Nodes hearing more than one of `sending` in the same slot: all of them
    /// in one slot without staging, one slot per color with staging.
    fn count_collisions(&self, sending: &[(usize, usize)]) -> u64 {
        let mut heard = vec![0u32; self.partition.cell_count()];
        let mut total = 0;
        let slots: Vec<Vec<usize>> = if self.config.staging {
            let mut by_color = vec![Vec::new(); STAGES as usize];
            for &(cell, _) in sending {
                by_color[stage_color(self.partition.id(cell)) as usize].push(cell);
            }
            by_color
        } else {
            vec![sending.iter().map(|&(c, _)| c).collect()]
        };
        for slot in slots.iter().filter(|s| s.len() > 1) {
            heard.iter_mut().for_each(|h| *h = 0);
            for &cell in slot {
                let id = self.partition.id(cell);
                heard[cell] += 1;
                for nb in self.partition.neighbors(id) {
                    heard[self.partition.flat(nb)] += 1;
                }
            }
            for (f, &h) in heard.iter().enumerate() {
                if h > 1 {
                    total += self.partition.members(self.partition.id(f)).len() as u64;
                }
            }
        }
        total
    }

    /// Runs up to `t` further phases, stopping at the first error.
    pub fn run_many(&mut self, t: u64) -> RunSummary {
        let mut summary = RunSummary { reports: Vec::new(), total_steps: 0, total_work: 0.0, phases_completed: 0, failure: None };
        for _ in 0..t {
            match self.run_phase() {
                Ok(r) => {
                    summary.total_steps += r.steps;
                    summary.total_work += r.work;
                    summary.phases_completed += 1;
                    summary.reports.push(r);
                }
                Err(e) => {
                    summary.failure = Some(e);
                    break;
                }
            }
        }
        summary
    }

    /// True when all nodes of every cell hold the same counter.
    pub fn counters_coherent(&self) -> bool {
        self.partition.non_empty().all(|id| {
            let m = self.partition.members(id);
            m.iter().all(|&i| self.nodes[i].counter == self.nodes[m[0]].counter && self.nodes[i].pivots == self.nodes[m[0]].pivots)
        })
    }
}

fn cell_hops(partition: &CellPartition, start: usize) -> Vec<Option<u64>> {
    let mut hops = vec![None; partition.cell_count()];
    hops[start] = Some(0);
    let mut queue = VecDeque::from([start]);
    while let Some(f) = queue.pop_front() {
        let d = hops[f].expect("queued cells have a distance");
        for nb in partition.neighbors(partition.id(f)) {
            let g = partition.flat(nb);
            if hops[g].is_none() && !partition.members(nb).is_empty() {
                hops[g] = Some(d + 1);
                queue.push_back(g);
            }
        }
    }
    hops
}

/// Stage of a cell, `(cx mod 5) + 5·(cy mod 5)`.
pub fn stage_color(id: CellId) -> u32 {
    id.0 % 5 + 5 * (id.1 % 5)
}

/// Color of every cell in flat order.
pub fn schedule_stages(partition: &CellPartition) -> Vec<u32> {
    (0..partition.cell_count()).map(|f| stage_color(partition.id(f))).collect()
}

/// Complete phases before a pivot runs out of battery.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Lifetime {
    pub including_source: u64,
    /// `None` when only the source ever transmits.
    pub excluding_source: Option<u64>,
}

fn phases_until_dead(instance: &Instance, source: Coord, config: SimConfig) -> Result<Option<u64>> {
    let mut sim = Simulation::new(instance, source, config)?;
    if sim.config.source_exempt && sim.partition.non_empty_count() == 1 {
        return Ok(None);
    }
    loop {
        match sim.run_phase() {
            Ok(_) => {}
            Err(Error::BatteryDead { .. }) => return Ok(Some(sim.phase())),
            Err(e) => return Err(e),
        }
    }
}

/// Lifetime under `config` (its battery must be finite), once counting the
/// source's own transmissions and once exempting them.
pub fn lifetime(instance: &Instance, source: Coord, config: &SimConfig) -> Result<Lifetime> {
    if !config.battery.is_finite() {
        return Err(Error::InvalidParameter("lifetime needs a finite battery".into()));
    }
    let including = phases_until_dead(instance, source, SimConfig { source_exempt: false, ..config.clone() })?
        .expect("the source drains its battery");
    let excluding = phases_until_dead(instance, source, SimConfig { source_exempt: true, ..config.clone() })?;
    Ok(Lifetime { including_source: including, excluding_source: excluding })
}

/// One line per transmission: `phase step cell_x cell_y x y label`.
pub fn trace_to_text(events: &[TraceEvent]) -> String {
    let mut out = String::from("# phase step cell_x cell_y x y label\n");
    for e in events {
        let _ = writeln!(out, "{} {} {} {} {} {} {}", e.phase, e.step, e.cell.0, e.cell.1, e.node.x, e.node.y, e.label);
    }
    out
}

pub fn trace_from_text(text: &str) -> Result<Vec<TraceEvent>> {
    let mut events = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let v: Vec<u64> = line
            .split_whitespace()
            .map(|t| t.parse::<u64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::Parse { line: i + 1, msg: e.to_string() })?;
        if v.len() != 7 {
            return Err(Error::Parse { line: i + 1, msg: format!("expected 7 fields, got {}", v.len()) });
        }
        let small = |x: u64| u32::try_from(x).map_err(|_| Error::Parse { line: i + 1, msg: format!("{x} out of range") });
        events.push(TraceEvent {
            phase: v[0],
            step: v[1],
            cell: (small(v[2])?, small(v[3])?),
            node: Coord::new(small(v[4])?, small(v[5])?),
            label: small(v[6])?,
        });
    }
    Ok(events)
}
