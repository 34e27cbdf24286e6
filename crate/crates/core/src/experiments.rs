//! Parameter-sweep harness: analytic and simulated attack probabilities over
//! hash-power grids, plot-ready CSV/JSON output, analytic-vs-simulation
//! alignment checks, and the four-regime design-table report.

use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::analytics::{attack_probability, Attack, McConfig, Method};
use crate::pow::{m_for_mapping, HashPowerMapping, PowError};
use crate::protocol::{
    resolve_threshold, ConsensusThresholdSpec, ProtocolError, ProtocolParams,
};
use crate::rng::derive_seed;
use crate::sim::run_trials;

const ROW_STREAM_TAG: u64 = 0x524f57;
const SIM_STREAM_TAG: u64 = 0x53494d;

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

/// Which attacks a sweep evaluates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AttackSelection {
    Bcp,
    Gft,
    Both,
}

impl AttackSelection {
    pub fn attacks(self) -> &'static [Attack] {
        match self {
            AttackSelection::Bcp => &[Attack::Bcp],
            AttackSelection::Gft => &[Attack::Gft],
            AttackSelection::Both => &[Attack::Bcp, Attack::Gft],
        }
    }
}

/// The system parameter a sweep varies besides the hash-power grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum VaryAxis {
    ShardExp(Vec<u32>),
    Capacity(Vec<u64>),
    Nodes(Vec<u64>),
    TauFraction(Vec<f64>),
}

/// Full description of one sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub attack: AttackSelection,
    pub nodes: u64,
    pub shard_exp: u32,
    pub capacity: u64,
    pub tau: ConsensusThresholdSpec,
    /// Adversary hash-power grid, interpreted via `mapping`.
    pub rho_grid: Vec<f64>,
    pub vary: Option<VaryAxis>,
    pub mapping: HashPowerMapping,
    /// When set, the node count tracks the varied shape as 2·N* + 1 so the
    /// honest pool always covers an epoch.
    pub auto_nodes: bool,
    /// Simulation trials per grid point.
    pub trials: u64,
    pub master_seed: u64,
    pub mc: McConfig,
    pub workers: usize,
}

impl SweepSpec {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        attack: AttackSelection,
        nodes: u64,
        shard_exp: u32,
        capacity: u64,
        tau: ConsensusThresholdSpec,
        rho_grid: Vec<f64>,
        trials: u64,
        master_seed: u64,
    ) -> Self {
        SweepSpec {
            attack,
            nodes,
            shard_exp,
            capacity,
            tau,
            rho_grid,
            vary: None,
            mapping: HashPowerMapping::default(),
            auto_nodes: false,
            trials,
            master_seed,
            mc: McConfig::with_seed(master_seed),
            workers: 0,
        }
    }
}

/// One sweep grid point, one attack. Serializes to the CSV schema
/// rho,M,N,s,c,tau,attack,p_analytic,p_analytic_raw,p_sim,ci_lo,ci_hi,trials,seed,method.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub rho: f64,
    #[serde(rename = "M")]
    pub m_sybil: u64,
    #[serde(rename = "N")]
    pub nodes: u64,
    pub s: u32,
    pub c: u64,
    pub tau: u64,
    pub attack: Attack,
    pub p_analytic: f64,
    pub p_analytic_raw: f64,
    pub p_sim: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    pub trials: u64,
    pub seed: u64,
    pub method: Method,
}

/// A grid combination that failed validation, with the reason.
#[derive(Debug, Clone, Serialize)]
pub struct SkippedCombination {
    pub rho: f64,
    pub nodes: u64,
    pub s: u32,
    pub c: u64,
    pub reason: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepOutput {
    pub rows: Vec<SweepRow>,
    pub skipped: Vec<SkippedCombination>,
}

#[derive(Debug, Clone, Copy)]
struct Combination {
    nodes: u64,
    shard_exp: u32,
    capacity: u64,
    tau_spec: ConsensusThresholdSpec,
}

fn combinations(spec: &SweepSpec) -> Vec<Combination> {
    let base = Combination {
        nodes: spec.nodes,
        shard_exp: spec.shard_exp,
        capacity: spec.capacity,
        tau_spec: spec.tau,
    };
    let mut combos = match &spec.vary {
        None => vec![base],
        Some(VaryAxis::ShardExp(values)) => values
            .iter()
            .map(|&s| Combination {
                shard_exp: s,
                ..base
            })
            .collect(),
        Some(VaryAxis::Capacity(values)) => values
            .iter()
            .map(|&c| Combination {
                capacity: c,
                ..base
            })
            .collect(),
        Some(VaryAxis::Nodes(values)) => values
            .iter()
            .map(|&n| Combination { nodes: n, ..base })
            .collect(),
        Some(VaryAxis::TauFraction(values)) => values
            .iter()
            .map(|&f| Combination {
                tau_spec: ConsensusThresholdSpec::Fraction(f),
                ..base
            })
            .collect(),
    };
    if spec.auto_nodes {
        for combo in &mut combos {
            combo.nodes = auto_node_count(combo.shard_exp, combo.capacity);
        }
    }
    combos
}

/// Node count used where a preset leaves N unstated: twice the epoch demand
/// plus one, so the honest pool alone covers N* and the Sybil pool fraction
/// equals rho under the default mapping.
pub fn auto_node_count(shard_exp: u32, capacity: u64) -> u64 {
    2 * (1u64 << shard_exp) * capacity + 1
}

/// Run every (combination × rho × attack) point: hybrid analytic probability
/// plus a seeded simulation. Rows come back in deterministic grid order;
/// invalid combinations are recorded, not fatal.
pub fn run_sweep(spec: &SweepSpec) -> SweepOutput {
    let mut rows = Vec::new();
    let mut skipped = Vec::new();

    for combo in combinations(spec) {
        for &rho in &spec.rho_grid {
            match evaluate_point(spec, combo, rho) {
                Ok(mut point_rows) => rows.append(&mut point_rows),
                Err(reason) => skipped.push(SkippedCombination {
                    rho,
                    nodes: combo.nodes,
                    s: combo.shard_exp,
                    c: combo.capacity,
                    reason,
                }),
            }
        }
    }
    SweepOutput { rows, skipped }
}

fn evaluate_point(
    spec: &SweepSpec,
    combo: Combination,
    rho: f64,
) -> Result<Vec<SweepRow>, String> {
    let tau = resolve_threshold(combo.tau_spec, combo.capacity).map_err(|e| e.to_string())?;
    let params = ProtocolParams::new(combo.nodes, combo.shard_exp, combo.capacity, tau)
        .map_err(|e: ProtocolError| e.to_string())?;
    let m_sybil =
        m_for_mapping(spec.mapping, rho, combo.nodes).map_err(|e: PowError| e.to_string())?;
    crate::protocol::validate_params(&params, m_sybil).map_err(|e| e.to_string())?;

    let row_seed = derive_seed(
        spec.master_seed,
        &[
            ROW_STREAM_TAG,
            combo.nodes,
            combo.shard_exp as u64,
            combo.capacity,
            tau,
            m_sybil,
        ],
    );
    let sim_seed = derive_seed(row_seed, &[SIM_STREAM_TAG]);
    let report = run_trials(&params, m_sybil, spec.trials, sim_seed, spec.workers)
        .map_err(|e| e.to_string())?;

    let mut rows = Vec::new();
    for &attack in spec.attack.attacks() {
        let mc = McConfig {
            seed: row_seed,
            ..spec.mc
        };
        let analytic = attack_probability(attack, m_sybil, &params, &mc)
            .map_err(|e| e.to_string())?;
        let (p_sim, ci) = match attack {
            Attack::Bcp => (report.p_bcp_hat, report.ci_bcp),
            Attack::Gft => (report.p_gft_hat, report.ci_gft),
        };
        rows.push(SweepRow {
            rho,
            m_sybil,
            nodes: combo.nodes,
            s: combo.shard_exp,
            c: combo.capacity,
            tau,
            attack,
            p_analytic: analytic.value,
            p_analytic_raw: analytic.raw_value,
            p_sim,
            ci_lo: ci.0,
            ci_hi: ci.1,
            trials: spec.trials,
            seed: row_seed,
            method: analytic.method,
        });
    }
    Ok(rows)
}

/// Serialize rows with the exact CSV schema header.
pub fn write_csv<W: Write>(rows: &[SweepRow], writer: W) -> Result<(), ExperimentError> {
    let mut w = csv::Writer::from_writer(writer);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_csv_path<P: AsRef<Path>>(rows: &[SweepRow], path: P) -> Result<(), ExperimentError> {
    let file = std::fs::File::create(path)?;
    write_csv(rows, file)
}

pub fn read_csv_path<P: AsRef<Path>>(path: P) -> Result<Vec<SweepRow>, ExperimentError> {
    let mut reader = csv::Reader::from_path(path)?;
    let mut rows = Vec::new();
    for row in reader.deserialize() {
        rows.push(row?);
    }
    Ok(rows)
}

pub fn write_json_path<P: AsRef<Path>>(rows: &[SweepRow], path: P) -> Result<(), ExperimentError> {
    let file = std::fs::File::create(path)?;
    serde_json::to_writer_pretty(file, rows)?;
    Ok(())
}

/// One row that fell outside the simulated confidence interval plus slack.
#[derive(Debug, Clone, Serialize)]
pub struct AlignmentFailure {
    pub rho: f64,
    pub attack: Attack,
    pub p_analytic: f64,
    pub p_sim: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    pub gap: f64,
}

/// Analytic-vs-simulated agreement over a set of sweep rows.
#[derive(Debug, Clone, Serialize)]
pub struct AlignmentReport {
    pub rows_checked: usize,
    /// max |p_analytic − p_sim| over all rows.
    pub max_gap: f64,
    pub slack: f64,
    /// True when every analytic value lies within [ci_lo − slack, ci_hi + slack].
    pub pass: bool,
    pub failures: Vec<AlignmentFailure>,
}

pub fn validate_alignment(rows: &[SweepRow], slack: f64) -> AlignmentReport {
    let mut max_gap = 0.0f64;
    let mut failures = Vec::new();
    for row in rows {
        let gap = (row.p_analytic - row.p_sim).abs();
        max_gap = max_gap.max(gap);
        if row.p_analytic < row.ci_lo - slack || row.p_analytic > row.ci_hi + slack {
            failures.push(AlignmentFailure {
                rho: row.rho,
                attack: row.attack,
                p_analytic: row.p_analytic,
                p_sim: row.p_sim,
                ci_lo: row.ci_lo,
                ci_hi: row.ci_hi,
                gap,
            });
        }
    }
    AlignmentReport {
        rows_checked: rows.len(),
        max_gap,
        slack,
        pass: failures.is_empty(),
        failures,
    }
}

/// Named reproduction presets for the model-verification and
/// parameter-effect sweeps.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Figure {
    Fig2a,
    Fig2b,
    Fig2c,
    Fig3a,
    Fig3b,
    Fig3c,
    Fig3d,
    Fig4a,
    Fig4b,
    Fig4c,
    Fig4d,
}

impl FromStr for Figure {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "2a" => Ok(Figure::Fig2a),
            "2b" => Ok(Figure::Fig2b),
            "2c" => Ok(Figure::Fig2c),
            "3a" => Ok(Figure::Fig3a),
            "3b" => Ok(Figure::Fig3b),
            "3c" => Ok(Figure::Fig3c),
            "3d" => Ok(Figure::Fig3d),
            "4a" => Ok(Figure::Fig4a),
            "4b" => Ok(Figure::Fig4b),
            "4c" => Ok(Figure::Fig4c),
            "4d" => Ok(Figure::Fig4d),
            other => Err(format!(
                "unknown figure '{other}'; expected one of 2a 2b 2c 3a 3b 3c 3d 4a 4b 4c 4d"
            )),
        }
    }
}

/// rho grid 0, 0.01, …, 0.90.
pub fn default_rho_grid() -> Vec<f64> {
    (0..=90).map(|i| i as f64 / 100.0).collect()
}

/// rho grid 0, 0.05, …, 0.90.
pub fn coarse_rho_grid() -> Vec<f64> {
    (0..=18).map(|i| i as f64 * 0.05).collect()
}

const TWO_THIRDS: f64 = 2.0 / 3.0;

impl Figure {
    pub fn file_stem(self) -> &'static str {
        match self {
            Figure::Fig2a => "fig2a",
            Figure::Fig2b => "fig2b",
            Figure::Fig2c => "fig2c",
            Figure::Fig3a => "fig3a",
            Figure::Fig3b => "fig3b",
            Figure::Fig3c => "fig3c",
            Figure::Fig3d => "fig3d",
            Figure::Fig4a => "fig4a",
            Figure::Fig4b => "fig4b",
            Figure::Fig4c => "fig4c",
            Figure::Fig4d => "fig4d",
        }
    }

    /// The sweep this preset encodes. Node counts the source setups leave
    /// unstated follow `auto_node_count`.
    pub fn spec(self, trials: u64, master_seed: u64) -> SweepSpec {
        let tau = ConsensusThresholdSpec::Fraction(TWO_THIRDS);
        let grid = default_rho_grid();
        let base = |attack, nodes, s, c| {
            SweepSpec::new(attack, nodes, s, c, tau, grid.clone(), trials, master_seed)
        };
        match self {
            Figure::Fig2a => base(AttackSelection::Bcp, 14, 2, 3),
            Figure::Fig2b => base(AttackSelection::Bcp, 200, 2, 50),
            Figure::Fig2c => base(AttackSelection::Gft, 20, 2, 4),
            Figure::Fig3a | Figure::Fig4a => {
                let attack = if self == Figure::Fig3a {
                    AttackSelection::Bcp
                } else {
                    AttackSelection::Gft
                };
                let mut spec = base(attack, 0, 2, 100);
                spec.vary = Some(VaryAxis::ShardExp(vec![2, 3, 4]));
                spec.auto_nodes = true;
                spec
            }
            Figure::Fig3b | Figure::Fig4b => {
                let attack = if self == Figure::Fig3b {
                    AttackSelection::Bcp
                } else {
                    AttackSelection::Gft
                };
                let mut spec = base(attack, 0, 4, 100);
                spec.vary = Some(VaryAxis::Capacity(vec![100, 200, 400, 600]));
                spec.auto_nodes = true;
                spec
            }
            Figure::Fig3c | Figure::Fig4c => {
                let attack = if self == Figure::Fig3c {
                    AttackSelection::Bcp
                } else {
                    AttackSelection::Gft
                };
                let mut spec = base(attack, 2000, 4, 100);
                spec.vary = Some(VaryAxis::Nodes(vec![2000, 2500, 3000]));
                spec
            }
            Figure::Fig3d | Figure::Fig4d => {
                let attack = if self == Figure::Fig3d {
                    AttackSelection::Bcp
                } else {
                    AttackSelection::Gft
                };
                let mut spec = base(attack, auto_node_count(4, 100), 4, 100);
                spec.vary = Some(VaryAxis::TauFraction(vec![0.52, 0.6, TWO_THIRDS, 0.75]));
                spec
            }
        }
    }
}

/// The (shard exponent, capacity) grid the parameter-effect sweeps cover.
pub fn design_grid() -> Vec<(u32, u64)> {
    let mut cells = Vec::new();
    for s in [2u32, 3, 4] {
        for c in [100u64, 200, 400, 600] {
            cells.push((s, c));
        }
    }
    cells
}

/// One evaluated design-table cell.
#[derive(Debug, Clone, Serialize)]
pub struct Table2Cell {
    pub rho: f64,
    pub s: u32,
    pub c: u64,
    pub nodes: u64,
    pub tau: u64,
    #[serde(rename = "M")]
    pub m_sybil: u64,
    pub p_bcp: f64,
    pub p_gft: f64,
    /// GFT successes over the simulated trials; only where the regime's
    /// claim is about observed zeros.
    pub gft_sim_successes: Option<u64>,
    pub sim_trials: Option<u64>,
}

/// One hash-power regime of the design table.
#[derive(Debug, Clone, Serialize)]
pub struct Table2RowReport {
    pub label: String,
    pub expectation: String,
    pub cells: Vec<Table2Cell>,
    pub satisfied: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct Table2Report {
    pub trials: u64,
    pub seed: u64,
    pub rows: Vec<Table2RowReport>,
}

fn table2_cell(
    rho: f64,
    s: u32,
    c: u64,
    trials: u64,
    master_seed: u64,
    simulate_gft: bool,
) -> Result<Table2Cell, String> {
    let nodes = auto_node_count(s, c);
    let tau = resolve_threshold(ConsensusThresholdSpec::Fraction(TWO_THIRDS), c)
        .map_err(|e| e.to_string())?;
    let params = ProtocolParams::new(nodes, s, c, tau).map_err(|e| e.to_string())?;
    let m_sybil = m_for_mapping(HashPowerMapping::FractionOfTotal, rho, nodes)
        .map_err(|e| e.to_string())?;
    let row_seed = derive_seed(
        master_seed,
        &[ROW_STREAM_TAG, nodes, s as u64, c, tau, m_sybil],
    );
    let mc = McConfig {
        seed: row_seed,
        ..McConfig::default()
    };
    let p_bcp = attack_probability(Attack::Bcp, m_sybil, &params, &mc)
        .map_err(|e| e.to_string())?
        .value;
    let p_gft = attack_probability(Attack::Gft, m_sybil, &params, &mc)
        .map_err(|e| e.to_string())?
        .value;
    let (gft_sim_successes, sim_trials) = if simulate_gft {
        let sim_seed = derive_seed(row_seed, &[SIM_STREAM_TAG]);
        let report =
            run_trials(&params, m_sybil, trials, sim_seed, 0).map_err(|e| e.to_string())?;
        (Some(report.gft_successes), Some(trials))
    } else {
        (None, None)
    };
    Ok(Table2Cell {
        rho,
        s,
        c,
        nodes,
        tau,
        m_sybil,
        p_bcp,
        p_gft,
        gft_sim_successes,
        sim_trials,
    })
}

/// Evaluate the four design-table regimes with τ = 2/3 on the standard
/// design grid.
pub fn table2_report(trials: u64, master_seed: u64) -> Table2Report {
    table2_report_on_grid(trials, master_seed, &design_grid())
}

/// Same report on a caller-chosen (shard exponent, capacity) grid.
///
/// Rows quoting explicit shape bounds ("at most 16 shards, at least 600
/// capacity") run on the c >= 600 cells; rows with unconstrained shape run
/// on the whole grid.
pub fn table2_report_on_grid(trials: u64, master_seed: u64, grid: &[(u32, u64)]) -> Table2Report {
    let constrained: Vec<(u32, u64)> = grid.iter().copied().filter(|&(_, c)| c >= 600).collect();
    let full: Vec<(u32, u64)> = grid.to_vec();

    let mut rows = Vec::new();

    // rho = 0.25: P_B <= 1e-4 and no GFT success observed.
    {
        let mut cells = Vec::new();
        for &(s, c) in &constrained {
            if let Ok(cell) = table2_cell(0.25, s, c, trials, master_seed, true) {
                cells.push(cell);
            }
        }
        let satisfied = !cells.is_empty()
            && cells
                .iter()
                .all(|cell| cell.p_bcp <= 1e-4 && cell.gft_sim_successes == Some(0));
        rows.push(Table2RowReport {
            label: "hash-power 25%".to_string(),
            expectation: "P_B <= 1e-4 and zero simulated GFT successes".to_string(),
            cells,
            satisfied,
        });
    }

    // rho in [0.33, 0.53]: P_B >= 0.8 and P_G <= 0.005 (checked at both ends).
    {
        let mut cells = Vec::new();
        for &rho in &[0.33, 0.53] {
            for &(s, c) in &full {
                if let Ok(cell) = table2_cell(rho, s, c, trials, master_seed, false) {
                    cells.push(cell);
                }
            }
        }
        let satisfied = !cells.is_empty()
            && cells.iter().all(|cell| cell.p_bcp >= 0.8 && cell.p_gft <= 0.005);
        rows.push(Table2RowReport {
            label: "hash-power 33%..53%".to_string(),
            expectation: "P_B >= 0.8 and P_G <= 0.005".to_string(),
            cells,
            satisfied,
        });
    }

    // rho = 0.56: P_B = 1 and P_G <= 0.001.
    {
        let mut cells = Vec::new();
        for &(s, c) in &constrained {
            if let Ok(cell) = table2_cell(0.56, s, c, trials, master_seed, false) {
                cells.push(cell);
            }
        }
        let satisfied = !cells.is_empty()
            && cells
                .iter()
                .all(|cell| (cell.p_bcp - 1.0).abs() <= 1e-3 && cell.p_gft <= 0.001);
        rows.push(Table2RowReport {
            label: "hash-power 56%".to_string(),
            expectation: "P_B = 1 and P_G <= 0.001".to_string(),
            cells,
            satisfied,
        });
    }

    // rho > 0.66 (evaluated at 0.67): P_B = 1 and P_G >= 0.75 somewhere.
    {
        let mut cells = Vec::new();
        for &(s, c) in &full {
            if let Ok(cell) = table2_cell(0.67, s, c, trials, master_seed, false) {
                cells.push(cell);
            }
        }
        let satisfied = !cells.is_empty()
            && cells.iter().all(|cell| (cell.p_bcp - 1.0).abs() <= 1e-3)
            && cells.iter().any(|cell| cell.p_gft >= 0.75);
        rows.push(Table2RowReport {
            label: "hash-power above 66%".to_string(),
            expectation: "P_B = 1 and P_G >= 0.75 at some grid cell".to_string(),
            cells,
            satisfied,
        });
    }

    Table2Report {
        trials,
        seed: master_seed,
        rows,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_spec(rho_grid: Vec<f64>) -> SweepSpec {
        let mut spec = SweepSpec::new(
            AttackSelection::Both,
            14,
            2,
            3,
            ConsensusThresholdSpec::Fraction(TWO_THIRDS),
            rho_grid,
            2_000,
            7,
        );
        spec.mc = McConfig {
            max_trials: 4_000,
            seed: 7,
            ..McConfig::default()
        };
        spec
    }

    #[test]
    fn empty_grid_yields_no_rows() {
        let out = run_sweep(&small_spec(vec![]));
        assert!(out.rows.is_empty());
        assert!(out.skipped.is_empty());
    }

    #[test]
    fn rows_follow_grid_order_and_attacks() {
        let out = run_sweep(&small_spec(vec![0.0, 0.4]));
        assert_eq!(out.rows.len(), 4);
        assert_eq!(out.rows[0].rho, 0.0);
        assert_eq!(out.rows[0].attack, Attack::Bcp);
        assert_eq!(out.rows[1].attack, Attack::Gft);
        assert_eq!(out.rows[2].rho, 0.4);
        // rho 0 with no Sybil IDs: both attacks impossible.
        assert_eq!(out.rows[0].p_analytic, 0.0);
        assert_eq!(out.rows[0].p_sim, 0.0);
    }

    #[test]
    fn invalid_combinations_are_recorded_not_fatal() {
        // N=10 cannot supply N*=12 at rho 0.
        let mut spec = small_spec(vec![0.0, 0.6]);
        spec.nodes = 10;
        let out = run_sweep(&spec);
        assert!(!out.skipped.is_empty());
        assert!(out.skipped.iter().any(|s| s.reason.contains("pool")));
        // At rho 0.6 the adversary brings enough IDs to start the epoch.
        assert!(!out.rows.is_empty());
    }

    #[test]
    fn sweep_is_deterministic() {
        let spec = small_spec(vec![0.3, 0.5]);
        let a = run_sweep(&spec);
        let b = run_sweep(&spec);
        let mut buf_a = Vec::new();
        let mut buf_b = Vec::new();
        write_csv(&a.rows, &mut buf_a).unwrap();
        write_csv(&b.rows, &mut buf_b).unwrap();
        assert_eq!(buf_a, buf_b);
    }

    #[test]
    fn csv_header_matches_schema() {
        let out = run_sweep(&small_spec(vec![0.2]));
        let mut buf = Vec::new();
        write_csv(&out.rows, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let header = text.lines().next().unwrap();
        assert_eq!(
            header,
            "rho,M,N,s,c,tau,attack,p_analytic,p_analytic_raw,p_sim,ci_lo,ci_hi,trials,seed,method"
        );
    }

    #[test]
    fn csv_roundtrip() {
        let out = run_sweep(&small_spec(vec![0.2, 0.5]));
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("rows.csv");
        write_csv_path(&out.rows, &path).unwrap();
        let back = read_csv_path(&path).unwrap();
        assert_eq!(out.rows, back);
    }

    #[test]
    fn alignment_trivial_cases() {
        let out = run_sweep(&small_spec(vec![0.0]));
        let mut rows = out.rows;
        // Identical columns: gap 0, pass.
        rows[0].p_sim = rows[0].p_analytic;
        let report = validate_alignment(&rows, 0.0);
        assert_eq!(report.max_gap, 0.0);
        assert!(report.pass);

        // Analytic 0.5 against sim 0.5 ± 0.01.
        rows[0].p_analytic = 0.5;
        rows[0].p_sim = 0.5;
        rows[0].ci_lo = 0.49;
        rows[0].ci_hi = 0.51;
        let report = validate_alignment(&rows[..1], 0.0);
        assert!(report.pass);

        // Analytic far outside the CI fails.
        rows[0].p_analytic = 0.9;
        let report = validate_alignment(&rows[..1], 0.02);
        assert!(!report.pass);
        assert_eq!(report.failures.len(), 1);
    }

    #[test]
    fn figure_presets_parse_and_shape() {
        for (name, fig) in [
            ("2a", Figure::Fig2a),
            ("2b", Figure::Fig2b),
            ("2c", Figure::Fig2c),
            ("3b", Figure::Fig3b),
            ("4d", Figure::Fig4d),
        ] {
            assert_eq!(name.parse::<Figure>().unwrap(), fig);
        }
        assert!("5x".parse::<Figure>().is_err());

        let spec = Figure::Fig2a.spec(1000, 42);
        assert_eq!((spec.nodes, spec.shard_exp, spec.capacity), (14, 2, 3));
        assert_eq!(spec.rho_grid.len(), 91);

        let spec = Figure::Fig3b.spec(1000, 42);
        assert!(spec.auto_nodes);
        assert!(matches!(spec.vary, Some(VaryAxis::Capacity(_))));
    }

    #[test]
    fn auto_node_count_covers_epoch() {
        assert_eq!(auto_node_count(2, 3), 25);
        assert_eq!(auto_node_count(4, 600), 19_201);
    }
}
