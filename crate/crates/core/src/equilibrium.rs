//! Best responses and pure Nash equilibria on a discretized strategy space.
//!
//! Grid points are ordered by `θ` index first, then `φ` index; every
//! reduction breaks ties toward the lowest index, so results do not depend
//! on evaluation order even though payoff tables are filled in parallel.

use std::f64::consts::{FRAC_PI_2, PI};

use rayon::prelude::*;
use serde::{Serialize, Serializer};

use crate::cmath::{omega_unchecked, Matrix2};
use crate::engine::{evolve_operators, Agent, EngineConfig, EvolutionPath, StrategyParams};
use crate::error::{check_range, Error, Result};
use crate::games::{expected_payoffs, PayoffMatrix, PayoffPair};

/// Default equilibrium tolerance, in payoff units.
pub const EQUILIBRIUM_TOL: f64 = 1e-9;

/// Two payoffs closer than this are treated as a tie.
const TIE_TOL: f64 = 1e-12;

/// Evenly spaced grid over `[0,π] × [0,π/2]`, endpoints included.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct StrategyGrid {
    theta_steps: usize,
    phi_steps: usize,
}

impl Default for StrategyGrid {
    /// 33 × 17, i.e. steps of π/32 on both axes.
    fn default() -> Self {
        StrategyGrid {
            theta_steps: 33,
            phi_steps: 17,
        }
    }
}

fn axis_value(i: usize, steps: usize, hi: f64) -> f64 {
    if i + 1 == steps {
        hi
    } else {
        hi * i as f64 / (steps - 1) as f64
    }
}

impl StrategyGrid {
    pub fn new(theta_steps: usize, phi_steps: usize) -> Result<Self> {
        if theta_steps < 2 || phi_steps < 2 {
            return Err(Error::InvalidGrid(format!(
                "need at least 2 steps per axis, got {theta_steps}x{phi_steps}"
            )));
        }
        Ok(StrategyGrid {
            theta_steps,
            phi_steps,
        })
    }

    pub fn theta_steps(&self) -> usize {
        self.theta_steps
    }

    pub fn phi_steps(&self) -> usize {
        self.phi_steps
    }

    pub fn len(&self) -> usize {
        self.theta_steps * self.phi_steps
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn point(&self, theta_index: usize, phi_index: usize) -> StrategyParams {
        StrategyParams::new(
            axis_value(theta_index, self.theta_steps, PI),
            axis_value(phi_index, self.phi_steps, FRAC_PI_2),
        )
        .expect("grid points lie inside the strategy ranges")
    }

    /// Point at flat index `k = θ index · phi_steps + φ index`.
    pub fn at(&self, k: usize) -> StrategyParams {
        self.point(k / self.phi_steps, k % self.phi_steps)
    }

    pub fn points(&self) -> Vec<StrategyParams> {
        (0..self.len()).map(|k| self.at(k)).collect()
    }

    /// Flat index of an exact grid point.
    pub fn index_of(&self, s: &StrategyParams) -> Option<usize> {
        (0..self.len()).find(|&k| self.at(k) == *s)
    }
}

/// Expected payoffs of every profile over a finite strategy list,
/// row-major in (agent 1, agent 2).
#[derive(Debug, Clone)]
pub struct PayoffTable {
    strategies: Vec<StrategyParams>,
    payoffs: Vec<PayoffPair>,
}

impl PayoffTable {
    pub fn compute(m: &PayoffMatrix, cfg: &EngineConfig, grid: &StrategyGrid) -> Self {
        Self::over(grid.points(), m, cfg)
    }

    /// Table over an arbitrary strategy list (both agents share it).
    pub fn over(strategies: Vec<StrategyParams>, m: &PayoffMatrix, cfg: &EngineConfig) -> Self {
        let ops: Vec<Matrix2> = strategies.iter().map(|s| s.operator()).collect();
        let n = ops.len();
        let gamma = cfg.gamma();
        let payoffs = (0..n * n)
            .into_par_iter()
            .map(|k| {
                let delta =
                    evolve_operators(&ops[k / n], &ops[k % n], gamma, EvolutionPath::Shortcut);
                expected_payoffs(m, &delta)
            })
            .collect();
        PayoffTable {
            strategies,
            payoffs,
        }
    }

    pub fn strategies(&self) -> &[StrategyParams] {
        &self.strategies
    }

    pub fn get(&self, k1: usize, k2: usize) -> PayoffPair {
        self.payoffs[k1 * self.strategies.len() + k2]
    }

    pub fn iter(&self) -> impl Iterator<Item = ((usize, usize), PayoffPair)> + '_ {
        let n = self.strategies.len();
        self.payoffs
            .iter()
            .enumerate()
            .map(move |(k, p)| ((k / n, k % n), *p))
    }
}

/// Lowest-index argmax with tie tolerance.
fn argmax(values: impl Iterator<Item = f64>) -> (usize, f64) {
    let mut best = (0, f64::NEG_INFINITY);
    for (k, v) in values.enumerate() {
        if v > best.1 + TIE_TOL {
            best = (k, v);
        }
    }
    best
}

/// Agent 1's best grid response to `opponent` (played by agent 2).
pub fn best_response(
    opponent: &StrategyParams,
    m: &PayoffMatrix,
    cfg: &EngineConfig,
    grid: &StrategyGrid,
) -> (StrategyParams, f64) {
    best_response_for(Agent::One, &opponent.operator(), m, cfg, grid)
}

/// Best grid response of `responder` against an arbitrary local operator
/// played from the other seat.
pub fn best_response_for(
    responder: Agent,
    opponent: &Matrix2,
    m: &PayoffMatrix,
    cfg: &EngineConfig,
    grid: &StrategyGrid,
) -> (StrategyParams, f64) {
    let points = grid.points();
    let payoffs = points
        .iter()
        .map(|s| responder_payoff(responder, &s.operator(), opponent, m, cfg));
    let (k, v) = argmax(payoffs);
    (points[k], v)
}

fn responder_payoff(
    responder: Agent,
    own: &Matrix2,
    opponent: &Matrix2,
    m: &PayoffMatrix,
    cfg: &EngineConfig,
) -> f64 {
    match responder {
        Agent::One => {
            let d = evolve_operators(own, opponent, cfg.gamma(), EvolutionPath::Shortcut);
            expected_payoffs(m, &d).0
        }
        Agent::Two => {
            let d = evolve_operators(opponent, own, cfg.gamma(), EvolutionPath::Shortcut);
            expected_payoffs(m, &d).1
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EquilibriumReport {
    pub profile: (StrategyParams, StrategyParams),
    pub payoffs: PayoffPair,
    /// Largest unilateral grid improvement available to either agent.
    pub max_deviation_gain: f64,
    pub is_pareto_efficient_among_grid: bool,
}

#[derive(Serialize)]
struct EquilibriumJson {
    profile: [[f64; 2]; 2],
    payoffs: [f64; 2],
    max_deviation_gain: f64,
    pareto: bool,
}

impl Serialize for EquilibriumReport {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let (a, b) = self.profile;
        EquilibriumJson {
            profile: [[a.theta(), a.phi()], [b.theta(), b.phi()]],
            payoffs: [self.payoffs.0, self.payoffs.1],
            max_deviation_gain: self.max_deviation_gain,
            pareto: self.is_pareto_efficient_among_grid,
        }
        .serialize(s)
    }
}

/// All grid profiles at which no agent gains more than `tol` by a
/// unilateral grid deviation.
pub fn find_pure_grid_equilibria(
    m: &PayoffMatrix,
    cfg: &EngineConfig,
    grid: &StrategyGrid,
    tol: f64,
) -> Vec<EquilibriumReport> {
    let table = PayoffTable::compute(m, cfg, grid);
    equilibria_from_table(&table, tol)
}

/// Like [`find_pure_grid_equilibria`] over an explicit strategy list.
pub fn find_equilibria_among(
    strategies: Vec<StrategyParams>,
    m: &PayoffMatrix,
    cfg: &EngineConfig,
    tol: f64,
) -> Vec<EquilibriumReport> {
    equilibria_from_table(&PayoffTable::over(strategies, m, cfg), tol)
}

pub fn equilibria_from_table(table: &PayoffTable, tol: f64) -> Vec<EquilibriumReport> {
    let strategies = table.strategies();
    let n = strategies.len();
    // best1[k2]: agent 1's best payoff against column k2; best2[k1] likewise.
    let best1: Vec<f64> = (0..n)
        .map(|k2| {
            (0..n)
                .map(|k1| table.get(k1, k2).0)
                .fold(f64::NEG_INFINITY, f64::max)
        })
        .collect();
    let best2: Vec<f64> = (0..n)
        .map(|k1| {
            (0..n)
                .map(|k2| table.get(k1, k2).1)
                .fold(f64::NEG_INFINITY, f64::max)
        })
        .collect();

    let all: Vec<PayoffPair> = table.iter().map(|(_, p)| p).collect();
    table
        .iter()
        .filter_map(|((k1, k2), (u1, u2))| {
            let gain = (best1[k2] - u1).max(best2[k1] - u2);
            (gain <= tol).then_some((k1, k2, (u1, u2), gain))
        })
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|(k1, k2, payoffs, gain)| EquilibriumReport {
            profile: (strategies[k1], strategies[k2]),
            payoffs,
            max_deviation_gain: gain,
            is_pareto_efficient_among_grid: !all.iter().any(|q| dominates(*q, payoffs, TIE_TOL)),
        })
        .collect()
}

/// `q` is at least as good for both and better by more than `eps` for one.
fn dominates(q: PayoffPair, p: PayoffPair, eps: f64) -> bool {
    q.0 >= p.0 && q.1 >= p.1 && (q.0 > p.0 + eps || q.1 > p.1 + eps)
}

/// Pure profiles `(row, col)` of a 2×2 bimatrix where each strategy is a
/// weak best reply to the other.
pub fn enumerate_2x2_pure_ne(m: &PayoffMatrix) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for r in 0..2 {
        for c in 0..2 {
            let (u1, u2) = m.cell(r, c);
            let row_ok = u1 >= m.cell(1 - r, c).0;
            let col_ok = u2 >= m.cell(r, 1 - c).1;
            if row_ok && col_ok {
                out.push((r, c));
            }
        }
    }
    out
}

/// Items whose payoff pair is not Pareto-dominated by another item's.
pub fn pareto_filter<T: Clone>(items: &[(T, PayoffPair)]) -> Result<Vec<(T, PayoffPair)>> {
    if items.is_empty() {
        return Err(Error::EmptyInput(
            "pareto_filter needs at least one profile",
        ));
    }
    Ok(items
        .iter()
        .filter(|(_, p)| !items.iter().any(|(_, q)| dominates(*q, *p, 0.0)))
        .cloned()
        .collect())
}

/// A local operator from the three-parameter family
/// `[[e^{iφ}cos(θ/2), i e^{iα} sin(θ/2)], [i e^{−iα} sin(θ/2), e^{−iφ}cos(θ/2)]]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ThreeParamStrategy {
    theta: f64,
    phi: f64,
    alpha: f64,
}

impl ThreeParamStrategy {
    pub fn new(theta: f64, phi: f64, alpha: f64) -> Result<Self> {
        check_range("theta", theta, 0.0, PI)?;
        check_range("phi", phi, 0.0, FRAC_PI_2)?;
        check_range("alpha", alpha, 0.0, FRAC_PI_2)?;
        Ok(ThreeParamStrategy { theta, phi, alpha })
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn operator(&self) -> Matrix2 {
        omega_unchecked(self.theta, self.phi, self.alpha)
    }
}

impl From<StrategyParams> for ThreeParamStrategy {
    fn from(s: StrategyParams) -> Self {
        ThreeParamStrategy {
            theta: s.theta(),
            phi: s.phi(),
            alpha: 0.0,
        }
    }
}

/// Grid over `[0,π] × [0,π/2] × [0,π/2]`. An `alpha_steps` of 1 keeps only
/// the `α = 0` slice.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ThreeParamGrid {
    theta_steps: usize,
    phi_steps: usize,
    alpha_steps: usize,
}

impl Default for ThreeParamGrid {
    /// 17 × 9 × 9.
    fn default() -> Self {
        ThreeParamGrid {
            theta_steps: 17,
            phi_steps: 9,
            alpha_steps: 9,
        }
    }
}

impl ThreeParamGrid {
    pub fn new(theta_steps: usize, phi_steps: usize, alpha_steps: usize) -> Result<Self> {
        if theta_steps < 2 || phi_steps < 2 || alpha_steps < 1 {
            return Err(Error::InvalidGrid(format!(
                "need θ, φ steps ≥ 2 and α steps ≥ 1, got {theta_steps}x{phi_steps}x{alpha_steps}"
            )));
        }
        Ok(ThreeParamGrid {
            theta_steps,
            phi_steps,
            alpha_steps,
        })
    }

    pub fn points(&self) -> Vec<ThreeParamStrategy> {
        let alpha_at = |k: usize| {
            if self.alpha_steps == 1 {
                0.0
            } else {
                axis_value(k, self.alpha_steps, FRAC_PI_2)
            }
        };
        let mut out = Vec::with_capacity(self.theta_steps * self.phi_steps * self.alpha_steps);
        for i in 0..self.theta_steps {
            for j in 0..self.phi_steps {
                for k in 0..self.alpha_steps {
                    out.push(ThreeParamStrategy {
                        theta: axis_value(i, self.theta_steps, PI),
                        phi: axis_value(j, self.phi_steps, FRAC_PI_2),
                        alpha: alpha_at(k),
                    });
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DeviationProbe {
    pub deviator: Agent,
    pub strategy: ThreeParamStrategy,
    /// Deviator's payoff after deviating.
    pub payoff: f64,
    /// Deviator's payoff at the probed profile.
    pub baseline: f64,
    pub gain: f64,
}

impl DeviationProbe {
    pub fn profitable(&self, tol: f64) -> bool {
        self.gain > tol
    }
}

/// Best three-parameter deviation of `deviator` from `profile`, with the
/// other agent held fixed.
pub fn three_param_deviation_probe(
    profile: (StrategyParams, StrategyParams),
    deviator: Agent,
    m: &PayoffMatrix,
    cfg: &EngineConfig,
    grid: &ThreeParamGrid,
) -> DeviationProbe {
    let (s1, s2) = profile;
    let (own, opponent) = match deviator {
        Agent::One => (s1, s2),
        Agent::Two => (s2, s1),
    };
    let opponent_op = opponent.operator();
    let baseline = responder_payoff(deviator, &own.operator(), &opponent_op, m, cfg);
    let points = grid.points();
    let (k, payoff) = argmax(
        points
            .iter()
            .map(|s| responder_payoff(deviator, &s.operator(), &opponent_op, m, cfg)),
    );
    DeviationProbe {
        deviator,
        strategy: points[k],
        payoff,
        baseline,
        gain: payoff - baseline,
    }
}

/// One payoff-surface row.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepRow {
    pub theta1: f64,
    pub phi1: f64,
    pub theta2: f64,
    pub phi2: f64,
    pub u1: f64,
    pub u2: f64,
}

impl SweepRow {
    fn new(s1: &StrategyParams, s2: &StrategyParams, (u1, u2): PayoffPair) -> Self {
        SweepRow {
            theta1: s1.theta(),
            phi1: s1.phi(),
            theta2: s2.theta(),
            phi2: s2.phi(),
            u1,
            u2,
        }
    }
}

/// Agent 1 ranges over the grid against a fixed agent-2 strategy.
pub fn sweep_against(
    opponent: &StrategyParams,
    m: &PayoffMatrix,
    cfg: &EngineConfig,
    grid: &StrategyGrid,
) -> Vec<SweepRow> {
    let opp = opponent.operator();
    grid.points()
        .par_iter()
        .map(|s| {
            let d = evolve_operators(&s.operator(), &opp, cfg.gamma(), EvolutionPath::Shortcut);
            SweepRow::new(s, opponent, expected_payoffs(m, &d))
        })
        .collect()
}

/// Every grid profile, agent 1 index major.
pub fn sweep_full(m: &PayoffMatrix, cfg: &EngineConfig, grid: &StrategyGrid) -> Vec<SweepRow> {
    let table = PayoffTable::compute(m, cfg, grid);
    table
        .iter()
        .map(|((k1, k2), p)| SweepRow::new(&grid.at(k1), &grid.at(k2), p))
        .collect()
}
