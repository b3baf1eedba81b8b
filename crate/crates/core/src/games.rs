//! 2×2 bimatrix games: the Prisoner's Dilemma payoff layout, the taxi
//! maintenance game, and expectations under an outcome distribution.

use serde::Serialize;

use crate::engine::{Coin, Outcome, OutcomeDistribution};
use crate::error::{Error, Result};

/// Payoff pair `(agent 1, agent 2)`.
pub type PayoffPair = (f64, f64);

/// Four cells indexed by (agent 1 strategy, agent 2 strategy). Index 0 is
/// Cooperate for the base game and Participate for the meta-game.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PayoffMatrix {
    cells: [[PayoffPair; 2]; 2],
}

/// `(T, R, P, S)` of a symmetric Prisoner's Dilemma layout.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PdParams {
    pub t: f64,
    pub r: f64,
    pub p: f64,
    pub s: f64,
}

impl PdParams {
    pub const CANONICAL: PdParams = PdParams {
        t: 5.0,
        r: 3.0,
        p: 1.0,
        s: 0.0,
    };

    /// `T > R > P > S` and `R > (T + S)/2`, strictly.
    pub fn satisfies_pd(&self) -> bool {
        let PdParams { t, r, p, s } = *self;
        t > r && r > p && p > s && r > (t + s) / 2.0
    }
}

impl PayoffMatrix {
    pub fn from_cells(cells: [[PayoffPair; 2]; 2]) -> Self {
        PayoffMatrix { cells }
    }

    /// Table layout `[[(R,R), (S,T)], [(T,S), (P,P)]]`.
    pub fn pd(params: PdParams) -> Self {
        let PdParams { t, r, p, s } = params;
        PayoffMatrix {
            cells: [[(r, r), (s, t)], [(t, s), (p, p)]],
        }
    }

    /// `(T, R, P, S) = (5, 3, 1, 0)`.
    pub fn canonical() -> Self {
        Self::pd(PdParams::CANONICAL)
    }

    pub fn cells(&self) -> [[PayoffPair; 2]; 2] {
        self.cells
    }

    pub fn cell(&self, row: usize, col: usize) -> PayoffPair {
        self.cells[row][col]
    }

    pub fn payoff(&self, outcome: Outcome) -> PayoffPair {
        self.cells[outcome.coin1.index()][outcome.coin2.index()]
    }

    /// Recovers `(T, R, P, S)` if the cells have the symmetric PD shape.
    pub fn pd_params(&self) -> Option<PdParams> {
        let [[(r1, r2), (s, t)], [(t2, s2), (p1, p2)]] = self.cells;
        (r1 == r2 && p1 == p2 && s == s2 && t == t2).then_some(PdParams { t, r: r1, p: p1, s })
    }

    pub fn is_pd(&self) -> bool {
        self.pd_params().is_some_and(|p| p.satisfies_pd())
    }

    /// The same game seen with the agents' seats exchanged.
    pub fn swap_agents(&self) -> Self {
        let mut cells = [[(0.0, 0.0); 2]; 2];
        for (r, row) in cells.iter_mut().enumerate() {
            for (c, cell) in row.iter_mut().enumerate() {
                let (u1, u2) = self.cells[c][r];
                *cell = (u2, u1);
            }
        }
        PayoffMatrix { cells }
    }

    /// `u ↦ a·u + b` on every payoff.
    pub fn affine(&self, a: f64, b: f64) -> Self {
        PayoffMatrix {
            cells: self
                .cells
                .map(|row| row.map(|(u1, u2)| (a * u1 + b, a * u2 + b))),
        }
    }

    pub fn report(&self) -> PayoffMatrixReport {
        let mut cells = std::collections::BTreeMap::new();
        for o in Outcome::ALL {
            let (u1, u2) = self.payoff(o);
            cells.insert(o.to_string(), [u1, u2]);
        }
        PayoffMatrixReport {
            cells,
            meta: PayoffMeta {
                is_pd: self.is_pd(),
            },
        }
    }
}

/// JSON shape `{cells: {CC: [u1, u2], …}, meta: {is_pd}}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PayoffMatrixReport {
    pub cells: std::collections::BTreeMap<String, [f64; 2]>,
    pub meta: PayoffMeta,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PayoffMeta {
    pub is_pd: bool,
}

impl Serialize for PayoffMatrix {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.report().serialize(s)
    }
}

pub fn pd_matrix(t: f64, r: f64, p: f64, s: f64) -> PayoffMatrix {
    PayoffMatrix::pd(PdParams { t, r, p, s })
}

/// Parameters of the taxi maintenance game.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TaxiParams {
    r2: f64,
    r1: f64,
    r0: f64,
    cost: f64,
}

impl TaxiParams {
    /// `r2`, `r1`, `r0`: reward when two, one or zero drivers maintain the
    /// car; `cost`: total maintenance cost. Requires `r2 > r1 > r0`, `cost > 0`.
    pub fn new(r2: f64, r1: f64, r0: f64, cost: f64) -> Result<Self> {
        if ![r2, r1, r0, cost].iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidPayoffs(
                "taxi parameters must be finite".into(),
            ));
        }
        if !(r2 > r1 && r1 > r0) {
            return Err(Error::InvalidPayoffs(format!(
                "rewards must satisfy R2 > R1 > R0, got {r2}, {r1}, {r0}"
            )));
        }
        if cost <= 0.0 {
            return Err(Error::InvalidPayoffs(format!(
                "cost must be positive, got {cost}"
            )));
        }
        Ok(TaxiParams { r2, r1, r0, cost })
    }

    pub fn rewards(&self) -> (f64, f64, f64) {
        (self.r2, self.r1, self.r0)
    }

    pub fn cost(&self) -> f64 {
        self.cost
    }
}

/// Maintaining is Cooperate: `(T, R, P, S) = (R₁, R₂ − c/2, R₀, R₁ − c)`.
pub fn taxi_matrix(p: &TaxiParams) -> PayoffMatrix {
    let half = p.r2 - p.cost / 2.0;
    PayoffMatrix::from_cells([
        [(half, half), (p.r1 - p.cost, p.r1)],
        [(p.r1, p.r1 - p.cost), (p.r0, p.r0)],
    ])
}

/// `(Σ Δᵢ u1ᵢ, Σ Δᵢ u2ᵢ)` over `[CC, CD, DC, DD]`.
pub fn expected_payoffs(m: &PayoffMatrix, delta: &OutcomeDistribution) -> PayoffPair {
    Outcome::ALL.iter().fold((0.0, 0.0), |(a1, a2), o| {
        let p = delta.prob(*o);
        let (u1, u2) = m.payoff(*o);
        (a1 + p * u1, a2 + p * u2)
    })
}

/// Payoff of pure outcome `(c1, c2)`.
pub fn payoff_at(m: &PayoffMatrix, c1: Coin, c2: Coin) -> PayoffPair {
    m.payoff(Outcome::new(c1, c2))
}
