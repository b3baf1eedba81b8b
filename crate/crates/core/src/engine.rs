//! The algorithmic model: evolve `|CC⟩` through `Ĵ`, the two local
//! operators and `Ĵ†`, read off the outcome distribution, draw one collapsed
//! outcome and turn it into the two card messages.
//!
//! # Random stream
//!
//! Sampling uses [`ChaCha20Rng`] seeded with [`SeedableRng::seed_from_u64`]
//! from the run seed, on stream `0` for a single run and on stream `k` for
//! the `k`-th session of a batch. Each engine run consumes exactly one
//! `f64` draw (`rand`'s 53-bit uniform in `[0, 1)`), which is then inverted
//! through the cumulative distribution in the fixed order `CC, CD, DC, DD`.

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Serialize, Serializer};

use crate::cmath::{
    j_operator_unchecked, omega_unchecked, tensor2x2, tensor_outer_columns, Complex, Matrix2,
    Vector4, UNITARY_TOL,
};
use crate::error::{check_range, Error, Result};

/// An agent's local operation parameters `(θ, φ)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StrategyParams {
    theta: f64,
    phi: f64,
}

impl StrategyParams {
    /// `Î = ω(0, 0)`, "not flip".
    pub const IDENTITY: StrategyParams = StrategyParams {
        theta: 0.0,
        phi: 0.0,
    };
    /// `D̂ = ω(π, π/2)`, "flip".
    pub const FLIP: StrategyParams = StrategyParams {
        theta: PI,
        phi: FRAC_PI_2,
    };
    /// `Ĉ = ω(0, π/2)`.
    pub const QUANTUM_COOPERATE: StrategyParams = StrategyParams {
        theta: 0.0,
        phi: FRAC_PI_2,
    };

    pub fn new(theta: f64, phi: f64) -> Result<Self> {
        check_range("theta", theta, 0.0, PI)?;
        check_range("phi", phi, 0.0, FRAC_PI_2)?;
        Ok(StrategyParams { theta, phi })
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }

    pub fn operator(&self) -> Matrix2 {
        omega_unchecked(self.theta, self.phi, 0.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EngineConfig {
    gamma: f64,
    rng_seed: u64,
}

impl Default for EngineConfig {
    /// Maximal entanglement, seed 0.
    fn default() -> Self {
        EngineConfig {
            gamma: FRAC_PI_2,
            rng_seed: 0,
        }
    }
}

impl EngineConfig {
    pub fn new(gamma: f64, rng_seed: u64) -> Result<Self> {
        check_range("gamma", gamma, 0.0, FRAC_PI_2)?;
        Ok(EngineConfig { gamma, rng_seed })
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn rng_seed(&self) -> u64 {
        self.rng_seed
    }

    pub fn with_seed(self, rng_seed: u64) -> Self {
        EngineConfig { rng_seed, ..self }
    }

    /// The generator for stream `stream` of this configuration's seed.
    pub fn rng(&self, stream: u64) -> ChaCha20Rng {
        let mut rng = ChaCha20Rng::seed_from_u64(self.rng_seed);
        rng.set_stream(stream);
        rng
    }
}

/// One side of a coin after measurement.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Coin {
    C,
    D,
}

impl Coin {
    pub fn index(self) -> usize {
        match self {
            Coin::C => 0,
            Coin::D => 1,
        }
    }

    pub fn from_index(i: usize) -> Coin {
        if i == 0 {
            Coin::C
        } else {
            Coin::D
        }
    }
}

/// A joint collapsed outcome of the two coins.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Outcome {
    pub coin1: Coin,
    pub coin2: Coin,
}

impl Outcome {
    pub const CC: Outcome = Outcome::new(Coin::C, Coin::C);
    pub const CD: Outcome = Outcome::new(Coin::C, Coin::D);
    pub const DC: Outcome = Outcome::new(Coin::D, Coin::C);
    pub const DD: Outcome = Outcome::new(Coin::D, Coin::D);
    /// Basis order.
    pub const ALL: [Outcome; 4] = [Outcome::CC, Outcome::CD, Outcome::DC, Outcome::DD];

    pub const fn new(coin1: Coin, coin2: Coin) -> Self {
        Outcome { coin1, coin2 }
    }

    /// Position in `[CC, CD, DC, DD]`.
    pub fn index(self) -> usize {
        2 * self.coin1.index() + self.coin2.index()
    }

    pub fn from_index(i: usize) -> Outcome {
        Outcome::ALL[i]
    }

    /// The outcome with the two coins exchanged.
    pub fn swapped(self) -> Outcome {
        Outcome::new(self.coin2, self.coin1)
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}{:?}", self.coin1, self.coin2)
    }
}

impl Serialize for Outcome {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// Probabilities over `[CC, CD, DC, DD]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(transparent)]
pub struct OutcomeDistribution {
    probs: [f64; 4],
}

impl OutcomeDistribution {
    /// Validates and renormalizes. Entries above `-1e-12` are accepted, with
    /// negative dust clamped to zero; the total must be within `1e-9` of one.
    pub fn new(probs: [f64; 4]) -> Result<Self> {
        if probs.iter().any(|p| !p.is_finite() || *p < -1e-12) {
            return Err(Error::InvalidDistribution(format!(
                "entries must be finite and nonnegative: {probs:?}"
            )));
        }
        let clamped = probs.map(|p| p.max(0.0));
        let total: f64 = clamped.iter().sum();
        if (total - 1.0).abs() > UNITARY_TOL {
            return Err(Error::InvalidDistribution(format!(
                "entries sum to {total}, expected 1"
            )));
        }
        Ok(OutcomeDistribution {
            probs: clamped.map(|p| p / total),
        })
    }

    /// Unit mass on `outcome`.
    pub fn point(outcome: Outcome) -> Self {
        let mut probs = [0.0; 4];
        probs[outcome.index()] = 1.0;
        OutcomeDistribution { probs }
    }

    /// `Δ = [|η₁|², …, |η₄|²]` of a normalized state.
    pub fn from_state(state: &Vector4) -> Result<Self> {
        Self::new(state.0.map(|z| z.norm_sqr()))
    }

    pub fn probs(&self) -> [f64; 4] {
        self.probs
    }

    pub fn prob(&self, outcome: Outcome) -> f64 {
        self.probs[outcome.index()]
    }

    /// The outcome carrying (numerically) all the mass, if any.
    pub fn degenerate_outcome(&self, tol: f64) -> Option<Outcome> {
        Outcome::ALL
            .into_iter()
            .find(|o| (self.prob(*o) - 1.0).abs() <= tol)
    }

    pub fn max_abs_diff(&self, other: &OutcomeDistribution) -> f64 {
        self.probs
            .iter()
            .zip(other.probs.iter())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// `ψ₁ = Ĵ|CC⟩ = [cos(γ/2), 0, 0, i sin(γ/2)]ᵀ`.
pub fn psi1(gamma: f64) -> Result<Vector4> {
    check_range("gamma", gamma, 0.0, FRAC_PI_2)?;
    Ok(psi1_unchecked(gamma))
}

fn psi1_unchecked(gamma: f64) -> Vector4 {
    let (s, c) = (gamma / 2.0).sin_cos();
    let zero = Complex::new(0.0, 0.0);
    Vector4([Complex::new(c, 0.0), zero, zero, Complex::new(0.0, s)])
}

/// How `ψ₂` is obtained from the local operators.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EvolutionPath {
    /// Only the outer columns of `ω₁ ⊗ ω₂`, weighted by the two nonzero
    /// amplitudes of `ψ₁`.
    #[default]
    Shortcut,
    /// Full 4×4 products `Ĵ† (ω₁ ⊗ ω₂) Ĵ |CC⟩`. Verification oracle.
    FullMatrix,
}

/// `ψ₃` for arbitrary local operators `a` (agent 1) and `b` (agent 2).
pub fn final_state(a: &Matrix2, b: &Matrix2, gamma: f64, path: EvolutionPath) -> Vector4 {
    let j = j_operator_unchecked(gamma);
    match path {
        EvolutionPath::Shortcut => {
            let psi1 = psi1_unchecked(gamma);
            let (left, right) = tensor_outer_columns(a, b);
            let psi2 = left.scale(psi1[0]).add(&right.scale(psi1[3]));
            j.conjugate_transpose().mul_vec(&psi2)
        }
        EvolutionPath::FullMatrix => {
            let op = j.conjugate_transpose() * tensor2x2(a, b) * j;
            op.mul_vec(&Vector4::basis(0))
        }
    }
}

/// Outcome distribution for arbitrary unitary local operators.
pub fn evolve_operators(
    a: &Matrix2,
    b: &Matrix2,
    gamma: f64,
    path: EvolutionPath,
) -> OutcomeDistribution {
    distribution_of(&final_state(a, b, gamma, path))
}

fn distribution_of(state: &Vector4) -> OutcomeDistribution {
    // Unitary evolution keeps the norm at 1 up to rounding; renormalize
    // without the strict acceptance window.
    let probs = state.0.map(|z| z.norm_sqr());
    let total: f64 = probs.iter().sum();
    OutcomeDistribution {
        probs: probs.map(|p| p / total),
    }
}

/// `Δ` for the strategy profile `(s1, s2)` at the configured `γ`.
pub fn evolve(s1: &StrategyParams, s2: &StrategyParams, cfg: &EngineConfig) -> OutcomeDistribution {
    evolve_with(s1, s2, cfg, EvolutionPath::Shortcut)
}

pub fn evolve_with(
    s1: &StrategyParams,
    s2: &StrategyParams,
    cfg: &EngineConfig,
    path: EvolutionPath,
) -> OutcomeDistribution {
    evolve_operators(&s1.operator(), &s2.operator(), cfg.gamma, path)
}

/// Inverse-CDF draw in basis order. Consumes exactly one `f64` from `rng`.
pub fn sample_outcome<R: Rng + ?Sized>(delta: &OutcomeDistribution, rng: &mut R) -> Outcome {
    let u: f64 = rng.gen();
    let mut acc = 0.0;
    for (i, p) in delta.probs.iter().enumerate() {
        acc += p;
        if *p > 0.0 && u < acc {
            return Outcome::from_index(i);
        }
    }
    // u landed in the rounding gap above the accumulated total.
    let last = delta.probs.iter().rposition(|p| *p > 0.0).unwrap_or(3);
    Outcome::from_index(last)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Agent {
    #[serde(rename = "1")]
    One,
    #[serde(rename = "2")]
    Two,
}

impl Agent {
    pub fn number(self) -> u8 {
        match self {
            Agent::One => 1,
            Agent::Two => 2,
        }
    }
}

/// The two sides of an agent's card: side 0 means Cooperate, side 1 Defect.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CardSet {
    cooperate: String,
    defect: String,
}

impl CardSet {
    pub fn new(cooperate: impl Into<String>, defect: impl Into<String>) -> Result<Self> {
        let (cooperate, defect) = (cooperate.into(), defect.into());
        if cooperate.is_empty() || defect.is_empty() {
            return Err(Error::InvalidCards("card texts must be non-empty".into()));
        }
        if cooperate == defect {
            return Err(Error::InvalidCards(format!(
                "both sides read {cooperate:?}"
            )));
        }
        Ok(CardSet { cooperate, defect })
    }

    /// `"cooperate"` / `"defect"`.
    pub fn standard() -> Self {
        CardSet {
            cooperate: "cooperate".into(),
            defect: "defect".into(),
        }
    }

    pub fn side(&self, coin: Coin) -> &str {
        match coin {
            Coin::C => &self.cooperate,
            Coin::D => &self.defect,
        }
    }

    /// Which side `text` was read from.
    pub fn coin_of(&self, text: &str) -> Option<Coin> {
        if text == self.cooperate {
            Some(Coin::C)
        } else if text == self.defect {
            Some(Coin::D)
        } else {
            None
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Message {
    pub agent: Agent,
    pub text: String,
}

/// Coin `C` sends side 0 of the agent's card, coin `D` side 1.
pub fn dispatch_messages(
    outcome: Outcome,
    cards1: &CardSet,
    cards2: &CardSet,
) -> (Message, Message) {
    (
        Message {
            agent: Agent::One,
            text: cards1.side(outcome.coin1).to_owned(),
        },
        Message {
            agent: Agent::Two,
            text: cards2.side(outcome.coin2).to_owned(),
        },
    )
}

/// Audit record of one end-to-end run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AlgorithmRun {
    pub messages: (Message, Message),
    pub distribution: OutcomeDistribution,
    pub outcome: Outcome,
}

/// Evolve, draw on stream 0 of `cfg`'s seed, and dispatch.
pub fn run_algorithmic_model(
    s1: &StrategyParams,
    s2: &StrategyParams,
    cards1: &CardSet,
    cards2: &CardSet,
    cfg: &EngineConfig,
) -> AlgorithmRun {
    run_with_rng(s1, s2, cards1, cards2, cfg, &mut cfg.rng(0))
}

pub fn run_with_rng<R: Rng + ?Sized>(
    s1: &StrategyParams,
    s2: &StrategyParams,
    cards1: &CardSet,
    cards2: &CardSet,
    cfg: &EngineConfig,
    rng: &mut R,
) -> AlgorithmRun {
    let distribution = evolve(s1, s2, cfg);
    let outcome = sample_outcome(&distribution, rng);
    AlgorithmRun {
        messages: dispatch_messages(outcome, cards1, cards2),
        distribution,
        outcome,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cmath::{j_operator, STRUCTURAL_TOL};
    use std::f64::consts::FRAC_1_SQRT_2;

    const C: StrategyParams = StrategyParams::QUANTUM_COOPERATE;
    const D: StrategyParams = StrategyParams::FLIP;
    const I: StrategyParams = StrategyParams::IDENTITY;

    fn max_cfg() -> EngineConfig {
        EngineConfig::default()
    }

    #[test]
    fn psi1_values() {
        assert_eq!(psi1(0.0).unwrap(), Vector4::basis(0));
        let v = psi1(FRAC_PI_2).unwrap();
        let expected = Vector4([
            Complex::new(FRAC_1_SQRT_2, 0.0),
            Complex::new(0.0, 0.0),
            Complex::new(0.0, 0.0),
            Complex::new(0.0, FRAC_1_SQRT_2),
        ]);
        assert!(v.max_abs_diff(&expected) < STRUCTURAL_TOL);
        assert!(psi1(-0.01).is_err());
    }

    #[test]
    fn psi1_matches_matrix_product() {
        for k in 0..100 {
            let g = (FRAC_PI_2 * k as f64 / 99.0).min(FRAC_PI_2);
            let full = j_operator(g).unwrap().mul_vec(&Vector4::basis(0));
            assert!(psi1(g).unwrap().max_abs_diff(&full) < STRUCTURAL_TOL);
        }
    }

    #[test]
    fn named_profiles() {
        let cases = [
            (I, I, Outcome::CC),
            (D, D, Outcome::DD),
            (C, C, Outcome::CC),
            (C, D, Outcome::DC),
            (I, D, Outcome::CD),
        ];
        for (a, b, expected) in cases {
            for path in [EvolutionPath::Shortcut, EvolutionPath::FullMatrix] {
                let delta = evolve_with(&a, &b, &max_cfg(), path);
                assert!(
                    delta.max_abs_diff(&OutcomeDistribution::point(expected)) < 1e-9,
                    "{a:?} {b:?} {path:?} -> {delta:?}"
                );
            }
        }
    }

    #[test]
    fn flip_flip_final_state() {
        let psi3 = final_state(
            &D.operator(),
            &D.operator(),
            FRAC_PI_2,
            EvolutionPath::FullMatrix,
        );
        let expected = Vector4::basis(3).scale(Complex::new(-1.0, 0.0));
        assert!(psi3.max_abs_diff(&expected) < STRUCTURAL_TOL);
    }

    #[test]
    fn distribution_validation() {
        let d = OutcomeDistribution::new([0.5, 0.5, -1e-17, 0.0]).unwrap();
        assert_eq!(d.probs()[2], 0.0);
        assert!(OutcomeDistribution::new([0.5, 0.4, 0.0, 0.0]).is_err());
        assert!(OutcomeDistribution::new([1.1, -0.1, 0.0, 0.0]).is_err());
        assert!(OutcomeDistribution::new([f64::NAN, 0.0, 0.0, 1.0]).is_err());
    }

    #[test]
    fn degenerate_sampling() {
        let mut rng = max_cfg().rng(0);
        for _ in 0..1000 {
            assert_eq!(
                sample_outcome(&OutcomeDistribution::point(Outcome::CC), &mut rng),
                Outcome::CC
            );
            assert_eq!(
                sample_outcome(&OutcomeDistribution::point(Outcome::DD), &mut rng),
                Outcome::DD
            );
        }
    }

    #[test]
    fn sampling_never_picks_zero_mass() {
        let d = OutcomeDistribution::new([0.0, 0.5, 0.0, 0.5]).unwrap();
        let mut rng = max_cfg().with_seed(9).rng(3);
        for _ in 0..10_000 {
            let o = sample_outcome(&d, &mut rng);
            assert!(o == Outcome::CD || o == Outcome::DD);
        }
    }

    #[test]
    fn message_mapping() {
        let cards = CardSet::new("coop", "defect").unwrap();
        let (m1, m2) = dispatch_messages(Outcome::CC, &cards, &cards);
        assert_eq!((m1.text.as_str(), m2.text.as_str()), ("coop", "coop"));

        let c1 = CardSet::new("a0", "a1").unwrap();
        let c2 = CardSet::new("b0", "b1").unwrap();
        let (m1, m2) = dispatch_messages(Outcome::DC, &c1, &c2);
        assert_eq!((m1.text.as_str(), m2.text.as_str()), ("a1", "b0"));
        assert_eq!((m1.agent, m2.agent), (Agent::One, Agent::Two));
        let (m1, m2) = dispatch_messages(Outcome::CD, &c1, &c2);
        assert_eq!((m1.text.as_str(), m2.text.as_str()), ("a0", "b1"));
    }

    #[test]
    fn card_validation() {
        assert!(CardSet::new("", "x").is_err());
        assert!(CardSet::new("same", "same").is_err());
        let cards = CardSet::standard();
        assert_eq!(cards.coin_of("defect"), Some(Coin::D));
        assert_eq!(cards.coin_of("garbage"), None);
    }

    #[test]
    fn end_to_end_named_runs() {
        let c1 = CardSet::new("a0", "a1").unwrap();
        let c2 = CardSet::new("b0", "b1").unwrap();
        for seed in [0, 1, 42, u64::MAX] {
            let cfg = max_cfg().with_seed(seed);
            let run = run_algorithmic_model(&C, &C, &c1, &c2, &cfg);
            assert_eq!(
                (run.messages.0.text.as_str(), run.messages.1.text.as_str()),
                ("a0", "b0")
            );
            let run = run_algorithmic_model(&D, &D, &c1, &c2, &cfg);
            assert_eq!(
                (run.messages.0.text.as_str(), run.messages.1.text.as_str()),
                ("a1", "b1")
            );
            let run = run_algorithmic_model(&I, &D, &c1, &c2, &cfg);
            assert_eq!(run.outcome, Outcome::CD);
            assert_eq!(
                (run.messages.0.text.as_str(), run.messages.1.text.as_str()),
                ("a0", "b1")
            );
        }
    }

    #[test]
    fn outcome_display_and_index() {
        for (i, o) in Outcome::ALL.iter().enumerate() {
            assert_eq!(o.index(), i);
        }
        assert_eq!(Outcome::DC.to_string(), "DC");
        assert_eq!(Outcome::DC.swapped(), Outcome::CD);
        assert!(StrategyParams::new(3.2, 0.0).is_err());
        assert!(EngineConfig::new(2.0, 0).is_err());
    }
}
