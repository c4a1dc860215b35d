//! The one-shot two-player game, parameterized by the temptation `T` with
//! `R = 1`, `P = 0`, `S = 1 - T`, and its two-player redistributed form.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum GameError {
    #[error("invalid game parameter: {0}")]
    InvalidParameter(String),
    #[error("no critical taxation level: threshold {theta} leaves no surplus at T = {temptation}")]
    NoCriticalValue { temptation: f64, theta: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Strategy {
    Cooperate,
    Defect,
}

impl Strategy {
    #[inline]
    pub fn is_cooperator(self) -> bool {
        matches!(self, Strategy::Cooperate)
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Strategy::Cooperate => "C",
            Strategy::Defect => "D",
        })
    }
}

/// Prisoner's Dilemma payoffs under the single-parameter family.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GameParams {
    temptation: f64,
}

impl GameParams {
    /// Checked constructor for the dilemma regime `1 < T <= 2`.
    pub fn new(temptation: f64) -> Result<Self, GameError> {
        if !(temptation > 1.0 && temptation <= 2.0) {
            return Err(GameError::InvalidParameter(format!(
                "temptation must lie in (1, 2], got {temptation}"
            )));
        }
        Ok(Self { temptation })
    }

    /// Any finite temptation, for exploring neighboring game classes.
    pub fn unchecked(temptation: f64) -> Self {
        Self { temptation }
    }

    #[inline]
    pub fn temptation(&self) -> f64 {
        self.temptation
    }

    #[inline]
    pub fn reward(&self) -> f64 {
        1.0
    }

    #[inline]
    pub fn punishment(&self) -> f64 {
        0.0
    }

    #[inline]
    pub fn sucker(&self) -> f64 {
        1.0 - self.temptation
    }

    pub fn matrix(&self) -> PayoffMatrix {
        PayoffMatrix {
            reward: self.reward(),
            sucker: self.sucker(),
            temptation: self.temptation,
            punishment: self.punishment(),
        }
    }
}

/// Payoff to the row player.
#[inline]
pub fn payoff(mine: Strategy, theirs: Strategy, params: &GameParams) -> f64 {
    match (mine, theirs) {
        (Strategy::Cooperate, Strategy::Cooperate) => params.reward(),
        (Strategy::Cooperate, Strategy::Defect) => params.sucker(),
        (Strategy::Defect, Strategy::Cooperate) => params.temptation(),
        (Strategy::Defect, Strategy::Defect) => params.punishment(),
    }
}

/// Symmetric 2x2 game seen from the row player.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PayoffMatrix {
    /// (C, C)
    pub reward: f64,
    /// (C, D)
    pub sucker: f64,
    /// (D, C)
    pub temptation: f64,
    /// (D, D)
    pub punishment: f64,
}

impl PayoffMatrix {
    pub fn entry(&self, mine: Strategy, theirs: Strategy) -> f64 {
        match (mine, theirs) {
            (Strategy::Cooperate, Strategy::Cooperate) => self.reward,
            (Strategy::Cooperate, Strategy::Defect) => self.sucker,
            (Strategy::Defect, Strategy::Cooperate) => self.temptation,
            (Strategy::Defect, Strategy::Defect) => self.punishment,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GameClass {
    PrisonersDilemma,
    StagHunt,
    Snowdrift,
    /// Mutual cooperation strictly best and mutual defection strictly worst.
    Harmony,
    Deadlock,
    /// Some pair of payoffs tie, other than T = S within Harmony.
    Degenerate,
    /// A strict ordering outside the named classes.
    Other,
}

/// Classify by the strict ordering of the four payoffs.
pub fn classify(m: &PayoffMatrix) -> GameClass {
    let (r, s, t, p) = (m.reward, m.sucker, m.temptation, m.punishment);
    // R > T > S > P or R > S > T > P, and T = S in between
    if r > t.max(s) && t.min(s) > p {
        return GameClass::Harmony;
    }
    let values = [r, s, t, p];
    for a in 0..4 {
        for b in a + 1..4 {
            if values[a] == values[b] {
                return GameClass::Degenerate;
            }
        }
    }
    if t > r && r > p && p > s {
        GameClass::PrisonersDilemma
    } else if r > t && t > p && p > s {
        GameClass::StagHunt
    } else if t > r && r > s && s > p {
        GameClass::Snowdrift
    } else if t > p && p > r && r > s {
        GameClass::Deadlock
    } else {
        GameClass::Other
    }
}

/// Two-player matrix after the defector's surplus above `theta` is taxed at
/// rate `alpha` and handed to the cooperator. The diagonal is unchanged:
/// symmetric outcomes exchange equal amounts.
pub fn redistributed_matrix(
    params: &GameParams,
    alpha: f64,
    theta: f64,
) -> Result<PayoffMatrix, GameError> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(GameError::InvalidParameter(format!(
            "taxation level must lie in [0, 1], got {alpha}"
        )));
    }
    let t = params.temptation();
    let transfer = if t > theta { alpha * (t - theta) } else { 0.0 };
    Ok(PayoffMatrix {
        reward: params.reward(),
        sucker: params.sucker() + transfer,
        temptation: t - transfer,
        punishment: params.punishment(),
    })
}

/// Smallest taxation level above which the two-player game stops being a
/// dilemma: `(T - 1) / (T - theta)`.
pub fn critical_alpha(temptation: f64, theta: f64) -> Result<f64, GameError> {
    if theta >= temptation {
        return Err(GameError::NoCriticalValue { temptation, theta });
    }
    Ok((temptation - 1.0) / (temptation - theta))
}

/// One point of the critical-taxation curve.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriticalAlphaRow {
    pub theta: f64,
    #[serde(rename = "T")]
    pub temptation: f64,
    pub alpha_star: f64,
}

/// Critical taxation over a `theta x T` grid. Points without surplus are skipped.
pub fn critical_alpha_curve(thetas: &[f64], temptations: &[f64]) -> Vec<CriticalAlphaRow> {
    thetas
        .iter()
        .flat_map(|&theta| {
            temptations.iter().filter_map(move |&t| {
                critical_alpha(t, theta)
                    .ok()
                    .map(|alpha_star| CriticalAlphaRow {
                        theta,
                        temptation: t,
                        alpha_star,
                    })
            })
        })
        .collect()
}
