//! Controllability of dX/dt = (A + uB)X on SU(1,1).
//!
//! Two characterizations are implemented side by side: the negativity set
//! {u : ⟨A+uB,(A+uB)†⟩ < 0} and the row-by-row table over (α, β, γ).

use serde::{Deserialize, Serialize};

use crate::algebra::{inner_dagger, AlgebraElement};

/// Equality band for boundary rows and for the dependence test.
pub const BAND: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemSpec {
    pub a: AlgebraElement,
    pub b: AlgebraElement,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
}

impl SystemSpec {
    pub fn new(a: AlgebraElement, b: AlgebraElement) -> Self {
        let (alpha, beta, gamma) = scalar_invariants(a, b);
        Self {
            a,
            b,
            alpha,
            beta,
            gamma,
        }
    }
}

pub fn scalar_invariants(a: AlgebraElement, b: AlgebraElement) -> (f64, f64, f64) {
    (inner_dagger(a, b), inner_dagger(a, a), inner_dagger(b, b))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TableRow {
    Dependent,
    AlphaZeroGammaNegBetaZero,
    AlphaZeroGammaNegBetaNonzero,
    AlphaZeroGammaZero,
    AlphaZeroGammaPosBetaNeg,
    AlphaZeroGammaPosBetaNonneg,
    AlphaNonzeroGammaNonpos,
    AlphaNonzeroGammaPosBetaNonpos,
    AlphaNonzeroGammaPosBetaPosDiscNonpos,
    AlphaNonzeroGammaPosBetaPosDiscPos,
}

impl TableRow {
    pub fn label(self) -> &'static str {
        match self {
            TableRow::Dependent => "dependent",
            TableRow::AlphaZeroGammaNegBetaZero => "α=0, γ<0, β=0",
            TableRow::AlphaZeroGammaNegBetaNonzero => "α=0, γ<0, β≠0",
            TableRow::AlphaZeroGammaZero => "α=0, γ=0",
            TableRow::AlphaZeroGammaPosBetaNeg => "α=0, γ>0, β<0",
            TableRow::AlphaZeroGammaPosBetaNonneg => "α=0, γ>0, β≥0",
            TableRow::AlphaNonzeroGammaNonpos => "α≠0, γ≤0",
            TableRow::AlphaNonzeroGammaPosBetaNonpos => "α≠0, γ>0, β≤0",
            TableRow::AlphaNonzeroGammaPosBetaPosDiscNonpos => "α≠0, γ>0, β>0, α²−βγ≤0",
            TableRow::AlphaNonzeroGammaPosBetaPosDiscPos => "α≠0, γ>0, β>0, α²−βγ>0",
        }
    }

    pub fn controllable(self) -> bool {
        matches!(
            self,
            TableRow::AlphaZeroGammaNegBetaNonzero
                | TableRow::AlphaZeroGammaPosBetaNeg
                | TableRow::AlphaNonzeroGammaNonpos
                | TableRow::AlphaNonzeroGammaPosBetaNonpos
                | TableRow::AlphaNonzeroGammaPosBetaPosDiscPos
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ControllabilityVerdict {
    pub controllable: bool,
    pub reason: TableRow,
    pub witness_u: Option<f64>,
    /// Set when some table comparison fell inside the equality band.
    pub near_boundary: bool,
}

fn scale(alpha: f64, beta: f64, gamma: f64) -> f64 {
    alpha.abs().max(beta.abs()).max(gamma.abs()).max(1.0)
}

/// Sign with a symmetric zero band.
fn sgn(v: f64, band: f64) -> i8 {
    if v > band {
        1
    } else if v < -band {
        -1
    } else {
        0
    }
}

fn near(v: f64, band: f64) -> bool {
    v.abs() <= 1e3 * band
}

/// Is q(u) = γu² + 2αu + β negative somewhere? Returns a witness when it is.
pub fn negativity_set_nonempty(alpha: f64, beta: f64, gamma: f64) -> (bool, Option<f64>) {
    let s = scale(alpha, beta, gamma);
    let band = BAND * s;
    let disc = alpha * alpha - beta * gamma;
    let q = |u: f64| gamma * u * u + 2.0 * alpha * u + beta;
    let witness = match sgn(gamma, band) {
        -1 => {
            let c = -alpha / gamma;
            if disc <= 0.0 {
                Some(c)
            } else {
                Some(c + disc.sqrt() / gamma.abs() + 1.0)
            }
        }
        0 => match sgn(alpha, band) {
            0 => (sgn(beta, band) < 0).then_some(0.0),
            _ => Some((-1.0 - beta) / (2.0 * alpha)),
        },
        _ => (sgn(disc, band * s) > 0).then(|| -alpha / gamma),
    };
    match witness {
        Some(u) if q(u) < 0.0 => (true, Some(u)),
        Some(u) => {
            // inside the band the minimizer can land on q = 0; step past the root
            let mut v = u;
            for _ in 0..60 {
                v = 2.0 * v + if v >= 0.0 { 1.0 } else { -1.0 };
                if q(v) < 0.0 {
                    return (true, Some(v));
                }
            }
            (true, Some(u))
        }
        None => (false, None),
    }
}

/// Table row for (α, β, γ) with the equality band applied to each test.
pub fn table_row(alpha: f64, beta: f64, gamma: f64) -> (TableRow, bool) {
    let s = scale(alpha, beta, gamma);
    let band = BAND * s;
    let disc = alpha * alpha - beta * gamma;
    let near_boundary =
        near(alpha, band) || near(beta, band) || near(gamma, band) || near(disc, band * s);
    let row = if sgn(alpha, band) == 0 {
        match sgn(gamma, band) {
            -1 => {
                if sgn(beta, band) == 0 {
                    TableRow::AlphaZeroGammaNegBetaZero
                } else {
                    TableRow::AlphaZeroGammaNegBetaNonzero
                }
            }
            0 => TableRow::AlphaZeroGammaZero,
            _ => {
                if sgn(beta, band) < 0 {
                    TableRow::AlphaZeroGammaPosBetaNeg
                } else {
                    TableRow::AlphaZeroGammaPosBetaNonneg
                }
            }
        }
    } else if sgn(gamma, band) <= 0 {
        TableRow::AlphaNonzeroGammaNonpos
    } else if sgn(beta, band) <= 0 {
        TableRow::AlphaNonzeroGammaPosBetaNonpos
    } else if sgn(disc, band * s) <= 0 {
        TableRow::AlphaNonzeroGammaPosBetaPosDiscNonpos
    } else {
        TableRow::AlphaNonzeroGammaPosBetaPosDiscPos
    };
    (row, near_boundary)
}

/// Largest 2×2 minor of the coefficient matrix relative to |A||B|.
pub fn linearly_dependent(a: AlgebraElement, b: AlgebraElement) -> bool {
    let (u, v) = (a.to_array(), b.to_array());
    let m = (u[0] * v[1] - u[1] * v[0])
        .abs()
        .max((u[0] * v[2] - u[2] * v[0]).abs())
        .max((u[1] * v[2] - u[2] * v[1]).abs());
    let n = a.norm() * b.norm();
    n == 0.0 || m <= BAND * n
}

pub fn is_controllable(a: AlgebraElement, b: AlgebraElement) -> ControllabilityVerdict {
    if linearly_dependent(a, b) {
        return ControllabilityVerdict {
            controllable: false,
            reason: TableRow::Dependent,
            witness_u: None,
            near_boundary: false,
        };
    }
    let (alpha, beta, gamma) = scalar_invariants(a, b);
    let (row, near_boundary) = table_row(alpha, beta, gamma);
    let (_, witness_u) = negativity_set_nonempty(alpha, beta, gamma);
    ControllabilityVerdict {
        controllable: row.controllable(),
        reason: row,
        witness_u,
        near_boundary,
    }
}
