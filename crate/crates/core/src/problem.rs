//! Boundary problems and their TOML problem files.

use crate::algebra::{expm, AlgebraElement, GroupElement, Mat2};
use crate::controllability::SystemSpec;
use crate::error::{Error, Result};
use crate::shoot::SearchConfig;
use num_complex::Complex64 as C64;
use serde::Deserialize;
use std::path::Path;

/// Steer I₂ to `target` under dX/dt = (A + uB)X.
#[derive(Debug, Clone, PartialEq)]
pub struct Problem {
    pub system: SystemSpec,
    pub target: GroupElement,
    pub search: SearchConfig,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ProblemFile {
    drift: [f64; 3],
    control: [f64; 3],
    target: TargetSpec,
    #[serde(default)]
    search: Option<SearchConfig>,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum TargetSpec {
    Exp { exp_coeffs: [f64; 3], scale: f64 },
    Matrix { matrix: [[[f64; 2]; 2]; 2] },
}

impl Problem {
    pub fn new(a: AlgebraElement, b: AlgebraElement, target: GroupElement) -> Self {
        Self {
            system: SystemSpec::new(a, b),
            target,
            search: SearchConfig::default(),
        }
    }

    pub fn a(&self) -> AlgebraElement {
        self.system.a
    }

    pub fn b(&self) -> AlgebraElement {
        self.system.b
    }

    /// A = K_x + 2K_z, B = K_x, X_f = exp(θ K_z).
    pub fn example1(theta: f64) -> Self {
        let (kx, kz) = (AlgebraElement::kx(), AlgebraElement::kz());
        Self::new(kx + 2.0 * kz, kx, expm(theta * kz))
    }

    /// A = K_z, B = −K_x + K_y, X_f = exp(−2K_x + 2K_y).
    pub fn example2() -> Self {
        let (kx, ky, kz) = (AlgebraElement::kx(), AlgebraElement::ky(), AlgebraElement::kz());
        Self::new(kz, ky - kx, expm(-2.0 * kx + 2.0 * ky))
    }

    pub fn from_toml_str(s: &str) -> Result<Self> {
        let f: ProblemFile = toml::from_str(s).map_err(|e| Error::Parse(e.to_string()))?;
        let a = AlgebraElement::new(f.drift[0], f.drift[1], f.drift[2]);
        let b = AlgebraElement::new(f.control[0], f.control[1], f.control[2]);
        let target = match f.target {
            TargetSpec::Exp { exp_coeffs: c, scale } => expm(scale * AlgebraElement::new(c[0], c[1], c[2])),
            TargetSpec::Matrix { matrix } => {
                let m: Mat2 = [
                    [C64::new(matrix[0][0][0], matrix[0][0][1]), C64::new(matrix[0][1][0], matrix[0][1][1])],
                    [C64::new(matrix[1][0][0], matrix[1][0][1]), C64::new(matrix[1][1][0], matrix[1][1][1])],
                ];
                GroupElement::from_matrix(m, 1e-8).map_err(|e| Error::Parse(format!("target.matrix: {e}")))?
            }
        };
        let mut p = Self::new(a, b, target);
        if let Some(s) = f.search {
            p.search = s;
        }
        Ok(p)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let s = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::from_toml_str(&s).map_err(|e| match e {
            Error::Parse(m) => Error::Parse(format!("{}: {m}", path.display())),
            other => other,
        })
    }
}
