//! Extremal controls: the abnormal constant and the closed-form normal laws.

mod law;

pub use law::{synthesize, synthesize_case3_with_root, ControlSummary, ExtremalControl, LawTag};

use crate::algebra::{commutator, conjugate, inner, inner_dagger, AlgebraElement, GroupElement};
use crate::poly;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

/// Costate S = sx K_x + sy K_y + sz K_z with multiplier λ₀.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Costate {
    pub sx: f64,
    pub sy: f64,
    pub sz: f64,
    pub lambda0: f64,
}

impl Costate {
    /// Normal costate (λ₀ = 1).
    pub fn normal(sx: f64, sy: f64, sz: f64) -> Self {
        Self { sx, sy, sz, lambda0: 1.0 }
    }

    pub fn abnormal(sx: f64, sy: f64, sz: f64) -> Self {
        Self { sx, sy, sz, lambda0: 0.0 }
    }

    pub fn from_element(s: AlgebraElement, lambda0: f64) -> Self {
        Self { sx: s.x, sy: s.y, sz: s.z, lambda0 }
    }

    pub fn element(&self) -> AlgebraElement {
        AlgebraElement::new(self.sx, self.sy, self.sz)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExtremalState {
    pub ua: f64,
    pub ub: f64,
    pub uc: f64,
}

impl ExtremalState {
    pub fn new(ua: f64, ub: f64, uc: f64) -> Self {
        Self { ua, ub, uc }
    }

    fn scale(&self) -> f64 {
        self.ua.abs().max(self.ub.abs()).max(self.uc.abs())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConstantsOfMotion {
    pub c1: f64,
    pub c2: f64,
}

/// f(x) = (γ/4)x⁴ + αx³ + (β−γc₁)x² − 2αc₁x + c.
#[derive(Debug, Clone, PartialEq)]
pub struct QuarticForm {
    /// Descending coefficients.
    pub coeffs: [f64; 5],
    pub roots: Vec<C64>,
    pub g2: f64,
    pub g3: f64,
    pub c: f64,
}

impl QuarticForm {
    pub fn new(alpha: f64, beta: f64, gamma: f64, k: ConstantsOfMotion) -> Self {
        let ConstantsOfMotion { c1, c2 } = k;
        let c = gamma * c1 * c1 - 2.0 * beta * c1 - 2.0 * c2;
        let coeffs = [
            gamma / 4.0,
            alpha,
            beta - gamma * c1,
            -2.0 * alpha * c1,
            c,
        ];
        let (g2, g3) = quartic_invariants(&coeffs);
        // strip vanishing leading terms before root finding
        let lead = coeffs.iter().position(|v| *v != 0.0).unwrap_or(4);
        let roots = if lead < 4 { poly::roots(&coeffs[lead..]) } else { Vec::new() };
        Self { coeffs, roots, g2, g3, c }
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.coeffs.iter().fold(0.0, |acc, &a| acc * x + a)
    }

    pub fn eval_c(&self, x: C64) -> C64 {
        poly::eval(&self.coeffs, x)
    }

    pub fn derivative(&self, x: C64) -> C64 {
        poly::eval(&poly::derivative(&self.coeffs), x)
    }

    pub fn second_derivative(&self, x: C64) -> C64 {
        poly::eval(&poly::derivative(&poly::derivative(&self.coeffs)), x)
    }
}

/// Invariants of a₀x⁴ + 4a₁x³ + 6a₂x² + 4a₃x + a₄.
pub fn quartic_invariants(c: &[f64; 5]) -> (f64, f64) {
    let (a0, a1, a2, a3, a4) = (c[0], c[1] / 4.0, c[2] / 6.0, c[3] / 4.0, c[4]);
    let g2 = a0 * a4 - 4.0 * a1 * a3 + 3.0 * a2 * a2;
    let g3 = a0 * a2 * a4 + 2.0 * a1 * a2 * a3 - a2 * a2 * a2 - a0 * a3 * a3 - a1 * a1 * a4;
    (g2, g3)
}

/// Abnormal constant u = −α/γ and generator A − (α/γ)B; none when γ = 0.
pub fn abnormal_control(a: AlgebraElement, b: AlgebraElement) -> Option<(f64, AlgebraElement)> {
    let alpha = inner_dagger(a, b);
    let gamma = inner_dagger(b, b);
    let scale = a.norm() * b.norm() + b.norm() * b.norm();
    if gamma.abs() <= 1e-12 * scale.max(f64::MIN_POSITIVE) {
        return None;
    }
    let u = -alpha / gamma;
    Some((u, a + u * b))
}

/// (−⟨S,A⟩, −⟨S,B⟩, −⟨S,[A,B]⟩).
pub fn costate_init(s: &Costate, a: AlgebraElement, b: AlgebraElement) -> ExtremalState {
    let s = s.element();
    ExtremalState {
        ua: -inner(s, a),
        ub: -inner(s, b),
        uc: -inner(s, commutator(a, b)),
    }
}

/// Pairings of S with X⁻¹AX, X⁻¹BX and X⁻¹[A,B]X.
pub fn transported_costate(
    s: &Costate,
    a: AlgebraElement,
    b: AlgebraElement,
    x: &GroupElement,
) -> ExtremalState {
    let xi = x.inverse();
    let sv = s.element();
    ExtremalState {
        ua: -inner(sv, conjugate(&xi, a)),
        ub: -inner(sv, conjugate(&xi, b)),
        uc: -inner(sv, conjugate(&xi, commutator(a, b))),
    }
}

pub fn constants_of_motion(st: &ExtremalState, alpha: f64, beta: f64, gamma: f64) -> ConstantsOfMotion {
    ConstantsOfMotion {
        c1: st.ua + 0.5 * st.ub * st.ub,
        c2: 0.5 * gamma * st.ua * st.ua - alpha * st.ua * st.ub - 0.5 * st.uc * st.uc - beta * st.ua,
    }
}

pub fn extremal_ode_rhs(st: &ExtremalState, alpha: f64, beta: f64, gamma: f64) -> ExtremalState {
    ExtremalState {
        ua: st.ub * st.uc,
        ub: -st.uc,
        uc: alpha * st.ua - beta * st.ub + gamma * st.ua * st.ub - alpha * st.ub * st.ub,
    }
}

/// One classical RK4 step of the extremal system.
pub fn extremal_rk4_step(st: &ExtremalState, h: f64, alpha: f64, beta: f64, gamma: f64) -> ExtremalState {
    let add = |s: &ExtremalState, d: &ExtremalState, k: f64| ExtremalState {
        ua: s.ua + k * d.ua,
        ub: s.ub + k * d.ub,
        uc: s.uc + k * d.uc,
    };
    let k1 = extremal_ode_rhs(st, alpha, beta, gamma);
    let k2 = extremal_ode_rhs(&add(st, &k1, 0.5 * h), alpha, beta, gamma);
    let k3 = extremal_ode_rhs(&add(st, &k2, 0.5 * h), alpha, beta, gamma);
    let k4 = extremal_ode_rhs(&add(st, &k3, h), alpha, beta, gamma);
    ExtremalState {
        ua: st.ua + h / 6.0 * (k1.ua + 2.0 * k2.ua + 2.0 * k3.ua + k4.ua),
        ub: st.ub + h / 6.0 * (k1.ub + 2.0 * k2.ub + 2.0 * k3.ub + k4.ub),
        uc: st.uc + h / 6.0 * (k1.uc + 2.0 * k2.uc + 2.0 * k3.uc + k4.uc),
    }
}

/// ⟨S, X⁻¹(A+uB)X⟩ + (λ₀/2)u².
pub fn hamiltonian(s: &Costate, u: f64, x: &GroupElement, a: AlgebraElement, b: AlgebraElement) -> f64 {
    let g = conjugate(&x.inverse(), a + u * b);
    inner(s.element(), g) + 0.5 * s.lambda0 * u * u
}
