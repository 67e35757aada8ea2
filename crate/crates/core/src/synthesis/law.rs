use super::{constants_of_motion, extremal_ode_rhs, ConstantsOfMotion, ExtremalState, QuarticForm};
use crate::elliptic::{Weierstrass, WeierstrassInvariants};
use crate::error::{Error, Result};
use crate::poly;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;

/// Values beyond this are reported as a pole.
const BLOWUP: f64 = 1e10;
/// Relative tolerance for treating an initial state as an equilibrium.
const EQ_TOL: f64 = 1e-13;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LawTag {
    Abnormal,
    Constant,
    Case1Weierstrass,
    Case1Tanh,
    Case1Coth,
    Case1Rational,
    Case1Tan,
    Case1Sech,
    Case1Sec,
    Case1Csch,
    Case2Weierstrass,
    Case2Rational,
    Case2Sinh,
    Case2Cosh,
    Case2Tan2,
    Case3Weierstrass,
    Case3DoubleSin,
    Case3DoubleExp,
    Case3TwoDouble,
    Case3Triple,
    Case3Quadruple,
}

impl LawTag {
    pub fn as_str(self) -> &'static str {
        use LawTag::*;
        match self {
            Abnormal => "abnormal",
            Constant => "constant",
            Case1Weierstrass => "case1-weierstrass",
            Case1Tanh => "case1-tanh",
            Case1Coth => "case1-coth",
            Case1Rational => "case1-rational",
            Case1Tan => "case1-tan",
            Case1Sech => "case1-sech",
            Case1Sec => "case1-sec",
            Case1Csch => "case1-csch",
            Case2Weierstrass => "case2-weierstrass",
            Case2Rational => "case2-rational",
            Case2Sinh => "case2-sinh",
            Case2Cosh => "case2-cosh",
            Case2Tan2 => "case2-tan2",
            Case3Weierstrass => "case3-weierstrass",
            Case3DoubleSin => "case3-double-sin",
            Case3DoubleExp => "case3-double-exp",
            Case3TwoDouble => "case3-two-double",
            Case3Triple => "case3-triple",
            Case3Quadruple => "case3-quadruple",
        }
    }

    pub fn is_weierstrass(self) -> bool {
        matches!(self, LawTag::Case1Weierstrass | LawTag::Case2Weierstrass | LawTag::Case3Weierstrass)
    }
}

impl fmt::Display for LawTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Case 2 degenerate forms in x = αu/4 + β/12.
#[derive(Debug, Clone, PartialEq)]
enum DegX {
    /// x = 1/(t+a)²
    InvSquare { a: f64 },
    /// x = e + 3e/sinh²(k(t+a))
    Sinh { e: f64, k: f64, a: f64 },
    /// x = e − 3e/cosh²(k(t+a))
    Cosh { e: f64, k: f64, a: f64 },
    /// x = 2ε + 3ε tan²(k(t+a))
    Tan2 { eps: f64, k: f64, a: f64 },
}

/// v(t) with u = x1 + 1/v.
#[derive(Debug, Clone, PartialEq)]
enum VForm {
    Trig { vc: f64, w0: f64, w1: f64, omega: f64 },
    Hyp { vc: f64, w0: f64, w1: f64, omega: f64 },
    Quad { v0: f64, v1: f64, v2: f64 },
    Lin { v0: f64, v1: f64 },
}

impl VForm {
    fn eval(&self, t: f64) -> f64 {
        match *self {
            VForm::Trig { vc, w0, w1, omega } => vc + w0 * (omega * t).cos() + w1 / omega * (omega * t).sin(),
            VForm::Hyp { vc, w0, w1, omega } => vc + w0 * (omega * t).cosh() + w1 / omega * (omega * t).sinh(),
            VForm::Quad { v0, v1, v2 } => v0 + t * (v1 + t * v2),
            VForm::Lin { v0, v1 } => v0 + v1 * t,
        }
    }

    fn zeros(&self, t0: f64, t1: f64) -> Vec<f64> {
        let keep = |v: Vec<f64>| -> Vec<f64> { v.into_iter().filter(|t| *t >= t0 && *t <= t1).collect() };
        match *self {
            VForm::Trig { vc, w0, w1, omega } => {
                // vc + R cos(ωt − φ)
                let r = w0.hypot(w1 / omega);
                if r == 0.0 || vc.abs() > r {
                    return Vec::new();
                }
                let phi = (w1 / omega).atan2(w0);
                let th = (-vc / r).clamp(-1.0, 1.0).acos();
                let per = 2.0 * PI / omega;
                let mut out = progression((phi + th) / omega, per, t0, t1);
                if th > 0.0 && th < PI {
                    out.extend(progression((phi - th) / omega, per, t0, t1));
                }
                out.sort_by(|a, b| a.partial_cmp(b).unwrap());
                out
            }
            VForm::Hyp { vc, w0, w1, omega } => {
                // A y² + vc y + B = 0 with y = e^{ωt}
                let a = 0.5 * (w0 + w1 / omega);
                let b = 0.5 * (w0 - w1 / omega);
                keep(real_quadratic_roots(a, vc, b).into_iter().filter(|y| *y > 0.0).map(|y| y.ln() / omega).collect())
            }
            VForm::Quad { v0, v1, v2 } => keep(real_quadratic_roots(v2, v1, v0)),
            VForm::Lin { v0, v1 } => {
                if v1 == 0.0 {
                    Vec::new()
                } else {
                    keep(vec![-v0 / v1])
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Form {
    Constant(f64),
    Case1Wp {
        w: Weierstrass,
        gamma: f64,
        estar: f64,
        a: C64,
        sign0: f64,
        flips: Option<(f64, f64)>,
        /// The two cubic roots other than e*, and their distance to e*.
        others: [C64; 2],
        gap: f64,
    },
    Tanh { kappa: f64, omega: f64, a: f64 },
    Coth { kappa: f64, omega: f64, a: f64 },
    /// u0/(1 − k t)
    Rational { u0: f64, k: f64 },
    Tan { kappa: f64, omega: f64, a: f64 },
    Sech { k: f64, omega: f64, a: f64 },
    Sec { k: f64, omega: f64, a: f64 },
    Csch { k: f64, omega: f64, a: f64 },
    Case2Wp { w: Weierstrass, alpha: f64, beta: f64, a: C64 },
    Case2Deg { alpha: f64, beta: f64, x: DegX },
    Case3Wp { w: Weierstrass, x0: C64, f1: C64, f2: C64, a: C64 },
    Case3Recip { x1: f64, v: VForm },
    TwoDouble { x1: C64, x3: C64, c: C64, lambda: C64 },
}

/// Closed-form extremal control u(t).
#[derive(Debug, Clone, PartialEq)]
pub struct ExtremalControl {
    tag: LawTag,
    form: Form,
    quartic: Option<QuarticForm>,
    g2: Option<f64>,
    g3: Option<f64>,
    u0: f64,
}

/// Serializable description of a law.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ControlSummary {
    pub tag: String,
    pub g2: Option<f64>,
    pub g3: Option<f64>,
    pub a_re: Option<f64>,
    pub a_im: Option<f64>,
    pub roots: Vec<[f64; 2]>,
    pub sign0: Option<f64>,
    pub u0: f64,
}

fn sgn(x: f64) -> f64 {
    if x < 0.0 {
        -1.0
    } else {
        1.0
    }
}

fn progression(first: f64, period: f64, t0: f64, t1: f64) -> Vec<f64> {
    let k0 = ((t0 - first) / period).ceil() as i64;
    let k1 = ((t1 - first) / period).floor() as i64;
    (k0..=k1).map(|k| first + k as f64 * period).collect()
}

fn real_quadratic_roots(a: f64, b: f64, c: f64) -> Vec<f64> {
    if a == 0.0 {
        return if b == 0.0 { Vec::new() } else { vec![-c / b] };
    }
    let d = b * b - 4.0 * a * c;
    if d < 0.0 {
        return Vec::new();
    }
    let q = -0.5 * (b + sgn(b) * d.sqrt());
    let mut r = vec![q / a];
    if q != 0.0 {
        r.push(c / q);
    }
    r.sort_by(|x, y| x.partial_cmp(y).unwrap());
    r
}

fn wp_err(e: Error, t: f64) -> Error {
    match e {
        Error::WpPole { .. } => Error::Pole(t),
        other => other,
    }
}

impl ExtremalControl {
    pub fn abnormal(u: f64) -> Self {
        Self {
            tag: LawTag::Abnormal,
            form: Form::Constant(u),
            quartic: None,
            g2: None,
            g3: None,
            u0: u,
        }
    }

    fn new(tag: LawTag, form: Form, q: &QuarticForm, g: Option<(f64, f64)>, u0: f64) -> Self {
        Self {
            tag,
            form,
            quartic: Some(q.clone()),
            g2: g.map(|v| v.0),
            g3: g.map(|v| v.1),
            u0,
        }
    }

    pub fn tag(&self) -> LawTag {
        self.tag
    }

    pub fn u0(&self) -> f64 {
        self.u0
    }

    /// Weierstrass invariants carried by the law, when it has any.
    pub fn invariants(&self) -> Option<(f64, f64)> {
        Some((self.g2?, self.g3?))
    }

    /// Complex shift a of the ℘ argument for elliptic laws.
    pub fn shift(&self) -> Option<C64> {
        match &self.form {
            Form::Case1Wp { a, .. } | Form::Case2Wp { a, .. } | Form::Case3Wp { a, .. } => Some(*a),
            _ => None,
        }
    }

    pub fn weierstrass(&self) -> Option<&Weierstrass> {
        match &self.form {
            Form::Case1Wp { w, .. } | Form::Case2Wp { w, .. } | Form::Case3Wp { w, .. } => Some(w),
            _ => None,
        }
    }

    pub fn quartic(&self) -> Option<&QuarticForm> {
        self.quartic.as_ref()
    }

    pub fn evaluate(&self, t: f64) -> Result<f64> {
        let u = self.raw(t)?;
        if !u.is_finite() || u.abs() > BLOWUP {
            return Err(Error::Pole(t));
        }
        Ok(u)
    }

    fn raw(&self, t: f64) -> Result<f64> {
        Ok(match &self.form {
            Form::Constant(u) => *u,
            Form::Case1Wp { w, gamma, estar, a, sign0, flips, others, gap } => {
                let (p, dp) = w.eval(C64::new(t, 0.0) + a).map_err(|e| wp_err(e, t))?;
                let mag = if (p.re - estar).abs() <= 0.1 * gap {
                    // near a zero of u, |u| = |℘′| / √|γ(℘−e_j)(℘−e_k)| avoids the square-root cancellation
                    let den = (gamma * ((p - others[0]) * (p - others[1])).re).abs().sqrt();
                    dp.re.abs() / den
                } else {
                    (4.0 / gamma * (p.re - estar)).max(0.0).sqrt()
                };
                let n = match flips {
                    Some((base, per)) => flip_count(*base, *per, t),
                    None => 0,
                };
                let s = if n % 2 == 0 { *sign0 } else { -*sign0 };
                s * mag
            }
            Form::Tanh { kappa, omega, a } => kappa * (omega * t + a).tanh(),
            Form::Coth { kappa, omega, a } => kappa / (omega * t + a).tanh(),
            Form::Rational { u0, k } => u0 / (1.0 - k * t),
            Form::Tan { kappa, omega, a } => kappa * (omega * t + a).tan(),
            Form::Sech { k, omega, a } => k / (omega * t + a).cosh(),
            Form::Sec { k, omega, a } => k / (omega * t + a).cos(),
            Form::Csch { k, omega, a } => k / (omega * t + a).sinh(),
            Form::Case2Wp { w, alpha, beta, a } => {
                let p = w.wp(C64::new(t, 0.0) + a).map_err(|e| wp_err(e, t))?;
                (4.0 * p.re - beta / 3.0) / alpha
            }
            Form::Case2Deg { alpha, beta, x } => {
                let xv = match *x {
                    DegX::InvSquare { a } => 1.0 / ((t + a) * (t + a)),
                    DegX::Sinh { e, k, a } => e + 3.0 * e / (k * (t + a)).sinh().powi(2),
                    DegX::Cosh { e, k, a } => e - 3.0 * e / (k * (t + a)).cosh().powi(2),
                    DegX::Tan2 { eps, k, a } => 2.0 * eps + 3.0 * eps * (k * (t + a)).tan().powi(2),
                };
                (4.0 * xv - beta / 3.0) / alpha
            }
            Form::Case3Wp { w, x0, f1, f2, a } => {
                let u = match w.wp(C64::new(t, 0.0) + a) {
                    Ok(p) => x0 + f1 / (4.0 * (p - f2 / 24.0)),
                    Err(Error::WpPole { .. }) => *x0,
                    Err(e) => return Err(e),
                };
                check_real(u, t)?
            }
            Form::Case3Recip { x1, v } => x1 + 1.0 / v.eval(t),
            Form::TwoDouble { x1, x3, c, lambda } => {
                let r = c * (lambda * t).exp();
                check_real((x1 - x3 * r) / (1.0 - r), t)?
            }
        })
    }

    /// |u̇² − f(u)| at t, with u̇ from a fourth-order central difference.
    pub fn ode_residual(&self, t: f64) -> Result<f64> {
        let q = match &self.quartic {
            Some(q) => q,
            None => return Ok(0.0),
        };
        let h = 1e-3;
        let d1 = self.evaluate(t + h)? - self.evaluate(t - h)?;
        let d2 = self.evaluate(t + 2.0 * h)? - self.evaluate(t - 2.0 * h)?;
        let du = (8.0 * d1 - d2) / (12.0 * h);
        let u = self.evaluate(t)?;
        Ok((du * du - q.eval(u)).abs())
    }

    /// Poles of the law in [t0, t1], sorted.
    pub fn poles_in(&self, t0: f64, t1: f64) -> Vec<f64> {
        let mut out = match &self.form {
            Form::Constant(_) | Form::Tanh { .. } | Form::Sech { .. } => Vec::new(),
            Form::Case1Wp { w, a, .. } | Form::Case2Wp { w, a, .. } => w.real_congruences(C64::new(0.0, 0.0), *a, t0, t1),
            Form::Coth { omega, a, .. } | Form::Csch { omega, a, .. } => vec![-a / omega],
            Form::Rational { k, .. } => {
                if *k == 0.0 {
                    Vec::new()
                } else {
                    vec![1.0 / k]
                }
            }
            Form::Tan { omega, a, .. } | Form::Sec { omega, a, .. } => {
                progression((FRAC_PI_2 - a) / omega, PI / omega.abs(), t0, t1)
            }
            Form::Case2Deg { x, .. } => match *x {
                DegX::InvSquare { a } | DegX::Sinh { a, .. } => vec![-a],
                DegX::Cosh { .. } => Vec::new(),
                DegX::Tan2 { k, a, .. } => progression(FRAC_PI_2 / k - a, PI / k, t0, t1),
            },
            Form::Case3Wp { w, f2, a, .. } => match w.inverse(f2 / 24.0, None) {
                Ok(zp) => {
                    let mut v = w.real_congruences(zp, *a, t0, t1);
                    v.extend(w.real_congruences(-zp, *a, t0, t1));
                    v
                }
                Err(_) => Vec::new(),
            },
            Form::Case3Recip { v, .. } => v.zeros(t0, t1),
            Form::TwoDouble { c, lambda, .. } => {
                if lambda.im.abs() <= 1e-12 * lambda.norm() {
                    if c.re > 0.0 && lambda.re != 0.0 {
                        vec![-c.re.ln() / lambda.re]
                    } else {
                        Vec::new()
                    }
                } else {
                    let w = lambda.im;
                    progression(-c.arg() / w, 2.0 * PI / w.abs(), t0, t1)
                }
            }
        };
        out.retain(|t| *t >= t0 && *t <= t1);
        out.sort_by(|a, b| a.partial_cmp(b).unwrap());
        out.dedup_by(|a, b| (*a - *b).abs() < 1e-9);
        out
    }

    /// Times in [t0, t1] where the Case 1 sign branch flips.
    pub fn sign_flips(&self, t0: f64, t1: f64) -> Vec<f64> {
        match &self.form {
            Form::Case1Wp { flips: Some((base, per)), .. } => progression(*base, *per, t0, t1),
            _ => Vec::new(),
        }
    }

    pub fn summary(&self) -> ControlSummary {
        let a = self.shift();
        let roots = self
            .quartic
            .as_ref()
            .filter(|_| matches!(self.tag, LawTag::Case3Weierstrass | LawTag::Case3DoubleSin | LawTag::Case3DoubleExp | LawTag::Case3TwoDouble | LawTag::Case3Triple | LawTag::Case3Quadruple))
            .map(|q| q.roots.iter().map(|r| [r.re, r.im]).collect())
            .unwrap_or_default();
        let sign0 = match &self.form {
            Form::Case1Wp { sign0, .. } => Some(*sign0),
            _ => None,
        };
        ControlSummary {
            tag: self.tag.to_string(),
            g2: self.g2,
            g3: self.g3,
            a_re: a.map(|v| v.re),
            a_im: a.map(|v| v.im),
            roots,
            sign0,
            u0: self.u0,
        }
    }
}

fn check_real(u: C64, t: f64) -> Result<f64> {
    if !u.is_finite() {
        return Err(Error::Pole(t));
    }
    if u.im.abs() > 1e-6 * (1.0 + u.re.abs()) {
        return Err(Error::Domain(format!("complex control value {u} at t = {t}")));
    }
    Ok(u.re)
}

/// Number of flips base + kP between 0 and t, counting a flip at 0 on the negative side.
fn flip_count(base: f64, per: f64, t: f64) -> i64 {
    const EPS: f64 = 1e-9;
    let (lo, hi) = if t > EPS { (EPS, t) } else { (t, EPS) };
    let n = ((hi - base) / per).floor() - ((lo - base) / per).floor();
    n as i64
}

/// Invariants negligible against the natural scale `x` of the cubic variable.
fn tiny_invariants(g2: f64, g3: f64, x: f64) -> bool {
    g2.abs() <= 1e-12 * x * x && g3.abs() <= 1e-12 * x * x * x
}

/// Builds the closed-form extremal control through the initial state.
pub fn synthesize(st: &ExtremalState, alpha: f64, beta: f64, gamma: f64) -> Result<ExtremalControl> {
    let k = constants_of_motion(st, alpha, beta, gamma);
    let q = QuarticForm::new(alpha, beta, gamma, k);
    let scale = 1.0 + st.scale();
    let rhs = extremal_ode_rhs(st, alpha, beta, gamma);
    if alpha == 0.0 && gamma == 0.0 {
        return Err(Error::Domain("alpha = gamma = 0: B is parabolic and orthogonal to A".into()));
    }
    if st.uc.abs() <= EQ_TOL * scale && rhs.uc.abs() <= EQ_TOL * scale * scale * (1.0 + alpha.abs() + beta.abs() + gamma.abs()) {
        return Ok(ExtremalControl::new(LawTag::Constant, Form::Constant(st.ub), &q, None, st.ub));
    }
    if alpha == 0.0 {
        case1(st, beta, gamma, k, &q)
    } else if gamma == 0.0 {
        case2(st, alpha, beta, k, &q)
    } else {
        case3(st, gamma, &q)
    }
}

/// Case 3 ℘ law built from the root `idx` of the quartic.
pub fn synthesize_case3_with_root(
    st: &ExtremalState,
    alpha: f64,
    beta: f64,
    gamma: f64,
    idx: usize,
) -> Result<ExtremalControl> {
    let k = constants_of_motion(st, alpha, beta, gamma);
    let q = QuarticForm::new(alpha, beta, gamma, k);
    let x0 = *q
        .roots
        .get(idx)
        .ok_or_else(|| Error::Domain(format!("root index {idx} out of range")))?;
    case3_weierstrass(st, &q, x0)
}

fn case1(st: &ExtremalState, beta: f64, gamma: f64, k: ConstantsOfMotion, q: &QuarticForm) -> Result<ExtremalControl> {
    let p = beta - gamma * k.c1;
    let qq = beta * beta + 2.0 * gamma * k.c2;
    let g2 = p * p / 3.0 + qq;
    let g3 = p * (p * p - 9.0 * qq) / 27.0;
    let inv = WeierstrassInvariants::new(g2, g3);
    let (u0, du0) = (st.ub, -st.uc);
    let xs = beta.abs() + (gamma * k.c1).abs() + 0.25 * gamma.abs() * u0 * u0;
    if !(inv.is_degenerate() || tiny_invariants(g2, g3, xs)) {
        let w = Weierstrass::from_invariants(inv)?;
        let estar = p / 3.0;
        let w0 = 0.25 * gamma * u0 * u0 + estar;
        let dw0 = -0.5 * gamma * u0 * st.uc;
        let a = w.inverse_with_derivative(C64::new(w0, 0.0), C64::new(dw0, 0.0))?;
        let omega_star = w.half_period_for(C64::new(estar, 0.0));
        let scale = 1.0 + st.scale();
        let sign0 = if u0.abs() > 1e-14 * scale { sgn(u0) } else { sgn(-st.uc) };
        let per = 2.0 * w.lattice.omega1.re;
        let v = omega_star - a;
        let l2 = 2.0 * w.lattice.omega2;
        let n = v.im / l2.im;
        let flips = ((n - n.round()).abs() <= 1e-6).then(|| {
            let base = (v - n.round() * l2).re;
            (base.rem_euclid(per), per)
        });
        let mut others = [C64::new(0.0, 0.0); 2];
        let mut rest = w.inv.roots.to_vec();
        rest.sort_by(|x, y| (x - estar).norm().partial_cmp(&(y - estar).norm()).unwrap());
        others.copy_from_slice(&rest[1..]);
        let gap = (others[0] - estar).norm().min((others[1] - estar).norm());
        let form = Form::Case1Wp { w, gamma, estar, a, sign0, flips, others, gap };
        return Ok(ExtremalControl::new(LawTag::Case1Weierstrass, form, q, Some((g2, g3)), u0));
    }
    let g = Some((g2, g3));
    let pscale = beta.abs() + (gamma * k.c1).abs() + f64::MIN_POSITIVE;
    let mk = |tag, form| Ok(ExtremalControl::new(tag, form, q, g, u0));
    if p.abs() <= 1e-7 * pscale {
        // f = (γ/4)u⁴
        if gamma < 0.0 {
            return mk(LawTag::Constant, Form::Constant(u0));
        }
        let kk = sgn(du0) * 0.5 * gamma.sqrt() * u0;
        return mk(LawTag::Case1Rational, Form::Rational { u0, k: kk });
    }
    if qq.abs() <= (qq - p * p).abs() {
        // f = (γ/4)(u² + 2p/γ)²
        if gamma < 0.0 {
            return mk(LawTag::Constant, Form::Constant(u0));
        }
        if p < 0.0 {
            let kappa = (-2.0 * p / gamma).sqrt();
            let rate = (-0.5 * p).sqrt();
            if u0.abs() < kappa {
                let a = (u0 / kappa).atanh();
                mk(LawTag::Case1Tanh, Form::Tanh { kappa, omega: sgn(du0) * rate, a })
            } else {
                let a = (kappa / u0).atanh();
                mk(LawTag::Case1Coth, Form::Coth { kappa, omega: -sgn(du0) * rate, a })
            }
        } else {
            let kappa = (2.0 * p / gamma).sqrt();
            let a = (u0 / kappa).atan();
            mk(LawTag::Case1Tan, Form::Tan { kappa, omega: sgn(du0) * (0.5 * p).sqrt(), a })
        }
    } else {
        // f = u²((γ/4)u² + p)
        if u0.abs() <= 1e-14 * (1.0 + st.scale()) {
            return mk(LawTag::Constant, Form::Constant(0.0));
        }
        let kk = 2.0 * (p / gamma).abs().sqrt();
        match (gamma > 0.0, p > 0.0) {
            (false, false) => Err(Error::NoNontrivialSolution(
                "gamma < 0 and beta - gamma c1 < 0 admit only u = 0".into(),
            )),
            (false, true) => {
                let a = -sgn(du0 * u0) * (kk / u0.abs()).max(1.0).acosh();
                mk(LawTag::Case1Sech, Form::Sech { k: sgn(u0) * kk, omega: p.sqrt(), a })
            }
            (true, false) => {
                let a = sgn(du0 * u0) * (kk / u0.abs()).min(1.0).acos();
                mk(LawTag::Case1Sec, Form::Sec { k: sgn(u0) * kk, omega: (-p).sqrt(), a })
            }
            (true, true) => {
                let a = (kk / u0).asinh();
                mk(LawTag::Case1Csch, Form::Csch { k: kk, omega: -sgn(du0) * p.sqrt(), a })
            }
        }
    }
}

fn case2(st: &ExtremalState, alpha: f64, beta: f64, k: ConstantsOfMotion, q: &QuarticForm) -> Result<ExtremalControl> {
    let g2 = (beta * beta + 6.0 * alpha * alpha * k.c1) / 12.0;
    let g3 = (18.0 * alpha * alpha * beta * k.c1 + 27.0 * alpha * alpha * k.c2 - beta.powi(3)) / 216.0;
    let inv = WeierstrassInvariants::new(g2, g3);
    let x0 = 0.25 * alpha * st.ub + beta / 12.0;
    let dx0 = -0.25 * alpha * st.uc;
    let u0 = st.ub;
    let g = Some((g2, g3));
    let xref = x0.abs() + beta.abs() / 12.0 + (alpha * alpha * k.c1).abs().sqrt() + (alpha * alpha * k.c2).abs().cbrt();
    if !(inv.is_degenerate() || tiny_invariants(g2, g3, xref)) {
        let w = Weierstrass::from_invariants(inv)?;
        let a = w.inverse_with_derivative(C64::new(x0, 0.0), C64::new(dx0, 0.0))?;
        return Ok(ExtremalControl::new(LawTag::Case2Weierstrass, Form::Case2Wp { w, alpha, beta, a }, q, g, u0));
    }
    let e = -sgn(g3) * (g2.max(0.0) / 12.0).sqrt();
    let xs = 1.0 + x0.abs() + beta.abs() / 12.0;
    let mk = |tag, x| Ok(ExtremalControl::new(tag, Form::Case2Deg { alpha, beta, x }, q, g, u0));
    if e.abs() <= 1e-9 * xs {
        if x0.abs() <= 1e-14 * xs {
            return Ok(ExtremalControl::new(LawTag::Constant, Form::Constant(u0), q, g, u0));
        }
        let a = -sgn(dx0) / x0.max(0.0).sqrt();
        return mk(LawTag::Case2Rational, DegX::InvSquare { a });
    }
    if (x0 - e).abs() <= 1e-12 * xs {
        return Ok(ExtremalControl::new(LawTag::Constant, Form::Constant(u0), q, g, u0));
    }
    if e > 0.0 {
        let kk = (3.0 * e).sqrt();
        if x0 > e {
            let a = -sgn(dx0) * (3.0 * e / (x0 - e)).sqrt().asinh() / kk;
            mk(LawTag::Case2Sinh, DegX::Sinh { e, k: kk, a })
        } else {
            let a = sgn(dx0) * (3.0 * e / (e - x0)).sqrt().max(1.0).acosh() / kk;
            mk(LawTag::Case2Cosh, DegX::Cosh { e, k: kk, a })
        }
    } else {
        let eps = -e;
        let kk = (3.0 * eps).sqrt();
        let a = sgn(dx0) * ((x0 - 2.0 * eps).max(0.0) / (3.0 * eps)).sqrt().atan() / kk;
        mk(LawTag::Case2Tan2, DegX::Tan2 { eps, k: kk, a })
    }
}

fn case3(st: &ExtremalState, gamma: f64, q: &QuarticForm) -> Result<ExtremalControl> {
    let inv = WeierstrassInvariants::new(q.g2, q.g3);
    let u0 = st.ub;
    let rr = 1.0 + q.roots.iter().fold(0.0_f64, |m, r| m.max(r.norm()));
    let a0 = q.coeffs[0].abs();
    if !(inv.is_degenerate() || tiny_invariants(q.g2 / a0, q.g3 / (a0 * a0), rr * rr)) {
        // real root nearest uB0, else the complex root in the upper half plane
        let x0 = q
            .roots
            .iter()
            .filter(|r| r.im == 0.0)
            .min_by(|a, b| (a.re - u0).abs().partial_cmp(&(b.re - u0).abs()).unwrap())
            .copied()
            .or_else(|| q.roots.iter().find(|r| r.im > 0.0).copied())
            .ok_or_else(|| Error::NoSolution("quartic has no roots".into()))?;
        return case3_weierstrass(st, q, x0);
    }
    let mut groups = Vec::new();
    for tol in [1e-7, 1e-6, 1e-5, 1e-4, 1e-3] {
        groups = poly::cluster(&q.roots, tol);
        if groups[0].1 > 1 {
            break;
        }
    }
    for g in groups.iter_mut().filter(|g| g.1 > 1) {
        g.0 = poly::polish_multiple(&q.coeffs, g.0, g.1);
    }
    let mult: Vec<usize> = groups.iter().map(|g| g.1).collect();
    let g = Some((q.g2, q.g3));
    let big = 0.25 * gamma;
    let scale = 1.0 + st.scale();
    let constant = || Ok(ExtremalControl::new(LawTag::Constant, Form::Constant(u0), q, g, u0));
    match mult.as_slice() {
        [2, 1, 1] => {
            let x1 = groups[0].0.re;
            if (u0 - x1).abs() <= 1e-12 * scale {
                return constant();
            }
            let (d3, d4) = (C64::new(x1, 0.0) - groups[1].0, C64::new(x1, 0.0) - groups[2].0);
            let p = big * (d3 * d4).re;
            let qq = big * (d3 + d4).re;
            let v0 = 1.0 / (u0 - x1);
            let v1 = st.uc * v0 * v0;
            let vc = -qq / (2.0 * p);
            let (tag, v) = if p < 0.0 {
                (LawTag::Case3DoubleSin, VForm::Trig { vc, w0: v0 - vc, w1: v1, omega: (-p).sqrt() })
            } else {
                (LawTag::Case3DoubleExp, VForm::Hyp { vc, w0: v0 - vc, w1: v1, omega: p.sqrt() })
            };
            Ok(ExtremalControl::new(tag, Form::Case3Recip { x1, v }, q, g, u0))
        }
        [2, 2] => {
            let (x1, x3) = (groups[0].0, groups[1].0);
            let near = |x: C64| (C64::new(u0, 0.0) - x).norm() <= 1e-12 * scale;
            if near(x1) || near(x3) {
                return constant();
            }
            if gamma < 0.0 {
                return Err(Error::NoNontrivialSolution(
                    "two double roots with gamma < 0 admit only constant controls".into(),
                ));
            }
            let uu = C64::new(u0, 0.0);
            let prod = ((uu - x1) * (uu - x3)).re;
            let sigma = sgn(-st.uc * prod);
            let lambda = sigma * big.sqrt() * (x1 - x3);
            let c = (uu - x1) / (uu - x3);
            Ok(ExtremalControl::new(LawTag::Case3TwoDouble, Form::TwoDouble { x1, x3, c, lambda }, q, g, u0))
        }
        [3, 1] => {
            let x1 = groups[0].0.re;
            if (u0 - x1).abs() <= 1e-12 * scale {
                return constant();
            }
            let d4 = x1 - groups[1].0.re;
            let v0 = 1.0 / (u0 - x1);
            let v = VForm::Quad { v0, v1: st.uc * v0 * v0, v2: big * d4 / 4.0 };
            Ok(ExtremalControl::new(LawTag::Case3Triple, Form::Case3Recip { x1, v }, q, g, u0))
        }
        [4] => {
            let x1 = groups[0].0.re;
            if (u0 - x1).abs() <= 1e-12 * scale {
                return constant();
            }
            if gamma < 0.0 {
                return Err(Error::NoNontrivialSolution("quadruple root with gamma < 0 has no real solution".into()));
            }
            let v0 = 1.0 / (u0 - x1);
            let v = VForm::Lin { v0, v1: st.uc * v0 * v0 };
            Ok(ExtremalControl::new(LawTag::Case3Quadruple, Form::Case3Recip { x1, v }, q, g, u0))
        }
        _ => Err(Error::DegenerateLattice(inv.discriminant)),
    }
}

fn case3_weierstrass(st: &ExtremalState, q: &QuarticForm, x0: C64) -> Result<ExtremalControl> {
    let w = Weierstrass::new(q.g2, q.g3)?;
    let f1 = q.derivative(x0);
    let f2 = q.second_derivative(x0);
    let u0 = C64::new(st.ub, 0.0);
    let scale = 1.0 + st.scale();
    let a = if (u0 - x0).norm() <= 1e-13 * scale {
        C64::new(0.0, 0.0)
    } else {
        let d = u0 - x0;
        let w0 = f1 / (4.0 * d) + f2 / 24.0;
        let dw0 = st.uc * f1 / (4.0 * d * d);
        w.inverse_with_derivative(w0, dw0)?
    };
    let form = Form::Case3Wp { w, x0, f1, f2, a };
    Ok(ExtremalControl::new(LawTag::Case3Weierstrass, form, q, Some((q.g2, q.g3)), st.ub))
}
