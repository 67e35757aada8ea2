//! Shooting for the two-point boundary problem X(0) = I₂, X(T) = X_f.

use crate::algebra::{conjugate, expm, frobenius_distance, inner, inner_dagger, AlgebraElement, GroupElement};
use crate::controllability::is_controllable;
use crate::error::{Error, Result};
use crate::problem::Problem;
use crate::propagate::{propagate_with, ConstantLaw, Scheme};
use crate::synthesis::{
    abnormal_control, constants_of_motion, costate_init, synthesize, transported_costate, Costate, ExtremalControl,
    ExtremalState, LawTag,
};
use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SearchConfig {
    /// Half-width of the box for costate coefficients.
    pub costate_bound: f64,
    /// Number of multistart points.
    pub starts: usize,
    /// Accepted terminal Frobenius residual.
    pub tol: f64,
    pub max_t: f64,
    pub min_t: f64,
    /// Fixed final times; empty means T is free.
    pub final_times: Vec<f64>,
    pub seed: u64,
    /// RK4 step of the coupled costate/state flow during search.
    pub flow_step: f64,
    /// Finer flow step used for polishing.
    pub polish_step: f64,
    /// Step of the verifying propagation.
    pub prop_step: f64,
    pub max_iter: usize,
    /// Distance-scan minima per start that are refined (free T only).
    pub minima_per_start: usize,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            costate_bound: 3.0,
            starts: 64,
            tol: 1e-6,
            max_t: 40.0,
            min_t: 0.1,
            final_times: Vec::new(),
            seed: 1,
            flow_step: 0.01,
            polish_step: 0.0025,
            prop_step: 1e-3,
            max_iter: 60,
            minima_per_start: 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Candidate {
    pub costate: Costate,
    pub t_final: f64,
    pub control: ExtremalControl,
    pub cost: f64,
    pub residual: f64,
}

impl Candidate {
    pub fn tag(&self) -> LawTag {
        self.control.tag()
    }

    pub fn summary(&self) -> CandidateSummary {
        let s = self.control.summary();
        CandidateSummary {
            costate: [self.costate.sx, self.costate.sy, self.costate.sz],
            lambda0: self.costate.lambda0,
            t_final: self.t_final,
            cost: self.cost,
            residual: self.residual,
            tag: s.tag,
            g2: s.g2,
            g3: s.g3,
            a: s.a_re.zip(s.a_im).map(|(r, i)| [r, i]),
        }
    }
}

/// Machine-readable candidate record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateSummary {
    pub costate: [f64; 3],
    pub lambda0: f64,
    #[serde(rename = "T")]
    pub t_final: f64,
    #[serde(rename = "J")]
    pub cost: f64,
    pub residual: f64,
    pub tag: String,
    pub g2: Option<f64>,
    pub g3: Option<f64>,
    pub a: Option<[f64; 2]>,
}

/// sz on the Example 2 endpoint plane.
pub fn example2_manifold(sx: f64, sy: f64) -> f64 {
    example2_coefficient() * (sx + sy)
}

pub fn example2_coefficient() -> f64 {
    let r = 2.0 * 2.0_f64.sqrt();
    r.sinh() / (2.0_f64.sqrt() * (r.cosh() - 1.0))
}

/// (Δc₁, Δc₂) between the initial costate pairings and those transported by X.
pub fn endpoint_relations(s: &Costate, x: &GroupElement, problem: &Problem) -> (f64, f64) {
    let sys = &problem.system;
    let st0 = costate_init(s, sys.a, sys.b);
    let st1 = transported_costate(s, sys.a, sys.b, x);
    let k0 = constants_of_motion(&st0, sys.alpha, sys.beta, sys.gamma);
    let k1 = constants_of_motion(&st1, sys.alpha, sys.beta, sys.gamma);
    (k1.c1 - k0.c1, k1.c2 - k0.c2)
}

/// Both endpoint relations at X_f hold to 1e−6 (relative to the costate scale).
pub fn endpoint_filter(s: &Costate, _t_final: f64, problem: &Problem) -> bool {
    let (d1, d2) = endpoint_relations(s, &problem.target, problem);
    let st = costate_init(s, problem.a(), problem.b());
    let scale = 1.0 + st.ua.abs() + st.ub * st.ub + st.uc * st.uc;
    d1.abs() <= 1e-6 * scale && d2.abs() <= 1e-6 * scale
}

/// Terminal Frobenius distance of the closed-form extremal through S.
pub fn residual(s: &Costate, t_final: f64, problem: &Problem) -> Result<f64> {
    let law = law_for(s, problem)?;
    let tr = propagate_with(problem.a(), problem.b(), &law, t_final, problem.search.prop_step, Scheme::Magnus4)?;
    Ok(frobenius_distance(tr.final_state(), &problem.target))
}

fn law_for(s: &Costate, problem: &Problem) -> Result<ExtremalControl> {
    let sys = &problem.system;
    synthesize(&costate_init(s, sys.a, sys.b), sys.alpha, sys.beta, sys.gamma)
}

/// Coupled (uA, uB, uC, X) right-hand side.
#[derive(Clone, Copy)]
struct Flow {
    a: AlgebraElement,
    b: AlgebraElement,
    alpha: f64,
    beta: f64,
    gamma: f64,
}

type Y = (ExtremalState, [[C64; 2]; 2]);

impl Flow {
    fn rhs(&self, y: &Y) -> Y {
        let (st, x) = y;
        let g = (self.a + st.ub * self.b).matrix();
        let mut dx = [[C64::new(0.0, 0.0); 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                dx[i][j] = g[i][0] * x[0][j] + g[i][1] * x[1][j];
            }
        }
        let d = crate::synthesis::extremal_ode_rhs(st, self.alpha, self.beta, self.gamma);
        (d, dx)
    }

    fn axpy(y: &Y, d: &Y, h: f64) -> Y {
        let mut x = y.1;
        for i in 0..2 {
            for j in 0..2 {
                x[i][j] += h * d.1[i][j];
            }
        }
        (
            ExtremalState::new(y.0.ua + h * d.0.ua, y.0.ub + h * d.0.ub, y.0.uc + h * d.0.uc),
            x,
        )
    }

    fn rk4(&self, y: &Y, h: f64) -> Y {
        let k1 = self.rhs(y);
        let k2 = self.rhs(&Self::axpy(y, &k1, 0.5 * h));
        let k3 = self.rhs(&Self::axpy(y, &k2, 0.5 * h));
        let k4 = self.rhs(&Self::axpy(y, &k3, h));
        let mut out = *y;
        out = Self::axpy(&out, &k1, h / 6.0);
        out = Self::axpy(&out, &k2, h / 3.0);
        out = Self::axpy(&out, &k3, h / 3.0);
        Self::axpy(&out, &k4, h / 6.0)
    }

    fn start(&self, s: &Costate) -> Y {
        (costate_init(s, self.a, self.b), GroupElement::identity().m)
    }

    /// X(T) along the extremal through S.
    fn terminal(&self, s: &Costate, t_final: f64, step: f64) -> Result<[[C64; 2]; 2]> {
        let n = (t_final / step).ceil().max(1.0) as usize;
        let h = t_final / n as f64;
        let mut y = self.start(s);
        for i in 0..n {
            y = self.rk4(&y, h);
            if !(y.0.ub.abs() < 1e6) {
                return Err(Error::Pole(i as f64 * h));
            }
        }
        Ok(y.1)
    }
}

fn mat_residual(x: &[[C64; 2]; 2], target: &GroupElement) -> Vec<f64> {
    let mut r = Vec::with_capacity(8);
    for i in 0..2 {
        for j in 0..2 {
            let d = x[i][j] - target.m[i][j];
            r.push(d.re);
            r.push(d.im);
        }
    }
    r
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Solves the small dense system M x = r by Gaussian elimination with pivoting.
fn solve_dense(mut m: Vec<Vec<f64>>, mut r: Vec<f64>) -> Option<Vec<f64>> {
    let n = r.len();
    for c in 0..n {
        let p = (c..n).max_by(|&i, &j| m[i][c].abs().partial_cmp(&m[j][c].abs()).unwrap())?;
        if m[p][c].abs() < 1e-300 {
            return None;
        }
        m.swap(c, p);
        r.swap(c, p);
        for i in c + 1..n {
            let f = m[i][c] / m[c][c];
            for k in c..n {
                m[i][k] -= f * m[c][k];
            }
            r[i] -= f * r[c];
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = (i + 1..n).map(|k| m[i][k] * x[k]).sum();
        x[i] = (r[i] - s) / m[i][i];
    }
    Some(x)
}

/// Levenberg–Marquardt with a central-difference Jacobian, box-clamped.
fn levenberg_marquardt<F>(f: F, x0: Vec<f64>, lo: &[f64], hi: &[f64], max_iter: usize, ftol: f64) -> Option<(Vec<f64>, f64)>
where
    F: Fn(&[f64]) -> Result<Vec<f64>>,
{
    let clamp = |x: &mut Vec<f64>| {
        for i in 0..x.len() {
            x[i] = x[i].clamp(lo[i], hi[i]);
        }
    };
    let mut x = x0;
    clamp(&mut x);
    let mut r = f(&x).ok()?;
    let mut rn = norm(&r);
    let mut mu = 1e-3;
    let n = x.len();
    for _ in 0..max_iter {
        if rn <= ftol {
            break;
        }
        let mut jac = vec![vec![0.0; n]; r.len()];
        for j in 0..n {
            let h = 1e-6 * (1.0 + x[j].abs());
            let mut xp = x.clone();
            let mut xm = x.clone();
            xp[j] += h;
            xm[j] -= h;
            let (rp, rm) = (f(&xp).ok()?, f(&xm).ok()?);
            for i in 0..r.len() {
                jac[i][j] = (rp[i] - rm[i]) / (2.0 * h);
            }
        }
        let mut jtj = vec![vec![0.0; n]; n];
        let mut jtr = vec![0.0; n];
        for i in 0..r.len() {
            for a in 0..n {
                jtr[a] -= jac[i][a] * r[i];
                for b in 0..n {
                    jtj[a][b] += jac[i][a] * jac[i][b];
                }
            }
        }
        let mut improved = false;
        while mu < 1e12 {
            let mut m = jtj.clone();
            for a in 0..n {
                m[a][a] += mu * jtj[a][a].max(1e-12);
            }
            let Some(d) = solve_dense(m, jtr.clone()) else {
                mu *= 4.0;
                continue;
            };
            let mut xn: Vec<f64> = x.iter().zip(&d).map(|(a, b)| a + b).collect();
            clamp(&mut xn);
            if let Ok(rr) = f(&xn) {
                let nn = norm(&rr);
                if nn < rn {
                    let small = norm(&d) <= 1e-15 * (1.0 + norm(&x));
                    x = xn;
                    r = rr;
                    rn = nn;
                    mu = (mu / 3.0).max(1e-12);
                    improved = !small;
                    break;
                }
            }
            mu *= 4.0;
        }
        if !improved {
            break;
        }
    }
    Some((x, rn))
}

/// Costate parameterization S = Σ σ_i e_i over an orthonormal basis of the search space.
fn search_basis(problem: &Problem) -> Vec<AlgebraElement> {
    let (a, b) = (problem.a(), problem.b());
    let xf = &problem.target;
    let xi = xf.inverse();
    let fixed = (conjugate(&xi, b) - b).norm() <= 1e-9 * b.norm();
    let n = a - conjugate(&xi, a);
    let std = vec![AlgebraElement::kx(), AlgebraElement::ky(), AlgebraElement::kz()];
    if !fixed || n.norm() <= 1e-9 * a.norm() {
        return std;
    }
    // orthonormal basis of the plane ⟨S, n⟩ = 0
    let nn = (1.0 / n.norm()) * n;
    let mut basis: Vec<AlgebraElement> = Vec::new();
    for e in std {
        let mut v = e - inner(e, nn) * nn;
        for q in &basis {
            v = v - inner(v, *q) * *q;
        }
        if v.norm() > 1e-6 {
            basis.push((1.0 / v.norm()) * v);
        }
        if basis.len() == 2 {
            break;
        }
    }
    basis
}

fn costate_from(basis: &[AlgebraElement], sigma: &[f64]) -> Costate {
    let s = basis
        .iter()
        .zip(sigma)
        .fold(AlgebraElement::zero(), |acc, (e, c)| acc + *c * *e);
    Costate::from_element(s, 1.0)
}

struct Raw {
    sigma: Vec<f64>,
    t_final: f64,
}

/// Free-T seeds: local minima of ‖X(t) − X_f‖ along the flow from S.
fn scan_minima(flow: &Flow, s: &Costate, target: &GroupElement, cfg: &SearchConfig) -> Vec<f64> {
    let n = (cfg.max_t / cfg.flow_step).ceil() as usize;
    let h = cfg.max_t / n as f64;
    let mut y = flow.start(s);
    let dist = |y: &Y| norm(&mat_residual(&y.1, target));
    let mut prev2 = f64::INFINITY;
    let mut prev = dist(&y);
    let mut mins: Vec<(f64, f64)> = Vec::new();
    for i in 1..=n {
        y = flow.rk4(&y, h);
        if !(y.0.ub.abs() < 1e6) {
            break;
        }
        let d = dist(&y);
        let t = (i - 1) as f64 * h;
        if prev < prev2 && prev <= d && t >= cfg.min_t {
            mins.push((prev, t));
        }
        prev2 = prev;
        prev = d;
    }
    mins.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    mins.into_iter()
        .filter(|m| m.0 < 1.0 + 0.5 * norm(&mat_residual(&GroupElement::identity().m, target)))
        .take(cfg.minima_per_start)
        .map(|m| m.1)
        .collect()
}

fn refine(flow: &Flow, basis: &[AlgebraElement], target: &GroupElement, cfg: &SearchConfig, sigma: Vec<f64>, t: Option<f64>, fixed_t: Option<f64>) -> Option<Raw> {
    let d = basis.len();
    let b = cfg.costate_bound * 4.0;
    let mut lo = vec![-b; d];
    let mut hi = vec![b; d];
    let mut x0 = sigma;
    if let Some(t) = t {
        x0.push(t);
        lo.push(0.5 * cfg.min_t.max(1e-3));
        hi.push(1.1 * cfg.max_t);
    }
    let tt = fixed_t;
    let run = |step: f64, x0: Vec<f64>, iters: usize| {
        levenberg_marquardt(
            |x: &[f64]| {
                let s = costate_from(basis, &x[..d]);
                let tf = tt.unwrap_or_else(|| x[d]);
                Ok(mat_residual(&flow.terminal(&s, tf, step)?, target))
            },
            x0,
            &lo,
            &hi,
            iters,
            1e-11,
        )
    };
    let (x, r) = run(cfg.flow_step, x0, cfg.max_iter)?;
    if r > 1e-3 {
        return None;
    }
    let (x, r) = run(cfg.polish_step, x, 20)?;
    if r > 10.0 * cfg.tol {
        return None;
    }
    let t_final = tt.unwrap_or_else(|| x[d]);
    Some(Raw { sigma: x[..d].to_vec(), t_final })
}

/// Re-synthesizes and re-propagates a raw solution; None if it fails any check.
fn verify(problem: &Problem, s: Costate, t_final: f64) -> Option<Candidate> {
    let cfg = &problem.search;
    let law = law_for(&s, problem).ok()?;
    if !law.poles_in(0.0, t_final).is_empty() {
        return None;
    }
    let tr = propagate_with(problem.a(), problem.b(), &law, t_final, cfg.prop_step, Scheme::Magnus4).ok()?;
    let res = frobenius_distance(tr.final_state(), &problem.target);
    if res > cfg.tol || !endpoint_filter(&s, t_final, problem) {
        return None;
    }
    for k in 0..16 {
        let t = t_final * (k as f64 + 0.5) / 16.0;
        if law.poles_in(t - 0.01, t + 0.01).is_empty() {
            let u = law.evaluate(t).ok()?;
            if law.ode_residual(t).ok()? > 1e-6 * (1.0 + u * u).powi(2) {
                return None;
            }
        }
    }
    Some(Candidate { costate: s, t_final, control: law, cost: tr.cost(), residual: res })
}

/// Abnormal candidates exp(c(A + uB)) = X_f with c ∈ (0, max T].
pub fn abnormal_candidates(problem: &Problem) -> Vec<Candidate> {
    let (a, b) = (problem.a(), problem.b());
    let Some((u, d)) = abnormal_control(a, b) else {
        return Vec::new();
    };
    let xf = &problem.target;
    let x = 0.5 * (xf.m[0][0] + xf.m[1][1]).re;
    let mut m = xf.m;
    m[0][0] -= x;
    m[1][1] -= x;
    let mel = AlgebraElement::from_matrix(&m);
    let mu = inner(mel, d) / inner(d, d);
    if (mel - mu * d).norm() > 1e-9 * (1.0 + mel.norm()) {
        return Vec::new();
    }
    let delta = 0.25 * inner_dagger(d, d);
    let max_t = problem.search.max_t;
    let mut cs = Vec::new();
    if delta < -1e-14 {
        let w = (-delta).sqrt();
        let th = (mu * w).atan2(x).rem_euclid(2.0 * PI);
        let mut c = th / w;
        while c <= max_t {
            if c > 0.0 {
                cs.push(c);
            }
            c += 2.0 * PI / w;
        }
    } else if delta > 1e-14 {
        let w = delta.sqrt();
        let c = (mu * w).asinh() / w;
        if c > 0.0 && ((c * w).cosh() - x).abs() < 1e-9 * x.abs().max(1.0) {
            cs.push(c);
        }
    } else if (x - 1.0).abs() < 1e-9 && mu > 0.0 {
        cs.push(mu);
    }
    // S ⟂ B and S ⟂ [A, B]
    let ab = crate::algebra::commutator(a, b);
    let cr = AlgebraElement::new(b.y * ab.z - b.z * ab.y, b.z * ab.x - b.x * ab.z, b.x * ab.y - b.y * ab.x);
    let sdir = if cr.norm() > 0.0 { (1.0 / cr.norm()) * cr } else { cr };
    cs.into_iter()
        .filter_map(|c| {
            let tr = propagate_with(a, b, &ConstantLaw(u), c, problem.search.prop_step, Scheme::Magnus4).ok()?;
            let res = frobenius_distance(&expm(c * d), xf).max(frobenius_distance(tr.final_state(), xf));
            Some(Candidate {
                costate: Costate::from_element(sdir, 0.0),
                t_final: c,
                control: ExtremalControl::abnormal(u),
                cost: u * u * c,
                residual: res,
            })
        })
        .collect()
}

/// Multistart search; candidates deduplicated and sorted by cost.
pub fn solve(problem: &Problem) -> Result<Vec<Candidate>> {
    let sys = &problem.system;
    let v = is_controllable(sys.a, sys.b);
    if !v.controllable {
        return Err(Error::Uncontrollable(v.reason.label().to_string()));
    }
    let cfg = &problem.search;
    let basis = search_basis(problem);
    let flow = Flow { a: sys.a, b: sys.b, alpha: sys.alpha, beta: sys.beta, gamma: sys.gamma };
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    // random direction, log-uniform radius in [bound/100, bound]
    let starts: Vec<Vec<f64>> = (0..cfg.starts)
        .map(|_| {
            let mut v: Vec<f64> = (0..basis.len()).map(|_| rng.gen_range(-1.0..=1.0)).collect();
            let n = norm(&v).max(1e-12);
            let r = cfg.costate_bound * 10f64.powf(-2.0 * rng.gen::<f64>());
            v.iter_mut().for_each(|x| *x *= r / n);
            v
        })
        .collect();
    let target = &problem.target;
    let raws: Vec<Raw> = starts
        .into_par_iter()
        .flat_map_iter(|sigma| {
            let mut out = Vec::new();
            if cfg.final_times.is_empty() {
                let s = costate_from(&basis, &sigma);
                for t in scan_minima(&flow, &s, target, cfg) {
                    out.extend(refine(&flow, &basis, target, cfg, sigma.clone(), Some(t), None));
                }
            } else {
                for &t in &cfg.final_times {
                    out.extend(refine(&flow, &basis, target, cfg, sigma.clone(), None, Some(t)));
                }
            }
            out
        })
        .collect();
    let mut cands: Vec<Candidate> = raws
        .into_par_iter()
        .filter_map(|r| verify(problem, costate_from(&basis, &r.sigma), r.t_final))
        .collect();
    cands.extend(abnormal_candidates(problem));
    Ok(dedup_sorted(cands))
}

fn costate_distance(a: &Costate, b: &Costate) -> f64 {
    (a.element() - b.element()).norm().max((a.lambda0 - b.lambda0).abs())
}

fn dedup_sorted(mut cands: Vec<Candidate>) -> Vec<Candidate> {
    cands.sort_by(|a, b| a.residual.partial_cmp(&b.residual).unwrap());
    let mut out: Vec<Candidate> = Vec::new();
    for c in cands {
        if !out
            .iter()
            .any(|o| costate_distance(&o.costate, &c.costate) <= 1e-4 && (o.t_final - c.t_final).abs() <= 1e-2)
        {
            out.push(c);
        }
    }
    out.sort_by(|a, b| a.cost.partial_cmp(&b.cost).unwrap().then(a.t_final.partial_cmp(&b.t_final).unwrap()));
    out
}
