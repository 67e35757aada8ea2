//! Geometric integration of dX/dt = (A + uB)X, energy cost and the piecewise-constant baseline.

use crate::algebra::{commutator, expm, frobenius_distance, AlgebraElement, GroupElement};
use crate::error::{Error, Result};
use crate::synthesis::ExtremalControl;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, SQRT_2};
use std::io::{Read, Write};

pub const DEFAULT_STEP: f64 = 1e-3;

/// A scalar control u(t).
pub trait ControlLaw: Sync {
    fn value(&self, t: f64) -> Result<f64>;

    /// One-sided limit at t; differs from `value` only at switch times.
    fn value_side(&self, t: f64, _right: bool) -> Result<f64> {
        self.value(t)
    }

    /// Discontinuities in [t0, t1].
    fn switch_times(&self, _t0: f64, _t1: f64) -> Vec<f64> {
        Vec::new()
    }

    /// Singularities in [t0, t1].
    fn poles(&self, _t0: f64, _t1: f64) -> Vec<f64> {
        Vec::new()
    }
}

impl ControlLaw for ExtremalControl {
    fn value(&self, t: f64) -> Result<f64> {
        self.evaluate(t)
    }

    fn poles(&self, t0: f64, t1: f64) -> Vec<f64> {
        self.poles_in(t0, t1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstantLaw(pub f64);

impl ControlLaw for ConstantLaw {
    fn value(&self, _t: f64) -> Result<f64> {
        Ok(self.0)
    }
}

/// Wraps a closure as a smooth control law.
pub struct FnLaw<F>(pub F);

impl<F: Fn(f64) -> f64 + Sync> ControlLaw for FnLaw<F> {
    fn value(&self, t: f64) -> Result<f64> {
        Ok((self.0)(t))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum Scheme {
    /// Exponential of the generator frozen at the step midpoint.
    #[default]
    Midpoint,
    /// Fourth-order Magnus step with two Gauss points.
    Magnus4,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    /// Nondecreasing; switch times appear twice (left and right limits).
    pub times: Vec<f64>,
    pub states: Vec<GroupElement>,
    pub controls: Vec<f64>,
    pub cost_to_date: Vec<f64>,
    pub distance: Option<Vec<f64>>,
}

impl Trajectory {
    pub fn final_state(&self) -> &GroupElement {
        self.states.last().expect("trajectory is never empty")
    }

    pub fn final_time(&self) -> f64 {
        *self.times.last().unwrap()
    }

    pub fn cost(&self) -> f64 {
        *self.cost_to_date.last().unwrap()
    }

    pub fn with_distance(mut self, target: &GroupElement) -> Self {
        self.distance = Some(distance_series(&self, target));
        self
    }

    /// Largest |det X − 1| and |X†ηX − η| over the grid.
    pub fn invariant_drift(&self) -> f64 {
        self.states
            .iter()
            .map(|x| {
                let (a, b) = x.invariant_errors();
                a.max(b)
            })
            .fold(0.0, f64::max)
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        for i in 0..self.times.len() {
            let m = &self.states[i].m;
            w.serialize(CsvRow {
                t: self.times[i],
                u: self.controls[i],
                x11_re: m[0][0].re,
                x11_im: m[0][0].im,
                x12_re: m[0][1].re,
                x12_im: m[0][1].im,
                x21_re: m[1][0].re,
                x21_im: m[1][0].im,
                x22_re: m[1][1].re,
                x22_im: m[1][1].im,
                dist: self.distance.as_ref().map(|d| d[i]),
                cost: self.cost_to_date[i],
            })?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(input: R) -> Result<Self> {
        let mut r = csv::Reader::from_reader(input);
        let mut tr = Trajectory {
            times: Vec::new(),
            states: Vec::new(),
            controls: Vec::new(),
            cost_to_date: Vec::new(),
            distance: None,
        };
        let mut dist = Vec::new();
        for row in r.deserialize() {
            let row: CsvRow = row?;
            tr.times.push(row.t);
            tr.controls.push(row.u);
            tr.cost_to_date.push(row.cost);
            tr.states.push(GroupElement {
                m: [
                    [C64::new(row.x11_re, row.x11_im), C64::new(row.x12_re, row.x12_im)],
                    [C64::new(row.x21_re, row.x21_im), C64::new(row.x22_re, row.x22_im)],
                ],
            });
            dist.push(row.dist);
        }
        if tr.times.is_empty() {
            return Err(Error::Parse("empty trajectory file".into()));
        }
        if dist.iter().all(|d| d.is_some()) {
            tr.distance = Some(dist.into_iter().map(|d| d.unwrap()).collect());
        }
        Ok(tr)
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct CsvRow {
    t: f64,
    u: f64,
    #[serde(rename = "X11_re")]
    x11_re: f64,
    #[serde(rename = "X11_im")]
    x11_im: f64,
    #[serde(rename = "X12_re")]
    x12_re: f64,
    #[serde(rename = "X12_im")]
    x12_im: f64,
    #[serde(rename = "X21_re")]
    x21_re: f64,
    #[serde(rename = "X21_im")]
    x21_im: f64,
    #[serde(rename = "X22_re")]
    x22_re: f64,
    #[serde(rename = "X22_im")]
    x22_im: f64,
    dist: Option<f64>,
    cost: f64,
}

/// Trapezoid rule for ∫u² over a (possibly repeated-node) grid.
pub fn trapezoid_cost(times: &[f64], controls: &[f64]) -> Vec<f64> {
    let mut acc = Vec::with_capacity(times.len());
    let mut j = 0.0;
    acc.push(0.0);
    for i in 1..times.len() {
        j += 0.5 * (times[i] - times[i - 1]) * (controls[i] * controls[i] + controls[i - 1] * controls[i - 1]);
        acc.push(j);
    }
    acc
}

pub fn cost(traj: &Trajectory) -> f64 {
    traj.cost()
}

pub fn distance_series(traj: &Trajectory, target: &GroupElement) -> Vec<f64> {
    traj.states.iter().map(|x| frobenius_distance(x, target)).collect()
}

/// Segment boundaries of [0, T]: endpoints plus switch times.
fn segments(law: &dyn ControlLaw, t_final: f64) -> Result<Vec<f64>> {
    if let Some(&p) = law.poles(0.0, t_final).first() {
        return Err(Error::Pole(p));
    }
    let mut b = vec![0.0];
    for s in law.switch_times(0.0, t_final) {
        if s > 0.0 && s < t_final {
            b.push(s);
        }
    }
    b.push(t_final);
    b.sort_by(|x, y| x.partial_cmp(y).unwrap());
    b.dedup();
    Ok(b)
}

fn step_generator(
    a: AlgebraElement,
    b: AlgebraElement,
    law: &dyn ControlLaw,
    t: f64,
    h: f64,
    scheme: Scheme,
) -> Result<AlgebraElement> {
    Ok(match scheme {
        Scheme::Midpoint => h * (a + law.value(t + 0.5 * h)? * b),
        Scheme::Magnus4 => {
            let c = 3.0_f64.sqrt() / 6.0;
            let g1 = a + law.value(t + (0.5 - c) * h)? * b;
            let g2 = a + law.value(t + (0.5 + c) * h)? * b;
            (0.5 * h) * (g1 + g2) + (3.0_f64.sqrt() * h * h / 12.0) * commutator(g2, g1)
        }
    })
}

/// Integrates from X(0) = I over [0, T], recording every grid point.
pub fn propagate_with(
    a: AlgebraElement,
    b: AlgebraElement,
    law: &dyn ControlLaw,
    t_final: f64,
    step: f64,
    scheme: Scheme,
) -> Result<Trajectory> {
    if !(t_final >= 0.0) || !(step > 0.0) {
        return Err(Error::Domain(format!("need T >= 0 and step > 0, got T = {t_final}, step = {step}")));
    }
    let bounds = segments(law, t_final)?;
    let mut x = GroupElement::identity();
    let mut times = vec![0.0];
    let mut states = vec![x];
    let mut controls = vec![law.value_side(0.0, true)?];
    for (k, w) in bounds.windows(2).enumerate() {
        let (t0, t1) = (w[0], w[1]);
        if k > 0 {
            // right limit at the switch
            times.push(t0);
            states.push(x);
            controls.push(law.value_side(t0, true)?);
        }
        let n = ((t1 - t0) / step).ceil().max(1.0) as usize;
        let h = (t1 - t0) / n as f64;
        for i in 0..n {
            let t = t0 + i as f64 * h;
            x = expm(step_generator(a, b, law, t, h, scheme)?).mul(&x);
            let tn = if i + 1 == n { t1 } else { t + h };
            times.push(tn);
            states.push(x);
            controls.push(if i + 1 == n { law.value_side(t1, false)? } else { law.value(tn)? });
        }
    }
    let cost_to_date = trapezoid_cost(&times, &controls);
    Ok(Trajectory { times, states, controls, cost_to_date, distance: None })
}

/// Midpoint-exponential propagation.
pub fn propagate(a: AlgebraElement, b: AlgebraElement, law: &dyn ControlLaw, t_final: f64, step: f64) -> Result<Trajectory> {
    propagate_with(a, b, law, t_final, step, Scheme::Midpoint)
}

/// X(T) without storing the grid.
pub fn terminal_state(
    a: AlgebraElement,
    b: AlgebraElement,
    law: &dyn ControlLaw,
    t_final: f64,
    step: f64,
    scheme: Scheme,
) -> Result<GroupElement> {
    let bounds = segments(law, t_final)?;
    let mut x = GroupElement::identity();
    for w in bounds.windows(2) {
        let (t0, t1) = (w[0], w[1]);
        let n = ((t1 - t0) / step).ceil().max(1.0) as usize;
        let h = (t1 - t0) / n as f64;
        for i in 0..n {
            x = expm(step_generator(a, b, law, t0 + i as f64 * h, h, scheme)?).mul(&x);
        }
    }
    Ok(x)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RichardsonReport {
    /// ‖X_h − X_{h/2}‖_F.
    pub coarse_diff: f64,
    /// ‖X_{h/2} − X_{h/4}‖_F.
    pub fine_diff: f64,
    /// coarse_diff / fine_diff; about 4 for a second-order scheme.
    pub ratio: f64,
    /// Extrapolated error of the step-h/4 solution.
    pub error_estimate: f64,
}

/// Step-halving check of the midpoint scheme at T.
pub fn richardson_check(
    a: AlgebraElement,
    b: AlgebraElement,
    law: &dyn ControlLaw,
    t_final: f64,
    step: f64,
) -> Result<RichardsonReport> {
    let x1 = terminal_state(a, b, law, t_final, step, Scheme::Midpoint)?;
    let x2 = terminal_state(a, b, law, t_final, 0.5 * step, Scheme::Midpoint)?;
    let x3 = terminal_state(a, b, law, t_final, 0.25 * step, Scheme::Midpoint)?;
    let coarse_diff = frobenius_distance(&x1, &x2);
    let fine_diff = frobenius_distance(&x2, &x3);
    Ok(RichardsonReport {
        coarse_diff,
        fine_diff,
        ratio: coarse_diff / fine_diff,
        error_estimate: fine_diff / 3.0,
    })
}

/// Piecewise-constant law: 0, then c/√2 for t2, then 0, with idle windings 2πn1, 2πn2.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BaselineLaw {
    pub c: f64,
    pub t1: f64,
    pub t2: f64,
    pub n1: u32,
    pub n2: u32,
}

fn arcoth(y: f64) -> f64 {
    0.5 * ((y + 1.0) / (y - 1.0)).ln()
}

/// arccot with range (0, π).
fn arccot(x: f64) -> f64 {
    1.0_f64.atan2(x)
}

impl BaselineLaw {
    pub fn new(c: f64, n1: u32, n2: u32) -> Result<Self> {
        if !(c > 1.0) {
            return Err(Error::Domain(format!("baseline needs c > 1, got {c}")));
        }
        let k = 1.0 / SQRT_2.tanh();
        let r = (c * c * k * k - 1.0).sqrt();
        let s = (c * c - 1.0).sqrt();
        let t1 = 2.0 * arccot(-c * k - r);
        let t2 = 2.0 / s * arcoth(r / s);
        Ok(Self { c, t1, t2, n1, n2 })
    }

    pub fn on_interval(&self) -> (f64, f64) {
        let start = self.t1 + 2.0 * PI * self.n1 as f64;
        (start, start + self.t2)
    }

    pub fn total_time(&self) -> f64 {
        2.0 * self.t1 + self.t2 + 2.0 * PI * (self.n1 + self.n2) as f64
    }

    /// c²/√(c²−1) · arcoth(√(c² coth²√2 − 1)/√(c²−1)).
    pub fn closed_form_cost(&self) -> f64 {
        let c = self.c;
        let k = 1.0 / SQRT_2.tanh();
        let s = (c * c - 1.0).sqrt();
        c * c / s * arcoth((c * c * k * k - 1.0).sqrt() / s)
    }

    /// Value of the cost as c → 1⁺.
    pub fn limit_cost() -> f64 {
        let k = 1.0 / SQRT_2.tanh();
        1.0 / (k * k - 1.0).sqrt()
    }
}

impl ControlLaw for BaselineLaw {
    fn value(&self, t: f64) -> Result<f64> {
        let (s, e) = self.on_interval();
        Ok(if t >= s && t <= e { self.c / SQRT_2 } else { 0.0 })
    }

    fn value_side(&self, t: f64, right: bool) -> Result<f64> {
        let (s, e) = self.on_interval();
        let on = if right { t >= s && t < e } else { t > s && t <= e };
        Ok(if on { self.c / SQRT_2 } else { 0.0 })
    }

    fn switch_times(&self, t0: f64, t1: f64) -> Vec<f64> {
        let (s, e) = self.on_interval();
        [s, e].into_iter().filter(|t| *t >= t0 && *t <= t1).collect()
    }
}

/// Baseline law and its closed-form cost.
pub fn baseline(c: f64, n1: u32, n2: u32) -> Result<(BaselineLaw, f64)> {
    let law = BaselineLaw::new(c, n1, n2)?;
    let j = law.closed_form_cost();
    Ok((law, j))
}
