//! Weierstrass ℘(z; g2, g3) for real invariants and complex argument.
//!
//! Evaluation reduces z to the Voronoi cell of the lattice, halves it until a
//! truncated Laurent series is accurate, and doubles back with the
//! duplication formula. Inversion goes through Carlson's R_F followed by
//! Newton polishing.

pub mod carlson;

use std::io::Write;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative discriminant band below which the lattice is treated as degenerate.
pub const DISC_BAND: f64 = 1e-10;
/// Pole exclusion radius as a fraction of the shortest period.
pub const POLE_RADIUS: f64 = 1e-4;

const LAURENT_TERMS: usize = 24;
const SEED_RATIO: f64 = 0.25;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeierstrassInvariants {
    pub g2: f64,
    pub g3: f64,
    pub discriminant: f64,
    pub roots: [C64; 3],
}

impl WeierstrassInvariants {
    pub fn new(g2: f64, g3: f64) -> Self {
        let discriminant = g2 * g2 * g2 - 27.0 * g3 * g3;
        let mut inv = Self {
            g2,
            g3,
            discriminant,
            roots: [C64::new(0.0, 0.0); 3],
        };
        inv.roots = cubic_roots(&inv);
        inv
    }

    /// Scale against which the discriminant band is measured.
    pub fn disc_scale(&self) -> f64 {
        (self.g2.abs().powi(3)).max(27.0 * self.g3 * self.g3)
    }

    pub fn is_degenerate(&self) -> bool {
        let s = self.disc_scale();
        s == 0.0 || self.discriminant.abs() <= DISC_BAND * s
    }

    pub fn cubic(&self, t: C64) -> C64 {
        4.0 * t * t * t - self.g2 * t - self.g3
    }
}

/// Roots of 4t³ − g2 t − g3. Three real roots are ordered e1 > e2 > e3; with
/// one real root it is e2 and e1 = conj(e3) has positive imaginary part.
fn cubic_roots(inv: &WeierstrassInvariants) -> [C64; 3] {
    let (g2, g3) = (inv.g2, inv.g3);
    let re = |x: f64| C64::new(x, 0.0);
    if inv.is_degenerate() {
        if g2.abs() < 1e-300 {
            return [re(0.0); 3];
        }
        let e = -g3.signum() * (g2 / 12.0).sqrt();
        return if e >= 0.0 {
            [re(e), re(e), re(-2.0 * e)]
        } else {
            [re(-2.0 * e), re(e), re(e)]
        };
    }
    // t³ + pt + q with p = −g2/4, q = −g3/4
    let p = -g2 / 4.0;
    let q = -g3 / 4.0;
    if inv.discriminant > 0.0 {
        let r = 2.0 * (-p / 3.0).sqrt();
        let arg = ((3.0 * q / (2.0 * p)) * (-3.0 / p).sqrt()).clamp(-1.0, 1.0);
        let th = arg.acos() / 3.0;
        let tau = 2.0 * std::f64::consts::PI / 3.0;
        let mut e = [r * th.cos(), r * (th - tau).cos(), r * (th - 2.0 * tau).cos()];
        for x in e.iter_mut() {
            *x = polish_real(*x, g2, g3);
        }
        e.sort_by(|a, b| b.partial_cmp(a).unwrap());
        [re(e[0]), re(e[1]), re(e[2])]
    } else {
        let d = (q * q / 4.0 + p * p * p / 27.0).sqrt();
        let r = polish_real((-q / 2.0 + d).cbrt() + (-q / 2.0 - d).cbrt(), g2, g3);
        let im = (3.0 * r * r + 4.0 * p).max(0.0).sqrt() / 2.0;
        [C64::new(-r / 2.0, im), re(r), C64::new(-r / 2.0, -im)]
    }
}

fn polish_real(mut t: f64, g2: f64, g3: f64) -> f64 {
    for _ in 0..3 {
        let f = 4.0 * t * t * t - g2 * t - g3;
        let df = 12.0 * t * t - g2;
        if df == 0.0 {
            break;
        }
        t -= f / df;
    }
    t
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LatticeData {
    /// Real half-period.
    pub omega1: C64,
    /// Second half-period, Im(omega2/omega1) > 0.
    pub omega2: C64,
}

pub fn half_periods(inv: &WeierstrassInvariants) -> Result<LatticeData> {
    if !(inv.g2.is_finite() && inv.g3.is_finite()) {
        return Err(Error::NoSolution("non-finite invariants".into()));
    }
    if inv.is_degenerate() {
        return Err(Error::DegenerateLattice(inv.discriminant));
    }
    let [e1, e2, e3] = inv.roots;
    if inv.discriminant > 0.0 {
        let s = e1.re - e3.re;
        let m = (e2.re - e3.re) / s;
        let rs = s.sqrt();
        Ok(LatticeData {
            omega1: C64::new(carlson::ellipk(m) / rs, 0.0),
            omega2: C64::new(0.0, carlson::ellipk(1.0 - m) / rs),
        })
    } else {
        let h = ((e2 - e1) * (e2 - e3)).re.sqrt();
        let m = 0.5 - 3.0 * e2.re / (4.0 * h);
        let rh = h.sqrt();
        let w1 = carlson::ellipk(m) / rh;
        let w2 = carlson::ellipk(1.0 - m) / rh;
        Ok(LatticeData {
            omega1: C64::new(w1, 0.0),
            omega2: C64::new(0.5 * w1, 0.5 * w2),
        })
    }
}

/// Precomputed evaluator for one lattice.
#[derive(Debug, Clone, PartialEq)]
pub struct Weierstrass {
    pub inv: WeierstrassInvariants,
    pub lattice: LatticeData,
    basis: [C64; 2],
    radius: f64,
    coeffs: Vec<f64>,
    pole_radius: f64,
}

impl Weierstrass {
    pub fn new(g2: f64, g3: f64) -> Result<Self> {
        Self::from_invariants(WeierstrassInvariants::new(g2, g3))
    }

    pub fn from_invariants(inv: WeierstrassInvariants) -> Result<Self> {
        let lattice = half_periods(&inv)?;
        let basis = gauss_reduce(2.0 * lattice.omega1, 2.0 * lattice.omega2);
        let radius = basis[0].norm();
        Ok(Self {
            inv,
            lattice,
            basis,
            radius,
            coeffs: laurent_coeffs(inv.g2, inv.g3, LAURENT_TERMS),
            pole_radius: POLE_RADIUS,
        })
    }

    pub fn with_pole_radius(mut self, r: f64) -> Self {
        self.pole_radius = r;
        self
    }

    /// Length of the shortest nonzero period.
    pub fn shortest_period(&self) -> f64 {
        self.radius
    }

    /// Representative of z in the Voronoi cell of the lattice around 0.
    pub fn reduce(&self, z: C64) -> C64 {
        let [l1, l2] = self.basis;
        let det = l1.re * l2.im - l1.im * l2.re;
        let s = (z.re * l2.im - z.im * l2.re) / det;
        let t = (l1.re * z.im - l1.im * z.re) / det;
        let z0 = z - s.round() * l1 - t.round() * l2;
        let mut best = z0;
        for i in -1..=1 {
            for j in -1..=1 {
                let c = z0 - (i as f64) * l1 - (j as f64) * l2;
                if c.norm() < best.norm() {
                    best = c;
                }
            }
        }
        best
    }

    /// (℘(z), ℘′(z)).
    pub fn eval(&self, z: C64) -> Result<(C64, C64)> {
        let zr = self.reduce(z);
        if !zr.is_finite() {
            return Err(Error::NoSolution("non-finite argument".into()));
        }
        if zr.norm() < self.pole_radius * self.radius {
            return Err(Error::WpPole { re: z.re, im: z.im });
        }
        let mut n = 0;
        let mut zs = zr;
        while zs.norm() > SEED_RATIO * self.radius {
            zs *= 0.5;
            n += 1;
        }
        let (mut p, mut dp) = laurent(&self.coeffs, zs);
        let g2 = self.inv.g2;
        for _ in 0..n {
            let pp = dp * dp;
            let q = 6.0 * p * p - 0.5 * g2;
            let p2 = -2.0 * p + q * q / (4.0 * pp);
            let dp2 = dp * (-1.0 + (12.0 * pp * q * p - q * q * q) / (4.0 * pp * pp));
            p = p2;
            dp = dp2;
        }
        Ok((p, dp))
    }

    pub fn wp(&self, z: C64) -> Result<C64> {
        self.eval(z).map(|v| v.0)
    }

    pub fn wp_prime(&self, z: C64) -> Result<C64> {
        self.eval(z).map(|v| v.1)
    }

    /// The three half-periods ω1, ω2, ω1+ω2.
    pub fn half_period_list(&self) -> [C64; 3] {
        let l = self.lattice;
        [l.omega1, l.omega2, l.omega1 + l.omega2]
    }

    /// Half-period whose ℘ value is closest to `e`.
    pub fn half_period_for(&self, e: C64) -> C64 {
        let mut best = self.lattice.omega1;
        let mut dist = f64::INFINITY;
        for h in self.half_period_list() {
            if let Ok(v) = self.wp(h) {
                if (v - e).norm() < dist {
                    dist = (v - e).norm();
                    best = h;
                }
            }
        }
        best
    }

    /// Some z with ℘(z) = w, polished to full precision.
    fn inverse_raw(&self, w: C64) -> Result<C64> {
        if !w.is_finite() {
            return Err(Error::NoSolution("non-finite target".into()));
        }
        let scale = 1.0 + w.norm() + self.inv.g2.abs().sqrt() + self.inv.g3.abs().cbrt();
        for e in self.inv.roots {
            if (w - e).norm() <= 1e-13 * scale {
                return Ok(self.half_period_for(e));
            }
        }
        let mut args = self.inv.roots.map(|e| w - e);
        if args.iter().any(|a| a.im == 0.0 && a.re < 0.0) {
            let nudge = C64::new(0.0, 1e-9 * scale);
            args = self.inv.roots.map(|e| w + nudge - e);
        }
        let z0 = carlson::rf(args[0], args[1], args[2]);
        if let Some(z) = self.newton(w, z0) {
            return Ok(z);
        }
        // fallback: coarse scan of the period parallelogram
        let (l1, l2) = (2.0 * self.lattice.omega1, 2.0 * self.lattice.omega2);
        let mut best = (f64::INFINITY, C64::new(0.0, 0.0));
        for i in 0..40 {
            for j in 0..40 {
                let z = (i as f64 + 0.5) / 40.0 * l1 + (j as f64 + 0.5) / 40.0 * l2;
                if let Ok(v) = self.wp(z) {
                    let d = (v - w).norm();
                    if d < best.0 {
                        best = (d, z);
                    }
                }
            }
        }
        self.newton(w, best.1)
            .ok_or_else(|| Error::NoSolution(format!("wp inverse failed for w = {w}")))
    }

    fn newton(&self, w: C64, mut z: C64) -> Option<C64> {
        let tol = 1e-12 * (1.0 + w.norm());
        for _ in 0..60 {
            let (p, dp) = self.eval(z).ok()?;
            let r = p - w;
            if r.norm() <= tol {
                return Some(z);
            }
            if dp.norm() == 0.0 {
                return None;
            }
            let step = r / dp;
            z -= step;
            if !z.is_finite() {
                return None;
            }
        }
        let (p, _) = self.eval(z).ok()?;
        ((p - w).norm() <= 1e-9 * (1.0 + w.norm())).then_some(z)
    }

    /// Solution of ℘(z) = w. Among ±z and lattice translates, returns the one
    /// nearest `hint`, or by default the one with smallest |Im z| then |Re z|.
    pub fn inverse(&self, w: C64, hint: Option<C64>) -> Result<C64> {
        let z = self.inverse_raw(w)?;
        let cands = [self.reduce(z), self.reduce(-z)];
        match hint {
            Some(h) => {
                let mut best = cands[0];
                for c in cands {
                    let t = self.nearest_translate(c, h);
                    if (t - h).norm() < (best - h).norm() {
                        best = t;
                    }
                }
                Ok(best)
            }
            None => Ok(self.canonical(&cands)),
        }
    }

    /// Solution of ℘(z) = w with ℘′(z) as close as possible to `dw`.
    pub fn inverse_with_derivative(&self, w: C64, dw: C64) -> Result<C64> {
        let z = self.reduce(self.inverse_raw(w)?);
        let d = self.wp_prime(z)?;
        let z = if (d - dw).norm() <= (-d - dw).norm() { z } else { self.reduce(-z) };
        Ok(self.canonical(&[z]))
    }

    fn nearest_translate(&self, z: C64, h: C64) -> C64 {
        z + (self.reduce(h - z) - (h - z)) * -1.0
    }

    fn canonical(&self, cands: &[C64]) -> C64 {
        let mut all = Vec::new();
        let [l1, l2] = self.basis;
        for &c in cands {
            for i in -2..=2 {
                for j in -2..=2 {
                    all.push(c + (i as f64) * l1 + (j as f64) * l2);
                }
            }
        }
        let key = |z: &C64| (z.im.abs(), z.re.abs(), -z.re, -z.im);
        let eps = 1e-12 * (1.0 + self.radius);
        all.into_iter()
            .reduce(|a, b| {
                let (ka, kb) = (key(&a), key(&b));
                let better = if (ka.0 - kb.0).abs() > eps {
                    kb.0 < ka.0
                } else if (ka.1 - kb.1).abs() > eps {
                    kb.1 < ka.1
                } else {
                    (kb.2, kb.3) < (ka.2, ka.3)
                };
                if better {
                    b
                } else {
                    a
                }
            })
            .unwrap()
    }

    /// Real t in [t0, t1] with t + a ≡ target modulo the lattice.
    pub fn real_congruences(&self, target: C64, a: C64, t0: f64, t1: f64) -> Vec<f64> {
        let v = target - a;
        let (l1, l2) = (2.0 * self.lattice.omega1, 2.0 * self.lattice.omega2);
        let n = v.im / l2.im;
        let tol = 1e-7;
        if (n - n.round()).abs() > tol {
            return Vec::new();
        }
        let base = (v - n.round() * l2).re;
        let period = l1.re;
        let k0 = ((t0 - base) / period).ceil() as i64;
        let k1 = ((t1 - base) / period).floor() as i64;
        (k0..=k1).map(|k| base + k as f64 * period).collect()
    }
}

fn laurent_coeffs(g2: f64, g3: f64, n: usize) -> Vec<f64> {
    // c[k] multiplies z^{2k-2}; c[0], c[1] unused
    let mut c = vec![0.0; n + 2];
    c[2] = g2 / 20.0;
    c[3] = g3 / 28.0;
    for k in 4..n + 2 {
        let s: f64 = (2..=k - 2).map(|m| c[m] * c[k - m]).sum();
        c[k] = 3.0 * s / (((2 * k + 1) * (k - 3)) as f64);
    }
    c
}

fn laurent(c: &[f64], z: C64) -> (C64, C64) {
    let z2 = z * z;
    let mut p = C64::new(0.0, 0.0);
    let mut dp = C64::new(0.0, 0.0);
    for k in (2..c.len()).rev() {
        p = p * z2 + c[k];
        dp = dp * z2 + (2 * k - 2) as f64 * c[k];
    }
    // p = Σ c_k z^{2k-4}, dp = Σ (2k-2) c_k z^{2k-4}
    (1.0 / z2 + p * z2, -2.0 / (z2 * z) + dp * z)
}

fn gauss_reduce(mut a: C64, mut b: C64) -> [C64; 2] {
    for _ in 0..100 {
        if b.norm() < a.norm() {
            std::mem::swap(&mut a, &mut b);
        }
        let mu = ((b * a.conj()).re / a.norm_sqr()).round();
        if mu == 0.0 {
            break;
        }
        b -= mu * a;
    }
    [a, b]
}

pub fn wp(z: C64, inv: &WeierstrassInvariants) -> Result<C64> {
    Weierstrass::from_invariants(*inv)?.wp(z)
}

pub fn wp_prime(z: C64, inv: &WeierstrassInvariants) -> Result<C64> {
    Weierstrass::from_invariants(*inv)?.wp_prime(z)
}

pub fn wp_inverse(w: C64, inv: &WeierstrassInvariants, branch_hint: Option<C64>) -> Result<C64> {
    Weierstrass::from_invariants(*inv)?.inverse(w, branch_hint)
}

/// Elementary ℘ for a vanishing discriminant:
/// 1/z², e + 3e/sinh²(√(3e) z) for e > 0, or e + 3|e|/sin²(√(3|e|) z) for e < 0,
/// with e the double root.
pub fn wp_degenerate(z: C64, g2: f64, g3: f64) -> C64 {
    if g2.abs() < 1e-300 && g3.abs() < 1e-300 {
        return 1.0 / (z * z);
    }
    let e = -g3.signum() * (g2.abs() / 12.0).sqrt();
    if e > 0.0 {
        let k = (3.0 * e).sqrt();
        let s = (k * z).sinh();
        e + 3.0 * e / (s * s)
    } else {
        let k = (-3.0 * e).sqrt();
        let s = (k * z).sin();
        e - 3.0 * e / (s * s)
    }
}

/// Dumps ℘ on a grid over the period parallelogram as CSV
/// (z_re, z_im, wp_re, wp_im). Pole samples are skipped.
pub fn write_wp_csv<W: Write>(out: W, w: &Weierstrass, n: usize) -> Result<()> {
    let mut wr = csv::Writer::from_writer(out);
    wr.write_record(["z_re", "z_im", "wp_re", "wp_im"])?;
    let (l1, l2) = (2.0 * w.lattice.omega1, 2.0 * w.lattice.omega2);
    for i in 0..n {
        for j in 0..n {
            let z = (i as f64 / n as f64) * l1 + (j as f64 / n as f64) * l2;
            if let Ok(v) = w.wp(z) {
                wr.write_record([z.re, z.im, v.re, v.im].map(|x| format!("{x:.17e}")))?;
            }
        }
    }
    wr.flush()?;
    Ok(())
}
