//! su(1,1) and SU(1,1) arithmetic on the basis
//!
//!   K_x = ½[[0,-i],[i,0]],  K_y = ½[[0,-1],[-1,0]],  K_z = ½[[-i,0],[0,i]]
//!
//! with metric η = diag(1,-1). Algebra elements are stored as real coefficient
//! triples; group elements as explicit 2×2 complex matrices.

use std::f64::consts::PI;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Mat2 = [[C64; 2]; 2];

/// Tolerance for the parabolic band of [`classify`].
pub const CLASSIFY_TOL: f64 = 1e-12;

const ONE: C64 = C64 { re: 1.0, im: 0.0 };
const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(from = "[f64; 3]", into = "[f64; 3]")]
pub struct AlgebraElement {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl From<[f64; 3]> for AlgebraElement {
    fn from(v: [f64; 3]) -> Self {
        Self::new(v[0], v[1], v[2])
    }
}

impl From<AlgebraElement> for [f64; 3] {
    fn from(m: AlgebraElement) -> Self {
        [m.x, m.y, m.z]
    }
}

impl AlgebraElement {
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub const fn zero() -> Self {
        Self::new(0.0, 0.0, 0.0)
    }

    pub const fn kx() -> Self {
        Self::new(1.0, 0.0, 0.0)
    }

    pub const fn ky() -> Self {
        Self::new(0.0, 1.0, 0.0)
    }

    pub const fn kz() -> Self {
        Self::new(0.0, 0.0, 1.0)
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    pub fn norm(self) -> f64 {
        inner(self, self).sqrt()
    }

    /// Matrix view x·K_x + y·K_y + z·K_z.
    pub fn matrix(self) -> Mat2 {
        let h = 0.5;
        [
            [C64::new(0.0, -h * self.z), C64::new(-h * self.y, -h * self.x)],
            [C64::new(-h * self.y, h * self.x), C64::new(0.0, h * self.z)],
        ]
    }

    /// Orthogonal projection of an arbitrary 2×2 matrix onto the basis.
    pub fn from_matrix(m: &Mat2) -> Self {
        Self::new(
            inner_mat(m, &Self::kx().matrix()),
            inner_mat(m, &Self::ky().matrix()),
            inner_mat(m, &Self::kz().matrix()),
        )
    }
}

impl Add for AlgebraElement {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl Sub for AlgebraElement {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl Neg for AlgebraElement {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.x, -self.y, -self.z)
    }
}

impl Mul<AlgebraElement> for f64 {
    type Output = AlgebraElement;
    fn mul(self, m: AlgebraElement) -> AlgebraElement {
        AlgebraElement::new(self * m.x, self * m.y, self * m.z)
    }
}

/// ⟨M,N⟩ = 2 Tr(M N†), the Euclidean product of coefficients.
pub fn inner(m: AlgebraElement, n: AlgebraElement) -> f64 {
    m.x * n.x + m.y * n.y + m.z * n.z
}

/// ⟨M,N†⟩ = 2 Tr(M N), the indefinite form of signature (+,+,-).
pub fn inner_dagger(m: AlgebraElement, n: AlgebraElement) -> f64 {
    m.x * n.x + m.y * n.y - m.z * n.z
}

/// Real part of 2 Tr(M N†) for raw matrices.
pub fn inner_mat(m: &Mat2, n: &Mat2) -> f64 {
    let mut s = ZERO;
    for i in 0..2 {
        for j in 0..2 {
            s += m[i][j] * n[i][j].conj();
        }
    }
    2.0 * s.re
}

/// Real part of 2 Tr(M N) for raw matrices.
pub fn inner_dagger_mat(m: &Mat2, n: &Mat2) -> f64 {
    2.0 * trace(&mat_mul(m, n)).re
}

pub fn commutator(m: AlgebraElement, n: AlgebraElement) -> AlgebraElement {
    AlgebraElement::new(
        m.y * n.z - m.z * n.y,
        m.z * n.x - m.x * n.z,
        -(m.x * n.y - m.y * n.x),
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Kind {
    Elliptic,
    Hyperbolic,
    Parabolic,
}

pub fn classify(m: AlgebraElement) -> Kind {
    classify_tol(m, CLASSIFY_TOL)
}

pub fn classify_tol(m: AlgebraElement, tol: f64) -> Kind {
    let q = inner_dagger(m, m);
    if q < -tol {
        Kind::Elliptic
    } else if q > tol {
        Kind::Hyperbolic
    } else {
        Kind::Parabolic
    }
}

pub fn mat_mul(a: &Mat2, b: &Mat2) -> Mat2 {
    [
        [
            a[0][0] * b[0][0] + a[0][1] * b[1][0],
            a[0][0] * b[0][1] + a[0][1] * b[1][1],
        ],
        [
            a[1][0] * b[0][0] + a[1][1] * b[1][0],
            a[1][0] * b[0][1] + a[1][1] * b[1][1],
        ],
    ]
}

pub fn trace(a: &Mat2) -> C64 {
    a[0][0] + a[1][1]
}

fn dagger(a: &Mat2) -> Mat2 {
    [
        [a[0][0].conj(), a[1][0].conj()],
        [a[0][1].conj(), a[1][1].conj()],
    ]
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GroupElement {
    pub m: Mat2,
}

impl Serialize for GroupElement {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let rows: [[[f64; 2]; 2]; 2] = std::array::from_fn(|i| {
            std::array::from_fn(|j| [self.m[i][j].re, self.m[i][j].im])
        });
        rows.serialize(s)
    }
}

impl<'de> Deserialize<'de> for GroupElement {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let rows = <[[[f64; 2]; 2]; 2]>::deserialize(d)?;
        Ok(GroupElement {
            m: std::array::from_fn(|i| {
                std::array::from_fn(|j| C64::new(rows[i][j][0], rows[i][j][1]))
            }),
        })
    }
}

impl GroupElement {
    pub fn identity() -> Self {
        Self {
            m: [[ONE, ZERO], [ZERO, ONE]],
        }
    }

    /// Wraps a matrix after checking det = 1 and X†ηX = η to `tol`.
    pub fn from_matrix(m: Mat2, tol: f64) -> Result<Self> {
        let g = Self { m };
        let (det_err, pu_err) = g.invariant_errors();
        if det_err > tol || pu_err > tol || !det_err.is_finite() {
            return Err(Error::NotGroupElement(format!(
                "|det-1| = {det_err:.3e}, |X†ηX-η| = {pu_err:.3e}"
            )));
        }
        Ok(g)
    }

    pub fn det(&self) -> C64 {
        self.m[0][0] * self.m[1][1] - self.m[0][1] * self.m[1][0]
    }

    /// (|det X - 1|, max entry of |X†ηX - η|).
    pub fn invariant_errors(&self) -> (f64, f64) {
        let eta: Mat2 = [[ONE, ZERO], [ZERO, -ONE]];
        let p = mat_mul(&mat_mul(&dagger(&self.m), &eta), &self.m);
        let mut e: f64 = 0.0;
        for i in 0..2 {
            for j in 0..2 {
                e = e.max((p[i][j] - eta[i][j]).norm());
            }
        }
        ((self.det() - ONE).norm(), e)
    }

    pub fn is_valid(&self, tol: f64) -> bool {
        let (a, b) = self.invariant_errors();
        a <= tol && b <= tol
    }

    pub fn mul(&self, o: &GroupElement) -> GroupElement {
        GroupElement {
            m: mat_mul(&self.m, &o.m),
        }
    }

    pub fn inverse(&self) -> GroupElement {
        let d = self.det();
        GroupElement {
            m: [
                [self.m[1][1] / d, -self.m[0][1] / d],
                [-self.m[1][0] / d, self.m[0][0] / d],
            ],
        }
    }

    pub fn neg(&self) -> GroupElement {
        GroupElement {
            m: std::array::from_fn(|i| std::array::from_fn(|j| -self.m[i][j])),
        }
    }
}

/// exp(M) = C·I + S·M with M² = d·I, d = Tr(M²)/2.
pub fn expm(m: AlgebraElement) -> GroupElement {
    let d = 0.25 * inner_dagger(m, m);
    let (c, s) = exp_coeffs(d);
    let mm = m.matrix();
    GroupElement {
        m: [
            [c + s * mm[0][0], s * mm[0][1]],
            [s * mm[1][0], c + s * mm[1][1]],
        ],
    }
}

/// (cosh √d, sinh √d / √d) continued analytically to d ≤ 0.
pub(crate) fn exp_coeffs(d: f64) -> (f64, f64) {
    if d.abs() < 1e-8 {
        (1.0 + d / 2.0 + d * d / 24.0, 1.0 + d / 6.0 + d * d / 120.0)
    } else if d > 0.0 {
        let r = d.sqrt();
        (r.cosh(), r.sinh() / r)
    } else {
        let r = (-d).sqrt();
        (r.cos(), r.sin() / r)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CartanCoordinates {
    pub a1: f64,
    pub b: f64,
    pub a2: f64,
}

impl CartanCoordinates {
    pub fn reconstruct(&self) -> GroupElement {
        expm(self.a1 * AlgebraElement::kz())
            .mul(&expm(self.b * AlgebraElement::ky()))
            .mul(&expm(self.a2 * AlgebraElement::kz()))
    }
}

fn wrap_4pi(a: f64) -> f64 {
    let mut a = a % (4.0 * PI);
    if a <= -2.0 * PI {
        a += 4.0 * PI;
    } else if a > 2.0 * PI {
        a -= 4.0 * PI;
    }
    a
}

/// X = e^{a1 K_z} e^{b K_y} e^{a2 K_z}, with a2 = 0 when b = 0.
pub fn cartan_decompose(x: &GroupElement) -> Result<CartanCoordinates> {
    if !x.is_valid(1e-8) {
        let (a, b) = x.invariant_errors();
        return Err(Error::NotGroupElement(format!(
            "|det-1| = {a:.3e}, |X†ηX-η| = {b:.3e}"
        )));
    }
    // X11 = cosh(b/2) e^{-i(a1+a2)/2},  X12 = -sinh(b/2) e^{-i(a1-a2)/2}
    let x11 = x.m[0][0];
    let x12 = x.m[0][1];
    let b = 2.0 * x11.norm().max(1.0).acosh();
    let sigma = -2.0 * x11.arg();
    if x12.norm() < 1e-14 {
        return Ok(CartanCoordinates {
            a1: wrap_4pi(sigma),
            b: 0.0,
            a2: 0.0,
        });
    }
    let delta = -2.0 * (-x12).arg();
    Ok(CartanCoordinates {
        a1: wrap_4pi(0.5 * (sigma + delta)),
        b,
        a2: wrap_4pi(0.5 * (sigma - delta)),
    })
}

/// P M P⁻¹ re-expanded on the basis.
pub fn conjugate(p: &GroupElement, m: AlgebraElement) -> AlgebraElement {
    let r = mat_mul(&mat_mul(&p.m, &m.matrix()), &p.inverse().m);
    AlgebraElement::from_matrix(&r)
}

pub fn frobenius_distance(x: &GroupElement, y: &GroupElement) -> f64 {
    let mut s = 0.0;
    for i in 0..2 {
        for j in 0..2 {
            s += (x.m[i][j] - y.m[i][j]).norm_sqr();
        }
    }
    s.sqrt()
}

/// Scalar multiple of the identity as a raw matrix, used by tests and the
/// abnormal-subgroup check.
pub fn scalar_matrix(c: C64) -> Mat2 {
    [[c, ZERO], [ZERO, c]]
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn basis_pairings() {
        let (kx, ky, kz) = (AlgebraElement::kx(), AlgebraElement::ky(), AlgebraElement::kz());
        assert_eq!(inner(kx, ky), 0.0);
        assert_eq!(inner(kz, kz), 1.0);
        assert_eq!(inner(kx + 2.0 * kz, kx), 1.0);
        assert_eq!(inner_dagger(kz, kz), -1.0);
        assert_eq!(inner_dagger(kx, kx), 1.0);
        assert_eq!(inner_dagger(kx, kz), 0.0);
    }

    #[test]
    fn pairings_match_traces() {
        let m = AlgebraElement::new(0.3, -1.2, 2.5);
        let n = AlgebraElement::new(-0.7, 0.4, 1.1);
        assert!(close(inner(m, n), inner_mat(&m.matrix(), &n.matrix()), 1e-14));
        assert!(close(
            inner_dagger(m, n),
            inner_dagger_mat(&m.matrix(), &n.matrix()),
            1e-14
        ));
    }

    #[test]
    fn commutation_relations() {
        let (kx, ky, kz) = (AlgebraElement::kx(), AlgebraElement::ky(), AlgebraElement::kz());
        assert_eq!(commutator(kx, ky), -kz);
        assert_eq!(commutator(ky, kz), kx);
        let m = AlgebraElement::new(1.0, 2.0, 3.0);
        assert_eq!(commutator(m, m), AlgebraElement::zero());
        // matrix commutator agrees with the coefficient formula
        let n = AlgebraElement::new(-0.5, 0.25, 2.0);
        let mn = mat_mul(&m.matrix(), &n.matrix());
        let nm = mat_mul(&n.matrix(), &m.matrix());
        let c: Mat2 = std::array::from_fn(|i| std::array::from_fn(|j| mn[i][j] - nm[i][j]));
        let c = AlgebraElement::from_matrix(&c);
        let d = commutator(m, n);
        assert!((c - d).norm() < 1e-14);
    }

    #[test]
    fn classification() {
        assert_eq!(classify(AlgebraElement::kz()), Kind::Elliptic);
        assert_eq!(classify(AlgebraElement::kx()), Kind::Hyperbolic);
        assert_eq!(classify(AlgebraElement::new(1.0, 0.0, 1.0)), Kind::Parabolic);
        assert_eq!(classify(AlgebraElement::new(1.0, 1.0, 0.0)), Kind::Hyperbolic);
    }

    #[test]
    fn pseudo_anti_hermitian() {
        let m = AlgebraElement::new(0.9, -2.0, 0.3).matrix();
        let eta: Mat2 = [[ONE, ZERO], [ZERO, -ONE]];
        let a = mat_mul(&dagger(&m), &eta);
        let b = mat_mul(&eta, &m);
        for i in 0..2 {
            for j in 0..2 {
                assert!((a[i][j] + b[i][j]).norm() < 1e-14);
            }
        }
        assert!(trace(&m).norm() < 1e-15);
    }

    #[test]
    fn expm_cases() {
        let e = expm(AlgebraElement::zero());
        assert!(frobenius_distance(&e, &GroupElement::identity()) < 1e-15);
        let e = expm(2.0 * AlgebraElement::kz());
        let want = GroupElement {
            m: [[C64::new(0.0, -1.0).exp(), ZERO], [ZERO, C64::new(0.0, 1.0).exp()]],
        };
        assert!(frobenius_distance(&e, &want) < 1e-14);
        for m in [
            AlgebraElement::new(0.3, -1.7, 0.2),
            AlgebraElement::new(0.1, 0.2, 3.0),
            AlgebraElement::new(1.0, 1.0, 1.0),
        ] {
            let p = expm(m).mul(&expm(-m));
            assert!(frobenius_distance(&p, &GroupElement::identity()) < 1e-12);
            assert!(expm(m).is_valid(1e-12));
        }
    }

    #[test]
    fn expm_kz_period() {
        let e = expm((2.0 * PI) * AlgebraElement::kz());
        assert!(frobenius_distance(&e, &GroupElement::identity().neg()) < 1e-14);
        let e = expm((4.0 * PI) * AlgebraElement::kz());
        assert!(frobenius_distance(&e, &GroupElement::identity()) < 1e-14);
    }

    #[test]
    fn cartan_examples() {
        let c = cartan_decompose(&GroupElement::identity()).unwrap();
        assert!(c.a1.abs() < 1e-15 && c.b.abs() < 1e-15 && c.a2.abs() < 1e-15);
        let c = cartan_decompose(&expm(0.3 * AlgebraElement::kz())).unwrap();
        assert!(close(c.a1, 0.3, 1e-14) && c.b == 0.0 && c.a2 == 0.0);
        let x = expm(AlgebraElement::new(-2.0, 2.0, 0.0));
        let c = cartan_decompose(&x).unwrap();
        assert!(frobenius_distance(&c.reconstruct(), &x) < 1e-9);
        assert!(c.b >= 0.0);
    }

    #[test]
    fn cartan_rejects_non_group() {
        let bad = GroupElement {
            m: [[C64::new(2.0, 0.0), ZERO], [ZERO, ONE]],
        };
        assert!(cartan_decompose(&bad).is_err());
    }

    #[test]
    fn conjugation() {
        let m = AlgebraElement::new(0.2, -0.4, 1.3);
        assert!((conjugate(&GroupElement::identity(), m) - m).norm() < 1e-15);
        let p = expm(AlgebraElement::new(0.8, -1.1, 0.5));
        assert_eq!(classify(conjugate(&p, AlgebraElement::kz())), Kind::Elliptic);
        let c = conjugate(&p, m);
        assert!(close(inner_dagger(c, c), inner_dagger(m, m), 1e-12));
    }

    #[test]
    fn frobenius() {
        let x = expm(AlgebraElement::new(0.1, 0.2, 0.3));
        assert_eq!(frobenius_distance(&x, &x), 0.0);
        let two = GroupElement {
            m: scalar_matrix(C64::new(2.0, 0.0)),
        };
        assert!(close(frobenius_distance(&GroupElement::identity(), &two), 2f64.sqrt(), 1e-15));
    }

    #[test]
    fn serde_shapes() {
        let m = AlgebraElement::new(1.0, -2.0, 0.5);
        assert_eq!(serde_json::to_string(&m).unwrap(), "[1.0,-2.0,0.5]");
        let g = expm(m);
        let s = serde_json::to_string(&g).unwrap();
        let back: GroupElement = serde_json::from_str(&s).unwrap();
        assert_eq!(back, g);
        assert!(s.starts_with("[[["));
    }
}
