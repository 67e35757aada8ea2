use num_complex::Complex64 as C64;

/// Carlson's R_F(x, y, z) for complex arguments by the duplication algorithm.
/// At most one argument may be zero; none may lie on the negative real axis.
pub fn rf(mut x: C64, mut y: C64, mut z: C64) -> C64 {
    for _ in 0..200 {
        let a = (x + y + z) / 3.0;
        let dev = (a - x).norm().max((a - y).norm()).max((a - z).norm());
        if dev <= 1e-3 * a.norm() {
            let dx = 1.0 - x / a;
            let dy = 1.0 - y / a;
            let dz = -dx - dy;
            let e2 = dx * dy - dz * dz;
            let e3 = dx * dy * dz;
            let s = 1.0 - e2 / 10.0 + e3 / 14.0 + e2 * e2 / 24.0 - 3.0 * e2 * e3 / 44.0;
            return s / a.sqrt();
        }
        let (sx, sy, sz) = (x.sqrt(), y.sqrt(), z.sqrt());
        let lam = sx * sy + sx * sz + sy * sz;
        x = (x + lam) * 0.25;
        y = (y + lam) * 0.25;
        z = (z + lam) * 0.25;
    }
    C64::new(f64::NAN, f64::NAN)
}

/// Complete elliptic integral K(m) = R_F(0, 1-m, 1) via the AGM, 0 ≤ m < 1.
pub fn ellipk(m: f64) -> f64 {
    let mut a = 1.0;
    let mut b = (1.0 - m).sqrt();
    for _ in 0..60 {
        if (a - b).abs() <= 1e-16 * a {
            break;
        }
        let an = 0.5 * (a + b);
        b = (a * b).sqrt();
        a = an;
    }
    std::f64::consts::PI / (2.0 * a)
}
