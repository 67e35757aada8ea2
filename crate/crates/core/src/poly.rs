//! Small real polynomials with complex roots.

use num_complex::Complex64 as C64;

/// Horner evaluation; coefficients in descending order.
pub fn eval(c: &[f64], x: C64) -> C64 {
    c.iter().fold(C64::new(0.0, 0.0), |acc, &a| acc * x + a)
}

pub fn derivative(c: &[f64]) -> Vec<f64> {
    let n = c.len() - 1;
    c[..n]
        .iter()
        .enumerate()
        .map(|(i, &a)| a * (n - i) as f64)
        .collect()
}

/// All complex roots by Aberth–Ehrlich iteration. Leading coefficient must be nonzero.
pub fn roots(c: &[f64]) -> Vec<C64> {
    let n = c.len() - 1;
    if n == 0 {
        return Vec::new();
    }
    let lead = c[0];
    let monic: Vec<f64> = c.iter().map(|&a| a / lead).collect();
    let dc = derivative(&monic);
    // Cauchy bound for the initial circle
    let r = 1.0 + monic[1..].iter().fold(0.0_f64, |m, &a| m.max(a.abs()));
    let mut z: Vec<C64> = (0..n)
        .map(|k| C64::from_polar(0.5 * r, 0.4 + 2.0 * std::f64::consts::PI * k as f64 / n as f64))
        .collect();
    for _ in 0..500 {
        let mut moved = 0.0_f64;
        for i in 0..n {
            let p = eval(&monic, z[i]);
            if p.norm() == 0.0 {
                continue;
            }
            let ratio = p / eval(&dc, z[i]);
            let s: C64 = (0..n)
                .filter(|&j| j != i)
                .map(|j| 1.0 / (z[i] - z[j]))
                .sum();
            let w = ratio / (1.0 - ratio * s);
            if w.is_finite() {
                z[i] -= w;
                moved = moved.max(w.norm() / (1.0 + z[i].norm()));
            }
        }
        if moved < 1e-16 {
            break;
        }
    }
    // snap conjugate-symmetric near-real roots onto the axis
    for x in z.iter_mut() {
        if x.im.abs() <= 1e-12 * (1.0 + x.re.abs()) {
            x.im = 0.0;
        }
    }
    z
}

/// Groups roots closer than `tol` (relative to 1 + |root|) and averages them.
/// Returns (root, multiplicity), sorted by multiplicity descending then real part.
pub fn cluster(roots: &[C64], tol: f64) -> Vec<(C64, usize)> {
    let mut groups: Vec<Vec<C64>> = Vec::new();
    for &r in roots {
        let found = groups.iter_mut().find(|g| {
            g.iter()
                .any(|&s| (s - r).norm() <= tol * (1.0 + r.norm().max(s.norm())))
        });
        match found {
            Some(g) => g.push(r),
            None => groups.push(vec![r]),
        }
    }
    let mut out: Vec<(C64, usize)> = groups
        .into_iter()
        .map(|g| {
            let n = g.len();
            let mean: C64 = g.iter().sum::<C64>() / n as f64;
            (mean, n)
        })
        .collect();
    out.sort_by(|a, b| {
        b.1.cmp(&a.1)
            .then(a.0.re.partial_cmp(&b.0.re).unwrap())
            .then(a.0.im.partial_cmp(&b.0.im).unwrap())
    });
    out
}

/// Newton refinement of a root of multiplicity `m`, as a simple root of the (m−1)th derivative.
pub fn polish_multiple(c: &[f64], root: C64, m: usize) -> C64 {
    let mut d = c.to_vec();
    for _ in 1..m {
        d = derivative(&d);
    }
    if d.len() < 2 {
        return root;
    }
    let dd = derivative(&d);
    let mut z = root;
    for _ in 0..8 {
        let w = eval(&d, z) / eval(&dd, z);
        if !w.is_finite() {
            break;
        }
        z -= w;
        if w.norm() <= 1e-16 * (1.0 + z.norm()) {
            break;
        }
    }
    if z.im.abs() <= 1e-12 * (1.0 + z.re.abs()) {
        z.im = 0.0;
    }
    // keep the cluster mean if Newton wandered off
    if (z - root).norm() <= 1e-2 * (1.0 + root.norm()) {
        z
    } else {
        root
    }
}
