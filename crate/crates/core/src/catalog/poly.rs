//! Dense complex polynomials, coefficients in ascending order.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

pub(crate) type Poly = Vec<Complex64>;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

pub(crate) fn eval(p: &[Complex64], z: Complex64) -> Complex64 {
    p.iter().rev().fold(ZERO, |acc, &c| acc * z + c)
}

pub(crate) fn deriv(p: &[Complex64]) -> Poly {
    if p.len() <= 1 {
        return vec![ZERO];
    }
    p.iter()
        .enumerate()
        .skip(1)
        .map(|(k, &c)| c * k as f64)
        .collect()
}

pub(crate) fn mul(a: &[Complex64], b: &[Complex64]) -> Poly {
    let mut out = vec![ZERO; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

pub(crate) fn add(a: &[Complex64], b: &[Complex64]) -> Poly {
    let mut out = vec![ZERO; a.len().max(b.len())];
    for (i, &x) in a.iter().enumerate() {
        out[i] += x;
    }
    for (i, &y) in b.iter().enumerate() {
        out[i] += y;
    }
    out
}

pub(crate) fn scale(a: &[Complex64], s: Complex64) -> Poly {
    a.iter().map(|&x| x * s).collect()
}

/// `p(z − s)`
pub(crate) fn shift(p: &[Complex64], s: Complex64) -> Poly {
    // Horner in the shifted variable
    let base = [-s, Complex64::new(1.0, 0.0)];
    let mut out = vec![ZERO];
    for &c in p.iter().rev() {
        out = add(&mul(&out, &base), &[c]);
    }
    out.truncate(p.len());
    out
}

/// Solve the linear map `col ↦ op(e_col)` for the unknown coefficients of a
/// polynomial of degree `deg` with some coefficients fixed. Returns the full
/// coefficient vector.
pub(crate) fn solve_linear(
    deg: usize,
    op: impl Fn(&[Complex64]) -> Poly,
    rhs: &[Complex64],
    fixed: &[(usize, Complex64)],
) -> Poly {
    let cols: Vec<Poly> = (0..=deg)
        .map(|i| {
            let mut e = vec![ZERO; deg + 1];
            e[i] = Complex64::new(1.0, 0.0);
            op(&e)
        })
        .collect();
    let rows = cols.iter().map(Vec::len).max().unwrap_or(0).max(rhs.len());
    let free: Vec<usize> = (0..=deg)
        .filter(|i| !fixed.iter().any(|(f, _)| f == i))
        .collect();
    let mut b = DVector::<Complex64>::zeros(rows);
    for (i, &r) in rhs.iter().enumerate() {
        b[i] = r;
    }
    for &(f, val) in fixed {
        for (i, &c) in cols[f].iter().enumerate() {
            b[i] -= c * val;
        }
    }
    let mut a = DMatrix::<Complex64>::zeros(rows, free.len());
    for (c, &f) in free.iter().enumerate() {
        for (i, &x) in cols[f].iter().enumerate() {
            a[(i, c)] = x;
        }
    }
    let mut out = vec![ZERO; deg + 1];
    for &(f, val) in fixed {
        out[f] = val;
    }
    if !free.is_empty() {
        let svd = a.svd(true, true);
        let cut = 1e-14 * svd.singular_values.max();
        let x = svd.solve(&b, cut).expect("u and v_t computed");
        for (c, &f) in free.iter().enumerate() {
            out[f] = x[c];
        }
    }
    out
}

/// All roots by Aberth–Ehrlich iteration, followed by Newton polishing.
pub(crate) fn roots(p: &[Complex64]) -> Vec<Complex64> {
    let mut p: Vec<Complex64> = p.to_vec();
    while p.len() > 1 && p.last().is_some_and(|c| c.norm() == 0.0) {
        p.pop();
    }
    let n = p.len() - 1;
    if n == 0 {
        return vec![];
    }
    let lead = p[n];
    let monic: Poly = p.iter().map(|&c| c / lead).collect();
    let dp = deriv(&monic);
    // initial guesses on a circle of the Cauchy-bound radius scale
    let radius = monic[..n]
        .iter()
        .enumerate()
        .map(|(k, c)| c.norm().powf(1.0 / (n - k) as f64))
        .fold(0.0, f64::max)
        .max(1e-3);
    let mut z: Vec<Complex64> = (0..n)
        .map(|k| Complex64::from_polar(radius, 2.0 * std::f64::consts::PI * (k as f64 + 0.25) / n as f64 + 0.4))
        .collect();
    for _ in 0..500 {
        let mut moved: f64 = 0.0;
        for i in 0..n {
            let ratio = eval(&monic, z[i]) / eval(&dp, z[i]);
            let repulse: Complex64 = (0..n)
                .filter(|&j| j != i)
                .map(|j| 1.0 / (z[i] - z[j]))
                .sum();
            let w = ratio / (1.0 - ratio * repulse);
            if w.re.is_finite() && w.im.is_finite() {
                z[i] -= w;
                moved = moved.max(w.norm() / z[i].norm().max(1.0));
            }
        }
        if moved < 1e-15 {
            break;
        }
    }
    for zi in &mut z {
        for _ in 0..3 {
            let step = eval(&monic, *zi) / eval(&dp, *zi);
            if step.re.is_finite() && step.im.is_finite() {
                *zi -= step;
            }
        }
    }
    z
}
