//! Savitzky-Golay smoothing with polynomial-fit edges.

use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq)]
pub struct Smoothed<T> {
    pub values: Vec<T>,
    /// Set when the series was shorter than the window and returned unchanged.
    pub too_short: bool,
}

/// Solves `a·x = b` in place by Gaussian elimination with partial pivoting.
fn solve<T: Real>(mut a: Vec<Vec<T>>, mut b: Vec<T>) -> Option<Vec<T>> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().partial_cmp(&a[j][col].abs()).unwrap())?;
        if a[piv][col].abs() <= T::epsilon() {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            for k in col..n {
                let d = f * a[col][k];
                a[row][k] = a[row][k] - d;
            }
            b[row] = b[row] - f * b[col];
        }
    }
    let mut x = vec![T::zero(); n];
    for row in (0..n).rev() {
        let mut s = b[row];
        for k in row + 1..n {
            s = s - a[row][k] * x[k];
        }
        x[row] = s / a[row][row];
    }
    Some(x)
}

/// Weights `w` such that `Σ w_j y_j` is the least-squares polynomial of degree
/// `order`, fitted at positions `-h..=h`, evaluated at `at`.
fn weights<T: Real>(window: usize, order: usize, at: T) -> Vec<T> {
    let h = (window / 2) as i64;
    let xs: Vec<T> = (-h..=h).map(|i| T::lit(i as f64)).collect();
    let m = order + 1;
    let mut ata = vec![vec![T::zero(); m]; m];
    for &x in &xs {
        let mut p = vec![T::one(); m];
        for k in 1..m {
            p[k] = p[k - 1] * x;
        }
        for r in 0..m {
            for c in 0..m {
                ata[r][c] = ata[r][c] + p[r] * p[c];
            }
        }
    }
    let mut e = vec![T::one(); m];
    for k in 1..m {
        e[k] = e[k - 1] * at;
    }
    // order < window guarantees a nonsingular normal matrix
    let z = solve(ata, e).expect("Vandermonde normal matrix is nonsingular");
    xs.iter()
        .map(|&x| {
            let mut p = T::one();
            let mut s = T::zero();
            for zk in &z {
                s = s + *zk * p;
                p = p * x;
            }
            s
        })
        .collect()
}

/// `window` must be odd and greater than `order`. The first and last `window/2`
/// samples come from the polynomial fitted to the first and last full window.
pub fn savgol_smooth<T: Real>(series: &[T], window: usize, order: usize) -> Result<Smoothed<T>> {
    if window % 2 == 0 || window == 0 {
        return Err(Error::Invalid(format!("smoothing window {window} must be odd")));
    }
    if order >= window {
        return Err(Error::Invalid(format!("polynomial order {order} must be below window {window}")));
    }
    let n = series.len();
    if n < window {
        return Ok(Smoothed { values: series.to_vec(), too_short: true });
    }
    let h = window / 2;
    let centre = weights(window, order, T::zero());
    let dot = |w: &[T], start: usize| w.iter().zip(&series[start..start + window]).fold(T::zero(), |s, (a, b)| s + *a * *b);
    let mut out = vec![T::zero(); n];
    for i in h..n - h {
        out[i] = dot(&centre, i - h);
    }
    for i in 0..h {
        let at = T::lit(i as f64 - h as f64);
        out[i] = dot(&weights(window, order, at), 0);
        out[n - 1 - i] = dot(&weights(window, order, -at), n - window);
    }
    Ok(Smoothed { values: out, too_short: false })
}
