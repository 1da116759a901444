//! Small dense least-squares solver (Householder QR).

use crate::error::{Error, Result};

/// Solve `min ||A x - b||` for a tall matrix given as rows.
pub(crate) fn lstsq(rows: &[Vec<f64>], b: &[f64]) -> Result<Vec<f64>> {
    let m = rows.len();
    if m == 0 || m != b.len() {
        return Err(Error::LengthMismatch { left: m, right: b.len() });
    }
    let n = rows[0].len();
    if m < n {
        return Err(Error::InsufficientSamples { needed: n - 1, got: m });
    }
    // column-major copy
    let mut a: Vec<Vec<f64>> = (0..n).map(|j| rows.iter().map(|r| r[j]).collect()).collect();
    let mut rhs = b.to_vec();
    let scale = a
        .iter()
        .flat_map(|c| c.iter())
        .fold(0.0f64, |acc, v| acc.max(v.abs()));

    for k in 0..n {
        let norm = a[k][k..].iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm <= scale * 1e-13 {
            return Err(Error::Singular);
        }
        let alpha = if a[k][k] > 0.0 { -norm } else { norm };
        let mut v: Vec<f64> = a[k][k..].to_vec();
        v[0] -= alpha;
        let vnorm2: f64 = v.iter().map(|x| x * x).sum();
        if vnorm2 == 0.0 {
            continue;
        }
        for col in a.iter_mut().skip(k) {
            let s: f64 = v.iter().zip(&col[k..]).map(|(vi, ci)| vi * ci).sum::<f64>() * 2.0 / vnorm2;
            for (ci, vi) in col[k..].iter_mut().zip(&v) {
                *ci -= s * vi;
            }
        }
        let s: f64 = v.iter().zip(&rhs[k..]).map(|(vi, ri)| vi * ri).sum::<f64>() * 2.0 / vnorm2;
        for (ri, vi) in rhs[k..].iter_mut().zip(&v) {
            *ri -= s * vi;
        }
    }

    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let mut acc = rhs[i];
        for (j, xj) in x.iter().enumerate().skip(i + 1) {
            acc -= a[j][i] * xj;
        }
        x[i] = acc / a[i][i];
    }
    Ok(x)
}
