//! Power-of-two row and column equilibration.

pub(crate) struct Scaling {
    pub row: Vec<f64>,
    pub col: Vec<f64>,
}

fn pow2(v: f64) -> f64 {
    if !v.is_finite() || v <= 0.0 {
        return 1.0;
    }
    2f64.powi(v.log2().round().clamp(-60.0, 60.0) as i32)
}

/// Computes scale factors so that `row[i] * a_ij * col[j]` stays close to 1.
///
/// A few geometric-mean passes shrink the spread of magnitudes, then a final
/// max-abs pass bounds every row and column by one.
pub(crate) fn equilibrate(m: usize, n: usize, start: &[usize], rows: &[usize], vals: &[f64]) -> Scaling {
    let mut r = vec![1.0; m];
    let mut c = vec![1.0; n];
    let mut lo = vec![f64::INFINITY; m];
    let mut hi = vec![0.0f64; m];
    for _ in 0..4 {
        lo.iter_mut().for_each(|v| *v = f64::INFINITY);
        hi.iter_mut().for_each(|v| *v = 0.0);
        for j in 0..n {
            for e in start[j]..start[j + 1] {
                let a = (vals[e] * c[j]).abs();
                if a > 0.0 {
                    let i = rows[e];
                    lo[i] = lo[i].min(a);
                    hi[i] = hi[i].max(a);
                }
            }
        }
        for i in 0..m {
            if hi[i] > 0.0 {
                r[i] = pow2(1.0 / (lo[i] * hi[i]).sqrt());
            }
        }
        for j in 0..n {
            let (mut cl, mut ch) = (f64::INFINITY, 0.0f64);
            for e in start[j]..start[j + 1] {
                let a = (vals[e] * r[rows[e]]).abs();
                if a > 0.0 {
                    cl = cl.min(a);
                    ch = ch.max(a);
                }
            }
            if ch > 0.0 {
                c[j] = pow2(1.0 / (cl * ch).sqrt());
            }
        }
    }
    hi.iter_mut().for_each(|v| *v = 0.0);
    for j in 0..n {
        for e in start[j]..start[j + 1] {
            let i = rows[e];
            hi[i] = hi[i].max((vals[e] * c[j]).abs());
        }
    }
    for i in 0..m {
        if hi[i] > 0.0 {
            r[i] = pow2(1.0 / hi[i]);
        }
    }
    for j in 0..n {
        let mut ch = 0.0f64;
        for e in start[j]..start[j + 1] {
            ch = ch.max((vals[e] * r[rows[e]]).abs());
        }
        if ch > 0.0 {
            c[j] = pow2(1.0 / ch);
        }
    }
    Scaling { row: r, col: c }
}
