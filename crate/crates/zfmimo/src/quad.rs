//! Adaptive quadrature and Gauss-Laguerre rules used by the numerical oracles.

/// 15-point Kronrod abscissae on [0, 1] side (symmetric).
const XK: [f64; 8] = [
    0.0,
    0.207784955007898468,
    0.405845151377397167,
    0.586087235467691130,
    0.741531185599394440,
    0.864864423359769073,
    0.949107912342758525,
    0.991455371120812639,
];
const WK: [f64; 8] = [
    0.209482141084727828,
    0.204432940075298892,
    0.190350578064785410,
    0.169004726639267903,
    0.140653259715525919,
    0.104790010322250184,
    0.063092092629978553,
    0.022935322010529225,
];
/// 7-point Gauss weights, matching XK indices 0, 2, 4, 6.
const WG: [f64; 4] = [
    0.417959183673469388,
    0.381830050505118945,
    0.279705391489276668,
    0.129484966168869693,
];

/// One G7-K15 panel: returns (kronrod, |kronrod - gauss|).
fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let h = 0.5 * (b - a);
    let c = 0.5 * (a + b);
    let f0 = f(c);
    let mut k = WK[0] * f0;
    let mut g = WG[0] * f0;
    for i in 1..8 {
        let x = h * XK[i];
        let s = f(c - x) + f(c + x);
        k += WK[i] * s;
        if i % 2 == 0 {
            g += WG[i / 2] * s;
        }
    }
    (k * h, (k - g).abs() * h.abs())
}

/// Adaptive Gauss-Kronrod to an absolute tolerance.
///
/// Splits the worst panel first until the summed error estimate is below
/// `tol` or the panel budget is exhausted; returns (integral, error bound).
pub fn gk_adaptive<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64, max_panels: usize) -> (f64, f64) {
    let (v, e) = gk15(&f, a, b);
    let mut heap: Vec<(f64, f64, f64, f64)> = vec![(a, b, v, e)]; // (lo, hi, val, err)
    loop {
        let err: f64 = heap.iter().map(|t| t.3).sum();
        if err <= tol || heap.len() >= max_panels {
            let val = heap.iter().map(|t| t.2).sum();
            return (val, err);
        }
        // split worst panel (total_cmp so NaN estimates get split, not crash)
        let (idx, _) = heap
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.total_cmp(&y.1 .3))
            .unwrap();
        let (lo, hi, _, _) = heap.swap_remove(idx);
        let mid = 0.5 * (lo + hi);
        heap.push({
            let (v, e) = gk15(&f, lo, mid);
            (lo, mid, v, e)
        });
        heap.push({
            let (v, e) = gk15(&f, mid, hi);
            (mid, hi, v, e)
        });
    }
}

/// Adaptive Simpson, an independent second rule for cross-checks.
pub fn simpson_adaptive<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> f64 {
    fn simp(a: f64, fa: f64, b: f64, fb: f64, fm: f64) -> f64 {
        (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    }
    fn rec<F: Fn(f64) -> f64>(
        f: &F,
        a: f64,
        b: f64,
        fa: f64,
        fb: f64,
        fm: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = f(lm);
        let frm = f(rm);
        let left = simp(a, fa, m, fm, flm);
        let right = simp(m, fm, b, fb, frm);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            left + right + delta / 15.0
        } else {
            rec(f, a, m, fa, fm, flm, left, 0.5 * tol, depth - 1)
                + rec(f, m, b, fm, fb, frm, right, 0.5 * tol, depth - 1)
        }
    }
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = simp(a, fa, b, fb, fm);
    rec(&f, a, b, fa, fb, fm, whole, tol, 48)
}

/// Gauss-Laguerre nodes and weights for integrals of e^{-x} g(x) on [0, inf).
///
/// Golub-Welsch: nodes are the eigenvalues of the Jacobi matrix
/// (diag 2i+1, off-diag i), weights come from the first components of the
/// eigenvectors. Robust at every order used here.
pub fn gauss_laguerre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut d: Vec<f64> = (0..n).map(|i| 2.0 * i as f64 + 1.0).collect();
    let mut e: Vec<f64> = (0..n).map(|i| i as f64).collect(); // e[i] couples i-1,i
    let mut first_row = vec![0.0f64; n];
    first_row[0] = 1.0;
    tql_implicit(&mut d, &mut e, &mut first_row);
    let mut pairs: Vec<(f64, f64)> = d
        .iter()
        .zip(&first_row)
        .map(|(&node, &z)| (node, z * z)) // beta_0 = Gamma(1) = 1
        .collect();
    pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    pairs.into_iter().unzip()
}

/// QL with implicit shifts for a symmetric tridiagonal matrix, tracking one
/// row of the accumulated eigenvector rotations (enough for quadrature
/// weights). `d` holds the diagonal (becomes eigenvalues), `e[1..]` the
/// subdiagonal, `row` the tracked vector.
fn tql_implicit(d: &mut [f64], e: &mut [f64], row: &mut [f64]) {
    let n = d.len();
    if n == 0 {
        return;
    }
    // shift e left so e[i] couples d[i], d[i+1]
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = 0.0;
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            assert!(iter <= 50, "tridiagonal QL failed to converge");
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c) = (1.0f64, 1.0f64);
            let mut p = 0.0f64;
            let mut broke_early = false;
            for i in (l..m).rev() {
                let mut f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    broke_early = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                // rotate the tracked row
                f = row[i + 1];
                row[i + 1] = s * row[i] + c * f;
                row[i] = c * row[i] - s * f;
            }
            if broke_early {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
}

/// Sum of `exp(t_i - max)` terms re-exponentiated: returns (log of the sum, sign).
///
/// Accepts signed weights; used for log-domain quadrature accumulation.
pub fn log_sum_exp_signed(log_abs: &[f64], signs: &[f64]) -> (f64, f64) {
    let m = log_abs
        .iter()
        .cloned()
        .filter(|v| v.is_finite())
        .fold(f64::NEG_INFINITY, f64::max);
    if !m.is_finite() {
        return (f64::NEG_INFINITY, 1.0);
    }
    let mut s = 0.0;
    for (l, sg) in log_abs.iter().zip(signs) {
        if l.is_finite() {
            s += sg * (l - m).exp();
        }
    }
    if s == 0.0 {
        (f64::NEG_INFINITY, 1.0)
    } else {
        (m + s.abs().ln(), s.signum())
    }
}
