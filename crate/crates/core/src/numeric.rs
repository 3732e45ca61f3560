//! Small numerical kernels: compensated summation, quadrature and
//! one-dimensional minimization.


/// Neumaier-compensated sum; the result does not depend on the magnitude
/// ordering of the terms up to one rounding.
pub fn sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut s = 0.0f64;
    let mut c = 0.0f64;
    for v in values {
        let t = s + v;
        if s.abs() >= v.abs() {
            c += (s - t) + v;
        } else {
            c += (v - t) + s;
        }
        s = t;
    }
    s + c
}

/// Arithmetic mean with compensated summation; `NaN` for an empty slice.
pub fn mean(values: &[f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    sum(values.iter().copied()) / values.len() as f64
}

/// Unbiased sample variance; `NaN` for fewer than two values.
pub fn variance(values: &[f64]) -> f64 {
    if values.len() < 2 {
        return f64::NAN;
    }
    let m = mean(values);
    sum(values.iter().map(|v| (v - m) * (v - m))) / (values.len() - 1) as f64
}

/// Standard error of the mean.
pub fn standard_error(values: &[f64]) -> f64 {
    if values.len() < 2 {
        return 0.0;
    }
    (variance(values) / values.len() as f64).sqrt()
}

/// Integral of `f` over `[a, b]` by adaptive Simpson quadrature with relative
/// tolerance `rel_tol` (absolute floor `1e-300`).
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, rel_tol: f64) -> f64 {
    if b <= a {
        return 0.0;
    }
    // Split the range first so that narrow peaks are not missed.
    const PIECES: usize = 64;
    let h = (b - a) / PIECES as f64;
    let mut parts = [0.0f64; PIECES];
    let mut coarse = 0.0;
    for (i, part) in parts.iter_mut().enumerate() {
        let lo = a + h * i as f64;
        let hi = if i + 1 == PIECES { b } else { lo + h };
        let mid = 0.5 * (lo + hi);
        let (flo, fmid, fhi) = (f(lo), f(mid), f(hi));
        *part = (hi - lo) / 6.0 * (flo + 4.0 * fmid + fhi);
        coarse += part.abs();
    }
    let tol = (rel_tol * coarse).max(1e-300);
    let mut total = 0.0;
    for i in 0..PIECES {
        let lo = a + h * i as f64;
        let hi = if i + 1 == PIECES { b } else { lo + h };
        let mid = 0.5 * (lo + hi);
        total += simpson(&f, lo, mid, hi, f(lo), f(mid), f(hi), parts[i], tol / PIECES as f64, 40);
    }
    total
}

#[allow(clippy::too_many_arguments)]
fn simpson<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    m: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let (flm, frm) = (f(lm), f(rm));
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    simpson(f, a, lm, m, fa, flm, fm, left, tol / 2.0, depth - 1)
        + simpson(f, m, rm, b, fm, frm, fb, right, tol / 2.0, depth - 1)
}

/// Minimizes a unimodal function on `[lo, hi]` by golden-section search.
pub fn golden_min<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    let g = 0.5 * (5.0f64.sqrt() - 1.0);
    let mut x1 = hi - g * (hi - lo);
    let mut x2 = lo + g * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    while hi - lo > tol {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - g * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + g * (hi - lo);
            f2 = f(x2);
        }
    }
    0.5 * (lo + hi)
}

/// Weighted least squares line `y = a + b x`; returns `(a, b)`.
pub(crate) fn weighted_line(x: &[f64], y: &[f64], w: &[f64]) -> Option<(f64, f64)> {
    let sw = sum(w.iter().copied());
    if !(sw > 0.0) {
        return None;
    }
    let mx = sum(x.iter().zip(w).map(|(x, w)| x * w)) / sw;
    let my = sum(y.iter().zip(w).map(|(y, w)| y * w)) / sw;
    let sxx = sum(x.iter().zip(w).map(|(x, w)| w * (x - mx) * (x - mx)));
    let sxy = sum(x.iter().zip(y).zip(w).map(|((x, y), w)| w * (x - mx) * (y - my)));
    if !(sxx > 0.0) {
        return None;
    }
    let b = sxy / sxx;
    Some((my - b * mx, b))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compensated_sum_recovers_small_terms() {
        let v = [1e16, 1.0, -1e16, 1.0];
        assert_eq!(sum(v), 2.0);
    }

    #[test]
    fn quadrature_matches_closed_forms() {
        let gauss = integrate(|x| (-x * x).exp(), 0.0, 10.0, 1e-10);
        assert!((gauss - 0.5 * core::f64::consts::PI.sqrt()).abs() < 1e-9);
        let poly = integrate(|x| x * x * x, 0.0, 2.0, 1e-12);
        assert!((poly - 4.0).abs() < 1e-12);
        // Narrow peak near the left end.
        let peak = integrate(|x| (-1e4 * x * x).exp(), 0.0, 1.0, 1e-8);
        assert!((peak - 0.5 * core::f64::consts::PI.sqrt() / 100.0).abs() < 1e-9);
    }

    #[test]
    fn golden_section_finds_parabola_minimum() {
        let x = golden_min(|x| (x - 1.7) * (x - 1.7), 0.0, 5.0, 1e-9);
        assert!((x - 1.7).abs() < 1e-6);
    }

    #[test]
    fn weighted_line_exact_fit() {
        let x = [0.0, 1.0, 2.0, 3.0];
        let y = [1.0, 3.0, 5.0, 7.0];
        let (a, b) = weighted_line(&x, &y, &[1.0, 2.0, 3.0, 4.0]).unwrap();
        assert!((a - 1.0).abs() < 1e-12 && (b - 2.0).abs() < 1e-12);
    }
}
