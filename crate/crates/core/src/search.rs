//! One-dimensional maximisation helpers shared by the optimizer and the sweep drivers.

const INV_PHI: f64 = 0.618_033_988_749_894_8;

#[derive(Clone, Copy, Debug)]
pub struct Maximum<S> {
    pub x: f64,
    pub score: S,
    pub evaluations: usize,
}

/// Golden-section search for the maximum of a unimodal function on `[lo, hi]`.
///
/// `score` may be any partially ordered value, which lets callers break ties
/// lexicographically. On ties the left part of the bracket is kept, so a flat
/// function returns `lo`. The best evaluated point is returned, smallest `x`
/// among equal scores.
pub fn golden_section_max<S, F>(mut score: F, lo: f64, hi: f64, tol: f64) -> Maximum<S>
where
    S: PartialOrd + Copy,
    F: FnMut(f64) -> S,
{
    let (mut a, mut b) = (lo, hi);
    let mut evaluations = 0;
    let mut eval = |x: f64, evaluations: &mut usize| {
        *evaluations += 1;
        score(x)
    };

    let mut best_x = a;
    let mut best = eval(a, &mut evaluations);
    let consider = |x: f64, s: S, best_x: &mut f64, best: &mut S| {
        if s > *best || (!(s < *best) && x < *best_x) {
            *best = s;
            *best_x = x;
        }
    };
    let sb = eval(b, &mut evaluations);
    consider(b, sb, &mut best_x, &mut best);

    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let mut s1 = eval(x1, &mut evaluations);
    let mut s2 = eval(x2, &mut evaluations);
    consider(x1, s1, &mut best_x, &mut best);
    consider(x2, s2, &mut best_x, &mut best);

    // bracket shrinks geometrically; the cap only matters for tol at rounding level
    for _ in 0..200 {
        if b - a <= tol {
            break;
        }
        if !(s2 > s1) {
            b = x2;
            x2 = x1;
            s2 = s1;
            x1 = b - INV_PHI * (b - a);
            s1 = eval(x1, &mut evaluations);
            consider(x1, s1, &mut best_x, &mut best);
        } else {
            a = x1;
            x1 = x2;
            s1 = s2;
            x2 = a + INV_PHI * (b - a);
            s2 = eval(x2, &mut evaluations);
            consider(x2, s2, &mut best_x, &mut best);
        }
    }
    Maximum {
        x: best_x,
        score: best,
        evaluations,
    }
}

/// Whether a sampled sequence rises (weakly) to a single peak and then falls (weakly).
pub fn is_unimodal(values: &[f64]) -> bool {
    let mut falling = false;
    for w in values.windows(2) {
        if w[1] > w[0] {
            if falling {
                return false;
            }
        } else if w[1] < w[0] {
            falling = true;
        }
    }
    true
}

/// Index of the first maximum.
pub fn argmax_first(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate() {
        if *v > values[best] {
            best = i;
        }
    }
    best
}

/// Maximises `f` over `[lo, hi]`: a coarse pre-scan of `n_scan` points locates the
/// peak; if the scan is unimodal a golden-section search refines it inside the
/// neighbouring scan cells, otherwise a fine grid of `n_fine` points is used.
pub fn scan_then_refine<F>(mut f: F, lo: f64, hi: f64, n_scan: usize, n_fine: usize, tol: f64) -> Maximum<f64>
where
    F: FnMut(f64) -> f64,
{
    assert!(n_scan >= 2 && n_fine >= 2);
    let scan_x: Vec<f64> = (0..n_scan)
        .map(|i| lo + (hi - lo) * i as f64 / (n_scan - 1) as f64)
        .collect();
    let scan: Vec<f64> = scan_x.iter().map(|&x| f(x)).collect();
    let k = argmax_first(&scan);

    if is_unimodal(&scan) {
        let a = scan_x[k.saturating_sub(1)];
        let b = scan_x[(k + 1).min(n_scan - 1)];
        let refined = golden_section_max(&mut f, a, b, tol);
        let evaluations = refined.evaluations + n_scan;
        if refined.score > scan[k] || (refined.score == scan[k] && refined.x < scan_x[k]) {
            Maximum { evaluations, ..refined }
        } else {
            Maximum {
                x: scan_x[k],
                score: scan[k],
                evaluations,
            }
        }
    } else {
        let fine: Vec<f64> = (0..n_fine)
            .map(|i| f(lo + (hi - lo) * i as f64 / (n_fine - 1) as f64))
            .collect();
        let j = argmax_first(&fine);
        Maximum {
            x: lo + (hi - lo) * j as f64 / (n_fine - 1) as f64,
            score: fine[j],
            evaluations: n_scan + n_fine,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_parabola_peak() {
        let m = golden_section_max(|x| -(x - 0.3) * (x - 0.3), 0.0, 1.0, 1e-12);
        assert!((m.x - 0.3).abs() < 1e-6);
    }

    #[test]
    fn flat_function_returns_left_boundary() {
        let m = golden_section_max(|_| 1.0, 0.2, 0.9, 1e-9);
        assert_eq!(m.x, 0.2);
        let s = scan_then_refine(|_| 5.0, 0.0, 1.0, 21, 201, 1e-3);
        assert_eq!(s.x, 0.0);
    }

    #[test]
    fn boundary_maximum() {
        let m = golden_section_max(|x| x, 0.0, 1.0, 1e-12);
        assert_eq!(m.x, 1.0);
    }

    #[test]
    fn lexicographic_tie_break() {
        // plateau on the primary score, secondary prefers larger x
        let m = golden_section_max(|x: f64| (x.min(0.5), x), 0.0, 1.0, 1e-12);
        assert!(m.x > 0.999);
    }

    #[test]
    fn unimodality_check() {
        assert!(is_unimodal(&[1.0, 2.0, 2.0, 3.0, 1.0]));
        assert!(is_unimodal(&[3.0, 2.0, 1.0]));
        assert!(!is_unimodal(&[1.0, 3.0, 2.0, 4.0]));
    }

    #[test]
    fn non_unimodal_scan_falls_back_to_fine_grid() {
        // two bumps; the narrow one at 0.83 is higher and falls between scan points
        let f = |x: f64| (-(x - 0.2f64).powi(2) / 0.01).exp() + 1.3 * (-(x - 0.83f64).powi(2) / 0.0004).exp();
        let m = scan_then_refine(f, 0.0, 1.0, 21, 2001, 1e-4);
        assert!((m.x - 0.83).abs() < 1e-3, "{}", m.x);
    }
}
