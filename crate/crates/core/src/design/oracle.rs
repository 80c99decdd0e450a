//! Brute-force simplex search used as an independent oracle in tests.

/// Brute-force oracle over Δ₃: step-`h` grid, then two zoomed grids
/// around the incumbent.
pub(crate) fn grid_oracle_3(f: impl Fn(&[f64; 3]) -> f64, h: f64, maximize: bool) -> f64 {
    let better = |a: f64, b: f64| if maximize { a > b } else { a < b };
    let mut best = if maximize {
        f64::NEG_INFINITY
    } else {
        f64::INFINITY
    };
    let mut arg = [1.0 / 3.0; 3];
    let steps = (1.0 / h).round() as usize;
    for i in 0..=steps {
        for j in 0..=(steps - i) {
            let w = [i as f64 * h, j as f64 * h, (steps - i - j) as f64 * h];
            let v = f(&w);
            if v.is_finite() && better(v, best) {
                best = v;
                arg = w;
            }
        }
    }
    let mut radius = h;
    for _ in 0..2 {
        let fine = radius / 50.0;
        let center = arg;
        for a in -50i32..=50 {
            for b in -50i32..=50 {
                let w0 = center[0] + a as f64 * fine;
                let w1 = center[1] + b as f64 * fine;
                let w2 = 1.0 - w0 - w1;
                if w0 < 0.0 || w1 < 0.0 || w2 < 0.0 {
                    continue;
                }
                let w = [w0, w1, w2];
                let v = f(&w);
                if v.is_finite() && better(v, best) {
                    best = v;
                    arg = w;
                }
            }
        }
        radius = fine;
    }
    best
}
