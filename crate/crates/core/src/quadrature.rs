//! Gauss–Legendre rules and geometrically graded composite rules for
//! integrands with algebraic endpoint singularities.

/// Nodes and weights of the n-point Gauss–Legendre rule on [-1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Composite rule on [0, 1] with panels shrinking geometrically toward both
/// endpoints: breakpoints r^levels, …, r, 1/2 mirrored at 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GradedRule {
    pub order: usize,
    pub levels: usize,
    pub ratio: f64,
}

impl Default for GradedRule {
    fn default() -> Self {
        GradedRule { order: 12, levels: 80, ratio: 0.3 }
    }
}

/// A one-dimensional rule on [0, 1] stored so that both x and 1 - x are
/// available without cancellation near the right endpoint.
#[derive(Debug, Clone)]
pub struct UnitRule {
    pub x: Vec<f64>,
    pub one_minus_x: Vec<f64>,
    pub w: Vec<f64>,
}

impl GradedRule {
    pub fn halved(&self) -> GradedRule {
        GradedRule { order: (self.order / 2).max(1), ..*self }
    }

    /// Panels on [0, 1/2] as (left, right) pairs.
    fn half_panels(&self) -> Vec<(f64, f64)> {
        let mut bps = vec![0.0];
        for k in (1..=self.levels).rev() {
            bps.push(0.5 * self.ratio.powi(k as i32));
        }
        bps.push(0.5);
        bps.windows(2).map(|w| (w[0], w[1])).collect()
    }

    pub fn unit_rule(&self) -> UnitRule {
        let (gx, gw) = gauss_legendre(self.order);
        let mut out = UnitRule { x: Vec::new(), one_minus_x: Vec::new(), w: Vec::new() };
        for (a, b) in self.half_panels() {
            let half = 0.5 * (b - a);
            for (&t, &w) in gx.iter().zip(&gw) {
                let near = a + half * (1.0 + t);
                // left half: x = near; mirrored: 1 - x = near
                out.x.push(near);
                out.one_minus_x.push(1.0 - near);
                out.w.push(w * half);
                out.x.push(1.0 - near);
                out.one_minus_x.push(near);
                out.w.push(w * half);
            }
        }
        out
    }
}

/// ∫_a^b f with panels graded toward `a` only.
pub fn integrate_graded_left<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, rule: GradedRule) -> f64 {
    let (gx, gw) = gauss_legendre(rule.order);
    let len = b - a;
    let mut bps = vec![0.0];
    for k in (1..=rule.levels).rev() {
        bps.push(rule.ratio.powi(k as i32));
    }
    bps.push(1.0);
    let mut s = 0.0;
    for w in bps.windows(2) {
        let (lo, hi) = (a + len * w[0], a + len * w[1]);
        let half = 0.5 * (hi - lo);
        for (&t, &wt) in gx.iter().zip(&gw) {
            s += wt * half * f(lo + half * (1.0 + t));
        }
    }
    s
}

/// Plain composite Gauss–Legendre with `panels` equal panels.
pub fn integrate_uniform<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, panels: usize, order: usize) -> f64 {
    let (gx, gw) = gauss_legendre(order);
    let h = (b - a) / panels as f64;
    let mut s = 0.0;
    for p in 0..panels {
        let lo = a + p as f64 * h;
        for (&t, &wt) in gx.iter().zip(&gw) {
            s += wt * 0.5 * h * f(lo + 0.5 * h * (1.0 + t));
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gl_integrates_polynomials_exactly() {
        let (x, w) = gauss_legendre(10);
        let s: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(18)).sum();
        assert!((s - 2.0 / 19.0).abs() < 1e-14);
        assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn graded_rule_handles_endpoint_singularity() {
        let r = GradedRule::default().unit_rule();
        // ∫ x^{-0.7} (1-x)^{-0.4} = B(0.3, 0.6)
        let s: f64 = (0..r.x.len())
            .map(|i| r.w[i] * r.x[i].powf(-0.7) * r.one_minus_x[i].powf(-0.4))
            .sum();
        let exact = crate::special::beta(0.3, 0.6).unwrap();
        assert!((s / exact - 1.0).abs() < 1e-9, "{s} vs {exact}");
    }
}
