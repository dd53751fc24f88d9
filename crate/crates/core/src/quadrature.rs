//! Quadrature rules on the reference triangle and reference edge.
//!
//! Points on the reference triangle {(x, y) : x, y >= 0, x + y <= 1} are
//! stored as barycentric coordinates, which double as the values of the
//! three nodal P1 basis functions there. Weights are normalized to sum to
//! one; an integral over a physical element K is
//! `|K| * sum_q w_q * g(x_q)`.

/// Quadrature rule on the reference triangle, barycentric points.
#[derive(Debug, Clone)]
pub struct TriangleRule {
    /// (lambda_0, lambda_1, lambda_2) per point.
    pub points: Vec<[f64; 3]>,
    /// Weights summing to 1.
    pub weights: Vec<f64>,
}

impl TriangleRule {
    /// Seven-point rule, exact for polynomials of total degree 5.
    ///
    /// That covers every integrand the assembly needs with linear
    /// elements: mass products (degree 2), the quartic nonlinearity
    /// against a basis function (degree 4) and its Jacobian (degree 4).
    pub fn degree5() -> Self {
        let s15 = 15.0_f64.sqrt();
        let a1 = (6.0 + s15) / 21.0;
        let a2 = (6.0 - s15) / 21.0;
        let w0 = 9.0 / 40.0;
        let w1 = (155.0 + s15) / 1200.0;
        let w2 = (155.0 - s15) / 1200.0;

        let mut points = vec![[1.0 / 3.0; 3]];
        let mut weights = vec![w0];
        for &(a, w) in &[(a1, w1), (a2, w2)] {
            let b = 1.0 - 2.0 * a;
            points.push([b, a, a]);
            points.push([a, b, a]);
            points.push([a, a, b]);
            weights.extend_from_slice(&[w, w, w]);
        }
        Self { points, weights }
    }

    /// Conical product rule with `n^2` points, exact for total degree
    /// `2n - 2`. Used by test oracles that need more accuracy than the
    /// assembly rule (`n = 5` gives the 25-point rule).
    pub fn conical_product(n: usize) -> Self {
        let (t, w) = gauss_legendre_01(n);
        let mut points = Vec::with_capacity(n * n);
        let mut weights = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                // Duffy map of the unit square onto the triangle:
                // x = t_i, y = t_j (1 - t_i), Jacobian (1 - t_i).
                let x = t[i];
                let y = t[j] * (1.0 - t[i]);
                points.push([1.0 - x - y, x, y]);
                // Factor 2 converts from reference area 1/2 to
                // weights summing to one.
                weights.push(2.0 * w[i] * w[j] * (1.0 - t[i]));
            }
        }
        Self { points, weights }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Gauss-Legendre rule on [0, 1], weights summing to 1.
///
/// Nodes are found by Newton iteration on the Legendre polynomial, which
/// is accurate to machine precision for the small n used here.
pub fn gauss_legendre_01(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "need at least one Gauss point");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for k in 0..n {
        // Chebyshev initial guess on [-1, 1].
        let mut x = (std::f64::consts::PI * (k as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre(n, x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, dp) = legendre(n, x);
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        // Map [-1, 1] -> [0, 1]; Gauss nodes come out in descending order.
        nodes[n - 1 - k] = 0.5 * (x + 1.0);
        weights[n - 1 - k] = 0.5 * w;
    }
    (nodes, weights)
}

/// Legendre polynomial P_n and derivative at x via the three-term
/// recurrence.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for j in 2..=n {
        let p2 = ((2 * j - 1) as f64 * x * p1 - (j - 1) as f64 * p0) / j as f64;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn integrate_monomial(rule: &TriangleRule, px: u32, py: u32) -> f64 {
        // integral over the reference triangle of x^px y^py, against the
        // exact value px! py! / (px + py + 2)!.
        let val: f64 = rule
            .points
            .iter()
            .zip(&rule.weights)
            .map(|(l, w)| w * l[1].powi(px as i32) * l[2].powi(py as i32))
            .sum();
        val * 0.5 // reference area
    }

    fn exact_monomial(px: u32, py: u32) -> f64 {
        let fact = |k: u32| (1..=k).map(|v| v as f64).product::<f64>().max(1.0);
        fact(px) * fact(py) / fact(px + py + 2)
    }

    #[test]
    fn degree5_weights_sum_to_one() {
        let rule = TriangleRule::degree5();
        let s: f64 = rule.weights.iter().sum();
        assert!((s - 1.0).abs() < 1e-15);
        assert!(rule.weights.iter().all(|&w| w > 0.0));
        assert_eq!(rule.len(), 7);
    }

    #[test]
    fn degree5_exact_to_degree_5() {
        let rule = TriangleRule::degree5();
        for px in 0..=5 {
            for py in 0..=(5 - px) {
                let got = integrate_monomial(&rule, px, py);
                let want = exact_monomial(px, py);
                assert!(
                    (got - want).abs() < 1e-15,
                    "x^{px} y^{py}: got {got}, want {want}"
                );
            }
        }
    }

    #[test]
    fn conical_product_degree() {
        let rule = TriangleRule::conical_product(5);
        assert_eq!(rule.len(), 25);
        for px in 0..=8 {
            for py in 0..=(8 - px) {
                let got = integrate_monomial(&rule, px, py);
                let want = exact_monomial(px, py);
                assert!(
                    (got - want).abs() < 1e-14,
                    "x^{px} y^{py}: got {got}, want {want}"
                );
            }
        }
    }

    #[test]
    fn gauss_legendre_small_rules() {
        // n = 4 against tabulated nodes on [0, 1].
        let (x, w) = gauss_legendre_01(4);
        let x_ref = [
            0.069431844202973712,
            0.330009478207571868,
            0.669990521792428132,
            0.930568155797026288,
        ];
        let w_ref = [
            0.173927422568726929,
            0.326072577431273071,
            0.326072577431273071,
            0.173927422568726929,
        ];
        for i in 0..4 {
            assert!((x[i] - x_ref[i]).abs() < 1e-14, "node {i}: {} vs {}", x[i], x_ref[i]);
            assert!((w[i] - w_ref[i]).abs() < 1e-14, "weight {i}");
        }
        // Exactness for degree 2n-1 = 7.
        for n in 1..=16 {
            let (x, w) = gauss_legendre_01(n);
            for p in 0..=(2 * n - 1) {
                let got: f64 = x.iter().zip(&w).map(|(&xi, &wi)| wi * xi.powi(p as i32)).sum();
                let want = 1.0 / (p as f64 + 1.0);
                assert!((got - want).abs() < 1e-13, "n={n} p={p}: {got} vs {want}");
            }
        }
    }
}
