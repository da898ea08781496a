use alloc::vec::Vec;
use core::f64::consts::PI;

use alloc::vec;

use libm::{exp, hypot, pow, sqrt};

use super::SpecfunError;

pub const MIN_ORDER: usize = 2;
pub const MAX_ORDER: usize = 256;
pub const DEFAULT_ORDER: usize = 64;

const NEWTON_ITERATIONS: usize = 100;

/// Nodes and weights for integrals of the form `∫ exp(-t²) g(t) dt` over
/// the real line.
///
/// Nodes are strictly increasing and exactly symmetric about zero; the
/// weights are positive and sum to `sqrt(pi)`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl QuadratureRule {
    /// Truncated trapezoidal rule with spacing `step` on `[-half_width,
    /// half_width]`, weighted by `exp(-t²)`.
    ///
    /// For integrands analytic in a strip this converges geometrically in
    /// `1/step`, and unlike a Gauss-Hermite rule the resolution near the
    /// origin can be chosen independently of the number of nodes.
    pub fn hermite_trapezoid(step: f64, half_width: f64) -> Result<Self, SpecfunError> {
        if !(step > 0.0 && step.is_finite()) {
            return Err(SpecfunError::InvalidTolerance(step));
        }
        if !(half_width > step && half_width.is_finite()) {
            return Err(SpecfunError::InvalidBracket {
                lo: -half_width,
                hi: half_width,
            });
        }
        let half = (half_width / step) as usize;
        let mut nodes = Vec::with_capacity(2 * half + 1);
        let mut weights = Vec::with_capacity(2 * half + 1);
        for i in (1..=half).rev() {
            let t = i as f64 * step;
            nodes.push(-t);
            weights.push(step * exp(-t * t));
        }
        nodes.push(0.0);
        weights.push(step);
        for i in 1..=half {
            let t = i as f64 * step;
            nodes.push(t);
            weights.push(step * exp(-t * t));
        }
        Ok(Self { nodes, weights })
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Spacing of the two innermost nodes, the finest feature the rule
    /// resolves.
    pub fn central_spacing(&self) -> f64 {
        let n = self.nodes.len();
        let mid = n / 2;
        if n % 2 == 1 {
            self.nodes[mid + 1] - self.nodes[mid]
        } else {
            self.nodes[mid] - self.nodes[mid - 1]
        }
    }

    /// `Σ wᵢ g(tᵢ)`.
    pub fn integrate<F: FnMut(f64) -> f64>(&self, mut g: F) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&t, &w)| w * g(t))
            .sum()
    }
}

/// Gauss-Hermite rule of the given order (2..=256).
///
/// Nodes start as eigenvalues of the symmetric Jacobi matrix of the Hermite
/// recurrence (Golub-Welsch), found by implicit QL iteration. Each node is
/// then polished by Newton steps on the orthonormal three-term recurrence,
/// which also supplies the weights `2 / p_n'(t)²`.
pub fn gauss_hermite(order: usize) -> Result<QuadratureRule, SpecfunError> {
    if !(MIN_ORDER..=MAX_ORDER).contains(&order) {
        return Err(SpecfunError::QuadratureOrder(order));
    }
    let n = order;
    let mut diag = vec![0.0; n];
    let mut off: Vec<f64> = (1..n).map(|k| sqrt(k as f64 / 2.0)).collect();
    off.push(0.0);
    tridiagonal_eigenvalues(&mut diag, &mut off)?;
    diag.sort_by(|a, b| a.total_cmp(b));

    // Polish the non-negative half and mirror it.
    let half = n.div_ceil(2);
    let mut roots = Vec::with_capacity(half);
    let mut root_weights = Vec::with_capacity(half);
    for i in 0..half {
        let mut z = diag[n - 1 - i].abs();
        for _ in 0..NEWTON_ITERATIONS {
            let (p, dp) = orthonormal_hermite(n, z);
            let step = p / dp;
            z -= step;
            if step.abs() <= 1e-16 * z.abs().max(1.0) {
                break;
            }
        }
        if 2 * i + 1 == n {
            z = 0.0;
        }
        let (_, dp) = orthonormal_hermite(n, z);
        roots.push(z);
        root_weights.push(2.0 / (dp * dp));
    }
    for pair in roots.windows(2) {
        if !(pair[0] > pair[1]) {
            return Err(SpecfunError::NoConvergence(NEWTON_ITERATIONS));
        }
    }

    let mut nodes = Vec::with_capacity(n);
    let mut weights = Vec::with_capacity(n);
    for i in 0..n / 2 {
        nodes.push(-roots[i]);
        weights.push(root_weights[i]);
    }
    for i in (0..half).rev() {
        nodes.push(roots[i]);
        weights.push(root_weights[i]);
    }
    Ok(QuadratureRule { nodes, weights })
}

// Eigenvalues of a symmetric tridiagonal matrix by the implicit QL method
// with Wilkinson shifts. `diag` is overwritten with the eigenvalues; `off`
// holds the sub-diagonal in its first n-1 slots.
fn tridiagonal_eigenvalues(diag: &mut [f64], off: &mut [f64]) -> Result<(), SpecfunError> {
    const MAX_SWEEPS: usize = 60;
    let n = diag.len();
    for l in 0..n {
        let mut sweeps = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = diag[m].abs() + diag[m + 1].abs();
                if off[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            sweeps += 1;
            if sweeps > MAX_SWEEPS {
                return Err(SpecfunError::NoConvergence(MAX_SWEEPS));
            }
            let mut g = (diag[l + 1] - diag[l]) / (2.0 * off[l]);
            let mut r = hypot(g, 1.0);
            g = diag[m] - diag[l] + off[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut i = m;
            let mut deflated = false;
            while i > l {
                i -= 1;
                let f = s * off[i];
                let b = c * off[i];
                r = hypot(f, g);
                off[i + 1] = r;
                if r == 0.0 {
                    diag[i + 1] -= p;
                    off[m] = 0.0;
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = diag[i + 1] - p;
                r = (diag[i] - g) * s + 2.0 * c * b;
                p = s * r;
                diag[i + 1] = g + p;
                g = c * r - b;
            }
            if deflated {
                continue;
            }
            diag[l] -= p;
            off[l] = g;
            off[m] = 0.0;
        }
    }
    Ok(())
}

// Value of the orthonormal Hermite polynomial of degree n at z and its
// derivative, via p_j = z sqrt(2/j) p_{j-1} - sqrt((j-1)/j) p_{j-2}.
fn orthonormal_hermite(n: usize, z: f64) -> (f64, f64) {
    let mut p1 = pow(PI, -0.25);
    let mut p2 = 0.0;
    for j in 1..=n {
        let jf = j as f64;
        let p3 = p2;
        p2 = p1;
        p1 = z * sqrt(2.0 / jf) * p2 - sqrt((jf - 1.0) / jf) * p3;
    }
    (p1, sqrt(2.0 * n as f64) * p2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const SQRT_PI: f64 = 1.772_453_850_905_516;

    // ∫ t^k exp(-t²) dt = Γ((k+1)/2) for even k, 0 for odd k.
    fn exact_moment(k: u32) -> f64 {
        if k % 2 == 1 {
            return 0.0;
        }
        let mut m = SQRT_PI;
        let mut j = 1;
        while j < k {
            m *= j as f64 / 2.0;
            j += 2;
        }
        m
    }

    #[test]
    fn two_point_rule() {
        let rule = gauss_hermite(2).unwrap();
        let r = core::f64::consts::FRAC_1_SQRT_2;
        assert!((rule.nodes()[0] + r).abs() < 1e-15);
        assert!((rule.nodes()[1] - r).abs() < 1e-15);
        for &w in rule.weights() {
            assert!((w - SQRT_PI / 2.0).abs() < 1e-15);
        }
    }

    #[test]
    fn rejects_out_of_range_orders() {
        assert_eq!(gauss_hermite(1), Err(SpecfunError::QuadratureOrder(1)));
        assert_eq!(gauss_hermite(257), Err(SpecfunError::QuadratureOrder(257)));
    }

    #[test]
    fn invariants_for_every_order() {
        for n in MIN_ORDER..=MAX_ORDER {
            let rule = gauss_hermite(n).unwrap();
            assert_eq!(rule.order(), n);
            assert_eq!(rule.weights().len(), n);
            let total: f64 = rule.weights().iter().sum();
            assert!((total - SQRT_PI).abs() < 1e-12, "order {n}: {total}");
            for pair in rule.nodes().windows(2) {
                assert!(pair[0] < pair[1], "order {n}");
            }
            for i in 0..n {
                assert_eq!(rule.nodes()[i], -rule.nodes()[n - 1 - i]);
                assert!(rule.weights()[i] > 0.0);
            }
        }
    }

    #[test]
    fn second_moment_order_20() {
        let rule = gauss_hermite(20).unwrap();
        assert!((rule.integrate(|t| t * t) - SQRT_PI / 2.0).abs() < 1e-12);
    }

    #[test]
    fn exact_for_monomials_up_to_degree_2n_minus_1() {
        for &n in &[2usize, 5, 10, 16, 33, 64] {
            let rule = gauss_hermite(n).unwrap();
            for k in 0..(2 * n as u32) {
                let exact = exact_moment(k);
                let got = rule.integrate(|t| libm::pow(t, k as f64));
                let scale = exact_moment(2 * k.div_ceil(2)).max(1.0);
                assert!(
                    (got - exact).abs() <= 1e-10 * scale,
                    "n {n}, k {k}: {got} vs {exact}"
                );
            }
        }
    }

    #[test]
    fn trapezoid_rule_shares_invariants() {
        let rule = QuadratureRule::hermite_trapezoid(0.25, 6.5).unwrap();
        let total: f64 = rule.weights().iter().sum();
        assert!((total - SQRT_PI).abs() < 1e-14);
        assert!((rule.integrate(|t| t * t) - SQRT_PI / 2.0).abs() < 1e-14);
        assert!((rule.central_spacing() - 0.25).abs() < 1e-15);
        // A feature much narrower than the Gaussian weight.
        let a = 400.0;
        let exact = SQRT_PI / sqrt(1.0 + a);
        let fine = QuadratureRule::hermite_trapezoid(0.5 / sqrt(1.0 + a), 6.5).unwrap();
        assert!((fine.integrate(|t| exp(-a * t * t)) - exact).abs() < 1e-14);
    }

    proptest! {
        #[test]
        fn random_polynomials(n in 2usize..40, coeffs in proptest::collection::vec(-1.0f64..1.0, 80)) {
            let rule = gauss_hermite(n).unwrap();
            let degree = 2 * n - 1;
            let poly = |t: f64| {
                let mut acc = 0.0;
                for c in coeffs[..=degree.min(79)].iter().rev() {
                    acc = acc * t + c;
                }
                acc
            };
            let exact: f64 = (0..=degree.min(79))
                .map(|k| coeffs[k] * exact_moment(k as u32))
                .sum();
            let scale: f64 = (0..=degree.min(79))
                .map(|k| (coeffs[k] * exact_moment(k as u32)).abs())
                .sum();
            let got = rule.integrate(poly);
            prop_assert!((got - exact).abs() <= 1e-9 * scale.max(1e-300), "{} vs {}", got, exact);
        }
    }
}
