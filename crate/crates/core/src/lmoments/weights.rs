//! The smooth weight V(y) entering the approximate-functional-equation
//! expansions: a Mellin inversion of the gamma-factor ratio
//!
//!   V(y) = (1/2πi) ∫_{Re u = σ} y^{-u} γ_{t_a}(1/2+u) γ_{t_b}(1/2+u)
//!                                / (γ_{t_a}(1/2) γ_{t_b}(1/2)) du/u,
//!
//! with γ_j(u) = π^{-u/2} Γ((u+j)/2) and parities t_a, t_b in {0, 1}.
//! V(y) → 1 rapidly as y → 0 and decays faster than any power as y → ∞.

use num_complex::Complex;

use super::special::gamma_complex;
use crate::C64;

/// Quadrature step on the vertical line; the integrand is analytic in a
/// strip of width > 1 around the contour, so trapezoid error is negligible
/// at this step size.
const QUAD_STEP: f64 = 0.05;
/// Integrand threshold below which the tails are truncated.
const TAIL_EPS: f64 = 1e-14;

/// Precomputed quadrature kernel for one (parity pair, σ): evaluating V(y)
/// is then a single pass of complex exponentials.
#[derive(Debug, Clone)]
pub struct VWeight {
    sigma: f64,
    /// (t, weight) nodes with the trapezoid factor folded in.
    nodes: Vec<(f64, C64)>,
}

impl VWeight {
    /// Builds the kernel for character parities (t_a, t_b) on Re u = σ.
    pub fn new(parity_a: u8, parity_b: u8, sigma: f64) -> Self {
        assert!(sigma > 0.0, "contour must stay right of u = 0");
        let ta = parity_a as f64;
        let tb = parity_b as f64;
        let ln_pi = std::f64::consts::PI.ln();
        let denom = gamma_complex(Complex::new((0.5 + ta) / 2.0, 0.0))
            * gamma_complex(Complex::new((0.5 + tb) / 2.0, 0.0));
        // Even polynomial insertion G(u) with G(0) = 1, zeroed exactly at
        // this parity pair's nearest gamma poles (u = ±1/2 per even factor,
        // u = ±3/2 per odd factor). The inversion identity holds for any
        // such G; this choice makes V(y) - 1 vanish to high order at y → 0
        // while keeping sup |V| of order one, and it also cancels the
        // residue a trivial-power character would contribute at u = 1/2.
        let g_factor = move |u: C64| -> C64 {
            let half = Complex::new(1.0, 0.0) - 4.0 * u * u;
            let three_half = Complex::new(1.0, 0.0) - 4.0 * u * u / 9.0;
            match (parity_a, parity_b) {
                (0, 0) => half * half,
                (1, 1) => three_half * three_half,
                _ => half * three_half,
            }
        };
        let kernel = |t: f64| -> C64 {
            let u = Complex::new(sigma, t);
            // The π^{-u/2} pieces of the two gamma factors combine to π^{-u}.
            let num = (-u * ln_pi).exp()
                * g_factor(u)
                * gamma_complex((u + 0.5 + ta) / 2.0)
                * gamma_complex((u + 0.5 + tb) / 2.0);
            num / denom / u
        };
        // March outward until the kernel is negligible on both sides.
        let mut nodes = vec![(0.0, kernel(0.0))];
        let mut t = QUAD_STEP;
        let scale = nodes[0].1.norm().max(1.0);
        loop {
            let up = kernel(t);
            let down = kernel(-t);
            nodes.push((t, up));
            nodes.push((-t, down));
            if (up.norm() + down.norm()) < TAIL_EPS * scale && t > 10.0 {
                break;
            }
            t += QUAD_STEP;
            assert!(t < 500.0, "gamma kernel failed to decay");
        }
        let w = QUAD_STEP / (2.0 * std::f64::consts::PI);
        for node in &mut nodes {
            node.1 *= w;
        }
        VWeight { sigma, nodes }
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    /// V(y) for y > 0.
    pub fn eval(&self, y: f64) -> C64 {
        assert!(y > 0.0);
        let ln_y = y.ln();
        let amp = y.powf(-self.sigma);
        let mut acc = Complex::new(0.0, 0.0);
        for &(t, w) in &self.nodes {
            // y^{-u} = y^{-σ} e^{-i t ln y}
            let phase = -t * ln_y;
            acc += w * Complex::new(phase.cos(), phase.sin());
        }
        acc * amp
    }
}
