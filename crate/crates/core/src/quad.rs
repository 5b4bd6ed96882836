//! Fixed-node composite Gauss–Legendre rules.
//!
//! Nodes never adapt to the integrand, so quadrature-evaluated functions stay smooth
//! in their parameters — finite differences of them remain meaningful.

use std::num::NonZeroUsize;

use gauss_quad::GaussLegendre;

#[derive(Clone, Debug)]
pub struct Rule {
    pairs: Vec<(f64, f64)>,
}

impl Rule {
    pub fn new(points: usize) -> Self {
        let gl = GaussLegendre::new(NonZeroUsize::new(points.max(1)).expect("nonzero"));
        Rule {
            pairs: gl.as_node_weight_pairs().to_vec(),
        }
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// `∫_a^b f` with `panels` equal panels.
    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, panels: usize, mut f: F) -> f64 {
        let panels = panels.max(1);
        let h = (b - a) / panels as f64;
        let mut total = crate::dd::KahanSum::default();
        for p in 0..panels {
            let lo = a + h * p as f64;
            let mid = lo + 0.5 * h;
            for &(x, w) in &self.pairs {
                total.add(0.5 * h * w * f(mid + 0.5 * h * x));
            }
        }
        total.value()
    }

    /// Nodes and weights mapped to `[a, b]` with `panels` equal panels.
    pub fn mapped(&self, a: f64, b: f64, panels: usize) -> Vec<(f64, f64)> {
        let panels = panels.max(1);
        let h = (b - a) / panels as f64;
        let mut out = Vec::with_capacity(panels * self.pairs.len());
        for p in 0..panels {
            let mid = a + h * (p as f64 + 0.5);
            out.extend(self.pairs.iter().map(|&(x, w)| (mid + 0.5 * h * x, 0.5 * h * w)));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integrates_polynomials_exactly() {
        let r = Rule::new(5);
        let v = r.integrate(0.0, 2.0, 1, |x| x.powi(9));
        assert!((v - 102.4).abs() < 1e-12);
    }

    #[test]
    fn composite_panels_agree() {
        let r = Rule::new(16);
        let a = r.integrate(0.0, 3.0, 1, f64::sin);
        let b = r.integrate(0.0, 3.0, 4, f64::sin);
        assert!((a - b).abs() < 1e-14);
        assert!((a - (1.0 - 3f64.cos())).abs() < 1e-14);
    }
}
