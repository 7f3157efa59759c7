//! Gauss–Legendre rules (nodes from `gauss-quad`) with composite and
//! adaptive drivers.

use std::num::NonZeroUsize;
use std::sync::OnceLock;

use gauss_quad::legendre::GaussLegendre;

use crate::error::{Error, Result};

/// A Gauss–Legendre rule on `[-1, 1]`, nodes ascending.
#[derive(Debug, Clone)]
pub struct Rule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl Rule {
    fn build(m: usize) -> Self {
        let gl = GaussLegendre::new(NonZeroUsize::new(m).expect("rule size is nonzero"));
        let mut pairs: Vec<(f64, f64)> = gl.as_node_weight_pairs().to_vec();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        Self {
            nodes: pairs.iter().map(|p| p.0).collect(),
            weights: pairs.iter().map(|p| p.1).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// Nodes mapped to `[a, b]`.
    pub fn mapped_nodes(&self, a: f64, b: f64) -> impl Iterator<Item = f64> + '_ {
        let (c, h) = (0.5 * (a + b), 0.5 * (b - a));
        self.nodes.iter().map(move |x| c + h * x)
    }

    pub fn integrate(&self, a: f64, b: f64, mut f: impl FnMut(f64) -> f64) -> f64 {
        let (c, h) = (0.5 * (a + b), 0.5 * (b - a));
        let mut acc = 0.0;
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            acc += w * f(c + h * x);
        }
        acc * h
    }
}

/// Cached rule with `m` nodes. Only the sizes used in the crate are cached.
pub fn gauss_legendre(m: usize) -> &'static Rule {
    static R10: OnceLock<Rule> = OnceLock::new();
    static R20: OnceLock<Rule> = OnceLock::new();
    static R32: OnceLock<Rule> = OnceLock::new();
    match m {
        10 => R10.get_or_init(|| Rule::build(10)),
        20 => R20.get_or_init(|| Rule::build(20)),
        32 => R32.get_or_init(|| Rule::build(32)),
        _ => panic!("no cached Gauss-Legendre rule with {m} nodes"),
    }
}

/// Integral over `[a, b]` split at `a·2^k` so every piece has ratio of
/// endpoints at most 2. Suited to integrands with a pole just left of `a > 0`.
pub fn geometric_composite(rule: &Rule, a: f64, b: f64, mut f: impl FnMut(f64) -> f64) -> f64 {
    if b <= a {
        return 0.0;
    }
    if a <= 0.0 {
        return rule.integrate(a, b, f);
    }
    let mut acc = 0.0;
    let mut lo = a;
    while lo < b {
        let hi = (2.0 * lo).min(b);
        acc += rule.integrate(lo, hi, &mut f);
        lo = hi;
    }
    acc
}

/// Adaptive bisection comparing the 10- and 20-point rules on each piece.
///
/// Accepts a piece when the two rules agree to within its share of
/// `max(rel_tol·|I|, abs_tol)`, where `I` is a first whole-interval estimate.
pub fn adaptive(f: &dyn Fn(f64) -> f64, a: f64, b: f64, rel_tol: f64, abs_tol: f64) -> Result<f64> {
    let coarse = gauss_legendre(10);
    let fine = gauss_legendre(20);
    let whole = fine.integrate(a, b, f);
    let target = (rel_tol * whole.abs()).max(abs_tol);
    let mut stack = vec![(a, b, 0u32)];
    let mut total = 0.0;
    let width = b - a;
    while let Some((lo, hi, depth)) = stack.pop() {
        let i10 = coarse.integrate(lo, hi, f);
        let i20 = fine.integrate(lo, hi, f);
        let share = target * (hi - lo) / width;
        if (i20 - i10).abs() <= share || depth >= 60 {
            if depth >= 60 && (i20 - i10).abs() > share.max(1e-300) * 1e3 {
                return Err(Error::Solver(format!(
                    "adaptive quadrature did not converge near [{lo}, {hi}]"
                )));
            }
            total += i20;
        } else {
            let mid = 0.5 * (lo + hi);
            stack.push((mid, hi, depth + 1));
            stack.push((lo, mid, depth + 1));
        }
    }
    Ok(total)
}
