//! Ball volumes, Bessel functions of the first kind, their first positive
//! zeros and the radial profile of the first Dirichlet eigenfunction of a ball.
//!
//! Everything here works from the ascending power series
//!
//! ```text
//! J_ν(x) = (x/2)^ν / Γ(ν+1) · Σ_k (−x²/4)^k / (k! (ν+1)_k)
//! ```
//!
//! which is the only evaluation path. The partial sums are carried in
//! double-double arithmetic so the cancellation between large alternating
//! terms (the terms peak near `k ≈ x/2`) does not eat the accuracy budget
//! for arguments up to [`MAX_BESSEL_ARG`].

use std::f64::consts::PI;

use crate::error::{domain, Error, Result};

/// Largest argument accepted by [`bessel_j`].
pub const MAX_BESSEL_ARG: f64 = 50.0;
/// Largest order accepted by [`bessel_first_zero`].
pub const MAX_ZERO_ORDER: f64 = 10.0;

/// Order `ν ≥ 0` of a Bessel function of the first kind.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct BesselOrder(f64);

impl BesselOrder {
    pub fn new(nu: f64) -> Result<Self> {
        if !nu.is_finite() || nu < 0.0 {
            return domain(format!("Bessel order must be finite and >= 0, got {nu}"));
        }
        Ok(Self(nu))
    }

    /// The order `n/2 − 1` attached to the Dirichlet ball problem in dimension `n`.
    pub fn for_dimension(n: u32) -> Result<Self> {
        if n < 2 {
            return domain(format!("dimension must be >= 2, got {n}"));
        }
        Ok(Self(f64::from(n) / 2.0 - 1.0))
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// Γ(x). Exact product formulas for positive integers and half-integers,
/// Lanczos (via `statrs`) for everything else.
pub fn gamma(x: f64) -> f64 {
    let twice = 2.0 * x;
    if x > 0.0 && twice.fract() == 0.0 && twice <= 340.0 {
        let (mut acc, mut base) = if x.fract() == 0.0 {
            (1.0, 1.0)
        } else {
            (PI.sqrt(), 0.5)
        };
        while base < x {
            acc *= base;
            base += 1.0;
        }
        acc
    } else {
        statrs::function::gamma::gamma(x)
    }
}

/// Volume ω_n of the unit ball in `R^n`.
pub fn unit_ball_volume(n: u32) -> Result<f64> {
    if n < 1 {
        return domain("unit ball volume needs n >= 1");
    }
    let half = f64::from(n) / 2.0;
    Ok(PI.powf(half) / gamma(half + 1.0))
}

/// Minimal double-double arithmetic for the series accumulation.
mod dd {
    #[derive(Debug, Clone, Copy)]
    pub struct Dd {
        pub hi: f64,
        pub lo: f64,
    }

    #[inline]
    fn two_sum(a: f64, b: f64) -> (f64, f64) {
        let s = a + b;
        let bb = s - a;
        (s, (a - (s - bb)) + (b - bb))
    }

    #[inline]
    fn quick_two_sum(a: f64, b: f64) -> Dd {
        let s = a + b;
        Dd {
            hi: s,
            lo: b - (s - a),
        }
    }

    #[inline]
    fn two_prod(a: f64, b: f64) -> (f64, f64) {
        let p = a * b;
        (p, a.mul_add(b, -p))
    }

    impl Dd {
        pub const ONE: Dd = Dd { hi: 1.0, lo: 0.0 };

        pub fn from_sum(a: f64, b: f64) -> Dd {
            let (s, e) = two_sum(a, b);
            Dd { hi: s, lo: e }
        }

        pub fn from_prod(a: f64, b: f64) -> Dd {
            let (p, e) = two_prod(a, b);
            Dd { hi: p, lo: e }
        }

        pub fn add(self, o: Dd) -> Dd {
            let (s, e) = two_sum(self.hi, o.hi);
            let (t, f) = two_sum(self.lo, o.lo);
            let r = quick_two_sum(s, e + t);
            quick_two_sum(r.hi, r.lo + f)
        }

        pub fn sub(self, o: Dd) -> Dd {
            self.add(o.neg())
        }

        pub fn neg(self) -> Dd {
            Dd {
                hi: -self.hi,
                lo: -self.lo,
            }
        }

        pub fn mul(self, o: Dd) -> Dd {
            let (p, e) = two_prod(self.hi, o.hi);
            quick_two_sum(p, e + (self.hi * o.lo + self.lo * o.hi))
        }

        pub fn scale(self, k: f64) -> Dd {
            self.mul(Dd { hi: k, lo: 0.0 })
        }

        pub fn div(self, o: Dd) -> Dd {
            let q1 = self.hi / o.hi;
            let r = self.sub(o.scale(q1));
            let q2 = r.hi / o.hi;
            let r = r.sub(o.scale(q2));
            let q3 = r.hi / o.hi;
            let q = quick_two_sum(q1, q2);
            q.add(Dd { hi: q3, lo: 0.0 })
        }

        pub fn to_f64(self) -> f64 {
            self.hi + self.lo
        }
    }
}

/// `Σ_k (−x²/4)^k / (k! (ν+1)_k)`, i.e. `Γ(ν+1) (x/2)^{−ν} J_ν(x)`.
fn reduced_series(nu: f64, x: f64) -> f64 {
    use dd::Dd;
    let z = Dd::from_prod(x, x).scale(0.25);
    let mut term = Dd::ONE;
    let mut sum = Dd::ONE;
    for k in 1..=600u32 {
        let kf = f64::from(k);
        let denom = Dd::from_sum(kf, nu).scale(kf);
        term = term.mul(z).div(denom).neg();
        sum = sum.add(term);
        let t = term.hi.abs();
        if kf > z.hi && (t < 1e-17 * sum.hi.abs() || t < 1e-34) {
            break;
        }
    }
    sum.to_f64()
}

fn check_arg(x: f64) -> Result<()> {
    if !(0.0..=MAX_BESSEL_ARG).contains(&x) {
        return domain(format!("Bessel argument {x} outside [0, {MAX_BESSEL_ARG}]"));
    }
    Ok(())
}

fn j_unchecked(nu: f64, x: f64) -> f64 {
    (0.5 * x).powf(nu) / gamma(nu + 1.0) * reduced_series(nu, x)
}

/// `J_ν(x)` for `0 ≤ x ≤ 50`.
pub fn bessel_j(order: BesselOrder, x: f64) -> Result<f64> {
    check_arg(x)?;
    Ok(j_unchecked(order.0, x))
}

/// `x^{−ν} J_ν(x)`, analytic at the origin where it equals `1/(2^ν Γ(ν+1))`.
pub fn bessel_j_scaled(order: BesselOrder, x: f64) -> Result<f64> {
    check_arg(x)?;
    let nu = order.0;
    Ok(reduced_series(nu, x) / (2f64.powf(nu) * gamma(nu + 1.0)))
}

/// `J_ν′(x) = (ν/x) J_ν(x) − J_{ν+1}(x)`; at `x = 0` the limit.
fn j_derivative(nu: f64, x: f64) -> f64 {
    if x == 0.0 {
        return if nu == 1.0 { 0.5 } else { 0.0 };
    }
    nu / x * j_unchecked(nu, x) - j_unchecked(nu + 1.0, x)
}

/// First positive zero `j_{ν,1}` of `J_ν`, for `0 ≤ ν ≤ 10`.
///
/// Brackets the zero with an upward scan in steps of 0.1 starting from
/// `max(ν, 0.1)`, bisects the bracket down to 1e-9 and polishes with Newton.
pub fn bessel_first_zero(order: BesselOrder) -> Result<f64> {
    let nu = order.0;
    if nu > MAX_ZERO_ORDER {
        return domain(format!(
            "zero finder supports orders <= {MAX_ZERO_ORDER}, got {nu}"
        ));
    }
    let f = |x: f64| j_unchecked(nu, x);
    let mut lo = nu.max(0.1);
    let mut hi;
    loop {
        hi = lo + 0.1;
        if hi > MAX_BESSEL_ARG {
            return Err(Error::Internal(format!(
                "no sign change of J_{nu} found below {MAX_BESSEL_ARG}"
            )));
        }
        if f(hi) <= 0.0 {
            break;
        }
        lo = hi;
    }
    while hi - lo > 1e-9 {
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mut x = 0.5 * (lo + hi);
    for _ in 0..20 {
        let step = f(x) / j_derivative(nu, x);
        let next = x - step;
        if !(lo - 1e-9..=hi + 1e-9).contains(&next) {
            break;
        }
        x = next;
        if step.abs() <= 4.0 * f64::EPSILON * x {
            break;
        }
    }
    Ok(x)
}

/// `φ(r) = r^{1−n/2} J_{n/2−1}(√λ r)`, the radial profile of the first
/// Dirichlet eigenfunction of the ball of radius `j_{n/2−1,1}/√λ`.
///
/// Evaluated through `x^{−ν}J_ν(x)` so the value at `r = 0` is finite.
pub fn ball_eigen_profile(n: u32, lambda: f64, r: f64) -> Result<f64> {
    let order = BesselOrder::for_dimension(n)?;
    if !(lambda > 0.0) || !lambda.is_finite() {
        return domain(format!("eigenvalue must be positive, got {lambda}"));
    }
    let k = lambda.sqrt();
    let edge = bessel_first_zero(order)? / k;
    if !(r >= 0.0) || r > edge * (1.0 + 1e-12) {
        return domain(format!("radius {r} outside [0, {edge}]"));
    }
    let nu = order.0;
    Ok(k.powf(nu) * bessel_j_scaled(order, (k * r).min(MAX_BESSEL_ARG))?)
}
