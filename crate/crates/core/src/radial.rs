//! Radial comparison solutions on balls of the AVR-weighted model space.
//!
//! Work happens in the variable `ρ = s^{1/n}`, the rearrangement measure
//! `s` raised to `1/n`. With `F(ξ) = ∫_0^ξ f*` the Talenti profile reads
//!
//! ```text
//! v*(s) = γ_n^{−2} ∫_{s^{1/n}}^{|Ω|^{1/n}} n σ^{1−n} F(σⁿ) dσ
//! ```
//!
//! whose integrand stays bounded at the origin because `F(ξ) = O(ξ)`.

use crate::error::{domain, Error, Result};
use crate::quadrature::{self, gauss_legendre, Rule};
use crate::rearrange::{check_avr, DecreasingProfile, Interpolation};
use crate::specialfn::{ball_eigen_profile, bessel_first_zero, unit_ball_volume, BesselOrder};

/// Number of uniform breakpoints in exported smooth profiles.
pub const PROFILE_SAMPLES: usize = 4096;

/// Dimension, AVR and volume of `Ω`, with the derived constant `γ_n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymmetrizationContext {
    n: u32,
    avr: f64,
    omega_total: f64,
    gamma_n: f64,
}

impl SymmetrizationContext {
    pub fn new(n: u32, avr: f64, omega_total: f64) -> Result<Self> {
        if n < 2 {
            return domain(format!("dimension must be >= 2, got {n}"));
        }
        check_avr(avr)?;
        if !(omega_total > 0.0) || !omega_total.is_finite() {
            return domain(format!(
                "domain measure must be positive, got {omega_total}"
            ));
        }
        let gamma_n = f64::from(n) * (avr * unit_ball_volume(n)?).powf(1.0 / f64::from(n));
        Ok(Self {
            n,
            avr,
            omega_total,
            gamma_n,
        })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn avr(&self) -> f64 {
        self.avr
    }

    pub fn omega_total(&self) -> f64 {
        self.omega_total
    }

    /// `γ_n = n (AVR·ω_n)^{1/n}`.
    pub fn gamma_n(&self) -> f64 {
        self.gamma_n
    }

    /// Radius `R` of `Ω♯`: `AVR·ω_n·Rⁿ = |Ω|`.
    pub fn sharp_radius(&self) -> f64 {
        let omega = unit_ball_volume(self.n).expect("n validated");
        (self.omega_total / (self.avr * omega)).powf(1.0 / self.nf())
    }

    fn nf(&self) -> f64 {
        f64::from(self.n)
    }

    /// `|Ω|^{1/n}`, the right end of the `ρ` interval.
    fn rho_max(&self) -> f64 {
        self.omega_total.powf(1.0 / self.nf())
    }
}

/// Exact-evaluation form of the Talenti profile for a step or linear source.
#[derive(Debug, Clone)]
pub struct TalentiSolution {
    n: u32,
    total: f64,
    inv_gamma2: f64,
    source: DecreasingProfile,
    /// `F` at the source breakpoints.
    cum: Vec<f64>,
    /// `ρ_i = s_i^{1/n}`.
    rho: Vec<f64>,
    /// `∫_{ρ_i}^{ρ_max} n σ^{1−n} F(σⁿ) dσ`.
    tail: Vec<f64>,
}

impl TalentiSolution {
    pub fn new(f_star: &DecreasingProfile, ctx: &SymmetrizationContext) -> Result<Self> {
        let total = f_star.total();
        if (total - ctx.omega_total).abs() > 1e-12 * total.max(ctx.omega_total) {
            return Err(Error::Contract(format!(
                "source profile lives on [0, {total}] but the domain has measure {}",
                ctx.omega_total
            )));
        }
        let cum = f_star.cumulative_pow(1.0);
        let nf = ctx.nf();
        let mut rho: Vec<f64> = f_star
            .breakpoints()
            .iter()
            .map(|s| s.powf(1.0 / nf))
            .collect();
        *rho.last_mut().expect("nonempty") = ctx.rho_max();
        let mut sol = Self {
            n: ctx.n,
            total,
            inv_gamma2: ctx.gamma_n.powi(-2),
            source: f_star.clone(),
            cum,
            rho,
            tail: Vec::new(),
        };
        let pieces = f_star.pieces();
        let mut tail = vec![0.0; pieces + 1];
        for i in (0..pieces).rev() {
            tail[i] = tail[i + 1] + sol.piece_integral(i, sol.rho[i], sol.rho[i + 1]);
        }
        sol.tail = tail;
        Ok(sol)
    }

    /// `F(ξ)` for `ξ` in piece `i`.
    fn big_f(&self, i: usize, xi: f64) -> f64 {
        let s0 = self.source.breakpoints()[i];
        let d = (xi - s0).max(0.0);
        let vals = self.source.values();
        match self.source.interpolation() {
            Interpolation::Step => self.cum[i] + vals[i] * d,
            Interpolation::Linear => {
                let w = self.source.breakpoints()[i + 1] - s0;
                let slope = (vals[i + 1] - vals[i]) / w;
                self.cum[i] + vals[i] * d + 0.5 * slope * d * d
            }
        }
    }

    /// `∫_a^b n σ^{1−n} F(σⁿ) dσ` with `[a, b]` inside piece `i`.
    fn piece_integral(&self, i: usize, a: f64, b: f64) -> f64 {
        if b <= a {
            return 0.0;
        }
        let nf = f64::from(self.n);
        let n_i = self.n as i32;
        let rule: &Rule = gauss_legendre(20);
        if i == 0 {
            // F(σⁿ) = σⁿ·(…) on the first piece: cancel the power analytically.
            let vals = self.source.values();
            let slope = match self.source.interpolation() {
                Interpolation::Step => 0.0,
                Interpolation::Linear => (vals[1] - vals[0]) / self.source.breakpoints()[1],
            };
            let (f0, sl) = (vals[0], slope);
            return rule.integrate(a, b, |s| {
                let sn = s.powi(n_i);
                nf * s * (f0 + 0.5 * sl * sn)
            });
        }
        quadrature::geometric_composite(rule, a, b, |s| {
            nf * s.powi(1 - n_i) * self.big_f(i, s.powi(n_i))
        })
    }

    pub fn total(&self) -> f64 {
        self.total
    }

    /// `v*(s)`; zero for `s ≥ |Ω|`.
    pub fn eval(&self, s: f64) -> f64 {
        if s >= self.total {
            return 0.0;
        }
        let s = s.max(0.0);
        let r = s.powf(1.0 / f64::from(self.n));
        let bps = self.source.breakpoints();
        let i = bps
            .partition_point(|&b| b <= s)
            .saturating_sub(1)
            .min(self.source.pieces() - 1);
        let inner = self.piece_integral(i, r, self.rho[i + 1]);
        self.inv_gamma2 * (inner + self.tail[i + 1])
    }

    /// Breakpoints of the source together with `count` uniform samples.
    pub fn to_profile(&self, count: usize) -> Result<DecreasingProfile> {
        let mut grid: Vec<f64> = (0..=count)
            .map(|k| self.total * k as f64 / count as f64)
            .chain(self.source.breakpoints().iter().copied())
            .collect();
        grid.sort_by(f64::total_cmp);
        grid.dedup_by(|a, b| (*a - *b).abs() <= 1e-14 * self.total);
        *grid.last_mut().expect("nonempty") = self.total;
        let mut values: Vec<f64> = grid.iter().map(|&s| self.eval(s)).collect();
        // Enforce exact monotonicity against quadrature rounding.
        for k in 1..values.len() {
            values[k] = values[k].min(values[k - 1]);
        }
        DecreasingProfile::linear(grid, values)
    }
}

/// The Talenti profile `v*` of `f*`, resampled as a linear profile.
pub fn talenti_profile(
    f_star: &DecreasingProfile,
    ctx: &SymmetrizationContext,
) -> Result<DecreasingProfile> {
    TalentiSolution::new(f_star, ctx)?.to_profile(PROFILE_SAMPLES)
}

/// `v(r) = v*(AVR·ω_n·rⁿ)` on `[0, R]`.
pub fn ball_radial_solution(
    v_star: &DecreasingProfile,
    ctx: &SymmetrizationContext,
    r: f64,
) -> Result<f64> {
    let big_r = ctx.sharp_radius();
    if !(r >= 0.0) || r > big_r * (1.0 + 1e-12) {
        return domain(format!("radius {r} outside [0, {big_r}]"));
    }
    if r >= big_r {
        return Ok(0.0);
    }
    let s = ctx.avr * unit_ball_volume(ctx.n)? * r.powi(ctx.n as i32);
    Ok(v_star.eval(s))
}

/// One level of the ball moment hierarchy.
#[derive(Debug, Clone)]
pub struct BallMoment {
    pub k: u32,
    pub profile: DecreasingProfile,
    /// `T_k(Ω♯) = (1/AVR) ∫_0^{|Ω|} v_k*`.
    pub torsion: f64,
    /// `J_k(Ω♯) = v_k*(0)`.
    pub sup: f64,
}

/// Values of a function of `ρ` at the 32 Gauss nodes of `[0, P]`.
///
/// Every profile of the hierarchy started from `v_0 ≡ 1` is a polynomial
/// in `ρ` of degree `2k ≤ 20`, so interpolation at these nodes is exact.
struct NodalPoly {
    nodes: Vec<f64>,
    bary: Vec<f64>,
    values: Vec<f64>,
}

impl NodalPoly {
    fn on(end: f64, f: impl Fn(f64) -> f64) -> Self {
        let rule = gauss_legendre(32);
        let nodes: Vec<f64> = rule.mapped_nodes(0.0, end).collect();
        let m = nodes.len();
        let mut bary = vec![1.0; m];
        for j in 0..m {
            for k in 0..m {
                if k != j {
                    bary[j] /= (nodes[j] - nodes[k]) / end;
                }
            }
        }
        let values = nodes.iter().map(|&x| f(x)).collect();
        Self {
            nodes,
            bary,
            values,
        }
    }

    fn eval(&self, x: f64) -> f64 {
        let mut num = 0.0;
        let mut den = 0.0;
        for ((&xj, &wj), &vj) in self.nodes.iter().zip(&self.bary).zip(&self.values) {
            let d = x - xj;
            if d == 0.0 {
                return vj;
            }
            let t = wj / d;
            num += t * vj;
            den += t;
        }
        num / den
    }

    fn integral(&self, a: f64, b: f64, weight: impl Fn(f64) -> f64) -> f64 {
        gauss_legendre(32).integrate(a, b, |x| self.eval(x) * weight(x))
    }
}

/// The radial Poisson hierarchy `−Δv_k = k v_{k−1}` on `Ω♯`, `v_0 ≡ 1`,
/// for `k = 1..=k_max`.
pub fn moment_sequence_ball(ctx: &SymmetrizationContext, k_max: u32) -> Result<Vec<BallMoment>> {
    if !(1..=10).contains(&k_max) {
        return domain(format!("k_max must lie in 1..=10, got {k_max}"));
    }
    let nf = ctx.nf();
    let n_i = ctx.n as i32;
    let p = ctx.rho_max();
    let inv_gamma2 = ctx.gamma_n.powi(-2);
    let mut prev = NodalPoly::on(p, |_| 1.0);
    let mut out = Vec::with_capacity(k_max as usize);
    for k in 1..=k_max {
        let kf = f64::from(k);
        // g(σ) = n σ^{1−n} ∫_0^σ k v_{k−1}(τ) n τ^{n−1} dτ
        let g = NodalPoly::on(p, |sig| {
            let inner = prev.integral(0.0, sig, |t| kf * nf * t.powi(n_i - 1));
            nf * sig.powi(1 - n_i) * inner
        });
        let v = NodalPoly::on(p, |rho| inv_gamma2 * g.integral(rho, p, |_| 1.0));
        let sup = inv_gamma2 * g.integral(0.0, p, |_| 1.0);
        let torsion = v.integral(0.0, p, |r| nf * r.powi(n_i - 1)) / ctx.avr;
        let grid: Vec<f64> = (0..=PROFILE_SAMPLES)
            .map(|j| ctx.omega_total * j as f64 / PROFILE_SAMPLES as f64)
            .collect();
        let mut values: Vec<f64> = grid
            .iter()
            .map(|&s| {
                if s >= ctx.omega_total {
                    0.0
                } else {
                    v.eval(s.powf(1.0 / nf))
                }
            })
            .collect();
        values[0] = sup;
        for j in 1..values.len() {
            values[j] = values[j].min(values[j - 1]).max(0.0);
        }
        out.push(BallMoment {
            k,
            profile: DecreasingProfile::linear(grid, values)?,
            torsion,
            sup,
        });
        prev = v;
    }
    Ok(out)
}

fn first_zero_for(n: u32) -> Result<f64> {
    bessel_first_zero(BesselOrder::for_dimension(n)?)
}

/// `λ₁(Ω♯) = j²_{n/2−1,1}(ω_n·AVR/|Ω|)^{2/n}`.
pub fn faber_krahn_bound(ctx: &SymmetrizationContext) -> Result<f64> {
    let j = first_zero_for(ctx.n)?;
    let omega = unit_ball_volume(ctx.n)?;
    Ok(j * j * (omega * ctx.avr / ctx.omega_total).powf(2.0 / ctx.nf()))
}

/// `2^{2/n}` times the Faber–Krahn bound.
pub fn second_eig_bound(ctx: &SymmetrizationContext) -> Result<f64> {
    Ok(2f64.powf(2.0 / ctx.nf()) * faber_krahn_bound(ctx)?)
}

/// Radius `j_{n/2−1,1}/√λ` of the ball `B_λ`.
pub fn b_lambda_radius(n: u32, lambda: f64) -> Result<f64> {
    if !(lambda > 0.0) || !lambda.is_finite() {
        return domain(format!("eigenvalue must be positive, got {lambda}"));
    }
    Ok(first_zero_for(n)? / lambda.sqrt())
}

/// Chiti's reverse Hölder constant `K(p, q, λ, n, AVR)`.
pub fn chiti_constant(p: f64, q: f64, lambda: f64, n: u32, avr: f64) -> Result<f64> {
    if !(p > 0.0) || !(q >= p) || !q.is_finite() {
        return domain(format!("need 0 < p <= q, got p={p}, q={q}"));
    }
    check_avr(avr)?;
    let radius = b_lambda_radius(n, lambda)?;
    if p == q {
        return Ok(1.0);
    }
    let j = first_zero_for(n)?;
    let nf = f64::from(n);
    let n_i = n as i32;
    let lam1 = j * j;
    let profile = |r: f64| -> f64 {
        ball_eigen_profile(n, lam1, r.min(1.0))
            .expect("radius within the unit ball")
            .max(0.0)
    };
    // In t = 1 − r the integrand behaves like t^e at the boundary.
    let rule = gauss_legendre(20);
    let moment = |e: f64| -> f64 {
        quadrature::geometric_composite(rule, 2f64.powi(-60), 1.0, |t| {
            let r = 1.0 - t;
            r.powi(n_i - 1) * profile(r).powf(e)
        })
    };
    let iq = moment(q);
    let ip = moment(p);
    let prefactor = (nf * unit_ball_volume(n)? * avr * radius.powi(n_i)).powf(1.0 / q - 1.0 / p);
    Ok(prefactor * iq.powf(1.0 / q) / ip.powf(1.0 / p))
}

/// `(AVR·ω_n)^{2/n}·T·|Ω|^{−(n+2)/n}`, bounded above by `1/(n(n+2))`.
pub fn saint_venant_normalized(t: f64, volume: f64, n: u32, avr: f64) -> Result<f64> {
    if !(t >= 0.0) || !(volume > 0.0) {
        return domain("torsional rigidity must be >= 0 and volume > 0");
    }
    check_avr(avr)?;
    let nf = f64::from(n);
    Ok((avr * unit_ball_volume(n)?).powf(2.0 / nf) * t * volume.powf(-(nf + 2.0) / nf))
}
