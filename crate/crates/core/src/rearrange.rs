//! Distribution functions, decreasing rearrangements, the AVR-weighted
//! Schwarz radius map, L^p norms, the Hardy–Littlewood gap and the
//! Hardy–Littlewood–Pólya dominance test.

use std::cmp::Ordering;
use std::fmt::Write as _;

use crate::error::{domain, Error, Result};
use crate::specialfn::unit_ball_volume;

/// A nonnegative measurable function sampled as cells `(value, measure)`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedSample {
    cells: Vec<(f64, f64)>,
    total_measure: f64,
}

impl WeightedSample {
    /// Rejects negative or non-finite values and non-positive measures.
    pub fn new(cells: Vec<(f64, f64)>) -> Result<Self> {
        if cells.is_empty() {
            return domain("a weighted sample needs at least one cell");
        }
        for (i, &(v, m)) in cells.iter().enumerate() {
            if !v.is_finite() || v < 0.0 {
                return domain(format!(
                    "cell {i}: value {v} is not a finite nonnegative number"
                ));
            }
            if !m.is_finite() || m <= 0.0 {
                return domain(format!("cell {i}: measure {m} is not positive"));
            }
        }
        let total_measure = cells.iter().map(|c| c.1).sum();
        Ok(Self {
            cells,
            total_measure,
        })
    }

    pub fn from_parts(values: &[f64], measures: &[f64]) -> Result<Self> {
        if values.len() != measures.len() {
            return Err(Error::Contract(format!(
                "{} values for {} measures",
                values.len(),
                measures.len()
            )));
        }
        Self::new(
            values
                .iter()
                .copied()
                .zip(measures.iter().copied())
                .collect(),
        )
    }

    /// Sample of `|h|`. Sign conventions of the caller are dropped here and
    /// nowhere else.
    pub fn absolute(values: &[f64], measures: &[f64]) -> Result<Self> {
        let abs: Vec<f64> = values.iter().map(|v| v.abs()).collect();
        Self::from_parts(&abs, measures)
    }

    pub fn cells(&self) -> &[(f64, f64)] {
        &self.cells
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn total_measure(&self) -> f64 {
        self.total_measure
    }

    pub fn max_value(&self) -> f64 {
        self.cells.iter().map(|c| c.0).fold(0.0, f64::max)
    }

    /// Cells by value descending; ties ordered by measure so the order (and
    /// every cumulative sum taken along it) does not depend on input order.
    fn sorted_cells(&self) -> Vec<(f64, f64)> {
        let mut sorted = self.cells.clone();
        sorted.sort_by(|a, b| match b.0.total_cmp(&a.0) {
            Ordering::Equal => a.1.total_cmp(&b.1),
            other => other,
        });
        sorted
    }

    /// `μ_h(t) = |{h > t}|`.
    pub fn distribution(&self, t: f64) -> f64 {
        let mut acc = 0.0;
        for (v, m) in self.sorted_cells() {
            if v <= t {
                break;
            }
            acc += m;
        }
        acc
    }

    /// Direct `(Σ v^p m)^{1/p}`.
    pub fn lp_norm(&self, p: f64) -> f64 {
        self.cells
            .iter()
            .map(|&(v, m)| v.powf(p) * m)
            .sum::<f64>()
            .powf(1.0 / p)
    }

    /// Step profile of `h*`: sort descending, merge equal values, accumulate measures.
    pub fn decreasing_rearrangement(&self) -> DecreasingProfile {
        let sorted = self.sorted_cells();
        let mut breakpoints = vec![0.0];
        let mut values: Vec<f64> = Vec::new();
        let mut acc = 0.0;
        for (i, &(v, m)) in sorted.iter().enumerate() {
            acc += m;
            let group_ends = sorted.get(i + 1).is_none_or(|next| next.0 != v);
            if group_ends {
                breakpoints.push(acc);
                values.push(v);
            }
        }
        DecreasingProfile {
            breakpoints,
            values,
            interpolation: Interpolation::Step,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Interpolation {
    /// Value `v_i` on `[s_{i−1}, s_i)`; one value per step.
    Step,
    /// Values at the breakpoints joined linearly; one value per breakpoint.
    Linear,
}

/// A nonincreasing, nonnegative function on `[0, total]`.
#[derive(Debug, Clone, PartialEq)]
pub struct DecreasingProfile {
    breakpoints: Vec<f64>,
    values: Vec<f64>,
    interpolation: Interpolation,
}

impl DecreasingProfile {
    fn validate(breakpoints: &[f64], values: &[f64]) -> Result<()> {
        if breakpoints.len() < 2 || breakpoints[0] != 0.0 {
            return domain("breakpoints must start at 0 and contain at least two points");
        }
        if breakpoints
            .windows(2)
            .any(|w| !(w[1] > w[0]) || !w[1].is_finite())
        {
            return domain("breakpoints must be finite and strictly increasing");
        }
        if values.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return domain("profile values must be finite and nonnegative");
        }
        if values.windows(2).any(|w| w[1] > w[0]) {
            return domain("profile values must be nonincreasing");
        }
        Ok(())
    }

    pub fn step(breakpoints: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if values.len() + 1 != breakpoints.len() {
            return domain("a step profile needs one value per step");
        }
        Self::validate(&breakpoints, &values)?;
        Ok(Self {
            breakpoints,
            values,
            interpolation: Interpolation::Step,
        })
    }

    pub fn linear(breakpoints: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if values.len() != breakpoints.len() {
            return domain("a linear profile needs one value per breakpoint");
        }
        Self::validate(&breakpoints, &values)?;
        Ok(Self {
            breakpoints,
            values,
            interpolation: Interpolation::Linear,
        })
    }

    pub fn constant(value: f64, total: f64) -> Result<Self> {
        Self::step(vec![0.0, total], vec![value])
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn interpolation(&self) -> Interpolation {
        self.interpolation
    }

    pub fn total(&self) -> f64 {
        *self.breakpoints.last().expect("validated nonempty")
    }

    /// Number of pieces (steps or linear segments).
    pub fn pieces(&self) -> usize {
        self.breakpoints.len() - 1
    }

    /// Value at `0`, the essential supremum.
    pub fn sup(&self) -> f64 {
        self.values[0]
    }

    /// Index of the piece containing `s` (right-continuous convention).
    fn piece_of(&self, s: f64) -> usize {
        let k = self.breakpoints.partition_point(|&b| b <= s);
        k.saturating_sub(1).min(self.pieces() - 1)
    }

    /// Right-continuous evaluation; `0` beyond the total, `h(0)` below zero.
    pub fn eval(&self, s: f64) -> f64 {
        if s > self.total() {
            return 0.0;
        }
        if s <= 0.0 {
            return self.values[0];
        }
        let i = self.piece_of(s);
        match self.interpolation {
            Interpolation::Step => self.values[i],
            Interpolation::Linear => {
                let (a, b) = (self.breakpoints[i], self.breakpoints[i + 1]);
                let t = ((s - a) / (b - a)).clamp(0.0, 1.0);
                self.values[i] + t * (self.values[i + 1] - self.values[i])
            }
        }
    }

    /// Left limit `h(s⁻)`; equals [`eval`](Self::eval) away from step breakpoints.
    pub fn eval_left(&self, s: f64) -> f64 {
        match self.interpolation {
            Interpolation::Linear => self.eval(s),
            Interpolation::Step => {
                if s <= 0.0 {
                    return self.values[0];
                }
                if s > self.total() {
                    return 0.0;
                }
                let k = self.breakpoints.partition_point(|&b| b < s);
                self.values[(k - 1).min(self.pieces() - 1)]
            }
        }
    }

    /// `|{s : h(s) > t}|`.
    pub fn distribution(&self, t: f64) -> f64 {
        match self.interpolation {
            Interpolation::Step => {
                let k = self.values.partition_point(|&v| v > t);
                self.breakpoints[k]
            }
            Interpolation::Linear => {
                let k = self.values.partition_point(|&v| v > t);
                if k == 0 {
                    return 0.0;
                }
                if k == self.values.len() {
                    return self.total();
                }
                let (a, b) = (self.breakpoints[k - 1], self.breakpoints[k]);
                let (va, vb) = (self.values[k - 1], self.values[k]);
                a + (b - a) * (va - t) / (va - vb)
            }
        }
    }

    /// `∫` of `h^p` over piece `i`, clipped to `[s_i, upto]`.
    fn piece_pow_integral(&self, i: usize, p: f64, upto: f64) -> f64 {
        let a = self.breakpoints[i];
        let b = self.breakpoints[i + 1].min(upto);
        if b <= a {
            return 0.0;
        }
        match self.interpolation {
            Interpolation::Step => self.values[i].powf(p) * (b - a),
            Interpolation::Linear => {
                let va = self.values[i];
                let vb = self.eval(b);
                linear_pow_integral(va, vb, b - a, p)
            }
        }
    }

    /// `∫_0^s h^p`.
    pub fn integral_pow_to(&self, p: f64, s: f64) -> f64 {
        let s = s.min(self.total());
        let mut acc = 0.0;
        for i in 0..self.pieces() {
            if self.breakpoints[i] >= s {
                break;
            }
            acc += self.piece_pow_integral(i, p, s);
        }
        acc
    }

    /// `∫_0^s h^p` at every own breakpoint.
    pub fn cumulative_pow(&self, p: f64) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.breakpoints.len());
        let mut acc = 0.0;
        out.push(0.0);
        for i in 0..self.pieces() {
            acc += self.piece_pow_integral(i, p, f64::INFINITY);
            out.push(acc);
        }
        out
    }

    /// `(∫_0^{total} h^p)^{1/p}`; exact for step and linear profiles.
    pub fn lp_norm(&self, p: f64) -> f64 {
        self.integral_pow_to(p, self.total()).powf(1.0 / p)
    }

    /// `c·h`.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        if !(c >= 0.0) {
            return domain("profiles can only be scaled by nonnegative factors");
        }
        Ok(Self {
            breakpoints: self.breakpoints.clone(),
            values: self.values.iter().map(|v| v * c).collect(),
            interpolation: self.interpolation,
        })
    }

    /// Step profile with neighbouring steps merged while their values stay
    /// within `tol` of the first (largest) value of the group, which the
    /// merged step keeps.
    pub fn merge_within(&self, tol: f64) -> Result<Self> {
        if self.interpolation == Interpolation::Linear {
            return Ok(self.clone());
        }
        let mut bps = vec![0.0];
        let mut vals: Vec<f64> = Vec::new();
        for i in 0..self.pieces() {
            let v = self.values[i];
            match vals.last() {
                Some(&top) if top - v <= tol => {
                    *bps.last_mut().expect("nonempty") = self.breakpoints[i + 1];
                }
                _ => {
                    vals.push(v);
                    bps.push(self.breakpoints[i + 1]);
                }
            }
        }
        Self::step(bps, vals)
    }

    /// Linear profile through the step values placed at the midpoints of
    /// their steps, flat before the first midpoint and after the last.
    ///
    /// For a step profile built from a cellwise field this is the
    /// collocated reading of the cell values; it turns the `O(h)` jump of
    /// the raw step function into an `O(h²)` interpolation error.
    pub fn midpoint_interpolant(&self) -> Result<Self> {
        if self.interpolation == Interpolation::Linear {
            return Ok(self.clone());
        }
        let total = self.total();
        let mut bps = vec![0.0];
        let mut vals = vec![self.values[0]];
        for i in 0..self.pieces() {
            let mid = 0.5 * (self.breakpoints[i] + self.breakpoints[i + 1]);
            if mid > *bps.last().expect("nonempty") {
                bps.push(mid);
                vals.push(self.values[i]);
            }
        }
        if total > *bps.last().expect("nonempty") {
            bps.push(total);
            vals.push(*self.values.last().expect("nonempty"));
        }
        Self::linear(bps, vals)
    }

    /// Two-column CSV `s,value` at the breakpoints.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("s,value\n");
        for &s in &self.breakpoints {
            let _ = writeln!(out, "{s},{}", self.eval(s));
        }
        out
    }
}

/// `∫_0^w (va + (vb − va) t/w)^p dt`.
fn linear_pow_integral(va: f64, vb: f64, w: f64, p: f64) -> f64 {
    let d = vb - va;
    let scale = va.abs().max(vb.abs());
    if scale == 0.0 {
        return 0.0;
    }
    if d.abs() <= 1e-6 * scale {
        // Nearly constant: a short Gauss rule is exact to rounding here.
        let rule = crate::quadrature::gauss_legendre(10);
        return rule.integrate(0.0, w, |t| (va + d * t / w).max(0.0).powf(p));
    }
    w * (vb.powf(p + 1.0) - va.powf(p + 1.0)) / ((p + 1.0) * d)
}

/// Radius `r` with `avr·ω_n·rⁿ = s`; composing `h*` with its inverse gives `h♯`.
pub fn schwarz_radius_map(s: f64, avr: f64, n: u32) -> Result<f64> {
    check_avr(avr)?;
    if n < 2 {
        return domain(format!("dimension must be >= 2, got {n}"));
    }
    if !(s >= 0.0) {
        return domain(format!("measure must be nonnegative, got {s}"));
    }
    Ok((s / (avr * unit_ball_volume(n)?)).powf(1.0 / f64::from(n)))
}

/// `h♯(r) = h*(avr·|B(r)|)`.
pub fn schwarz_value(profile: &DecreasingProfile, avr: f64, n: u32, r: f64) -> Result<f64> {
    check_avr(avr)?;
    if !(r >= 0.0) {
        return domain("radius must be nonnegative");
    }
    Ok(profile.eval(avr * unit_ball_volume(n)? * r.powi(n as i32)))
}

pub(crate) fn check_avr(avr: f64) -> Result<()> {
    if !(avr > 0.0 && avr <= 1.0) {
        return domain(format!(
            "asymptotic volume ratio must lie in (0, 1], got {avr}"
        ));
    }
    Ok(())
}

/// Union of two sorted breakpoint lists, clipped to `[0, end]`.
fn merged_breakpoints(a: &[f64], b: &[f64], end: f64) -> Vec<f64> {
    let mut all: Vec<f64> = a.iter().chain(b).copied().filter(|&s| s <= end).collect();
    all.push(end);
    all.sort_by(f64::total_cmp);
    all.dedup();
    all
}

/// `∫_0^{min total} a(s) b(s) ds` for two step profiles.
fn step_product_integral(a: &DecreasingProfile, b: &DecreasingProfile) -> f64 {
    let end = a.total().min(b.total());
    let grid = merged_breakpoints(a.breakpoints(), b.breakpoints(), end);
    grid.windows(2)
        .map(|w| a.eval(w[0]) * b.eval(w[0]) * (w[1] - w[0]))
        .sum()
}

fn aligned(h: &WeightedSample, w: &WeightedSample) -> Result<()> {
    if h.len() != w.len() {
        return Err(Error::Contract(format!(
            "samples have {} and {} cells",
            h.len(),
            w.len()
        )));
    }
    for (i, (a, b)) in h.cells().iter().zip(w.cells()).enumerate() {
        if (a.1 - b.1).abs() > 1e-12 * a.1.max(b.1) {
            return Err(Error::Contract(format!(
                "cell {i}: measures {} and {} differ",
                a.1, b.1
            )));
        }
    }
    Ok(())
}

/// `∫ h* w* − ∫ |h w|`, nonnegative up to rounding.
pub fn hardy_littlewood_gap(h: &WeightedSample, w: &WeightedSample) -> Result<f64> {
    aligned(h, w)?;
    let direct: f64 = h
        .cells()
        .iter()
        .zip(w.cells())
        .map(|(a, b)| a.0 * b.0 * a.1)
        .sum();
    let rearranged =
        step_product_integral(&h.decreasing_rearrangement(), &w.decreasing_rearrangement());
    Ok(rearranged - direct)
}

/// Hardy–Littlewood–Pólya dominance between two decreasing profiles.
///
/// Returns whether `∫_0^s f^p ≤ ∫_0^s g^p` holds at every breakpoint of
/// either profile (with a `1e−12` allowance scaled by the magnitude of the
/// integrals), together with `∫ g^q − ∫ f^q`. When the premise holds the gap
/// is nonnegative for every `q ≥ p`.
pub fn hlp_dominance(
    f: &DecreasingProfile,
    g: &DecreasingProfile,
    p: f64,
    q: f64,
) -> Result<(bool, f64)> {
    if !(p > 0.0) || !(q >= p) {
        return domain(format!("need 0 < p <= q, got p={p}, q={q}"));
    }
    let (rf, rg) = (f.total(), g.total());
    if (rf - rg).abs() > 1e-12 * rf.max(rg) {
        return Err(Error::Contract(format!(
            "profiles live on [0, {rf}] and [0, {rg}]"
        )));
    }
    let end = rf.min(rg);
    let grid = merged_breakpoints(f.breakpoints(), g.breakpoints(), end);
    let premise = grid.iter().all(|&s| {
        let lf = f.integral_pow_to(p, s);
        let lg = g.integral_pow_to(p, s);
        lf <= lg + 1e-12 * (1.0 + lg.abs())
    });
    let gap = g.integral_pow_to(q, end) - f.integral_pow_to(q, end);
    Ok((premise, gap))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn sample(cells: &[(f64, f64)]) -> WeightedSample {
        WeightedSample::new(cells.to_vec()).unwrap()
    }

    #[test]
    fn distribution_examples() {
        assert_eq!(sample(&[(1.0, 2.5)]).distribution(0.5), 2.5);
        let h = sample(&[(3.0, 1.0), (1.0, 2.0), (2.0, 1.0)]);
        assert_eq!(h.distribution(1.5), 2.0);
        assert_eq!(h.distribution(3.0), 0.0);
        assert_eq!(h.distribution(10.0), 0.0);
        assert_eq!(h.distribution(0.0), 4.0);
    }

    #[test]
    fn rearrangement_examples() {
        let p = sample(&[(3.0, 1.0), (1.0, 2.0), (2.0, 1.0)]).decreasing_rearrangement();
        assert_eq!(p.breakpoints(), &[0.0, 1.0, 2.0, 4.0]);
        assert_eq!(p.values(), &[3.0, 2.0, 1.0]);
        assert_eq!(p.eval(0.0), 3.0);
        assert_eq!(p.eval(1.0), 2.0);
        assert_eq!(p.eval_left(1.0), 3.0);
        assert_eq!(p.eval(4.0), 1.0);

        let c = sample(&[(2.0, 0.75)]).decreasing_rearrangement();
        assert_eq!(c.breakpoints(), &[0.0, 0.75]);
        assert_eq!(c.values(), &[2.0]);

        let z = sample(&[(0.0, 2.0), (5.0, 1.0)]).decreasing_rearrangement();
        assert_eq!(z.breakpoints(), &[0.0, 1.0, 3.0]);
        assert_eq!(z.values(), &[5.0, 0.0]);
    }

    #[test]
    fn ties_are_merged_and_order_independent() {
        let a = sample(&[(1.0, 0.1), (1.0, 0.2), (2.0, 0.3), (1.0, 0.7)]);
        let b = sample(&[(1.0, 0.7), (2.0, 0.3), (1.0, 0.2), (1.0, 0.1)]);
        let pa = a.decreasing_rearrangement();
        assert_eq!(pa.values(), &[2.0, 1.0]);
        assert_eq!(pa, b.decreasing_rearrangement());
    }

    #[test]
    fn rejects_bad_cells() {
        assert!(WeightedSample::new(vec![(-1.0, 1.0)]).is_err());
        assert!(WeightedSample::new(vec![(1.0, 0.0)]).is_err());
        assert!(WeightedSample::new(vec![]).is_err());
        assert!(WeightedSample::from_parts(&[1.0], &[1.0, 2.0]).is_err());
        let abs = WeightedSample::absolute(&[-2.0, 1.0], &[1.0, 1.0]).unwrap();
        assert_eq!(abs.cells()[0].0, 2.0);
    }

    #[test]
    fn schwarz_radius_examples() {
        assert_eq!(schwarz_radius_map(0.0, 0.3, 2).unwrap(), 0.0);
        assert_relative_eq!(
            schwarz_radius_map(PI, 1.0, 2).unwrap(),
            1.0,
            max_relative = 1e-15
        );
        assert_relative_eq!(
            schwarz_radius_map(PI, 0.25, 2).unwrap(),
            2.0,
            max_relative = 1e-15
        );
        assert!(schwarz_radius_map(1.0, 1.5, 2).is_err());
        assert!(schwarz_radius_map(1.0, 0.0, 2).is_err());
    }

    #[test]
    fn schwarz_value_reads_the_profile_radially() {
        let p = sample(&[(3.0, PI), (1.0, 3.0 * PI)]).decreasing_rearrangement();
        // avr = 1, n = 2: the first step covers the unit disk
        assert_eq!(schwarz_value(&p, 1.0, 2, 0.5).unwrap(), 3.0);
        assert_eq!(schwarz_value(&p, 1.0, 2, 1.5).unwrap(), 1.0);
        assert_eq!(schwarz_value(&p, 1.0, 2, 2.5).unwrap(), 0.0);
    }

    #[test]
    fn lp_norm_examples() {
        let c = DecreasingProfile::constant(2.0, 3.0).unwrap();
        assert_relative_eq!(c.lp_norm(1.0), 6.0);
        let h = sample(&[(2.0, 0.5), (1.0, 1.5)]);
        assert_relative_eq!(
            h.decreasing_rearrangement().lp_norm(2.0),
            3.5f64.sqrt(),
            max_relative = 1e-15
        );
        assert_relative_eq!(h.lp_norm(2.0), 3.5f64.sqrt(), max_relative = 1e-15);
    }

    #[test]
    fn linear_profile_integrals() {
        // h(s) = 1 - s on [0,1]: ∫ h^2 = 1/3, ∫ h^0.5 = 2/3
        let h = DecreasingProfile::linear(vec![0.0, 1.0], vec![1.0, 0.0]).unwrap();
        assert_relative_eq!(h.integral_pow_to(2.0, 1.0), 1.0 / 3.0, max_relative = 1e-14);
        assert_relative_eq!(h.integral_pow_to(0.5, 1.0), 2.0 / 3.0, max_relative = 1e-14);
        assert_relative_eq!(h.integral_pow_to(1.0, 0.5), 0.375, max_relative = 1e-14);
        assert_relative_eq!(h.distribution(0.25), 0.75, max_relative = 1e-14);
        let flat = DecreasingProfile::linear(vec![0.0, 2.0], vec![1.5, 1.5]).unwrap();
        assert_relative_eq!(
            flat.integral_pow_to(3.0, 2.0),
            2.0 * 1.5f64.powi(3),
            max_relative = 1e-14
        );
    }

    #[test]
    fn profile_validation() {
        assert!(DecreasingProfile::step(vec![0.0, 1.0], vec![1.0, 2.0]).is_err());
        assert!(DecreasingProfile::step(vec![0.0, 1.0, 2.0], vec![1.0, 2.0]).is_err());
        assert!(DecreasingProfile::step(vec![0.0, 1.0, 1.0], vec![2.0, 1.0]).is_err());
        assert!(DecreasingProfile::linear(vec![0.0, 1.0], vec![1.0, -0.1]).is_err());
        assert!(DecreasingProfile::constant(1.0, 0.0).is_err());
    }

    #[test]
    fn midpoint_interpolant_of_a_staircase() {
        let p = DecreasingProfile::step(vec![0.0, 1.0, 3.0], vec![4.0, 2.0]).unwrap();
        let m = p.midpoint_interpolant().unwrap();
        assert_eq!(m.breakpoints(), &[0.0, 0.5, 2.0, 3.0]);
        assert_eq!(m.values(), &[4.0, 4.0, 2.0, 2.0]);
        assert_relative_eq!(m.eval(1.25), 3.0);
    }

    #[test]
    fn merging_near_ties() {
        let p =
            DecreasingProfile::step(vec![0.0, 1.0, 2.0, 3.0], vec![2.0, 2.0 - 1e-14, 1.0]).unwrap();
        let m = p.merge_within(1e-12).unwrap();
        assert_eq!(m.breakpoints(), &[0.0, 2.0, 3.0]);
        assert_eq!(m.values(), &[2.0, 1.0]);
        assert_eq!(p.merge_within(0.0).unwrap(), p);
    }

    #[test]
    fn hardy_littlewood_examples() {
        let h = sample(&[(3.0, 1.0), (1.0, 2.0), (2.0, 1.0)]);
        assert!(hardy_littlewood_gap(&h, &h).unwrap().abs() < 1e-12);
        let a = sample(&[(1.0, 1.0), (0.0, 1.0)]);
        let b = sample(&[(0.0, 1.0), (1.0, 1.0)]);
        assert_relative_eq!(hardy_littlewood_gap(&a, &b).unwrap(), 1.0);
        let c = sample(&[(2.0, 1.0), (2.0, 2.0), (2.0, 1.0)]);
        assert!(hardy_littlewood_gap(&c, &h).unwrap().abs() < 1e-12);
        let misaligned = sample(&[(1.0, 1.0), (1.0, 3.0)]);
        assert!(matches!(
            hardy_littlewood_gap(&a, &misaligned),
            Err(Error::Contract(_))
        ));
    }

    #[test]
    fn hlp_examples() {
        let f = DecreasingProfile::step(vec![0.0, 1.0, 2.0], vec![2.0, 0.5]).unwrap();
        let (ok, gap) = hlp_dominance(&f, &f, 1.0, 3.0).unwrap();
        assert!(ok);
        assert_eq!(gap, 0.0);

        let g = DecreasingProfile::step(vec![0.0, 0.5, 2.0], vec![3.0, 1.0]).unwrap();
        let (ok, gap) = hlp_dominance(&f, &g, 1.0, 2.0).unwrap();
        assert!(ok);
        assert!(gap >= 0.0);

        let f = DecreasingProfile::step(vec![0.0, 1.0, 2.0], vec![2.0, 0.0]).unwrap();
        let g = DecreasingProfile::constant(2f64.sqrt(), 2.0).unwrap();
        let (ok, gap) = hlp_dominance(&f, &g, 2.0, 4.0).unwrap();
        assert!(!ok);
        assert_relative_eq!(gap, 8.0 - 16.0, max_relative = 1e-14);

        let short = DecreasingProfile::constant(1.0, 1.0).unwrap();
        assert!(matches!(
            hlp_dominance(&f, &short, 1.0, 2.0),
            Err(Error::Contract(_))
        ));
        assert!(hlp_dominance(&f, &g, 2.0, 1.0).is_err());
    }

    #[test]
    fn profile_csv() {
        let p = sample(&[(3.0, 1.0), (1.0, 2.0)]).decreasing_rearrangement();
        assert_eq!(p.to_csv(), "s,value\n0,3\n1,1\n3,1\n");
    }
}
