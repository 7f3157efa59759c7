//! Dirichlet Poisson solves, the two lowest eigenpairs and the discrete
//! moment hierarchy, all on a [`Mesh`].
//!
//! The linear solver is Jacobi-preconditioned conjugate gradients with a
//! fixed loop order, so results are bitwise reproducible.

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{domain, Error, Result};
use crate::geometry::{Coordinates, Mesh};
use crate::rearrange::WeightedSample;

/// Relative residual target of the CG solves.
pub const CG_TOL: f64 = 1e-10;
/// Outer iteration cap of the eigensolver.
pub const MAX_OUTER: usize = 500;

/// Values on the unknowns of a mesh; boundary nodes are implicitly zero.
#[derive(Debug, Clone)]
pub struct Field<'m> {
    mesh: &'m Mesh,
    values: Vec<f64>,
}

impl<'m> Field<'m> {
    pub fn new(mesh: &'m Mesh, values: Vec<f64>) -> Result<Self> {
        if values.len() != mesh.cells() {
            return Err(Error::Contract(format!(
                "{} values for {} unknowns",
                values.len(),
                mesh.cells()
            )));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return domain(format!("field value {v} is not finite"));
        }
        Ok(Self { mesh, values })
    }

    /// Restriction of per-node values to the unknowns.
    pub fn from_nodes(mesh: &'m Mesh, node_values: &[f64]) -> Result<Self> {
        if node_values.len() != mesh.node_count() {
            return Err(Error::Contract(format!(
                "{} node values for {} nodes",
                node_values.len(),
                mesh.node_count()
            )));
        }
        let vals = mesh
            .interior_nodes()
            .iter()
            .map(|&k| node_values[k])
            .collect();
        Self::new(mesh, vals)
    }

    pub fn zeros(mesh: &'m Mesh) -> Self {
        Self {
            mesh,
            values: vec![0.0; mesh.cells()],
        }
    }

    pub fn mesh(&self) -> &'m Mesh {
        self.mesh
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Values on all nodes, zero on the boundary.
    pub fn node_values(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.mesh.node_count()];
        for (&k, &v) in self.mesh.interior_nodes().iter().zip(&self.values) {
            out[k] = v;
        }
        out
    }

    pub fn max(&self) -> f64 {
        self.values
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// `∫ u dμ` with the lumped mass.
    pub fn integral(&self) -> f64 {
        self.values
            .iter()
            .zip(self.mesh.mass())
            .map(|(v, m)| v * m)
            .sum()
    }

    /// CSV `index,x,y,value` (or `index,r,theta,value` on polar meshes).
    pub fn to_csv(&self) -> String {
        let header = match self.mesh.coordinates() {
            Coordinates::Cartesian => "index,x,y,value",
            Coordinates::Polar | Coordinates::Radial => "index,r,theta,value",
        };
        let mut out = format!("{header}\n");
        for (i, (&k, &v)) in self
            .mesh
            .interior_nodes()
            .iter()
            .zip(&self.values)
            .enumerate()
        {
            let [a, b] = self.mesh.point(k);
            let _ = writeln!(out, "{i},{a},{b},{v}");
        }
        out
    }
}

/// `(value, measure)` for every unknown.
pub fn field_to_sample(field: &Field) -> Result<WeightedSample> {
    if let Some(v) = field.values.iter().find(|&&v| v < 0.0) {
        return domain(format!(
            "field has negative value {v}; take the absolute value first"
        ));
    }
    WeightedSample::from_parts(&field.values, field.mesh.mass())
}

/// `(value, measure)` for every node, boundary zeros included, so the
/// measures add up to the full volume.
pub fn field_to_node_sample(field: &Field) -> Result<WeightedSample> {
    if let Some(v) = field.values.iter().find(|&&v| v < 0.0) {
        return domain(format!(
            "field has negative value {v}; take the absolute value first"
        ));
    }
    WeightedSample::from_parts(&field.node_values(), field.mesh.node_measures())
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `(A − σM) x`.
fn apply_shifted(mesh: &Mesh, shift: f64, x: &[f64], y: &mut [f64]) {
    mesh.apply(x, y);
    if shift != 0.0 {
        for ((yi, xi), mi) in y.iter_mut().zip(x).zip(mesh.mass()) {
            *yi -= shift * mi * xi;
        }
    }
}

/// Preconditioned CG for `(A − σM) x = b` from the initial guess `x`.
fn cg(mesh: &Mesh, shift: f64, b: &[f64], x: &mut [f64]) -> Result<usize> {
    let m = mesh.cells();
    let inv_diag: Vec<f64> = mesh
        .diag()
        .iter()
        .zip(mesh.mass())
        .map(|(d, w)| 1.0 / (d - shift * w))
        .collect();
    if inv_diag.iter().any(|v| !(*v > 0.0)) {
        return Err(Error::Solver(
            "shifted operator lost its positive diagonal".into(),
        ));
    }
    let b_norm = dot(b, b).sqrt();
    if b_norm == 0.0 {
        x.fill(0.0);
        return Ok(0);
    }
    let target = CG_TOL * b_norm;
    let mut r = vec![0.0; m];
    apply_shifted(mesh, shift, x, &mut r);
    for (ri, bi) in r.iter_mut().zip(b) {
        *ri = bi - *ri;
    }
    let mut z: Vec<f64> = r.iter().zip(&inv_diag).map(|(a, d)| a * d).collect();
    let mut p = z.clone();
    let mut q = vec![0.0; m];
    let mut rz = dot(&r, &z);
    let max_iter = 10 * m;
    for it in 0..=max_iter {
        if dot(&r, &r).sqrt() <= target {
            return Ok(it);
        }
        apply_shifted(mesh, shift, &p, &mut q);
        let pq = dot(&p, &q);
        if !(pq > 0.0) {
            return Err(Error::Solver(format!(
                "CG breakdown at iteration {it} (pᵀAp = {pq})"
            )));
        }
        let alpha = rz / pq;
        for i in 0..m {
            x[i] += alpha * p[i];
            r[i] -= alpha * q[i];
        }
        for i in 0..m {
            z[i] = r[i] * inv_diag[i];
        }
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..m {
            p[i] = z[i] + beta * p[i];
        }
    }
    Err(Error::Solver(format!(
        "CG did not reach relative residual {CG_TOL} in {max_iter} iterations"
    )))
}

/// Solves `−Δu = f`, `u = 0` on the boundary: `A u = M f`.
pub fn poisson_solve<'m>(mesh: &'m Mesh, source: &Field) -> Result<Field<'m>> {
    if source.values.len() != mesh.cells() {
        return Err(Error::Contract("source lives on a different mesh".into()));
    }
    let b: Vec<f64> = source
        .values
        .iter()
        .zip(mesh.mass())
        .map(|(f, m)| f * m)
        .collect();
    let mut u = vec![0.0; mesh.cells()];
    cg(mesh, 0.0, &b, &mut u)?;
    Field::new(mesh, u)
}

#[derive(Debug, Clone)]
pub struct EigenPair<'m> {
    pub lambda: f64,
    /// `M`-normalized, first nonzero component positive.
    pub field: Field<'m>,
    pub iterations: usize,
}

fn m_dot(mesh: &Mesh, a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .zip(mesh.mass())
        .map(|((x, y), m)| x * y * m)
        .sum()
}

fn m_normalize(mesh: &Mesh, x: &mut [f64]) {
    let n = m_dot(mesh, x, x).sqrt();
    x.iter_mut().for_each(|v| *v /= n);
}

fn rayleigh(mesh: &Mesh, x: &[f64], ax: &mut [f64]) -> f64 {
    mesh.apply(x, ax);
    dot(x, ax) / m_dot(mesh, x, x)
}

/// Relative residual `‖Ax − λMx‖ / (λ‖Mx‖)`.
pub fn eigen_residual(mesh: &Mesh, lambda: f64, x: &[f64]) -> f64 {
    let mut ax = vec![0.0; x.len()];
    mesh.apply(x, &mut ax);
    let mut num = 0.0;
    let mut den = 0.0;
    for ((a, xi), m) in ax.iter().zip(x).zip(mesh.mass()) {
        num += (a - lambda * m * xi).powi(2);
        den += (m * xi).powi(2);
    }
    num.sqrt() / (lambda * den.sqrt())
}

/// Inverse iteration with a lagging shift, optionally kept `M`-orthogonal to `deflate`.
fn inverse_iteration<'m>(
    mesh: &'m Mesh,
    mut x: Vec<f64>,
    deflate: Option<(&[f64], f64)>,
) -> Result<EigenPair<'m>> {
    let project = |x: &mut [f64]| {
        if let Some((u, _)) = deflate {
            let c = m_dot(mesh, x, u);
            x.iter_mut().zip(u).for_each(|(xi, ui)| *xi -= c * ui);
        }
    };
    project(&mut x);
    m_normalize(mesh, &mut x);
    let mut ax = vec![0.0; x.len()];
    let mut lambda = rayleigh(mesh, &x, &mut ax);
    let mut shift = 0.0;
    let cap = deflate.map_or(f64::INFINITY, |(_, l1)| 0.9 * l1);
    for it in 1..=MAX_OUTER {
        let rhs: Vec<f64> = x.iter().zip(mesh.mass()).map(|(v, m)| v * m).collect();
        let mut y: Vec<f64> = x.iter().map(|v| v / (lambda - shift)).collect();
        cg(mesh, shift, &rhs, &mut y)?;
        project(&mut y);
        m_normalize(mesh, &mut y);
        x = y;
        let next = rayleigh(mesh, &x, &mut ax);
        let change = (next - lambda).abs();
        lambda = next;
        if change <= 1e-10 * lambda && eigen_residual(mesh, lambda, &x) <= 1e-8 {
            let lead = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            if let Some(first) = x.iter().find(|v| v.abs() > 1e-12 * lead) {
                if *first < 0.0 {
                    x.iter_mut().for_each(|v| *v = -*v);
                }
            }
            return Ok(EigenPair {
                lambda,
                field: Field::new(mesh, x)?,
                iterations: it,
            });
        }
        if change < 1e-2 * lambda {
            shift = (0.5 * lambda).min(cap);
        }
    }
    Err(Error::Solver(format!(
        "inverse iteration did not converge in {MAX_OUTER} outer iterations"
    )))
}

/// Seed of the fixed starting vector for the second eigenpair.
const SECOND_START_SEED: u64 = 0x0e_19e2;

/// The `count ∈ {1, 2}` smallest Dirichlet eigenpairs, ascending.
pub fn smallest_eigenpairs(mesh: &Mesh, count: usize) -> Result<Vec<EigenPair<'_>>> {
    if !(1..=2).contains(&count) {
        return domain(format!("eigenpair count must be 1 or 2, got {count}"));
    }
    let m = mesh.cells();
    let first = inverse_iteration(mesh, vec![1.0; m], None)?;
    let mut out = vec![first];
    if count == 2 {
        if m < 2 {
            return Err(Error::Solver(
                "a second eigenpair needs at least two unknowns".into(),
            ));
        }
        // A fixed pseudo-random start: a symmetric start vector would be
        // orthogonal to the antisymmetric modes that carry λ₂ on symmetric domains.
        let mut rng = ChaCha8Rng::seed_from_u64(SECOND_START_SEED);
        let start: Vec<f64> = (0..m).map(|_| rng.gen::<f64>() - 0.5).collect();
        let l1 = out[0].lambda;
        let second = inverse_iteration(mesh, start, Some((out[0].field.values(), l1)))?;
        if !(second.lambda > l1 * (1.0 + 1e-8)) {
            return Err(Error::Solver(format!(
                "first eigenvalue is not simple: λ₁ = {l1}, λ₂ = {}",
                second.lambda
            )));
        }
        out.push(second);
    }
    Ok(out)
}

/// One row `(u_k, T_k, J_k)` of the discrete moment hierarchy.
#[derive(Debug, Clone)]
pub struct MomentLevel<'m> {
    pub k: u32,
    pub field: Field<'m>,
    pub torsion: f64,
    pub sup: f64,
}

/// `u_0 ≡ 1`, `−Δu_k = k u_{k−1}`; rows `k = 0..=k_max`.
///
/// `T_k` integrates over all nodes, so the `k = 0` row carries the full volume.
pub fn moment_hierarchy(mesh: &Mesh, k_max: u32) -> Result<Vec<MomentLevel<'_>>> {
    if k_max > 10 {
        return domain(format!("k_max must be at most 10, got {k_max}"));
    }
    let ones = Field::new(mesh, vec![1.0; mesh.cells()])?;
    let mut out = vec![MomentLevel {
        k: 0,
        field: ones,
        torsion: mesh.volume(),
        sup: 1.0,
    }];
    for k in 1..=k_max {
        let prev = &out[k as usize - 1].field;
        let src = Field::new(
            mesh,
            prev.values().iter().map(|v| f64::from(k) * v).collect(),
        )?;
        let u = poisson_solve(mesh, &src)?;
        out.push(MomentLevel {
            k,
            torsion: u.integral(),
            sup: u.max(),
            field: u,
        });
    }
    Ok(out)
}
