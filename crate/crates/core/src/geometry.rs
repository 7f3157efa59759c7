//! Test geometries and their discrete Dirichlet Laplacians.
//!
//! All meshes are vertex centred: unknowns live on grid nodes, each node
//! owns the dual cell around it, and the stiffness weights are the fluxes
//! through the dual cell faces. Nodes on the boundary carry a measure (the
//! part of their dual cell inside the domain) but no unknown.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::specialfn::unit_ball_volume;

/// Smallest accepted resolution per axis.
pub const MIN_RESOLUTION: usize = 8;

/// Shapes for the masked Cartesian grid, all centred at the origin.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum MaskShape {
    Rectangle {
        width: f64,
        height: f64,
    },
    /// Cells whose centre lies inside the ellipse with these semi-axes.
    Ellipse {
        a: f64,
        b: f64,
    },
    /// The square of side `size` minus its upper-right quadrant.
    LShape {
        size: f64,
    },
    /// Rows listed top to bottom, `#` inside and `.` outside; upsampled to
    /// the grid resolution.
    Explicit {
        width: f64,
        height: f64,
        rows: Vec<String>,
    },
}

fn full_turn() -> f64 {
    2.0 * PI
}

/// A domain without its resolution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Geometry {
    EuclidMask {
        shape: MaskShape,
    },
    EuclidPolar {
        #[serde(default)]
        r_min: f64,
        r_max: f64,
        #[serde(default = "full_turn")]
        theta_span: f64,
    },
    /// Flat cone `dr² + (αr)²dθ²`, θ of period 2π, kept away from the apex.
    ConePolar {
        alpha: f64,
        r_min: f64,
        r_max: f64,
        #[serde(default = "full_turn")]
        theta_span: f64,
    },
    /// Rotationally symmetric problems on a cone ball or annulus, reduced to `r`.
    ConeRadial {
        alpha: f64,
        #[serde(default)]
        r_min: f64,
        r_max: f64,
    },
}

impl Geometry {
    pub fn unit_square() -> Self {
        Geometry::EuclidMask {
            shape: MaskShape::Rectangle {
                width: 1.0,
                height: 1.0,
            },
        }
    }

    pub fn unit_disk() -> Self {
        Geometry::EuclidPolar {
            r_min: 0.0,
            r_max: 1.0,
            theta_span: full_turn(),
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Geometry::EuclidMask { .. } => "euclid_mask",
            Geometry::EuclidPolar { .. } => "euclid_polar",
            Geometry::ConePolar { .. } => "cone_polar",
            Geometry::ConeRadial { .. } => "cone_radial",
        }
    }

    pub fn avr(&self) -> f64 {
        match self {
            Geometry::ConePolar { alpha, .. } | Geometry::ConeRadial { alpha, .. } => *alpha,
            _ => 1.0,
        }
    }

    pub fn at(&self, resolution: usize) -> DomainSpec {
        DomainSpec {
            geometry: self.clone(),
            resolution,
        }
    }
}

/// A geometry at a given resolution (cells across the width or radius).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DomainSpec {
    pub geometry: Geometry,
    pub resolution: usize,
}

/// How node coordinates are to be read.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Coordinates {
    Cartesian,
    Polar,
    Radial,
}

/// A discretized domain with its lumped mass and stiffness matrix.
#[derive(Debug, Clone)]
pub struct Mesh {
    spec: DomainSpec,
    n: u32,
    avr: f64,
    coordinates: Coordinates,
    spacing: f64,
    volume: f64,
    boundary_length: Option<f64>,
    points: Vec<[f64; 2]>,
    measures: Vec<f64>,
    unknown_of: Vec<Option<usize>>,
    interior: Vec<usize>,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    weights: Vec<f64>,
    boundary_weights: Vec<f64>,
    diag: Vec<f64>,
    mass: Vec<f64>,
}

/// Mesh statistics exported alongside reports.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MeshStats {
    pub kind: &'static str,
    pub resolution: usize,
    pub volume: f64,
    pub avr: f64,
    pub n: u32,
    pub cells: usize,
    pub boundary_length: Option<f64>,
    pub isoperimetric_slack: Option<f64>,
}

impl Mesh {
    pub fn spec(&self) -> &DomainSpec {
        &self.spec
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn avr(&self) -> f64 {
        self.avr
    }

    pub fn coordinates(&self) -> Coordinates {
        self.coordinates
    }

    /// Characteristic mesh width (grid step or radial step).
    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn volume(&self) -> f64 {
        self.volume
    }

    pub fn boundary_length(&self) -> Option<f64> {
        self.boundary_length
    }

    /// Number of unknowns.
    pub fn cells(&self) -> usize {
        self.interior.len()
    }

    /// Number of nodes, boundary nodes included.
    pub fn node_count(&self) -> usize {
        self.points.len()
    }

    /// Native coordinates of node `k`: `(x, y)`, `(r, θ)` or `(r, 0)`.
    pub fn point(&self, k: usize) -> [f64; 2] {
        self.points[k]
    }

    /// Position of node `k` in the parameter plane, `(r cos θ, r sin θ)` for polar kinds.
    pub fn planar_point(&self, k: usize) -> [f64; 2] {
        let [a, b] = self.points[k];
        match self.coordinates {
            Coordinates::Polar => [a * b.cos(), a * b.sin()],
            _ => [a, b],
        }
    }

    /// Distance to the origin (the apex or the disk centre).
    pub fn radius(&self, k: usize) -> f64 {
        let [a, b] = self.points[k];
        match self.coordinates {
            Coordinates::Cartesian => a.hypot(b),
            _ => a,
        }
    }

    /// Dual-cell measures of all nodes; they sum to the volume.
    pub fn node_measures(&self) -> &[f64] {
        &self.measures
    }

    /// Unknown index of node `k`, if it is interior.
    pub fn unknown_of(&self, k: usize) -> Option<usize> {
        self.unknown_of[k]
    }

    /// Node index of each unknown.
    pub fn interior_nodes(&self) -> &[usize] {
        &self.interior
    }

    /// Lumped mass of each unknown.
    pub fn mass(&self) -> &[f64] {
        &self.mass
    }

    pub fn diag(&self) -> &[f64] {
        &self.diag
    }

    /// Off-diagonal `(column, weight)` entries of row `i`, ascending in column.
    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        self.cols[r.clone()]
            .iter()
            .copied()
            .zip(self.weights[r].iter().copied())
    }

    /// Total weight of the edges from unknown `i` to boundary nodes.
    pub fn boundary_weight(&self, i: usize) -> f64 {
        self.boundary_weights[i]
    }

    /// `y = A x` for the stiffness matrix.
    pub fn apply(&self, x: &[f64], y: &mut [f64]) {
        for i in 0..self.cells() {
            let mut acc = self.diag[i] * x[i];
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                acc -= self.weights[k] * x[self.cols[k]];
            }
            y[i] = acc;
        }
    }

    pub fn stats(&self) -> MeshStats {
        MeshStats {
            kind: self.spec.geometry.kind(),
            resolution: self.spec.resolution,
            volume: self.volume,
            avr: self.avr,
            n: self.n,
            cells: self.cells(),
            boundary_length: self.boundary_length,
            isoperimetric_slack: isoperimetric_slack(self).ok(),
        }
    }
}

/// Node list and edge list, assembled into CSR form at the end.
struct Assembly {
    points: Vec<[f64; 2]>,
    measures: Vec<f64>,
    interior: Vec<bool>,
    edges: Vec<(usize, usize, f64)>,
}

impl Assembly {
    fn new() -> Self {
        Self {
            points: Vec::new(),
            measures: Vec::new(),
            interior: Vec::new(),
            edges: Vec::new(),
        }
    }

    fn node(&mut self, point: [f64; 2], measure: f64, interior: bool) -> usize {
        self.points.push(point);
        self.measures.push(measure);
        self.interior.push(interior);
        self.points.len() - 1
    }

    fn edge(&mut self, a: usize, b: usize, w: f64) {
        self.edges.push((a, b, w));
    }

    fn finish(
        self,
        spec: &DomainSpec,
        coordinates: Coordinates,
        spacing: f64,
        volume: f64,
        boundary_length: Option<f64>,
    ) -> Result<Mesh> {
        let mut unknown_of = vec![None; self.points.len()];
        let mut interior = Vec::new();
        for (k, &inside) in self.interior.iter().enumerate() {
            if inside {
                unknown_of[k] = Some(interior.len());
                interior.push(k);
            }
        }
        if interior.is_empty() {
            return domain("the domain has no interior nodes at this resolution");
        }
        let m = interior.len();
        let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); m];
        let mut boundary: Vec<Vec<f64>> = vec![Vec::new(); m];
        for &(a, b, w) in &self.edges {
            match (unknown_of[a], unknown_of[b]) {
                (Some(i), Some(j)) => {
                    rows[i].push((j, w));
                    rows[j].push((i, w));
                }
                (Some(i), None) => boundary[i].push(w),
                (None, Some(j)) => boundary[j].push(w),
                (None, None) => {}
            }
        }
        let mut row_ptr = Vec::with_capacity(m + 1);
        let mut cols = Vec::new();
        let mut weights = Vec::new();
        let mut diag = Vec::with_capacity(m);
        let mut boundary_weights = Vec::with_capacity(m);
        row_ptr.push(0);
        for (row, bdry) in rows.iter_mut().zip(&boundary) {
            row.sort_by_key(|e| e.0);
            let mut off = 0.0;
            for &(c, w) in row.iter() {
                cols.push(c);
                weights.push(w);
                off += w;
            }
            let b: f64 = bdry.iter().sum();
            boundary_weights.push(b);
            diag.push(off + b);
            row_ptr.push(cols.len());
        }
        let mass = interior.iter().map(|&k| self.measures[k]).collect();
        Ok(Mesh {
            spec: spec.clone(),
            n: 2,
            avr: spec.geometry.avr(),
            coordinates,
            spacing,
            volume,
            boundary_length,
            points: self.points,
            measures: self.measures,
            unknown_of,
            interior,
            row_ptr,
            cols,
            weights,
            boundary_weights,
            diag,
            mass,
        })
    }
}

fn positive(name: &str, v: f64) -> Result<()> {
    if !(v > 0.0) || !v.is_finite() {
        return domain(format!("{name} must be positive and finite, got {v}"));
    }
    Ok(())
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return domain(format!("cone angle ratio must lie in (0, 1], got {alpha}"));
    }
    Ok(())
}

fn check_radii(r_min: f64, r_max: f64) -> Result<()> {
    if !(r_min >= 0.0) || !(r_max > r_min) || !r_max.is_finite() {
        return domain(format!("need 0 <= r_min < r_max, got [{r_min}, {r_max}]"));
    }
    Ok(())
}

/// Discretizes `spec`.
pub fn build_mesh(spec: &DomainSpec) -> Result<Mesh> {
    if spec.resolution < MIN_RESOLUTION {
        return domain(format!(
            "resolution must be at least {MIN_RESOLUTION}, got {}",
            spec.resolution
        ));
    }
    match &spec.geometry {
        Geometry::EuclidMask { shape } => build_mask(spec, shape),
        Geometry::EuclidPolar {
            r_min,
            r_max,
            theta_span,
        } => build_polar(spec, 1.0, *r_min, *r_max, *theta_span),
        Geometry::ConePolar {
            alpha,
            r_min,
            r_max,
            theta_span,
        } => {
            check_alpha(*alpha)?;
            if !(*r_min > 0.0) {
                return domain(
                    "cone_polar domains must avoid the apex (r_min > 0); use cone_radial",
                );
            }
            build_polar(spec, *alpha, *r_min, *r_max, *theta_span)
        }
        Geometry::ConeRadial {
            alpha,
            r_min,
            r_max,
        } => {
            check_alpha(*alpha)?;
            build_radial(spec, *alpha, *r_min, *r_max)
        }
    }
}

/// Cell mask (row-major, `ny` rows of `nx` cells, bottom row first) and box size.
fn rasterize(shape: &MaskShape, nx: usize) -> Result<(Vec<bool>, usize, f64, f64)> {
    let (width, height) = match shape {
        MaskShape::Rectangle { width, height } | MaskShape::Explicit { width, height, .. } => {
            (*width, *height)
        }
        MaskShape::Ellipse { a, b } => (2.0 * a, 2.0 * b),
        MaskShape::LShape { size } => (*size, *size),
    };
    positive("shape width", width)?;
    positive("shape height", height)?;
    let ny = ((nx as f64 * height / width).round() as usize).max(2);
    let (hx, hy) = (width / nx as f64, height / ny as f64);
    let centre = |i: usize, j: usize| {
        (
            -0.5 * width + (i as f64 + 0.5) * hx,
            -0.5 * height + (j as f64 + 0.5) * hy,
        )
    };
    let mut mask = vec![false; nx * ny];
    match shape {
        MaskShape::Rectangle { .. } => mask.fill(true),
        MaskShape::Ellipse { a, b } => {
            for j in 0..ny {
                for i in 0..nx {
                    let (x, y) = centre(i, j);
                    mask[j * nx + i] = (x / a).powi(2) + (y / b).powi(2) < 1.0;
                }
            }
        }
        MaskShape::LShape { .. } => {
            for j in 0..ny {
                for i in 0..nx {
                    let (x, y) = centre(i, j);
                    mask[j * nx + i] = !(x > 0.0 && y > 0.0);
                }
            }
        }
        MaskShape::Explicit { rows, .. } => {
            let cols = rows.first().map_or(0, |r| r.chars().count());
            if rows.is_empty() || cols == 0 {
                return domain("explicit mask needs at least one nonempty row");
            }
            let grid: Vec<Vec<bool>> = rows
                .iter()
                .map(|r| {
                    r.chars()
                        .map(|c| match c {
                            '#' => Ok(true),
                            '.' => Ok(false),
                            other => Err(Error::Domain(format!(
                                "mask character {other:?} is not '#' or '.'"
                            ))),
                        })
                        .collect::<Result<Vec<bool>>>()
                })
                .collect::<Result<_>>()?;
            if grid.iter().any(|r| r.len() != cols) {
                return domain("explicit mask rows must have equal length");
            }
            let nrows = grid.len();
            for j in 0..ny {
                let src_row = nrows - 1 - (j * nrows / ny);
                for i in 0..nx {
                    mask[j * nx + i] = grid[src_row][i * cols / nx];
                }
            }
        }
    }
    Ok((mask, ny, width, height))
}

fn build_mask(spec: &DomainSpec, shape: &MaskShape) -> Result<Mesh> {
    let nx = spec.resolution;
    let (mask, ny, width, height) = rasterize(shape, nx)?;
    let (hx, hy) = (width / nx as f64, height / ny as f64);
    let quarter = 0.25 * hx * hy;
    let cell = |i: isize, j: isize| -> bool {
        i >= 0
            && j >= 0
            && (i as usize) < nx
            && (j as usize) < ny
            && mask[j as usize * nx + i as usize]
    };
    let mut asm = Assembly::new();
    let mut id = vec![usize::MAX; (nx + 1) * (ny + 1)];
    let mut volume_cells = 0usize;
    for j in 0..=ny {
        for i in 0..=nx {
            let (ii, jj) = (i as isize, j as isize);
            let count = [(ii - 1, jj - 1), (ii, jj - 1), (ii - 1, jj), (ii, jj)]
                .iter()
                .filter(|&&(a, b)| cell(a, b))
                .count();
            if count > 0 {
                let p = [-0.5 * width + i as f64 * hx, -0.5 * height + j as f64 * hy];
                id[j * (nx + 1) + i] = asm.node(p, count as f64 * quarter, count == 4);
                volume_cells += count;
            }
        }
    }
    // Edge weights: dual face length over edge length, half a face per adjacent masked cell.
    for j in 0..=ny {
        for i in 0..=nx {
            let a = id[j * (nx + 1) + i];
            if a == usize::MAX {
                continue;
            }
            let (ii, jj) = (i as isize, j as isize);
            if i < nx {
                let b = id[j * (nx + 1) + i + 1];
                let faces = usize::from(cell(ii, jj - 1)) + usize::from(cell(ii, jj));
                if b != usize::MAX && faces > 0 {
                    asm.edge(a, b, faces as f64 * 0.5 * hy / hx);
                }
            }
            if j < ny {
                let b = id[(j + 1) * (nx + 1) + i];
                let faces = usize::from(cell(ii - 1, jj)) + usize::from(cell(ii, jj));
                if b != usize::MAX && faces > 0 {
                    asm.edge(a, b, faces as f64 * 0.5 * hx / hy);
                }
            }
        }
    }
    let volume = volume_cells as f64 * quarter;
    asm.finish(spec, Coordinates::Cartesian, hx.max(hy), volume, None)
}

fn build_polar(spec: &DomainSpec, alpha: f64, r_min: f64, r_max: f64, span: f64) -> Result<Mesh> {
    check_radii(r_min, r_max)?;
    if !(span > 0.0 && span <= full_turn() + 1e-12) {
        return domain(format!("theta_span must lie in (0, 2π], got {span}"));
    }
    let periodic = (span - full_turn()).abs() <= 1e-12;
    let span = if periodic { full_turn() } else { span };
    if !periodic && r_min == 0.0 {
        return domain("sectors must have r_min > 0");
    }
    let nr = spec.resolution;
    let ntheta = ((4.0 * nr as f64 * span / full_turn()).round() as usize).max(8);
    let dr = (r_max - r_min) / nr as f64;
    let dtheta = span / ntheta as f64;
    let centre = r_min == 0.0;
    let theta_nodes = if periodic { ntheta } else { ntheta + 1 };
    let radius = |i: usize| r_min + i as f64 * dr;
    let dual_r = |i: usize| {
        (
            (radius(i) - 0.5 * dr).max(r_min),
            (radius(i) + 0.5 * dr).min(r_max),
        )
    };
    let theta_width = |j: usize| {
        if !periodic && (j == 0 || j == ntheta) {
            0.5 * dtheta
        } else {
            dtheta
        }
    };

    let mut asm = Assembly::new();
    let mut id = vec![vec![usize::MAX; theta_nodes]; nr + 1];
    let first_ring = if centre {
        let c = asm.node([0.0, 0.0], alpha * PI * 0.25 * dr * dr, true);
        id[0].fill(c);
        1
    } else {
        0
    };
    for (i, ring) in id.iter_mut().enumerate().skip(first_ring) {
        let (lo, hi) = dual_r(i);
        let on_radial_edge = i == nr || (!centre && i == 0);
        for (j, slot) in ring.iter_mut().enumerate() {
            let on_theta_edge = !periodic && (j == 0 || j == ntheta);
            let measure = alpha * theta_width(j) * (hi * hi - lo * lo) / 2.0;
            *slot = asm.node(
                [radius(i), j as f64 * dtheta],
                measure,
                !on_radial_edge && !on_theta_edge,
            );
        }
    }
    for i in first_ring..=nr {
        let (lo, hi) = dual_r(i);
        for j in 0..theta_nodes {
            let a = id[i][j];
            if i < nr {
                let w = alpha * theta_width(j) * (radius(i) + 0.5 * dr) / dr;
                asm.edge(a, id[i + 1][j], w);
            }
            let next = if periodic {
                Some((j + 1) % theta_nodes)
            } else if j < ntheta {
                Some(j + 1)
            } else {
                None
            };
            if let Some(jn) = next {
                asm.edge(a, id[i][jn], (hi - lo) / (alpha * radius(i) * dtheta));
            }
        }
    }
    if centre {
        for j in 0..theta_nodes {
            asm.edge(id[0][0], id[1][j], alpha * dtheta / 2.0);
        }
    }
    let volume = alpha * span * (r_max * r_max - r_min * r_min) / 2.0;
    let mut perimeter = alpha * span * (r_max + r_min);
    if !periodic {
        perimeter += 2.0 * (r_max - r_min);
    }
    asm.finish(spec, Coordinates::Polar, dr, volume, Some(perimeter))
}

fn build_radial(spec: &DomainSpec, alpha: f64, r_min: f64, r_max: f64) -> Result<Mesh> {
    check_radii(r_min, r_max)?;
    let nr = spec.resolution;
    let dr = (r_max - r_min) / nr as f64;
    let radius = |i: usize| r_min + i as f64 * dr;
    let turn = alpha * full_turn();
    let mut asm = Assembly::new();
    for i in 0..=nr {
        let lo = (radius(i) - 0.5 * dr).max(r_min);
        let hi = (radius(i) + 0.5 * dr).min(r_max);
        let interior = i < nr && (i > 0 || r_min == 0.0);
        asm.node([radius(i), 0.0], turn * (hi * hi - lo * lo) / 2.0, interior);
    }
    for i in 0..nr {
        asm.edge(i, i + 1, turn * (radius(i) + 0.5 * dr) / dr);
    }
    let volume = turn * (r_max * r_max - r_min * r_min) / 2.0;
    let perimeter = turn * (r_max + r_min);
    asm.finish(spec, Coordinates::Radial, dr, volume, Some(perimeter))
}

/// `|∂Ω| − n ω_n^{1/n} AVR^{1/n} |Ω|^{(n−1)/n}` from the analytic perimeter.
pub fn isoperimetric_slack(mesh: &Mesh) -> Result<f64> {
    let length = mesh.boundary_length.ok_or_else(|| {
        Error::UnsupportedGeometry(format!(
            "{} meshes have no analytic boundary length",
            mesh.spec.geometry.kind()
        ))
    })?;
    let nf = f64::from(mesh.n);
    let bound = nf
        * unit_ball_volume(mesh.n)?.powf(1.0 / nf)
        * mesh.avr.powf(1.0 / nf)
        * mesh.volume.powf((nf - 1.0) / nf);
    Ok(length - bound)
}
