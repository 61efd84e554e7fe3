//! Global collocation systems and boundary rows.
//!
//! Every node contributes the governing equation evaluated with its local
//! stencils; boundary conditions then overwrite rows in place. Dofs are
//! interleaved per node, `(ux, uy, uz)` at rows `3m, 3m+1, 3m+2` in 3D.

use std::collections::{BTreeMap, BTreeSet};

use faer::Mat;
use log::warn;
use rayon::prelude::*;

use crate::approx::{Discretization, LocalApproximation, D_X, D_XX, D_XY, D_XZ, D_Y, D_YY, D_YZ, D_Z, D_ZZ};
use crate::cloud::NodeCloud;
use crate::error::{Error, Result};

/// Isotropic linear elastic material.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Material {
    /// Young's modulus (N/mm²).
    pub e: f64,
    pub nu: f64,
    /// Lamé's first parameter (N/mm²).
    pub lambda: f64,
    /// Shear modulus (N/mm²).
    pub mu: f64,
}

impl Material {
    pub fn new(e: f64, nu: f64) -> Result<Self> {
        if !(e > 0.0) || !e.is_finite() {
            return Err(Error::InvalidMaterial(format!("Young's modulus must be positive, got {e}")));
        }
        if !(0.0..0.5).contains(&nu) {
            return Err(Error::InvalidMaterial(format!("Poisson's ratio must lie in [0, 0.5), got {nu}")));
        }
        Ok(Self {
            e,
            nu,
            lambda: (nu * e) / ((1.0 + nu) * (1.0 - 2.0 * nu)),
            mu: e / (2.0 * (1.0 + nu)),
        })
    }
}

/// Dense collocation system `K u = F`.
#[derive(Debug, Clone)]
pub struct LinearSystem {
    pub k: Mat<f64>,
    pub f: Vec<f64>,
    pub dofs_per_node: usize,
    /// Smallest local-matrix rcond met during assembly (NaN when no scheme
    /// inverted anything).
    pub min_moment_rcond: f64,
    /// Non-fatal findings, e.g. Neumann rows placed at interior nodes.
    pub diagnostics: Vec<String>,
    dirichlet: BTreeMap<usize, f64>,
    neumann: BTreeSet<usize>,
}

impl LinearSystem {
    pub fn zeros(nodes: usize, dofs_per_node: usize) -> Self {
        let n = nodes * dofs_per_node;
        Self {
            k: Mat::zeros(n, n),
            f: vec![0.0; n],
            dofs_per_node,
            min_moment_rcond: f64::NAN,
            diagnostics: Vec::new(),
            dirichlet: BTreeMap::new(),
            neumann: BTreeSet::new(),
        }
    }

    pub fn dof_count(&self) -> usize {
        self.f.len()
    }

    /// Row/column index of `axis` at `node`.
    pub fn dof(&self, node: usize, axis: usize) -> usize {
        node * self.dofs_per_node + axis
    }

    pub fn row(&self, dof: usize) -> Vec<f64> {
        (0..self.k.ncols()).map(|j| self.k[(dof, j)]).collect()
    }

    /// `K u` for a full dof vector.
    pub fn apply(&self, u: &[f64]) -> Vec<f64> {
        let n = self.dof_count();
        let mut out = vec![0.0; n];
        for j in 0..n {
            let uj = u[j];
            if uj == 0.0 {
                continue;
            }
            let col = self.k.col(j);
            for i in 0..n {
                out[i] += col[i] * uj;
            }
        }
        out
    }

    /// Prescribed values applied so far, keyed by dof.
    pub fn dirichlet_dofs(&self) -> &BTreeMap<usize, f64> {
        &self.dirichlet
    }

    fn note_rcond(&mut self, rcond: f64) {
        if rcond.is_finite() && !(self.min_moment_rcond <= rcond) {
            self.min_moment_rcond = rcond;
        }
    }

    fn check_dof(&self, dof: usize) -> Result<()> {
        if dof >= self.dof_count() {
            return Err(Error::InvalidBoundary(format!(
                "dof {dof} out of range for a system of {} dofs",
                self.dof_count()
            )));
        }
        Ok(())
    }
}

fn locals(cloud: &NodeCloud, disc: &Discretization) -> Result<Vec<LocalApproximation>> {
    (0..cloud.len())
        .into_par_iter()
        .map(|m| disc.local(cloud, m))
        .collect()
}

/// Collocate `E u'' = 0` at every node of a 1D cloud. `F` stays zero.
pub fn assemble_bar_1d(cloud: &NodeCloud, material: &Material, disc: &Discretization) -> Result<LinearSystem> {
    if cloud.dimension() != 1 {
        return Err(Error::InvalidDiscretization("bar assembly needs a 1D cloud".into()));
    }
    let locals = locals(cloud, disc)?;
    let mut system = LinearSystem::zeros(cloud.len(), 1);
    for (m, local) in locals.iter().enumerate() {
        let d2 = local.stencil(D_XX).map_err(|e| e.at_node(m))?;
        for (&node, c) in d2.neighbors.iter().zip(&d2.coeffs) {
            system.k[(m, node)] = material.e * c;
        }
        system.note_rcond(local.rcond());
    }
    Ok(system)
}

/// Collocate `(λ+μ) ∇(∇·u) + μ ∇²u = 0` at every node of a 3D cloud.
///
/// Terms are accumulated left to right in the reference script's order.
#[allow(clippy::assign_op_pattern)]
pub fn assemble_navier_3d(cloud: &NodeCloud, material: &Material, disc: &Discretization) -> Result<LinearSystem> {
    if cloud.dimension() != 3 {
        return Err(Error::InvalidDiscretization("Navier assembly needs a 3D cloud".into()));
    }
    let locals = locals(cloud, disc)?;
    let mut system = LinearSystem::zeros(cloud.len(), 3);
    let lm = material.lambda + material.mu;
    let mu = material.mu;
    for (m, local) in locals.iter().enumerate() {
        let st = |d| local.stencil(d).map_err(|e| e.at_node(m));
        let (dxx, dyy, dzz) = (st(D_XX)?, st(D_YY)?, st(D_ZZ)?);
        let (dxy, dyz, dxz) = (st(D_XY)?, st(D_YZ)?, st(D_XZ)?);
        let k = &mut system.k;
        let (rx, ry, rz) = (3 * m, 3 * m + 1, 3 * m + 2);
        for (q, &node) in dxx.neighbors.iter().enumerate() {
            let (cx, cy, cz) = (3 * node, 3 * node + 1, 3 * node + 2);
            let (xx, yy, zz) = (dxx.coeffs[q], dyy.coeffs[q], dzz.coeffs[q]);
            let (xy, yz, xz) = (dxy.coeffs[q], dyz.coeffs[q], dxz.coeffs[q]);
            k[(rx, cx)] = k[(rx, cx)] + lm * xx + mu * xx + mu * yy + mu * zz;
            k[(rx, cy)] = k[(rx, cy)] + lm * xy;
            k[(rx, cz)] = k[(rx, cz)] + lm * xz;
            k[(ry, cx)] = k[(ry, cx)] + lm * xy;
            k[(ry, cy)] = k[(ry, cy)] + lm * yy + mu * xx + mu * yy + mu * zz;
            k[(ry, cz)] = k[(ry, cz)] + lm * yz;
            k[(rz, cx)] = k[(rz, cx)] + lm * xz;
            k[(rz, cy)] = k[(rz, cy)] + lm * yz;
            k[(rz, cz)] = k[(rz, cz)] + lm * zz + mu * xx + mu * yy + mu * zz;
        }
        system.note_rcond(local.rcond());
    }
    Ok(system)
}

/// Prescribed displacement on one dof.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dirichlet {
    pub node: usize,
    pub axis: usize,
    /// Prescribed displacement (mm).
    pub value: f64,
}

/// Replace each constrained row by a unit row and set `F` to the prescribed
/// value. Re-applying an identical constraint is a no-op.
pub fn apply_dirichlet(system: &mut LinearSystem, entries: &[Dirichlet]) -> Result<()> {
    let mut pending: BTreeMap<usize, f64> = BTreeMap::new();
    for e in entries {
        if e.axis >= system.dofs_per_node {
            return Err(Error::InvalidBoundary(format!("axis {} on a {}-dof node", e.axis, system.dofs_per_node)));
        }
        let dof = system.dof(e.node, e.axis);
        system.check_dof(dof)?;
        if system.neumann.contains(&dof) {
            return Err(Error::InvalidBoundary(format!("dof {dof} already carries a Neumann row")));
        }
        let previous = pending.get(&dof).or_else(|| system.dirichlet.get(&dof));
        if let Some(&first) = previous {
            if first != e.value {
                return Err(Error::DirichletConflict {
                    dof,
                    first,
                    second: e.value,
                });
            }
        }
        pending.insert(dof, e.value);
    }
    let n = system.dof_count();
    for (&dof, &value) in &pending {
        for j in 0..n {
            system.k[(dof, j)] = 0.0;
        }
        system.k[(dof, dof)] = 1.0;
        system.f[dof] = value;
        system.dirichlet.insert(dof, value);
    }
    Ok(())
}

/// Characteristic length of the finite-calculus boundary correction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Stabilization {
    Off,
    /// `h` equal to the boundary node's support radius (reference-script behaviour).
    SupportRadius,
    /// Explicit `h` in mm.
    Length(f64),
}

impl Stabilization {
    fn resolve(self, local: &LocalApproximation) -> Option<f64> {
        match self {
            Stabilization::Off => None,
            Stabilization::SupportRadius => Some(local.support().rmax),
            Stabilization::Length(h) => Some(h),
        }
    }
}

/// Point load at an end of a bar.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Neumann1d {
    pub node: usize,
    /// Axial force (N).
    pub load: f64,
    /// Cross-section area (mm²).
    pub area: f64,
    pub stabilization: Stabilization,
}

/// Overwrite the row of `spec.node` with the bar's traction condition
///
/// `n·E u' − (h/2)·(interior row) = load / area`,
///
/// where the interior row is whatever the row held before (normally
/// `E u''`). Returns the `h` that was used.
pub fn apply_neumann_1d(
    system: &mut LinearSystem,
    cloud: &NodeCloud,
    disc: &Discretization,
    material: &Material,
    spec: &Neumann1d,
) -> Result<Option<f64>> {
    if cloud.dimension() != 1 || system.dofs_per_node != 1 {
        return Err(Error::InvalidBoundary("1D Neumann rows need a 1D bar system".into()));
    }
    if !(spec.area > 0.0) {
        return Err(Error::InvalidBoundary(format!("area must be positive, got {}", spec.area)));
    }
    let row = spec.node;
    system.check_dof(row)?;
    if system.dirichlet.contains_key(&row) {
        return Err(Error::InvalidBoundary(format!("node {row} is already constrained")));
    }
    let (lo, hi) = cloud.bounds();
    let x = cloud.point(row)[0];
    let sign = if x == hi[0] {
        1.0
    } else if x == lo[0] {
        -1.0
    } else {
        let msg = format!("Neumann condition applied at interior node {row} (x = {x})");
        warn!("{msg}");
        system.diagnostics.push(msg);
        1.0
    };

    let local = disc.local(cloud, row)?;
    let d1 = local.stencil(D_X).map_err(|e| e.at_node(row))?;
    let h = spec.stabilization.resolve(&local);
    overwrite_row(system, row, h, d1.neighbors.iter().zip(&d1.coeffs).map(|(&c, v)| (c, sign * (material.e * v))));
    system.f[row] = spec.load / spec.area;
    system.neumann.insert(row);
    system.note_rcond(local.rcond());
    Ok(h)
}

/// `row := row·(−1/2)·h + new` when stabilised, `row := new` otherwise.
#[allow(clippy::assign_op_pattern)]
fn overwrite_row(system: &mut LinearSystem, row: usize, h: Option<f64>, entries: impl Iterator<Item = (usize, f64)>) {
    let n = system.dof_count();
    match h {
        Some(h) => {
            for j in 0..n {
                system.k[(row, j)] = system.k[(row, j)] * (-0.5) * h;
            }
        }
        None => {
            for j in 0..n {
                system.k[(row, j)] = 0.0;
            }
        }
    }
    for (col, v) in entries {
        system.k[(row, col)] = system.k[(row, col)] + v;
    }
}

/// Traction condition on one displacement component of a 3D boundary node.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Neumann3d {
    pub node: usize,
    pub axis: usize,
    /// Outward normal; normalised before use.
    pub normal: [f64; 3],
    /// Prescribed traction component (N/mm²).
    pub traction: f64,
    pub stabilization: Stabilization,
}

/// Coefficients of `t_i = σ_ij n_j` with `σ = λ tr(ε) I + 2μ ε`, one row per
/// component, over the dofs of the local support.
fn traction_rows(local: &LocalApproximation, material: &Material, normal: [f64; 3]) -> Result<[Vec<(usize, f64)>; 3]> {
    let star = local.support().star;
    let grads = [D_X, D_Y, D_Z].map(|d| local.stencil(d).map_err(|e| e.at_node(star)));
    let [gx, gy, gz] = grads;
    let g = [gx?, gy?, gz?];
    let (lambda, mu) = (material.lambda, material.mu);
    let mut rows: [Vec<(usize, f64)>; 3] = Default::default();
    for (i, row) in rows.iter_mut().enumerate() {
        for (q, &node) in g[0].neighbors.iter().enumerate() {
            let grad = [g[0].coeffs[q], g[1].coeffs[q], g[2].coeffs[q]];
            let n_dot_grad = normal[0] * grad[0] + normal[1] * grad[1] + normal[2] * grad[2];
            for k in 0..3 {
                let mut c = lambda * normal[i] * grad[k] + mu * normal[k] * grad[i];
                if i == k {
                    c += mu * n_dot_grad;
                }
                row.push((3 * node + k, c));
            }
        }
    }
    Ok(rows)
}

fn unit_normal(node: usize, normal: [f64; 3]) -> Result<[f64; 3]> {
    let len = (normal[0] * normal[0] + normal[1] * normal[1] + normal[2] * normal[2]).sqrt();
    if !(len > 1e-12) || !len.is_finite() {
        return Err(Error::DegenerateNormal { node });
    }
    Ok(normal.map(|v| v / len))
}

/// Overwrite one row of a 3D node with its traction condition, optionally
/// minus `h/2` times the interior (Navier) row it replaces.
pub fn apply_neumann_3d(
    system: &mut LinearSystem,
    cloud: &NodeCloud,
    disc: &Discretization,
    material: &Material,
    spec: &Neumann3d,
) -> Result<Option<f64>> {
    apply_traction_3d(system, cloud, disc, material, std::slice::from_ref(spec))
}

/// Several traction rows sharing one node, built from a single local
/// approximation. All entries must refer to the same node.
pub fn apply_traction_3d(
    system: &mut LinearSystem,
    cloud: &NodeCloud,
    disc: &Discretization,
    material: &Material,
    specs: &[Neumann3d],
) -> Result<Option<f64>> {
    let Some(first) = specs.first() else {
        return Ok(None);
    };
    if cloud.dimension() != 3 || system.dofs_per_node != 3 {
        return Err(Error::InvalidBoundary("3D Neumann rows need a 3D system".into()));
    }
    let node = first.node;
    if specs.iter().any(|s| s.node != node) {
        return Err(Error::InvalidBoundary("traction group spans several nodes".into()));
    }
    let local = disc.local(cloud, node)?;
    let mut used = None;
    for spec in specs {
        if spec.axis >= 3 {
            return Err(Error::InvalidBoundary(format!("axis {} out of range", spec.axis)));
        }
        let row = system.dof(node, spec.axis);
        system.check_dof(row)?;
        if system.dirichlet.contains_key(&row) {
            return Err(Error::InvalidBoundary(format!("dof {row} is already constrained")));
        }
        let normal = unit_normal(node, spec.normal)?;
        let rows = traction_rows(&local, material, normal)?;
        let h = spec.stabilization.resolve(&local);
        overwrite_row(system, row, h, rows[spec.axis].iter().copied());
        system.f[row] = spec.traction;
        system.neumann.insert(row);
        used = used.or(h);
    }
    system.note_rcond(local.rcond());
    Ok(used)
}

/// Outward normal of a node on the bounding box of a cloud; at edges and
/// corners the normalised sum of the adjacent face normals.
pub fn resolve_normal(cloud: &NodeCloud, node: usize) -> Result<[f64; 3]> {
    let faces = boundary_faces(cloud, node);
    let mut n = [0.0; 3];
    for (axis, sign) in faces {
        n[axis] += sign;
    }
    unit_normal(node, n)
}

/// `(axis, ±1)` for every bounding-box face the node lies on.
pub fn boundary_faces(cloud: &NodeCloud, node: usize) -> Vec<(usize, f64)> {
    let (lo, hi) = cloud.bounds();
    let p = cloud.point(node);
    let mut faces = Vec::new();
    for axis in 0..cloud.dimension() {
        let tol = 1e-9 * (hi[axis] - lo[axis]).abs().max(1.0);
        if (p[axis] - lo[axis]).abs() <= tol {
            faces.push((axis, -1.0));
        }
        if (p[axis] - hi[axis]).abs() <= tol {
            faces.push((axis, 1.0));
        }
    }
    faces
}

/// Boundary rows of a problem.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct BoundarySpec {
    pub dirichlet: Vec<Dirichlet>,
    pub bar_loads: Vec<Neumann1d>,
    pub tractions: Vec<Neumann3d>,
}

impl BoundarySpec {
    /// No dof may be both prescribed and loaded; normals must be non-zero.
    pub fn validate(&self, dofs_per_node: usize) -> Result<()> {
        let fixed: BTreeSet<usize> = self
            .dirichlet
            .iter()
            .map(|d| d.node * dofs_per_node + d.axis)
            .collect();
        let loaded = self
            .bar_loads
            .iter()
            .map(|l| l.node * dofs_per_node)
            .chain(self.tractions.iter().map(|t| t.node * dofs_per_node + t.axis));
        for dof in loaded {
            if fixed.contains(&dof) {
                return Err(Error::InvalidBoundary(format!("dof {dof} is both prescribed and loaded")));
            }
        }
        for t in &self.tractions {
            unit_normal(t.node, t.normal)?;
        }
        Ok(())
    }

    /// Neumann rows first (they read the interior rows), then Dirichlet.
    pub fn apply(
        &self,
        system: &mut LinearSystem,
        cloud: &NodeCloud,
        disc: &Discretization,
        material: &Material,
    ) -> Result<()> {
        self.validate(system.dofs_per_node)?;
        for load in &self.bar_loads {
            apply_neumann_1d(system, cloud, disc, material, load)?;
        }
        let mut by_node: BTreeMap<usize, Vec<Neumann3d>> = BTreeMap::new();
        for t in &self.tractions {
            by_node.entry(t.node).or_default().push(*t);
        }
        for group in by_node.values() {
            apply_traction_3d(system, cloud, disc, material, group)?;
        }
        apply_dirichlet(system, &self.dirichlet)
    }
}
