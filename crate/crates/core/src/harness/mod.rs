//! Experiment runner: problem setup, end-to-end runs, support-size sweeps
//! and report emission.

mod config;
mod report;

use std::time::Instant;

use rayon::prelude::*;

use crate::approx::{Discretization, FpmOptions, Scheme};
use crate::assembly::{
    assemble_bar_1d, assemble_navier_3d, boundary_faces, resolve_normal, BoundarySpec, Dirichlet, LinearSystem,
    Material, Neumann1d, Neumann3d, Stabilization,
};
use crate::cloud::{generate_grid_1d, generate_grid_3d, NodeCloud};
use crate::error::{Error, Result};
use crate::oracle::{
    bar_axial, cantilever_end_force, cantilever_prescribed_tip, compare, rectangle_inertia, ErrorReport, Profile,
};
use crate::solve::{solve_dense, Solution};

pub use config::{load_config, parse_config};
pub use report::{emit_csv, emit_profile, emit_timing, render_csv, TimingColumn};

/// Support sizes and tip displacements (mm) of the reference 1D sweep.
pub const TABLE1: [(usize, f64); 9] = [
    (3, 0.0273),
    (5, 0.0247),
    (10, 0.0247),
    (15, 0.0247),
    (20, 0.0248),
    (30, 0.0248),
    (40, 0.0267),
    (50, 0.0539),
    (60, 0.1737),
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProblemKind {
    Bar1d,
    Beam3d,
}

impl ProblemKind {
    pub fn name(self) -> &'static str {
        match self {
            ProblemKind::Bar1d => "bar1d",
            ProblemKind::Beam3d => "beam3d",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Legacy,
    Corrected,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Legacy => "legacy",
            Mode::Corrected => "corrected",
        }
    }
}

impl std::str::FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "legacy" => Ok(Mode::Legacy),
            "corrected" => Ok(Mode::Corrected),
            other => Err(Error::Config(format!("unknown mode '{other}'"))),
        }
    }
}

/// Load case. The clamped end is always at the lowest coordinate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Loading {
    /// Force (N) at the free end.
    EndForce(f64),
    /// Displacement (mm) prescribed at the free end, along x for the bar and
    /// y for the beam.
    PrescribedTip(f64),
}

/// Everything needed to reproduce one run or sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub problem: ProblemKind,
    pub loading: Loading,
    pub scheme: Scheme,
    pub mode: Mode,
    /// Support size of a single run.
    pub n: usize,
    /// Support sizes of a sweep.
    pub n_list: Vec<usize>,
    pub stabilize: bool,
    /// Explicit stabilisation length (mm); by default the support radius in
    /// legacy mode and the nodal spacing in corrected mode.
    pub h_stab: Option<f64>,
    /// N/mm².
    pub e: f64,
    pub nu: f64,
    /// Bar length (mm).
    pub bar_length: f64,
    pub bar_nodes: usize,
    /// Bar cross-section (mm²).
    pub area: f64,
    /// Beam nodes per axis.
    pub grid: [usize; 3],
    /// Beam node spacing (mm).
    pub spacing: f64,
    pub origin: [f64; 3],
    pub rbf_alpha: f64,
    pub rbf_augmented: bool,
    pub sph_h_factor: f64,
}

impl ExperimentConfig {
    /// 100-node, 99 mm bar with a 50 N end load, legacy FPM.
    pub fn bar_default() -> Self {
        Self {
            problem: ProblemKind::Bar1d,
            loading: Loading::EndForce(50.0),
            scheme: Scheme::Fpm,
            mode: Mode::Legacy,
            n: 20,
            n_list: TABLE1.iter().map(|(n, _)| *n).collect(),
            stabilize: true,
            h_stab: None,
            e: 200_000.0,
            nu: 0.0,
            bar_length: 99.0,
            bar_nodes: 100,
            area: 1.0,
            grid: [5, 5, 100],
            spacing: 1.0,
            origin: [1.0; 3],
            rbf_alpha: 3.0,
            rbf_augmented: false,
            sph_h_factor: 1.3,
        }
    }

    /// 3×3×40 cantilever with a 5 mm prescribed tip deflection, legacy FPM.
    pub fn beam_default() -> Self {
        Self {
            problem: ProblemKind::Beam3d,
            loading: Loading::PrescribedTip(5.0),
            n: 30,
            n_list: vec![30],
            stabilize: false,
            nu: 0.33,
            grid: [3, 3, 40],
            ..Self::bar_default()
        }
    }

    /// The full 5×5×100 grid with the 50-node support.
    pub fn beam_full() -> Self {
        Self {
            grid: [5, 5, 100],
            n: 50,
            n_list: vec![50],
            ..Self::beam_default()
        }
    }

    pub fn with_n(&self, n: usize) -> Self {
        Self { n, ..self.clone() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_list.is_empty() {
            return Err(Error::Config("support-size list is empty".into()));
        }
        Material::new(self.e, self.nu)?;
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::Config(format!("{name} must be positive, got {v}")))
            }
        };
        positive("area", self.area)?;
        positive("bar_length", self.bar_length)?;
        positive("spacing", self.spacing)?;
        if let Some(h) = self.h_stab {
            positive("h_stab", h)?;
        }
        if self.bar_nodes < 2 {
            return Err(Error::Config("bar needs at least 2 nodes".into()));
        }
        if self.grid.iter().any(|&g| g < 2) {
            return Err(Error::Config(format!("beam grid {:?} needs at least 2 nodes per axis", self.grid)));
        }
        if self.scheme == Scheme::Fpm && self.mode == Mode::Corrected {
            let terms = Discretization::corrected(0).basis(self.dimension())?.len();
            for &n in self.n_list.iter().chain(std::iter::once(&self.n)) {
                if n < terms {
                    return Err(Error::Config(format!("support size {n} below the {terms} basis terms")));
                }
            }
        }
        Ok(())
    }

    pub fn dimension(&self) -> usize {
        match self.problem {
            ProblemKind::Bar1d => 1,
            ProblemKind::Beam3d => 3,
        }
    }

    pub fn discretization(&self) -> Discretization {
        let fpm = match self.mode {
            Mode::Legacy => FpmOptions::legacy(),
            Mode::Corrected => FpmOptions::corrected(),
        };
        Discretization {
            rbf_alpha: self.rbf_alpha,
            rbf_augmented: self.rbf_augmented,
            sph_h_factor: self.sph_h_factor,
            ..Discretization::new(self.scheme, self.n, fpm)
        }
    }

    fn stabilization(&self) -> Stabilization {
        match (self.stabilize, self.h_stab, self.mode) {
            (false, _, _) => Stabilization::Off,
            (true, Some(h), _) => Stabilization::Length(h),
            (true, None, Mode::Legacy) => Stabilization::SupportRadius,
            (true, None, Mode::Corrected) => Stabilization::Length(self.node_spacing()),
        }
    }

    fn node_spacing(&self) -> f64 {
        match self.problem {
            ProblemKind::Bar1d => self.bar_length / (self.bar_nodes - 1) as f64,
            ProblemKind::Beam3d => self.spacing,
        }
    }
}

/// A problem ready for assembly.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub cloud: NodeCloud,
    pub discretization: Discretization,
    pub material: Material,
    pub boundary: BoundarySpec,
    /// Nodes sampled for the displacement profile, from the clamped end.
    pub axis_nodes: Vec<usize>,
    /// Displacement component plotted along the axis.
    pub axis_component: usize,
    /// Node whose displacement is reported as the tip value.
    pub tip_node: usize,
    /// Profile positions measured from the clamped end (mm).
    pub positions: Vec<f64>,
    pub reference: Profile,
}

/// Build cloud, discretisation, material and boundary rows for a config.
pub fn prepare(config: &ExperimentConfig) -> Result<Prepared> {
    config.validate()?;
    let disc = config.discretization();
    let stab = config.stabilization();
    match config.problem {
        ProblemKind::Bar1d => {
            let material = Material::new(config.e, 0.0)?;
            let cloud = generate_grid_1d(config.bar_length, config.bar_nodes)?;
            let tip = cloud.len() - 1;
            let mut boundary = BoundarySpec {
                dirichlet: vec![Dirichlet { node: 0, axis: 0, value: 0.0 }],
                ..Default::default()
            };
            let length = config.bar_length;
            let (e, area) = (config.e, config.area);
            let reference: Box<dyn Fn(f64) -> f64> = match config.loading {
                Loading::EndForce(force) => {
                    boundary.bar_loads.push(Neumann1d { node: tip, load: force, area, stabilization: stab });
                    Box::new(move |x| bar_axial(x, force, e, area))
                }
                Loading::PrescribedTip(delta) => {
                    boundary.dirichlet.push(Dirichlet { node: tip, axis: 0, value: delta });
                    Box::new(move |x| delta * x / length)
                }
            };
            let positions: Vec<f64> = cloud.points().iter().map(|p| p[0]).collect();
            Ok(Prepared {
                reference: Profile::sample(positions.clone(), reference),
                axis_nodes: (0..cloud.len()).collect(),
                axis_component: 0,
                tip_node: tip,
                positions,
                cloud,
                discretization: disc,
                material,
                boundary,
            })
        }
        ProblemKind::Beam3d => {
            let material = Material::new(config.e, config.nu)?;
            let [nx, ny, nz] = config.grid;
            let h = config.spacing;
            let cloud = generate_grid_3d(nx, ny, nz, h, config.origin)?;
            let (mi, mj) = (nx / 2, ny / 2);
            let grid = |i, j, k| cloud.grid_index(i, j, k).expect("index inside the grid");
            let tip = grid(mi, mj, nz - 1);
            let mut boundary = BoundarySpec::default();
            for i in 0..nx {
                for j in 0..ny {
                    let node = grid(i, j, 0);
                    for axis in 0..3 {
                        boundary.dirichlet.push(Dirichlet { node, axis, value: 0.0 });
                    }
                }
            }
            let length = (nz - 1) as f64 * h;
            let (e, width, height) = (config.e, (nx - 1) as f64 * h, (ny - 1) as f64 * h);
            let reference: Box<dyn Fn(f64) -> f64> = match config.loading {
                Loading::PrescribedTip(delta) => {
                    boundary.dirichlet.push(Dirichlet { node: tip, axis: 1, value: delta });
                    Box::new(move |x| cantilever_prescribed_tip(x, delta, length))
                }
                Loading::EndForce(force) => {
                    let traction = force / (h * h);
                    match config.mode {
                        Mode::Legacy => {
                            for axis in 0..3 {
                                boundary.tractions.push(Neumann3d {
                                    node: tip,
                                    axis,
                                    normal: [0.0, 0.0, 1.0],
                                    traction: if axis == 1 { traction } else { 0.0 },
                                    stabilization: stab,
                                });
                            }
                        }
                        Mode::Corrected => {
                            for node in 0..cloud.len() {
                                let faces = boundary_faces(&cloud, node);
                                let clamped = faces.iter().any(|&(axis, sign)| axis == 2 && sign < 0.0);
                                if faces.is_empty() || clamped {
                                    continue;
                                }
                                let normal = resolve_normal(&cloud, node)?;
                                for axis in 0..3 {
                                    let t = if node == tip && axis == 1 { traction } else { 0.0 };
                                    boundary.tractions.push(Neumann3d {
                                        node,
                                        axis,
                                        normal,
                                        traction: t,
                                        stabilization: stab,
                                    });
                                }
                            }
                        }
                    }
                    let inertia = rectangle_inertia(width, height);
                    Box::new(move |x| cantilever_end_force(x, force, e, inertia, length))
                }
            };
            let axis_nodes: Vec<usize> = (0..nz).map(|k| grid(mi, mj, k)).collect();
            let positions: Vec<f64> = (0..nz).map(|k| k as f64 * h).collect();
            Ok(Prepared {
                reference: Profile::sample(positions.clone(), reference),
                axis_nodes,
                axis_component: 1,
                tip_node: tip,
                positions,
                cloud,
                discretization: disc,
                material,
                boundary,
            })
        }
    }
}

/// Pipeline stage at which a run stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Setup,
    Assembly,
    Boundary,
    Solve,
    Oracle,
}

impl Stage {
    pub fn name(self) -> &'static str {
        match self {
            Stage::Setup => "setup",
            Stage::Assembly => "assembly",
            Stage::Boundary => "boundary",
            Stage::Solve => "solve",
            Stage::Oracle => "oracle",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunFailure {
    pub stage: Stage,
    pub node: Option<usize>,
    pub message: String,
}

impl std::fmt::Display for RunFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} failed: {}", self.stage.name(), self.message)
    }
}

/// Outcome of one configured run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub config: ExperimentConfig,
    pub dofs: usize,
    /// mm.
    pub tip_mm: Option<f64>,
    pub profile: Option<Profile>,
    pub error: Option<ErrorReport>,
    pub min_moment_rcond: f64,
    pub global_rcond: f64,
    pub residual: f64,
    /// Stabilisation length actually used (mm).
    pub h_stab: Option<f64>,
    pub diagnostics: Vec<String>,
    pub failure: Option<RunFailure>,
    pub wall_ms: f64,
}

impl RunRecord {
    fn empty(config: &ExperimentConfig) -> Self {
        Self {
            config: config.clone(),
            dofs: 0,
            tip_mm: None,
            profile: None,
            error: None,
            min_moment_rcond: f64::NAN,
            global_rcond: f64::NAN,
            residual: f64::NAN,
            h_stab: None,
            diagnostics: Vec::new(),
            failure: None,
            wall_ms: 0.0,
        }
    }

    pub fn succeeded(&self) -> bool {
        self.failure.is_none()
    }
}

/// Assembled system with boundary rows, before solving.
pub fn build_system(prepared: &Prepared) -> std::result::Result<LinearSystem, RunFailure> {
    let fail = |stage| move |e: Error| RunFailure { stage, node: e.node(), message: e.to_string() };
    let p = prepared;
    let mut system = match p.cloud.dimension() {
        1 => assemble_bar_1d(&p.cloud, &p.material, &p.discretization),
        _ => assemble_navier_3d(&p.cloud, &p.material, &p.discretization),
    }
    .map_err(fail(Stage::Assembly))?;
    p.boundary
        .apply(&mut system, &p.cloud, &p.discretization, &p.material)
        .map_err(fail(Stage::Boundary))?;
    Ok(system)
}

/// Cloud → stencils → assembly → boundary rows → solve → oracle comparison.
/// Stage errors end up in [`RunRecord::failure`].
pub fn run(config: &ExperimentConfig) -> RunRecord {
    let start = Instant::now();
    let mut record = RunRecord::empty(config);
    if let Err(failure) = run_stages(config, &mut record) {
        log::warn!("{} {} n={}: {failure}", config.problem.name(), config.scheme, config.n);
        record.failure = Some(failure);
    }
    record.wall_ms = start.elapsed().as_secs_f64() * 1e3;
    record
}

fn run_stages(config: &ExperimentConfig, record: &mut RunRecord) -> std::result::Result<(), RunFailure> {
    let prepared = prepare(config).map_err(|e| RunFailure { stage: Stage::Setup, node: e.node(), message: e.to_string() })?;
    let system = build_system(&prepared)?;
    record.dofs = system.dof_count();
    record.min_moment_rcond = system.min_moment_rcond;
    record.diagnostics = system.diagnostics.clone();
    record.h_stab = stabilization_length(&prepared);
    let Solution { u, global_rcond, residual_norm, pivot_warnings } = solve_dense(&system)
        .map_err(|e| RunFailure { stage: Stage::Solve, node: e.node(), message: e.to_string() })?;
    record.global_rcond = global_rcond;
    record.residual = residual_norm;
    record.diagnostics.extend(pivot_warnings);
    let dpn = system.dofs_per_node;
    let at = |node: usize| u[node * dpn + prepared.axis_component];
    record.tip_mm = Some(at(prepared.tip_node));
    let profile = Profile::sample_nodes(&prepared.positions, &prepared.axis_nodes, at);
    let report = compare(&profile, &prepared.reference)
        .map_err(|e| RunFailure { stage: Stage::Oracle, node: None, message: e.to_string() })?;
    record.profile = Some(profile);
    record.error = Some(report);
    Ok(())
}

fn stabilization_length(p: &Prepared) -> Option<f64> {
    let stab = p
        .boundary
        .bar_loads
        .iter()
        .map(|l| (l.node, l.stabilization))
        .chain(p.boundary.tractions.iter().map(|t| (t.node, t.stabilization)))
        .next()?;
    match stab.1 {
        Stabilization::Off => None,
        Stabilization::Length(h) => Some(h),
        Stabilization::SupportRadius => crate::cloud::neighbors(&p.cloud, stab.0, p.discretization.support_size)
            .ok()
            .map(|s| s.rmax),
    }
}

impl Profile {
    fn sample_nodes(positions: &[f64], nodes: &[usize], value: impl Fn(usize) -> f64) -> Self {
        Self {
            positions: positions.to_vec(),
            values: nodes.iter().map(|&n| value(n)).collect(),
        }
    }
}

/// One run per support size, in the order given.
pub fn sweep_support_size(config: &ExperimentConfig, n_list: &[usize]) -> Result<Vec<RunRecord>> {
    if n_list.is_empty() {
        return Err(Error::Config("support-size list is empty".into()));
    }
    let config = ExperimentConfig {
        n_list: n_list.to_vec(),
        ..config.clone()
    };
    config.validate()?;
    Ok(n_list.par_iter().map(|&n| run(&config.with_n(n))).collect())
}

/// The legacy reference sweep on the default bar.
pub fn table1() -> Result<Vec<RunRecord>> {
    let config = ExperimentConfig::bar_default();
    sweep_support_size(&config, &config.n_list)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_load_gives_zero_solution() {
        for scheme in [Scheme::Fpm, Scheme::Ppcm, Scheme::Rpcm, Scheme::Sph] {
            let config = ExperimentConfig {
                scheme,
                mode: Mode::Corrected,
                n: 5,
                loading: Loading::EndForce(0.0),
                ..ExperimentConfig::bar_default()
            };
            let record = run(&config);
            assert!(record.succeeded(), "{scheme}: {:?}", record.failure);
            assert!(record.profile.unwrap().values.iter().all(|&v| v == 0.0), "{scheme}");
        }
    }

    #[test]
    fn corrected_bar_single_support() {
        let config = ExperimentConfig { mode: Mode::Corrected, stabilize: false, ..ExperimentConfig::bar_default() };
        let records = sweep_support_size(&config, &[5]).unwrap();
        let tip = records[0].tip_mm.unwrap();
        assert!((tip - 0.02475).abs() / 0.02475 < 0.02, "{tip}");
    }

    #[test]
    fn empty_sweep_is_a_config_error() {
        assert!(matches!(
            sweep_support_size(&ExperimentConfig::bar_default(), &[]),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn failures_are_recorded() {
        let config = ExperimentConfig { n: 200, ..ExperimentConfig::bar_default() };
        let record = run(&config);
        let failure = record.failure.expect("support larger than the cloud");
        assert_eq!(failure.stage, Stage::Assembly);
        assert!(record.tip_mm.is_none());
    }

    #[test]
    fn corrected_mode_rejects_small_supports() {
        let config = ExperimentConfig { mode: Mode::Corrected, n: 2, ..ExperimentConfig::bar_default() };
        assert!(matches!(config.validate(), Err(Error::Config(_))));
    }

    #[test]
    fn beam_setup_matches_reference_layout() {
        let p = prepare(&ExperimentConfig::beam_full()).unwrap();
        assert_eq!(p.cloud.len(), 2500);
        assert_eq!(p.tip_node, 1299);
        assert_eq!(p.cloud.point(1299), [3.0, 3.0, 100.0]);
        let fixed: Vec<usize> = p.boundary.dirichlet.iter().filter(|d| d.axis == 0).map(|d| d.node).collect();
        assert_eq!(fixed, (0..25).map(|r| 100 * r).collect::<Vec<_>>());
        let last = p.boundary.dirichlet.last().unwrap();
        assert_eq!((3 * last.node + last.axis, last.value), (3898, 5.0));
        assert_eq!(p.axis_nodes.first(), Some(&1200));
        assert_eq!(p.axis_nodes.last(), Some(&1299));
    }
}
