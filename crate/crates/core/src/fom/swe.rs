//! One-dimensional shallow water equations with linear friction,
//!
//! ```text
//! h_t + (hu)_x = 0
//! (hu)_t + (hu² + ½ g h²)_x = −(ν/λ) u
//! ```
//!
//! on the periodic interval `[−1, 1]`. Finite volumes with minmod-limited
//! linear reconstruction of the conserved variables, local Lax-Friedrichs
//! interface fluxes and two-stage SSP Runge-Kutta; the source is evaluated
//! inside each stage.
//!
//! The `nodes` grid points include both ends of the interval, which are the
//! same physical point, so there are `nodes − 1` cells of width
//! `2/(nodes − 1)` centered on the nodes. Stored snapshots repeat the first
//! cell in the last row.

use alloc::string::String;
use alloc::vec::Vec;

#[allow(unused_imports)] // shadowed by std inherent methods when std is linked
use num_traits::Float;
use serde::{Deserialize, Serialize};

use super::{single_viscosity, FomError, FomProvider};
use crate::linalg::Matrix;
use crate::pod::SnapshotMatrix;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweConfig {
    pub nodes: usize,
    /// Mean-free path `λ`.
    pub lambda: f64,
    /// Gravitational acceleration in nondimensional units.
    pub g: f64,
    pub cfl: f64,
}

impl Default for SweConfig {
    fn default() -> Self {
        Self {
            nodes: 601,
            lambda: 0.1,
            g: 1.0,
            cfl: 0.4,
        }
    }
}

impl SweConfig {
    pub fn validate(&self) -> Result<(), FomError> {
        if self.nodes < 4 {
            return Err(FomError::ConfigError("swe needs at least 4 nodes".into()));
        }
        if !(self.lambda > 0.0 && self.lambda.is_finite()) {
            return Err(FomError::ConfigError("lambda must be positive".into()));
        }
        if !(self.g > 0.0 && self.g.is_finite()) {
            return Err(FomError::ConfigError("g must be positive".into()));
        }
        if !(self.cfl > 0.0 && self.cfl < 1.0) {
            return Err(FomError::ConfigError("cfl must lie in (0, 1)".into()));
        }
        Ok(())
    }

    pub fn cells(&self) -> usize {
        self.nodes - 1
    }

    pub fn dx(&self) -> f64 {
        2.0 / self.cells() as f64
    }

    /// Node coordinates, both endpoints included.
    pub fn node_coordinates(&self) -> Vec<f64> {
        let dx = self.dx();
        (0..self.nodes)
            .map(|i| if i + 1 == self.nodes { 1.0 } else { -1.0 + dx * i as f64 })
            .collect()
    }
}

/// `h(0, x) = 1 + exp(3 cos(π(x + 0.5)) − 4)`.
pub fn initial_height(x: f64) -> f64 {
    1.0 + (3.0 * (core::f64::consts::PI * (x + 0.5)).cos() - 4.0).exp()
}

pub const INITIAL_VELOCITY: f64 = 0.25;

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SweDiagnostics {
    /// `Σ h_i Δx` at every storage time.
    pub mass: Vec<f64>,
    pub steps: usize,
    pub max_wave_speed: f64,
    pub min_dt: f64,
}

impl SweDiagnostics {
    /// Largest relative deviation of the mass from its initial value.
    pub fn mass_drift(&self) -> f64 {
        let Some(&m0) = self.mass.first() else {
            return 0.0;
        };
        self.mass
            .iter()
            .fold(0.0, |d, &m| d.max((m - m0).abs() / m0.abs()))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweSolution {
    pub height: SnapshotMatrix,
    pub velocity: SnapshotMatrix,
    pub diagnostics: SweDiagnostics,
}

/// Solves from the smooth-bump initial state.
pub fn swe_solve(cfg: &SweConfig, nu: f64, time_grid: &[f64]) -> Result<SweSolution, FomError> {
    cfg.validate()?;
    let x = cfg.node_coordinates();
    let h0: Vec<f64> = x[..cfg.cells()].iter().map(|&x| initial_height(x)).collect();
    let q0: Vec<f64> = h0.iter().map(|h| h * INITIAL_VELOCITY).collect();
    swe_solve_from(cfg, nu, time_grid, h0, q0)
}

/// Solves from given cell values of `h` and `hu` (length `nodes − 1`).
pub fn swe_solve_from(
    cfg: &SweConfig,
    nu: f64,
    time_grid: &[f64],
    h0: Vec<f64>,
    q0: Vec<f64>,
) -> Result<SweSolution, FomError> {
    cfg.validate()?;
    if !(nu >= 0.0 && nu.is_finite()) {
        return Err(FomError::ConfigError("viscosity must be nonnegative".into()));
    }
    let m = cfg.cells();
    if h0.len() != m || q0.len() != m {
        return Err(FomError::ConfigError("initial state length must equal cell count".into()));
    }
    if time_grid.is_empty() || time_grid[0] < 0.0 || time_grid.windows(2).any(|w| w[1] < w[0]) {
        return Err(FomError::ConfigError("time grid must be nonnegative and nondecreasing".into()));
    }

    let mut solver = Solver::new(cfg, nu, h0, q0);
    let nodes = cfg.nodes;
    let mut hdata = Matrix::zeros(nodes, time_grid.len());
    let mut udata = Matrix::zeros(nodes, time_grid.len());
    let mut diag = SweDiagnostics {
        min_dt: f64::INFINITY,
        ..Default::default()
    };

    for (k, &target) in time_grid.iter().enumerate() {
        solver.advance_to(target, &mut diag)?;
        let hc = hdata.column_mut(k);
        hc[..m].copy_from_slice(&solver.h);
        hc[m] = solver.h[0];
        let uc = udata.column_mut(k);
        for i in 0..m {
            uc[i] = solver.q[i] / solver.h[i];
        }
        uc[m] = uc[0];
        diag.mass.push(solver.mass());
    }

    let param = alloc::vec![nu];
    Ok(SweSolution {
        height: SnapshotMatrix::new(hdata, time_grid.to_vec(), param.clone(), "h")?,
        velocity: SnapshotMatrix::new(udata, time_grid.to_vec(), param, "u")?,
        diagnostics: diag,
    })
}

struct Solver {
    dx: f64,
    g: f64,
    cfl: f64,
    friction: f64,
    t: f64,
    h: Vec<f64>,
    q: Vec<f64>,
    // stage buffers
    h1: Vec<f64>,
    q1: Vec<f64>,
    rh: Vec<f64>,
    rq: Vec<f64>,
    sh: Vec<f64>,
    sq: Vec<f64>,
    fh: Vec<f64>,
    fq: Vec<f64>,
}

#[inline]
fn minmod(a: f64, b: f64) -> f64 {
    if a * b <= 0.0 {
        0.0
    } else if a.abs() < b.abs() {
        a
    } else {
        b
    }
}

impl Solver {
    fn new(cfg: &SweConfig, nu: f64, h: Vec<f64>, q: Vec<f64>) -> Self {
        let m = h.len();
        Self {
            dx: cfg.dx(),
            g: cfg.g,
            cfl: cfg.cfl,
            friction: nu / cfg.lambda,
            t: 0.0,
            h,
            q,
            h1: alloc::vec![0.0; m],
            q1: alloc::vec![0.0; m],
            rh: alloc::vec![0.0; m],
            rq: alloc::vec![0.0; m],
            sh: alloc::vec![0.0; m],
            sq: alloc::vec![0.0; m],
            fh: alloc::vec![0.0; m],
            fq: alloc::vec![0.0; m],
        }
    }

    fn mass(&self) -> f64 {
        self.h.iter().sum::<f64>() * self.dx
    }

    fn max_speed(&self) -> f64 {
        self.h
            .iter()
            .zip(&self.q)
            .fold(0.0, |s, (&h, &q)| s.max((q / h).abs() + (self.g * h).sqrt()))
    }

    fn advance_to(&mut self, target: f64, diag: &mut SweDiagnostics) -> Result<(), FomError> {
        let eps = 1e-12 * target.abs().max(1.0);
        while self.t < target - eps {
            let speed = self.max_speed();
            diag.max_wave_speed = diag.max_wave_speed.max(speed);
            let mut dt = self.cfl * self.dx / speed;
            if !(dt > 0.0 && dt.is_finite()) {
                return Err(FomError::CflViolation { time: self.t, dt });
            }
            let last = self.t + dt >= target - eps;
            if last {
                dt = target - self.t;
            }
            self.ssp_rk2(dt)?;
            diag.steps += 1;
            diag.min_dt = diag.min_dt.min(dt);
            self.t = if last { target } else { self.t + dt };
        }
        self.t = self.t.max(target);
        Ok(())
    }

    fn ssp_rk2(&mut self, dt: f64) -> Result<(), FomError> {
        // Stage 1: U1 = U + dt L(U)
        rhs(self, false);
        for i in 0..self.h.len() {
            self.h1[i] = self.h[i] + dt * self.rh[i];
            self.q1[i] = self.q[i] + dt * self.rq[i];
        }
        self.check(&self.h1)?;
        // Stage 2: U = ½U + ½(U1 + dt L(U1))
        rhs(self, true);
        for i in 0..self.h.len() {
            self.h[i] = 0.5 * self.h[i] + 0.5 * (self.h1[i] + dt * self.rh[i]);
            self.q[i] = 0.5 * self.q[i] + 0.5 * (self.q1[i] + dt * self.rq[i]);
        }
        self.check(&self.h)
    }

    fn check(&self, h: &[f64]) -> Result<(), FomError> {
        match h.iter().position(|&v| !(v > 0.0 && v.is_finite())) {
            Some(cell) => Err(FomError::NonPositiveDepth {
                cell,
                time: self.t,
                depth: h[cell],
            }),
            None => Ok(()),
        }
    }
}

/// Fills `rh`, `rq` with the semi-discrete right-hand side evaluated at the
/// current state (`stage = false`) or the first-stage state.
fn rhs(s: &mut Solver, stage: bool) {
    let (h, q) = if stage { (&s.h1, &s.q1) } else { (&s.h, &s.q) };
    let m = h.len();
    let g = s.g;

    for i in 0..m {
        let ip = if i + 1 == m { 0 } else { i + 1 };
        let im = if i == 0 { m - 1 } else { i - 1 };
        s.sh[i] = minmod(h[ip] - h[i], h[i] - h[im]);
        s.sq[i] = minmod(q[ip] - q[i], q[i] - q[im]);
    }

    // fh[i], fq[i]: flux through the interface between cells i and i+1.
    for i in 0..m {
        let ip = if i + 1 == m { 0 } else { i + 1 };
        let hl = h[i] + 0.5 * s.sh[i];
        let ql = q[i] + 0.5 * s.sq[i];
        let hr = h[ip] - 0.5 * s.sh[ip];
        let qr = q[ip] - 0.5 * s.sq[ip];
        let ul = ql / hl;
        let ur = qr / hr;
        let a = (ul.abs() + (g * hl).sqrt()).max(ur.abs() + (g * hr).sqrt());
        let fl_h = ql;
        let fr_h = qr;
        let fl_q = ql * ul + 0.5 * g * hl * hl;
        let fr_q = qr * ur + 0.5 * g * hr * hr;
        s.fh[i] = 0.5 * (fl_h + fr_h) - 0.5 * a * (hr - hl);
        s.fq[i] = 0.5 * (fl_q + fr_q) - 0.5 * a * (qr - ql);
    }

    let inv_dx = 1.0 / s.dx;
    for i in 0..m {
        let im = if i == 0 { m - 1 } else { i - 1 };
        s.rh[i] = -(s.fh[i] - s.fh[im]) * inv_dx;
        s.rq[i] = -(s.fq[i] - s.fq[im]) * inv_dx - s.friction * q[i] / h[i];
    }
}

#[derive(Clone, Debug)]
pub struct SweProvider {
    cfg: SweConfig,
    nodes: Vec<f64>,
}

impl SweProvider {
    pub fn new(cfg: SweConfig) -> Result<Self, FomError> {
        cfg.validate()?;
        let nodes = cfg.node_coordinates();
        Ok(Self { cfg, nodes })
    }

    pub fn config(&self) -> &SweConfig {
        &self.cfg
    }
}

impl FomProvider for SweProvider {
    fn component_labels(&self) -> Vec<String> {
        alloc::vec!["h".into(), "u".into()]
    }

    fn spatial_grid(&self) -> &[f64] {
        &self.nodes
    }

    fn solve(&self, mu: &[f64], time_grid: &[f64]) -> Result<Vec<SnapshotMatrix>, FomError> {
        let nu = single_viscosity(mu)?;
        let sol = swe_solve(&self.cfg, nu, time_grid)?;
        Ok(alloc::vec![sol.height, sol.velocity])
    }
}
