//! N-particle minimization of the discretized energy
//! `(1/N²) Σ_{i≠j} K_s(x_i - x_j) + (2/N) Σ_i γ|x_i|²`.
//!
//! Projected gradient descent with a halving line search. Pair sums use
//! compensated summation in a fixed index order, so results are bit-identical
//! across runs and execution strategies.

use std::io::{self, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measures::{radial_cdf, RadialMeasure};
use crate::par::Execution;
use crate::riesz::{critical_radius, ProblemSpec};

/// Neumaier compensated sum.
#[derive(Debug, Clone, Copy, Default)]
struct Compensated {
    sum: f64,
    carry: f64,
}

impl Compensated {
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(self) -> f64 {
        self.sum + self.carry
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Constraint {
    /// Radial projection onto the ball of the problem's radius after each step.
    #[default]
    Ball,
    Free,
}

impl std::str::FromStr for Constraint {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ball" => Ok(Constraint::Ball),
            "free" => Ok(Constraint::Free),
            other => Err(Error::InvalidParameter(format!(
                "unknown constraint '{other}'; valid: ball, free"
            ))),
        }
    }
}

/// Points in `R^d` stored row-major, with the problem they belong to.
#[derive(Debug, Clone, PartialEq)]
pub struct ParticleSystem {
    spec: ProblemSpec,
    dim: usize,
    positions: Vec<f64>,
}

impl ParticleSystem {
    /// Validates that positions are finite, `n >= 1` points of dimension `d`,
    /// and pairwise distinct.
    pub fn new(spec: ProblemSpec, positions: Vec<f64>) -> Result<Self> {
        let dim = spec.params.d() as usize;
        if positions.is_empty() || !positions.len().is_multiple_of(dim) {
            return Err(Error::InvalidParameter(format!(
                "{} coordinates do not form points of dimension {dim}",
                positions.len()
            )));
        }
        if positions.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidParameter("positions must be finite".into()));
        }
        let ps = ParticleSystem { spec, dim, positions };
        if let Some((i, j)) = ps.coincident_pair() {
            return Err(coincident(i, j));
        }
        Ok(ps)
    }

    /// `n` points uniform in the ball of radius `R` (ball constraint) or `2R`
    /// (free), deterministic in `seed`.
    pub fn sample(spec: ProblemSpec, n: usize, constraint: Constraint, seed: u64) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter("particle count must be at least 1".into()));
        }
        let dim = spec.params.d() as usize;
        let radius = match constraint {
            Constraint::Ball => spec.radius,
            Constraint::Free => 2.0 * spec.radius,
        };
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut positions = Vec::with_capacity(n * dim);
        let mut dir = vec![0.0; dim];
        for _ in 0..n {
            let norm = loop {
                dir.iter_mut().for_each(|c| *c = rng.sample(StandardNormal));
                let norm = dir.iter().map(|c| c * c).sum::<f64>().sqrt();
                if norm > 0.0 {
                    break norm;
                }
            };
            let r = radius * rng.random::<f64>().powf(1.0 / dim as f64);
            positions.extend(dir.iter().map(|c| c / norm * r));
        }
        ParticleSystem::new(spec, positions)
    }

    pub fn spec(&self) -> &ProblemSpec {
        &self.spec
    }

    pub fn n(&self) -> usize {
        self.positions.len() / self.dim
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// All coordinates, row-major.
    pub fn positions(&self) -> &[f64] {
        &self.positions
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.positions[i * self.dim..(i + 1) * self.dim]
    }

    pub fn radii(&self) -> Vec<f64> {
        self.positions.chunks(self.dim).map(norm).collect()
    }

    /// `max |x_i|`.
    pub fn support_radius(&self) -> f64 {
        self.radii().into_iter().fold(0.0, f64::max)
    }

    fn coincident_pair(&self) -> Option<(usize, usize)> {
        let n = self.n();
        (0..n).find_map(|i| ((i + 1)..n).find(|&j| self.point(i) == self.point(j)).map(|j| (i, j)))
    }
}

fn coincident(i: usize, j: usize) -> Error {
    Error::domain("discrete_energy", format!("particles {i} and {j} coincide"))
}

fn norm(x: &[f64]) -> f64 {
    x.iter().map(|c| c * c).sum::<f64>().sqrt()
}

fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

fn pair_kernel(s: f64, dist: f64) -> f64 {
    if s == 0.0 {
        -dist.ln()
    } else if s == -1.0 {
        -dist
    } else if s == 1.0 {
        1.0 / dist
    } else {
        s.signum() * dist.powf(-s)
    }
}

/// `c` with `∇K_s(x) = c x`, that is `-|s| |x|^{-s-2}` or `-1/|x|²` at `s = 0`.
fn pair_gradient_factor(s: f64, dist: f64) -> f64 {
    if s == 0.0 {
        -1.0 / (dist * dist)
    } else if s == -1.0 {
        -1.0 / dist
    } else if s == 1.0 {
        -1.0 / (dist * dist * dist)
    } else {
        -s.abs() * dist.powf(-s - 2.0)
    }
}

/// Diagonal-removed plug-in energy of the empirical measure.
pub fn discrete_energy(ps: &ParticleSystem) -> Result<f64> {
    discrete_energy_with(ps, Execution::Sequential)
}

/// [`discrete_energy`] with rows of the pair sum distributed by `exec`.
pub fn discrete_energy_with(ps: &ParticleSystem, exec: Execution) -> Result<f64> {
    let n = ps.n();
    let s = ps.spec.params.s();
    let rows = exec.map_indexed(n, |i| -> Result<f64> {
        let xi = ps.point(i);
        let mut acc = Compensated::default();
        for j in (i + 1)..n {
            let dist = distance(xi, ps.point(j));
            if dist == 0.0 {
                return Err(coincident(i, j));
            }
            acc.add(pair_kernel(s, dist));
        }
        Ok(acc.value())
    });
    let mut pairs = Compensated::default();
    for row in rows {
        pairs.add(row?);
    }
    let mut field = Compensated::default();
    for i in 0..n {
        let r = norm(ps.point(i));
        field.add(ps.spec.field(r));
    }
    let nf = n as f64;
    Ok(2.0 * pairs.value() / (nf * nf) + 2.0 * field.value() / nf)
}

/// Analytic gradient, row-major like the positions.
pub fn energy_gradient(ps: &ParticleSystem) -> Result<Vec<f64>> {
    energy_gradient_with(ps, Execution::Sequential)
}

/// [`energy_gradient`] with particles distributed by `exec`.
pub fn energy_gradient_with(ps: &ParticleSystem, exec: Execution) -> Result<Vec<f64>> {
    let n = ps.n();
    let dim = ps.dim;
    let s = ps.spec.params.s();
    let nf = n as f64;
    let pair_scale = 2.0 / (nf * nf);
    let field_scale = 4.0 * ps.spec.gamma / nf;
    let rows = exec.map_indexed(n, |i| -> Result<Vec<f64>> {
        let xi = ps.point(i);
        let mut acc = vec![Compensated::default(); dim];
        let mut diff = vec![0.0; dim];
        for j in (0..n).filter(|&j| j != i) {
            let xj = ps.point(j);
            diff.iter_mut()
                .zip(xi.iter().zip(xj))
                .for_each(|(d, (a, b))| *d = a - b);
            let dist = norm(&diff);
            if dist == 0.0 {
                return Err(coincident(i.min(j), i.max(j)));
            }
            let c = pair_gradient_factor(s, dist);
            acc.iter_mut().zip(&diff).for_each(|(a, d)| a.add(c * d));
        }
        Ok(acc
            .iter()
            .zip(xi)
            .map(|(a, x)| pair_scale * a.value() + field_scale * x)
            .collect())
    });
    let mut out = Vec::with_capacity(n * dim);
    for row in rows {
        out.extend(row?);
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MinimizerConfig {
    pub max_steps: usize,
    pub step_init: f64,
    /// Factor applied to the step after a rejected trial.
    pub shrink: f64,
    /// Stop once the root-mean-square of `N ∇_i E` (projected onto the
    /// feasible directions) falls below this.
    pub grad_tol: f64,
    pub seed: u64,
    pub constraint: Constraint,
    #[serde(default)]
    pub exec: Execution,
}

impl Default for MinimizerConfig {
    fn default() -> Self {
        MinimizerConfig {
            max_steps: 5000,
            step_init: 1.0,
            shrink: 0.5,
            grad_tol: 1e-8,
            seed: 0,
            constraint: Constraint::Ball,
            exec: Execution::default(),
        }
    }
}

impl MinimizerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_steps < 1 {
            return Err(Error::InvalidParameter("max_steps must be at least 1".into()));
        }
        if !(self.shrink > 0.0 && self.shrink < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "shrink = {} must lie in (0, 1)",
                self.shrink
            )));
        }
        if !(self.step_init > 0.0) || !self.step_init.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "step_init = {} must be positive",
                self.step_init
            )));
        }
        if !(self.grad_tol > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "grad_tol = {} must be positive",
                self.grad_tol
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    GradTol,
    MaxSteps,
    StepUnderflow,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    /// Radial KS distance to the arcsine law of the problem; absent when the
    /// problem is not in the `s = d - 3` regime.
    pub ks_distance: Option<f64>,
    pub support_radius: f64,
    /// Support radius of the target law.
    pub target_radius: Option<f64>,
    pub final_energy: f64,
    pub steps_used: usize,
    pub converged: bool,
    pub stop_reason: StopReason,
}

/// Accepted-step energies and optional position snapshots of one run.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Trace {
    /// Energy before the first step and after every accepted step.
    pub energies: Vec<f64>,
    /// `(step, positions)` at step 0, every `snapshot_every` steps, and at the end.
    pub snapshots: Vec<(usize, Vec<f64>)>,
}

/// The arcsine law the minimizer should approach: radius `min(R, R_crit)` for
/// `s = d - 3` with `γ > 0`.
pub fn target_measure(spec: &ProblemSpec, constraint: Constraint) -> Option<RadialMeasure> {
    if !spec.params.is_field_regime() || !(spec.gamma > 0.0) {
        return None;
    }
    let d = spec.params.d();
    let critical = critical_radius(d, spec.gamma).ok()?;
    let radius = match constraint {
        Constraint::Ball => critical.min(spec.radius),
        Constraint::Free => critical,
    };
    RadialMeasure::radial_arcsine(d, radius).ok()
}

/// Projected gradient descent from `ps`.
pub fn minimize(ps: &ParticleSystem, config: &MinimizerConfig) -> Result<(ParticleSystem, FitReport)> {
    let (out, report, _) = minimize_traced(ps, config, None)?;
    Ok((out, report))
}

fn project(positions: &mut [f64], dim: usize, radius: f64) {
    for x in positions.chunks_mut(dim) {
        let r = norm(x);
        if r > radius {
            let f = radius / r;
            x.iter_mut().for_each(|c| *c *= f);
        }
    }
}

/// Root-mean-square of `N ∇_i E`, dropping outward-pushing radial components
/// of particles held on the sphere.
fn stationarity(ps: &ParticleSystem, grad: &[f64], ball: Option<f64>) -> f64 {
    let n = ps.n() as f64;
    let mut total = Compensated::default();
    for (x, g) in ps.positions.chunks(ps.dim).zip(grad.chunks(ps.dim)) {
        let mut g2: f64 = g.iter().map(|c| c * c).sum();
        if let Some(radius) = ball {
            let r = norm(x);
            let radial: f64 = x.iter().zip(g).map(|(a, b)| a * b).sum::<f64>();
            // descent direction -g points outward when x·g < 0
            if r >= radius * (1.0 - 1e-12) && radial < 0.0 {
                g2 -= radial * radial / (r * r);
            }
        }
        total.add(g2.max(0.0));
    }
    (total.value() * n).sqrt()
}

/// [`minimize`] that also records accepted energies and snapshots.
pub fn minimize_traced(
    ps: &ParticleSystem,
    config: &MinimizerConfig,
    snapshot_every: Option<usize>,
) -> Result<(ParticleSystem, FitReport, Trace)> {
    config.validate()?;
    let exec = config.exec;
    let ball = match config.constraint {
        Constraint::Ball => Some(ps.spec.radius),
        Constraint::Free => None,
    };
    let mut current = ps.clone();
    if let Some(radius) = ball {
        project(&mut current.positions, current.dim, radius);
        if let Some((i, j)) = current.coincident_pair() {
            return Err(coincident(i, j));
        }
    }
    let mut energy = discrete_energy_with(&current, exec)?;
    let mut trace = Trace {
        energies: vec![energy],
        snapshots: vec![(0, current.positions.clone())],
    };
    let mut step = config.step_init;
    let mut steps_used = 0;
    let mut stop_reason = StopReason::MaxSteps;
    let mut trial = current.clone();
    while steps_used < config.max_steps {
        let grad = energy_gradient_with(&current, exec)?;
        if stationarity(&current, &grad, ball) <= config.grad_tol {
            stop_reason = StopReason::GradTol;
            break;
        }
        let scale = current.support_radius().max(ps.spec.radius);
        let gmax = grad.chunks(current.dim).map(norm).fold(0.0, f64::max);
        let accepted = loop {
            if step * gmax <= 1e-15 * scale {
                break false;
            }
            trial
                .positions
                .iter_mut()
                .zip(current.positions.iter().zip(&grad))
                .for_each(|(t, (x, g))| *t = x - step * g);
            if let Some(radius) = ball {
                project(&mut trial.positions, trial.dim, radius);
            }
            match discrete_energy_with(&trial, exec) {
                Ok(e) if e < energy => {
                    energy = e;
                    break true;
                }
                _ => step *= config.shrink,
            }
        };
        if !accepted {
            stop_reason = StopReason::StepUnderflow;
            break;
        }
        std::mem::swap(&mut current, &mut trial);
        steps_used += 1;
        trace.energies.push(energy);
        if snapshot_every.is_some_and(|k| k > 0 && steps_used % k == 0) {
            trace.snapshots.push((steps_used, current.positions.clone()));
        }
        step /= config.shrink;
    }
    if trace.snapshots.last().map(|s| s.0) != Some(steps_used) {
        trace.snapshots.push((steps_used, current.positions.clone()));
    }
    let target = target_measure(&current.spec, config.constraint);
    let report = FitReport {
        ks_distance: target.as_ref().map(|m| radial_ks(&current, m)),
        support_radius: current.support_radius(),
        target_radius: target.as_ref().map(RadialMeasure::support_radius),
        final_energy: energy,
        steps_used,
        converged: stop_reason == StopReason::GradTol,
        stop_reason,
    };
    Ok((current, report, trace))
}

/// `sup_r |F_N(r) - F(r)|` between the empirical CDF of the particle radii and
/// the radial CDF of `target`. Meaningful for `N >= 10`.
pub fn radial_ks(ps: &ParticleSystem, target: &RadialMeasure) -> f64 {
    let mut radii = ps.radii();
    radii.sort_by(f64::total_cmp);
    let n = radii.len() as f64;
    let mut sup: f64 = 0.0;
    for (i, &r) in radii.iter().enumerate() {
        let f = radial_cdf(target, r);
        sup = sup.max((i as f64 + 1.0) / n - f).max(f - i as f64 / n);
    }
    sup.clamp(0.0, 1.0)
}

/// Free-space run in the `s = d - 3` regime, started in the ball of radius
/// `2 R_crit` and compared with the arcsine law on `B(R_crit)`.
pub fn conjecture_probe(d: u32, gamma: f64, n: usize, config: &MinimizerConfig) -> Result<FitReport> {
    if !(2..=6).contains(&d) {
        return Err(Error::InvalidParameter(format!(
            "probe dimension must lie in 2..=6, got {d}"
        )));
    }
    if !(gamma > 0.0) || !gamma.is_finite() {
        return Err(Error::InvalidParameter(format!("gamma = {gamma} must be positive")));
    }
    let spec = ProblemSpec::critical(d, gamma)?;
    let config = MinimizerConfig {
        constraint: Constraint::Free,
        ..*config
    };
    let ps = ParticleSystem::sample(spec, n, Constraint::Free, config.seed)?;
    Ok(minimize(&ps, &config)?.1)
}

/// Writes snapshots as CSV rows `step,particle_index,x_1,...,x_d` under a
/// column header, with 17 significant digits.
pub fn write_snapshots_csv<W: Write>(mut out: W, dim: usize, snapshots: &[(usize, Vec<f64>)]) -> io::Result<()> {
    write!(out, "step,particle_index")?;
    for k in 1..=dim {
        write!(out, ",x_{k}")?;
    }
    writeln!(out)?;
    for (step, positions) in snapshots {
        for (i, x) in positions.chunks(dim).enumerate() {
            write!(out, "{step},{i}")?;
            for c in x {
                write!(out, ",{c:.16e}")?;
            }
            writeln!(out)?;
        }
    }
    Ok(())
}
