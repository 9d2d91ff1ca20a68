//! Experiments on the two test problems: noisy data, oracle checks of the symbol and of
//! the convolution identity, reconstruction errors against the exact solution, and
//! convergence tables over the noise level.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::time::Instant;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fields::{
    fmt_num, l2_distance, l2_norm, require_same_grid, sample, write_csv, write_field, GridSpec, RealField,
};
use crate::kernels::{s_hat, s_hat_shorthand, KernelSpec, ProblemId, SymbolQuadrature, TestProblem};
use crate::regularizer::{
    assemble_rhs, bound_report, spectral_grid, BoundReport, Mode, Reconstruction, Reconstructor, RegParams,
    DATA_TERM_COEFFICIENT,
};
use crate::sinc::{build_expansion, eval_expansion, sinc_mesh, IndexSet, SincExpansion};
use crate::transform::{convolve2_causal, dft2_forward};

/// Attempts at drawing a nonzero noise field before giving up.
pub const NOISE_ATTEMPTS: u64 = 8;

/// Mixed into the seed for the noise on `g`, so `f` and `g` get independent streams.
const G_STREAM: u64 = 0x9e37_79b9_7f4a_7c15;

/// Adds seeded Gaussian white noise rescaled to discrete L2 size exactly `epsilon`.
///
/// The stream is ChaCha20 seeded with `seed_from_u64(seed)`, drawn node by node in
/// storage order through a standard normal sampler.
pub fn perturb(field: &RealField, epsilon: f64, seed: u64) -> Result<RealField> {
    if !(epsilon >= 0.0 && epsilon.is_finite()) {
        return Err(Error::Parameter(format!(
            "noise level must be finite and nonnegative, got {epsilon}"
        )));
    }
    if epsilon == 0.0 {
        return Ok(field.clone());
    }
    let grid = *field.grid();
    for attempt in 0..NOISE_ATTEMPTS {
        let mut rng = ChaCha20Rng::seed_from_u64(seed.wrapping_add(attempt));
        let noise: Vec<f64> = (0..grid.len()).map(|_| rng.sample(StandardNormal)).collect();
        let noise = RealField::new(grid, noise)?;
        let size = l2_norm(&noise);
        if size > 0.0 {
            return field.combine(1.0, &noise, epsilon / size);
        }
        log::warn!(
            "noise draw with seed {} was identically zero; retrying",
            seed.wrapping_add(attempt)
        );
    }
    Err(Error::Numerical(format!(
        "{NOISE_ATTEMPTS} consecutive zero noise draws starting at seed {seed}"
    )))
}

/// Samples of the exact surface temperature suited to quadrature on `grid`.
///
/// P1's solution `(1/t) e^{-x^2/4t}` has an integrable singularity at the origin, so it is
/// represented by cell means; point samples would miss its local mass. P2's solution is
/// smooth and is point-sampled like the data.
pub fn sample_solution(problem: TestProblem, grid: &GridSpec) -> Result<RealField> {
    match problem.id {
        ProblemId::P1 => {
            let (hx, ht) = (0.5 * grid.dx, 0.5 * grid.dt);
            let area = grid.cell_area();
            sample(
                |x, t| {
                    problem
                        .v_cell_integral(x - hx, x + hx, t - ht, t + ht)
                        .unwrap_or(f64::NAN)
                        / area
                },
                grid,
            )
        }
        ProblemId::P2 => sample(|x, t| problem.v_exact(x, t), grid),
    }
}

/// Relative L2 residual of `S * v = 2 R * f - S * g + 4 pi f` on `out_grid`.
///
/// `v`, `f`, `g` share one grid that must contain `out_grid` as a sub-lattice.
pub fn residual_eq12(v: &RealField, f: &RealField, g: &RealField, out_grid: &GridSpec) -> Result<f64> {
    require_same_grid(v.grid(), f.grid())?;
    require_same_grid(v.grid(), g.grid())?;
    let f_out = f.restrict(out_grid)?;
    let lhs = convolve2_causal(KernelSpec::S, v, out_grid)?;
    let rf = convolve2_causal(KernelSpec::R, f, out_grid)?;
    let sg = convolve2_causal(KernelSpec::S, g, out_grid)?;
    let rhs = rf
        .combine(2.0, &sg, -1.0)?
        .combine(1.0, &f_out, DATA_TERM_COEFFICIENT)?;
    Ok(l2_distance(&lhs, &rhs)? / l2_norm(&rhs).max(1e-300))
}

/// Grid for residual checks: the spacing of `out_grid`, refined by integer factors, over
/// `|x| <= half_width` and from just above `t = 0` to the end of `out_grid`. Its lattice
/// contains `out_grid`.
pub fn residual_grid(out_grid: &GridSpec, refine_x: usize, refine_t: usize, half_width: f64) -> Result<GridSpec> {
    if refine_x == 0 || refine_t == 0 {
        return Err(Error::Grid("refinement factors must be positive".into()));
    }
    if out_grid.t0 <= 0.0 {
        return Err(Error::Grid(format!(
            "residual window must start at t > 0, got {}",
            out_grid.t0
        )));
    }
    let dx = out_grid.dx / refine_x as f64;
    let dt = out_grid.dt / refine_t as f64;
    let ix0 = ((out_grid.x0 + half_width) / dx).ceil() as usize;
    let x0 = out_grid.x0 - ix0 as f64 * dx;
    let nx = ix0 + ((half_width - out_grid.x0) / dx).floor() as usize + 1;
    let it0 = (out_grid.t0 / dt).floor() as usize;
    let t0 = out_grid.t0 - it0 as f64 * dt;
    let nt = it0 + (out_grid.nt - 1) * refine_t + 1;
    let g = GridSpec::new(x0, dx, nx.max(ix0 + (out_grid.nx - 1) * refine_x + 1), t0, dt, nt)?;
    Ok(g)
}

/// Residual of the exact triple of a test problem, and of the sign-flipped solution.
#[derive(Debug, Clone, Copy)]
pub struct ResidualCheck {
    pub exact: f64,
    pub wrong_sign: f64,
}

pub fn problem_residual(problem: TestProblem, out_grid: &GridSpec) -> Result<ResidualCheck> {
    let grid = residual_grid(out_grid, 1, 1, 16.0)?;
    let f = sample(|x, t| problem.f0(x, t), &grid)?;
    let g = sample(|x, t| problem.g0(x, t), &grid)?;
    let v = sample_solution(problem, &grid)?;
    Ok(ResidualCheck {
        exact: residual_eq12(&v, &f, &g, out_grid)?,
        wrong_sign: residual_eq12(&v.scale(-1.0)?, &f, &g, out_grid)?,
    })
}

#[derive(Debug, Clone, Copy)]
pub struct SymbolRow {
    pub z: f64,
    pub r: f64,
    pub closed: Complex64,
    pub quadrature: Complex64,
    pub rel_err: f64,
    /// The real shorthand `2 e^{-sqrt(r^2 + z^4)}` and its relative distance to the quadrature.
    pub shorthand: f64,
    pub shorthand_rel_dev: f64,
}

#[derive(Debug, Clone)]
pub struct SymbolValidation {
    pub rows: Vec<SymbolRow>,
    pub max_rel_err: f64,
}

/// The 25 frequencies `{0, +-1, +-2}^2`.
pub fn default_symbol_points() -> Vec<(f64, f64)> {
    let v = [-2.0, -1.0, 0.0, 1.0, 2.0];
    v.iter().flat_map(|&z| v.iter().map(move |&r| (z, r))).collect()
}

/// Compares `closed` with the quadrature of the defining integral of S at each point.
pub fn validate_s_hat_with<C>(points: &[(f64, f64)], quad: &SymbolQuadrature, closed: C) -> SymbolValidation
where
    C: Fn(f64, f64) -> Complex64,
{
    let mut rows = Vec::with_capacity(points.len());
    let mut max_rel_err = 0.0f64;
    for &(z, r) in points {
        let exact = closed(z, r);
        if exact.norm() == 0.0 {
            log::warn!("closed form vanishes at ({z}, {r}); point skipped");
            continue;
        }
        let q = quad.symbol(KernelSpec::S, z, r);
        let rel_err = (q - exact).norm() / exact.norm();
        let shorthand = s_hat_shorthand(z, r);
        max_rel_err = max_rel_err.max(rel_err);
        rows.push(SymbolRow {
            z,
            r,
            closed: exact,
            quadrature: q,
            rel_err,
            shorthand,
            shorthand_rel_dev: (Complex64::new(shorthand, 0.0) - q).norm() / q.norm(),
        });
    }
    SymbolValidation { rows, max_rel_err }
}

pub fn validate_s_hat(points: &[(f64, f64)], quad: &SymbolQuadrature) -> SymbolValidation {
    validate_s_hat_with(points, quad, s_hat)
}

/// Residual of `F^ = kappa S^ v^` on P1 for the two candidate constants.
#[derive(Debug, Clone, Copy)]
pub struct KappaCalibration {
    pub residual_two_pi: f64,
    pub residual_one: f64,
}

impl KappaCalibration {
    pub fn ratio(&self) -> f64 {
        self.residual_one / self.residual_two_pi
    }
}

/// Transforms `F` and the exact `v` of P1 sampled on `data_grid` and measures
/// `|F^ - kappa S^ v^| / |F^|` over `z in {+-1, +-2}`, `r in {0, +-1, +-2}`. The `z = 0`
/// column is left out because the finite time horizon dominates there.
pub fn kappa_calibration(data_grid: &GridSpec) -> Result<KappaCalibration> {
    let p1 = TestProblem::new(ProblemId::P1);
    let f = sample(|x, t| p1.f0(x, t), data_grid)?;
    let g = sample(|x, t| p1.g0(x, t), data_grid)?;
    let v = sample_solution(p1, data_grid)?;
    kappa_calibration_from(&f, &g, &v)
}

pub fn kappa_calibration_from(f: &RealField, g: &RealField, v: &RealField) -> Result<KappaCalibration> {
    let rhs = assemble_rhs(f, g)?;
    let sg = GridSpec::spanning(-2.0, 2.0, 5, -2.0, 2.0, 5)?;
    let f_hat = dft2_forward(&rhs, &sg)?;
    let v_hat = dft2_forward(v, &sg)?;
    let residual = |kappa: f64| {
        let (mut num, mut den) = (0.0, 0.0);
        for l in 0..5 {
            for k in 0..5 {
                let z = sg.x(k);
                if z == 0.0 {
                    continue;
                }
                let fh = f_hat.at(k, l);
                num += (fh - kappa * s_hat(z, sg.t(l)) * v_hat.at(k, l)).norm_sqr();
                den += fh.norm_sqr();
            }
        }
        (num / den).sqrt()
    };
    Ok(KappaCalibration {
        residual_two_pi: residual(2.0 * PI),
        residual_one: residual(1.0),
    })
}

/// Data grid of the reconstructions: `|x| <= 32` at spacing 0.05, `0 <= t <= 16` at 0.03.
pub fn default_data_grid() -> GridSpec {
    GridSpec::new(-32.0, 0.05, 1281, 0.0, 0.03, 534).expect("static grid is valid")
}

/// 129 x 129 evaluation window: `[0.25, 1.3] x [0.1, 4]` for P1, `[0, 1] x [0.1, 4]` for P2.
pub fn default_out_grid(problem: ProblemId) -> GridSpec {
    let (xa, xb) = match problem {
        ProblemId::P1 => (0.25, 1.3),
        ProblemId::P2 => (0.0, 1.0),
    };
    GridSpec::spanning(xa, xb, 129, 0.1, 4.0, 129).expect("static grid is valid")
}

/// Spectral grid for the exact solution's transform in the tail-energy estimate.
pub const TAIL_NODES: usize = 385;
pub const TAIL_COVERAGE: f64 = 3.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SincConfig {
    pub n_max: i64,
    pub kind: IndexSet,
    /// Off-node comparison points drawn in the evaluation window.
    pub points: usize,
}

impl Default for SincConfig {
    fn default() -> Self {
        SincConfig {
            n_max: 50,
            kind: IndexSet::Square,
            points: 200,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub problem: ProblemId,
    pub params: RegParams,
    pub data_grid: GridSpec,
    pub out_grid: GridSpec,
    pub noise_seed: u64,
    /// L2 size of the injected noise; `None` means `params.epsilon`.
    pub noise_level: Option<f64>,
    pub sinc: Option<SincConfig>,
    pub reconstructor: Reconstructor,
    /// Estimate the tail energy from the exact solution to evaluate the L2 bound.
    pub tail_energy: bool,
}

impl ExperimentConfig {
    pub fn new(problem: ProblemId, params: RegParams) -> Self {
        ExperimentConfig {
            problem,
            params,
            data_grid: default_data_grid(),
            out_grid: default_out_grid(problem),
            noise_seed: 0,
            noise_level: None,
            sinc: None,
            reconstructor: Reconstructor::default(),
            tail_energy: true,
        }
    }

    pub fn noise(&self) -> f64 {
        self.noise_level.unwrap_or(self.params.epsilon)
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        self.data_grid.validate()?;
        self.out_grid.validate()?;
        if self.out_grid.t0 <= 0.0 {
            return Err(Error::Grid(format!(
                "evaluation window must lie in t > 0, starts at {}",
                self.out_grid.t0
            )));
        }
        if self.data_grid.t0 < 0.0 {
            return Err(Error::Grid(format!(
                "data grid must start at t >= 0, starts at {}",
                self.data_grid.t0
            )));
        }
        let n = self.noise();
        if !(n >= 0.0 && n.is_finite()) {
            return Err(Error::Parameter(format!(
                "noise level must be finite and nonnegative, got {n}"
            )));
        }
        if let Some(s) = self.sinc {
            if s.n_max < 1 {
                return Err(Error::Parameter(format!(
                    "truncation N must be at least 1, got {}",
                    s.n_max
                )));
            }
        }
        Ok(())
    }
}

/// Exact data of a problem on a data grid, shared across runs.
#[derive(Debug, Clone)]
pub struct ProblemData {
    pub problem: TestProblem,
    pub f0: RealField,
    pub g0: RealField,
    /// Quadrature samples of the exact solution, for the tail energy.
    pub v0: RealField,
}

impl ProblemData {
    pub fn new(problem: ProblemId, data_grid: &GridSpec) -> Result<Self> {
        let problem = TestProblem::new(problem);
        Ok(ProblemData {
            problem,
            f0: sample(|x, t| problem.f0(x, t), data_grid)?,
            g0: sample(|x, t| problem.g0(x, t), data_grid)?,
            v0: sample_solution(problem, data_grid)?,
        })
    }
}

#[derive(Debug, Clone)]
pub struct SincComparison {
    /// Expansion over the configured index set.
    pub expansion: SincExpansion,
    pub a_eps: f64,
    pub points: Vec<(f64, f64)>,
    pub direct: Vec<f64>,
    pub series: Vec<f64>,
    /// Relative discrete L2 deviation of the configured series from the direct evaluation.
    pub deviation: f64,
    /// Largest `|series(node) - coefficient|` over the retained nodes.
    pub node_error: f64,
    pub square_deviation: f64,
    pub triangular_deviation: f64,
    /// `d^2 sum c^2` over the square-set indices the triangular set drops.
    pub dropped_energy: f64,
}

#[derive(Debug, Clone)]
pub struct ExperimentResult {
    pub config: ExperimentConfig,
    pub reconstruction: Reconstruction,
    pub v_exact: RealField,
    pub measured_error: f64,
    pub exact_norm: f64,
    pub report: BoundReport,
    pub sinc: Option<SincComparison>,
}

impl ExperimentResult {
    pub fn v_eps(&self) -> &RealField {
        &self.reconstruction.v_eps
    }
}

pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentResult> {
    config.validate()?;
    let data = ProblemData::new(config.problem, &config.data_grid)?;
    run_experiment_with(config, &data)
}

/// As `run_experiment`, reusing exact data prepared on `config.data_grid`.
pub fn run_experiment_with(config: &ExperimentConfig, data: &ProblemData) -> Result<ExperimentResult> {
    config.validate()?;
    require_same_grid(&config.data_grid, data.f0.grid())?;
    if data.problem.id != config.problem {
        return Err(Error::Parameter("prepared data belong to another problem".into()));
    }
    let noise = config.noise();
    let f = perturb(&data.f0, noise, config.noise_seed)?;
    let g = perturb(&data.g0, noise, config.noise_seed ^ G_STREAM)?;
    let reconstruction = config
        .reconstructor
        .run(&f, &g, &config.params, &config.out_grid, None)?;
    let report = if config.tail_energy {
        let tail_grid = spectral_grid(&reconstruction.region.window, TAIL_NODES, TAIL_COVERAGE)?;
        let v0_hat = dft2_forward(&data.v0, &tail_grid)?;
        bound_report(&config.params, &reconstruction.region, Some(&v0_hat))?
    } else {
        reconstruction.report
    };
    let problem = data.problem;
    let v_exact = sample(|x, t| problem.v_exact(x, t), &config.out_grid)?;
    let measured_error = l2_distance(&reconstruction.v_eps, &v_exact)?;
    let exact_norm = l2_norm(&v_exact);
    let sinc = config
        .sinc
        .map(|s| sinc_comparison(&reconstruction, &config.params, &config.out_grid, s, config.noise_seed))
        .transpose()?;
    Ok(ExperimentResult {
        config: config.clone(),
        reconstruction,
        v_exact,
        measured_error,
        exact_norm,
        report,
        sinc,
    })
}

/// Off-node points uniform in `[x0, x1] x [t0, t1]`, away from the Sinc lattice.
fn comparison_points(out: &GridSpec, d: f64, count: usize, seed: u64) -> Vec<(f64, f64)> {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let (x0, x1) = (out.x0, out.x_end());
    // the Sinc comparison skips early times where v_eps is steep
    let (t0, t1) = (out.t0.max(0.5).min(out.t_end()), out.t_end());
    let off_node = |v: f64| {
        let w = v / d;
        (w - w.round()).abs() > 1e-6
    };
    let mut pts = Vec::with_capacity(count);
    while pts.len() < count {
        let x = rng.random_range(x0..=x1);
        let t = rng.random_range(t0..=t1);
        if off_node(x) && off_node(t) {
            pts.push((x, t));
        }
    }
    pts
}

fn rel_l2(a: &[f64], b: &[f64]) -> f64 {
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
    let den: f64 = b.iter().map(|y| y * y).sum();
    (num / den.max(1e-300)).sqrt()
}

pub fn sinc_comparison(
    rec: &Reconstruction,
    params: &RegParams,
    out_grid: &GridSpec,
    cfg: SincConfig,
    seed: u64,
) -> Result<SincComparison> {
    let a_eps = sinc_mesh(params)?;
    let square = build_expansion(|x, t| rec.evaluate(x, t), a_eps, cfg.n_max, IndexSet::Square)?;
    let triangular = square.restricted(IndexSet::Triangular)?;
    let d = square.d();
    let points = comparison_points(out_grid, d, cfg.points, seed);
    let direct: Vec<f64> = points.iter().map(|&(x, t)| rec.evaluate(x, t)).collect();
    let eval_all = |e: &SincExpansion| -> Vec<f64> { points.iter().map(|&(x, t)| eval_expansion(e, x, t)).collect() };
    let sq_series = eval_all(&square);
    let tri_series = eval_all(&triangular);
    let dropped: f64 = square
        .coefficients()
        .iter()
        .filter(|&&(m, n, _)| !IndexSet::Triangular.contains(cfg.n_max, m, n))
        .map(|&(_, _, c)| c * c)
        .sum();
    let square_deviation = rel_l2(&sq_series, &direct);
    let triangular_deviation = rel_l2(&tri_series, &direct);
    let (expansion, series, deviation) = match cfg.kind {
        IndexSet::Square => (square, sq_series, square_deviation),
        IndexSet::Triangular => (triangular, tri_series, triangular_deviation),
    };
    let node_error = expansion
        .coefficients()
        .par_iter()
        .map(|&(m, n, c)| (eval_expansion(&expansion, m as f64 * d, n as f64 * d) - c).abs())
        .reduce(|| 0.0, f64::max);
    Ok(SincComparison {
        expansion,
        a_eps,
        points,
        direct,
        series,
        deviation,
        node_error,
        square_deviation,
        triangular_deviation,
        dropped_energy: dropped * d * d,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergenceRow {
    pub epsilon: f64,
    pub measured_error: f64,
    pub bound: f64,
    pub eta_hat: f64,
    pub runtime_seconds: f64,
}

/// One L2-mode reconstruction per noise level, in descending order of `epsilon`. Row `i`
/// uses seed `base.noise_seed + i`. Wall-clock time is recorded only when `timing` is set,
/// so that the table is reproducible bit for bit otherwise.
pub fn convergence_table(base: &ExperimentConfig, eps_list: &[f64], timing: bool) -> Result<Vec<ConvergenceRow>> {
    if eps_list.is_empty() {
        return Err(Error::Parameter("empty epsilon list".into()));
    }
    if base.params.mode != Mode::L2 {
        return Err(Error::Parameter(
            "convergence tables use the L2 bound; set mode to l2".into(),
        ));
    }
    let mut eps: Vec<f64> = eps_list.to_vec();
    for &e in &eps {
        base.params.with_epsilon(e)?;
    }
    eps.sort_by(|a, b| b.total_cmp(a));
    let data = ProblemData::new(base.problem, &base.data_grid)?;
    let mut rows = Vec::with_capacity(eps.len());
    for (i, &e) in eps.iter().enumerate() {
        let start = Instant::now();
        let config = ExperimentConfig {
            params: base.params.with_epsilon(e)?,
            noise_seed: base.noise_seed.wrapping_add(i as u64),
            noise_level: None,
            sinc: None,
            tail_energy: true,
            ..base.clone()
        };
        let res = run_experiment_with(&config, &data)?;
        let eta_hat = res.report.eta_hat.unwrap_or(0.0);
        let bound = res
            .report
            .bound_l2
            .ok_or_else(|| Error::Numerical("L2 bound unavailable".into()))?;
        rows.push(ConvergenceRow {
            epsilon: e,
            measured_error: res.measured_error,
            bound,
            eta_hat,
            runtime_seconds: if timing { start.elapsed().as_secs_f64() } else { 0.0 },
        });
        log::info!("epsilon {e}: error {} bound {bound}", res.measured_error);
    }
    Ok(rows)
}

pub fn write_convergence_csv(rows: &[ConvergenceRow], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut out = String::from("epsilon,measured_error,bound,eta_hat,runtime_seconds\n");
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{}",
            fmt_num(r.epsilon),
            fmt_num(r.measured_error),
            fmt_num(r.bound),
            fmt_num(r.eta_hat),
            fmt_num(r.runtime_seconds)
        )
        .unwrap();
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

/// Ordered `key = value` lines describing a run.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Manifest {
    entries: Vec<(String, String)>,
}

impl Manifest {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn set(&mut self, key: &str, value: impl ToString) -> &mut Self {
        let value = value.to_string();
        match self.entries.iter_mut().find(|(k, _)| k == key) {
            Some(e) => e.1 = value,
            None => self.entries.push((key.to_string(), value)),
        }
        self
    }

    pub fn num(&mut self, key: &str, value: f64) -> &mut Self {
        self.set(key, fmt_num(value))
    }

    pub fn opt(&mut self, key: &str, value: Option<f64>) -> &mut Self {
        match value {
            Some(v) => self.num(key, v),
            None => self.set(key, "unknown"),
        }
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn entries(&self) -> &[(String, String)] {
        &self.entries
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.entries {
            writeln!(out, "{k} = {v}").unwrap();
        }
        out
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.render()).map_err(|e| Error::io(path, e))
    }

    pub fn parse(text: &str) -> Manifest {
        let mut m = Manifest::new();
        for line in text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
        {
            if let Some((k, v)) = line.split_once('=') {
                m.set(k.trim(), v.trim());
            }
        }
        m
    }
}

/// Regularization and spectral settings of a reconstruction.
pub fn describe_reconstruction(m: &mut Manifest, rec: &Reconstruction, reconstructor: &Reconstructor) {
    let p = &rec.params;
    m.set("mode", p.mode);
    m.num("epsilon", p.epsilon);
    match p.mode {
        Mode::L2 => {
            m.num("gamma", p.gamma);
            m.opt("b_eps", rec.region.b_eps);
        }
        Mode::Hm => {
            m.num("m", p.m);
            m.opt("a_eps", rec.region.a_eps);
        }
    }
    m.num("kappa", reconstructor.kappa);
    m.num("data_term_coefficient", DATA_TERM_COEFFICIENT);
    m.set("spectral-nodes", reconstructor.spectral_nodes);
    m.num("spectral-coverage", reconstructor.spectral_coverage);
    m.num("C", rec.report.c);
    m.opt("noise_term", rec.report.noise_term);
}

/// Manifest of an experiment. Input keys match the command-line configuration keys, so
/// the file can be passed back with `--config`.
pub fn experiment_manifest(res: &ExperimentResult) -> Manifest {
    let c = &res.config;
    let mut m = Manifest::new();
    m.set("problem", c.problem);
    describe_reconstruction(&mut m, &res.reconstruction, &c.reconstructor);
    m.num("noise", c.noise());
    m.set("seed", c.noise_seed);
    m.set("data-grid", c.data_grid.describe());
    m.set("grid", c.out_grid.describe());
    m.set("tail-energy", c.tail_energy);
    if let (Some(cfg), Some(s)) = (c.sinc, &res.sinc) {
        m.set("N", cfg.n_max);
        m.set("index-set", cfg.kind);
        m.set("sinc-points", cfg.points);
        m.num("sinc_a_eps", s.a_eps);
        m.num("sinc_mesh", s.expansion.d());
        m.num("sinc_deviation", s.deviation);
        m.num("sinc_node_error", s.node_error);
        m.num("square_deviation", s.square_deviation);
        m.num("triangular_deviation", s.triangular_deviation);
        m.num("dropped_energy", s.dropped_energy);
    }
    m.num("measured_error", res.measured_error);
    m.num("exact_norm", res.exact_norm);
    m.opt("eta_hat", res.report.eta_hat);
    m.opt("bound", res.report.bound());
    m
}

/// Writes `v_eps.grd`, `v_eps.csv` and `manifest.txt` into `dir`.
pub fn write_experiment(res: &ExperimentResult, dir: impl AsRef<Path>) -> Result<Manifest> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    write_field(res.v_eps(), dir.join("v_eps.grd"))?;
    write_csv(res.v_eps(), dir.join("v_eps.csv"))?;
    let m = experiment_manifest(res);
    m.write(dir.join("manifest.txt"))?;
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_grid() -> GridSpec {
        GridSpec::new(-1.0, 0.1, 21, 0.0, 0.1, 15).unwrap()
    }

    #[test]
    fn perturb_properties() {
        let g = small_grid();
        let base = sample(|x, t| x * t, &g).unwrap();
        assert_eq!(perturb(&base, 0.0, 9).unwrap(), base);
        for eps in [1e-6, 0.02, 3.0] {
            let p = perturb(&base, eps, 42).unwrap();
            assert_eq!(p.grid(), base.grid());
            assert!((l2_distance(&p, &base).unwrap() - eps).abs() <= 1e-12 * eps.max(1.0));
        }
        assert_eq!(perturb(&base, 0.1, 5).unwrap(), perturb(&base, 0.1, 5).unwrap());
        assert_ne!(perturb(&base, 0.1, 5).unwrap(), perturb(&base, 0.1, 6).unwrap());
        assert!(perturb(&base, -0.1, 5).is_err());
    }

    #[test]
    fn residual_grid_contains_window() {
        let out = default_out_grid(ProblemId::P1);
        let g = residual_grid(&out, 1, 1, 16.0).unwrap();
        assert!(g.t0 > 0.0 && g.t0 < g.dt);
        assert!(g.x0 <= -16.0 + g.dx && g.x_end() >= 16.0 - g.dx);
        let f = sample(|x, t| x + t, &g).unwrap();
        let r = f.restrict(&out).unwrap();
        assert!((r.at(128, 128) - (1.3 + 4.0)).abs() < 1e-9);
        let fine = residual_grid(&out, 2, 3, 4.0).unwrap();
        assert!(sample(|_, _| 0.0, &fine).unwrap().restrict(&out).is_ok());
    }

    #[test]
    fn residual_zero_for_zero_triple_and_mismatch() {
        let g = small_grid();
        let out = GridSpec::new(-0.5, 0.1, 6, 0.5, 0.1, 5).unwrap();
        let z = RealField::zeros(g);
        let one = sample(|_, _| 1.0, &g).unwrap();
        // LHS = S * 0 = 0, so the relative residual is exactly 1
        assert!((residual_eq12(&z, &one, &z, &out).unwrap() - 1.0).abs() < 1e-12);
        let other = RealField::zeros(GridSpec::new(-1.0, 0.1, 21, 0.0, 0.1, 16).unwrap());
        assert!(matches!(
            residual_eq12(&z, &z, &other, &out),
            Err(Error::GridMismatch(_))
        ));
    }

    #[test]
    fn symbol_validation_rows() {
        let v = validate_s_hat(&[], &SymbolQuadrature::default());
        assert_eq!((v.rows.len(), v.max_rel_err), (0, 0.0));
        let v = validate_s_hat(&[(1.0, 0.0), (2.0, 0.0)], &SymbolQuadrature::default());
        assert!(v.max_rel_err < 1e-5);
        assert!(v.rows[0].shorthand_rel_dev < 1e-5);
        // 2e^{-4} vs 2e^{-2}
        assert!((v.rows[1].shorthand_rel_dev - (1.0 - (-2.0f64).exp())).abs() < 1e-4);
        let broken = validate_s_hat_with(&[(0.0, 1.0)], &SymbolQuadrature::default(), |z, r| 1.01 * s_hat(z, r));
        assert!(broken.max_rel_err > 5e-3);
    }

    #[test]
    fn manifest_round_trip() {
        let mut m = Manifest::new();
        m.set("problem", ProblemId::P1).num("epsilon", 0.02).opt("bound", None);
        m.set("problem", ProblemId::P2);
        let back = Manifest::parse(&m.render());
        assert_eq!(back, m);
        assert_eq!(back.get("problem"), Some("p2"));
        assert_eq!(back.get("bound"), Some("unknown"));
        assert_eq!(back.get("epsilon").unwrap().parse::<f64>().unwrap(), 0.02);
    }

    #[test]
    fn convergence_rejects_bad_lists() {
        let base = ExperimentConfig::new(ProblemId::P1, RegParams::l2(0.02, 1.0).unwrap());
        assert!(convergence_table(&base, &[], false).is_err());
        assert!(convergence_table(&base, &[0.02, 0.5], false).is_err());
    }

    #[test]
    fn config_validation() {
        let mut c = ExperimentConfig::new(ProblemId::P2, RegParams::l2(0.02, 1.0).unwrap());
        assert!(c.validate().is_ok());
        c.out_grid = GridSpec::new(0.0, 0.1, 4, 0.0, 0.1, 4).unwrap();
        assert!(c.validate().is_err());
        c.out_grid = default_out_grid(ProblemId::P2);
        c.noise_level = Some(-1.0);
        assert!(c.validate().is_err());
    }
}
