use std::f64::consts::PI;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use sidecast::fields::{fmt_num, read_field, sample, write_csv, write_field};
use sidecast::harness::{
    convergence_table, default_data_grid, default_out_grid, default_symbol_points, describe_reconstruction,
    kappa_calibration, problem_residual, run_experiment, sinc_comparison, validate_s_hat_with, write_convergence_csv,
    write_experiment, ExperimentConfig, Manifest, SincComparison, SincConfig,
};
use sidecast::kernels::{kernel_norms, s_hat, s_hat_shorthand, SymbolQuadrature};
use sidecast::regularizer::{stability_constant, Reconstruction, Reconstructor};
use sidecast::sinc::eval_expansion;
use sidecast::{Error, GridSpec, IndexSet, Mode, ProblemId, RealField, RegParams, Result, SincExpansion, TestProblem};

use crate::settings::{parse_list, parse_points, Settings};

const SYMBOL_TOL: f64 = 1e-3;
const NORM_TOL: f64 = 1e-3;
const KAPPA_RATIO_MIN: f64 = 10.0;
const RESIDUAL_TOL: f64 = 1e-2;
const WRONG_SIGN_MIN: f64 = 0.5;

fn usage(msg: impl Into<String>) -> Error {
    Error::Parameter(msg.into())
}

fn io_err(path: &Path, e: std::io::Error) -> Error {
    Error::Io {
        path: path.to_path_buf(),
        source: e,
    }
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| io_err(path, e))
}

struct Check {
    failed: usize,
}

impl Check {
    fn report(&mut self, pass: bool, name: &str, detail: String) {
        if !pass {
            self.failed += 1;
        }
        println!("{} {name}: {detail}", if pass { "PASS" } else { "FAIL" });
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

pub fn verify(points: Option<&str>, break_shat: bool) -> Result<bool> {
    let points = match points {
        Some(p) => parse_points(p)?,
        None => default_symbol_points(),
    };
    let mut check = Check { failed: 0 };

    let scale = if break_shat { 1.01 } else { 1.0 };
    let table = validate_s_hat_with(&points, &SymbolQuadrature::default(), |z, r| scale * s_hat(z, r));
    println!("symbol of S: closed form against quadrature of its defining integral");
    println!(
        "{:>6} {:>6} {:>24} {:>24} {:>10} {:>11} {:>10}",
        "z", "r", "closed", "quadrature", "rel_err", "shorthand", "short_dev"
    );
    for row in &table.rows {
        println!(
            "{:>6} {:>6} {:>24} {:>24} {:>10.3e} {:>11.5e} {:>10.3e}",
            row.z,
            row.r,
            format!("{:.6e}{:+.6e}i", row.closed.re, row.closed.im),
            format!("{:.6e}{:+.6e}i", row.quadrature.re, row.quadrature.im),
            row.rel_err,
            row.shorthand,
            row.shorthand_rel_dev,
        );
    }
    check.report(
        !table.rows.is_empty() && table.max_rel_err <= SYMBOL_TOL,
        "symbol",
        format!(
            "max relative error {:.3e} over {} points (tol {SYMBOL_TOL:e})",
            table.max_rel_err,
            table.rows.len()
        ),
    );
    let (closed, short) = (s_hat(2.0, 0.0).re, s_hat_shorthand(2.0, 0.0));
    println!(
        "note: shorthand 2 exp(-sqrt(r^2 + z^4)) at (2, 0) is {short:.6e}, closed form {closed:.6e}, relative deviation {:.3e}",
        rel(short, closed)
    );

    let (r_norm, s_norm) = kernel_norms();
    check.report(
        rel(s_norm, 4.0 * PI) <= NORM_TOL,
        "norm S",
        format!(
            "{s_norm:.9} vs 4 pi = {:.9} (rel {:.2e}, tol {NORM_TOL:e})",
            4.0 * PI,
            rel(s_norm, 4.0 * PI)
        ),
    );
    check.report(
        rel(r_norm, 2.0 * PI) <= NORM_TOL,
        "norm R",
        format!(
            "{r_norm:.9} vs 2 pi = {:.9} (rel {:.2e}, tol {NORM_TOL:e})",
            2.0 * PI,
            rel(r_norm, 2.0 * PI)
        ),
    );
    let c = stability_constant();
    let c_ref = (4.0 + 8.0 * PI).powi(2);
    check.report(
        rel(c, c_ref) <= NORM_TOL,
        "constant C",
        format!("{c:.6} vs (4 + 8 pi)^2 = {c_ref:.6} (tol {NORM_TOL:e})"),
    );

    let kc = kappa_calibration(&default_data_grid())?;
    check.report(
        kc.ratio() >= KAPPA_RATIO_MIN,
        "kappa",
        format!(
            "spectral residual {:.3e} with kappa = 2 pi, {:.3e} with kappa = 1, ratio {:.1} (min {KAPPA_RATIO_MIN})",
            kc.residual_two_pi,
            kc.residual_one,
            kc.ratio()
        ),
    );

    for id in [ProblemId::P1, ProblemId::P2] {
        let res = problem_residual(TestProblem::new(id), &default_out_grid(id))?;
        check.report(
            res.exact <= RESIDUAL_TOL && res.wrong_sign >= WRONG_SIGN_MIN,
            &format!("residual {id}"),
            format!(
                "relative residual {:.3e} (tol {RESIDUAL_TOL:e}); with v replaced by -v {:.3e} (min {WRONG_SIGN_MIN})",
                res.exact, res.wrong_sign
            ),
        );
    }
    println!("{} check(s) failed", check.failed);
    Ok(check.failed == 0)
}

fn reg_params(s: &Settings) -> Result<RegParams> {
    let mode = match s.parse::<Mode>("mode")? {
        Some(m) => m,
        None if s.has("m") && !s.has("gamma") => Mode::Hm,
        None => Mode::L2,
    };
    let epsilon = s.parse_or("epsilon", 0.02)?;
    match mode {
        Mode::L2 => {
            if s.has("m") {
                return Err(usage("m applies to hm mode only"));
            }
            RegParams::l2(epsilon, s.parse_or("gamma", 1.0)?)
        }
        Mode::Hm => {
            if s.has("gamma") {
                return Err(usage("gamma applies to l2 mode only"));
            }
            RegParams::hm(epsilon, s.parse_or("m", 1.0)?)
        }
    }
}

fn reconstructor(s: &Settings) -> Result<Reconstructor> {
    let d = Reconstructor::default();
    let r = Reconstructor {
        spectral_nodes: s.parse_or("spectral-nodes", d.spectral_nodes)?,
        spectral_coverage: s.parse_or("spectral-coverage", d.spectral_coverage)?,
        ..d
    };
    if r.spectral_nodes < 2 {
        return Err(usage(format!(
            "spectral-nodes must be at least 2, got {}",
            r.spectral_nodes
        )));
    }
    Ok(r)
}

fn sinc_config(s: &Settings) -> Result<SincConfig> {
    let d = SincConfig::default();
    let cfg = SincConfig {
        n_max: s.parse_or("N", d.n_max)?,
        kind: s.parse_or("index-set", d.kind)?,
        points: s.parse_or("sinc-points", d.points)?,
    };
    if cfg.n_max < 1 {
        return Err(usage(format!("N must be at least 1, got {}", cfg.n_max)));
    }
    if cfg.points == 0 {
        return Err(usage("sinc-points must be positive"));
    }
    Ok(cfg)
}

enum Source {
    Problem(ProblemId),
    Files(PathBuf, PathBuf),
}

fn source(s: &Settings) -> Result<Source> {
    match (s.path("f"), s.path("g")) {
        (Some(f), Some(g)) => {
            if s.has("problem") {
                return Err(usage("give either problem or f and g, not both"));
            }
            if s.has("noise") {
                return Err(usage("noise is only injected into synthetic problem data"));
            }
            Ok(Source::Files(f, g))
        }
        (None, None) => match s.parse::<ProblemId>("problem")? {
            Some(p) => Ok(Source::Problem(p)),
            None => Err(usage("give --problem p1|p2 or --f FILE --g FILE")),
        },
        _ => Err(usage("f and g must be given together")),
    }
}

fn experiment_config(s: &Settings, problem: ProblemId, params: RegParams) -> Result<ExperimentConfig> {
    let mut cfg = ExperimentConfig::new(problem, params);
    if let Some(g) = s.parse::<GridSpec>("data-grid")? {
        cfg.data_grid = g;
    }
    if let Some(g) = s.parse::<GridSpec>("grid")? {
        cfg.out_grid = g;
    }
    cfg.noise_seed = s.parse_or("seed", 0)?;
    cfg.noise_level = s.parse("noise")?;
    cfg.reconstructor = reconstructor(s)?;
    cfg.tail_energy = s.flag("tail-energy", true)?;
    cfg.validate()?;
    Ok(cfg)
}

fn out_dir(s: &Settings) -> Result<PathBuf> {
    let dir = s.path("out").unwrap_or_else(|| PathBuf::from("sidecast-out"));
    fs::create_dir_all(&dir).map_err(|e| io_err(&dir, e))?;
    Ok(dir)
}

/// Reconstruction from measured data files; no noise is added.
struct FileRun {
    reconstruction: Reconstruction,
    out_grid: GridSpec,
    manifest: Manifest,
}

fn file_run(s: &Settings, f_path: &Path, g_path: &Path, params: RegParams) -> Result<FileRun> {
    let f = read_field(f_path)?;
    let g = read_field(g_path)?;
    if !f.grid().same_as(g.grid()) {
        return Err(Error::GridMismatch(format!(
            "{} has grid {} but {} has grid {}",
            f_path.display(),
            f.grid().describe(),
            g_path.display(),
            g.grid().describe()
        )));
    }
    if let Some(dg) = s.parse::<GridSpec>("data-grid")? {
        if !dg.same_as(f.grid()) {
            return Err(Error::GridMismatch(format!(
                "data-grid {} differs from the grid of {}",
                dg.describe(),
                f_path.display()
            )));
        }
    }
    let out_grid = s.parse::<GridSpec>("grid")?.unwrap_or(*f.grid());
    let rc = reconstructor(s)?;
    let reconstruction = rc.run(&f, &g, &params, &out_grid, None)?;
    let mut m = Manifest::new();
    m.set("f", f_path.display());
    m.set("g", g_path.display());
    describe_reconstruction(&mut m, &reconstruction, &rc);
    m.set("data-grid", f.grid().describe());
    m.set("grid", out_grid.describe());
    Ok(FileRun {
        reconstruction,
        out_grid,
        manifest: m,
    })
}

fn write_reconstruction(dir: &Path, v: &RealField, manifest: &Manifest) -> Result<()> {
    write_field(v, dir.join("v_eps.grd"))?;
    write_csv(v, dir.join("v_eps.csv"))?;
    manifest.write(dir.join("manifest.txt"))
}

fn print_summary(m: &Manifest, keys: &[&str]) {
    for k in keys {
        if let Some(v) = m.get(k) {
            println!("{k} = {v}");
        }
    }
}

const SUMMARY_KEYS: &[&str] = &[
    "problem",
    "f",
    "mode",
    "epsilon",
    "b_eps",
    "a_eps",
    "C",
    "measured_error",
    "bound",
];

pub fn reconstruct(s: &Settings) -> Result<bool> {
    let src = source(s)?;
    let params = reg_params(s)?;
    let dir = out_dir(s)?;
    let manifest = match src {
        Source::Problem(p) => {
            let res = run_experiment(&experiment_config(s, p, params)?)?;
            write_experiment(&res, &dir)?
        }
        Source::Files(f, g) => {
            let run = file_run(s, &f, &g, params)?;
            write_reconstruction(&dir, &run.reconstruction.v_eps, &run.manifest)?;
            run.manifest
        }
    };
    print_summary(&manifest, SUMMARY_KEYS);
    println!("wrote v_eps.grd, v_eps.csv, manifest.txt to {}", dir.display());
    Ok(true)
}

/// Node values of an expansion as a field on its lattice; indices outside the set are 0.
fn node_field(exp: &SincExpansion) -> Result<RealField> {
    let (n, d) = (exp.n_max(), exp.d());
    let side = (2 * n + 1) as usize;
    let grid = GridSpec::new(-(n as f64) * d, d, side, -(n as f64) * d, d, side)?;
    let mut values = Vec::with_capacity(side * side);
    for t in -n..=n {
        for x in -n..=n {
            values.push(exp.coeff(x, t).unwrap_or(0.0));
        }
    }
    RealField::new(grid, values)
}

fn write_expansion_outputs(dir: &Path, exp: &SincExpansion, eval_grid: &GridSpec) -> Result<()> {
    exp.write(dir.join("expansion.txt"))?;
    write_field(&node_field(exp)?, dir.join("sinc_nodes.grd"))?;
    let series = sample(|x, t| eval_expansion(exp, x, t), eval_grid)?;
    write_csv(&series, dir.join("sinc_eval.csv"))
}

fn write_points(dir: &Path, cmp: &SincComparison) -> Result<()> {
    let mut out = String::from("x,t,direct,series\n");
    for ((&(x, t), d), s) in cmp.points.iter().zip(&cmp.direct).zip(&cmp.series) {
        writeln!(out, "{},{},{},{}", fmt_num(x), fmt_num(t), fmt_num(*d), fmt_num(*s)).unwrap();
    }
    write_text(&dir.join("sinc_points.csv"), &out)
}

fn record_sinc(m: &mut Manifest, cfg: &SincConfig, cmp: &SincComparison) {
    m.set("N", cfg.n_max);
    m.set("index-set", cfg.kind);
    m.set("sinc-points", cfg.points);
    m.num("sinc_a_eps", cmp.a_eps);
    m.num("sinc_mesh", cmp.expansion.d());
    m.num("sinc_deviation", cmp.deviation);
    m.num("sinc_node_error", cmp.node_error);
    m.num("square_deviation", cmp.square_deviation);
    m.num("triangular_deviation", cmp.triangular_deviation);
    m.num("dropped_energy", cmp.dropped_energy);
}

fn print_sinc(cfg: &SincConfig, cmp: &SincComparison) {
    let exp = &cmp.expansion;
    println!(
        "sinc expansion: N = {}, {} index set ({} terms), band limit {:.6}, mesh {:.6}",
        exp.n_max(),
        exp.kind(),
        exp.kind().count(exp.n_max()),
        cmp.a_eps,
        exp.d()
    );
    println!(
        "relative L2 deviation from direct evaluation at {} points: {:.3e}",
        cfg.points, cmp.deviation
    );
    println!(
        "square set deviation {:.3e}, triangular set deviation {:.3e}",
        cmp.square_deviation, cmp.triangular_deviation
    );
    println!("largest node mismatch {:.3e}", cmp.node_error);
    if cfg.kind == IndexSet::Triangular {
        println!("energy of dropped indices {:.6e}", cmp.dropped_energy);
    }
}

pub fn sinc(s: &Settings) -> Result<bool> {
    let cfg = sinc_config(s)?;
    if s.has("v-eps") {
        return sinc_from_samples(s, cfg);
    }
    let src = source(s)?;
    let params = reg_params(s)?;
    let dir = out_dir(s)?;
    let (cmp, eval_grid, manifest) = match src {
        Source::Problem(p) => {
            let mut ec = experiment_config(s, p, params)?;
            ec.sinc = Some(cfg);
            let res = run_experiment(&ec)?;
            let m = write_experiment(&res, &dir)?;
            let cmp = res
                .sinc
                .clone()
                .ok_or_else(|| Error::Numerical("missing sinc comparison".into()))?;
            (cmp, ec.out_grid, m)
        }
        Source::Files(f, g) => {
            let mut run = file_run(s, &f, &g, params)?;
            let seed = s.parse_or("seed", 0)?;
            let cmp = sinc_comparison(&run.reconstruction, &params, &run.out_grid, cfg, seed)?;
            run.manifest.set("seed", seed);
            record_sinc(&mut run.manifest, &cfg, &cmp);
            write_reconstruction(&dir, &run.reconstruction.v_eps, &run.manifest)?;
            (cmp, run.out_grid, run.manifest)
        }
    };
    write_expansion_outputs(&dir, &cmp.expansion, &eval_grid)?;
    write_points(&dir, &cmp)?;
    print_summary(&manifest, SUMMARY_KEYS);
    print_sinc(&cfg, &cmp);
    println!(
        "wrote expansion.txt, sinc_eval.csv, sinc_points.csv, sinc_nodes.grd to {}",
        dir.display()
    );
    Ok(true)
}

/// Expansion from samples on the lattice `(m d, n d)`, read from a grid file with
/// `dx = dt = d` whose origin lies on the lattice.
fn sinc_from_samples(s: &Settings, cfg: SincConfig) -> Result<bool> {
    for k in ["problem", "f", "g"] {
        if s.has(k) {
            return Err(usage(format!("{k} cannot be combined with v-eps")));
        }
    }
    let path = s.path("v-eps").expect("checked by caller");
    let field = read_field(&path)?;
    let grid = *field.grid();
    let d = grid.dx;
    if (grid.dt - d).abs() > 1e-12 * d {
        return Err(Error::Grid(format!(
            "samples must have dx = dt, got {} and {}",
            grid.dx, grid.dt
        )));
    }
    let offset = |v: f64| -> Result<i64> {
        let k = v / d;
        if (k - k.round()).abs() > 1e-9 {
            return Err(Error::Grid(format!(
                "grid origin {v} is not on the lattice of mesh {d}"
            )));
        }
        Ok(k.round() as i64)
    };
    let (ix, it) = (offset(grid.x0)?, offset(grid.t0)?);
    let n = cfg.n_max;
    let covers = |first: i64, len: usize| first <= -n && first + len as i64 > n;
    if !covers(ix, grid.nx) || !covers(it, grid.nt) {
        return Err(Error::Coverage(format!(
            "{} does not cover indices -{n}..={n} on both axes",
            path.display()
        )));
    }
    let coeffs: Vec<((i64, i64), f64)> = cfg
        .kind
        .indices(n)
        .into_iter()
        .map(|(m, k)| ((m, k), field.at((m - ix) as usize, (k - it) as usize)))
        .collect();
    let exp = SincExpansion::new(d, n, cfg.kind, &coeffs)?;
    let eval_grid = s.parse::<GridSpec>("grid")?.unwrap_or(grid);
    let node_error = coeffs
        .iter()
        .map(|&((m, k), c)| (eval_expansion(&exp, m as f64 * d, k as f64 * d) - c).abs())
        .fold(0.0, f64::max);
    let dir = out_dir(s)?;
    write_expansion_outputs(&dir, &exp, &eval_grid)?;
    let mut m = Manifest::new();
    m.set("v-eps", path.display());
    m.set("N", n);
    m.set("index-set", cfg.kind);
    m.set("grid", eval_grid.describe());
    m.num("sinc_mesh", d);
    m.num("sinc_node_error", node_error);
    m.write(dir.join("manifest.txt"))?;
    println!(
        "sinc expansion: N = {n}, {} index set ({} terms), mesh {d:.6}",
        cfg.kind,
        cfg.kind.count(n)
    );
    println!("largest node mismatch {node_error:.3e}");
    println!(
        "wrote expansion.txt, sinc_eval.csv, sinc_nodes.grd, manifest.txt to {}",
        dir.display()
    );
    Ok(true)
}

pub fn convergence(s: &Settings) -> Result<bool> {
    let list = s.get("eps-list").ok_or_else(|| usage("eps-list is required"))?;
    let eps = parse_list("eps-list", list)?;
    let problem = match source(s)? {
        Source::Problem(p) => p,
        Source::Files(..) => return Err(usage("convergence runs need a synthetic problem with a known solution")),
    };
    if s.has("epsilon") {
        return Err(usage("use eps-list instead of epsilon for convergence runs"));
    }
    let mut base = s.clone();
    base.set("epsilon", fmt_num(eps[0]));
    let params = reg_params(&base)?;
    for &e in &eps {
        params.with_epsilon(e)?;
    }
    let cfg = experiment_config(&base, problem, params)?;
    if cfg.noise_level.is_some() {
        return Err(usage("convergence runs use noise of size epsilon; drop noise"));
    }
    let timing = s.flag("timing", false)?;
    let dir = out_dir(s)?;
    let rows = convergence_table(&cfg, &eps, timing)?;
    write_convergence_csv(&rows, dir.join("convergence.csv"))?;

    let mut m = Manifest::new();
    m.set("problem", problem);
    m.set("mode", params.mode);
    m.num("gamma", params.gamma);
    m.set("spectral-nodes", cfg.reconstructor.spectral_nodes);
    m.num("spectral-coverage", cfg.reconstructor.spectral_coverage);
    m.set("seed", cfg.noise_seed);
    m.set("data-grid", cfg.data_grid.describe());
    m.set("grid", cfg.out_grid.describe());
    m.set(
        "eps-list",
        eps.iter().map(|&e| fmt_num(e)).collect::<Vec<_>>().join(","),
    );
    m.set("timing", timing);
    m.write(dir.join("manifest.txt"))?;

    println!(
        "{:>12} {:>14} {:>14} {:>14} {:>10}",
        "epsilon", "error", "bound", "eta_hat", "seconds"
    );
    let mut ok = true;
    for r in &rows {
        let held = r.bound >= r.measured_error;
        ok &= held;
        println!(
            "{:>12.5e} {:>14.6e} {:>14.6e} {:>14.6e} {:>10.2}{}",
            r.epsilon,
            r.measured_error,
            r.bound,
            r.eta_hat,
            r.runtime_seconds,
            if held { "" } else { "  bound violated" }
        );
    }
    // rows are in descending epsilon
    let monotone = rows
        .windows(2)
        .all(|w| w[1].measured_error <= 1.1 * w[0].measured_error);
    println!(
        "errors {} as epsilon decreases (10% slack)",
        if monotone { "do not increase" } else { "increase" }
    );
    println!("wrote convergence.csv, manifest.txt to {}", dir.display());
    Ok(ok)
}
