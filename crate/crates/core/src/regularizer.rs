//! Spectral-cutoff inversion of `S * v = 2 R * f - S * g + 4 pi f`.
//!
//! The right-hand side is transformed, divided by `2pi S^` on a frequency window where
//! `|S^|` stays above a noise-dependent floor, and transformed back. The window is the
//! rectangle `|z| <= b, |r| <= b^2` in L2 mode and the square `|z|, |r| <= a` in Sobolev
//! mode.

use std::f64::consts::{PI, SQRT_2};
use std::fmt;
use std::str::FromStr;
use std::sync::Once;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fields::{require_same_grid, ComplexField, GridSpec, RealField};
use crate::kernels::{kernel_norms, s_hat, KernelSpec};
use crate::transform::{convolve2_causal, dft2_forward, SpectralWindow, WindowedSpectrum};

/// Coefficient of the local term `f` in the right-hand side. The half-space Poisson
/// kernel integrates to `4 pi` under the kernel normalization used here.
pub const DATA_TERM_COEFFICIENT: f64 = 4.0 * PI;

/// Factor in `(K * w)^ = kappa K^ w^` for the symmetric `1/2pi` transform.
pub const KAPPA: f64 = 2.0 * PI;

/// Spectral nodes per axis used by default for the inversion.
pub const DEFAULT_SPECTRAL_NODES: usize = 257;

/// Default half-width of the spectral grid as a multiple of the window half-width.
pub const DEFAULT_SPECTRAL_COVERAGE: f64 = 1.25;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    L2,
    Hm,
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "l2" => Ok(Mode::L2),
            "hm" => Ok(Mode::Hm),
            other => Err(Error::Parameter(format!("unknown mode {other:?} (expected l2 or hm)"))),
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::L2 => "l2",
            Mode::Hm => "hm",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegParams {
    pub epsilon: f64,
    pub gamma: f64,
    pub mode: Mode,
    pub m: f64,
}

fn check_l2(epsilon: f64, gamma: f64) -> Result<()> {
    if !(gamma > 0.0 && gamma < 2.0) {
        return Err(Error::Parameter(format!("gamma must lie in (0, 2), got {gamma}")));
    }
    let upper = (-3.0 / gamma).exp();
    if !(epsilon > 0.0 && epsilon < upper) {
        return Err(Error::Parameter(format!(
            "epsilon must lie in (0, e^(-3/gamma)) = (0, {upper:.6}) for gamma = {gamma}, got {epsilon}"
        )));
    }
    Ok(())
}

fn check_hm(epsilon: f64, m: f64) -> Result<()> {
    if !(m > 0.0 && m.is_finite()) {
        return Err(Error::Parameter(format!("Sobolev order m must be positive, got {m}")));
    }
    let upper = (-4.0 * m * m).exp();
    if !(epsilon > 0.0 && epsilon < upper) {
        return Err(Error::Parameter(format!(
            "epsilon must lie in (0, e^(-4 m^2)) = (0, {upper:.6}) for m = {m}, got {epsilon}"
        )));
    }
    static WARNED: Once = Once::new();
    WARNED.call_once(|| {
        log::warn!(
            "Sobolev mode enforces only epsilon < e^(-4 m^2); the self-referential e^(-eps^2) term is not checked"
        )
    });
    Ok(())
}

impl RegParams {
    pub fn l2(epsilon: f64, gamma: f64) -> Result<Self> {
        check_l2(epsilon, gamma)?;
        Ok(RegParams {
            epsilon,
            gamma,
            mode: Mode::L2,
            m: 1.0,
        })
    }

    pub fn hm(epsilon: f64, m: f64) -> Result<Self> {
        check_hm(epsilon, m)?;
        Ok(RegParams {
            epsilon,
            gamma: 1.0,
            mode: Mode::Hm,
            m,
        })
    }

    pub fn validate(&self) -> Result<()> {
        match self.mode {
            Mode::L2 => check_l2(self.epsilon, self.gamma),
            Mode::Hm => check_hm(self.epsilon, self.m),
        }
    }

    /// Same settings at another noise level.
    pub fn with_epsilon(&self, epsilon: f64) -> Result<Self> {
        let p = RegParams { epsilon, ..*self };
        p.validate()?;
        Ok(p)
    }

    pub fn region(&self) -> Result<CutoffRegion> {
        CutoffRegion::from_params(self)
    }
}

/// `b = ln(4 / eps^gamma) / (sqrt 2 sqrt(sqrt 2 + 1))`.
pub fn cutoff_l2(epsilon: f64, gamma: f64) -> Result<f64> {
    check_l2(epsilon, gamma)?;
    Ok((4.0 / epsilon.powf(gamma)).ln() / (SQRT_2 * (SQRT_2 + 1.0).sqrt()))
}

/// `a = sqrt 2 / sqrt(sqrt 2 + 1) ln((1/eps) / ln^m(1/eps))`, required to exceed 1.
pub fn cutoff_hm(epsilon: f64, m: f64) -> Result<f64> {
    check_hm(epsilon, m)?;
    let l = (1.0 / epsilon).ln();
    let a = SQRT_2 / (SQRT_2 + 1.0).sqrt() * (l - m * l.ln());
    if a <= 1.0 {
        return Err(Error::Parameter(format!(
            "cutoff a = {a} must exceed 1 (epsilon = {epsilon}, m = {m})"
        )));
    }
    Ok(a)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CutoffRegion {
    pub window: SpectralWindow,
    pub b_eps: Option<f64>,
    pub a_eps: Option<f64>,
}

impl CutoffRegion {
    pub fn from_params(params: &RegParams) -> Result<Self> {
        match params.mode {
            Mode::L2 => {
                let b = cutoff_l2(params.epsilon, params.gamma)?;
                Ok(CutoffRegion {
                    window: SpectralWindow::rect(b, b * b)?,
                    b_eps: Some(b),
                    a_eps: None,
                })
            }
            Mode::Hm => {
                let a = cutoff_hm(params.epsilon, params.m)?;
                Ok(CutoffRegion {
                    window: SpectralWindow::square(a)?,
                    b_eps: None,
                    a_eps: Some(a),
                })
            }
        }
    }
}

/// `F = 2 R * f - S * g + 4 pi f` on the grid of `f` and `g`.
pub fn assemble_rhs(f: &RealField, g: &RealField) -> Result<RealField> {
    require_same_grid(f.grid(), g.grid())?;
    let grid = *f.grid();
    let rf = convolve2_causal(KernelSpec::R, f, &grid)?;
    let sg = convolve2_causal(KernelSpec::S, g, &grid)?;
    let values = rf
        .values()
        .iter()
        .zip(sg.values())
        .zip(f.values())
        .map(|((r, s), fv)| 2.0 * r - s + DATA_TERM_COEFFICIENT * fv)
        .collect();
    RealField::new(grid, values)
}

/// `F^ / (kappa S^)` inside the window, zero outside.
pub fn spectral_division_with(f_hat: &ComplexField, region: &CutoffRegion, kappa: f64) -> Result<ComplexField> {
    let g = *f_hat.grid();
    region.window.check_coverage(&g)?;
    let mut values = Vec::with_capacity(g.len());
    for l in 0..g.nt {
        let r = g.t(l);
        for k in 0..g.nx {
            let z = g.x(k);
            values.push(if region.window.contains(z, r) {
                f_hat.at(k, l) / (kappa * s_hat(z, r))
            } else {
                Complex64::new(0.0, 0.0)
            });
        }
    }
    ComplexField::new(g, values)
}

pub fn spectral_division(f_hat: &ComplexField, region: &CutoffRegion) -> Result<ComplexField> {
    spectral_division_with(f_hat, region, KAPPA)
}

/// Spectral grid with `nodes` points per axis over `coverage` times the window.
pub fn spectral_grid(window: &SpectralWindow, nodes: usize, coverage: f64) -> Result<GridSpec> {
    if coverage < 1.0 {
        return Err(Error::Parameter(format!(
            "spectral coverage must be at least 1, got {coverage}"
        )));
    }
    let (zm, rm) = (coverage * window.zmax(), coverage * window.rmax());
    GridSpec::spanning(-zm, zm, nodes, -rm, rm, nodes)
}

/// `sum over nodes outside the window of |v0^|^2 dz dr`.
pub fn tail_energy(v0_hat: &ComplexField, region: &CutoffRegion) -> Result<f64> {
    let g = *v0_hat.grid();
    region.window.check_coverage(&g)?;
    let mut acc = 0.0;
    for l in 0..g.nt {
        let r = g.t(l);
        for k in 0..g.nx {
            if !region.window.contains(g.x(k), r) {
                acc += v0_hat.at(k, l).norm_sqr();
            }
        }
    }
    Ok(acc * g.cell_area())
}

/// `sum (z^2 + r^2)^m |v0^|^2 dz dr` over the grid, the Sobolev seminorm estimate.
pub fn hm_seminorm_sq(v0_hat: &ComplexField, m: f64) -> f64 {
    let g = *v0_hat.grid();
    let mut acc = 0.0;
    for l in 0..g.nt {
        for k in 0..g.nx {
            let w = (g.x(k).powi(2) + g.t(l).powi(2)).powf(m);
            acc += w * v0_hat.at(k, l).norm_sqr();
        }
    }
    acc * g.cell_area()
}

/// `(4 + 2 ||R||_1 + ||S||_1)^2` with the norms computed by quadrature.
pub fn stability_constant() -> f64 {
    let (r, s) = kernel_norms();
    (4.0 + 2.0 * r + s).powi(2)
}

/// `sqrt(C eps^(2 - gamma) + eta)`.
pub fn error_bound_l2(epsilon: f64, gamma: f64, eta_hat: f64) -> Result<f64> {
    check_l2(epsilon, gamma)?;
    if !(eta_hat >= 0.0 && eta_hat.is_finite()) {
        return Err(Error::Parameter(format!(
            "tail energy must be finite and nonnegative, got {eta_hat}"
        )));
    }
    Ok((stability_constant() * epsilon.powf(2.0 - gamma) + eta_hat).sqrt())
}

/// `sqrt(C1 (1 + 2^m)) ln(1/eps)^(-m)`.
pub fn error_bound_hm(epsilon: f64, m: f64, c1: f64) -> Result<f64> {
    check_hm(epsilon, m)?;
    if !(c1 > 0.0 && c1.is_finite()) {
        return Err(Error::Parameter(format!("C1 must be positive, got {c1}")));
    }
    let d = (c1 * (1.0 + 2f64.powf(m))).sqrt();
    Ok(d * (1.0 / epsilon).ln().powf(-m))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundReport {
    pub c: f64,
    /// `sqrt(C eps^(2 - gamma))`, the part of the L2 bound that needs no knowledge of v0.
    pub noise_term: Option<f64>,
    pub eta_hat: Option<f64>,
    pub bound_l2: Option<f64>,
    pub c1: Option<f64>,
    pub d: Option<f64>,
    pub bound_hm: Option<f64>,
}

impl BoundReport {
    /// The bound of the active mode, when it could be evaluated.
    pub fn bound(&self) -> Option<f64> {
        self.bound_l2.or(self.bound_hm)
    }
}

#[derive(Debug, Clone)]
pub struct Reconstruction {
    pub v_eps: RealField,
    /// Band-limited representation of the solution, evaluable anywhere.
    pub spectrum: WindowedSpectrum,
    pub v_hat: ComplexField,
    pub region: CutoffRegion,
    pub params: RegParams,
    pub report: BoundReport,
}

impl Reconstruction {
    pub fn evaluate(&self, x: f64, t: f64) -> f64 {
        self.spectrum.eval(x, t)
    }
}

/// Inversion settings: spectral resolution and the convolution constant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Reconstructor {
    pub spectral_nodes: usize,
    pub spectral_coverage: f64,
    pub kappa: f64,
}

impl Default for Reconstructor {
    fn default() -> Self {
        Reconstructor {
            spectral_nodes: DEFAULT_SPECTRAL_NODES,
            spectral_coverage: DEFAULT_SPECTRAL_COVERAGE,
            kappa: KAPPA,
        }
    }
}

impl Reconstructor {
    /// Full pipeline onto `out_grid`. `v0_hat`, the transform of the exact solution on a
    /// grid wider than the window, enables the tail-energy terms of the report.
    pub fn run(
        &self,
        f: &RealField,
        g: &RealField,
        params: &RegParams,
        out_grid: &GridSpec,
        v0_hat: Option<&ComplexField>,
    ) -> Result<Reconstruction> {
        params.validate()?;
        out_grid.validate()?;
        let region = params.region()?;
        let rhs = assemble_rhs(f, g)?;
        let sg = spectral_grid(&region.window, self.spectral_nodes, self.spectral_coverage)?;
        let f_hat = dft2_forward(&rhs, &sg)?;
        let v_hat = spectral_division_with(&f_hat, &region, self.kappa)?;
        let spectrum = WindowedSpectrum::new(&v_hat, &region.window)?;
        let v_eps = spectrum.eval_grid(out_grid)?;
        let report = bound_report(params, &region, v0_hat)?;
        Ok(Reconstruction {
            v_eps,
            spectrum,
            v_hat,
            region,
            params: *params,
            report,
        })
    }
}

pub fn bound_report(params: &RegParams, region: &CutoffRegion, v0_hat: Option<&ComplexField>) -> Result<BoundReport> {
    let c = stability_constant();
    let eta_hat = v0_hat.map(|v| tail_energy(v, region)).transpose()?;
    let mut report = BoundReport {
        c,
        noise_term: None,
        eta_hat,
        bound_l2: None,
        c1: None,
        d: None,
        bound_hm: None,
    };
    match params.mode {
        Mode::L2 => {
            report.noise_term = Some((c * params.epsilon.powf(2.0 - params.gamma)).sqrt());
            if let Some(eta) = eta_hat {
                report.bound_l2 = Some(error_bound_l2(params.epsilon, params.gamma, eta)?);
            }
        }
        Mode::Hm => {
            if let Some(v) = v0_hat {
                let c1 = hm_seminorm_sq(v, params.m);
                if c1 > 0.0 {
                    report.c1 = Some(c1);
                    report.d = Some((c1 * (1.0 + 2f64.powf(params.m))).sqrt());
                    report.bound_hm = Some(error_bound_hm(params.epsilon, params.m, c1)?);
                }
            }
        }
    }
    Ok(report)
}

/// Reconstruction with default settings and no exact solution.
pub fn reconstruct(f: &RealField, g: &RealField, params: &RegParams, out_grid: &GridSpec) -> Result<Reconstruction> {
    Reconstructor::default().run(f, g, params, out_grid, None)
}
