//! Closed-form kernels of the strip problem, the Fourier symbol of S, and the two
//! exact test problems.
//!
//! The kernels are the family `K_c(x, t) = t^-2 exp(-(x^2 + c) / 4t)` for `t > 0` and
//! zero otherwise. S has `c = 1` and R has `c = 4`.

use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::quad::adaptive_gk;

const CHUNK: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelSpec {
    c: f64,
}

impl KernelSpec {
    /// The kernel S of the convolution equation (offset 1).
    pub const S: KernelSpec = KernelSpec { c: 1.0 };
    /// The kernel R of the convolution equation (offset 4).
    pub const R: KernelSpec = KernelSpec { c: 4.0 };

    pub fn new(c: f64) -> Result<Self> {
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::Domain(format!(
                "kernel offset must be positive and finite, got {c}"
            )));
        }
        Ok(KernelSpec { c })
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    /// Exact L1 norm, 4 pi / sqrt(c). Used only to cross-check the quadrature.
    pub fn l1_norm_exact(&self) -> f64 {
        4.0 * PI / self.c.sqrt()
    }
}

fn check_forward(t: f64, tau: f64) -> Result<f64> {
    let s = t - tau;
    if s > 0.0 && s.is_finite() {
        Ok(s)
    } else {
        Err(Error::Domain(format!("kernel needs t > tau, got t - tau = {s}")))
    }
}

/// Fundamental solution of the 2D heat equation.
pub fn gamma_fundamental(x: f64, y: f64, t: f64, xi: f64, eta: f64, tau: f64) -> Result<f64> {
    let s = check_forward(t, tau)?;
    let d2 = (x - xi).powi(2) + (y - eta).powi(2);
    Ok((-d2 / (4.0 * s)).exp() / (4.0 * PI * s))
}

/// Green function of the strip with its image across y = 2.
pub fn green_g(x: f64, y: f64, t: f64, xi: f64, eta: f64, tau: f64) -> Result<f64> {
    Ok(gamma_fundamental(x, y, t, xi, eta, tau)? - gamma_fundamental(x, 4.0 - y, t, xi, eta, tau)?)
}

/// Odd image kernel across y = 0.
pub fn image_n(x: f64, y: f64, t: f64, xi: f64, eta: f64, tau: f64) -> Result<f64> {
    Ok(gamma_fundamental(x, y, t, xi, eta, tau)? - gamma_fundamental(x, -y, t, xi, eta, tau)?)
}

/// `K_c(x, t)`, extended by zero for `t <= 0`.
#[inline]
pub fn kernel_eval(spec: KernelSpec, x: f64, t: f64) -> f64 {
    if t > 0.0 {
        (-(x * x + spec.c) / (4.0 * t)).exp() / (t * t)
    } else {
        0.0
    }
}

// A and B of the closed form: sqrt(z^2 + i r) = A + i sgn(r) B.
fn symbol_exponents(z: f64, r: f64) -> (f64, f64) {
    let z2 = z * z;
    let q = z2.hypot(r);
    let a = FRAC_1_SQRT_2 * (q + z2).sqrt();
    let b = FRAC_1_SQRT_2 * (q - z2).max(0.0).sqrt();
    (a, b)
}

fn sgn(r: f64) -> f64 {
    if r > 0.0 {
        1.0
    } else if r < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Fourier symbol of S: `2 e^{-A} (cos B - i sgn(r) sin B)`.
pub fn s_hat(z: f64, r: f64) -> Complex64 {
    let (a, b) = symbol_exponents(z, r);
    let m = 2.0 * (-a).exp();
    Complex64::new(m * b.cos(), -sgn(r) * m * b.sin())
}

pub fn s_hat_abs(z: f64, r: f64) -> f64 {
    2.0 * (-symbol_exponents(z, r).0).exp()
}

/// Simplified form `2 e^{-sqrt(r^2 + z^4)}` quoted alongside the P1 experiment. It is
/// not the symbol of S; kept for reporting how far it is from it.
pub fn s_hat_shorthand(z: f64, r: f64) -> f64 {
    2.0 * (-(r * r + z.powi(4)).sqrt()).exp()
}

/// Rectangle-rule quadrature of the defining integrals of `K_c` in the variables
/// `t = e^s`, `x = sqrt(t) y`.
///
/// In these variables `K_c dx dt = t^{-1/2} e^{-y^2/4} e^{-c/4t} dy ds`, so the heat-kernel
/// spreading and the slow `t^{-3/2}` tail become a Gaussian in `y` and a smooth profile in
/// `s` that a uniform rule resolves to near machine precision. The time horizon is chosen
/// per frequency: `e^{-t z^2}` cuts the integrand off once `z != 0`, `1/r` damps the
/// oscillating tail at `z = 0`, and only the origin needs a very long horizon.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymbolQuadrature {
    pub y_max: f64,
    pub dy: f64,
    /// Largest step in `s = ln t`.
    pub ds_max: f64,
    /// Largest phase advance `|r| t ds` per step at the horizon.
    pub phase_step: f64,
    /// Horizon multiple of `1/z^2` for `z != 0`.
    pub decay_horizon: f64,
    /// Horizon for `z = 0, r != 0`.
    pub oscillatory_horizon: f64,
    /// Horizon for `z = r = 0`.
    pub static_horizon: f64,
}

impl Default for SymbolQuadrature {
    fn default() -> Self {
        SymbolQuadrature {
            y_max: 20.0,
            dy: 0.1,
            ds_max: 0.05,
            phase_step: 0.25,
            decay_horizon: 60.0,
            oscillatory_horizon: 5000.0,
            static_horizon: 1e14,
        }
    }
}

impl SymbolQuadrature {
    fn horizon(&self, z: f64, r: f64) -> f64 {
        let base = if r != 0.0 {
            self.oscillatory_horizon
        } else {
            self.static_horizon
        };
        if z != 0.0 {
            base.min(self.decay_horizon / (z * z))
        } else {
            base
        }
    }

    /// `(1/2pi) int int K_c(x, t) e^{-i(xz + tr)} dx dt`.
    pub fn symbol(&self, spec: KernelSpec, z: f64, r: f64) -> Complex64 {
        let horizon = self.horizon(z, r);
        let t_min = spec.c / 400.0; // e^{-c/4t} < e^{-100} below this
        if horizon <= t_min {
            return Complex64::new(0.0, 0.0);
        }
        let (s0, s1) = (t_min.ln(), horizon.ln());
        let mut ds = self.ds_max;
        if r != 0.0 {
            ds = ds.min(self.phase_step / (r.abs() * horizon));
        }
        let n = ((s1 - s0) / ds).ceil() as usize;
        let ds = (s1 - s0) / n as f64;
        let ny = (self.y_max / self.dy).round() as usize;
        let ys: Vec<f64> = (1..=ny).map(|k| k as f64 * self.dy).collect();
        let gauss: Vec<f64> = ys.iter().map(|y| (-y * y / 4.0).exp()).collect();
        // e^{-y^2/4} e^{-i sqrt(t) y z} summed over a symmetric y lattice is real
        let y_sum = |t: f64| -> f64 {
            let w = t.sqrt() * z;
            let tail: f64 = ys.iter().zip(&gauss).map(|(y, g)| g * (w * y).cos()).sum();
            self.dy * (1.0 + 2.0 * tail)
        };
        let y_sum_static = if z == 0.0 { Some(y_sum(1.0)) } else { None };
        // fixed chunks summed in order keep the result independent of scheduling
        let partials: Vec<Complex64> = (0..n.div_ceil(CHUNK))
            .into_par_iter()
            .map(|c| {
                let mut acc = Complex64::new(0.0, 0.0);
                for k in c * CHUNK..((c + 1) * CHUNK).min(n) {
                    let t = (s0 + (k as f64 + 0.5) * ds).exp();
                    let ysum = y_sum_static.unwrap_or_else(|| y_sum(t));
                    let amp = ysum * (-spec.c / (4.0 * t)).exp() / t.sqrt();
                    let ph = -t * r;
                    acc += Complex64::new(amp * ph.cos(), amp * ph.sin());
                }
                acc
            })
            .collect();
        let acc: Complex64 = partials.iter().sum();
        acc * ds / (2.0 * PI)
    }
}

/// `||K_c||_1` by quadrature. The kernel is nonnegative, so this is 2 pi times the
/// symbol at the origin.
pub fn kernel_l1_norm(spec: KernelSpec) -> Result<f64> {
    KernelSpec::new(spec.c)?;
    Ok(2.0 * PI * SymbolQuadrature::default().symbol(spec, 0.0, 0.0).re)
}

/// `(||R||_1, ||S||_1)`, computed once per process.
pub fn kernel_norms() -> (f64, f64) {
    static NORMS: OnceLock<(f64, f64)> = OnceLock::new();
    *NORMS.get_or_init(|| {
        (
            kernel_l1_norm(KernelSpec::R).expect("R offset is valid"),
            kernel_l1_norm(KernelSpec::S).expect("S offset is valid"),
        )
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ProblemId {
    P1,
    P2,
}

impl FromStr for ProblemId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "p1" => Ok(ProblemId::P1),
            "p2" => Ok(ProblemId::P2),
            other => Err(Error::Parameter(format!(
                "unknown test problem {other:?} (expected p1 or p2)"
            ))),
        }
    }
}

impl fmt::Display for ProblemId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ProblemId::P1 => "p1",
            ProblemId::P2 => "p2",
        })
    }
}

/// A test problem with known data at y = 1 (f0), y = 2 (g0) and known surface
/// temperature v at y = 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TestProblem {
    pub id: ProblemId,
}

/// `erf(q) - erf(p)` without cancellation in the tails.
fn erf_diff(p: f64, q: f64) -> f64 {
    if p >= 0.0 {
        libm::erfc(p) - libm::erfc(q)
    } else if q <= 0.0 {
        libm::erfc(-q) - libm::erfc(-p)
    } else {
        libm::erf(q) - libm::erf(p)
    }
}

#[inline]
fn heat_profile(c: f64, x: f64, t: f64) -> f64 {
    if t > 0.0 {
        (-(x * x + c) / (4.0 * t)).exp() / t
    } else {
        0.0
    }
}

impl TestProblem {
    pub fn new(id: ProblemId) -> Self {
        TestProblem { id }
    }

    pub fn f0(&self, x: f64, t: f64) -> f64 {
        match self.id {
            ProblemId::P1 => heat_profile(1.0, x, t),
            ProblemId::P2 => 0.0,
        }
    }

    pub fn g0(&self, x: f64, t: f64) -> f64 {
        heat_profile(4.0, x, t)
    }

    pub fn v_exact(&self, x: f64, t: f64) -> f64 {
        match self.id {
            ProblemId::P1 => heat_profile(0.0, x, t),
            ProblemId::P2 => -heat_profile(4.0, x, t),
        }
    }

    /// Integral of `v_exact` over `[a, b] x [c, d]`, for P1 only.
    ///
    /// The x-integral is an error-function difference; with `t = u^2` the remaining
    /// integrand `2 sqrt(pi) (erf(b / 2u) - erf(a / 2u))` is bounded, so the origin
    /// singularity costs nothing.
    pub fn v_cell_integral(&self, a: f64, b: f64, c: f64, d: f64) -> Option<f64> {
        if self.id != ProblemId::P1 {
            return None;
        }
        let (lo, hi) = (c.max(0.0).sqrt(), d.max(0.0).sqrt());
        if hi <= lo {
            return Some(0.0);
        }
        let integrand = |u: f64| {
            if u <= 0.0 {
                let sign = |v: f64| if v == 0.0 { 0.0 } else { v.signum() };
                return sign(b) - sign(a);
            }
            erf_diff(a / (2.0 * u), b / (2.0 * u))
        };
        Some(2.0 * PI.sqrt() * adaptive_gk(&integrand, lo, hi, 1e-15, 1e-13))
    }

    /// The closed-form transform of the right-hand side quoted for P1,
    /// `4 e^{-sqrt(r^2 + z^4)} / sqrt(r^2 + z^4)`. Undefined at the origin.
    pub fn f_hat_closed(&self, z: f64, r: f64) -> Option<f64> {
        match self.id {
            ProblemId::P1 => {
                let q = (r * r + z.powi(4)).sqrt();
                Some(4.0 * (-q).exp() / q)
            }
            ProblemId::P2 => None,
        }
    }

    /// The exact transform of `v_exact` where it is elementary (P1: `1/sqrt(z^2 + i r)`).
    pub fn v_hat_exact(&self, z: f64, r: f64) -> Option<Complex64> {
        match self.id {
            ProblemId::P1 => Some(Complex64::new(z * z, r).sqrt().inv()),
            ProblemId::P2 => None,
        }
    }
}

pub fn test_problem(id: &str) -> Result<TestProblem> {
    Ok(TestProblem::new(id.parse()?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn close(a: f64, b: f64, rel: f64) -> bool {
        (a - b).abs() <= rel * b.abs().max(1e-300)
    }

    #[test]
    fn kernel_spec_rejects_nonpositive_offset() {
        assert!(KernelSpec::new(0.0).is_err());
        assert!(KernelSpec::new(-1.0).is_err());
        assert!(KernelSpec::new(f64::NAN).is_err());
        assert_eq!(KernelSpec::new(1.0).unwrap(), KernelSpec::S);
    }

    #[test]
    fn gamma_peak_and_domain() {
        let v = gamma_fundamental(0.3, 0.7, 2.0, 0.3, 0.7, 1.0).unwrap();
        assert!(close(v, 1.0 / (4.0 * PI), 1e-15));
        assert!(gamma_fundamental(0.0, 0.0, 1.0, 0.0, 0.0, 1.0).is_err());
        assert!(green_g(0.0, 0.0, 0.5, 0.0, 0.0, 1.0).is_err());
        assert!(image_n(0.0, 0.0, 0.5, 0.0, 0.0, 1.0).is_err());
    }

    #[test]
    fn gamma_integrates_to_one() {
        // 2D midpoint rule on [-12, 12]^2 around the source, t - tau = 0.7
        let h = 0.02;
        let n = (24.0 / h) as usize;
        let sum: f64 = (0..n)
            .into_par_iter()
            .map(|i| {
                let xi = -12.0 + (i as f64 + 0.5) * h;
                (0..n)
                    .map(|j| {
                        let eta = -12.0 + (j as f64 + 0.5) * h;
                        gamma_fundamental(0.1, -0.2, 1.7, xi + 0.1, eta - 0.2, 1.0).unwrap()
                    })
                    .sum::<f64>()
            })
            .sum();
        assert!(close(sum * h * h, 1.0, 1e-10), "{}", sum * h * h);
    }

    #[test]
    fn green_and_image_symmetries() {
        let (x, t, xi, eta, tau) = (0.4, 3.0, -0.2, 0.9, 1.5);
        assert_eq!(green_g(x, 2.0, t, xi, eta, tau).unwrap(), 0.0);
        assert_eq!(image_n(x, 0.0, t, xi, eta, tau).unwrap(), 0.0);
        for y in [0.3, 1.0, 1.7, 2.9] {
            let g = green_g(x, y, t, xi, eta, tau).unwrap();
            let gm = green_g(x, 4.0 - y, t, xi, eta, tau).unwrap();
            assert!((g + gm).abs() < 1e-16);
            let n = image_n(x, y, t, xi, eta, tau).unwrap();
            let nm = image_n(x, -y, t, xi, eta, tau).unwrap();
            assert!((n + nm).abs() < 1e-16);
        }
        // y = 1, x = xi, t - tau = 1: the two offsets are (1 - eta) and (3 - eta)
        let eta = 0.25;
        let g = green_g(0.0, 1.0, 1.0, 0.0, eta, 0.0).unwrap();
        let expect = ((-(0.75f64).powi(2) / 4.0).exp() - (-(2.75f64).powi(2) / 4.0).exp()) / (4.0 * PI);
        assert!(close(g, expect, 1e-14));
        let n = image_n(0.0, 1.0, 1.0, 0.0, 1.0, 0.0).unwrap();
        assert!(close(n, (1.0 - (-1.0f64).exp()) / (4.0 * PI), 1e-14));
    }

    #[test]
    fn kernel_values() {
        assert_eq!(kernel_eval(KernelSpec::S, 0.0, 0.0), 0.0);
        assert!(kernel_eval(KernelSpec::S, 0.0, 1e-3) < 1e-100);
        assert!(close(kernel_eval(KernelSpec::S, 0.0, 1.0), (-0.25f64).exp(), 1e-15));
        assert!(close(kernel_eval(KernelSpec::S, 0.0, 1.0), 0.778801, 1e-6));
        assert_eq!(kernel_eval(KernelSpec::R, 2.0, -1.0), 0.0);
    }

    #[test]
    fn s_hat_examples() {
        let o = s_hat(0.0, 0.0);
        assert_eq!((o.re, o.im), (2.0, 0.0));
        let a = s_hat(1.0, 0.0);
        assert!(close(a.re, 2.0 * (-1.0f64).exp(), 1e-15) && a.im == 0.0);
        // (0, 4): A = B = sqrt 2
        let b = s_hat(0.0, 4.0);
        let s2 = 2f64.sqrt();
        assert!(close(b.re, 2.0 * (-s2).exp() * s2.cos(), 1e-14));
        assert!(close(b.im, -2.0 * (-s2).exp() * s2.sin(), 1e-14));
        assert!((b.re - 0.07583).abs() < 5e-5 && (b.im + 0.48029).abs() < 5e-5);
        assert!(close(s_hat_abs(2.0, 0.0), 2.0 * (-2.0f64).exp(), 1e-15));
        assert!(close(s_hat_abs(2.0, 0.0), 0.270671, 2e-6));
        assert!(close(s_hat_abs(0.0, 2.0), 0.735759, 1e-6));
        assert_eq!(s_hat_abs(0.0, 0.0), 2.0);
        // the shorthand only agrees where z^4 = z^2
        assert!(close(s_hat_shorthand(1.0, 0.0), s_hat_abs(1.0, 0.0), 1e-15));
        assert!(close(s_hat_shorthand(2.0, 0.0), 2.0 * (-4.0f64).exp(), 1e-15));
    }

    #[test]
    fn s_hat_is_two_exp_minus_principal_root() {
        // sqrt(z^2 + i r) is the symbol exponent; check the closed form against it
        for &(z, r) in &[(0.3, -2.0), (1.5, 0.7), (-2.0, 3.0), (0.0, -1.0)] {
            let w = Complex64::new(z * z, r).sqrt();
            let expect = 2.0 * (-w).exp();
            assert!((s_hat(z, r) - expect).norm() < 1e-14);
        }
    }

    #[test]
    fn lattice_properties() {
        let pts: Vec<f64> = (0..21).map(|k| -3.0 + 0.3 * k as f64).collect();
        for &z in &pts {
            for &r in &pts {
                let s = s_hat(z, r);
                let m = s_hat_abs(z, r);
                assert!(close(s.norm(), m, 1e-12), "({z},{r})");
                assert!(m <= 2.0);
                if z.abs() > 1e-12 || r.abs() > 1e-12 {
                    assert!(m < 2.0);
                }
                let conj = s_hat(z, -r);
                assert!((conj - s.conj()).norm() <= 1e-15 * m.max(1e-300));
                assert_eq!(s_hat(-z, r), s);
            }
        }
        // strictly decreasing moving away from the axes
        for &z in &pts {
            for w in pts.windows(2).filter(|w| w[0] >= -1e-12) {
                assert!(s_hat_abs(z, w[1]) < s_hat_abs(z, w[0]));
                assert!(s_hat_abs(w[1], z) < s_hat_abs(w[0], z));
            }
        }
    }

    #[test]
    #[allow(clippy::approx_constant)]
    fn l1_norms_match_closed_form() {
        for c in [1.0, 4.0, 16.0] {
            let spec = KernelSpec::new(c).unwrap();
            let q = kernel_l1_norm(spec).unwrap();
            assert!(close(q, spec.l1_norm_exact(), 1e-6), "c={c}: {q}");
        }
        assert!(close(kernel_l1_norm(KernelSpec::S).unwrap(), 12.56637, 1e-6));
        assert!(close(kernel_l1_norm(KernelSpec::R).unwrap(), 6.28319, 1e-6));
        let (r, s) = kernel_norms();
        assert!(close(r, 2.0 * PI, 1e-6) && close(s, 4.0 * PI, 1e-6));
    }

    #[test]
    fn symbol_quadrature_matches_closed_form() {
        let q = SymbolQuadrature::default();
        for z in [-2.0, -1.0, 0.0, 1.0, 2.0] {
            for r in [-2.0, -1.0, 0.0, 1.0, 2.0] {
                let num = q.symbol(KernelSpec::S, z, r);
                let exact = s_hat(z, r);
                assert!(
                    (num - exact).norm() <= 1e-5 * exact.norm(),
                    "({z},{r}): {num} vs {exact}"
                );
            }
        }
        // R has symbol e^{-2 sqrt(z^2 + i r)}
        let num = q.symbol(KernelSpec::R, 1.0, 1.0);
        let exact = (-2.0 * Complex64::new(1.0, 1.0).sqrt()).exp();
        assert!((num - exact).norm() <= 1e-5 * exact.norm());
    }

    #[test]
    fn problems() {
        let p1 = test_problem("p1").unwrap();
        let p2 = test_problem("P2").unwrap();
        assert!(test_problem("p3").is_err());
        assert!(close(p1.v_exact(0.5, 1.0), (-1.0f64 / 16.0).exp(), 1e-15));
        assert!(close(p1.v_exact(0.5, 1.0), 0.939413, 1e-6));
        assert!(close(p2.v_exact(0.0, 1.0), -(-1.0f64).exp(), 1e-15));
        assert!(close(p1.f_hat_closed(0.0, 1.0).unwrap(), 4.0 * (-1.0f64).exp(), 1e-15));
        assert!(close(p1.f_hat_closed(0.0, 1.0).unwrap(), 1.471518, 1e-6));
        assert!(p2.f_hat_closed(0.0, 1.0).is_none());
        for t in [-1.0, 0.0] {
            for p in [p1, p2] {
                assert_eq!((p.f0(0.3, t), p.g0(0.3, t), p.v_exact(0.3, t)), (0.0, 0.0, 0.0));
            }
        }
        assert!(close(p1.f0(0.2, 0.5), (-(0.04 + 1.0) / 2.0f64).exp() / 0.5, 1e-15));
        assert!(close(p1.g0(0.2, 0.5), (-(0.04 + 4.0) / 2.0f64).exp() / 0.5, 1e-15));
    }

    #[test]
    fn p2_solution_is_minus_g() {
        let p2 = TestProblem::new(ProblemId::P2);
        for i in 0..41 {
            for j in 0..41 {
                let (x, t) = (-2.0 + 0.1 * i as f64, 0.1 * j as f64);
                assert!((p2.v_exact(x, t) + p2.g0(x, t)).abs() <= 1e-12);
                assert_eq!(p2.f0(x, t), 0.0);
            }
        }
    }

    proptest! {
        #[test]
        fn s_hat_modulus_and_symmetry(z in -10.0f64..10.0, r in -50.0f64..50.0) {
            let s = s_hat(z, r);
            prop_assert!((s.norm() - s_hat_abs(z, r)).abs() <= 1e-12 * s_hat_abs(z, r));
            prop_assert!((s_hat(z, -r) - s.conj()).norm() <= 1e-15);
            prop_assert_eq!(s_hat(-z, r), s);
        }

        #[test]
        fn kernels_are_causal_and_nonnegative(c in 0.01f64..20.0, x in -10.0f64..10.0, t in -5.0f64..50.0) {
            let k = kernel_eval(KernelSpec::new(c).unwrap(), x, t);
            prop_assert!(k.is_finite() && k >= 0.0);
            if t <= 0.0 { prop_assert_eq!(k, 0.0); }
        }
    }

    #[test]
    fn p1_cell_integrals_match_two_dimensional_quadrature() {
        let p = TestProblem::new(ProblemId::P1);
        // references from an independent adaptive two-dimensional quadrature
        let cases = [
            ((-0.01, 0.01, -0.01, 0.03), 0.17026277827869415),
            ((0.3, 0.35, 0.1, 0.13), 0.010398369746751637),
            ((-0.2, -0.1, 0.0, 0.05), 0.17588419433638083),
        ];
        for ((a, b, c, d), want) in cases {
            let got = p.v_cell_integral(a, b, c, d).unwrap();
            assert!((got - want).abs() <= 1e-9 * want, "{got} vs {want}");
        }
        assert_eq!(p.v_cell_integral(0.0, 1.0, -1.0, 0.0), Some(0.0));
        assert!(TestProblem::new(ProblemId::P2)
            .v_cell_integral(0.0, 1.0, 0.0, 1.0)
            .is_none());
    }
}
