//! Small quadrature toolbox: Gauss-Legendre rules, adaptive Gauss-Kronrod,
//! and the cell integrator behind `fields::sample_cell_mean`.

use std::f64::consts::PI;

/// Gauss-Legendre nodes and weights on [-1, 1], by Newton iteration on P_n.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    if n == 1 {
        return (vec![0.0], vec![2.0]);
    }
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for (j, (&x, &w)) in XGK[..7].iter().zip(&WGK[..7]).enumerate() {
        let s = f(c - h * x) + f(c + h * x);
        kron += w * s;
        if j % 2 == 1 {
            gauss += WG[j / 2] * s;
        }
    }
    (kron * h, ((kron - gauss) * h).abs())
}

/// Adaptive Gauss-Kronrod (7/15) integration with recursive bisection.
pub fn adaptive_gk<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, abs_tol: f64, rel_tol: f64) -> f64 {
    fn rec<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, whole: (f64, f64), tol: f64, depth: u32) -> f64 {
        let (val, err) = whole;
        if err <= tol || depth == 0 {
            return val;
        }
        let m = 0.5 * (a + b);
        let left = gk15(f, a, m);
        let right = gk15(f, m, b);
        rec(f, a, m, left, 0.5 * tol, depth - 1) + rec(f, m, b, right, 0.5 * tol, depth - 1)
    }
    if a == b {
        return 0.0;
    }
    let whole = gk15(f, a, b);
    let tol = abs_tol.max(rel_tol * whole.0.abs());
    rec(f, a, b, whole, tol, 48)
}

/// Integrator for rectangles of a causal field whose only non-smooth behaviour sits
/// on the lower time edge (t = 0).
pub(crate) struct CellIntegrator {
    gl_x: Vec<f64>,
    gl_w: Vec<f64>,
    gl_u: Vec<f64>,
    gl_uw: Vec<f64>,
    rel_tol: f64,
    abs_tol: f64,
}

impl CellIntegrator {
    pub fn new(abs_tol: f64, rel_tol: f64) -> Self {
        let (gl_x, gl_w) = gauss_legendre(5);
        let (gl_u, gl_uw) = gauss_legendre(20);
        CellIntegrator {
            gl_x,
            gl_w,
            gl_u,
            gl_uw,
            rel_tol,
            abs_tol,
        }
    }

    fn tensor<F: Fn(f64, f64) -> f64>(&self, f: &F, a: f64, b: f64, c: f64, d: f64) -> f64 {
        let (hx, cx) = (0.5 * (b - a), 0.5 * (a + b));
        let (ht, ct) = (0.5 * (d - c), 0.5 * (c + d));
        let mut acc = 0.0;
        for (&ut, &wt) in self.gl_x.iter().zip(&self.gl_w) {
            let t = ct + ht * ut;
            let mut row = 0.0;
            for (&ux, &wx) in self.gl_x.iter().zip(&self.gl_w) {
                row += wx * f(cx + hx * ux, t);
            }
            acc += wt * row;
        }
        acc * hx * ht
    }

    /// Integral of `f` over [a, b] x [c, d].
    pub fn integrate<F: Fn(f64, f64) -> f64>(&self, f: &F, a: f64, b: f64, c: f64, d: f64) -> f64 {
        if c < 0.0 && d > 0.0 {
            return self.integrate(f, a, b, c, 0.0) + self.integrate(f, a, b, 0.0, d);
        }
        let whole = self.tensor(f, a, b, c, d);
        let (mx, mt) = (0.5 * (a + b), 0.5 * (c + d));
        let split = self.tensor(f, a, mx, c, mt)
            + self.tensor(f, mx, b, c, mt)
            + self.tensor(f, a, mx, mt, d)
            + self.tensor(f, mx, b, mt, d);
        let area = (b - a) * (d - c);
        if (whole - split).abs() <= (self.abs_tol * area).max(self.rel_tol * split.abs()) {
            return split;
        }
        self.integrate_singular(f, a, b, c, d)
    }

    // t = c + (d - c) u^2 clusters nodes at the lower edge and absorbs a t^{-1/2}
    // profile. The u-range is split into geometric panels so the nodes nearest the edge
    // are fine without letting an adaptive rule chase the edge itself.
    fn integrate_singular<F: Fn(f64, f64) -> f64>(&self, f: &F, a: f64, b: f64, c: f64, d: f64) -> f64 {
        let span = d - c;
        let abs_x = self.abs_tol * (b - a) * 1e-3;
        let rel_x = self.rel_tol * 1e-2;
        let mut acc = 0.0;
        let mut hi = 1.0;
        for _ in 0..SINGULAR_PANELS {
            let lo = if hi > 0.5f64.powi(SINGULAR_PANELS as i32 - 1) {
                0.5 * hi
            } else {
                0.0
            };
            let (h, m) = (0.5 * (hi - lo), 0.5 * (hi + lo));
            for (&x, &w) in self.gl_u.iter().zip(&self.gl_uw) {
                let u = m + h * x;
                let t = c + span * u * u;
                acc += h * w * adaptive_gk(&|x| f(x, t), a, b, abs_x, rel_x) * 2.0 * u * span;
            }
            hi = lo;
        }
        acc
    }
}

const SINGULAR_PANELS: usize = 6;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_integrates_polynomials_exactly() {
        for n in [1, 2, 5, 12, 48] {
            let (x, w) = gauss_legendre(n);
            let degree = 2 * n - 1;
            let q: f64 = x.iter().zip(&w).map(|(&x, &w)| w * x.powi(degree as i32 - 1)).sum();
            // x^{2n-2} is even: integral 2/(2n-1)
            let exact = 2.0 / (degree as f64);
            assert!((q - exact).abs() < 1e-13, "n={n}: {q} vs {exact}");
            let total: f64 = w.iter().sum();
            assert!((total - 2.0).abs() < 1e-13);
        }
    }

    #[test]
    fn adaptive_gk_handles_narrow_peak() {
        let s = 1e-4_f64;
        let f = |x: f64| (-(x - 0.3) * (x - 0.3) / (4.0 * s)).exp();
        let q = adaptive_gk(&f, -1.0, 1.0, 1e-14, 1e-12);
        let exact = (4.0 * PI * s).sqrt();
        assert!((q - exact).abs() < 1e-10 * exact);
    }

    #[test]
    fn cell_integrator_resolves_heat_kernel_corner() {
        // integral of (1/t) e^{-x^2/4t} over [-h, h] x [0, k]
        let f = |x: f64, t: f64| if t > 0.0 { (-x * x / (4.0 * t)).exp() / t } else { 0.0 };
        let (h, k) = (0.01, 0.03);
        let ci = CellIntegrator::new(1e-12, 1e-10);
        let q = ci.integrate(&f, -h, h, -0.01, k);
        // reference: t = u^2 midpoint rule; x by composite Simpson, or the full Gaussian
        // mass when the profile is far inside [-h, h]
        let simpson = |t: f64| {
            if h / (2.0 * t.sqrt()) > 6.5 {
                return (4.0 * PI / t).sqrt();
            }
            let m = 4000;
            let dx = 2.0 * h / m as f64;
            (0..=m)
                .map(|i| {
                    let w = if i == 0 || i == m {
                        1.0
                    } else if i % 2 == 1 {
                        4.0
                    } else {
                        2.0
                    };
                    w * f(-h + i as f64 * dx, t)
                })
                .sum::<f64>()
                * dx
                / 3.0
        };
        let n = 20000;
        let du = k.sqrt() / n as f64;
        let reference: f64 = (0..n)
            .map(|j| {
                let u = (j as f64 + 0.5) * du;
                simpson(u * u) * 2.0 * u * du
            })
            .sum();
        assert!((q - reference).abs() < 1e-7 * reference, "{q} vs {reference}");
    }
}
