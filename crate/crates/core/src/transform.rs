//! Continuous 2D Fourier transform with the symmetric convention
//! `h^(z, r) = (1/2pi) int int h(x, t) e^{-i(xz + tr)} dx dt`, its windowed inverse, and
//! causal convolution with the kernel family.
//!
//! All integrals are rectangle-rule sums over grid nodes. With this convention the
//! convolution theorem reads `(K * w)^ = 2pi K^ w^`.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::fields::{ComplexField, GridSpec, RealField};
use crate::kernels::{kernel_eval, KernelSpec};

/// Maximum tolerated `max|Im| / max|Re|` after a windowed inverse transform.
pub const IMAGINARY_RESIDUE_LIMIT: f64 = 1e-6;

/// Gaussian factors below this fraction of the peak are dropped from convolutions.
pub const GAUSSIAN_CUTOFF: f64 = 1e-12;

const WINDOW_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SpectralWindow {
    /// `|z| <= zmax, |r| <= rmax`.
    RectLr { zmax: f64, rmax: f64 },
    /// `|z|, |r| <= a`.
    Square { a: f64 },
}

impl SpectralWindow {
    pub fn rect(zmax: f64, rmax: f64) -> Result<Self> {
        if !(zmax > 0.0 && rmax > 0.0 && zmax.is_finite() && rmax.is_finite()) {
            return Err(Error::Parameter(format!(
                "window half-widths must be positive, got ({zmax}, {rmax})"
            )));
        }
        Ok(SpectralWindow::RectLr { zmax, rmax })
    }

    pub fn square(a: f64) -> Result<Self> {
        if !(a > 0.0 && a.is_finite()) {
            return Err(Error::Parameter(format!("window half-width must be positive, got {a}")));
        }
        Ok(SpectralWindow::Square { a })
    }

    pub fn zmax(&self) -> f64 {
        match *self {
            SpectralWindow::RectLr { zmax, .. } => zmax,
            SpectralWindow::Square { a } => a,
        }
    }

    pub fn rmax(&self) -> f64 {
        match *self {
            SpectralWindow::RectLr { rmax, .. } => rmax,
            SpectralWindow::Square { a } => a,
        }
    }

    pub fn contains_z(&self, z: f64) -> bool {
        z.abs() <= self.zmax() * (1.0 + WINDOW_SLACK)
    }

    pub fn contains_r(&self, r: f64) -> bool {
        r.abs() <= self.rmax() * (1.0 + WINDOW_SLACK)
    }

    pub fn contains(&self, z: f64, r: f64) -> bool {
        self.contains_z(z) && self.contains_r(r)
    }

    /// Error unless the node range of `grid` reaches both edges of the window.
    pub fn check_coverage(&self, grid: &GridSpec) -> Result<()> {
        let tol_z = 1e-9 * grid.dx;
        let tol_r = 1e-9 * grid.dt;
        let (zmax, rmax) = (self.zmax(), self.rmax());
        if grid.x0 > -zmax + tol_z
            || grid.x_end() < zmax - tol_z
            || grid.t0 > -rmax + tol_r
            || grid.t_end() < rmax - tol_r
        {
            return Err(Error::Coverage(format!(
                "spectral grid [{}, {}] x [{}, {}] does not cover the window |z| <= {zmax}, |r| <= {rmax}",
                grid.x0,
                grid.x_end(),
                grid.t0,
                grid.t_end()
            )));
        }
        Ok(())
    }
}

/// `e^{sign i a b}` for all pairs, laid out `[a][b]`.
fn twiddles(a: &[f64], b: &[f64], sign: f64) -> Vec<Complex64> {
    let mut out = Vec::with_capacity(a.len() * b.len());
    for &u in a {
        for &v in b {
            let (s, c) = (u * v).sin_cos();
            out.push(Complex64::new(c, sign * s));
        }
    }
    out
}

#[inline]
fn dot_real(w: &[Complex64], v: &[f64]) -> Complex64 {
    let (mut re, mut im) = (0.0, 0.0);
    for (a, &b) in w.iter().zip(v) {
        re += a.re * b;
        im += a.im * b;
    }
    Complex64::new(re, im)
}

#[inline]
fn dot_complex(w: &[Complex64], v: &[Complex64]) -> Complex64 {
    let (mut re, mut im) = (0.0, 0.0);
    for (a, b) in w.iter().zip(v) {
        re += a.re * b.re - a.im * b.im;
        im += a.re * b.im + a.im * b.re;
    }
    Complex64::new(re, im)
}

/// Rectangle-rule forward transform sampled on `spectral_grid`, whose x-axis is `z` and
/// whose t-axis is `r`.
///
/// The double sum factorizes as `sum_j e^{-i t_j r} (sum_i f_ij e^{-i x_i z})`, so it is
/// evaluated as two dense matrix products.
pub fn dft2_forward(field: &RealField, spectral_grid: &GridSpec) -> Result<ComplexField> {
    spectral_grid.validate()?;
    let g = *field.grid();
    let (zs, rs) = (spectral_grid.xs(), spectral_grid.ts());
    let ex = twiddles(&zs, &g.xs(), -1.0); // [k][i]
    let et = twiddles(&rs, &g.ts(), -1.0); // [l][j]
    let (nx, nt, nz) = (g.nx, g.nt, zs.len());
    // stage 1: a[k][j] = sum_i f[j][i] e^{-i x_i z_k}
    let a: Vec<Complex64> = (0..nz)
        .into_par_iter()
        .flat_map_iter(|k| {
            let row = &ex[k * nx..(k + 1) * nx];
            (0..nt).map(move |j| dot_real(row, field.row(j)))
        })
        .collect();
    let scale = g.cell_area() / (2.0 * PI);
    // stage 2: out[l][k] = sum_j a[k][j] e^{-i t_j r_l}
    let values: Vec<Complex64> = (0..rs.len())
        .into_par_iter()
        .flat_map_iter(|l| {
            let row = &et[l * nt..(l + 1) * nt];
            let a = &a;
            (0..nz).map(move |k| dot_complex(row, &a[k * nt..(k + 1) * nt]) * scale)
        })
        .collect();
    ComplexField::new(*spectral_grid, values)
}

/// Literal quadruple sum of the forward transform. Reference for `dft2_forward`.
pub fn dft2_forward_naive(field: &RealField, spectral_grid: &GridSpec) -> Result<ComplexField> {
    spectral_grid.validate()?;
    let g = *field.grid();
    let scale = g.cell_area() / (2.0 * PI);
    let mut values = Vec::with_capacity(spectral_grid.len());
    for l in 0..spectral_grid.nt {
        let r = spectral_grid.t(l);
        for k in 0..spectral_grid.nx {
            let z = spectral_grid.x(k);
            let mut acc = Complex64::new(0.0, 0.0);
            for j in 0..g.nt {
                for i in 0..g.nx {
                    let ph = -(g.x(i) * z + g.t(j) * r);
                    acc += field.at(i, j) * Complex64::new(ph.cos(), ph.sin());
                }
            }
            values.push(acc * scale);
        }
    }
    ComplexField::new(*spectral_grid, values)
}

/// A spectrum restricted to the nodes of a window. Evaluating it is the rectangle-rule
/// inverse transform over those nodes, a band-limited function of `(x, t)`.
#[derive(Debug, Clone)]
pub struct WindowedSpectrum {
    zs: Vec<f64>,
    rs: Vec<f64>,
    /// `[l][k]` over the retained nodes.
    coeffs: Vec<Complex64>,
    scale: f64,
}

impl WindowedSpectrum {
    pub fn new(spec: &ComplexField, window: &SpectralWindow) -> Result<Self> {
        let g = *spec.grid();
        window.check_coverage(&g)?;
        let ks: Vec<usize> = (0..g.nx).filter(|&k| window.contains_z(g.x(k))).collect();
        let ls: Vec<usize> = (0..g.nt).filter(|&l| window.contains_r(g.t(l))).collect();
        let mut coeffs = Vec::with_capacity(ks.len() * ls.len());
        for &l in &ls {
            for &k in &ks {
                coeffs.push(spec.at(k, l));
            }
        }
        Ok(WindowedSpectrum {
            zs: ks.iter().map(|&k| g.x(k)).collect(),
            rs: ls.iter().map(|&l| g.t(l)).collect(),
            coeffs,
            scale: g.cell_area() / (2.0 * PI),
        })
    }

    pub fn node_count(&self) -> usize {
        self.coeffs.len()
    }

    /// Complex value of the inverse sum at one point.
    pub fn eval_complex(&self, x: f64, t: f64) -> Complex64 {
        let nk = self.zs.len();
        let ez: Vec<Complex64> = self.zs.iter().map(|&z| Complex64::from_polar(1.0, x * z)).collect();
        let mut acc = Complex64::new(0.0, 0.0);
        for (l, &r) in self.rs.iter().enumerate() {
            let inner = dot_complex(&ez, &self.coeffs[l * nk..(l + 1) * nk]);
            acc += inner * Complex64::from_polar(1.0, t * r);
        }
        acc * self.scale
    }

    pub fn eval(&self, x: f64, t: f64) -> f64 {
        self.eval_complex(x, t).re
    }

    /// Inverse transform on a grid, separably. Fails if the result is not real.
    pub fn eval_grid(&self, grid: &GridSpec) -> Result<RealField> {
        grid.validate()?;
        if self.coeffs.is_empty() {
            return Ok(RealField::zeros(*grid));
        }
        let (nk, nl) = (self.zs.len(), self.rs.len());
        let ex = twiddles(&grid.xs(), &self.zs, 1.0); // [i][k]
        let et = twiddles(&grid.ts(), &self.rs, 1.0); // [j][l]
                                                      // b[i][l] = sum_k c[l][k] e^{i x_i z_k}
        let b: Vec<Complex64> = (0..grid.nx)
            .into_par_iter()
            .flat_map_iter(|i| {
                let row = &ex[i * nk..(i + 1) * nk];
                (0..nl).map(move |l| dot_complex(row, &self.coeffs[l * nk..(l + 1) * nk]))
            })
            .collect();
        let full: Vec<Complex64> = (0..grid.nt)
            .into_par_iter()
            .flat_map_iter(|j| {
                let row = &et[j * nl..(j + 1) * nl];
                let b = &b;
                (0..grid.nx).map(move |i| dot_complex(row, &b[i * nl..(i + 1) * nl]) * self.scale)
            })
            .collect();
        let max_re = full.iter().fold(0.0f64, |m, v| m.max(v.re.abs()));
        let max_im = full.iter().fold(0.0f64, |m, v| m.max(v.im.abs()));
        if max_im > 0.0 {
            let ratio = if max_re > 0.0 { max_im / max_re } else { f64::INFINITY };
            if ratio > IMAGINARY_RESIDUE_LIMIT {
                return Err(Error::ImaginaryResidue {
                    ratio,
                    limit: IMAGINARY_RESIDUE_LIMIT,
                });
            }
        }
        RealField::new(*grid, full.into_iter().map(|v| v.re).collect())
    }
}

/// `(1/2pi) sum over window nodes of spec e^{+i(xz + tr)} dz dr` on `phys_grid`.
pub fn idft2_windowed(spec: &ComplexField, window: &SpectralWindow, phys_grid: &GridSpec) -> Result<RealField> {
    WindowedSpectrum::new(spec, window)?.eval_grid(phys_grid)
}

/// Rectangle-rule causal convolution `(K * w)(x, t) = sum K(x - xi, t - tau) w(xi, tau) dxi dtau`
/// over the nodes of `w`, evaluated on `out_grid`.
///
/// When `out_grid` lies on the lattice of `w` with the same spacing, the sum is a discrete
/// linear convolution and is computed with FFTs; otherwise it is summed directly.
pub fn convolve2_causal(spec: KernelSpec, w: &RealField, out_grid: &GridSpec) -> Result<RealField> {
    out_grid.validate()?;
    let wg = w.grid();
    if out_grid.t0 < wg.t0 - 1e-9 * wg.dt {
        return Err(Error::Grid(format!(
            "output grid starts at t = {} before the convolved field (t0 = {})",
            out_grid.t0, wg.t0
        )));
    }
    match wg.lattice_offset(out_grid) {
        Some(offset) => convolve_fft(spec, w, out_grid, offset),
        None => convolve_direct(spec, w, out_grid),
    }
}

#[inline]
fn truncated_kernel(spec: KernelSpec, x: f64, t: f64) -> f64 {
    // x^2 / 4t > ln(1e12) means the Gaussian factor is below the cutoff
    if t > 0.0 && x * x <= 4.0 * t * (-GAUSSIAN_CUTOFF.ln()) {
        kernel_eval(spec, x, t)
    } else {
        0.0
    }
}

/// Direct summation. Reference for the FFT path and fallback for unaligned grids.
pub fn convolve_direct(spec: KernelSpec, w: &RealField, out_grid: &GridSpec) -> Result<RealField> {
    let wg = *w.grid();
    let area = wg.cell_area();
    let values: Vec<f64> = (0..out_grid.nt)
        .into_par_iter()
        .flat_map_iter(|j| {
            let t = out_grid.t(j);
            (0..out_grid.nx).map(move |i| {
                let x = out_grid.x(i);
                let mut acc = 0.0;
                for l in 0..wg.nt {
                    let s = t - wg.t(l);
                    if s <= 0.0 {
                        break;
                    }
                    let row = w.row(l);
                    for (k, &wv) in row.iter().enumerate() {
                        if wv != 0.0 {
                            acc += truncated_kernel(spec, x - wg.x(k), s) * wv;
                        }
                    }
                }
                acc * area
            })
        })
        .collect();
    RealField::new(*out_grid, values)
}

/// Smallest integer >= n of the form 2^a 3^b 5^c.
fn fft_size(n: usize) -> usize {
    let mut m = n.max(1);
    loop {
        let mut r = m;
        for p in [2, 3, 5] {
            while r.is_multiple_of(p) {
                r /= p;
            }
        }
        if r == 1 {
            return m;
        }
        m += 1;
    }
}

fn fft_rows(data: &mut [Complex64], cols: usize, fft: &Arc<dyn Fft<f64>>) {
    data.par_chunks_mut(cols).for_each(|row| fft.process(row));
}

fn transpose(data: &[Complex64], rows: usize, cols: usize) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); data.len()];
    out.par_chunks_mut(rows).enumerate().for_each(|(c, col)| {
        for (r, v) in col.iter_mut().enumerate() {
            *v = data[r * cols + c];
        }
    });
    out
}

// Forward 2D FFT of a rows x cols array; the result is stored transposed (cols x rows).
fn fft2_transposed(
    mut data: Vec<Complex64>,
    rows: usize,
    cols: usize,
    planner: &mut FftPlanner<f64>,
) -> Vec<Complex64> {
    fft_rows(&mut data, cols, &planner.plan_fft_forward(cols));
    let mut tr = transpose(&data, rows, cols);
    fft_rows(&mut tr, rows, &planner.plan_fft_forward(rows));
    tr
}

fn convolve_fft(spec: KernelSpec, w: &RealField, out_grid: &GridSpec, (ox, ot): (i64, i64)) -> Result<RealField> {
    let wg = *w.grid();
    let (nwx, nwt) = (wg.nx as i64, wg.nt as i64);
    let (nox, not) = (out_grid.nx as i64, out_grid.nt as i64);
    // lattice differences out_index - w_index
    let mx0 = ox - (nwx - 1);
    let mt0 = ot - (nwt - 1);
    let (nkx, nkt) = (nwx + nox - 1, nwt + not - 1);
    if mt0 + nkt - 1 <= 0 {
        return Ok(RealField::zeros(*out_grid));
    }
    let (px, pt) = (fft_size(nkx as usize), fft_size(nkt as usize));
    let zero = Complex64::new(0.0, 0.0);

    // t-major (pt rows of px)
    let mut a = vec![zero; px * pt];
    for j in 0..wg.nt {
        for (i, &v) in w.row(j).iter().enumerate() {
            a[j * px + i] = Complex64::new(v, 0.0);
        }
    }
    let mut kern = vec![zero; px * pt];
    kern.par_chunks_mut(px)
        .enumerate()
        .take(nkt as usize)
        .for_each(|(q, row)| {
            let s = (mt0 + q as i64) as f64 * wg.dt;
            if s > 0.0 {
                for (p, v) in row.iter_mut().enumerate().take(nkx as usize) {
                    *v = Complex64::new(truncated_kernel(spec, (mx0 + p as i64) as f64 * wg.dx, s), 0.0);
                }
            }
        });

    let mut planner = FftPlanner::new();
    let fa = fft2_transposed(a, pt, px, &mut planner);
    let fk = fft2_transposed(kern, pt, px, &mut planner);
    let mut prod = fa;
    prod.par_iter_mut().zip(&fk).for_each(|(x, y)| *x *= y);
    drop(fk);
    // inverse: prod is px rows of pt
    fft_rows(&mut prod, pt, &planner.plan_fft_inverse(pt));
    let mut back = transpose(&prod, px, pt);
    fft_rows(&mut back, px, &planner.plan_fft_inverse(px));

    let norm = wg.cell_area() / (px * pt) as f64;
    // out index (i, j) sits at linear-convolution position (i + nwx - 1, j + nwt - 1)
    let mut values = Vec::with_capacity(out_grid.len());
    for j in 0..out_grid.nt {
        let q = j + wg.nt - 1;
        for i in 0..out_grid.nx {
            let p = i + wg.nx - 1;
            values.push(back[q * px + p].re * norm);
        }
    }
    RealField::new(*out_grid, values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{l2_distance, l2_norm, l2_norm_complex, sample};
    use crate::kernels::s_hat;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_field(grid: GridSpec, seed: u64) -> RealField {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let v = (0..grid.len()).map(|_| rng.random_range(-1.0..1.0)).collect();
        RealField::new(grid, v).unwrap()
    }

    fn max_norm(f: &ComplexField) -> f64 {
        f.values().iter().fold(0.0, |m, v| m.max(v.norm()))
    }

    fn gaussian_grid() -> GridSpec {
        GridSpec::spanning(-8.0, 8.0, 257, -8.0, 8.0, 257).unwrap()
    }

    #[test]
    fn gaussian_transform() {
        let f = sample(|x, t| (-x * x - t * t).exp(), &gaussian_grid()).unwrap();
        let sg = GridSpec::spanning(-3.0, 3.0, 7, -3.0, 3.0, 7).unwrap();
        let h = dft2_forward(&f, &sg).unwrap();
        assert!((h.at(3, 3).re - 0.5).abs() < 1e-12);
        for l in 0..7 {
            for k in 0..7 {
                let (z, r) = (sg.x(k), sg.t(l));
                let exact = 0.5 * (-(z * z + r * r) / 4.0).exp();
                assert!((h.at(k, l) - exact).norm() < 1e-12, "({z},{r})");
            }
        }
    }

    #[test]
    fn fast_path_matches_definition() {
        let g = GridSpec::new(-1.3, 0.11, 32, 0.05, 0.07, 32).unwrap();
        let f = random_field(g, 7);
        let sg = GridSpec::new(-4.0, 0.26, 32, -5.0, 0.31, 32).unwrap();
        let fast = dft2_forward(&f, &sg).unwrap();
        let slow = dft2_forward_naive(&f, &sg).unwrap();
        let diff = max_norm(&fast.sub(&slow).unwrap());
        assert!(diff <= 1e-10 * max_norm(&slow), "{diff}");
    }

    #[test]
    fn linearity() {
        let g = GridSpec::new(-1.0, 0.1, 21, 0.0, 0.1, 17).unwrap();
        let (a, b) = (random_field(g, 1), random_field(g, 2));
        let sg = GridSpec::spanning(-6.0, 6.0, 13, -6.0, 6.0, 13).unwrap();
        let lhs = dft2_forward(&a.add(&b).unwrap(), &sg).unwrap();
        let rhs: Vec<Complex64> = dft2_forward(&a, &sg)
            .unwrap()
            .values()
            .iter()
            .zip(dft2_forward(&b, &sg).unwrap().values())
            .map(|(x, y)| x + y)
            .collect();
        let rhs = ComplexField::new(sg, rhs).unwrap();
        assert!(max_norm(&lhs.sub(&rhs).unwrap()) <= 1e-12 * max_norm(&rhs));
    }

    #[test]
    fn parseval_and_round_trip() {
        let grid = gaussian_grid();
        let f = sample(|x, t| (-(x - 0.5).powi(2) - 2.0 * t * t).exp(), &grid).unwrap();
        // spectrum decays like e^{-z^2/4 - r^2/8}; |z| <= 10, |r| <= 14 holds all but ~1e-10
        let sg = GridSpec::spanning(-10.0, 10.0, 161, -14.0, 14.0, 225).unwrap();
        let h = dft2_forward(&f, &sg).unwrap();
        let (n0, n1) = (l2_norm(&f), l2_norm_complex(&h));
        assert!((n0 - n1).abs() <= 1e-2 * n0, "{n0} vs {n1}");
        let window = SpectralWindow::rect(10.0, 14.0).unwrap();
        let back = idft2_windowed(&h, &window, &grid).unwrap();
        assert!(l2_distance(&back, &f).unwrap() <= 1e-3 * n0);
    }

    #[test]
    fn windowed_inverse_edge_cases() {
        let sg = GridSpec::spanning(-2.0, 2.0, 5, -2.0, 2.0, 5).unwrap();
        let phys = GridSpec::new(0.0, 0.1, 4, 0.0, 0.1, 4).unwrap();
        let ones = ComplexField::new(sg, vec![Complex64::new(1.0, 0.0); 25]).unwrap();
        // no node inside |z| <= 0.5 except z = 0; a window between nodes of r keeps none
        let w = SpectralWindow::rect(0.5, 0.5).unwrap();
        let only_origin = idft2_windowed(&ones, &w, &phys).unwrap();
        assert!(only_origin
            .values()
            .iter()
            .all(|&v| (v - 1.0 / (2.0 * PI)).abs() < 1e-15));
        let sg_off = GridSpec::spanning(-2.5, 2.5, 6, -2.5, 2.5, 6).unwrap();
        let off = ComplexField::new(sg_off, vec![Complex64::new(1.0, 0.0); 36]).unwrap();
        let empty = idft2_windowed(&off, &SpectralWindow::rect(0.4, 0.4).unwrap(), &phys).unwrap();
        assert!(empty.values().iter().all(|&v| v == 0.0));
        // coverage
        assert!(matches!(
            idft2_windowed(&ones, &SpectralWindow::rect(3.0, 1.0).unwrap(), &phys),
            Err(Error::Coverage(_))
        ));
        // asymmetric spectrum
        let mut v = vec![Complex64::new(0.0, 0.0); 25];
        v[2 * 5 + 3] = Complex64::new(1.0, 0.0);
        let asym = ComplexField::new(sg, v).unwrap();
        assert!(matches!(
            idft2_windowed(&asym, &SpectralWindow::rect(2.0, 2.0).unwrap(), &phys),
            Err(Error::ImaginaryResidue { .. })
        ));
        // zero input
        let zero = idft2_windowed(
            &ComplexField::zeros(sg),
            &SpectralWindow::rect(2.0, 2.0).unwrap(),
            &phys,
        )
        .unwrap();
        assert_eq!(l2_norm(&zero), 0.0);
    }

    #[test]
    fn point_evaluation_matches_grid() {
        let grid = GridSpec::spanning(-4.0, 4.0, 65, -4.0, 4.0, 65).unwrap();
        let f = sample(|x, t| (-x * x - t * t).exp(), &grid).unwrap();
        let sg = GridSpec::spanning(-6.0, 6.0, 49, -6.0, 6.0, 49).unwrap();
        let spec =
            WindowedSpectrum::new(&dft2_forward(&f, &sg).unwrap(), &SpectralWindow::square(6.0).unwrap()).unwrap();
        let out = GridSpec::new(-0.3, 0.2, 4, 0.1, 0.3, 3).unwrap();
        let on_grid = spec.eval_grid(&out).unwrap();
        for j in 0..3 {
            for i in 0..4 {
                assert!((spec.eval(out.x(i), out.t(j)) - on_grid.at(i, j)).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn convolution_zero_and_bad_grid() {
        let g = GridSpec::new(-2.0, 0.1, 41, 0.0, 0.1, 20).unwrap();
        let out = GridSpec::new(-1.0, 0.1, 21, 0.5, 0.1, 10).unwrap();
        let zero = convolve2_causal(KernelSpec::S, &RealField::zeros(g), &out).unwrap();
        assert_eq!(l2_norm(&zero), 0.0);
        let early = GridSpec::new(-1.0, 0.1, 21, -0.5, 0.1, 10).unwrap();
        assert!(convolve2_causal(KernelSpec::S, &RealField::zeros(g), &early).is_err());
    }

    #[test]
    fn fft_path_matches_direct_sum() {
        let g = GridSpec::new(-1.6, 0.1, 32, 0.0, 0.1, 32).unwrap();
        let w = random_field(g, 11);
        for out in [
            GridSpec::new(-1.6, 0.1, 32, 0.0, 0.1, 32).unwrap(),
            GridSpec::new(-0.4, 0.1, 17, 1.2, 0.1, 25).unwrap(),
            GridSpec::new(-3.0, 0.1, 9, 2.9, 0.1, 6).unwrap(),
        ] {
            assert!(g.lattice_offset(&out).is_some());
            for spec in [KernelSpec::S, KernelSpec::R] {
                let fast = convolve2_causal(spec, &w, &out).unwrap();
                let slow = convolve_direct(spec, &w, &out).unwrap();
                let scale = slow.max_abs();
                let diff = fast.sub(&slow).unwrap().max_abs();
                assert!(diff <= 1e-10 * scale, "{diff} vs {scale}");
            }
        }
    }

    #[test]
    fn convolution_is_shift_equivariant() {
        let g = GridSpec::new(-4.0, 0.1, 81, 0.0, 0.1, 50).unwrap();
        let bump = |x: f64, t: f64| {
            if t > 0.0 {
                (-(x * x) * 4.0 - (t - 0.8).powi(2) * 8.0).exp()
            } else {
                0.0
            }
        };
        let w = sample(bump, &g).unwrap();
        let shifted = sample(|x, t| bump(x - 0.3, t - 0.5), &g).unwrap();
        let out = GridSpec::new(-1.0, 0.1, 11, 1.0, 0.1, 10).unwrap();
        let out_shift = GridSpec::new(-0.7, 0.1, 11, 1.5, 0.1, 10).unwrap();
        let a = convolve2_causal(KernelSpec::S, &w, &out).unwrap();
        let b = convolve2_causal(KernelSpec::S, &shifted, &out_shift).unwrap();
        assert!(a
            .values()
            .iter()
            .zip(b.values())
            .all(|(u, v)| (u - v).abs() <= 1e-10 * a.max_abs()));
    }

    #[test]
    fn convolution_theorem_with_two_pi() {
        // a compact bump convolved with S; compare transforms at a few frequencies
        // e^{-t z^2} makes t <= 30 and |x| <= 25 ample for z >= 1
        let g = GridSpec::new(-25.0, 0.05, 1001, 0.0, 0.05, 601).unwrap();
        let bump = |x: f64, t: f64| {
            if t > 0.0 {
                (-(x * x) * 2.0 - (t - 1.0).powi(2) * 4.0).exp()
            } else {
                0.0
            }
        };
        let w = sample(bump, &g).unwrap();
        let kw = convolve2_causal(KernelSpec::S, &w, &g).unwrap();
        let sg = GridSpec::spanning(1.0, 2.0, 2, -2.0, 2.0, 3).unwrap();
        let lhs = dft2_forward(&kw, &sg).unwrap();
        let what = dft2_forward(&w, &sg).unwrap();
        for l in 0..3 {
            for k in 0..2 {
                let (z, r) = (sg.x(k), sg.t(l));
                let rhs = 2.0 * PI * s_hat(z, r) * what.at(k, l);
                assert!(
                    (lhs.at(k, l) - rhs).norm() <= 1e-2 * rhs.norm(),
                    "({z},{r}): {} vs {rhs}",
                    lhs.at(k, l)
                );
                let wrong = s_hat(z, r) * what.at(k, l);
                assert!((lhs.at(k, l) - wrong).norm() > 0.5 * rhs.norm());
            }
        }
    }

    #[test]
    fn sampled_s_transform_matches_symbol() {
        // plain uniform grid over [-80, 80] x (0, 200]: the t^{-3/2} tail loses mass at the
        // origin, elsewhere the truncation is below 1e-3
        let g = GridSpec::new(-80.0, 0.125, 1281, 0.025, 0.025, 8000).unwrap();
        let s = sample(|x, t| kernel_eval(KernelSpec::S, x, t), &g).unwrap();
        let sg = GridSpec::spanning(-2.0, 2.0, 5, -2.0, 2.0, 5).unwrap();
        let h = dft2_forward(&s, &sg).unwrap();
        for l in 0..5 {
            for k in 0..5 {
                let (z, r) = (sg.x(k), sg.t(l));
                let exact = s_hat(z, r);
                let err = (h.at(k, l) - exact).norm() / exact.norm();
                if z == 0.0 && r == 0.0 {
                    // (1/2pi) int_0^T 2 sqrt(pi) t^{-3/2} e^{-1/4t} dt = 2 erfc(1/(2 sqrt T))
                    // missing tail ~ 2/sqrt(pi T)
                    let tail = 2.0 / (PI * 200.0).sqrt();
                    assert!((h.at(k, l).re - (2.0 - tail)).abs() < 2e-3, "{}", h.at(k, l));
                } else {
                    assert!(err <= 1e-3, "({z},{r}): rel err {err}");
                }
            }
        }
    }
}
