//! Uniform-grid samples of functions of (x, t), or of (z, r) on the spectral side.
//!
//! Values are stored row-major with one row per time index: node (i, j) lives at
//! `values[j * nx + i]` and sits at `(x0 + i dx, t0 + j dt)`.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::quad::CellIntegrator;

/// Geometry of a uniform 2D grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub x0: f64,
    pub dx: f64,
    pub nx: usize,
    pub t0: f64,
    pub dt: f64,
    pub nt: usize,
}

impl GridSpec {
    pub fn new(x0: f64, dx: f64, nx: usize, t0: f64, dt: f64, nt: usize) -> Result<Self> {
        let g = GridSpec { x0, dx, nx, t0, dt, nt };
        g.validate()?;
        Ok(g)
    }

    /// Grid with `nx` x `nt` nodes spanning the closed rectangle [xa, xb] x [ta, tb].
    pub fn spanning(xa: f64, xb: f64, nx: usize, ta: f64, tb: f64, nt: usize) -> Result<Self> {
        if nx < 2 || nt < 2 {
            return Err(Error::Grid(format!("need at least 2x2 nodes, got {nx}x{nt}")));
        }
        Self::new(xa, (xb - xa) / (nx - 1) as f64, nx, ta, (tb - ta) / (nt - 1) as f64, nt)
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [self.x0, self.dx, self.t0, self.dt].iter().all(|v| v.is_finite());
        if !finite {
            return Err(Error::Grid(format!("non-finite grid parameters {self:?}")));
        }
        if !(self.dx > 0.0 && self.dt > 0.0) {
            return Err(Error::Grid(format!(
                "spacings must be positive (dx={}, dt={})",
                self.dx, self.dt
            )));
        }
        if self.nx < 2 || self.nt < 2 {
            return Err(Error::Grid(format!(
                "need at least 2x2 nodes, got {}x{}",
                self.nx, self.nt
            )));
        }
        Ok(())
    }

    #[inline]
    pub fn x(&self, i: usize) -> f64 {
        self.x0 + i as f64 * self.dx
    }

    #[inline]
    pub fn t(&self, j: usize) -> f64 {
        self.t0 + j as f64 * self.dt
    }

    pub fn x_end(&self) -> f64 {
        self.x(self.nx - 1)
    }

    pub fn t_end(&self) -> f64 {
        self.t(self.nt - 1)
    }

    pub fn len(&self) -> usize {
        self.nx * self.nt
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn cell_area(&self) -> f64 {
        self.dx * self.dt
    }

    pub fn xs(&self) -> Vec<f64> {
        (0..self.nx).map(|i| self.x(i)).collect()
    }

    pub fn ts(&self) -> Vec<f64> {
        (0..self.nt).map(|j| self.t(j)).collect()
    }

    /// Same geometry up to floating-point noise in the parameters.
    pub fn same_as(&self, other: &GridSpec) -> bool {
        let close = |a: f64, b: f64, scale: f64| (a - b).abs() <= 1e-12 * scale.max(a.abs()).max(b.abs());
        self.nx == other.nx
            && self.nt == other.nt
            && close(self.dx, other.dx, self.dx)
            && close(self.dt, other.dt, self.dt)
            && close(self.x0, other.x0, self.dx)
            && close(self.t0, other.t0, self.dt)
    }

    /// If `other` has the same spacing and its nodes lie on this grid's lattice, the
    /// lattice offset of other's first node, in index units.
    pub fn lattice_offset(&self, other: &GridSpec) -> Option<(i64, i64)> {
        let tol = 1e-9;
        if (self.dx - other.dx).abs() > 1e-12 * self.dx || (self.dt - other.dt).abs() > 1e-12 * self.dt {
            return None;
        }
        let ox = (other.x0 - self.x0) / self.dx;
        let ot = (other.t0 - self.t0) / self.dt;
        if (ox - ox.round()).abs() > tol || (ot - ot.round()).abs() > tol {
            return None;
        }
        Some((ox.round() as i64, ot.round() as i64))
    }

    pub fn describe(&self) -> String {
        format!(
            "{},{},{},{},{},{}",
            self.nx,
            self.nt,
            fmt_num(self.x0),
            fmt_num(self.dx),
            fmt_num(self.t0),
            fmt_num(self.dt)
        )
    }
}

impl std::str::FromStr for GridSpec {
    type Err = Error;

    /// Parses "nx,nt,x0,dx,t0,dt".
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(',').map(str::trim).collect();
        if parts.len() != 6 {
            return Err(Error::Grid(format!("expected \"nx,nt,x0,dx,t0,dt\", got {s:?}")));
        }
        let int = |p: &str| p.parse::<usize>().map_err(|e| Error::Grid(format!("{p:?}: {e}")));
        let real = |p: &str| p.parse::<f64>().map_err(|e| Error::Grid(format!("{p:?}: {e}")));
        GridSpec::new(
            real(parts[2])?,
            real(parts[3])?,
            int(parts[0])?,
            real(parts[4])?,
            real(parts[5])?,
            int(parts[1])?,
        )
    }
}

/// 17 significant digits, the output format used everywhere in this crate.
pub fn fmt_num(v: f64) -> String {
    format!("{v:.16e}")
}

#[derive(Debug, Clone, PartialEq)]
pub struct RealField {
    grid: GridSpec,
    values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComplexField {
    grid: GridSpec,
    values: Vec<Complex64>,
}

fn check_finite<'a>(grid: &GridSpec, it: impl Iterator<Item = (usize, &'a f64)>) -> Result<()> {
    for (k, &v) in it {
        if !v.is_finite() {
            return Err(Error::NonFinite {
                i: k % grid.nx,
                j: k / grid.nx,
                value: v,
            });
        }
    }
    Ok(())
}

impl RealField {
    pub fn new(grid: GridSpec, values: Vec<f64>) -> Result<Self> {
        grid.validate()?;
        if values.len() != grid.len() {
            return Err(Error::Grid(format!(
                "expected {} values for a {}x{} grid, got {}",
                grid.len(),
                grid.nx,
                grid.nt,
                values.len()
            )));
        }
        check_finite(&grid, values.iter().enumerate())?;
        Ok(RealField { grid, values })
    }

    pub fn zeros(grid: GridSpec) -> Self {
        RealField {
            grid,
            values: vec![0.0; grid.len()],
        }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[j * self.grid.nx + i]
    }

    /// Row of x-values at time index `j`.
    pub fn row(&self, j: usize) -> &[f64] {
        &self.values[j * self.grid.nx..(j + 1) * self.grid.nx]
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        RealField::new(self.grid, self.values.iter().map(|&v| f(v)).collect())
    }

    pub fn scale(&self, alpha: f64) -> Result<Self> {
        self.map(|v| alpha * v)
    }

    /// `alpha * self + beta * other` on a shared grid.
    pub fn combine(&self, alpha: f64, other: &RealField, beta: f64) -> Result<Self> {
        require_same_grid(&self.grid, &other.grid)?;
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(&a, &b)| alpha * a + beta * b)
            .collect();
        RealField::new(self.grid, values)
    }

    pub fn sub(&self, other: &RealField) -> Result<Self> {
        self.combine(1.0, other, -1.0)
    }

    pub fn add(&self, other: &RealField) -> Result<Self> {
        self.combine(1.0, other, 1.0)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Restriction to a sub-lattice: `sub`'s nodes must be nodes of this grid.
    pub fn restrict(&self, sub: &GridSpec) -> Result<Self> {
        let step_x = (sub.dx / self.grid.dx).round();
        let step_t = (sub.dt / self.grid.dt).round();
        let bad_step = (sub.dx / self.grid.dx - step_x).abs() > 1e-9 || (sub.dt / self.grid.dt - step_t).abs() > 1e-9;
        let ox = (sub.x0 - self.grid.x0) / self.grid.dx;
        let ot = (sub.t0 - self.grid.t0) / self.grid.dt;
        if bad_step || step_x < 1.0 || step_t < 1.0 || (ox - ox.round()).abs() > 1e-9 || (ot - ot.round()).abs() > 1e-9
        {
            return Err(Error::GridMismatch(format!(
                "{sub:?} is not a sub-lattice of {:?}",
                self.grid
            )));
        }
        let (sx, st, ox, ot) = (step_x as i64, step_t as i64, ox.round() as i64, ot.round() as i64);
        let last_i = ox + sx * (sub.nx as i64 - 1);
        let last_j = ot + st * (sub.nt as i64 - 1);
        if ox < 0 || ot < 0 || last_i >= self.grid.nx as i64 || last_j >= self.grid.nt as i64 {
            return Err(Error::Coverage(format!("{sub:?} extends beyond {:?}", self.grid)));
        }
        let mut values = Vec::with_capacity(sub.len());
        for j in 0..sub.nt as i64 {
            for i in 0..sub.nx as i64 {
                values.push(self.at((ox + sx * i) as usize, (ot + st * j) as usize));
            }
        }
        RealField::new(*sub, values)
    }
}

impl ComplexField {
    pub fn new(grid: GridSpec, values: Vec<Complex64>) -> Result<Self> {
        grid.validate()?;
        if values.len() != grid.len() {
            return Err(Error::Grid(format!(
                "expected {} values for a {}x{} grid, got {}",
                grid.len(),
                grid.nx,
                grid.nt,
                values.len()
            )));
        }
        for (k, v) in values.iter().enumerate() {
            if !(v.re.is_finite() && v.im.is_finite()) {
                return Err(Error::NonFinite {
                    i: k % grid.nx,
                    j: k / grid.nx,
                    value: if v.re.is_finite() { v.im } else { v.re },
                });
            }
        }
        Ok(ComplexField { grid, values })
    }

    pub fn zeros(grid: GridSpec) -> Self {
        ComplexField {
            grid,
            values: vec![Complex64::new(0.0, 0.0); grid.len()],
        }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    #[inline]
    pub fn at(&self, k: usize, l: usize) -> Complex64 {
        self.values[l * self.grid.nx + k]
    }

    pub fn sub(&self, other: &ComplexField) -> Result<Self> {
        require_same_grid(&self.grid, &other.grid)?;
        ComplexField::new(
            self.grid,
            self.values.iter().zip(&other.values).map(|(a, b)| a - b).collect(),
        )
    }
}

pub(crate) fn require_same_grid(a: &GridSpec, b: &GridSpec) -> Result<()> {
    if a.same_as(b) {
        Ok(())
    } else {
        Err(Error::GridMismatch(format!("{a:?} vs {b:?}")))
    }
}

/// Point samples `values[i, j] = f(x_i, t_j)`.
pub fn sample<F>(f: F, grid: &GridSpec) -> Result<RealField>
where
    F: Fn(f64, f64) -> f64 + Sync,
{
    grid.validate()?;
    let values: Vec<f64> = (0..grid.nt)
        .into_par_iter()
        .flat_map_iter(|j| {
            let t = grid.t(j);
            let f = &f;
            (0..grid.nx).map(move |i| f(grid.x(i), t))
        })
        .collect();
    RealField::new(*grid, values)
}

/// Cell means: `values[i, j]` is the average of `f` over
/// `[x_i - dx/2, x_i + dx/2] x [t_j - dt/2, t_j + dt/2]`.
///
/// Cells are integrated adaptively, so causal fields with an integrable singularity on
/// `t = 0` (the P1 surface temperature) are represented by their exact local mass
/// rather than by point values that the rectangle rule cannot integrate.
pub fn sample_cell_mean<F>(f: F, grid: &GridSpec) -> Result<RealField>
where
    F: Fn(f64, f64) -> f64 + Sync,
{
    grid.validate()?;
    let integrator = CellIntegrator::new(1e-13, 1e-10);
    let (hx, ht) = (0.5 * grid.dx, 0.5 * grid.dt);
    let area = grid.cell_area();
    let values: Vec<f64> = (0..grid.nt)
        .into_par_iter()
        .flat_map_iter(|j| {
            let t = grid.t(j);
            let (f, integrator) = (&f, &integrator);
            (0..grid.nx).map(move |i| {
                let x = grid.x(i);
                integrator.integrate(f, x - hx, x + hx, t - ht, t + ht) / area
            })
        })
        .collect();
    RealField::new(*grid, values)
}

/// Discrete L2 norm, `sqrt(dx dt sum |v|^2)` (rectangle rule).
pub fn l2_norm(field: &RealField) -> f64 {
    (field.grid.cell_area() * field.values.iter().map(|v| v * v).sum::<f64>()).sqrt()
}

pub fn l2_norm_complex(field: &ComplexField) -> f64 {
    (field.grid.cell_area() * field.values.iter().map(|v| v.norm_sqr()).sum::<f64>()).sqrt()
}

pub fn l2_distance(a: &RealField, b: &RealField) -> Result<f64> {
    require_same_grid(&a.grid, &b.grid)?;
    let ss: f64 = a.values.iter().zip(&b.values).map(|(x, y)| (x - y) * (x - y)).sum();
    Ok((a.grid.cell_area() * ss).sqrt())
}

/// GRD text format: header line `nx nt x0 dx t0 dt`, then `nt` lines of `nx` values.
pub fn write_field(field: &RealField, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let g = &field.grid;
    let mut out = String::with_capacity(field.values.len() * 24 + 128);
    writeln!(
        out,
        "{} {} {} {} {} {}",
        g.nx,
        g.nt,
        fmt_num(g.x0),
        fmt_num(g.dx),
        fmt_num(g.t0),
        fmt_num(g.dt)
    )
    .unwrap();
    for j in 0..g.nt {
        let row: Vec<String> = field.row(j).iter().map(|&v| fmt_num(v)).collect();
        out.push_str(&row.join(" "));
        out.push('\n');
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

pub fn read_field(path: impl AsRef<Path>) -> Result<RealField> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_field(&text, path)
}

fn parse_field(text: &str, path: &Path) -> Result<RealField> {
    let err = |line: usize, msg: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        msg,
    };
    let mut lines = text.lines().enumerate().map(|(k, l)| (k + 1, l.trim()));
    let (hline, header) = loop {
        match lines.next() {
            Some((_, l)) if l.is_empty() || l.starts_with('#') => continue,
            Some(h) => break h,
            None => return Err(err(1, "missing header".into())),
        }
    };
    let tok: Vec<&str> = header.split_whitespace().collect();
    if tok.len() != 6 {
        return Err(err(
            hline,
            format!("header needs 6 fields (nx nt x0 dx t0 dt), found {}", tok.len()),
        ));
    }
    let int = |s: &str| s.parse::<usize>().map_err(|e| err(hline, format!("{s:?}: {e}")));
    let real = |s: &str| match s.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        Ok(v) => Err(err(hline, format!("non-finite header value {v}"))),
        Err(e) => Err(err(hline, format!("{s:?}: {e}"))),
    };
    let grid = GridSpec::new(
        real(tok[2])?,
        real(tok[3])?,
        int(tok[0])?,
        real(tok[4])?,
        real(tok[5])?,
        int(tok[1])?,
    )
    .map_err(|e| err(hline, e.to_string()))?;

    let mut values = Vec::with_capacity(grid.len());
    let mut rows = 0;
    let mut last_line = hline;
    for (ln, line) in lines {
        last_line = ln;
        if line.is_empty() {
            continue;
        }
        if rows == grid.nt {
            return Err(err(ln, format!("more than {} data rows", grid.nt)));
        }
        let before = values.len();
        for s in line.split_whitespace() {
            match s.parse::<f64>() {
                Ok(v) if v.is_finite() => values.push(v),
                Ok(v) => return Err(err(ln, format!("non-finite value {v}"))),
                Err(e) => return Err(err(ln, format!("{s:?}: {e}"))),
            }
        }
        if values.len() - before != grid.nx {
            return Err(err(
                ln,
                format!("expected {} values, found {}", grid.nx, values.len() - before),
            ));
        }
        rows += 1;
    }
    if rows != grid.nt {
        return Err(err(last_line, format!("expected {} data rows, found {rows}", grid.nt)));
    }
    RealField::new(grid, values)
}

/// CSV with header `x,t,value`, one row per node in storage order.
pub fn write_csv(field: &RealField, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let g = &field.grid;
    let mut out = String::with_capacity(field.values.len() * 64 + 16);
    out.push_str("x,t,value\n");
    for j in 0..g.nt {
        for i in 0..g.nx {
            writeln!(
                out,
                "{},{},{}",
                fmt_num(g.x(i)),
                fmt_num(g.t(j)),
                fmt_num(field.at(i, j))
            )
            .unwrap();
        }
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn grid(nx: usize, nt: usize) -> GridSpec {
        GridSpec::new(-1.0, 0.5, nx, 0.0, 0.25, nt).unwrap()
    }

    #[test]
    fn grid_invariants_rejected() {
        assert!(GridSpec::new(0.0, 0.0, 4, 0.0, 1.0, 4).is_err());
        assert!(GridSpec::new(0.0, 1.0, 1, 0.0, 1.0, 4).is_err());
        assert!(GridSpec::new(0.0, 1.0, 4, 0.0, -1.0, 4).is_err());
        assert!(GridSpec::new(f64::NAN, 1.0, 4, 0.0, 1.0, 4).is_err());
        assert!("4,4,0,1,0".parse::<GridSpec>().is_err());
        let g: GridSpec = "3,5,0.25,0.5,0.1,0.2".parse().unwrap();
        assert_eq!((g.nx, g.nt), (3, 5));
        assert!((g.t(4) - 0.9).abs() < 1e-15);
    }

    #[test]
    fn sample_constant_and_nan() {
        let g = grid(5, 4);
        let ones = sample(|_, _| 1.0, &g).unwrap();
        assert!(ones.values().iter().all(|&v| v == 1.0));
        let e = sample(|x, t| if x == 0.0 && t == 0.5 { f64::NAN } else { 0.0 }, &g).unwrap_err();
        match e {
            Error::NonFinite { i, j, .. } => assert_eq!((i, j), (2, 2)),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn sample_p1_surface_is_finite_positive() {
        let g = GridSpec::spanning(0.25, 1.3, 43, 0.1, 4.0, 40).unwrap();
        let f = sample(|x, t| (-x * x / (4.0 * t)).exp() / t, &g).unwrap();
        assert!(f.values().iter().all(|&v| v > 0.0 && v.is_finite()));
    }

    #[test]
    fn l2_norm_constant_and_zero() {
        // rectangle rule over nx*nt nodes covers an (nx dx) x (nt dt) area
        let g = grid(8, 12);
        let c = sample(|_, _| -3.0, &g).unwrap();
        let area = 8.0 * 0.5 * 12.0 * 0.25;
        assert!((l2_norm(&c) - 3.0 * f64::sqrt(area)).abs() < 1e-12);
        assert_eq!(l2_norm(&RealField::zeros(g)), 0.0);
    }

    #[test]
    fn l2_norm_of_gaussian() {
        let h = 1.0 / 64.0;
        let n = (16.0 / h) as usize + 1;
        let g = GridSpec::new(-8.0, h, n, -8.0, h, n).unwrap();
        let f = sample(|x, t| (-x * x - t * t).exp(), &g).unwrap();
        assert!((l2_norm(&f) - (PI / 2.0).sqrt()).abs() < 1e-3);
        // halving the spacing barely moves the norm
        let g2 = GridSpec::new(-8.0, h / 2.0, 2 * n - 1, -8.0, h / 2.0, 2 * n - 1).unwrap();
        let f2 = sample(|x, t| (-x * x - t * t).exp(), &g2).unwrap();
        assert!((l2_norm(&f2) - l2_norm(&f)).abs() < 1e-4 * l2_norm(&f));
    }

    #[test]
    fn l2_distance_cases() {
        let g = grid(6, 6);
        let a = sample(|x, t| x * t + 1.0, &g).unwrap();
        assert_eq!(l2_distance(&a, &a).unwrap(), 0.0);
        let b = a.map(|v| v + 0.5).unwrap();
        let area = 6.0 * 0.5 * 6.0 * 0.25;
        assert!((l2_distance(&a, &b).unwrap() - 0.5 * f64::sqrt(area)).abs() < 1e-12);
        let other = RealField::zeros(grid(6, 7));
        assert!(matches!(l2_distance(&a, &other), Err(Error::GridMismatch(_))));
    }

    #[test]
    fn grd_round_trip_and_errors() {
        let dir = tempfile::tempdir().unwrap();
        let g = GridSpec::new(-0.3, 0.1, 7, 0.05, 1.0 / 3.0, 5).unwrap();
        let f = sample(|x, t| (x * 13.7).sin() * (t / 7.0).exp() + 1e-300, &g).unwrap();
        let p = dir.path().join("f.grd");
        write_field(&f, &p).unwrap();
        let back = read_field(&p).unwrap();
        assert_eq!(back, f);

        let p2 = dir.path().join("small.grd");
        fs::write(&p2, "# comment\n2 2 0 1 0 1\n1 2\n3 4\n").unwrap();
        let s = read_field(&p2).unwrap();
        assert_eq!(s.values(), &[1.0, 2.0, 3.0, 4.0]);

        fs::write(&p2, "2 2 0 1 0 1\n1 2\n3\n").unwrap();
        match read_field(&p2).unwrap_err() {
            Error::Parse { line, .. } => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
        fs::write(&p2, "2 2 0 1 0 1\n1 2\n3 inf\n").unwrap();
        assert!(matches!(read_field(&p2), Err(Error::Parse { line: 3, .. })));
        fs::write(&p2, "2 2 0 1\n").unwrap();
        assert!(matches!(read_field(&p2), Err(Error::Parse { line: 1, .. })));
    }

    #[test]
    fn csv_layout() {
        let dir = tempfile::tempdir().unwrap();
        let g = GridSpec::new(0.0, 1.0, 2, 0.0, 1.0, 2).unwrap();
        let f = sample(|_, _| 1.0, &g).unwrap();
        let p = dir.path().join("f.csv");
        write_csv(&f, &p).unwrap();
        let text = fs::read_to_string(&p).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 5);
        assert_eq!(lines[0], "x,t,value");
        let cols: Vec<f64> = lines[2].split(',').map(|s| s.parse().unwrap()).collect();
        assert_eq!(cols, vec![1.0, 0.0, 1.0]);
        assert!(write_csv(&f, "").is_err());
    }

    #[test]
    fn cell_mean_of_linear_function_is_centre_value() {
        let g = grid(5, 5);
        let f = sample_cell_mean(|x, t| 2.0 * x - t + 1.0, &g).unwrap();
        let p = sample(|x, t| 2.0 * x - t + 1.0, &g).unwrap();
        assert!(l2_distance(&f, &p).unwrap() < 1e-12);
    }

    #[test]
    fn restrict_picks_sub_lattice() {
        let g = GridSpec::new(0.0, 0.5, 9, 0.0, 0.5, 9).unwrap();
        let f = sample(|x, t| x + 10.0 * t, &g).unwrap();
        let sub = GridSpec::new(1.0, 1.0, 3, 0.5, 1.5, 3).unwrap();
        let r = f.restrict(&sub).unwrap();
        assert_eq!(r.at(2, 2), 3.0 + 10.0 * 3.5);
        let bad = GridSpec::new(0.25, 1.0, 3, 0.5, 1.5, 3).unwrap();
        assert!(f.restrict(&bad).is_err());
    }

    proptest! {
        #[test]
        fn norm_is_homogeneous_and_triangle_holds(
            a in proptest::collection::vec(-10.0f64..10.0, 20),
            b in proptest::collection::vec(-10.0f64..10.0, 20),
            c in proptest::collection::vec(-10.0f64..10.0, 20),
            alpha in -5.0f64..5.0,
        ) {
            let g = GridSpec::new(0.0, 0.3, 5, 0.0, 0.7, 4).unwrap();
            let (a, b, c) = (
                RealField::new(g, a).unwrap(),
                RealField::new(g, b).unwrap(),
                RealField::new(g, c).unwrap(),
            );
            let na = l2_norm(&a);
            prop_assert!((l2_norm(&a.scale(alpha).unwrap()) - alpha.abs() * na).abs() <= 1e-12 * (1.0 + na));
            let ac = l2_distance(&a, &c).unwrap();
            let ab = l2_distance(&a, &b).unwrap();
            let bc = l2_distance(&b, &c).unwrap();
            prop_assert!(ac <= ab + bc + 1e-12);
        }
    }
}
