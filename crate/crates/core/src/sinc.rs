//! Whittaker cardinal series of a band-limited function on the lattice `(m d, n d)`.

use std::fmt;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fields::fmt_num;
use crate::regularizer::{cutoff_hm, cutoff_l2, Mode, RegParams};

/// `sin(pi (z - p d) / d) / (pi (z - p d) / d)`, equal to 1 at `z = p d`.
pub fn cardinal(p: i64, d: f64, z: f64) -> Result<f64> {
    if !(d > 0.0 && d.is_finite()) {
        return Err(Error::Parameter(format!("sinc mesh must be positive, got {d}")));
    }
    Ok(cardinal_unchecked(p, d, z))
}

#[inline]
fn cardinal_unchecked(p: i64, d: f64, z: f64) -> f64 {
    let w = z / d - p as f64;
    // sin(pi w) through the offset from the nearest integer keeps nodes exact
    let k = w.round();
    let frac = w - k;
    if frac == 0.0 {
        return if k == 0.0 { 1.0 } else { 0.0 };
    }
    let sign = if (k as i64) % 2 == 0 { 1.0 } else { -1.0 };
    sign * (std::f64::consts::PI * frac).sin() / (std::f64::consts::PI * w)
}

/// Half-width `a` of a square holding the cutoff window; the Sinc mesh is `pi / a`.
pub fn sinc_mesh(params: &RegParams) -> Result<f64> {
    match params.mode {
        Mode::Hm => cutoff_hm(params.epsilon, params.m),
        Mode::L2 => {
            let b = cutoff_l2(params.epsilon, params.gamma)?;
            Ok(b.max(b * b))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IndexSet {
    /// `|m|, |n| <= N`.
    Square,
    /// `|n| <= N, |m| <= |n|`.
    Triangular,
}

impl IndexSet {
    pub fn contains(&self, n_max: i64, m: i64, n: i64) -> bool {
        match self {
            IndexSet::Square => m.abs() <= n_max && n.abs() <= n_max,
            IndexSet::Triangular => n.abs() <= n_max && m.abs() <= n.abs(),
        }
    }

    /// Retained `(m, n)` pairs, `n` outer and `m` inner, both ascending.
    pub fn indices(&self, n_max: i64) -> Vec<(i64, i64)> {
        let mut out = Vec::new();
        for n in -n_max..=n_max {
            for m in -n_max..=n_max {
                if self.contains(n_max, m, n) {
                    out.push((m, n));
                }
            }
        }
        out
    }

    /// `(2N + 1)^2` for the square, `2N^2 + 4N + 1` for the triangle.
    pub fn count(&self, n_max: i64) -> usize {
        let n = n_max as usize;
        match self {
            IndexSet::Square => (2 * n + 1).pow(2),
            IndexSet::Triangular => 2 * n * n + 4 * n + 1,
        }
    }
}

impl FromStr for IndexSet {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "square" => Ok(IndexSet::Square),
            "triangular" => Ok(IndexSet::Triangular),
            other => Err(Error::Parameter(format!(
                "unknown index set {other:?} (expected square or triangular)"
            ))),
        }
    }
}

impl fmt::Display for IndexSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            IndexSet::Square => "square",
            IndexSet::Triangular => "triangular",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SincExpansion {
    d: f64,
    n_max: i64,
    kind: IndexSet,
    /// Dense `(2N + 1)^2` table indexed `[n + N][m + N]`; entries outside the set are 0.
    coeffs: Vec<f64>,
}

impl SincExpansion {
    pub fn new(d: f64, n_max: i64, kind: IndexSet, coeffs: &[((i64, i64), f64)]) -> Result<Self> {
        if !(d > 0.0 && d.is_finite()) {
            return Err(Error::Parameter(format!("sinc mesh must be positive, got {d}")));
        }
        if n_max < 1 {
            return Err(Error::Parameter(format!(
                "truncation N must be at least 1, got {n_max}"
            )));
        }
        let side = (2 * n_max + 1) as usize;
        let mut table = vec![0.0; side * side];
        let mut seen = vec![false; side * side];
        for &((m, n), v) in coeffs {
            if !kind.contains(n_max, m, n) {
                return Err(Error::Parameter(format!(
                    "index ({m}, {n}) is not in the {kind} set of order {n_max}"
                )));
            }
            if !v.is_finite() {
                return Err(Error::NonFinite {
                    i: (m + n_max) as usize,
                    j: (n + n_max) as usize,
                    value: v,
                });
            }
            let slot = (n + n_max) as usize * side + (m + n_max) as usize;
            table[slot] = v;
            seen[slot] = true;
        }
        if let Some((m, n)) = kind
            .indices(n_max)
            .into_iter()
            .find(|&(m, n)| !seen[(n + n_max) as usize * side + (m + n_max) as usize])
        {
            return Err(Error::Parameter(format!("missing coefficient for index ({m}, {n})")));
        }
        Ok(SincExpansion {
            d,
            n_max,
            kind,
            coeffs: table,
        })
    }

    pub fn d(&self) -> f64 {
        self.d
    }

    pub fn n_max(&self) -> i64 {
        self.n_max
    }

    pub fn kind(&self) -> IndexSet {
        self.kind
    }

    pub fn coeff(&self, m: i64, n: i64) -> Option<f64> {
        if self.kind.contains(self.n_max, m, n) {
            let side = (2 * self.n_max + 1) as usize;
            Some(self.coeffs[(n + self.n_max) as usize * side + (m + self.n_max) as usize])
        } else {
            None
        }
    }

    /// `(m, n, value)` in index order.
    pub fn coefficients(&self) -> Vec<(i64, i64, f64)> {
        self.kind
            .indices(self.n_max)
            .into_iter()
            .map(|(m, n)| (m, n, self.coeff(m, n).unwrap()))
            .collect()
    }

    /// Same coefficients restricted to a smaller index set.
    pub fn restricted(&self, kind: IndexSet) -> Result<SincExpansion> {
        let coeffs: Vec<((i64, i64), f64)> = kind
            .indices(self.n_max)
            .into_iter()
            .map(|(m, n)| {
                self.coeff(m, n)
                    .map(|v| ((m, n), v))
                    .ok_or_else(|| Error::Parameter(format!("index ({m}, {n}) not available in the {} set", self.kind)))
            })
            .collect::<Result<_>>()?;
        SincExpansion::new(self.d, self.n_max, kind, &coeffs)
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut out = String::new();
        writeln!(out, "{} {} {}", fmt_num(self.d), self.n_max, self.kind).unwrap();
        for (m, n, v) in self.coefficients() {
            writeln!(out, "{m} {n} {}", fmt_num(v)).unwrap();
        }
        fs::write(path, out).map_err(|e| Error::io(path, e))
    }

    pub fn read(path: impl AsRef<Path>) -> Result<SincExpansion> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let err = |line: usize, msg: String| Error::Parse {
            path: path.to_path_buf(),
            line,
            msg,
        };
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(k, l)| (k + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        let (hl, header) = lines.next().ok_or_else(|| err(1, "missing header".into()))?;
        let tok: Vec<&str> = header.split_whitespace().collect();
        if tok.len() != 3 {
            return Err(err(hl, "header must be \"d N kind\"".into()));
        }
        let d: f64 = tok[0].parse().map_err(|e| err(hl, format!("{:?}: {e}", tok[0])))?;
        let n_max: i64 = tok[1].parse().map_err(|e| err(hl, format!("{:?}: {e}", tok[1])))?;
        let kind: IndexSet = tok[2].parse().map_err(|e: Error| err(hl, e.to_string()))?;
        let mut coeffs = Vec::new();
        for (ln, line) in lines {
            let tok: Vec<&str> = line.split_whitespace().collect();
            if tok.len() != 3 {
                return Err(err(ln, "expected \"m n value\"".into()));
            }
            let m: i64 = tok[0].parse().map_err(|e| err(ln, format!("{:?}: {e}", tok[0])))?;
            let n: i64 = tok[1].parse().map_err(|e| err(ln, format!("{:?}: {e}", tok[1])))?;
            let v: f64 = tok[2].parse().map_err(|e| err(ln, format!("{:?}: {e}", tok[2])))?;
            coeffs.push(((m, n), v));
        }
        SincExpansion::new(d, n_max, kind, &coeffs).map_err(|e| err(hl, e.to_string()))
    }
}

/// Samples `v_eps(m pi / a, n pi / a)` over the index set.
pub fn build_expansion<F>(v_eps: F, a_eps: f64, n_max: i64, kind: IndexSet) -> Result<SincExpansion>
where
    F: Fn(f64, f64) -> f64 + Sync,
{
    if !(a_eps > 0.0 && a_eps.is_finite()) {
        return Err(Error::Parameter(format!("band limit must be positive, got {a_eps}")));
    }
    if n_max < 1 {
        return Err(Error::Parameter(format!(
            "truncation N must be at least 1, got {n_max}"
        )));
    }
    let d = std::f64::consts::PI / a_eps;
    let coeffs: Vec<((i64, i64), f64)> = kind
        .indices(n_max)
        .into_par_iter()
        .map(|(m, n)| ((m, n), v_eps(m as f64 * d, n as f64 * d)))
        .collect();
    SincExpansion::new(d, n_max, kind, &coeffs)
}

/// `sum c(m, n) S(m, d)(x) S(n, d)(t)` over the stored index set.
pub fn eval_expansion(exp: &SincExpansion, x: f64, t: f64) -> f64 {
    let nm = exp.n_max;
    let side = (2 * nm + 1) as usize;
    let cx: Vec<f64> = (-nm..=nm).map(|m| cardinal_unchecked(m, exp.d, x)).collect();
    let mut acc = 0.0;
    for n in -nm..=nm {
        let ct = cardinal_unchecked(n, exp.d, t);
        if ct == 0.0 {
            continue;
        }
        let row = &exp.coeffs[(n + nm) as usize * side..(n + nm + 1) as usize * side];
        let inner: f64 = row.iter().zip(&cx).map(|(c, s)| c * s).sum();
        acc += ct * inner;
    }
    acc
}
