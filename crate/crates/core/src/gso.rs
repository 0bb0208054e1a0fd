// Licensed under the Apache License, Version 2.0 (the "License"); you may
// not use this file except in compliance with the License. You may obtain
// a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS, WITHOUT
// WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied. See the
// License for the specific language governing permissions and limitations
// under the License.

//! Non-uniform geometric graph shift operators
//!
//! `L = N^-1 D1 A_rho D2 - N^-1 diag(D3 A_rho D4 1)` with
//! `A_rho = A diag(rho)^-1` and `Dk = diag(mk(N^-1 A_rho 1))`.
//!
//! The operator is built verbatim, including the `N^-1` scale and sign;
//! [`canonical_scale`] maps preset operators at `rho = 1` onto their
//! textbook normalization.

use std::fmt;
use std::fmt::Write as _;
use std::str::FromStr;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{domain, invalid, Error, Result};

/// Dense eigensolves are used up to this order, power iteration above.
pub const DENSE_EIGEN_LIMIT: usize = 2000;

/// Scalar map applied to the empirical neighbourhood volumes.
#[derive(Clone)]
pub enum Modulation {
    Zero,
    One,
    NegOne,
    /// `x^-p`, defined for `x > 0` only.
    InvPower(f64),
    /// User-supplied map, evaluated pointwise. Not serializable.
    Custom(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
}

impl Modulation {
    pub fn apply(&self, x: f64) -> f64 {
        match self {
            Self::Zero => 0.0,
            Self::One => 1.0,
            Self::NegOne => -1.0,
            Self::InvPower(p) => {
                if *p == 1.0 {
                    1.0 / x
                } else if *p == 0.5 {
                    1.0 / x.sqrt()
                } else {
                    x.powf(-p)
                }
            }
            Self::Custom(f) => f(x),
        }
    }

    pub fn is_inverse(&self) -> bool {
        matches!(self, Self::InvPower(_))
    }
}

impl PartialEq for Modulation {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (Self::Zero, Self::Zero) | (Self::One, Self::One) | (Self::NegOne, Self::NegOne) => true,
            (Self::InvPower(a), Self::InvPower(b)) => a == b,
            (Self::Custom(a), Self::Custom(b)) => Arc::ptr_eq(a, b),
            _ => false,
        }
    }
}

impl fmt::Debug for Modulation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Custom(_) => f.write_str("Custom(..)"),
            other => write!(f, "{other}"),
        }
    }
}

impl fmt::Display for Modulation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Zero => f.write_str("0"),
            Self::One => f.write_str("1"),
            Self::NegOne => f.write_str("-1"),
            Self::InvPower(p) => write!(f, "inv:{p}"),
            Self::Custom(_) => f.write_str("custom"),
        }
    }
}

impl FromStr for Modulation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "0" => Ok(Self::Zero),
            "1" => Ok(Self::One),
            "-1" => Ok(Self::NegOne),
            t => {
                let p = t
                    .strip_prefix("inv:")
                    .and_then(|p| p.parse::<f64>().ok())
                    .ok_or_else(|| invalid(format!("unknown modulation `{t}` (expected 0, 1, -1 or inv:<p>)")))?;
                if !(p.is_finite() && p > 0.0) {
                    return Err(invalid(format!("modulation power must be positive, got {p}")));
                }
                Ok(Self::InvPower(p))
            }
        }
    }
}

impl Serialize for Modulation {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        if let Self::Custom(_) = self {
            return Err(serde::ser::Error::custom("custom modulations cannot be serialized"));
        }
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Modulation {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GsoSpec {
    pub m1: Modulation,
    pub m2: Modulation,
    pub m3: Modulation,
    pub m4: Modulation,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
}

/// Canonical preset names, in table order.
pub const PRESETS: [&str; 8] = [
    "adjacency",
    "combinatorial",
    "signless",
    "random_walk",
    "right_normalized",
    "sym_normalized_adjacency",
    "sym_normalized_laplacian",
    "sqrt_normalized",
];

impl GsoSpec {
    pub fn new(m1: Modulation, m2: Modulation, m3: Modulation, m4: Modulation) -> Self {
        Self {
            m1,
            m2,
            m3,
            m4,
            preset: None,
        }
    }

    pub fn modulations(&self) -> [&Modulation; 4] {
        [&self.m1, &self.m2, &self.m3, &self.m4]
    }

    fn needs_positive_volumes(&self) -> bool {
        self.modulations().iter().any(|m| m.is_inverse())
    }
}

/// Resolves a preset name; case and `-` versus `_` are ignored.
pub fn preset(name: &str) -> Result<GsoSpec> {
    use Modulation::{InvPower, NegOne, One, Zero};
    let inv = || InvPower(1.0);
    let half = || InvPower(0.5);
    let canonical = canonical_preset_name(name)?;
    let (m1, m2, m3, m4) = match canonical {
        "adjacency" => (One, One, Zero, Zero),
        "combinatorial" => (One, One, One, One),
        "signless" => (One, One, NegOne, One),
        "random_walk" => (inv(), One, inv(), One),
        "right_normalized" => (One, inv(), inv(), One),
        "sym_normalized_adjacency" => (half(), half(), Zero, Zero),
        "sym_normalized_laplacian" => (half(), half(), inv(), One),
        "sqrt_normalized" => (half(), half(), half(), half()),
        _ => unreachable!(),
    };
    Ok(GsoSpec {
        preset: Some(canonical.to_string()),
        ..GsoSpec::new(m1, m2, m3, m4)
    })
}

pub fn canonical_preset_name(name: &str) -> Result<&'static str> {
    let key = name.trim().to_ascii_lowercase().replace('-', "_");
    PRESETS
        .iter()
        .find(|p| **p == key)
        .copied()
        .ok_or_else(|| Error::UnknownPreset(name.to_string()))
}

fn check_rho(n: usize, rho: &[f64]) -> Result<()> {
    if rho.len() != n {
        return Err(invalid(format!(
            "density vector has length {}, expected {n}",
            rho.len()
        )));
    }
    if let Some((i, r)) = rho.iter().enumerate().find(|(_, r)| !(r.is_finite() && **r > 0.0)) {
        return Err(domain(format!(
            "density at node {i} must be positive and finite, got {r}"
        )));
    }
    Ok(())
}

fn modulated(spec: &GsoSpec, vol: &[f64]) -> Result<[Vec<f64>; 4]> {
    if spec.needs_positive_volumes() {
        if let Some(node) = vol.iter().position(|&v| !(v > 0.0)) {
            return Err(Error::DegreeSingularity { node });
        }
    }
    let m = spec.modulations();
    Ok([0, 1, 2, 3].map(|k| vol.iter().map(|&v| m[k].apply(v)).collect()))
}

/// Dense operator from a symmetric, zero-diagonal, non-negative adjacency.
pub fn build_gso(adjacency: &DMatrix<f64>, rho: &[f64], spec: &GsoSpec) -> Result<DMatrix<f64>> {
    let n = adjacency.nrows();
    if adjacency.ncols() != n {
        return Err(invalid("adjacency must be square"));
    }
    check_rho(n, rho)?;
    for i in 0..n {
        if adjacency[(i, i)] != 0.0 {
            return Err(invalid(format!("adjacency has a self-loop at node {i}")));
        }
        for j in 0..i {
            let (a, b) = (adjacency[(i, j)], adjacency[(j, i)]);
            if a != b {
                return Err(invalid(format!("adjacency is not symmetric at ({i}, {j})")));
            }
            if !(a >= 0.0 && a.is_finite()) {
                return Err(invalid(format!(
                    "adjacency weight at ({i}, {j}) must be finite and non-negative"
                )));
            }
        }
    }
    let nf = n as f64;
    let a_rho = DMatrix::from_fn(n, n, |i, j| adjacency[(i, j)] / rho[j]);
    let vol: Vec<f64> = (0..n).map(|i| a_rho.row(i).sum() / nf).collect();
    let [d1, d2, d3, d4] = modulated(spec, &vol)?;
    let mut l = DMatrix::from_fn(n, n, |i, j| d1[i] * a_rho[(i, j)] * d2[j] / nf);
    for i in 0..n {
        let s: f64 = (0..n).map(|j| a_rho[(i, j)] * d4[j]).sum();
        l[(i, i)] -= d3[i] * s / nf;
    }
    Ok(l)
}

/// 0/1 adjacency matrix of an edge list.
pub fn adjacency_matrix(n: usize, edges: &[(usize, usize)]) -> DMatrix<f64> {
    let mut a = DMatrix::zeros(n, n);
    for &(i, j) in edges {
        a[(i, j)] = 1.0;
        a[(j, i)] = 1.0;
    }
    a
}

/// Symmetric matrix similar to the operator of [`SparseGso::build`], when
/// one exists.
///
/// With `t_i = sqrt(d2_i / (rho_i d1_i))` the conjugate `T L T^-1` has
/// off-diagonal entries `s_i A_ij s_j / N`, `s_i = sqrt(d1_i d2_i / rho_i)`,
/// and the same diagonal. This needs `d1_i d2_i > 0` at every node; `None`
/// is returned otherwise. The spectrum of `L` is then real and equal to that
/// of the returned matrix.
pub fn symmetrized(n: usize, edges: &[(usize, usize)], rho: &[f64], spec: &GsoSpec) -> Result<Option<DMatrix<f64>>> {
    let op = SparseGso::build(n, edges, rho, spec)?;
    let nf = n as f64;
    let mut vol = vec![0.0; n];
    for &(i, j) in edges {
        vol[i] += 1.0 / (rho[j] * nf);
        vol[j] += 1.0 / (rho[i] * nf);
    }
    let [d1, d2, _, _] = modulated(spec, &vol)?;
    if (0..n).any(|i| !(d1[i] * d2[i] > 0.0)) {
        return Ok(None);
    }
    let s: Vec<f64> = (0..n).map(|i| (d1[i] * d2[i] / rho[i]).sqrt()).collect();
    let mut m = DMatrix::from_diagonal(&DVector::from_vec(op.diag.clone()));
    for &(i, j) in edges {
        let v = s[i] * s[j] / nf;
        m[(i, j)] += v;
        m[(j, i)] += v;
    }
    Ok(Some(m))
}

/// Compressed-row operator with the same contract as [`build_gso`], for
/// unweighted graphs given as edge lists.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseGso {
    n: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
    diag: Vec<f64>,
}

impl SparseGso {
    pub fn build(n: usize, edges: &[(usize, usize)], rho: &[f64], spec: &GsoSpec) -> Result<Self> {
        check_rho(n, rho)?;
        let mut adj = vec![Vec::new(); n];
        for &(i, j) in edges {
            if i == j || i >= n || j >= n {
                return Err(invalid(format!("invalid edge ({i}, {j}) for {n} nodes")));
            }
            adj[i].push(j);
            adj[j].push(i);
        }
        for a in &mut adj {
            a.sort_unstable();
        }
        let nf = n as f64;
        let vol: Vec<f64> = adj
            .iter()
            .map(|a| a.iter().map(|&j| 1.0 / rho[j]).sum::<f64>() / nf)
            .collect();
        let [d1, d2, d3, d4] = modulated(spec, &vol)?;
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        let mut diag = Vec::with_capacity(n);
        row_ptr.push(0);
        for (i, a) in adj.iter().enumerate() {
            let mut s = 0.0;
            for &j in a {
                cols.push(j);
                vals.push(d1[i] * d2[j] / (rho[j] * nf));
                s += d4[j] / rho[j];
            }
            diag.push(-d3[i] * s / nf);
            row_ptr.push(cols.len());
        }
        Ok(Self {
            n,
            row_ptr,
            cols,
            vals,
            diag,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// `(L u)_i` for a single row.
    pub fn apply_row(&self, i: usize, u: &[f64]) -> f64 {
        let mut s = self.diag[i] * u[i];
        for k in self.row_ptr[i]..self.row_ptr[i + 1] {
            s += self.vals[k] * u[self.cols[k]];
        }
        s
    }

    pub fn apply(&self, u: &[f64]) -> Vec<f64> {
        assert_eq!(u.len(), self.n, "signal length must match the operator");
        (0..self.n).map(|i| self.apply_row(i, u)).collect()
    }

    /// `max |lambda|` by power iteration on `L^2`. Every preset operator is
    /// similar to a symmetric one when `rho` is constant, so its spectrum is
    /// real and the iteration is well posed.
    pub fn spectral_radius(&self, tol: f64, max_iter: usize) -> Result<f64> {
        let square = |v: &DVector<f64>| {
            let once = DVector::from_vec(self.apply(v.as_slice()));
            DVector::from_vec(self.apply(once.as_slice()))
        };
        power_iteration_with(self.n, square, tol, max_iter)
    }

    /// Coordinate triplets of the non-zero entries, row-major, with header.
    pub fn to_triplets(&self) -> String {
        let mut out = String::from("row,col,value\n");
        for i in 0..self.n {
            let mut row: Vec<(usize, f64)> = (self.row_ptr[i]..self.row_ptr[i + 1])
                .map(|k| (self.cols[k], self.vals[k]))
                .collect();
            row.push((i, self.diag[i]));
            row.sort_by_key(|e| e.0);
            for (j, v) in row {
                if v != 0.0 {
                    writeln!(out, "{i},{j},{v}").expect("writing to a String");
                }
            }
        }
        out
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.n, self.n);
        for i in 0..self.n {
            m[(i, i)] += self.diag[i];
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                m[(i, self.cols[k])] += self.vals[k];
            }
        }
        m
    }
}

/// Maps a preset operator built at `rho = 1` onto its textbook form:
/// adjacency `A`, combinatorial `D - A`, signless `D + A`, random walk
/// `I - D^-1 A`, right normalized `I - A D^-1`, symmetric normalized
/// adjacency `D^-1/2 A D^-1/2`, symmetric normalized Laplacian
/// `I - D^-1/2 A D^-1/2`, and the square-root normalized operator
/// `D^-1/2 A D^-1/2 - diag(D^-1/2 A D^-1/2 1)` unchanged.
pub fn canonical_scale(l: &DMatrix<f64>, preset_name: &str, n: usize) -> Result<DMatrix<f64>> {
    let nf = n as f64;
    Ok(match canonical_preset_name(preset_name)? {
        "adjacency" | "signless" => l * nf,
        "combinatorial" => l * -nf,
        "random_walk" | "right_normalized" | "sym_normalized_laplacian" => -l,
        "sym_normalized_adjacency" | "sqrt_normalized" => l.clone(),
        _ => unreachable!(),
    })
}

fn check_symmetric(l: &DMatrix<f64>) -> Result<()> {
    if !l.is_square() {
        return Err(invalid("matrix must be square"));
    }
    let scale = l.amax().max(f64::MIN_POSITIVE);
    for i in 0..l.nrows() {
        for j in 0..i {
            if (l[(i, j)] - l[(j, i)]).abs() > 1e-12 * scale {
                return Err(invalid(format!("matrix is not symmetric at ({i}, {j})")));
            }
        }
    }
    Ok(())
}

/// All eigenvalues of a symmetric matrix, ascending.
pub fn symmetric_eigenvalues(l: &DMatrix<f64>) -> Result<Vec<f64>> {
    check_symmetric(l)?;
    let mut ev: Vec<f64> = SymmetricEigen::new(l.clone()).eigenvalues.iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    Ok(ev)
}

/// `max |lambda|`: dense eigensolver up to [`DENSE_EIGEN_LIMIT`], power
/// iteration beyond.
pub fn spectral_radius(l: &DMatrix<f64>) -> Result<f64> {
    check_symmetric(l)?;
    if l.nrows() == 0 {
        return Ok(0.0);
    }
    if l.nrows() <= DENSE_EIGEN_LIMIT {
        let ev = SymmetricEigen::new(l.clone()).eigenvalues;
        return Ok(ev.iter().fold(0.0, |m, v| m.max(v.abs())));
    }
    power_iteration(l, 1e-10, 100_000)
}

/// Spectral radius by power iteration on `L^2`, whose top eigenvalue is
/// `max |lambda|^2` with no sign ambiguity. Stops when the relative residual
/// `|L^2 v - mu v| / mu` is below `tol`.
pub fn power_iteration(l: &DMatrix<f64>, tol: f64, max_iter: usize) -> Result<f64> {
    check_symmetric(l)?;
    power_iteration_with(l.nrows(), |v| l * (l * v), tol, max_iter)
}

fn power_iteration_with<F>(n: usize, square: F, tol: f64, max_iter: usize) -> Result<f64>
where
    F: Fn(&DVector<f64>) -> DVector<f64>,
{
    if n == 0 {
        return Ok(0.0);
    }
    // deterministic start vector with components in every direction
    let mut v = DVector::from_fn(n, |i, _| 1.0 + ((i as f64 + 1.0) * 0.618_033_988_749_895).fract());
    v.normalize_mut();
    for _ in 0..max_iter {
        let w = square(&v);
        let mu = v.dot(&w);
        if mu <= 0.0 {
            return Ok(0.0);
        }
        let residual = (&w - &v * mu).norm() / mu;
        if residual < tol {
            return Ok(mu.sqrt());
        }
        let norm = w.norm();
        v = w / norm;
    }
    Err(Error::Numerical(format!(
        "power iteration did not reach residual {tol} in {max_iter} steps"
    )))
}

/// Spectrum of the square-root normalized operator of the complete
/// bipartite graph `K_{n,m}`, as `(eigenvalue, multiplicity)` pairs with
/// zero multiplicities dropped.
pub fn bipartite_spectrum(n: usize, m: usize) -> Result<Vec<(f64, usize)>> {
    if n == 0 || m == 0 {
        return Err(invalid("both parts of a complete bipartite graph must be non-empty"));
    }
    let (nf, mf) = (n as f64, m as f64);
    let spectrum = [
        (0.0, 1),
        (-(mf / nf).sqrt(), n - 1),
        (-(nf / mf).sqrt(), m - 1),
        (-(mf + nf) / (mf * nf).sqrt(), 1),
    ];
    Ok(spectrum.into_iter().filter(|&(_, k)| k > 0).collect())
}

/// [`bipartite_spectrum`] expanded into a sorted list.
pub fn bipartite_eigenvalues(n: usize, m: usize) -> Result<Vec<f64>> {
    let mut ev: Vec<f64> = bipartite_spectrum(n, m)?
        .into_iter()
        .flat_map(|(v, k)| std::iter::repeat_n(v, k))
        .collect();
    ev.sort_by(f64::total_cmp);
    Ok(ev)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiagCommuteReport {
    /// `diag(V A 1) = V diag(A 1)`.
    pub identity1_holds: bool,
    /// `diag(A V 1) = diag(V A 1)`.
    pub identity2_holds: bool,
    /// `A_ij = 0` whenever `v_i != v_j`.
    pub iff_condition_holds: bool,
}

impl DiagCommuteReport {
    /// The second identity holds exactly when the support condition does.
    pub fn consistent(&self) -> bool {
        self.identity1_holds && self.identity2_holds == self.iff_condition_holds
    }
}

/// Checks the diagonal factoring identities for a symmetric `A` and a
/// non-negative `v`, comparing entries to `1e-12` relative.
pub fn diag_commute_check(a: &DMatrix<f64>, v: &[f64]) -> Result<DiagCommuteReport> {
    check_symmetric(a)?;
    let n = a.nrows();
    if v.len() != n {
        return Err(invalid("vector length must match the matrix"));
    }
    if v.iter().any(|x| !(*x >= 0.0)) {
        return Err(domain("v must be non-negative"));
    }
    let close = |x: f64, y: f64| (x - y).abs() <= 1e-12 * (1.0 + x.abs().max(y.abs()));
    let row_sum: Vec<f64> = (0..n).map(|i| a.row(i).sum()).collect();
    let av: Vec<f64> = (0..n).map(|i| (0..n).map(|j| a[(i, j)] * v[j]).sum()).collect();
    let va1: Vec<f64> = (0..n).map(|i| (0..n).map(|j| v[i] * a[(i, j)]).sum()).collect();
    let identity1_holds = (0..n).all(|i| close(va1[i], v[i] * row_sum[i]));
    let identity2_holds = (0..n).all(|i| close(av[i], va1[i]));
    let iff_condition_holds = (0..n).all(|i| (0..n).all(|j| v[i] == v[j] || a[(i, j)] == 0.0));
    Ok(DiagCommuteReport {
        identity1_holds,
        identity2_holds,
        iff_condition_holds,
    })
}

/// Dense CSV, one matrix row per line, no header.
pub fn to_dense_csv(l: &DMatrix<f64>) -> String {
    let mut out = String::new();
    for i in 0..l.nrows() {
        for j in 0..l.ncols() {
            if j > 0 {
                out.push(',');
            }
            write!(out, "{}", l[(i, j)]).expect("writing to a String");
        }
        out.push('\n');
    }
    out
}

/// Coordinate triplets `row,col,value` of the non-zero entries, with header.
pub fn to_triplets(l: &DMatrix<f64>) -> String {
    let mut out = String::from("row,col,value\n");
    for i in 0..l.nrows() {
        for j in 0..l.ncols() {
            let v = l[(i, j)];
            if v != 0.0 {
                writeln!(out, "{i},{j},{v}").expect("writing to a String");
            }
        }
    }
    out
}
