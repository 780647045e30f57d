//! Second singular value of the adjacency matrix `M`.
//!
//! `lambda(G)` is taken as the square root of the second largest eigenvalue
//! of the symmetric matrix `M M^t`. The top eigenvalue is `d^2` with the
//! all-ones eigenvector; it is simple when `G` is strongly connected, so
//! projecting out the all-ones direction leaves `lambda^2` on top.

use std::fmt;
use std::str::FromStr;

use faer::Side;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::SumProductDigraph;
use crate::error::{Error, Result};
use crate::seed;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SpectralMethod {
    /// Full symmetric eigendecomposition of a dense `M M^t`.
    DenseExact,
    /// Power iteration on `M M^t` orthogonal to the all-ones vector.
    DeflatedPower,
}

impl fmt::Display for SpectralMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SpectralMethod::DenseExact => "dense-exact",
            SpectralMethod::DeflatedPower => "deflated-power",
        })
    }
}

impl FromStr for SpectralMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dense-exact" => Ok(SpectralMethod::DenseExact),
            "deflated-power" => Ok(SpectralMethod::DeflatedPower),
            _ => Err(Error::Parse(format!("unknown spectral method {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralOptions {
    pub method: SpectralMethod,
    pub tol: f64,
    pub max_iter: usize,
    pub seed: u64,
    /// Largest `N` for which a dense `N x N` matrix is built.
    pub dense_max_vertices: u64,
    /// Largest `N` for which connectivity is checked by search.
    pub connectivity_max_vertices: u64,
    /// Memory allowed for the iteration vectors.
    pub vector_budget_bytes: u64,
}

impl Default for SpectralOptions {
    fn default() -> Self {
        SpectralOptions {
            method: SpectralMethod::DeflatedPower,
            tol: 1e-6,
            max_iter: 1000,
            seed: 0,
            dense_max_vertices: 10_000,
            connectivity_max_vertices: 10_000,
            vector_budget_bytes: 1 << 30,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralReport {
    pub n: usize,
    pub q: u32,
    #[serde(rename = "N")]
    pub vertices: u64,
    #[serde(rename = "d")]
    pub degree: u64,
    /// Estimated `lambda(G)`.
    pub lambda2: f64,
    /// Deflated power: `||M M^t v - lambda^2 v|| / lambda^2`. Dense: the larger
    /// of the relative errors of the top eigenvalue against `d^2` and of the
    /// eigenvalue sum against the trace `N d`.
    pub residual: f64,
    pub iterations: usize,
    /// `lambda2 / q^{n^2 - 1/2}`.
    pub c_measured: f64,
    pub method: SpectralMethod,
    /// Strong connectivity, when the graph was small enough to search.
    pub connected: Option<bool>,
}

impl SumProductDigraph {
    fn check_len(&self, x: &[f64]) -> Result<()> {
        let n = self.vertex_count();
        if x.len() as u64 != n {
            return Err(Error::DimensionMismatch { expected: n as usize, found: x.len() });
        }
        Ok(())
    }

    /// `(M x)_u = sum over out-neighbours w of u of x_w`.
    pub fn apply_m(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_len(x)?;
        let d = self.degree() as usize;
        let mut y = vec![0.0; x.len()];
        match self.tables() {
            Some(t) => y.par_chunks_mut(d).enumerate().for_each(|(a, row)| {
                // u = (a, c); out-neighbours (b, a b - c)
                for b in 0..d {
                    let ab = t.mul[a * d + b] as usize;
                    let targets = &t.add[ab * d..(ab + 1) * d];
                    let block = &x[b * d..(b + 1) * d];
                    for (c, yc) in row.iter_mut().enumerate() {
                        *yc += block[targets[t.neg[c] as usize] as usize];
                    }
                }
            }),
            None => y.par_iter_mut().enumerate().for_each(|(p, yp)| {
                let u = self.unpack(p as u64);
                *yp = self.out_neighbors(u).map(|w| x[self.pack(w) as usize]).sum();
            }),
        }
        Ok(y)
    }

    /// `(M^t x)_w = sum over in-neighbours u of w of x_u`.
    pub fn apply_mt(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_len(x)?;
        let d = self.degree() as usize;
        let mut y = vec![0.0; x.len()];
        match self.tables() {
            Some(t) => y.par_chunks_mut(d).enumerate().for_each(|(b, row)| {
                // w = (b, e); in-neighbours (a, a b - e)
                for a in 0..d {
                    let ab = t.mul[a * d + b] as usize;
                    let targets = &t.add[ab * d..(ab + 1) * d];
                    let block = &x[a * d..(a + 1) * d];
                    for (e, ye) in row.iter_mut().enumerate() {
                        *ye += block[targets[t.neg[e] as usize] as usize];
                    }
                }
            }),
            None => y.par_iter_mut().enumerate().for_each(|(p, yp)| {
                let w = self.unpack(p as u64);
                *yp = self.in_neighbors(w).map(|u| x[self.pack(u) as usize]).sum();
            }),
        }
        Ok(y)
    }

    pub fn apply_mmt(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.apply_m(&self.apply_mt(x)?)
    }

    /// Dense `M M^t`, accumulated as `sum_w 1_{N-(w)} 1_{N-(w)}^t`.
    pub fn mmt_dense(&self, max_vertices: u64) -> Result<faer::Mat<f64>> {
        let n = self.vertex_count();
        if n > max_vertices {
            return Err(Error::Budget(format!("dense {n} x {n} matrix exceeds the {max_vertices}-vertex limit")));
        }
        let n = n as usize;
        let mut k = faer::Mat::<f64>::zeros(n, n);
        let mut preds = Vec::with_capacity(self.degree() as usize);
        for w in 0..n as u64 {
            preds.clear();
            preds.extend(self.in_neighbors(self.unpack(w)).map(|u| self.pack(u) as usize));
            for &u in &preds {
                for &v in &preds {
                    k[(u, v)] += 1.0;
                }
            }
        }
        Ok(k)
    }

    pub fn second_eigenvalue(&self, opts: &SpectralOptions) -> Result<SpectralReport> {
        let ring = self.ring();
        let (n, q) = (ring.n(), ring.q());
        let vertices = self.vertex_count();
        let d = self.degree();
        let connected = if vertices <= opts.connectivity_max_vertices {
            Some(self.is_strongly_connected(opts.connectivity_max_vertices)?)
        } else {
            None
        };
        let (lambda2, residual, iterations) = match opts.method {
            SpectralMethod::DenseExact => self.dense_second(opts)?,
            SpectralMethod::DeflatedPower => self.power_second(opts)?,
        };
        let scale = (q as f64).powf((n * n) as f64 - 0.5);
        Ok(SpectralReport {
            n,
            q,
            vertices,
            degree: d,
            lambda2,
            residual,
            iterations,
            c_measured: lambda2 / scale,
            method: opts.method,
            connected,
        })
    }

    fn dense_second(&self, opts: &SpectralOptions) -> Result<(f64, f64, usize)> {
        let k = self.mmt_dense(opts.dense_max_vertices)?;
        let mut ev = k
            .self_adjoint_eigenvalues(Side::Lower)
            .map_err(|_| Error::NonConvergence { iterations: 0, residual: f64::NAN })?;
        ev.sort_by(|a, b| b.total_cmp(a));
        let d2 = (self.degree() as f64).powi(2);
        let trace = self.vertex_count() as f64 * self.degree() as f64;
        let sum: f64 = ev.iter().sum();
        let residual = ((ev[0] - d2).abs() / d2).max((sum - trace).abs() / trace);
        let second = ev.get(1).copied().unwrap_or(0.0).max(0.0);
        Ok((second.sqrt(), residual, 1))
    }

    fn power_second(&self, opts: &SpectralOptions) -> Result<(f64, f64, usize)> {
        let n = self.vertex_count();
        let need = n.saturating_mul(8 * 3);
        if need > opts.vector_budget_bytes {
            return Err(Error::Budget(format!(
                "{need} bytes of iteration vectors exceed {}",
                opts.vector_budget_bytes
            )));
        }
        let mut rng = seed::rng(opts.seed);
        let mut x: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        project_and_normalize(&mut x);
        let mut residual = f64::INFINITY;
        for it in 1..=opts.max_iter {
            let y = self.apply_mmt(&x)?;
            let mu: f64 = x.iter().zip(&y).map(|(a, b)| a * b).sum();
            if mu <= 0.0 {
                // x lies in the kernel; only possible if lambda = 0.
                return Ok((0.0, 0.0, it));
            }
            residual = x.iter().zip(&y).map(|(a, b)| (b - mu * a).powi(2)).sum::<f64>().sqrt() / mu;
            if residual <= opts.tol {
                return Ok((mu.sqrt(), residual, it));
            }
            x = y;
            project_and_normalize(&mut x);
        }
        Err(Error::NonConvergence { iterations: opts.max_iter, residual })
    }
}

/// Removes the all-ones component and scales to unit length.
fn project_and_normalize(x: &mut [f64]) {
    let mean = x.iter().sum::<f64>() / x.len() as f64;
    x.iter_mut().for_each(|v| *v -= mean);
    let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm > 0.0 {
        x.iter_mut().for_each(|v| *v /= norm);
    }
}
