//! Sample moments, effective sample size, and element-wise agreement tests.

use std::fmt;

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{Matrix, Vector};
use crate::samples::Samples;

#[derive(Debug, Clone)]
pub struct SampleStats {
    pub n: usize,
    pub mean: Vector,
    /// Unbiased covariance (divisor `n - 1`).
    pub covariance: Matrix,
    /// `sqrt(var_i / ess_i)`.
    pub mean_se: Vector,
    pub ess: Vector,
}

impl SampleStats {
    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    /// Gaussian-theory standard error of covariance element `(i, j)`,
    /// `sqrt((s_ii s_jj + s_ij^2) / min(ess_i, ess_j))`.
    pub fn covariance_se(&self, i: usize, j: usize) -> f64 {
        let s = &self.covariance;
        let ess = self.ess[i].min(self.ess[j]);
        ((s[(i, i)] * s[(j, j)] + s[(i, j)] * s[(i, j)]) / ess).sqrt()
    }
}

/// Moments with the effective sample size of each coordinate estimated from
/// its autocorrelation (Geyer's initial monotone sequence).
pub fn sample_stats(samples: &Samples) -> Result<SampleStats> {
    let (mean, covariance) = moments(samples)?;
    let n = samples.len();
    let ess = Vector::from_fn(samples.dim(), |j, _| {
        if covariance[(j, j)] > 0.0 {
            effective_sample_size(&samples.column(j))
        } else {
            n as f64
        }
    });
    Ok(finish(n, mean, covariance, ess))
}

/// Moments for independent draws: `ess_i = n`.
pub fn sample_stats_iid(samples: &Samples) -> Result<SampleStats> {
    let (mean, covariance) = moments(samples)?;
    let n = samples.len();
    let ess = Vector::from_element(samples.dim(), n as f64);
    Ok(finish(n, mean, covariance, ess))
}

fn finish(n: usize, mean: Vector, covariance: Matrix, ess: Vector) -> SampleStats {
    let mean_se = Vector::from_fn(mean.len(), |i, _| (covariance[(i, i)] / ess[i]).sqrt());
    SampleStats {
        n,
        mean,
        covariance,
        mean_se,
        ess,
    }
}

fn moments(samples: &Samples) -> Result<(Vector, Matrix)> {
    let n = samples.len();
    let dim = samples.dim();
    if n < 2 {
        return Err(Error::InvalidArgument(format!("need at least 2 samples, got {n}")));
    }
    let mut mean = Vector::zeros(dim);
    for row in samples.rows() {
        for (m, v) in mean.iter_mut().zip(row) {
            *m += v;
        }
    }
    mean /= n as f64;

    let mut cov = Matrix::zeros(dim, dim);
    let mut centred = vec![0.0; dim];
    for row in samples.rows() {
        for (c, (v, m)) in centred.iter_mut().zip(row.iter().zip(mean.iter())) {
            *c = v - m;
        }
        for i in 0..dim {
            for j in i..dim {
                cov[(i, j)] += centred[i] * centred[j];
            }
        }
    }
    for i in 0..dim {
        for j in i..dim {
            let v = cov[(i, j)] / (n - 1) as f64;
            cov[(i, j)] = v;
            cov[(j, i)] = v;
        }
    }

    let first = samples.row(0);
    if samples.rows().all(|r| r == first) {
        return Err(Error::DegenerateSamples);
    }
    Ok((mean, cov))
}

/// Autocorrelation `rho_0..rho_{n-1}` of a series, via zero-padded FFT.
pub fn autocorrelation(series: &[f64]) -> Vec<f64> {
    let n = series.len();
    if n == 0 {
        return Vec::new();
    }
    let mean = series.iter().sum::<f64>() / n as f64;
    let size = (2 * n).next_power_of_two();
    let mut buf: Vec<Complex<f64>> = series
        .iter()
        .map(|v| Complex::new(v - mean, 0.0))
        .chain(std::iter::repeat(Complex::new(0.0, 0.0)))
        .take(size)
        .collect();
    let mut planner = FftPlanner::new();
    planner.plan_fft_forward(size).process(&mut buf);
    for c in buf.iter_mut() {
        *c = Complex::new(c.norm_sqr(), 0.0);
    }
    planner.plan_fft_inverse(size).process(&mut buf);
    let c0 = buf[0].re;
    if c0 <= 0.0 {
        let mut out = vec![0.0; n];
        out[0] = 1.0;
        return out;
    }
    buf[..n].iter().map(|c| c.re / c0).collect()
}

/// Effective sample size of a scalar chain, clamped to `[1, n]`.
pub fn effective_sample_size(series: &[f64]) -> f64 {
    let n = series.len();
    if n < 2 {
        return n as f64;
    }
    let rho = autocorrelation(series);
    let mut tau = -1.0;
    let mut previous = f64::INFINITY;
    let mut k = 0;
    while 2 * k + 1 < n {
        let pair = rho[2 * k] + rho[2 * k + 1];
        if pair <= 0.0 {
            break;
        }
        let pair = pair.min(previous);
        tau += 2.0 * pair;
        previous = pair;
        k += 1;
    }
    (n as f64 / tau.max(f64::MIN_POSITIVE)).clamp(1.0, n as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Element {
    Mean(usize),
    Covariance(usize, usize),
}

impl fmt::Display for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Mean(i) => write!(f, "mean[{}]", i + 1),
            Self::Covariance(i, j) => write!(f, "cov[{},{}]", i + 1, j + 1),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ElementComparison {
    pub element: Element,
    pub a: f64,
    pub b: f64,
    pub difference: f64,
    pub standard_error: f64,
    pub z: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ComparisonReport {
    pub sigma_level: f64,
    pub max_z: f64,
    pub elements: Vec<ElementComparison>,
}

impl ComparisonReport {
    pub fn all_pass(&self) -> bool {
        self.elements.iter().all(|e| e.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &ElementComparison> {
        self.elements.iter().filter(|e| !e.pass)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

impl fmt::Display for ComparisonReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "{:<10} {:>14} {:>14} {:>12} {:>12} {:>8}  result",
            "element", "a", "b", "diff", "se", "z"
        )?;
        for e in &self.elements {
            writeln!(
                f,
                "{:<10} {:>14.6} {:>14.6} {:>12.3e} {:>12.3e} {:>8.3}  {}",
                e.element.to_string(),
                e.a,
                e.b,
                e.difference,
                e.standard_error,
                e.z,
                if e.pass { "pass" } else { "FAIL" }
            )?;
        }
        write!(
            f,
            "max |z| = {:.3} at sigma level {} -> {}",
            self.max_z,
            self.sigma_level,
            if self.all_pass() { "all pass" } else { "FAILED" }
        )
    }
}

fn element(element: Element, a: f64, b: f64, se: f64, sigma_level: f64) -> ElementComparison {
    let difference = a - b;
    let z = if se > 0.0 {
        difference.abs() / se
    } else if difference.abs() <= 1e-12 * (1.0 + a.abs().max(b.abs())) {
        0.0
    } else {
        f64::INFINITY
    };
    ElementComparison {
        element,
        a,
        b,
        difference,
        standard_error: se,
        z,
        pass: z <= sigma_level,
    }
}

fn report(elements: Vec<ElementComparison>, sigma_level: f64) -> ComparisonReport {
    let max_z = elements.iter().map(|e| e.z).fold(0.0, f64::max);
    ComparisonReport {
        sigma_level,
        max_z,
        elements,
    }
}

/// Compares every mean element and every upper-triangle covariance element
/// of two estimates against their combined standard error.
pub fn compare_stats(a: &SampleStats, b: &SampleStats, sigma_level: f64) -> Result<ComparisonReport> {
    let dim = a.dim();
    if b.dim() != dim {
        return Err(Error::DimensionMismatch(format!(
            "cannot compare {dim}-dimensional stats with {}-dimensional stats",
            b.dim()
        )));
    }
    let mut out = Vec::with_capacity(dim + dim * (dim + 1) / 2);
    for i in 0..dim {
        let se = a.mean_se[i].hypot(b.mean_se[i]);
        out.push(element(Element::Mean(i), a.mean[i], b.mean[i], se, sigma_level));
    }
    for i in 0..dim {
        for j in i..dim {
            let se = a.covariance_se(i, j).hypot(b.covariance_se(i, j));
            out.push(element(
                Element::Covariance(i, j),
                a.covariance[(i, j)],
                b.covariance[(i, j)],
                se,
                sigma_level,
            ));
        }
    }
    Ok(report(out, sigma_level))
}

/// Compares an estimate against exact moments; only the estimate's standard
/// errors enter.
pub fn compare_with_truth(
    stats: &SampleStats,
    mean: &Vector,
    covariance: &Matrix,
    sigma_level: f64,
) -> Result<ComparisonReport> {
    let dim = stats.dim();
    if mean.len() != dim || covariance.shape() != (dim, dim) {
        return Err(Error::DimensionMismatch(
            "reference moments have the wrong shape".into(),
        ));
    }
    let mut out = Vec::new();
    for i in 0..dim {
        out.push(element(
            Element::Mean(i),
            stats.mean[i],
            mean[i],
            stats.mean_se[i],
            sigma_level,
        ));
    }
    for i in 0..dim {
        for j in i..dim {
            out.push(element(
                Element::Covariance(i, j),
                stats.covariance[(i, j)],
                covariance[(i, j)],
                stats.covariance_se(i, j),
                sigma_level,
            ));
        }
    }
    Ok(report(out, sigma_level))
}
