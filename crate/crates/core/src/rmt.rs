//! The Gaussian ensemble with an external source: `M = H + A` with `H` from
//! GUE and `A = diag(α_1 … α_m)` repeated with multiplicities.

use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{Error, Result};
use crate::kernel::KernelContext;
use crate::linalg::determinant;
use crate::mop::MopSystem;
use crate::multi_index::{MultiIndex, PathOrder};
use crate::quadrature::{integrate, QuadOptions};
use crate::weights::{MeasureSpec, Precision, ScalarMode, WeightSystem};

/// Samples drawn from one generator stream. Sample `i` always comes from
/// stream `i / CHUNK` of the master seed, whatever the number of threads.
pub const CHUNK: usize = 1024;

/// Default acceptance threshold for the bulk relative deviation.
pub const MAX_REL_DEV: f64 = 0.03;

/// Minimum chi-square p-value for a comparison to pass.
pub const MIN_P_VALUE: f64 = 0.01;

/// Bins whose expected count falls below this are left out of the statistics.
pub const MIN_EXPECTED: f64 = 50.0;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SourceModel {
    alphas: Vec<f64>,
    multiplicities: Vec<usize>,
}

impl SourceModel {
    pub fn new(alphas: Vec<f64>, multiplicities: Vec<usize>) -> Result<Self> {
        if alphas.is_empty() || alphas.len() != multiplicities.len() {
            return Err(Error::InvalidInput(format!(
                "{} source eigenvalues but {} multiplicities",
                alphas.len(),
                multiplicities.len()
            )));
        }
        if let Some(a) = alphas.iter().find(|a| !a.is_finite()) {
            return Err(Error::InvalidInput(format!("source eigenvalue {a} is not finite")));
        }
        for (i, a) in alphas.iter().enumerate() {
            if alphas[..i].contains(a) {
                return Err(Error::InvalidInput(format!("source eigenvalue {a} is repeated")));
            }
        }
        if multiplicities.contains(&0) {
            return Err(Error::InvalidInput("multiplicities must be at least 1".into()));
        }
        Ok(SourceModel { alphas, multiplicities })
    }

    pub fn alphas(&self) -> &[f64] {
        &self.alphas
    }

    pub fn multiplicities(&self) -> &[usize] {
        &self.multiplicities
    }

    /// Matrix size `n = Σ n_k`.
    pub fn size(&self) -> usize {
        self.multiplicities.iter().sum()
    }

    pub fn index(&self) -> MultiIndex {
        MultiIndex::new(self.multiplicities.clone())
    }

    /// Diagonal of `A`.
    pub fn source_diagonal(&self) -> Vec<f64> {
        self.alphas
            .iter()
            .zip(&self.multiplicities)
            .flat_map(|(&a, &k)| std::iter::repeat_n(a, k))
            .collect()
    }
}

/// Weights `e^{-x²/2 + α_j x}`.
pub fn source_weight_system(model: &SourceModel) -> Result<WeightSystem> {
    WeightSystem::new(
        model.alphas.iter().map(|&a| MeasureSpec::gaussian(a)).collect(),
        ScalarMode::Float(Precision::Double),
    )
}

pub fn correlation_kernel(model: &SourceModel) -> Result<KernelContext<f64>> {
    let ws = source_weight_system(model)?;
    let sys = Arc::new(MopSystem::<f64>::new(&ws)?);
    KernelContext::for_index(sys, &model.index(), PathOrder::Block)
}

/// `R_k(λ_1, …, λ_k) = det K_n(λ_i, λ_j)`.
pub fn k_point_correlation(ctx: &KernelContext<f64>, points: &[f64]) -> Result<f64> {
    if points.is_empty() {
        return Err(Error::InvalidInput("at least one point is needed".into()));
    }
    let mut rows = Vec::with_capacity(points.len());
    for x in points {
        let mut row = Vec::with_capacity(points.len());
        for y in points {
            row.push(ctx.kernel(x, y)?);
        }
        rows.push(row);
    }
    Ok(determinant(&rows))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpectrumSample {
    pub eigenvalues: Vec<f64>,
    pub seed: u64,
}

fn draw<R: Rng>(rng: &mut R, diag: &[f64]) -> Vec<f64> {
    let n = diag.len();
    let half = std::f64::consts::FRAC_1_SQRT_2;
    let mut h = DMatrix::<Complex64>::zeros(n, n);
    for i in 0..n {
        let d: f64 = rng.sample(StandardNormal);
        h[(i, i)] = Complex64::new(d + diag[i], 0.0);
        for j in i + 1..n {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            let v = Complex64::new(re * half, im * half);
            h[(i, j)] = v;
            h[(j, i)] = v.conj();
        }
    }
    let mut ev: Vec<f64> = h.symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

/// One spectrum of `H + A` from a generator seeded with `seed`.
pub fn sample_spectrum(model: &SourceModel, seed: u64) -> SpectrumSample {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    SpectrumSample {
        eigenvalues: draw(&mut rng, &model.source_diagonal()),
        seed,
    }
}

/// Apply `visit` to `count` spectra. Chunk `c` uses stream `c` of the
/// ChaCha8 generator seeded with `seed`; per-chunk accumulators are folded in
/// chunk order so the result does not depend on scheduling.
pub fn fold_spectra<T: Send>(
    model: &SourceModel,
    count: usize,
    seed: u64,
    init: impl Fn() -> T + Sync,
    visit: impl Fn(&mut T, &[f64]) + Sync,
    combine: impl Fn(T, T) -> T,
) -> T {
    let diag = model.source_diagonal();
    let chunks = count.div_ceil(CHUNK);
    let parts: Vec<T> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(c as u64);
            let mut acc = init();
            let len = CHUNK.min(count - c * CHUNK);
            for _ in 0..len {
                visit(&mut acc, &draw(&mut rng, &diag));
            }
            acc
        })
        .collect();
    parts.into_iter().fold(init(), combine)
}

/// Equal-width histogram on `[lo, hi]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Bins {
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
}

impl Bins {
    pub fn new(lo: f64, hi: f64, count: usize) -> Result<Self> {
        if !lo.is_finite() || !hi.is_finite() || lo >= hi || count == 0 {
            return Err(Error::InvalidInput(format!(
                "bad histogram [{lo}, {hi}] with {count} bins"
            )));
        }
        Ok(Bins { lo, hi, count })
    }

    pub fn width(&self) -> f64 {
        (self.hi - self.lo) / self.count as f64
    }

    pub fn edge(&self, i: usize) -> f64 {
        if i == self.count {
            self.hi
        } else {
            self.lo + i as f64 * self.width()
        }
    }

    pub fn locate(&self, x: f64) -> Option<usize> {
        if !(x >= self.lo && x < self.hi) {
            return None;
        }
        Some((((x - self.lo) / self.width()) as usize).min(self.count - 1))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BinRow {
    pub bin_lo: f64,
    pub bin_hi: f64,
    /// Eigenvalues per sample that landed in the bin.
    pub empirical: f64,
    /// `∫_bin K_n(x,x) dx`.
    pub predicted: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DensitySummary {
    pub samples: usize,
    pub chi2: f64,
    pub dof: usize,
    pub p_value: f64,
    pub max_rel_dev: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DensityComparison {
    pub rows: Vec<BinRow>,
    pub summary: DensitySummary,
}

impl DensityComparison {
    /// `bin_lo,bin_hi,empirical,predicted`, round-trip precision.
    pub fn histogram_csv(&self) -> String {
        let mut out = String::from("bin_lo,bin_hi,empirical,predicted\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{:?},{:?},{:?},{:?}\n",
                r.bin_lo, r.bin_hi, r.empirical, r.predicted
            ));
        }
        out
    }
}

/// Expected number of eigenvalues in each bin.
pub fn predicted_bins(ctx: &KernelContext<f64>, bins: &Bins) -> Result<Vec<f64>> {
    let opts = QuadOptions::with_rel_tol(1e-10);
    (0..bins.count)
        .map(|i| {
            let mut failure = None;
            let v = integrate(
                |x| match ctx.kernel_diagonal(&x) {
                    Ok(v) => v,
                    Err(e) => {
                        failure.get_or_insert(e);
                        0.0
                    }
                },
                bins.edge(i),
                bins.edge(i + 1),
                opts,
            )?
            .value;
            match failure {
                Some(e) => Err(e),
                None => Ok(v),
            }
        })
        .collect()
}

/// Monte Carlo histogram of `H + A` against the integrated one-point
/// function `K_n(x,x)`.
pub fn density_compare(model: &SourceModel, samples: usize, bins: &Bins, seed: u64) -> Result<DensityComparison> {
    if samples == 0 {
        return Err(Error::InsufficientSamples(0));
    }
    let ctx = correlation_kernel(model)?;
    let predicted = predicted_bins(&ctx, bins)?;
    let counts = fold_spectra(
        model,
        samples,
        seed,
        || vec![0u64; bins.count],
        |acc, ev| {
            for &x in ev {
                if let Some(i) = bins.locate(x) {
                    acc[i] += 1;
                }
            }
        },
        |mut a, b| {
            a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
            a
        },
    );
    let total = samples as f64;
    let mut chi2 = 0.0;
    let mut dof = 0;
    let mut max_rel_dev: f64 = 0.0;
    let mut rows = Vec::with_capacity(bins.count);
    for i in 0..bins.count {
        let observed = counts[i] as f64;
        let expected = predicted[i] * total;
        if expected >= MIN_EXPECTED {
            chi2 += (observed - expected).powi(2) / expected;
            dof += 1;
            max_rel_dev = max_rel_dev.max((observed - expected).abs() / expected);
        }
        rows.push(BinRow {
            bin_lo: bins.edge(i),
            bin_hi: bins.edge(i + 1),
            empirical: observed / total,
            predicted: predicted[i],
        });
    }
    if dof == 0 {
        return Err(Error::InsufficientSamples(samples));
    }
    let p_value = ChiSquared::new(dof as f64)
        .map(|d| 1.0 - d.cdf(chi2))
        .unwrap_or(f64::NAN);
    let pass = max_rel_dev <= MAX_REL_DEV && p_value >= MIN_P_VALUE;
    Ok(DensityComparison {
        rows,
        summary: DensitySummary {
            samples,
            chi2,
            dof,
            p_value,
            max_rel_dev,
            pass,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn model(alphas: &[f64], mult: &[usize]) -> SourceModel {
        SourceModel::new(alphas.to_vec(), mult.to_vec()).unwrap()
    }

    #[test]
    fn model_validation() {
        assert!(SourceModel::new(vec![1.0, 1.0], vec![1, 1]).is_err());
        assert!(SourceModel::new(vec![1.0, -1.0], vec![1, 0]).is_err());
        assert!(SourceModel::new(vec![1.0], vec![1, 2]).is_err());
        let m = model(&[1.0, -1.0], &[2, 1]);
        assert_eq!(m.size(), 3);
        assert_eq!(m.source_diagonal(), vec![1.0, 1.0, -1.0]);
    }

    #[test]
    fn single_weight_is_the_gue_density() {
        let ctx = correlation_kernel(&model(&[0.0], &[1])).unwrap();
        for x in [-1.5, 0.0, 0.8] {
            let want = (-x * x / 2.0f64).exp() / (2.0 * std::f64::consts::PI).sqrt();
            assert!((ctx.kernel_diagonal(&x).unwrap() - want).abs() < 1e-14);
        }
    }

    #[test]
    fn correlations() {
        let ctx = correlation_kernel(&model(&[1.0, -1.0], &[1, 1])).unwrap();
        let r1 = k_point_correlation(&ctx, &[0.3]).unwrap();
        assert!(r1 > 0.0);
        assert!(k_point_correlation(&ctx, &[0.3, 0.3]).unwrap().abs() < 1e-14);
        let r2 = k_point_correlation(&ctx, &[0.3, -0.9]).unwrap();
        let r1b = k_point_correlation(&ctx, &[-0.9]).unwrap();
        assert!(r2 <= r1 * r1b);
        let a = k_point_correlation(&ctx, &[0.3, -0.9, 1.4]).unwrap();
        let b = k_point_correlation(&ctx, &[1.4, 0.3, -0.9]).unwrap();
        assert!((a - b).abs() < 1e-14);
        assert!(k_point_correlation(&ctx, &[]).is_err());
    }

    #[test]
    fn sampling_is_reproducible() {
        let m = model(&[1.0, -1.0], &[2, 1]);
        let a = sample_spectrum(&m, 7);
        assert_eq!(a, sample_spectrum(&m, 7));
        assert_ne!(a.eigenvalues, sample_spectrum(&m, 8).eigenvalues);
        assert_eq!(a.eigenvalues.len(), 3);
        assert!(a.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn trace_mean_matches_source() {
        let m = model(&[1.0, -1.0], &[2, 1]);
        let count = 20_000;
        let (s, s2) = fold_spectra(
            &m,
            count,
            3,
            || (0.0, 0.0),
            |acc, ev| {
                let t: f64 = ev.iter().sum();
                acc.0 += t;
                acc.1 += t * t;
            },
            |a, b| (a.0 + b.0, a.1 + b.1),
        );
        let mean = s / count as f64;
        let var = s2 / count as f64 - mean * mean;
        // Tr H is N(0, n)
        assert!((var - 3.0).abs() < 0.2);
        assert!((mean - 1.0).abs() < 3.0 * (var / count as f64).sqrt());
    }

    #[test]
    fn one_by_one_is_standard_normal() {
        let m = model(&[0.0], &[1]);
        let xs: Vec<f64> = (0..4000).map(|s| sample_spectrum(&m, s).eigenvalues[0]).collect();
        let mean = xs.iter().sum::<f64>() / xs.len() as f64;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / xs.len() as f64;
        assert!(mean.abs() < 0.06);
        assert!((var - 1.0).abs() < 0.08);
    }

    #[test]
    fn density_against_kernel() {
        let m = model(&[1.0, -1.0], &[1, 1]);
        let bins = Bins::new(-4.0, 4.0, 40).unwrap();
        let cmp = density_compare(&m, 20_000, &bins, 11).unwrap();
        let mass: f64 = cmp.rows.iter().map(|r| r.predicted).sum();
        assert!((mass - 2.0).abs() < 1e-2);
        assert!(cmp.summary.p_value > 1e-3, "{:?}", cmp.summary);
        assert!(matches!(
            density_compare(&m, 0, &bins, 1),
            Err(Error::InsufficientSamples(0))
        ));
        let again = density_compare(&m, 20_000, &bins, 11).unwrap();
        assert_eq!(cmp.histogram_csv(), again.histogram_csv());
    }
}
