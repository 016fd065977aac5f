//! The full identity suite at one multi-index.

use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::kernel::{
    all_paths, sample_pairs, sample_points, three_way_agreement, verify_numerator_vanishes, verify_path_independence,
    verify_relabel, verify_reproducing, verify_trace, verify_two_point_mass, KernelContext,
};
use crate::mop::MopSystem;
use crate::multi_index::{canonical_path, MultiIndex, Path, PathOrder};
use crate::recurrence::{
    contiguity_p, contiguity_q, contiguity_scalar, verify_biorthogonality, verify_leading_coefficient,
    verify_phi_ladder, verify_recurrence_sparsity, verify_xp_expansion, verify_yq_expansion,
};
use crate::report::{Report, Residual, RhReport};
use crate::rh::{AsymptoticReport, RhSystem, Which};
use crate::scalar::{Dd, Rational, Scalar};
use crate::weights::{Precision, ScalarMode, WeightSystem};

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Tolerances {
    pub kernel: f64,
    pub biorthogonality: f64,
    pub expansion: f64,
    pub contiguity: f64,
    pub leading: f64,
    pub relabel: f64,
    pub paths: f64,
    pub ladder: f64,
    pub trace: f64,
    pub reproducing: f64,
    pub two_point: f64,
    pub duality: f64,
    pub jump: f64,
    pub kernel_rh: f64,
    /// Minimum shrink factor of the normalisation error per decade of `|z|`.
    pub asymptotic_ratio: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            kernel: 1e-8,
            biorthogonality: 1e-10,
            expansion: 1e-9,
            contiguity: 1e-9,
            leading: 1e-10,
            relabel: 1e-10,
            paths: 1e-8,
            ladder: 1e-8,
            trace: 1e-8,
            reproducing: 1e-6,
            two_point: 1e-4,
            duality: 1e-8,
            jump: 1e-6,
            kernel_rh: 1e-6,
            asymptotic_ratio: 8.0,
        }
    }
}

impl Tolerances {
    /// The same tolerance for every residual; the asymptotic ratio is kept.
    pub fn uniform(tol: f64) -> Self {
        Tolerances {
            kernel: tol,
            biorthogonality: tol,
            expansion: tol,
            contiguity: tol,
            leading: tol,
            relabel: tol,
            paths: tol,
            ladder: tol,
            trace: tol,
            reproducing: tol,
            two_point: tol,
            duality: tol,
            jump: tol,
            kernel_rh: tol,
            ..Tolerances::default()
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum PathChoice {
    Order(PathOrder),
    Explicit(Path),
}

#[derive(Clone, Debug)]
pub struct SuiteOptions {
    pub tol: Tolerances,
    pub path: PathChoice,
    pub seed: u64,
    /// Sample pairs for the kernel comparisons.
    pub pairs: usize,
    /// How many distinct paths the path-independence check uses.
    pub paths: usize,
    /// Include the nested-quadrature checks (trace, reproducing, two-point).
    pub quadrature: bool,
    pub riemann_hilbert: bool,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        SuiteOptions {
            tol: Tolerances::default(),
            path: PathChoice::Order(PathOrder::Block),
            seed: 0,
            pairs: 16,
            paths: 3,
            quadrature: true,
            riemann_hilbert: true,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SuiteReport {
    pub index: String,
    pub exact: bool,
    pub identities: Vec<Report>,
    pub riemann_hilbert: Vec<RhReport>,
    pub asymptotics: Vec<AsymptoticReport>,
    /// Checks that do not apply to this weight system or index.
    pub skipped: Vec<String>,
    pub pass: bool,
}

impl SuiteReport {
    pub fn failures(&self) -> Vec<String> {
        let mut out: Vec<String> = self
            .identities
            .iter()
            .filter(|r| !r.pass)
            .map(|r| format!("{} [{}]", r.identity, r.indices))
            .collect();
        out.extend(
            self.riemann_hilbert
                .iter()
                .filter(|r| !r.pass && !r.experimental)
                .map(|r| format!("{} at ({}, {})", r.check, r.at[0], r.at[1])),
        );
        out.extend(
            self.asymptotics
                .iter()
                .filter(|r| !r.pass)
                .map(|r| format!("asymptotics {:?}", r.which)),
        );
        out
    }
}

/// `count` pairs of distinct sample points: uniform on the sample interval
/// for densities, random distinct atoms for discrete systems.
pub fn suite_pairs<F: Scalar>(ws: &WeightSystem, count: usize, seed: u64) -> Vec<(F, F)> {
    if ws.is_continuous() {
        return sample_pairs(ws, count, seed)
            .into_iter()
            .map(|(x, y)| (F::from_f64(x), F::from_f64(y)))
            .collect();
    }
    let pts = sample_points::<F>(ws);
    if pts.len() < 2 {
        return Vec::new();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let a = rng.random_range(0..pts.len());
            let b = (a + rng.random_range(1..pts.len())) % pts.len();
            (pts[a].clone(), pts[b].clone())
        })
        .collect()
}

/// Every identity that applies to `ws` at `n`. Solver failures (for example
/// a vanishing normalisation) are returned as errors, not as failed checks.
pub fn run_suite<F: Scalar>(sys: Arc<MopSystem<F>>, n: &MultiIndex, opts: &SuiteOptions) -> Result<SuiteReport> {
    let ws = sys.weights().clone();
    let m = sys.m();
    if n.len() != m {
        return Err(Error::InvalidInput(format!(
            "multi-index {n} has {} components, the weight system has {m}",
            n.len()
        )));
    }
    if n.total() == 0 {
        return Err(Error::InvalidInput("the identity suite needs |n| >= 1".into()));
    }
    let tol = opts.tol;
    let path = match &opts.path {
        PathChoice::Order(o) => canonical_path(n, *o),
        PathChoice::Explicit(p) => {
            if p.end() != n {
                return Err(Error::InvalidInput(format!("path ends at {}, expected {n}", p.end())));
            }
            p.clone()
        }
    };
    let ctx = KernelContext::new(sys.clone(), &path)?;
    let pairs = suite_pairs::<F>(&ws, opts.pairs, opts.seed);
    let points = sample_points::<F>(&ws);
    let ys: Vec<F> = points.iter().step_by(4).cloned().collect();
    let mut ids = Vec::new();
    let mut skipped = Vec::new();
    let positive = n.all_positive();

    if positive {
        ids.extend(three_way_agreement(&ctx, &pairs, tol.kernel)?);
        ids.push(verify_numerator_vanishes(&ctx, &ys, tol.kernel)?);
    } else {
        skipped.push(format!("closed-form kernel: {n} has a zero component"));
    }
    ids.push(verify_biorthogonality(&ctx, tol.biorthogonality)?);
    ids.push(verify_recurrence_sparsity(&ctx, tol.expansion)?);
    for k in 0..ctx.n() {
        ids.push(verify_xp_expansion(&ctx, k, tol.expansion)?);
        ids.push(verify_yq_expansion(&ctx, k, &ys, tol.expansion)?);
    }
    for j in 0..m {
        ids.push(verify_leading_coefficient(&*sys, n, j, tol.leading)?);
        for k in j + 1..m {
            ids.push(contiguity_p(&*sys, n, j, k, tol.contiguity)?);
            ids.push(contiguity_scalar(&*sys, n, j, k, tol.contiguity)?);
            if n.get(j) >= 1 && n.get(k) >= 1 {
                ids.push(contiguity_q(&*sys, n, j, k, &ys, tol.contiguity)?);
                let base = n.minus_e(j).and_then(|b| b.minus_e(k)).expect("both positive");
                ids.push(verify_relabel(&*sys, &base, j, k, &pairs, tol.relabel)?);
            } else {
                skipped.push(format!("contiguity Q and relabel for weights {} and {}", j + 1, k + 1));
            }
        }
        if positive {
            ids.extend(verify_phi_ladder(&ctx, j, &ys, tol.ladder)?);
        }
    }
    let paths = all_paths(n, opts.paths);
    if paths.len() >= 2 {
        ids.push(verify_path_independence(&sys, n, &paths, &pairs, tol.paths)?);
    } else {
        skipped.push(format!("path independence: only one path reaches {n}"));
    }

    if ws.is_continuous() && opts.quadrature {
        ids.push(verify_trace(&ctx, tol.trace)?);
        let few: Vec<(f64, f64)> = pairs.iter().take(8).map(|(x, y)| (x.to_f64(), y.to_f64())).collect();
        ids.push(verify_reproducing(&ctx, &few, tol.reproducing)?);
        ids.push(verify_two_point_mass(&ctx, tol.two_point)?);
    } else if opts.quadrature {
        skipped.push("quadrature identities: discrete weights".into());
    }

    let mut rh_reports = Vec::new();
    let mut asymptotics = Vec::new();
    if opts.riemann_hilbert && ws.is_continuous() && positive {
        let rh = RhSystem::new(&*sys, n)?;
        let (rh_out, asym) = run_riemann_hilbert(&rh, &ctx, opts)?;
        rh_reports = rh_out;
        asymptotics = asym;
    } else if opts.riemann_hilbert {
        skipped.push("Riemann-Hilbert checks: need densities and every n_k >= 1".into());
    }

    ids.sort_by(|a, b| (&a.identity, &a.indices).cmp(&(&b.identity, &b.indices)));
    let pass = ids.iter().all(|r| r.pass)
        && rh_reports.iter().all(|r| r.pass || r.experimental)
        && asymptotics.iter().all(|r| r.pass);
    Ok(SuiteReport {
        index: n.to_string(),
        exact: F::EXACT,
        identities: ids,
        riemann_hilbert: rh_reports,
        asymptotics,
        skipped,
        pass,
    })
}

/// Duality at 8 off-axis points, jumps at 4 real points, the kernel from the
/// boundary values at the sample pairs, and the normalisation at infinity.
pub fn run_riemann_hilbert<F: Scalar>(
    rh: &RhSystem,
    ctx: &KernelContext<F>,
    opts: &SuiteOptions,
) -> Result<(Vec<RhReport>, Vec<AsymptoticReport>)> {
    let tol = opts.tol;
    let (lo, hi) = rh.weights().sample_interval().unwrap_or((-1.0, 1.0));
    let (mid, half) = (0.5 * (lo + hi), 0.5 * (hi - lo));
    let mut out = Vec::new();
    for i in 0..8 {
        let t = i as f64 / 8.0;
        let re = mid + half * (2.0 * t - 1.0) * 0.9;
        let im = if i % 2 == 0 { 0.5 + t } else { -(0.5 + t) };
        out.push(rh.verify_duality(Complex64::new(re, im), tol.duality)?);
    }
    for i in 0..4 {
        let x = mid + half * (-0.6 + 0.4 * i as f64);
        out.extend(rh.verify_jump(x, tol.jump)?);
    }
    let mut r = Residual::new();
    let mut worst_im: f64 = 0.0;
    for (x, y) in sample_pairs(rh.weights(), opts.pairs, opts.seed) {
        let via_rh = rh.kernel_rh(x, y)?;
        let cd = ctx.kernel_cd(&F::from_f64(x), &F::from_f64(y))?.to_f64();
        r.push_f64(via_rh.re, cd);
        worst_im = worst_im.max(via_rh.im.abs());
    }
    r.abs = r.abs.max(worst_im);
    out.push(RhReport::new(
        "kernel_rh = kernel_cd",
        [0.0, 0.0],
        r.relative(),
        tol.kernel_rh,
    ));
    let dir = Complex64::new(1.0, 1.0);
    let asym = vec![
        rh.verify_asymptotics(Which::Y, dir, 1e2, tol.asymptotic_ratio)?,
        rh.verify_asymptotics(Which::X, dir, 1e2, tol.asymptotic_ratio)?,
    ];
    Ok((out, asym))
}

/// [`run_suite`] in the field chosen by the weight system.
pub fn verify(ws: &WeightSystem, n: &MultiIndex, opts: &SuiteOptions) -> Result<SuiteReport> {
    match ws.mode() {
        ScalarMode::ExactRational => run_suite(Arc::new(MopSystem::<Rational>::new(ws)?), n, opts),
        ScalarMode::Float(Precision::Double) => run_suite(Arc::new(MopSystem::<f64>::new(ws)?), n, opts),
        ScalarMode::Float(Precision::Extended) => run_suite(Arc::new(MopSystem::<Dd>::new(ws)?), n, opts),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weights::MeasureSpec;

    #[test]
    fn hermite_suite_passes() {
        let ws = WeightSystem::gaussian_drifts(&[1.0, -1.0], Precision::Double).unwrap();
        let rep = verify(&ws, &MultiIndex::new(vec![2, 2]), &SuiteOptions::default()).unwrap();
        assert!(rep.pass, "{:?}", rep.failures());
        assert!(rep.skipped.is_empty());
        assert!(!rep.riemann_hilbert.is_empty());
    }

    #[test]
    fn zero_tolerance_fails_in_float_mode() {
        let ws = WeightSystem::gaussian_drifts(&[1.0, -1.0], Precision::Double).unwrap();
        let opts = SuiteOptions {
            tol: Tolerances::uniform(0.0),
            quadrature: false,
            riemann_hilbert: false,
            ..SuiteOptions::default()
        };
        let rep = verify(&ws, &MultiIndex::new(vec![1, 1]), &opts).unwrap();
        assert!(!rep.pass);
    }

    #[test]
    fn exact_suite_and_degeneracy() {
        let ws = WeightSystem::new(
            vec![
                MeasureSpec::atoms(&[(0, 1), (1, 1), (2, 1)]),
                MeasureSpec::atoms(&[(0, 1), (1, 2), (2, 4)]),
            ],
            ScalarMode::ExactRational,
        )
        .unwrap();
        let err = verify(&ws, &MultiIndex::new(vec![2, 1]), &SuiteOptions::default()).unwrap_err();
        assert!(matches!(err, Error::ZeroNormalization { .. }));
        let ws = WeightSystem::new(
            (0..2)
                .map(|k| MeasureSpec::atoms(&(0..6).map(|i| (i, 1 << (k * i))).collect::<Vec<_>>()))
                .collect(),
            ScalarMode::ExactRational,
        )
        .unwrap();
        let rep = verify(&ws, &MultiIndex::new(vec![2, 1]), &SuiteOptions::default()).unwrap();
        assert!(rep.pass, "{:?}", rep.failures());
        assert!(rep.identities.iter().all(|r| r.residual_abs == 0.0));
    }
}
