//! Christoffel-Darboux kernels along a path of multi-indices.
//!
//! A [`KernelContext`] fixes a path `0 = n_0, …, n_n = n`, extends it by
//! `n + s_1, …, n + s_m` and caches `P_j = P_{n_j}`, `Q_j = Q_{n_{j+1}}`, the
//! `h` numbers needed by the closed form and the recurrence coefficients
//! `c_{j,k} = ∫ x P_k Q_j`. The kernel
//! `K_n(x, y) = Σ_{j<n} P_j(x) Q_j(y)` can then be evaluated three ways.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::mop::{MopSystem, TypeII, TypeISolution};
use crate::multi_index::{canonical_path, extend_path, MultiIndex, Path, PathOrder};
use crate::poly::Poly;
use crate::quadrature::{integrate_domain, QuadOptions};
use crate::report::{Report, Residual};
use crate::scalar::{Dd, Rational, Scalar};
use crate::weights::{Precision, ScalarMode, WeightSystem};

/// `|x - y| < DIAGONAL_GAP · (1 + |x| + |y|)` is treated as a diagonal point
/// by the difference quotients.
pub const DIAGONAL_GAP: f64 = 1e-7;

/// Terms of the closed form that need every `n_k >= 1`.
#[derive(Debug)]
struct CdTerms<F> {
    /// `h^{(k)}_n / h^{(k)}_{n-e_k}`
    ratios: Vec<F>,
    p_minus: Vec<Arc<TypeII<F>>>,
    q_plus: Vec<Arc<TypeISolution<F>>>,
}

pub struct KernelContext<F: Scalar> {
    sys: Arc<MopSystem<F>>,
    path: Path,
    n: usize,
    p: Vec<Arc<TypeII<F>>>,
    q: Vec<Arc<TypeISolution<F>>>,
    h_end: Vec<F>,
    cd: Option<CdTerms<F>>,
    /// `c[j][k]` for `j, k < n + m`.
    c: Vec<Vec<F>>,
}

impl<F: Scalar> KernelContext<F> {
    /// Build the context for `path` (ending at `n`, not yet extended).
    ///
    /// The endpoint is solved first, so a vanishing `h^{(k)}_n` is reported
    /// as [`Error::ZeroNormalization`] before anything else is attempted.
    pub fn new(sys: Arc<MopSystem<F>>, path: &Path) -> Result<Self> {
        let m = sys.m();
        if path.m() != m {
            return Err(Error::InvalidInput(format!(
                "path has {} components, the weight system has {m}",
                path.m()
            )));
        }
        let end = path.end().clone();
        let n = path.len();
        sys.type2(&end)?;
        let h_end = (0..m).map(|k| sys.h_coeff(&end, k)).collect::<Result<Vec<_>>>()?;

        let ext = extend_path(path);
        let steps = ext.steps();
        let p = steps[..n + m]
            .iter()
            .map(|s| sys.type2(s))
            .collect::<Result<Vec<_>>>()?;
        let q = steps[1..].iter().map(|s| sys.type1(s)).collect::<Result<Vec<_>>>()?;

        let cd = if end.all_positive() {
            let mut ratios = Vec::with_capacity(m);
            let mut p_minus = Vec::with_capacity(m);
            let mut q_plus = Vec::with_capacity(m);
            for k in 0..m {
                let below = end.minus_e(k).expect("positive component");
                ratios.push(h_end[k].clone() / sys.h_coeff(&below, k)?);
                p_minus.push(sys.type2(&below)?);
                q_plus.push(sys.type1(&end.plus_e(k))?);
            }
            Some(CdTerms {
                ratios,
                p_minus,
                q_plus,
            })
        } else {
            None
        };

        let size = n + m;
        let mut c = vec![vec![F::zero(); size]; size];
        for (k, pk) in p.iter().enumerate() {
            let xp = pk.poly.shift();
            for (j, qj) in q.iter().enumerate() {
                c[j][k] = sys.pair(&xp, qj)?;
            }
        }

        Ok(KernelContext {
            sys,
            path: ext,
            n,
            p,
            q,
            h_end,
            cd,
            c,
        })
    }

    /// Context on the canonical path of the given order.
    pub fn for_index(sys: Arc<MopSystem<F>>, n: &MultiIndex, order: PathOrder) -> Result<Self> {
        if n.len() != sys.m() {
            return Err(Error::InvalidInput(format!(
                "multi-index {n} has {} components, the weight system has {}",
                n.len(),
                sys.m()
            )));
        }
        Self::new(sys, &canonical_path(n, order))
    }

    pub fn system(&self) -> &Arc<MopSystem<F>> {
        &self.sys
    }

    pub fn weights(&self) -> &WeightSystem {
        self.sys.weights()
    }

    /// Extended path `n_0, …, n_{n+m}`.
    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn index(&self) -> &MultiIndex {
        &self.path.steps()[self.n]
    }

    /// Number of terms `n = |n|` in the kernel sum.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.sys.m()
    }

    /// `P_j` for `j < n + m`.
    pub fn p(&self, j: usize) -> &Poly<F> {
        &self.p[j].poly
    }

    /// `Q_j = Q_{n_{j+1}}` for `j < n + m`.
    pub fn q(&self, j: usize) -> &TypeISolution<F> {
        &self.q[j]
    }

    /// `h^{(k)}_n` at the endpoint.
    pub fn h_end(&self, k: usize) -> &F {
        &self.h_end[k]
    }

    /// `h^{(k)}_n / h^{(k)}_{n-e_k}`.
    pub fn cd_ratio(&self, k: usize) -> Result<&F> {
        Ok(&self.cd_terms()?.ratios[k])
    }

    /// Recurrence coefficient `c_{j,k}` for path positions `j, k < n + m`.
    pub fn c(&self, j: usize, k: usize) -> &F {
        &self.c[j][k]
    }

    pub fn recurrence_size(&self) -> usize {
        self.c.len()
    }

    fn cd_terms(&self) -> Result<&CdTerms<F>> {
        self.cd.as_ref().ok_or_else(|| Error::DegenerateIndex {
            index: self.index().clone(),
        })
    }

    /// `ρ_k(y)` for every weight.
    pub fn reduced_weights_at(&self, y: &F) -> Result<Vec<F>> {
        (0..self.m()).map(|k| self.weights().reduced_weight(k, y)).collect()
    }

    fn q_with(&self, q: &TypeISolution<F>, rho: &[F], y: &F) -> F {
        q.reduced_polys()
            .iter()
            .zip(rho)
            .filter(|(a, _)| !a.is_zero())
            .fold(F::zero(), |acc, (a, r)| acc + a.eval(y) * r.clone())
    }

    /// `P_0(x), …, P_{n+m-1}(x)`.
    pub fn p_values(&self, x: &F) -> Vec<F> {
        self.p.iter().map(|p| p.poly.eval(x)).collect()
    }

    /// `Q_0(y), …, Q_{n+m-1}(y)`.
    pub fn q_values(&self, y: &F) -> Result<Vec<F>> {
        let rho = self.reduced_weights_at(y)?;
        Ok(self.q.iter().map(|q| self.q_with(q, &rho, y)).collect())
    }

    fn check_off_diagonal(&self, x: &F, y: &F) -> Result<F> {
        let d = x.clone() - y.clone();
        let close = if F::EXACT {
            d.is_zero()
        } else {
            d.magnitude() < DIAGONAL_GAP * (1.0 + x.magnitude() + y.magnitude())
        };
        if close {
            return Err(Error::DiagonalPoint {
                x: x.to_f64(),
                y: y.to_f64(),
            });
        }
        Ok(d)
    }

    /// `Σ_{j<n} P_j(x) Q_j(y)`.
    pub fn kernel_direct(&self, x: &F, y: &F) -> Result<F> {
        if self.n == 0 {
            return Ok(F::zero());
        }
        let rho = self.reduced_weights_at(y)?;
        Ok((0..self.n).fold(F::zero(), |acc, j| {
            acc + self.p[j].poly.eval(x) * self.q_with(&self.q[j], &rho, y)
        }))
    }

    /// Closed form with `1 + m` terms.
    pub fn kernel_cd(&self, x: &F, y: &F) -> Result<F> {
        let cd = self.cd_terms()?;
        let d = self.check_off_diagonal(x, y)?;
        let rho = self.reduced_weights_at(y)?;
        let mut num = self.p[self.n].poly.eval(x) * self.q_with(&self.q[self.n - 1], &rho, y);
        for k in 0..self.m() {
            num = num - cd.ratios[k].clone() * cd.p_minus[k].poly.eval(x) * self.q_with(&cd.q_plus[k], &rho, y);
        }
        Ok(num / d)
    }

    /// Form with `1 + n·m` terms built from the recurrence coefficients.
    pub fn kernel_svi(&self, x: &F, y: &F) -> Result<F> {
        if self.n == 0 {
            return Err(Error::DegenerateIndex {
                index: self.index().clone(),
            });
        }
        let d = self.check_off_diagonal(x, y)?;
        let pv = self.p_values(x);
        let qv = self.q_values(y)?;
        let n = self.n;
        let mut num = pv[n].clone() * qv[n - 1].clone();
        for k in n..n + self.m() {
            let inner = (0..n).fold(F::zero(), |acc, j| acc + self.c[j][k].clone() * pv[j].clone());
            num = num - inner * qv[k].clone();
        }
        Ok(num / d)
    }

    /// `K_n(x, x)` as the direct sum.
    pub fn kernel_diagonal(&self, x: &F) -> Result<F> {
        self.kernel_direct(x, x)
    }

    /// Closed form off the diagonal, direct sum close to it.
    pub fn kernel(&self, x: &F, y: &F) -> Result<F> {
        if self.cd.is_none() {
            return self.kernel_direct(x, y);
        }
        match self.kernel_cd(x, y) {
            Err(Error::DiagonalPoint { .. }) => self.kernel_direct(x, y),
            other => other,
        }
    }

    /// Numerator of the closed form, `(x - y) K_n(x, y)`.
    pub fn cd_numerator(&self, x: &F, y: &F) -> Result<F> {
        let cd = self.cd_terms()?;
        let rho = self.reduced_weights_at(y)?;
        let mut num = self.p[self.n].poly.eval(x) * self.q_with(&self.q[self.n - 1], &rho, y);
        for k in 0..self.m() {
            num = num - cd.ratios[k].clone() * cd.p_minus[k].poly.eval(x) * self.q_with(&cd.q_plus[k], &rho, y);
        }
        Ok(num)
    }
}

/// Binary64 view of a kernel context of any scalar field.
pub trait KernelEval: Send + Sync {
    fn n(&self) -> usize;
    fn index(&self) -> &MultiIndex;
    fn weights(&self) -> &WeightSystem;
    fn direct(&self, x: f64, y: f64) -> Result<f64>;
    fn cd(&self, x: f64, y: f64) -> Result<f64>;
    fn svi(&self, x: f64, y: f64) -> Result<f64>;
    fn diagonal(&self, x: f64) -> Result<f64>;
    /// Closed form with the direct sum near the diagonal.
    fn eval(&self, x: f64, y: f64) -> Result<f64>;
}

impl<F: Scalar> KernelEval for KernelContext<F> {
    fn n(&self) -> usize {
        self.n
    }
    fn index(&self) -> &MultiIndex {
        KernelContext::index(self)
    }
    fn weights(&self) -> &WeightSystem {
        KernelContext::weights(self)
    }
    fn direct(&self, x: f64, y: f64) -> Result<f64> {
        Ok(self.kernel_direct(&F::from_f64(x), &F::from_f64(y))?.to_f64())
    }
    fn cd(&self, x: f64, y: f64) -> Result<f64> {
        Ok(self.kernel_cd(&F::from_f64(x), &F::from_f64(y))?.to_f64())
    }
    fn svi(&self, x: f64, y: f64) -> Result<f64> {
        Ok(self.kernel_svi(&F::from_f64(x), &F::from_f64(y))?.to_f64())
    }
    fn diagonal(&self, x: f64) -> Result<f64> {
        Ok(self.kernel_diagonal(&F::from_f64(x))?.to_f64())
    }
    fn eval(&self, x: f64, y: f64) -> Result<f64> {
        Ok(self.kernel(&F::from_f64(x), &F::from_f64(y))?.to_f64())
    }
}

/// Kernel context in the scalar field selected by the weight system.
pub fn build_kernel(ws: &WeightSystem, path: &Path) -> Result<Box<dyn KernelEval>> {
    Ok(match ws.mode() {
        ScalarMode::ExactRational => Box::new(KernelContext::new(Arc::new(MopSystem::<Rational>::new(ws)?), path)?),
        ScalarMode::Float(Precision::Double) => {
            Box::new(KernelContext::new(Arc::new(MopSystem::<f64>::new(ws)?), path)?)
        }
        ScalarMode::Float(Precision::Extended) => {
            Box::new(KernelContext::new(Arc::new(MopSystem::<Dd>::new(ws)?), path)?)
        }
    })
}

/// `count` seeded pairs: uniform pseudo-random points in `[lo, hi]²` for
/// continuous systems, pairs of distinct atoms for discrete ones.
pub fn sample_pairs(ws: &WeightSystem, count: usize, seed: u64) -> Vec<(f64, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    match ws.sample_interval() {
        Some((lo, hi)) => (0..count)
            .map(|_| (rng.random_range(lo..hi), rng.random_range(lo..hi)))
            .collect(),
        None => {
            let atoms: Vec<f64> = ws.atom_union().iter().map(|a| a.to_f64()).collect();
            let mut pairs = Vec::new();
            for &x in &atoms {
                for &y in &atoms {
                    if x != y {
                        pairs.push((x, y));
                    }
                }
            }
            if pairs.len() > count {
                (0..count).map(|_| pairs[rng.random_range(0..pairs.len())]).collect()
            } else {
                pairs
            }
        }
    }
}

/// Sample points for function identities: 32 Chebyshev points on the
/// sample interval, or the atoms of a discrete system (exactly).
pub fn sample_points<F: Scalar>(ws: &WeightSystem) -> Vec<F> {
    match ws.sample_interval() {
        Some((lo, hi)) => chebyshev_points(lo, hi, 32).into_iter().map(F::from_f64).collect(),
        None => ws.atom_union().iter().map(F::from_rational).collect(),
    }
}

pub fn chebyshev_points(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    (0..count)
        .map(|i| {
            let t = ((2 * i + 1) as f64 * std::f64::consts::PI / (2 * count) as f64).cos();
            0.5 * (lo + hi) + 0.5 * (hi - lo) * t
        })
        .collect()
}

/// Direct, closed-form and recurrence kernels at the given pairs. Each
/// pairwise difference is scaled by `max(|a|, |b|)`.
pub fn three_way_agreement<F: Scalar>(ctx: &KernelContext<F>, pairs: &[(F, F)], tol: f64) -> Result<Vec<Report>> {
    let mut cd = Residual::new();
    let mut svi = Residual::new();
    let mut worst_cd: f64 = 0.0;
    let mut worst_svi: f64 = 0.0;
    for (x, y) in pairs {
        let direct = ctx.kernel_direct(x, y)?;
        let a = ctx.kernel_cd(x, y)?;
        let b = ctx.kernel_svi(x, y)?;
        let mut r = Residual::new();
        r.push(&direct, &a);
        worst_cd = worst_cd.max(r.relative());
        cd.merge(&r);
        let mut r = Residual::new();
        r.push(&direct, &b);
        worst_svi = worst_svi.max(r.relative());
        svi.merge(&r);
    }
    let idx = ctx.index().to_string();
    let finish = |name: &str, r: &Residual, worst: f64| {
        let mut rep = Report::from_residual(name, idx.clone(), r, tol);
        rep.residual_rel = worst;
        rep.pass = r.abs == 0.0 || worst <= tol;
        rep
    };
    Ok(vec![
        finish("kernel_cd = kernel_direct", &cd, worst_cd),
        finish("kernel_svi = kernel_direct", &svi, worst_svi),
    ])
}

/// The direct kernel sum agrees along every path to `n`.
pub fn verify_path_independence<F: Scalar>(
    sys: &Arc<MopSystem<F>>,
    n: &MultiIndex,
    paths: &[Path],
    points: &[(F, F)],
    tol: f64,
) -> Result<Report> {
    if paths.iter().any(|p| p.end() != n) {
        return Err(Error::InvalidInput(format!("every path must end at {n}")));
    }
    let mut r = Residual::new();
    if let Some((first, rest)) = paths.split_first() {
        let base = KernelContext::new(sys.clone(), first)?;
        let base_vals = points
            .iter()
            .map(|(x, y)| base.kernel_direct(x, y))
            .collect::<Result<Vec<_>>>()?;
        for p in rest {
            let ctx = KernelContext::new(sys.clone(), p)?;
            for ((x, y), v) in points.iter().zip(&base_vals) {
                r.push(v, &ctx.kernel_direct(x, y)?);
            }
        }
    }
    Ok(Report::from_residual(
        "path independence",
        format!("{n} ({} paths)", paths.len()),
        &r,
        tol,
    ))
}

/// Every distinct monotone path from `0` to `n`, up to `limit` of them.
pub fn all_paths(n: &MultiIndex, limit: usize) -> Vec<Path> {
    fn walk(cur: &mut Vec<MultiIndex>, n: &MultiIndex, out: &mut Vec<Path>, limit: usize) {
        if out.len() >= limit {
            return;
        }
        let last = cur.last().expect("non-empty").clone();
        if last == *n {
            out.push(Path::new(cur.clone()).expect("valid path"));
            return;
        }
        for k in 0..n.len() {
            if last.get(k) < n.get(k) {
                cur.push(last.plus_e(k));
                walk(cur, n, out, limit);
                cur.pop();
            }
        }
    }
    let mut out = Vec::new();
    walk(&mut vec![MultiIndex::zeros(n.len())], n, &mut out, limit);
    out
}

/// `P_k(x)Q_{k+e_i}(y) + P_{k+e_i}(x)Q_{k+e_i+e_j}(y)` is symmetric in
/// `i ↔ j`. Weight indices are zero-based.
pub fn verify_relabel<F: Scalar>(
    sys: &MopSystem<F>,
    k: &MultiIndex,
    i: usize,
    j: usize,
    points: &[(F, F)],
    tol: f64,
) -> Result<Report> {
    if i == j {
        return Err(Error::InvalidInput("relabel identity needs i != j".into()));
    }
    let ws = sys.weights();
    let pk = sys.type2(k)?;
    let (ki, kj) = (k.plus_e(i), k.plus_e(j));
    let kij = ki.plus_e(j);
    let (pi, pj) = (sys.type2(&ki)?, sys.type2(&kj)?);
    let (qi, qj, qij) = (sys.type1(&ki)?, sys.type1(&kj)?, sys.type1(&kij)?);
    let mut r = Residual::new();
    for (x, y) in points {
        let lhs = pk.poly.eval(x) * qi.eval_q(ws, y)? + pi.poly.eval(x) * qij.eval_q(ws, y)?;
        let rhs = pk.poly.eval(x) * qj.eval_q(ws, y)? + pj.poly.eval(x) * qij.eval_q(ws, y)?;
        r.push(&lhs, &rhs);
    }
    Ok(Report::from_residual(
        "relabel",
        format!("k={k}, i={}, j={}", i + 1, j + 1),
        &r,
        tol,
    ))
}

/// The numerator of the closed form vanishes on the diagonal.
pub fn verify_numerator_vanishes<F: Scalar>(ctx: &KernelContext<F>, points: &[F], tol: f64) -> Result<Report> {
    let mut r = Residual::new();
    for x in points {
        let cd = ctx.cd_terms()?;
        let rho = ctx.reduced_weights_at(x)?;
        let first = ctx.p[ctx.n].poly.eval(x) * ctx.q_with(&ctx.q[ctx.n - 1], &rho, x);
        let mut rest = F::zero();
        for k in 0..ctx.m() {
            rest = rest + cd.ratios[k].clone() * cd.p_minus[k].poly.eval(x) * ctx.q_with(&cd.q_plus[k], &rho, x);
        }
        r.push(&first, &rest);
    }
    Ok(Report::from_residual(
        "closed-form numerator at x = y",
        ctx.index().to_string(),
        &r,
        tol,
    ))
}

fn eval_f64<F: Scalar>(v: Result<F>) -> f64 {
    v.map(|v| v.to_f64()).unwrap_or(f64::NAN)
}

/// `∫ K_n(x, x) dx = n` by quadrature.
pub fn verify_trace<F: Scalar>(ctx: &KernelContext<F>, tol: f64) -> Result<Report> {
    let (domain, breaks) = ctx.weights().system_domain()?;
    let res = integrate_domain(
        |t| eval_f64(ctx.kernel_diagonal(&F::from_f64(t))),
        domain,
        &breaks,
        QuadOptions {
            abs_tol: 1e-14 * ctx.n as f64,
            ..QuadOptions::with_rel_tol(1e-12)
        },
    )?;
    let mut r = Residual::new();
    r.push_f64(res.value, ctx.n as f64);
    Ok(Report::from_residual("trace", ctx.index().to_string(), &r, tol))
}

/// `∫ K_n(x, t) K_n(t, y) dt = K_n(x, y)` at the given pairs.
pub fn verify_reproducing<F: Scalar>(ctx: &KernelContext<F>, pairs: &[(f64, f64)], tol: f64) -> Result<Report> {
    let (domain, breaks) = ctx.weights().system_domain()?;
    let mut r = Residual::new();
    for &(x, y) in pairs {
        let mut br = breaks.clone();
        br.push(x);
        br.push(y);
        let (xf, yf) = (F::from_f64(x), F::from_f64(y));
        // |∫ K(x,t) K(t,y) dt| is of the size of sqrt(K(x,x) K(y,y))
        let size = (ctx.kernel_diagonal(&xf)?.to_f64() * ctx.kernel_diagonal(&yf)?.to_f64())
            .abs()
            .sqrt();
        let res = integrate_domain(
            |t| {
                let tf = F::from_f64(t);
                eval_f64(ctx.kernel_direct(&xf, &tf)) * eval_f64(ctx.kernel_direct(&tf, &yf))
            },
            domain,
            &br,
            QuadOptions {
                abs_tol: 1e-13 * size,
                ..QuadOptions::with_rel_tol(1e-11)
            },
        )?;
        r.push_f64(res.value, ctx.kernel_direct(&xf, &yf)?.to_f64());
    }
    Ok(Report::from_residual("reproducing", ctx.index().to_string(), &r, tol))
}

/// `∫∫ R_2 = n(n-1)` with `R_2(x, y) = K(x,x)K(y,y) - K(x,y)K(y,x)`,
/// by nested quadrature.
pub fn verify_two_point_mass<F: Scalar>(ctx: &KernelContext<F>, tol: f64) -> Result<Report> {
    let total = two_point_mass(ctx)?;
    let n = ctx.n as f64;
    let mut r = Residual::new();
    r.push_f64(total, n * (n - 1.0));
    Ok(Report::from_residual(
        "two-point mass",
        ctx.index().to_string(),
        &r,
        tol,
    ))
}

pub fn two_point_mass<F: Scalar>(ctx: &KernelContext<F>) -> Result<f64> {
    let (domain, breaks) = ctx.weights().system_domain()?;
    let n = ctx.n as f64;
    // the inner integral is at most K(x,x)·n, the outer one n²
    let opts = QuadOptions::with_rel_tol(1e-9);
    let mut failure = None;
    let outer = integrate_domain(
        |x| {
            let xf = F::from_f64(x);
            let kxx = eval_f64(ctx.kernel_diagonal(&xf));
            let inner = integrate_domain(
                |y| {
                    let yf = F::from_f64(y);
                    kxx * eval_f64(ctx.kernel_diagonal(&yf))
                        - eval_f64(ctx.kernel_direct(&xf, &yf)) * eval_f64(ctx.kernel_direct(&yf, &xf))
                },
                domain,
                &breaks,
                QuadOptions {
                    abs_tol: 1e-13 * kxx.abs() * n,
                    ..opts
                },
            );
            match inner {
                Ok(v) => v.value,
                Err(e) => {
                    failure = Some(e);
                    f64::NAN
                }
            }
        },
        domain,
        &breaks,
        QuadOptions {
            abs_tol: 1e-13 * n * n,
            ..opts
        },
    );
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(outer?.value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weights::MeasureSpec;

    fn mi(v: &[usize]) -> MultiIndex {
        MultiIndex::new(v.to_vec())
    }

    fn hermite() -> Arc<MopSystem<f64>> {
        let ws = WeightSystem::gaussian_drifts(&[1.0, -1.0], Precision::Double).unwrap();
        Arc::new(MopSystem::new(&ws).unwrap())
    }

    fn three_atoms() -> Arc<MopSystem<Rational>> {
        let ws = WeightSystem::new(
            vec![
                MeasureSpec::atoms(&[(0, 1), (1, 1), (2, 1)]),
                MeasureSpec::atoms(&[(0, 1), (1, 2), (2, 4)]),
            ],
            ScalarMode::ExactRational,
        )
        .unwrap();
        Arc::new(MopSystem::new(&ws).unwrap())
    }

    fn r(v: i64) -> Rational {
        Rational::from_i64(v)
    }

    #[test]
    fn empty_kernel_is_zero() {
        let ctx = KernelContext::for_index(hermite(), &mi(&[0, 0]), PathOrder::Block).unwrap();
        assert_eq!(ctx.kernel_direct(&0.3, &1.0).unwrap(), 0.0);
        assert_eq!(ctx.kernel_diagonal(&0.3).unwrap(), 0.0);
        assert!(matches!(ctx.kernel_svi(&0.0, &1.0), Err(Error::DegenerateIndex { .. })));
    }

    #[test]
    fn discrete_single_step() {
        let ctx = KernelContext::for_index(three_atoms(), &mi(&[1, 0]), PathOrder::Block).unwrap();
        let k = ctx.kernel_direct(&r(0), &r(1)).unwrap();
        assert_eq!(k, Rational::new(1.into(), 3.into()));
        assert!(matches!(ctx.kernel_direct(&r(0), &r(7)), Err(Error::NotAnAtom { .. })));
        assert!(matches!(
            ctx.kernel_cd(&r(0), &r(1)),
            Err(Error::DegenerateIndex { .. })
        ));
    }

    #[test]
    fn discrete_forms_agree_exactly() {
        let ws = WeightSystem::new(
            vec![
                MeasureSpec::atoms(&[(0, 1), (1, 1), (2, 1), (3, 1)]),
                MeasureSpec::atoms(&[(0, 1), (1, 2), (2, 4), (3, 8)]),
            ],
            ScalarMode::ExactRational,
        )
        .unwrap();
        let sys = Arc::new(MopSystem::new(&ws).unwrap());
        let ctx = KernelContext::for_index(sys, &mi(&[1, 1]), PathOrder::Block).unwrap();
        for x in 0..4 {
            for y in 0..4 {
                if x == y {
                    continue;
                }
                let d = ctx.kernel_direct(&r(x), &r(y)).unwrap();
                assert_eq!(ctx.kernel_cd(&r(x), &r(y)).unwrap(), d);
                assert_eq!(ctx.kernel_svi(&r(x), &r(y)).unwrap(), d);
            }
        }
        assert!(matches!(ctx.kernel_cd(&r(1), &r(1)), Err(Error::DiagonalPoint { .. })));
    }

    #[test]
    fn node_polynomial_index_is_refused() {
        let err = KernelContext::for_index(three_atoms(), &mi(&[2, 1]), PathOrder::Block)
            .err()
            .expect("must fail");
        assert!(matches!(err, Error::ZeroNormalization { .. }), "{err:?}");
    }

    #[test]
    fn hermite_forms_agree() {
        let ctx = KernelContext::for_index(hermite(), &mi(&[1, 1]), PathOrder::Block).unwrap();
        let (x, y) = (0.3, -0.7);
        let d = ctx.kernel_direct(&x, &y).unwrap();
        assert!((ctx.kernel_cd(&x, &y).unwrap() - d).abs() <= 1e-12 * d.abs().max(1e-3));
        assert!((ctx.kernel_svi(&x, &y).unwrap() - d).abs() <= 1e-12 * d.abs().max(1e-3));
        assert!(ctx.kernel_cd(&x, &(x + 1e-9)).is_err());
        assert!((ctx.kernel(&x, &x).unwrap() - ctx.kernel_diagonal(&x).unwrap()).abs() < 1e-15);
    }

    #[test]
    fn three_weights() {
        let ws = WeightSystem::gaussian_drifts(&[-1.0, 0.0, 1.0], Precision::Double).unwrap();
        let sys = Arc::new(MopSystem::<f64>::new(&ws).unwrap());
        let ctx = KernelContext::for_index(sys, &mi(&[2, 1, 1]), PathOrder::Block).unwrap();
        for (x, y) in sample_pairs(&ws, 16, 5) {
            let d = ctx.kernel_direct(&x, &y).unwrap();
            let c = ctx.kernel_cd(&x, &y).unwrap();
            assert!((c - d).abs() <= 1e-9 * d.abs().max(1e-2), "{x} {y} {c} {d}");
        }
    }

    #[test]
    fn recurrence_structure() {
        let ctx = KernelContext::for_index(hermite(), &mi(&[2, 1]), PathOrder::RoundRobin).unwrap();
        let size = ctx.recurrence_size();
        for k in 0..size {
            for j in 0..size {
                if j == k + 1 {
                    assert!((ctx.c(j, k) - 1.0).abs() < 1e-12);
                } else if j >= k + 2 {
                    assert!(ctx.c(j, k).abs() < 1e-12);
                }
            }
        }
        let c = KernelContext::for_index(hermite(), &mi(&[1, 0]), PathOrder::Block).unwrap();
        assert!((c.c(0, 0) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn paths_and_relabel() {
        let sys = hermite();
        let ws = sys.weights().clone();
        let pairs: Vec<(f64, f64)> = sample_pairs(&ws, 8, 1);
        let paths = all_paths(&mi(&[2, 2]), 10);
        assert_eq!(paths.len(), 6);
        let rep = verify_path_independence(&sys, &mi(&[2, 2]), &paths, &pairs, 1e-10).unwrap();
        assert!(rep.pass, "{rep:?}");
        let rep = verify_relabel(&sys, &mi(&[0, 0]), 0, 1, &pairs, 1e-12).unwrap();
        assert!(rep.pass, "{rep:?}");
        assert!(verify_relabel(&sys, &mi(&[0, 0]), 1, 1, &pairs, 1e-12).is_err());
        let exact = three_atoms();
        let pts = vec![(r(0), r(1)), (r(2), r(0)), (r(1), r(2))];
        let rep = verify_relabel(&exact, &mi(&[0, 0]), 0, 1, &pts, 0.0).unwrap();
        assert!(rep.pass && rep.residual_abs == 0.0, "{rep:?}");
    }

    #[test]
    fn determinantal_checks() {
        let ctx = KernelContext::for_index(hermite(), &mi(&[1, 1]), PathOrder::Block).unwrap();
        let rep = verify_trace(&ctx, 1e-8).unwrap();
        assert!(rep.pass, "{rep:?}");
        let rep = verify_reproducing(&ctx, &[(0.3, -0.7), (1.5, 0.2)], 1e-6).unwrap();
        assert!(rep.pass, "{rep:?}");
        let pts = sample_points::<f64>(ctx.weights());
        assert!(verify_numerator_vanishes(&ctx, &pts, 1e-12).unwrap().pass);
    }

    #[test]
    fn dynamic_builder_matches_mode() {
        let ws = WeightSystem::gaussian_drifts(&[1.0, -1.0], Precision::Extended).unwrap();
        let k = build_kernel(&ws, &canonical_path(&mi(&[2, 1]), PathOrder::Block)).unwrap();
        let a = k.direct(0.4, -1.1).unwrap();
        let b = k.cd(0.4, -1.1).unwrap();
        assert!((a - b).abs() < 1e-14 * a.abs().max(1e-3));
    }
}
