//! Recurrence coefficients along a path and the algebraic identities that
//! connect neighbouring multiple orthogonal polynomials.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::kernel::KernelContext;
use crate::mop::MopSystem;
use crate::multi_index::{MultiIndex, Path};
use crate::poly::Poly;
use crate::report::{Report, Residual};
use crate::scalar::Scalar;

/// `c[j][k] = ∫ x P_k Q_j` for path positions `j, k < n + m`.
#[derive(Clone, Debug, Serialize)]
pub struct RecurrenceTable<F> {
    #[serde(skip)]
    pub entries: Vec<Vec<F>>,
    pub path: Path,
}

impl<F: Scalar> RecurrenceTable<F> {
    pub fn from_context(ctx: &KernelContext<F>) -> Self {
        let size = ctx.recurrence_size();
        RecurrenceTable {
            entries: (0..size)
                .map(|j| (0..size).map(|k| ctx.c(j, k).clone()).collect())
                .collect(),
            path: ctx.path().clone(),
        }
    }

    pub fn get(&self, j: usize, k: usize) -> &F {
        &self.entries[j][k]
    }

    pub fn size(&self) -> usize {
        self.entries.len()
    }
}

fn bad_position(what: &str, pos: usize, limit: usize) -> Error {
    Error::InvalidInput(format!("{what} {pos} out of range (must be < {limit})"))
}

/// `∫ x P_k(x) Q_j(x) dx`, recomputed from the moments.
pub fn recurrence_coeff<F: Scalar>(ctx: &KernelContext<F>, j: usize, k: usize) -> Result<F> {
    let size = ctx.recurrence_size();
    if j >= size || k >= size {
        return Err(bad_position("path position", j.max(k), size));
    }
    ctx.system().pair(&ctx.p(k).shift(), ctx.q(j))
}

fn path_label<F: Scalar>(ctx: &KernelContext<F>) -> String {
    format!("n=({})", ctx.index())
}

/// `∫ P_k Q_j = δ_{jk}` for all path positions.
pub fn verify_biorthogonality<F: Scalar>(ctx: &KernelContext<F>, tol: f64) -> Result<Report> {
    let size = ctx.recurrence_size();
    let mut r = Residual::new();
    for k in 0..size {
        for j in 0..size {
            let v = ctx.system().pair(ctx.p(k), ctx.q(j))?;
            let target = if j == k { F::one() } else { F::zero() };
            r.push(&v, &target);
        }
    }
    Ok(Report::from_residual("biorthogonality", path_label(ctx), &r, tol))
}

/// `c_{k+1,k} = 1` and `c_{j,k} = 0` for `j >= k + 2`.
pub fn verify_recurrence_sparsity<F: Scalar>(ctx: &KernelContext<F>, tol: f64) -> Result<Report> {
    let size = ctx.recurrence_size();
    let mut r = Residual::new();
    for k in 0..size {
        for j in k + 1..size {
            let target = if j == k + 1 { F::one() } else { F::zero() };
            r.push(ctx.c(j, k), &target);
        }
    }
    // scale by the monic entries so the zero pattern is judged relative to 1
    r.scale = r.scale.max(1.0);
    Ok(Report::from_residual("recurrence sparsity", path_label(ctx), &r, tol))
}

/// Band structure `c_{j,k} = 0` for `k >= j + m + 1`. Holds for the
/// step structure of the extended path, not for arbitrary paths, so the
/// result is informative only.
pub fn svi_band_report<F: Scalar>(ctx: &KernelContext<F>, tol: f64) -> Report {
    let size = ctx.recurrence_size();
    let m = ctx.m();
    let mut r = Residual::new();
    for j in 0..size {
        for k in j + m + 1..size {
            r.push(ctx.c(j, k), &F::zero());
        }
    }
    let scale = (0..size)
        .flat_map(|j| (0..size).map(move |k| (j, k)))
        .map(|(j, k)| ctx.c(j, k).magnitude())
        .fold(0.0, f64::max);
    r.scale = r.scale.max(scale);
    Report::from_residual("recurrence band k >= j+m+1", path_label(ctx), &r, tol)
}

/// Coefficients of `x P_k - Σ_{j<=k+1} c_{j,k} P_j`.
pub fn verify_xp_expansion<F: Scalar>(ctx: &KernelContext<F>, k: usize, tol: f64) -> Result<Report> {
    let limit = ctx.recurrence_size() - 1;
    if k >= limit {
        return Err(bad_position("k", k, limit));
    }
    let lhs = ctx.p(k).shift();
    let mut rhs = Poly::zero();
    for j in 0..=k + 1 {
        rhs = rhs.add(&ctx.p(j).scale(ctx.c(j, k)));
    }
    let mut r = Residual::new();
    for i in 0..=k + 1 {
        r.push(&lhs.coeff(i), &rhs.coeff(i));
    }
    Ok(Report::from_residual(
        "xP expansion",
        format!("{}, k={k}", path_label(ctx)),
        &r,
        tol,
    ))
}

/// `y Q_j(y) = Σ_{k<n+m} c_{j,k} Q_k(y)` at the sample points, `j < n`.
pub fn verify_yq_expansion<F: Scalar>(ctx: &KernelContext<F>, j: usize, points: &[F], tol: f64) -> Result<Report> {
    if j >= ctx.n() {
        return Err(bad_position("j", j, ctx.n()));
    }
    let mut r = Residual::new();
    for y in points {
        let qv = ctx.q_values(y)?;
        let lhs = y.clone() * qv[j].clone();
        let rhs = qv
            .iter()
            .enumerate()
            .fold(F::zero(), |acc, (k, q)| acc + ctx.c(j, k).clone() * q.clone());
        r.push(&lhs, &rhs);
    }
    Ok(Report::from_residual(
        "yQ expansion",
        format!("{}, j={j}", path_label(ctx)),
        &r,
        tol,
    ))
}

fn distinct(j: usize, k: usize) -> Result<()> {
    if j == k {
        Err(Error::InvalidInput("the contiguity relations need j != k".into()))
    } else {
        Ok(())
    }
}

fn pair_label(n: &MultiIndex, j: usize, k: usize) -> String {
    format!("n=({n}), j={}, k={}", j + 1, k + 1)
}

/// `P_n = (h^{(k)}_n / h^{(k)}_{n+e_j}) (P_{n+e_j} - P_{n+e_k})` and the
/// same with `-h^{(j)}_n / h^{(j)}_{n+e_k}`. Weight indices are zero-based.
pub fn contiguity_p<F: Scalar>(sys: &MopSystem<F>, n: &MultiIndex, j: usize, k: usize, tol: f64) -> Result<Report> {
    distinct(j, k)?;
    let (nj, nk) = (n.plus_e(j), n.plus_e(k));
    let p = sys.type2(n)?;
    let diff = sys.type2(&nj)?.poly.sub(&sys.type2(&nk)?.poly);
    let first = sys.h_coeff(n, k)? / sys.h_coeff(&nj, k)?;
    let second = -(sys.h_coeff(n, j)? / sys.h_coeff(&nk, j)?);
    let mut r = Residual::new();
    for ratio in [first, second] {
        let rhs = diff.scale(&ratio);
        for i in 0..=n.total() + 1 {
            r.push(&p.poly.coeff(i), &rhs.coeff(i));
        }
    }
    Ok(Report::from_residual("contiguity P", pair_label(n, j, k), &r, tol))
}

/// The two ratios in the P-contiguity relation coincide.
pub fn contiguity_scalar<F: Scalar>(
    sys: &MopSystem<F>,
    n: &MultiIndex,
    j: usize,
    k: usize,
    tol: f64,
) -> Result<Report> {
    distinct(j, k)?;
    let first = sys.h_coeff(n, k)? / sys.h_coeff(&n.plus_e(j), k)?;
    let second = -(sys.h_coeff(n, j)? / sys.h_coeff(&n.plus_e(k), j)?);
    let mut r = Residual::new();
    r.push(&first, &second);
    Ok(Report::from_residual("contiguity ratio", pair_label(n, j, k), &r, tol))
}

/// `Q_n = (h^{(k)}_{n-e_j-e_k} / h^{(k)}_{n-e_k}) (Q_{n-e_j} - Q_{n-e_k})`
/// and the companion with `-h^{(j)}_{n-e_j-e_k} / h^{(j)}_{n-e_j}`, at the
/// sample points.
pub fn contiguity_q<F: Scalar>(
    sys: &MopSystem<F>,
    n: &MultiIndex,
    j: usize,
    k: usize,
    points: &[F],
    tol: f64,
) -> Result<Report> {
    distinct(j, k)?;
    let (nj, nk) = match (n.minus_e(j), n.minus_e(k)) {
        (Some(a), Some(b)) => (a, b),
        _ => {
            return Err(Error::InvalidInput(format!(
                "Q contiguity at {n} needs n_j >= 1 and n_k >= 1"
            )))
        }
    };
    let njk = nj.minus_e(k).expect("n_k >= 1");
    let ws = sys.weights();
    let q = sys.type1(n)?;
    let (qj, qk) = (sys.type1(&nj)?, sys.type1(&nk)?);
    let first = sys.h_coeff(&njk, k)? / sys.h_coeff(&nk, k)?;
    let second = -(sys.h_coeff(&njk, j)? / sys.h_coeff(&nj, j)?);
    let mut r = Residual::new();
    for y in points {
        let lhs = q.eval_q(ws, y)?;
        let diff = qj.eval_q(ws, y)? - qk.eval_q(ws, y)?;
        r.push(&lhs, &(first.clone() * diff.clone()));
        r.push(&lhs, &(second.clone() * diff));
    }
    Ok(Report::from_residual("contiguity Q", pair_label(n, j, k), &r, tol))
}

/// Leading coefficient of `A^{(j)}_{n+e_j}` equals `1/h^{(j)}_n`.
pub fn verify_leading_coefficient<F: Scalar>(sys: &MopSystem<F>, n: &MultiIndex, j: usize, tol: f64) -> Result<Report> {
    let a = sys.type1(&n.plus_e(j))?.a_poly(j);
    let lc = a.coeff(n.get(j));
    let expect = F::one() / sys.h_coeff(n, j)?;
    let mut r = Residual::new();
    r.push(&lc, &expect);
    Ok(Report::from_residual(
        "leading coefficient",
        format!("n=({n}), j={}", j + 1),
        &r,
        tol,
    ))
}

/// The `m × m` matrix `[∫ P_{n-e_i} x^{n_j-1} w_j]`; diagonal with entries
/// `h^{(j)}_{n-e_j}`, hence nonsingular.
pub fn basis_matrix<F: Scalar>(sys: &MopSystem<F>, n: &MultiIndex) -> Result<Vec<Vec<F>>> {
    if !n.all_positive() {
        return Err(Error::DegenerateIndex { index: n.clone() });
    }
    let m = sys.m();
    let mut rows = Vec::with_capacity(m);
    for i in 0..m {
        let p = sys.type2(&n.minus_e(i).expect("positive"))?;
        let row = (0..m)
            .map(|j| sys.functional(j, &p.poly.mul(&Poly::monomial(n.get(j) - 1))))
            .collect::<Result<Vec<_>>>()?;
        rows.push(row);
    }
    Ok(rows)
}

/// Coordinates of `π` in the basis `P_{n-e_1}, …, P_{n-e_m}` of the space
/// `V` of polynomials of degree `< |n|` with `∫ π x^i w_j = 0` for
/// `i <= n_j - 2`.
///
/// `tol` bounds both the membership conditions and the reconstruction
/// residual, relative to the natural size of each quantity (`0` in exact
/// arithmetic); either failing gives [`Error::NotInV`].
pub fn decompose_in_v<F: Scalar>(sys: &MopSystem<F>, n: &MultiIndex, pi: &Poly<F>, tol: f64) -> Result<Vec<F>> {
    if !n.all_positive() {
        return Err(Error::DegenerateIndex { index: n.clone() });
    }
    let total = n.total();
    if pi.degree().is_some_and(|d| d >= total) {
        return Err(Error::NotInV {
            residual: f64::INFINITY,
        });
    }
    let m = sys.m();
    for j in 0..m {
        for i in 0..n.get(j).saturating_sub(1) {
            let q = pi.mul(&Poly::monomial(i));
            let v = sys.reduced_functional(j, &q)?;
            let size = sys.functional_scale(j, &q)?;
            if !v.is_zero() && v.magnitude() > tol * size {
                return Err(Error::NotInV {
                    residual: v.magnitude() / size,
                });
            }
        }
    }
    let mut coords = Vec::with_capacity(m);
    let mut rebuilt = Poly::zero();
    for j in 0..m {
        let below = n.minus_e(j).expect("positive");
        let bj = sys.functional(j, &pi.mul(&Poly::monomial(n.get(j) - 1)))? / sys.h_coeff(&below, j)?;
        rebuilt = rebuilt.add(&sys.type2(&below)?.poly.scale(&bj));
        coords.push(bj);
    }
    let mut r = Residual::new();
    for i in 0..total {
        r.push(&pi.coeff(i), &rebuilt.coeff(i));
    }
    if r.abs > 0.0 && r.relative() > tol {
        return Err(Error::NotInV { residual: r.relative() });
    }
    Ok(coords)
}

/// `π_k = Σ_{j<n} c_{j,k} P_j` for path position `k` in `n..n+m`.
pub fn pi_k<F: Scalar>(ctx: &KernelContext<F>, k: usize) -> Poly<F> {
    (0..ctx.n()).fold(Poly::zero(), |acc, j| acc.add(&ctx.p(j).scale(ctx.c(j, k))))
}

/// The ladder behind the closed form, for weight `j` (zero-based):
///
/// * `h^{(j)}_{n-e_j} φ_j(y) = Σ_{i<=j} h^{(j)}_{n+s_{i-1}} Q_{n+s_i}(y)`,
///   with `φ_j` read off from decomposing every `π_k` in `V`;
/// * each telescoping step
///   `h^{(j)}_{n+s_i} Q_{n+s_i+e_j} = h^{(j)}_{n+s_i} Q_{n+s_{i+1}} + h^{(j)}_{n+s_{i+1}} Q_{n+s_{i+1}+e_j}`;
/// * the target `h^{(j)}_n Q_{n+e_j}(y) = Σ_{i<=j} h^{(j)}_{n+s_{i-1}} Q_{n+s_i}(y)`.
pub fn verify_phi_ladder<F: Scalar>(ctx: &KernelContext<F>, j: usize, points: &[F], tol: f64) -> Result<Vec<Report>> {
    let n = ctx.index().clone();
    if !n.all_positive() {
        return Err(Error::DegenerateIndex { index: n });
    }
    let m = ctx.m();
    if j >= m {
        return Err(bad_position("weight index", j, m));
    }
    let sys = ctx.system();
    let ws = sys.weights();
    let s = |i: usize| n.plus(&MultiIndex::partial_ones(m, i));
    let label = format!("n=({n}), j={}", j + 1);
    let nn = ctx.n();

    // φ_j(y) = Σ_k b_{j,k} Q_k(y) with π_k = Σ_i b_{i,k} P_{n-e_i}
    let vtol = if F::EXACT { 0.0 } else { 1e-6 };
    let mut b = Vec::with_capacity(m);
    for k in nn..nn + m {
        b.push(decompose_in_v(sys, &n, &pi_k(ctx, k), vtol)?[j].clone());
    }
    let h_below = sys.h_coeff(&n.minus_e(j).expect("positive"), j)?;
    let ladder: Vec<(F, std::sync::Arc<crate::mop::TypeISolution<F>>)> = (1..=j + 1)
        .map(|i| Ok((sys.h_coeff(&s(i - 1), j)?, sys.type1(&s(i))?)))
        .collect::<Result<_>>()?;
    let h_n = sys.h_coeff(&n, j)?;
    let q_top = sys.type1(&n.plus_e(j))?;

    let mut phi_r = Residual::new();
    let mut target_r = Residual::new();
    for y in points {
        let qv = ctx.q_values(y)?;
        let phi = b
            .iter()
            .enumerate()
            .fold(F::zero(), |acc, (i, bk)| acc + bk.clone() * qv[nn + i].clone());
        let mut rhs = F::zero();
        for (h, q) in &ladder {
            rhs = rhs + h.clone() * q.eval_q(ws, y)?;
        }
        phi_r.push(&(h_below.clone() * phi), &rhs);
        target_r.push(&(h_n.clone() * q_top.eval_q(ws, y)?), &rhs);
    }

    let mut reports = vec![Report::from_residual("phi expression", label.clone(), &phi_r, tol)];
    for i in 0..j {
        let (a, a1) = (s(i), s(i + 1));
        let (h0, h1) = (sys.h_coeff(&a, j)?, sys.h_coeff(&a1, j)?);
        let (q0, q1, q2) = (sys.type1(&a.plus_e(j))?, sys.type1(&a1)?, sys.type1(&a1.plus_e(j))?);
        let mut r = Residual::new();
        for y in points {
            let lhs = h0.clone() * q0.eval_q(ws, y)?;
            let rhs = h0.clone() * q1.eval_q(ws, y)? + h1.clone() * q2.eval_q(ws, y)?;
            r.push(&lhs, &rhs);
        }
        reports.push(Report::from_residual(
            "telescoping step",
            format!("{label}, step={}", i + 1),
            &r,
            tol,
        ));
    }
    reports.push(Report::from_residual("ladder target", label, &target_r, tol));
    Ok(reports)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::sample_points;
    use crate::multi_index::PathOrder;
    use crate::scalar::Rational;
    use crate::weights::{MeasureSpec, Precision, ScalarMode, WeightSystem};
    use std::sync::Arc;

    fn mi(v: &[usize]) -> MultiIndex {
        MultiIndex::new(v.to_vec())
    }

    fn hermite(drifts: &[f64]) -> Arc<MopSystem<f64>> {
        let ws = WeightSystem::gaussian_drifts(drifts, Precision::Double).unwrap();
        Arc::new(MopSystem::new(&ws).unwrap())
    }

    fn atoms(count: i64) -> Arc<MopSystem<Rational>> {
        let a: Vec<(i64, i64)> = (0..count).map(|i| (i, 1)).collect();
        let b: Vec<(i64, i64)> = (0..count).map(|i| (i, 1 << i)).collect();
        let ws = WeightSystem::new(
            vec![MeasureSpec::atoms(&a), MeasureSpec::atoms(&b)],
            ScalarMode::ExactRational,
        )
        .unwrap();
        Arc::new(MopSystem::new(&ws).unwrap())
    }

    #[test]
    fn expansions_hold() {
        let sys = hermite(&[1.0, -1.0]);
        let ctx = KernelContext::for_index(sys.clone(), &mi(&[5, 5]), PathOrder::RoundRobin).unwrap();
        for k in 0..=10 {
            let rep = verify_xp_expansion(&ctx, k, 1e-9).unwrap();
            assert!(rep.pass, "{rep:?}");
        }
        let pts = sample_points::<f64>(sys.weights());
        for j in 0..ctx.n() {
            let rep = verify_yq_expansion(&ctx, j, &pts, 1e-9).unwrap();
            assert!(rep.pass, "{rep:?}");
        }
        assert!(verify_xp_expansion(&ctx, 11, 1e-9).is_err());
        assert!(verify_recurrence_sparsity(&ctx, 1e-9).unwrap().pass);
        let small = KernelContext::for_index(sys, &mi(&[3, 3]), PathOrder::Block).unwrap();
        let rep = verify_biorthogonality(&small, 1e-10).unwrap();
        assert!(rep.pass, "{rep:?}");
    }

    #[test]
    fn exact_expansions() {
        let sys = atoms(6);
        let ctx = KernelContext::for_index(sys.clone(), &mi(&[2, 1]), PathOrder::Block).unwrap();
        for k in 0..ctx.recurrence_size() - 1 {
            assert_eq!(verify_xp_expansion(&ctx, k, 0.0).unwrap().residual_abs, 0.0);
        }
        let pts = sample_points::<Rational>(sys.weights());
        for j in 0..ctx.n() {
            let rep = verify_yq_expansion(&ctx, j, &pts, 0.0).unwrap();
            assert_eq!(rep.residual_abs, 0.0);
        }
        assert_eq!(recurrence_coeff(&ctx, 3, 2).unwrap(), Rational::from_i64(1));
        assert!(verify_biorthogonality(&ctx, 0.0).unwrap().pass);
    }

    #[test]
    fn contiguity_relations() {
        let sys = hermite(&[1.0, -1.0]);
        let rep = contiguity_p(&sys, &mi(&[0, 0]), 0, 1, 1e-12).unwrap();
        assert!(rep.pass, "{rep:?}");
        assert!(contiguity_scalar(&sys, &mi(&[2, 1]), 0, 1, 1e-12).unwrap().pass);
        let pts = sample_points::<f64>(sys.weights());
        let rep = contiguity_q(&sys, &mi(&[2, 2]), 0, 1, &pts, 1e-9).unwrap();
        assert!(rep.pass, "{rep:?}");
        let rep = contiguity_q(&sys, &mi(&[2, 2]), 1, 0, &pts, 1e-9).unwrap();
        assert!(rep.pass, "{rep:?}");
        assert!(contiguity_p(&sys, &mi(&[0, 0]), 1, 1, 1e-12).is_err());

        let exact = atoms(4);
        assert_eq!(contiguity_p(&exact, &mi(&[0, 0]), 0, 1, 0.0).unwrap().residual_abs, 0.0);
        let pts = sample_points::<Rational>(exact.weights());
        assert_eq!(
            contiguity_q(&exact, &mi(&[2, 1]), 0, 1, &pts, 0.0)
                .unwrap()
                .residual_abs,
            0.0
        );
    }

    #[test]
    fn leading_coefficients() {
        let sys = hermite(&[-1.0, 0.0, 1.0]);
        for j in 0..3 {
            let rep = verify_leading_coefficient(&sys, &mi(&[1, 2, 1]), j, 1e-10).unwrap();
            assert!(rep.pass, "{rep:?}");
        }
    }

    #[test]
    fn decomposition_in_v() {
        let sys = atoms(6);
        let n = mi(&[2, 2]);
        let basis = sys.type2(&n.minus_e(0).unwrap()).unwrap().poly.clone();
        let b = decompose_in_v(&sys, &n, &basis, 0.0).unwrap();
        assert_eq!(b, vec![Rational::from_i64(1), Rational::from_i64(0)]);
        let ctx = KernelContext::for_index(sys.clone(), &n, PathOrder::Block).unwrap();
        for k in ctx.n()..ctx.n() + 2 {
            assert!(decompose_in_v(&sys, &n, &pi_k(&ctx, k), 0.0).is_ok());
        }
        let err = decompose_in_v(&sys, &n, &Poly::one(), 0.0).unwrap_err();
        assert!(matches!(err, Error::NotInV { .. }));
        let m = basis_matrix(&sys, &n).unwrap();
        assert!(m[0][1] == Rational::from_i64(0) && m[1][0] == Rational::from_i64(0));
        assert!(m[0][0] != Rational::from_i64(0) && m[1][1] != Rational::from_i64(0));
    }

    #[test]
    fn phi_ladders() {
        let sys = hermite(&[1.0, -1.0]);
        let ctx = KernelContext::for_index(sys.clone(), &mi(&[1, 1]), PathOrder::Block).unwrap();
        let pts = sample_points::<f64>(sys.weights());
        for j in 0..2 {
            for rep in verify_phi_ladder(&ctx, j, &pts, 1e-9).unwrap() {
                assert!(rep.pass, "{rep:?}");
            }
        }
        let sys3 = hermite(&[-1.0, 0.0, 1.0]);
        let ctx = KernelContext::for_index(sys3.clone(), &mi(&[1, 1, 1]), PathOrder::Block).unwrap();
        let pts = sample_points::<f64>(sys3.weights());
        let reps = verify_phi_ladder(&ctx, 2, &pts, 1e-8).unwrap();
        assert_eq!(reps.len(), 4);
        assert!(reps.iter().all(|r| r.pass), "{reps:?}");
    }

    #[test]
    fn band_structure_is_reported() {
        let sys = hermite(&[1.0, -1.0]);
        let ctx = KernelContext::for_index(sys, &mi(&[3, 3]), PathOrder::RoundRobin).unwrap();
        let rep = svi_band_report(&ctx, 1e-9);
        assert_eq!(rep.identity, "recurrence band k >= j+m+1");
    }
}
