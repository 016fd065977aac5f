//! Type I and type II multiple orthogonal polynomials and `h` numbers.
//!
//! Both families come from the same mixed moment matrix
//! `M[(k, i)][l] = ∫ x^{i+l} ρ_k`, rows indexed by weight `k` and
//! `i < n_k`, columns by `l < |n|`: the type II coefficients solve `M b = r`
//! and the type I coefficients solve `Mᵀ a = e_{|n|-1}`.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use crate::error::{Error, Result};
use crate::linalg::{solve, Singular, Solved};
use crate::multi_index::MultiIndex;
use crate::poly::Poly;
use crate::scalar::Scalar;
use crate::weights::WeightSystem;

/// Condition number above which a solve is flagged as ill-conditioned.
pub const ILL_CONDITIONED: f64 = 1e12;

/// Diagnostics attached to every solve.
#[derive(Clone, Debug, PartialEq)]
pub struct SolveInfo {
    /// 1-norm condition estimate of the moment matrix (`None` when exact).
    pub condition: Option<f64>,
    /// Largest relative violation of the defining conditions.
    pub residual: f64,
    /// Residual tolerance `min(1e-9 · sqrt(cond) · scale, 1e-6)`.
    pub tolerance: f64,
    pub ill_conditioned: bool,
}

impl SolveInfo {
    fn new(condition: Option<f64>, residual: f64) -> Self {
        let tolerance = match condition {
            None => 0.0,
            Some(c) => (1e-9 * c.max(1.0).sqrt()).min(1e-6),
        };
        SolveInfo {
            condition,
            residual,
            tolerance,
            ill_conditioned: condition.is_some_and(|c| c > ILL_CONDITIONED),
        }
    }

    pub fn within_tolerance(&self) -> bool {
        self.residual <= self.tolerance
    }
}

/// Monic type II polynomial `P_n`.
#[derive(Clone, Debug)]
pub struct TypeII<F> {
    pub index: MultiIndex,
    pub poly: Poly<F>,
    pub info: SolveInfo,
}

/// Type I data at an index: the polynomials `A^{(k)}` with respect to the
/// normalized weights `ρ_k` and the scales `s_k` (`A^{(k)} = Â^{(k)}/s_k`).
#[derive(Clone, Debug)]
pub struct TypeISolution<F> {
    pub index: MultiIndex,
    reduced: Vec<Poly<F>>,
    scales: Vec<F>,
    pub info: SolveInfo,
}

impl<F: Scalar> TypeISolution<F> {
    /// `A^{(k)}` relative to the declared weight `w_k`.
    pub fn a_poly(&self, k: usize) -> Poly<F> {
        self.reduced[k].scale(&(F::one() / self.scales[k].clone()))
    }

    pub fn a_polys(&self) -> Vec<Poly<F>> {
        (0..self.reduced.len()).map(|k| self.a_poly(k)).collect()
    }

    /// `A^{(k)}` relative to the normalized weight `ρ_k`.
    pub fn reduced_poly(&self, k: usize) -> &Poly<F> {
        &self.reduced[k]
    }

    pub fn reduced_polys(&self) -> &[Poly<F>] {
        &self.reduced
    }

    /// `deg A^{(k)} = n_k - 1` for every `k` with `n_k >= 1`.
    pub fn has_full_degree(&self) -> bool {
        self.reduced
            .iter()
            .enumerate()
            .all(|(k, a)| self.index.get(k) == 0 || a.degree() == Some(self.index.get(k) - 1))
    }

    /// `Q(x) = Σ_k A^{(k)}(x) w_k(x)`.
    pub fn eval_q(&self, ws: &WeightSystem, x: &F) -> Result<F> {
        let mut acc = F::zero();
        for (k, a) in self.reduced.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            acc = acc + a.eval(x) * ws.reduced_weight(k, x)?;
        }
        Ok(acc)
    }
}

/// A weight system bound to a scalar field, with its moment table and
/// memoized solves.
///
/// The caches sit behind mutexes, so one `MopSystem` may be shared by
/// concurrent callers; every entry is computed at most once per caller race
/// and is immutable afterwards.
pub struct MopSystem<F: Scalar> {
    ws: WeightSystem,
    moments: Vec<Vec<F>>,
    scales: Vec<F>,
    type2_cache: Mutex<HashMap<MultiIndex, Result<Arc<TypeII<F>>>>>,
    type1_cache: Mutex<HashMap<MultiIndex, Result<Arc<TypeISolution<F>>>>>,
}

impl<F: Scalar> MopSystem<F> {
    pub fn new(ws: &WeightSystem) -> Result<Self> {
        let count = ws.max_order() + 1;
        let moments = (0..ws.m())
            .map(|k| ws.reduced_moments::<F>(k, count))
            .collect::<Result<Vec<_>>>()?;
        let scales = (0..ws.m()).map(|k| ws.scale_factor::<F>(k)).collect();
        Ok(MopSystem {
            ws: ws.clone(),
            moments,
            scales,
            type2_cache: Mutex::new(HashMap::new()),
            type1_cache: Mutex::new(HashMap::new()),
        })
    }

    pub fn weights(&self) -> &WeightSystem {
        &self.ws
    }

    pub fn m(&self) -> usize {
        self.ws.m()
    }

    pub fn scale(&self, k: usize) -> &F {
        &self.scales[k]
    }

    fn check_index(&self, n: &MultiIndex) -> Result<()> {
        if n.len() != self.m() {
            return Err(Error::InvalidInput(format!(
                "multi-index {n} has {} components, the weight system has {}",
                n.len(),
                self.m()
            )));
        }
        Ok(())
    }

    fn reduced_moment(&self, k: usize, j: usize) -> Result<F> {
        self.moments[k].get(j).cloned().ok_or(Error::OrderOverflow {
            order: j,
            max: self.ws.max_order(),
        })
    }

    /// `∫ p ρ_k` through the moment table.
    pub fn reduced_functional(&self, k: usize, p: &Poly<F>) -> Result<F> {
        let mut acc = F::zero();
        for (i, c) in p.coeffs().iter().enumerate() {
            if !c.is_zero() {
                acc = acc + c.clone() * self.reduced_moment(k, i)?;
            }
        }
        Ok(acc)
    }

    /// `∫ p w_k` through the moment table.
    pub fn functional(&self, k: usize, p: &Poly<F>) -> Result<F> {
        Ok(self.scales[k].clone() * self.reduced_functional(k, p)?)
    }

    /// Bound on `∫ |p| ρ_k` used to judge cancellation: `Σ |c_i| m_i` with
    /// `m_i = sqrt(μ_0 μ_{2i}) >= ∫ |x|^i ρ_k`, or `|μ_i|` past the moment
    /// table. Plain `|μ_i|` would vanish for odd `i` on symmetric weights.
    pub(crate) fn functional_scale(&self, k: usize, p: &Poly<F>) -> Result<f64> {
        let mu0 = self.reduced_moment(k, 0)?.magnitude();
        let mut acc = 0.0;
        for (i, c) in p.coeffs().iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let plain = self.reduced_moment(k, i)?.magnitude();
            let bound = match self.reduced_moment(k, 2 * i) {
                Ok(even) => (mu0 * even.magnitude()).sqrt().max(plain),
                Err(_) => plain,
            };
            acc += c.magnitude() * bound;
        }
        Ok(acc)
    }

    /// `∫ p(x) Q(x) dx` for a type I function `Q`.
    pub fn pair(&self, p: &Poly<F>, q: &TypeISolution<F>) -> Result<F> {
        let mut acc = F::zero();
        for (k, a) in q.reduced.iter().enumerate() {
            if !a.is_zero() {
                acc = acc + self.reduced_functional(k, &p.mul(a))?;
            }
        }
        Ok(acc)
    }

    fn moment_matrix(&self, n: &MultiIndex) -> Result<Vec<Vec<F>>> {
        let total = n.total();
        let mut rows = Vec::with_capacity(total);
        for k in 0..self.m() {
            for i in 0..n.get(k) {
                let row = (0..total)
                    .map(|l| self.reduced_moment(k, i + l))
                    .collect::<Result<Vec<_>>>()?;
                rows.push(row);
            }
        }
        Ok(rows)
    }

    /// Zero threshold relative to the natural scale of a normalization.
    fn zero_threshold(&self, total: usize, condition: Option<f64>) -> f64 {
        if F::EXACT {
            0.0
        } else {
            (100.0 * total.max(1) as f64 * F::EPSILON * condition.unwrap_or(1.0).max(1.0).sqrt()).min(1e-6)
        }
    }

    /// Monic type II polynomial of degree `|n|`.
    pub fn type2(&self, n: &MultiIndex) -> Result<Arc<TypeII<F>>> {
        self.check_index(n)?;
        if let Some(hit) = self.type2_cache.lock().expect("cache lock").get(n) {
            return hit.clone();
        }
        let result = self.solve_type2(n).map(Arc::new);
        self.type2_cache
            .lock()
            .expect("cache lock")
            .insert(n.clone(), result.clone());
        result
    }

    fn solve_type2(&self, n: &MultiIndex) -> Result<TypeII<F>> {
        let total = n.total();
        let matrix = self.moment_matrix(n)?;
        let mut rhs = Vec::with_capacity(total);
        for k in 0..self.m() {
            for i in 0..n.get(k) {
                rhs.push(-self.reduced_moment(k, i + total)?);
            }
        }
        let Solved { x, condition } = solve(&matrix, &rhs).map_err(|s: Singular| Error::NonPerfectIndex {
            index: n.clone(),
            reason: format!(
                "the {total}x{total} moment matrix has rank {}{}",
                s.rank,
                if s.consistent {
                    " (type II polynomial not unique)"
                } else {
                    " (no monic type II polynomial exists)"
                }
            ),
        })?;
        let mut coeffs = x;
        coeffs.push(F::one());
        let poly = Poly::new(coeffs);
        let mut residual: f64 = 0.0;
        if !F::EXACT {
            for k in 0..self.m() {
                for i in 0..n.get(k) {
                    let p = poly.mul(&Poly::monomial(i));
                    let scale = self.functional_scale(k, &p)?;
                    if scale > 0.0 {
                        residual = residual.max(self.reduced_functional(k, &p)?.magnitude() / scale);
                    }
                }
            }
        }
        Ok(TypeII {
            index: n.clone(),
            poly,
            info: SolveInfo::new(condition, residual),
        })
    }

    /// Type I polynomials with `∫ x^j Q = δ_{j, |n|-1}` for `j < |n|`.
    pub fn type1(&self, n: &MultiIndex) -> Result<Arc<TypeISolution<F>>> {
        self.check_index(n)?;
        if n.total() == 0 {
            return Err(Error::InvalidInput(
                "type I functions are defined only for |n| >= 1".into(),
            ));
        }
        if let Some(hit) = self.type1_cache.lock().expect("cache lock").get(n) {
            return hit.clone();
        }
        let result = self.solve_type1(n).map(Arc::new);
        self.type1_cache
            .lock()
            .expect("cache lock")
            .insert(n.clone(), result.clone());
        result
    }

    fn solve_type1(&self, n: &MultiIndex) -> Result<TypeISolution<F>> {
        let total = n.total();
        let matrix = self.moment_matrix(n)?;
        let transposed: Vec<Vec<F>> = (0..total)
            .map(|l| matrix.iter().map(|row| row[l].clone()).collect())
            .collect();
        let mut rhs = vec![F::zero(); total];
        rhs[total - 1] = F::one();
        let Solved { x, condition } = solve(&transposed, &rhs).map_err(|s: Singular| {
            if s.consistent {
                Error::NonPerfectIndex {
                    index: n.clone(),
                    reason: format!("type I functions are not unique (rank {} < {total})", s.rank),
                }
            } else {
                Error::ZeroNormalization {
                    index: n.clone(),
                    what: format!(
                        "every Q with the required vanishing moments has ∫ x^{} Q = 0",
                        total - 1
                    ),
                }
            }
        })?;
        let mut reduced = Vec::with_capacity(self.m());
        let mut offset = 0;
        for k in 0..self.m() {
            reduced.push(Poly::new(x[offset..offset + n.get(k)].to_vec()));
            offset += n.get(k);
        }
        let mut sol = TypeISolution {
            index: n.clone(),
            reduced,
            scales: self.scales.clone(),
            info: SolveInfo::new(condition, 0.0),
        };
        if !F::EXACT {
            let mut residual: f64 = 0.0;
            for j in 0..total {
                let xj = Poly::monomial(j);
                let mut scale = 0.0;
                for (k, a) in sol.reduced.iter().enumerate() {
                    scale += self.functional_scale(k, &xj.mul(&a.map(|c| c.abs())))?;
                }
                let target = if j + 1 == total { F::one() } else { F::zero() };
                let err = (self.pair(&xj, &sol)? - target).magnitude();
                if scale > 0.0 {
                    residual = residual.max(err / scale.max(1.0));
                }
            }
            sol.info.residual = residual;
        }
        Ok(sol)
    }

    /// `h^{(k)}_n / s_k = ∫ P_n x^{n_k} ρ_k`.
    pub fn reduced_h(&self, n: &MultiIndex, k: usize) -> Result<F> {
        let p = self.type2(n)?;
        let q = p.poly.mul(&Poly::monomial(n.get(k)));
        let value = self.reduced_functional(k, &q)?;
        let threshold = self.zero_threshold(n.total(), p.info.condition);
        let scale = self.functional_scale(k, &q)?;
        if value.is_zero() || value.magnitude() <= threshold * scale {
            return Err(Error::ZeroNormalization {
                index: n.clone(),
                what: format!("h^({}) = ∫ P x^{} w_{} dx vanishes", k + 1, n.get(k), k + 1),
            });
        }
        Ok(value)
    }

    /// `h^{(k)}_n = ∫ P_n(x) x^{n_k} w_k(x) dx` (nonzero, or an error).
    pub fn h_coeff(&self, n: &MultiIndex, k: usize) -> Result<F> {
        Ok(self.scales[k].clone() * self.reduced_h(n, k)?)
    }
}

/// `P_n` for a weight system (fresh solve, no cache sharing).
pub fn type2<F: Scalar>(ws: &WeightSystem, n: &MultiIndex) -> Result<Poly<F>> {
    Ok(MopSystem::<F>::new(ws)?.type2(n)?.poly.clone())
}

/// Type I data at `n`, `|n| >= 1`.
pub fn type1<F: Scalar>(ws: &WeightSystem, n: &MultiIndex) -> Result<TypeISolution<F>> {
    Ok((*MopSystem::<F>::new(ws)?.type1(n)?).clone())
}

/// `h^{(k)}_n` for zero-based weight index `k`.
pub fn h_coeff<F: Scalar>(ws: &WeightSystem, n: &MultiIndex, k: usize) -> Result<F> {
    MopSystem::<F>::new(ws)?.h_coeff(n, k)
}
