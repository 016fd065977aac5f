//! Weight systems: moments, pointwise weights and integration.
//!
//! Every measure `w_k` is handled internally as `w_k = s_k · ρ_k`, where the
//! scale `s_k` is the total mass for continuous families (so `ρ_k` is a
//! probability density) and exactly one for discrete atoms. Type II
//! polynomials and `Q` functions do not depend on the split; only the type I
//! coefficients and the `h` numbers carry the scale.

use serde_json::Value;
use statrs::function::beta::ln_beta;

use crate::error::{Error, Result};
use crate::poly::Poly;
use crate::quadrature::{integrate_domain, Domain, QuadOptions, QuadResult};
use crate::scalar::{parse_rational, Rational, Scalar, DD_SQRT_2PI};

/// Default highest moment order a weight system will produce.
pub const DEFAULT_MAX_ORDER: usize = 160;

#[derive(Clone, Debug, PartialEq)]
pub enum MeasureSpec {
    /// `w(x) = exp(-x²/(2σ²) + a x)` with `σ = scale`.
    GaussianDrift { drift: f64, scale: f64 },
    /// `w(x) = (hi - x)^α (x - lo)^β` on `[lo, hi]`.
    JacobiInterval { lo: f64, hi: f64, alpha: f64, beta: f64 },
    /// Finite sum of point masses `(location, mass)`.
    DiscreteAtoms { atoms: Vec<(Rational, Rational)> },
}

impl MeasureSpec {
    pub fn gaussian(drift: f64) -> Self {
        MeasureSpec::GaussianDrift { drift, scale: 1.0 }
    }

    pub fn atoms(atoms: &[(i64, i64)]) -> Self {
        MeasureSpec::DiscreteAtoms {
            atoms: atoms
                .iter()
                .map(|&(x, w)| (Rational::from_i64(x), Rational::from_i64(w)))
                .collect(),
        }
    }

    pub fn is_discrete(&self) -> bool {
        matches!(self, MeasureSpec::DiscreteAtoms { .. })
    }

    fn validate(&self) -> Result<()> {
        match self {
            MeasureSpec::GaussianDrift { drift, scale } => {
                if !drift.is_finite() || !scale.is_finite() || *scale <= 0.0 {
                    return Err(Error::Config(format!(
                        "gaussian_drift needs finite a and scale > 0 (got a = {drift}, scale = {scale})"
                    )));
                }
            }
            MeasureSpec::JacobiInterval { lo, hi, alpha, beta } => {
                if !(lo.is_finite() && hi.is_finite() && lo < hi) || *alpha <= -1.0 || *beta <= -1.0 {
                    return Err(Error::Config("jacobi needs finite a < b and alpha, beta > -1".into()));
                }
            }
            MeasureSpec::DiscreteAtoms { atoms } => {
                if atoms.is_empty() {
                    return Err(Error::Config("atoms list is empty".into()));
                }
                for (i, (x, w)) in atoms.iter().enumerate() {
                    if *w <= Rational::from_i64(0) {
                        return Err(Error::Config(format!("atom mass at {x} must be positive")));
                    }
                    if atoms[..i].iter().any(|(y, _)| y == x) {
                        return Err(Error::Config(format!("duplicate atom location {x}")));
                    }
                }
            }
        }
        Ok(())
    }

    /// Mean and standard deviation of the normalized Gaussian.
    fn gaussian_params(drift: f64, scale: f64) -> (f64, f64) {
        (drift * scale * scale, scale)
    }

    /// Total mass in binary64.
    pub fn mass(&self) -> f64 {
        match self {
            MeasureSpec::GaussianDrift { drift, scale } => {
                let (mean, _) = Self::gaussian_params(*drift, *scale);
                (2.0 * std::f64::consts::PI).sqrt() * scale * (0.5 * drift * mean).exp()
            }
            MeasureSpec::JacobiInterval { lo, hi, alpha, beta } => {
                ((alpha + beta + 1.0) * (hi - lo).ln() + ln_beta(alpha + 1.0, beta + 1.0)).exp()
            }
            MeasureSpec::DiscreteAtoms { atoms } => atoms.iter().map(|(_, w)| w.clone()).sum::<Rational>().to_f64(),
        }
    }

    /// Unnormalized weight in binary64 (zero off the support of continuous
    /// families; discrete measures have no density and return `None`).
    pub fn density_f64(&self, x: f64) -> Option<f64> {
        match self {
            MeasureSpec::GaussianDrift { drift, scale } => Some((-x * x / (2.0 * scale * scale) + drift * x).exp()),
            MeasureSpec::JacobiInterval { lo, hi, alpha, beta } => Some(if x <= *lo || x >= *hi {
                0.0
            } else {
                (hi - x).powf(*alpha) * (x - lo).powf(*beta)
            }),
            MeasureSpec::DiscreteAtoms { .. } => None,
        }
    }

    /// Natural integration domain of a continuous measure.
    pub fn domain(&self) -> Option<Domain> {
        match self {
            MeasureSpec::GaussianDrift { drift, scale } => {
                let (center, width) = Self::gaussian_params(*drift, *scale);
                Some(Domain::Line { center, width })
            }
            MeasureSpec::JacobiInterval { lo, hi, .. } => Some(Domain::Interval { lo: *lo, hi: *hi }),
            MeasureSpec::DiscreteAtoms { .. } => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Precision {
    /// binary64
    #[default]
    Double,
    /// double-double (about 32 significant digits)
    Extended,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ScalarMode {
    ExactRational,
    Float(Precision),
}

/// Declared system of `m >= 1` measures. Immutable once built and safe to
/// share between threads.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightSystem {
    measures: Vec<MeasureSpec>,
    mode: ScalarMode,
    max_order: usize,
    /// Sorted union of all atom locations (empty for continuous systems).
    atom_union: Vec<Rational>,
}

impl WeightSystem {
    pub fn new(measures: Vec<MeasureSpec>, mode: ScalarMode) -> Result<Self> {
        if measures.is_empty() {
            return Err(Error::Config("a weight system needs at least one measure".into()));
        }
        for m in &measures {
            m.validate()?;
        }
        if mode == ScalarMode::ExactRational && !measures.iter().all(MeasureSpec::is_discrete) {
            return Err(Error::Config(
                "exact mode is only available when every measure is a list of rational atoms".into(),
            ));
        }
        let mut atom_union: Vec<Rational> = measures
            .iter()
            .filter_map(|m| match m {
                MeasureSpec::DiscreteAtoms { atoms } => Some(atoms.iter().map(|(x, _)| x.clone())),
                _ => None,
            })
            .flatten()
            .collect();
        atom_union.sort();
        atom_union.dedup();
        Ok(WeightSystem {
            measures,
            mode,
            max_order: DEFAULT_MAX_ORDER,
            atom_union,
        })
    }

    /// Multiple Hermite system: Gaussian weights `e^{-x²/2 + a_k x}`.
    pub fn gaussian_drifts(drifts: &[f64], precision: Precision) -> Result<Self> {
        WeightSystem::new(
            drifts.iter().map(|&a| MeasureSpec::gaussian(a)).collect(),
            ScalarMode::Float(precision),
        )
    }

    pub fn with_max_order(mut self, max_order: usize) -> Self {
        self.max_order = max_order;
        self
    }

    pub fn m(&self) -> usize {
        self.measures.len()
    }

    pub fn measures(&self) -> &[MeasureSpec] {
        &self.measures
    }

    pub fn measure(&self, k: usize) -> &MeasureSpec {
        &self.measures[k]
    }

    pub fn mode(&self) -> ScalarMode {
        self.mode
    }

    pub fn max_order(&self) -> usize {
        self.max_order
    }

    pub fn is_discrete(&self) -> bool {
        self.measures.iter().all(MeasureSpec::is_discrete)
    }

    pub fn is_continuous(&self) -> bool {
        !self.measures.iter().any(MeasureSpec::is_discrete)
    }

    pub fn atom_union(&self) -> &[Rational] {
        &self.atom_union
    }

    fn check_index(&self, k: usize) -> Result<()> {
        if k >= self.m() {
            return Err(Error::InvalidInput(format!(
                "weight index {k} out of range for {} measures",
                self.m()
            )));
        }
        Ok(())
    }

    /// Scale `s_k` with `w_k = s_k ρ_k`.
    pub fn scale_factor<F: Scalar>(&self, k: usize) -> F {
        match &self.measures[k] {
            MeasureSpec::DiscreteAtoms { .. } => F::one(),
            m => F::from_f64(m.mass()),
        }
    }

    /// Moments `∫ x^j ρ_k` for `j < count`.
    pub fn reduced_moments<F: Scalar>(&self, k: usize, count: usize) -> Result<Vec<F>> {
        self.check_index(k)?;
        if count > self.max_order + 1 {
            return Err(Error::OrderOverflow {
                order: count - 1,
                max: self.max_order,
            });
        }
        let mut out: Vec<F> = Vec::with_capacity(count);
        match &self.measures[k] {
            MeasureSpec::GaussianDrift { drift, scale } => {
                // moments of N(mean, σ²): M_j = mean·M_{j-1} + (j-1)σ²·M_{j-2}
                let s = F::from_f64(*scale);
                let var = s.clone() * s.clone();
                let mean = F::from_f64(*drift) * var.clone();
                for j in 0..count {
                    let v = match j {
                        0 => F::one(),
                        1 => mean.clone(),
                        _ => {
                            mean.clone() * out[j - 1].clone()
                                + F::from_i64(j as i64 - 1) * var.clone() * out[j - 2].clone()
                        }
                    };
                    out.push(v);
                }
            }
            MeasureSpec::JacobiInterval { lo, hi, alpha, beta } => {
                // x = lo + (hi - lo) t with t ~ Beta(β + 1, α + 1)
                let (a, b) = (F::from_f64(*alpha), F::from_f64(*beta));
                let mut t_moments = Vec::with_capacity(count);
                let mut cur = F::one();
                for i in 0..count {
                    t_moments.push(cur.clone());
                    let i = F::from_i64(i as i64);
                    cur = cur * (b.clone() + F::one() + i.clone()) / (a.clone() + b.clone() + F::from_i64(2) + i);
                }
                let lo = F::from_f64(*lo);
                let width = F::from_f64(*hi) - lo.clone();
                for j in 0..count {
                    let mut acc = F::zero();
                    let mut binom = F::one();
                    for i in 0..=j {
                        let term = binom.clone() * pow(&lo, j - i) * pow(&width, i) * t_moments[i].clone();
                        acc = acc + term;
                        binom = binom * F::from_i64((j - i) as i64) / F::from_i64(i as i64 + 1);
                    }
                    out.push(acc);
                }
            }
            MeasureSpec::DiscreteAtoms { atoms } => {
                let mut powers: Vec<Rational> = atoms.iter().map(|(_, w)| w.clone()).collect();
                for _ in 0..count {
                    out.push(F::from_rational(&powers.iter().cloned().sum::<Rational>()));
                    for (p, (x, _)) in powers.iter_mut().zip(atoms) {
                        *p = p.clone() * x.clone();
                    }
                }
            }
        }
        Ok(out)
    }

    /// `∫ x^j w_k(x) dx` from closed forms (exact for atoms).
    pub fn moment<F: Scalar>(&self, k: usize, j: usize) -> Result<F> {
        let m = self.reduced_moments::<F>(k, j + 1)?;
        Ok(self.scale_factor::<F>(k) * m[j].clone())
    }

    /// The same moment by adaptive quadrature (continuous measures) or by
    /// direct summation (atoms).
    pub fn moment_by_quadrature(&self, k: usize, j: usize) -> Result<f64> {
        self.check_index(k)?;
        if j > self.max_order {
            return Err(Error::OrderOverflow {
                order: j,
                max: self.max_order,
            });
        }
        // odd moments can cancel to nothing; ∫|x|^j w sets the absolute floor
        let size = self
            .integrate_fn(k, |x| x.abs().powi(j as i32), QuadOptions::with_rel_tol(1e-14))?
            .value;
        let opts = QuadOptions {
            abs_tol: 1e-13 * size,
            ..QuadOptions::with_rel_tol(1e-14)
        };
        Ok(self.integrate_fn(k, |x| x.powi(j as i32), opts)?.value)
    }

    /// `ρ_k(x)`; for atoms the mass at `x`, zero at atoms of other measures
    /// in the system, and [`Error::NotAnAtom`] elsewhere.
    pub fn reduced_weight<F: Scalar>(&self, k: usize, x: &F) -> Result<F> {
        self.check_index(k)?;
        match &self.measures[k] {
            MeasureSpec::GaussianDrift { drift, scale } => {
                let (mean, sd) = MeasureSpec::gaussian_params(*drift, *scale);
                let d = x.clone() - F::from_f64(mean);
                let arg = -(d.clone() * d) / F::from_f64(2.0 * sd * sd);
                let e = arg
                    .exp()
                    .ok_or_else(|| Error::UnsupportedMeasure("Gaussian weights cannot be evaluated exactly".into()))?;
                Ok(e / (F::from_f64(sd) * F::from_dd(DD_SQRT_2PI)))
            }
            m @ MeasureSpec::JacobiInterval { .. } => {
                if F::EXACT {
                    return Err(Error::UnsupportedMeasure(
                        "Jacobi weights cannot be evaluated exactly".into(),
                    ));
                }
                let xf = x.to_f64();
                Ok(F::from_f64(m.density_f64(xf).unwrap_or(0.0) / m.mass()))
            }
            MeasureSpec::DiscreteAtoms { atoms } => {
                if let Some((_, w)) = atoms.iter().find(|(loc, _)| F::from_rational(loc) == *x) {
                    return Ok(F::from_rational(w));
                }
                if self.atom_union.iter().any(|loc| F::from_rational(loc) == *x) {
                    return Ok(F::zero());
                }
                Err(Error::NotAnAtom { x: x.to_f64() })
            }
        }
    }

    /// `w_k(x)`.
    pub fn weight_value<F: Scalar>(&self, k: usize, x: &F) -> Result<F> {
        Ok(self.scale_factor::<F>(k) * self.reduced_weight(k, x)?)
    }

    /// `w_k(x)` in binary64 straight from the closed form.
    pub fn weight_f64(&self, k: usize, x: f64) -> Result<f64> {
        match self.measures[k].density_f64(x) {
            Some(v) => Ok(v),
            None => self.weight_value::<f64>(k, &x),
        }
    }

    /// `∫ p(x) w_k(x) dx` through the moment functional.
    pub fn integrate_poly<F: Scalar>(&self, k: usize, p: &Poly<F>) -> Result<F> {
        let mu = self.reduced_moments::<F>(k, p.coeffs().len())?;
        let acc = p
            .coeffs()
            .iter()
            .zip(&mu)
            .fold(F::zero(), |acc, (c, m)| acc + c.clone() * m.clone());
        Ok(self.scale_factor::<F>(k) * acc)
    }

    /// `∫ f(x) w_k(x) dx` by adaptive quadrature, or by summation over atoms.
    pub fn integrate_fn(&self, k: usize, f: impl Fn(f64) -> f64, opts: QuadOptions) -> Result<QuadResult<f64>> {
        self.check_index(k)?;
        let measure = &self.measures[k];
        match measure {
            MeasureSpec::DiscreteAtoms { atoms } => Ok(QuadResult {
                value: atoms.iter().map(|(x, w)| f(x.to_f64()) * w.to_f64()).sum(),
                error: 0.0,
                evaluations: atoms.len(),
            }),
            _ => {
                let domain = measure.domain().expect("continuous");
                integrate_domain(|x| f(x) * measure.density_f64(x).unwrap_or(0.0), domain, &[], opts)
            }
        }
    }

    /// Domain and breakpoints covering the support of every measure; used to
    /// integrate functions such as `K(x, x)` over the line.
    pub fn system_domain(&self) -> Result<(Domain, Vec<f64>)> {
        if !self.is_continuous() {
            return Err(Error::UnsupportedMeasure(
                "quadrature over the line needs continuous weights".into(),
            ));
        }
        let mut breaks = Vec::new();
        let mut width: f64 = 0.0;
        let mut interval: Option<(f64, f64)> = None;
        let mut has_line = false;
        for m in &self.measures {
            match m.domain().expect("continuous") {
                Domain::Line { center, width: w } => {
                    has_line = true;
                    breaks.push(center);
                    width = width.max(w);
                }
                Domain::Interval { lo, hi } => {
                    breaks.push(lo);
                    breaks.push(hi);
                    interval = Some(match interval {
                        None => (lo, hi),
                        Some((a, b)) => (a.min(lo), b.max(hi)),
                    });
                }
            }
        }
        breaks.sort_by(f64::total_cmp);
        breaks.dedup();
        if has_line {
            let center = 0.5 * (breaks[0] + breaks[breaks.len() - 1]);
            Ok((Domain::Line { center, width }, breaks))
        } else {
            let (lo, hi) = interval.expect("at least one measure");
            Ok((Domain::Interval { lo, hi }, breaks))
        }
    }

    /// Interval on which function identities are sampled: for Gaussian
    /// drifts `[min mean - 4σ, max mean + 4σ]`, for Jacobi weights the union
    /// of the supports. `None` for discrete systems (use the atoms).
    pub fn sample_interval(&self) -> Option<(f64, f64)> {
        if !self.is_continuous() {
            return None;
        }
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for m in &self.measures {
            match m.domain().expect("continuous") {
                Domain::Line { center, width } => {
                    lo = lo.min(center - 4.0 * width);
                    hi = hi.max(center + 4.0 * width);
                }
                Domain::Interval { lo: a, hi: b } => {
                    lo = lo.min(a);
                    hi = hi.max(b);
                }
            }
        }
        Some((lo, hi))
    }

    /// Load from the JSON document format
    /// `{"scalar_mode": "exact"|"float", "measures": [...]}`.
    pub fn from_json(text: &str) -> Result<Self> {
        let doc: Value = serde_json::from_str(text).map_err(|e| Error::Config(format!("weight system JSON: {e}")))?;
        let mode = match doc.get("scalar_mode").and_then(Value::as_str).unwrap_or("float") {
            "exact" => ScalarMode::ExactRational,
            "float" => {
                let precision = match doc.get("precision").and_then(Value::as_str).unwrap_or("double") {
                    "double" => Precision::Double,
                    "extended" => Precision::Extended,
                    other => return Err(Error::Config(format!("unknown precision {other:?}"))),
                };
                ScalarMode::Float(precision)
            }
            other => return Err(Error::Config(format!("unknown scalar_mode {other:?}"))),
        };
        let list = doc
            .get("measures")
            .and_then(Value::as_array)
            .ok_or_else(|| Error::Config("missing \"measures\" array".into()))?;
        let measures = list.iter().map(parse_measure).collect::<Result<Vec<_>>>()?;
        let mut ws = WeightSystem::new(measures, mode)?;
        if let Some(order) = doc.get("max_order") {
            let order = order
                .as_u64()
                .ok_or_else(|| Error::Config("max_order must be a non-negative integer".into()))?;
            ws = ws.with_max_order(order as usize);
        }
        Ok(ws)
    }
}

fn pow<F: Scalar>(base: &F, e: usize) -> F {
    let mut acc = F::one();
    for _ in 0..e {
        acc = acc * base.clone();
    }
    acc
}

fn rational_field(v: &Value, what: &str) -> Result<Rational> {
    match v {
        Value::String(s) => {
            parse_rational(s).ok_or_else(|| Error::Config(format!("{what}: cannot parse {s:?} as a rational")))
        }
        Value::Number(n) => {
            if let Some(i) = n.as_i64() {
                Ok(Rational::from_i64(i))
            } else {
                parse_rational(&n.to_string()).ok_or_else(|| Error::Config(format!("{what}: bad number {n}")))
            }
        }
        _ => Err(Error::Config(format!("{what}: expected a number or \"p/q\" string"))),
    }
}

fn real_field(obj: &Value, key: &str, default: Option<f64>) -> Result<f64> {
    match obj.get(key) {
        Some(v) => Ok(rational_field(v, key)?.to_f64()),
        None => default.ok_or_else(|| Error::Config(format!("measure is missing {key:?}"))),
    }
}

fn parse_measure(obj: &Value) -> Result<MeasureSpec> {
    let kind = obj
        .get("kind")
        .and_then(Value::as_str)
        .ok_or_else(|| Error::Config("measure needs a \"kind\"".into()))?;
    match kind {
        "gaussian_drift" => Ok(MeasureSpec::GaussianDrift {
            drift: real_field(obj, "a", None)?,
            scale: real_field(obj, "scale", Some(1.0))?,
        }),
        "jacobi" => Ok(MeasureSpec::JacobiInterval {
            lo: real_field(obj, "a", None)?,
            hi: real_field(obj, "b", None)?,
            alpha: real_field(obj, "alpha", Some(0.0))?,
            beta: real_field(obj, "beta", Some(0.0))?,
        }),
        "atoms" => {
            let list = obj
                .get("atoms")
                .and_then(Value::as_array)
                .ok_or_else(|| Error::Config("atoms measure needs an \"atoms\" array".into()))?;
            let atoms = list
                .iter()
                .map(|pair| match pair.as_array().map(Vec::as_slice) {
                    Some([x, w]) => Ok((rational_field(x, "atom location")?, rational_field(w, "atom mass")?)),
                    _ => Err(Error::Config("each atom must be a [location, mass] pair".into())),
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(MeasureSpec::DiscreteAtoms { atoms })
        }
        other => Err(Error::Config(format!("unknown measure kind {other:?}"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn three_atoms() -> WeightSystem {
        WeightSystem::new(
            vec![MeasureSpec::atoms(&[(0, 1), (1, 2), (2, 4)])],
            ScalarMode::ExactRational,
        )
        .unwrap()
    }

    #[test]
    fn gaussian_moments_match_the_double_factorial_recurrence() {
        let ws = WeightSystem::gaussian_drifts(&[0.0], Precision::Double).unwrap();
        let root = (2.0 * std::f64::consts::PI).sqrt();
        assert!((ws.moment::<f64>(0, 0).unwrap() - 2.506_628_274_6).abs() < 1e-10);
        assert_eq!(ws.moment::<f64>(0, 1).unwrap(), 0.0);
        // μ_j = (j-1) μ_{j-2}
        let mut prev = [root, 0.0];
        for j in 2..=20 {
            let expect = (j as f64 - 1.0) * prev[0];
            let got = ws.moment::<f64>(0, j).unwrap();
            assert!(((got - expect) / expect.max(1.0)).abs() < 1e-14, "j = {j}");
            prev = [prev[1], expect];
        }
    }

    #[test]
    fn atom_moments_are_exact() {
        let ws = three_atoms();
        assert_eq!(ws.moment::<Rational>(0, 1).unwrap(), Rational::from_i64(10));
        assert_eq!(ws.moment::<Rational>(0, 0).unwrap(), Rational::from_i64(7));
    }

    #[test]
    fn weight_values() {
        let ws = WeightSystem::gaussian_drifts(&[1.0, -1.0], Precision::Double).unwrap();
        assert!((ws.weight_value::<f64>(0, &0.0).unwrap() - 1.0).abs() < 1e-15);
        assert!((ws.weight_value::<f64>(1, &1.0).unwrap() - 0.223_130_160_1).abs() < 1e-10);
        let atoms = three_atoms();
        assert_eq!(
            atoms.weight_value::<Rational>(0, &Rational::from_i64(2)).unwrap(),
            Rational::from_i64(4)
        );
        assert!(matches!(
            atoms.weight_value::<Rational>(0, &Rational::from_i64(3)),
            Err(Error::NotAnAtom { .. })
        ));
    }

    #[test]
    fn integrate_polynomials_and_functions() {
        let g = WeightSystem::gaussian_drifts(&[0.0], Precision::Double).unwrap();
        let p = Poly::new(vec![-1.0, 0.0, 1.0]);
        assert_eq!(g.integrate_poly(0, &p).unwrap(), 0.0);
        let atoms = three_atoms();
        assert_eq!(
            atoms.integrate_poly(0, &Poly::<Rational>::one()).unwrap(),
            Rational::from_i64(7)
        );
        let flat = WeightSystem::new(
            vec![MeasureSpec::atoms(&[(0, 1), (1, 1), (2, 1)])],
            ScalarMode::ExactRational,
        )
        .unwrap();
        let p = Poly::new(vec![Rational::from_i64(-1), Rational::from_i64(1)]);
        assert_eq!(flat.integrate_poly(0, &p).unwrap(), Rational::from_i64(0));
        let r = g.integrate_fn(0, |x| x.cos(), QuadOptions::default()).unwrap();
        // ∫ cos x e^{-x²/2} dx = √(2π) e^{-1/2}
        let truth = (2.0 * std::f64::consts::PI).sqrt() * (-0.5f64).exp();
        assert!((r.value - truth).abs() < 1e-13);
    }

    #[test]
    fn extended_precision_gaussian_weight() {
        use crate::scalar::Dd;
        let ws = WeightSystem::gaussian_drifts(&[-1.0], Precision::Extended).unwrap();
        let v = ws.weight_value::<Dd>(0, &Dd::from(1.0)).unwrap();
        let truth = (-1.5f64).exp();
        assert!(((v.to_f64() - truth) / truth).abs() < 1e-15);
    }

    #[test]
    fn jacobi_moments_against_quadrature() {
        let ws = WeightSystem::new(
            vec![MeasureSpec::JacobiInterval {
                lo: -1.0,
                hi: 2.0,
                alpha: 1.5,
                beta: 0.5,
            }],
            ScalarMode::Float(Precision::Double),
        )
        .unwrap();
        for j in 0..8 {
            let closed = ws.moment::<f64>(0, j).unwrap();
            let quad = ws.moment_by_quadrature(0, j).unwrap();
            assert!(((closed - quad) / closed.abs().max(1e-3)).abs() < 1e-9, "j = {j}");
        }
    }

    #[test]
    fn rejects_bad_systems() {
        assert!(WeightSystem::new(vec![], ScalarMode::ExactRational).is_err());
        assert!(WeightSystem::new(vec![MeasureSpec::gaussian(0.0)], ScalarMode::ExactRational).is_err());
        assert!(WeightSystem::new(vec![MeasureSpec::atoms(&[(0, 1), (0, 2)])], ScalarMode::ExactRational).is_err());
        assert!(WeightSystem::new(vec![MeasureSpec::atoms(&[(0, 1), (1, 0)])], ScalarMode::ExactRational).is_err());
        let ws = three_atoms().with_max_order(4);
        assert!(matches!(ws.moment::<Rational>(0, 5), Err(Error::OrderOverflow { .. })));
    }

    #[test]
    fn loads_json_documents() {
        let ws = WeightSystem::from_json(
            r#"{"scalar_mode": "exact", "measures": [
                {"kind": "atoms", "atoms": [[0, 1], ["1/2", "3/4"], [2, 4]]}]}"#,
        )
        .unwrap();
        assert_eq!(ws.mode(), ScalarMode::ExactRational);
        assert_eq!(
            ws.moment::<Rational>(0, 1).unwrap(),
            parse_rational("3/8").unwrap() + Rational::from_i64(8)
        );
        let g = WeightSystem::from_json(
            r#"{"scalar_mode": "float", "precision": "extended", "measures": [
                {"kind": "gaussian_drift", "a": 1, "scale": 1},
                {"kind": "jacobi", "a": -1, "b": 1, "alpha": 0.5, "beta": 0}]}"#,
        )
        .unwrap();
        assert_eq!(g.mode(), ScalarMode::Float(Precision::Extended));
        assert!(WeightSystem::from_json(
            r#"{"scalar_mode": "exact", "measures": [{"kind": "gaussian_drift", "a": 0}]}"#
        )
        .is_err());
        assert!(WeightSystem::from_json(r#"{"measures": [{"kind": "cauchy"}]}"#).is_err());
    }
}
