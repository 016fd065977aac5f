//! The `(m+1) × (m+1)` Riemann-Hilbert matrices `Y` (type II) and `X`
//! (type I), evaluated in complex binary64.
//!
//! `Y` has first row `(P_n, R_{n,1}, …, R_{n,m})` and rows
//! `c_j (P_{n-e_j}, R_{n-e_j,·})` with `c_j = -2πi / h^{(j)}_{n-e_j}`, where
//! `R_{n,j}(z) = (1/2πi) ∫ P_n(x) w_j(x) / (x - z) dx`. `X` has first row
//! `(∫ Q_n/(z-x), 2πi A_n)` and rows
//! `k_j ((1/2πi) ∫ Q_{n+e_j}/(z-x), A_{n+e_j})` with `k_j = h^{(j)}_n`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::mop::MopSystem;
use crate::multi_index::MultiIndex;
use crate::poly::Poly;
use crate::quadrature::{integrate_domain, principal_value, Domain, QuadOptions};
use crate::report::RhReport;
use crate::scalar::{Dd, Rational, Scalar};
use crate::weights::{MeasureSpec, Precision, ScalarMode, WeightSystem};

/// Off-axis tolerance.
pub const TOL_RH: f64 = 1e-8;
/// Tolerance for boundary values and jumps.
pub const TOL_BOUNDARY: f64 = 1e-6;

const TWO_PI_I: Complex64 = Complex64::new(0.0, 2.0 * PI);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Which {
    Y,
    X,
}

/// Side of the real axis for boundary values.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Plus,
    Minus,
}

#[derive(Clone, Debug, Serialize)]
pub struct RhMatrix {
    pub which: Which,
    #[serde(serialize_with = "ser_point")]
    pub at: Complex64,
    pub index: MultiIndex,
    #[serde(serialize_with = "ser_entries")]
    pub entries: Vec<Vec<Complex64>>,
}

fn ser_point<S: serde::Serializer>(z: &Complex64, s: S) -> std::result::Result<S::Ok, S::Error> {
    [z.re, z.im].serialize(s)
}

fn ser_entries<S: serde::Serializer>(e: &[Vec<Complex64>], s: S) -> std::result::Result<S::Ok, S::Error> {
    let rows: Vec<Vec<[f64; 2]>> = e.iter().map(|r| r.iter().map(|z| [z.re, z.im]).collect()).collect();
    rows.serialize(s)
}

impl RhMatrix {
    pub fn dim(&self) -> usize {
        self.entries.len()
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.entries[i][j]
    }

    pub fn transpose_mul(&self, other: &RhMatrix) -> Vec<Vec<Complex64>> {
        let d = self.dim();
        (0..d)
            .map(|i| {
                (0..d)
                    .map(|j| (0..d).map(|r| self.entries[r][i] * other.entries[r][j]).sum())
                    .collect()
            })
            .collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.iter().flatten().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

fn max_dev_from_identity(m: &[Vec<Complex64>]) -> f64 {
    let mut worst: f64 = 0.0;
    for (i, row) in m.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((v - target).norm());
        }
    }
    worst
}

/// Snapshot of the polynomials and constants at one multi-index.
pub struct RhSystem {
    ws: WeightSystem,
    n: MultiIndex,
    p_n: Poly<f64>,
    p_minus: Vec<Poly<f64>>,
    a_n: Vec<Poly<f64>>,
    a_plus: Vec<Vec<Poly<f64>>>,
    c: Vec<Complex64>,
    k: Vec<f64>,
    /// `h^{(k)}_n / h^{(k)}_{n-e_k}`
    ratios: Vec<f64>,
    /// Beyond this modulus Cauchy transforms use orthogonality first.
    far_radius: f64,
    opts: QuadOptions,
}

impl RhSystem {
    pub fn new<F: Scalar>(sys: &MopSystem<F>, n: &MultiIndex) -> Result<Self> {
        if n.len() != sys.m() {
            return Err(Error::InvalidInput(format!(
                "multi-index {n} has {} components, the weight system has {}",
                n.len(),
                sys.m()
            )));
        }
        if !n.all_positive() {
            return Err(Error::DegenerateIndex { index: n.clone() });
        }
        let m = sys.m();
        let p_n = sys.type2(n)?.poly.to_f64();
        let mut p_minus = Vec::with_capacity(m);
        let mut c = Vec::with_capacity(m);
        let mut k = Vec::with_capacity(m);
        let mut ratios = Vec::with_capacity(m);
        let mut a_plus = Vec::with_capacity(m);
        for j in 0..m {
            let below = n.minus_e(j).expect("positive");
            p_minus.push(sys.type2(&below)?.poly.to_f64());
            let h_below = sys.h_coeff(&below, j)?;
            let h_n = sys.h_coeff(n, j)?;
            c.push(-TWO_PI_I / h_below.to_f64());
            k.push(h_n.to_f64());
            ratios.push((h_n / h_below).to_f64());
            a_plus.push(sys.type1(&n.plus_e(j))?.a_polys().iter().map(Poly::to_f64).collect());
        }
        let radius = sys
            .weights()
            .sample_interval()
            .map_or(1.0, |(lo, hi)| lo.abs().max(hi.abs()).max(1.0));
        let a_n = sys.type1(n)?.a_polys().iter().map(Poly::to_f64).collect();
        Ok(RhSystem {
            ws: sys.weights().clone(),
            n: n.clone(),
            p_n,
            p_minus,
            a_n,
            a_plus,
            c,
            k,
            ratios,
            far_radius: 2.0 * radius,
            opts: QuadOptions::with_rel_tol(1e-12),
        })
    }

    /// Solve in the scalar field selected by the weight system.
    pub fn from_weights(ws: &WeightSystem, n: &MultiIndex) -> Result<Self> {
        match ws.mode() {
            ScalarMode::ExactRational => Self::new(&MopSystem::<Rational>::new(ws)?, n),
            ScalarMode::Float(Precision::Double) => Self::new(&MopSystem::<f64>::new(ws)?, n),
            ScalarMode::Float(Precision::Extended) => Self::new(&MopSystem::<Dd>::new(ws)?, n),
        }
    }

    pub fn m(&self) -> usize {
        self.ws.m()
    }

    pub fn index(&self) -> &MultiIndex {
        &self.n
    }

    pub fn weights(&self) -> &WeightSystem {
        &self.ws
    }

    fn w(&self, j: usize, x: f64) -> f64 {
        self.ws.weight_f64(j, x).unwrap_or(0.0)
    }

    /// `∫ p(x) w_j(x) / (x - z) dx` off the real axis.
    fn stieltjes(&self, p: &Poly<f64>, j: usize, z: Complex64) -> Result<Complex64> {
        if z.im == 0.0 {
            return Err(Error::OnAxisWithoutMode(z.re));
        }
        if p.is_zero() {
            return Ok(Complex64::new(0.0, 0.0));
        }
        match self.ws.measure(j) {
            MeasureSpec::DiscreteAtoms { atoms } => Ok(atoms
                .iter()
                .map(|(x, w)| {
                    let x = x.to_f64();
                    p.eval(&x) * w.to_f64() / (Complex64::new(x, 0.0) - z)
                })
                .sum()),
            m => {
                let domain = m.domain().expect("continuous");
                let mut breaks = Vec::new();
                if near_bulk(domain, z.re) {
                    breaks.push(z.re);
                }
                let f = |x: f64| Complex64::new(p.eval(&x) * self.w(j, x), 0.0) / (Complex64::new(x, 0.0) - z);
                let scale = integrate_domain(|x| f(x).norm(), domain, &breaks, QuadOptions::with_rel_tol(1e-3))?.value;
                let opts = QuadOptions {
                    abs_tol: 1e-13 * scale,
                    ..self.opts
                };
                Ok(integrate_domain(f, domain, &breaks, opts)?.value)
            }
        }
    }

    /// Far from the support, `1/(x - z) = -Σ_{l<N} x^l z^{-l-1} + (x/z)^N/(x - z)`
    /// and the first `N` terms integrate to zero by orthogonality, so
    /// `∫ p w/(x-z) = z^{-N} ∫ p x^N w/(x-z)`. Evaluating the vanishing terms
    /// would only add roundoff amplified by `|z|^N`.
    fn stieltjes_ordered(&self, p: &Poly<f64>, j: usize, z: Complex64, order: usize) -> Result<Complex64> {
        if order == 0 || z.norm() <= self.far_radius {
            return self.stieltjes(p, j, z);
        }
        let mut q = p.clone();
        for _ in 0..order {
            q = q.shift();
        }
        Ok(z.powi(-(order as i32)) * self.stieltjes(&q, j, z)?)
    }

    /// `PV ∫ p(t) w_j(t) / (t - x) dt`.
    fn stieltjes_pv(&self, p: &Poly<f64>, j: usize, x: f64) -> Result<f64> {
        if self.ws.is_discrete() {
            return Err(Error::UnsupportedMeasure(
                "boundary values need weights with a density".into(),
            ));
        }
        if p.is_zero() {
            return Ok(0.0);
        }
        let m = self.ws.measure(j);
        let domain = m.domain().expect("continuous");
        if !inside(domain, x) {
            return Err(Error::InvalidInput(format!(
                "{x} is not inside the support of weight {}",
                j + 1
            )));
        }
        let half = match domain {
            Domain::Line { width, .. } => 0.5 * width,
            Domain::Interval { lo, hi } => 0.25 * (hi - lo),
        };
        let f = |t: f64| p.eval(&t) * self.w(j, t);
        let scale = integrate_domain(|t| f(t).abs(), domain, &[x], QuadOptions::with_rel_tol(1e-3))?.value;
        let opts = QuadOptions {
            abs_tol: 1e-13 * scale.max(f(x).abs()),
            ..self.opts
        };
        Ok(principal_value(f, x, half, domain, opts)?.value)
    }

    /// `R_{n,j}(z)` for a type II polynomial `p`.
    fn cauchy_of(&self, p: &Poly<f64>, j: usize, z: Complex64, order: usize) -> Result<Complex64> {
        Ok(self.stieltjes_ordered(p, j, z, order)? / TWO_PI_I)
    }

    fn cauchy_boundary(&self, p: &Poly<f64>, j: usize, x: f64, side: Side) -> Result<Complex64> {
        let pv = self.stieltjes_pv(p, j, x)?;
        let half = 0.5 * p.eval(&x) * self.w(j, x);
        let sign = if side == Side::Plus { 1.0 } else { -1.0 };
        Ok(Complex64::new(pv, 0.0) / TWO_PI_I + sign * half)
    }

    /// `∫ Q(x) / (z - x) dx` for `Q = Σ A_k w_k`.
    fn q_transform(&self, a: &[Poly<f64>], z: Complex64, order: usize) -> Result<Complex64> {
        let mut acc = Complex64::new(0.0, 0.0);
        for (k, ak) in a.iter().enumerate() {
            acc -= self.stieltjes_ordered(ak, k, z, order)?;
        }
        Ok(acc)
    }

    fn q_transform_boundary(&self, a: &[Poly<f64>], x: f64, side: Side) -> Result<Complex64> {
        let sign = if side == Side::Plus { 1.0 } else { -1.0 };
        let mut acc = Complex64::new(0.0, 0.0);
        for (k, ak) in a.iter().enumerate() {
            let pv = self.stieltjes_pv(ak, k, x)?;
            let q = ak.eval(&x) * self.w(k, x);
            acc += Complex64::new(-pv, -sign * PI * q);
        }
        Ok(acc)
    }

    /// `R_{n,j}(z) = (1/2πi) ∫ P_n(x) w_j(x) / (x - z) dx` (zero-based `j`).
    pub fn cauchy_transform(&self, j: usize, z: Complex64) -> Result<Complex64> {
        self.cauchy_of(&self.p_n, j, z, self.n.components()[j])
    }

    pub fn assemble_y(&self, z: Complex64) -> Result<RhMatrix> {
        let m = self.m();
        let mut rows = Vec::with_capacity(m + 1);
        let mut first = vec![self.p_n.eval_complex(z)];
        for j in 0..m {
            first.push(self.cauchy_transform(j, z)?);
        }
        rows.push(first);
        for i in 0..m {
            let p = &self.p_minus[i];
            let mut row = vec![self.c[i] * p.eval_complex(z)];
            for j in 0..m {
                let order = self.n.components()[j] - usize::from(i == j);
                row.push(self.c[i] * self.cauchy_of(p, j, z, order)?);
            }
            rows.push(row);
        }
        Ok(self.matrix(Which::Y, z, rows))
    }

    pub fn assemble_x(&self, z: Complex64) -> Result<RhMatrix> {
        let m = self.m();
        let mut rows = Vec::with_capacity(m + 1);
        let total = self.n.total();
        let mut first = vec![self.q_transform(&self.a_n, z, total - 1)?];
        first.extend(self.a_n.iter().map(|a| TWO_PI_I * a.eval_complex(z)));
        rows.push(first);
        for i in 0..m {
            let k = self.k[i];
            let a = &self.a_plus[i];
            let mut row = vec![k * self.q_transform(a, z, total)? / TWO_PI_I];
            row.extend(a.iter().map(|p| k * p.eval_complex(z)));
            rows.push(row);
        }
        Ok(self.matrix(Which::X, z, rows))
    }

    /// `Y_±(x)` through the Plemelj formulas.
    pub fn y_boundary(&self, x: f64, side: Side) -> Result<RhMatrix> {
        let m = self.m();
        let z = Complex64::new(x, 0.0);
        let mut rows = Vec::with_capacity(m + 1);
        let mut first = vec![self.p_n.eval_complex(z)];
        for j in 0..m {
            first.push(self.cauchy_boundary(&self.p_n, j, x, side)?);
        }
        rows.push(first);
        for i in 0..m {
            let p = &self.p_minus[i];
            let mut row = vec![self.c[i] * p.eval_complex(z)];
            for j in 0..m {
                row.push(self.c[i] * self.cauchy_boundary(p, j, x, side)?);
            }
            rows.push(row);
        }
        Ok(self.matrix(Which::Y, z, rows))
    }

    /// `X_±(x)` through the Plemelj formulas.
    pub fn x_boundary(&self, x: f64, side: Side) -> Result<RhMatrix> {
        let m = self.m();
        let z = Complex64::new(x, 0.0);
        let mut rows = Vec::with_capacity(m + 1);
        let mut first = vec![self.q_transform_boundary(&self.a_n, x, side)?];
        first.extend(self.a_n.iter().map(|a| TWO_PI_I * a.eval_complex(z)));
        rows.push(first);
        for i in 0..m {
            let k = self.k[i];
            let a = &self.a_plus[i];
            let mut row = vec![k * self.q_transform_boundary(a, x, side)? / TWO_PI_I];
            row.extend(a.iter().map(|p| k * p.eval_complex(z)));
            rows.push(row);
        }
        Ok(self.matrix(Which::X, z, rows))
    }

    fn matrix(&self, which: Which, at: Complex64, entries: Vec<Vec<Complex64>>) -> RhMatrix {
        RhMatrix {
            which,
            at,
            index: self.n.clone(),
            entries,
        }
    }

    /// `S(x)`: identity with `w_j(x)` in position `(1, j+1)`.
    pub fn jump_s(&self, x: f64) -> Vec<Vec<Complex64>> {
        let d = self.m() + 1;
        let mut s = identity(d);
        for j in 0..self.m() {
            s[0][j + 1] = Complex64::new(self.w(j, x), 0.0);
        }
        s
    }

    /// `U(x)`: identity with `-w_j(x)` in position `(j+1, 1)`.
    pub fn jump_u(&self, x: f64) -> Vec<Vec<Complex64>> {
        let d = self.m() + 1;
        let mut u = identity(d);
        for j in 0..self.m() {
            u[j + 1][0] = Complex64::new(-self.w(j, x), 0.0);
        }
        u
    }

    fn experimental(&self, mut r: RhReport) -> RhReport {
        r.experimental = self.ws.is_discrete();
        r
    }

    /// `‖X^t(z) Y(z) - I‖_max`.
    pub fn verify_duality(&self, z: Complex64, tol: f64) -> Result<RhReport> {
        let y = self.assemble_y(z)?;
        let x = self.assemble_x(z)?;
        let dev = max_dev_from_identity(&x.transpose_mul(&y));
        Ok(self.experimental(RhReport::new("duality", [z.re, z.im], dev, tol)))
    }

    /// Jumps `Y_+ = Y_- S` and `X_+ = X_- U` at a real point, each
    /// residual relative to `max(1, ‖·_+‖_max)`.
    pub fn verify_jump(&self, x: f64, tol: f64) -> Result<Vec<RhReport>> {
        let yp = self.y_boundary(x, Side::Plus)?;
        let ym = self.y_boundary(x, Side::Minus)?;
        let xp = self.x_boundary(x, Side::Plus)?;
        let xm = self.x_boundary(x, Side::Minus)?;
        let ry = max_diff(&yp.entries, &mat_mul(&ym.entries, &self.jump_s(x))) / yp.max_abs().max(1.0);
        let rx = max_diff(&xp.entries, &mat_mul(&xm.entries, &self.jump_u(x))) / xp.max_abs().max(1.0);
        Ok(vec![
            RhReport::new("jump Y", [x, 0.0], ry, tol),
            RhReport::new("jump X", [x, 0.0], rx, tol),
        ])
    }

    /// Plemelj boundary values against off-axis values: `Y_±(x)` versus the
    /// Richardson combination `(8Y(x±iε) - 6Y(x±2iε) + Y(x±4iε))/3`, and the
    /// same for `X`.
    pub fn verify_plemelj(&self, x: f64, eps: f64, tol: f64) -> Result<Vec<RhReport>> {
        let mut out = Vec::new();
        for (which, name) in [(Which::Y, "plemelj Y"), (Which::X, "plemelj X")] {
            let mut worst: f64 = 0.0;
            let mut size: f64 = 1.0;
            for (side, sign) in [(Side::Plus, 1.0), (Side::Minus, -1.0)] {
                let at = |h: f64| {
                    let z = Complex64::new(x, sign * h);
                    match which {
                        Which::Y => self.assemble_y(z),
                        Which::X => self.assemble_x(z),
                    }
                };
                let (a, b, c) = (at(eps)?, at(2.0 * eps)?, at(4.0 * eps)?);
                let boundary = match which {
                    Which::Y => self.y_boundary(x, side)?,
                    Which::X => self.x_boundary(x, side)?,
                };
                size = size.max(boundary.max_abs());
                for i in 0..boundary.dim() {
                    for j in 0..boundary.dim() {
                        let extrap = (8.0 * a.get(i, j) - 6.0 * b.get(i, j) + c.get(i, j)) / 3.0;
                        worst = worst.max((extrap - boundary.get(i, j)).norm());
                    }
                }
            }
            out.push(RhReport::new(name, [x, 0.0], worst / size, tol));
        }
        Ok(out)
    }

    /// `(x - y) K_n(x, y) = (1/2πi) [0, w_1(y), …, w_m(y)] X^t_+(y) Y_+(x) e_1`,
    /// divided by `x - y`. Returns the complex value; its imaginary part
    /// measures the error.
    pub fn kernel_rh(&self, x: f64, y: f64) -> Result<Complex64> {
        if (x - y).abs() < crate::kernel::DIAGONAL_GAP * (1.0 + x.abs() + y.abs()) {
            return Err(Error::DiagonalPoint { x, y });
        }
        Ok(self.kernel_rh_numerator(x, y)? / (x - y))
    }

    pub fn kernel_rh_numerator(&self, x: f64, y: f64) -> Result<Complex64> {
        let xt = self.x_boundary(y, Side::Plus)?;
        let yx = self.y_boundary(x, Side::Plus)?;
        let prod = xt.transpose_mul(&yx);
        let mut acc = Complex64::new(0.0, 0.0);
        for j in 0..self.m() {
            acc += self.w(j, y) * prod[j + 1][0];
        }
        Ok(acc / TWO_PI_I)
    }

    /// `[X^t(y) Y(x)]_{j+1,1}` from the assembled matrices against
    /// `2πi (P_n(x) A^{(j)}_n(y) - Σ_k r_k P_{n-e_k}(x) A^{(j)}_{n+e_k}(y))`.
    pub fn verify_entry_identity(&self, x: f64, y: f64, tol: f64) -> Result<RhReport> {
        let xt = self.x_boundary(y, Side::Plus)?;
        let yx = self.y_boundary(x, Side::Plus)?;
        let prod = xt.transpose_mul(&yx);
        let mut worst: f64 = 0.0;
        let mut size: f64 = 1.0;
        for j in 0..self.m() {
            let mut v = self.p_n.eval(&x) * self.a_n[j].eval(&y);
            for k in 0..self.m() {
                v -= self.ratios[k] * self.p_minus[k].eval(&x) * self.a_plus[k][j].eval(&y);
            }
            let v = TWO_PI_I * v;
            size = size.max(v.norm());
            worst = worst.max((prod[j + 1][0] - v).norm());
        }
        Ok(RhReport::new("entry identity", [x, y], worst / size, tol))
    }

    /// `‖Y(z) diag(z^{-n}, z^{n_1}, …) - I‖_max` and the same for `X` with
    /// reciprocal powers.
    pub fn asymptotic_error(&self, which: Which, z: Complex64) -> Result<f64> {
        let total = self.n.total() as i32;
        let (mat, first, rest): (RhMatrix, i32, Vec<i32>) = match which {
            Which::Y => (
                self.assemble_y(z)?,
                -total,
                self.n.components().iter().map(|&c| c as i32).collect(),
            ),
            Which::X => (
                self.assemble_x(z)?,
                total,
                self.n.components().iter().map(|&c| -(c as i32)).collect(),
            ),
        };
        let mut powers = vec![first];
        powers.extend(rest);
        let scaled: Vec<Vec<Complex64>> = mat
            .entries
            .iter()
            .map(|row| row.iter().zip(&powers).map(|(v, &p)| v * z.powi(p)).collect())
            .collect();
        Ok(max_dev_from_identity(&scaled))
    }

    /// Error at `|z| = r` and `10 r` along direction `dir`; passes when it
    /// shrinks by at least `min_ratio`.
    pub fn verify_asymptotics(&self, which: Which, dir: Complex64, r: f64, min_ratio: f64) -> Result<AsymptoticReport> {
        let dir = dir / dir.norm();
        let small = self.asymptotic_error(which, dir * r)?;
        let large = self.asymptotic_error(which, dir * (10.0 * r))?;
        let ratio = small / large;
        Ok(AsymptoticReport {
            which,
            direction: [dir.re, dir.im],
            radius: r,
            error_small: small,
            error_large: large,
            ratio,
            pass: ratio >= min_ratio,
        })
    }

    /// `Y(z̄) = J conj(Y(z)) J` with `J = diag(1, -1, …, -1)`: the
    /// polynomial entries are real on the axis while the factor `1/2πi`
    /// flips the sign of the conjugated Cauchy transforms.
    pub fn verify_schwarz(&self, z: Complex64, tol: f64) -> Result<RhReport> {
        let a = self.assemble_y(z)?;
        let b = self.assemble_y(z.conj())?;
        let mut worst: f64 = 0.0;
        for i in 0..a.dim() {
            for j in 0..a.dim() {
                let sign = if (i == 0) == (j == 0) { 1.0 } else { -1.0 };
                worst = worst.max((b.get(i, j) - sign * a.get(i, j).conj()).norm());
            }
        }
        Ok(RhReport::new(
            "schwarz symmetry",
            [z.re, z.im],
            worst / a.max_abs().max(1.0),
            tol,
        ))
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct AsymptoticReport {
    pub which: Which,
    pub direction: [f64; 2],
    pub radius: f64,
    pub error_small: f64,
    pub error_large: f64,
    pub ratio: f64,
    pub pass: bool,
}

fn inside(domain: Domain, x: f64) -> bool {
    match domain {
        Domain::Line { .. } => true,
        Domain::Interval { lo, hi } => x > lo && x < hi,
    }
}

/// Whether a pole at `x` sits close enough to the mass to need a breakpoint.
fn near_bulk(domain: Domain, x: f64) -> bool {
    match domain {
        Domain::Line { center, width } => (x - center).abs() <= 8.0 * width,
        Domain::Interval { lo, hi } => x > lo && x < hi,
    }
}

fn identity(d: usize) -> Vec<Vec<Complex64>> {
    (0..d)
        .map(|i| {
            (0..d)
                .map(|j| Complex64::new(if i == j { 1.0 } else { 0.0 }, 0.0))
                .collect()
        })
        .collect()
}

fn mat_mul(a: &[Vec<Complex64>], b: &[Vec<Complex64>]) -> Vec<Vec<Complex64>> {
    let d = a.len();
    (0..d)
        .map(|i| (0..d).map(|j| (0..d).map(|r| a[i][r] * b[r][j]).sum()).collect())
        .collect()
}

fn max_diff(a: &[Vec<Complex64>], b: &[Vec<Complex64>]) -> f64 {
    a.iter()
        .flatten()
        .zip(b.iter().flatten())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

/// `Σ_i P(x_i) w_j(x_i) / (x_i - z)` in exact arithmetic for a discrete
/// weight and a point `z = re + i·im` with rational parts; the Cauchy
/// transform is this sum divided by `2πi`. Returns `(real, imaginary)`.
pub fn discrete_cauchy_sum(
    ws: &WeightSystem,
    p: &Poly<Rational>,
    j: usize,
    re: &Rational,
    im: &Rational,
) -> Result<(Rational, Rational)> {
    let MeasureSpec::DiscreteAtoms { atoms } = ws.measure(j) else {
        return Err(Error::UnsupportedMeasure("exact Cauchy sums need atoms".into()));
    };
    if Scalar::is_zero(im) {
        return Err(Error::OnAxisWithoutMode(Scalar::to_f64(re)));
    }
    let mut sr = <Rational as Scalar>::zero();
    let mut si = <Rational as Scalar>::zero();
    for (x, w) in atoms {
        // 1/(x - z) = ((x - re) + i·im) / ((x - re)² + im²)
        let d = x - re;
        let den = d.clone() * d.clone() + im * im;
        let f = p.eval(x) * w / den;
        sr += f.clone() * d;
        si += f * im;
    }
    Ok((sr, si))
}
