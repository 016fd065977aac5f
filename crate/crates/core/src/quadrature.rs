//! Adaptive Gauss–Kronrod (7/15) quadrature on intervals and on the real
//! line, plus principal-value integrals for Plemelj boundary values.

use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_225,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];

const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Values that can be integrated: real or complex.
pub trait QuadValue: Copy + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self> {
    fn zero() -> Self;
    fn norm(&self) -> f64;
}

impl QuadValue for f64 {
    fn zero() -> Self {
        0.0
    }
    fn norm(&self) -> f64 {
        self.abs()
    }
}

impl QuadValue for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn norm(&self) -> f64 {
        Complex64::norm(*self)
    }
}

#[derive(Clone, Copy, Debug)]
pub struct QuadOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_subdivisions: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        QuadOptions {
            abs_tol: 0.0,
            rel_tol: 1e-13,
            max_subdivisions: 4000,
        }
    }
}

impl QuadOptions {
    pub fn with_rel_tol(rel_tol: f64) -> Self {
        QuadOptions {
            rel_tol,
            ..Default::default()
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct QuadResult<T> {
    pub value: T,
    /// Estimated absolute error.
    pub error: f64,
    pub evaluations: usize,
}

/// Integration domain: a finite interval, or the whole line with the mass
/// concentrated around `center` on a length scale `width`.
#[derive(Clone, Copy, Debug)]
pub enum Domain {
    Interval { lo: f64, hi: f64 },
    Line { center: f64, width: f64 },
}

#[derive(Clone, Copy, Debug)]
struct Segment<T> {
    a: f64,
    b: f64,
    value: T,
    error: f64,
}

fn kronrod<T: QuadValue>(f: &mut impl FnMut(f64) -> T, a: f64, b: f64) -> Segment<T> {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut res_k = fc * WGK[7];
    let mut res_g = fc * WG[3];
    let mut res_abs = fc.norm() * WGK[7];
    let mut fv1 = [T::zero(); 7];
    let mut fv2 = [T::zero(); 7];
    for j in 0..7 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fv1[j] = f1;
        fv2[j] = f2;
        res_k = res_k + (f1 + f2) * WGK[j];
        res_abs += WGK[j] * (f1.norm() + f2.norm());
        if j % 2 == 1 {
            res_g = res_g + (f1 + f2) * WG[j / 2];
        }
    }
    let mean = res_k * 0.5;
    let mut res_asc = WGK[7] * (fc - mean).norm();
    for j in 0..7 {
        res_asc += WGK[j] * ((fv1[j] - mean).norm() + (fv2[j] - mean).norm());
    }
    let value = res_k * half;
    let res_abs = res_abs * half.abs();
    let res_asc = res_asc * half.abs();
    let mut error = ((res_k - res_g) * half).norm();
    if res_asc != 0.0 && error != 0.0 {
        error = res_asc * (200.0 * error / res_asc).powf(1.5).min(1.0);
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        error = error.max(50.0 * f64::EPSILON * res_abs);
    }
    Segment { a, b, value, error }
}

/// Globally adaptive integration over the union of consecutive pieces
/// `[breaks[i], breaks[i+1]]`.
pub fn integrate_pieces<T: QuadValue>(
    mut f: impl FnMut(f64) -> T,
    breaks: &[f64],
    opts: QuadOptions,
) -> Result<QuadResult<T>> {
    let mut segs: Vec<Segment<T>> = breaks
        .windows(2)
        .filter(|w| w[1] > w[0])
        .map(|w| kronrod(&mut f, w[0], w[1]))
        .collect();
    let mut evaluations = 15 * segs.len();
    loop {
        let total = segs.iter().fold(T::zero(), |acc, s| acc + s.value);
        let err: f64 = segs.iter().map(|s| s.error).sum();
        let tol = opts.abs_tol.max(opts.rel_tol * total.norm());
        if err <= tol || segs.is_empty() {
            return Ok(QuadResult {
                value: total,
                error: err,
                evaluations,
            });
        }
        let (worst, _) = segs
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.error.total_cmp(&b.1.error))
            .expect("non-empty");
        let s = segs[worst];
        let mid = 0.5 * (s.a + s.b);
        let at_resolution = mid <= s.a || mid >= s.b || (s.b - s.a) < 1e-15 * s.a.abs().max(s.b.abs());
        if segs.len() >= opts.max_subdivisions || at_resolution {
            // roundoff-limited: accept if the remaining error is negligible
            if err <= tol.max(1e3 * f64::EPSILON * total.norm()) {
                return Ok(QuadResult {
                    value: total,
                    error: err,
                    evaluations,
                });
            }
            return Err(Error::QuadratureFailure {
                estimate: total.norm(),
                error: err,
            });
        }
        segs[worst] = kronrod(&mut f, s.a, mid);
        segs.push(kronrod(&mut f, mid, s.b));
        evaluations += 30;
    }
}

pub fn integrate<T: QuadValue>(f: impl FnMut(f64) -> T, a: f64, b: f64, opts: QuadOptions) -> Result<QuadResult<T>> {
    integrate_pieces(f, &[a, b], opts)
}

/// Integrate over a [`Domain`], splitting at the given interior breakpoints.
///
/// On the line the core window `center ± 8·width` (widened to include the
/// breakpoints) is integrated adaptively; panels of width `4·width` are then
/// appended on both sides until a panel contributes less than `1e-17` of the
/// running total.
pub fn integrate_domain<T: QuadValue>(
    mut f: impl FnMut(f64) -> T,
    domain: Domain,
    breaks: &[f64],
    opts: QuadOptions,
) -> Result<QuadResult<T>> {
    match domain {
        Domain::Interval { lo, hi } => {
            let mut pts = vec![lo, hi];
            pts.extend(breaks.iter().copied().filter(|&b| b > lo && b < hi));
            pts.sort_by(f64::total_cmp);
            pts.dedup();
            integrate_pieces(f, &pts, opts)
        }
        Domain::Line { center, width } => {
            let mut lo = center - 8.0 * width;
            let mut hi = center + 8.0 * width;
            for &b in breaks {
                lo = lo.min(b - width);
                hi = hi.max(b + width);
            }
            let mut pts = vec![lo, hi];
            pts.extend(breaks.iter().copied());
            pts.sort_by(f64::total_cmp);
            pts.dedup();
            let core = integrate_pieces(&mut f, &pts, opts)?;
            let mut value = core.value;
            let mut error = core.error;
            let mut evaluations = core.evaluations;
            let panel = 4.0 * width;
            for dir in [-1.0, 1.0] {
                let mut edge = if dir < 0.0 { lo } else { hi };
                for _ in 0..256 {
                    let next = edge + dir * panel;
                    let (a, b) = if dir < 0.0 { (next, edge) } else { (edge, next) };
                    let part = integrate(&mut f, a, b, opts)?;
                    value = value + part.value;
                    error += part.error;
                    evaluations += part.evaluations;
                    edge = next;
                    if part.value.norm() + part.error <= 1e-17 * value.norm() + 1e-3 * opts.abs_tol
                        || part.value.norm() + part.error == 0.0
                    {
                        break;
                    }
                }
            }
            Ok(QuadResult {
                value,
                error,
                evaluations,
            })
        }
    }
}

/// Principal value `PV ∫ f(t)/(t - x0) dt` over the domain.
///
/// Inside the symmetric window `|t - x0| < half_window` the integrand is
/// replaced by the regular difference quotient `(f(t) - f(x0))/(t - x0)`;
/// the subtracted term integrates to zero over the symmetric window.
pub fn principal_value<T: QuadValue>(
    mut f: impl FnMut(f64) -> T,
    x0: f64,
    half_window: f64,
    domain: Domain,
    opts: QuadOptions,
) -> Result<QuadResult<T>> {
    let f0 = f(x0);
    let d = match domain {
        Domain::Interval { lo, hi } => half_window.min(x0 - lo).min(hi - x0),
        Domain::Line { .. } => half_window,
    };
    assert!(d > 0.0, "principal value point must be interior");
    let g = |t: f64| {
        let dt = t - x0;
        if dt.abs() < d {
            (f(t) - f0) * (1.0 / dt)
        } else {
            f(t) * (1.0 / dt)
        }
    };
    integrate_domain(g, domain, &[x0 - d, x0, x0 + d], opts)
}
