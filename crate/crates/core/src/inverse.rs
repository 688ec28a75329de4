//! Inverse nonlinear Fourier transform.
//!
//! `b` is completed to the outer `a = exp(M - iHM)`, `M = log sqrt(1 - |b|^2)`.
//! The pair is split as `(a, b) = (a_-, b_-)(a_+, b_+)` by iterating
//!
//! ```text
//! (A, B) <- ((1 - P_D(r B*))*, P_D(r A)),   r = b / a,
//! ```
//!
//! from `(1, 0)`. The map contracts with rate at most `sup |r| <= 1 - eta eps`.
//! Normalising by `A(inf)^(1/2)` gives the plus factor, from which the
//! coefficients `F_0, F_1, ...` are peeled one at a time.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::nlfs::{CoeffSequence, SU2Pair};
use crate::spectral::CircleFunction;
use crate::{ETA, INV_SQRT_2};

/// Default stopping tolerance for the fixed-point iteration.
pub const DEFAULT_FP_TOL: f64 = 1e-12;

/// Residual ratios are only measured while the previous residual is above
/// this floor; below it the ratio is roundoff.
pub const RATIO_FLOOR: f64 = 1e-11;

/// Slack for the margin checks in [`BEpsilonPair::new`].
const MARGIN_SLACK: f64 = 1e-12;

/// Maximal `|mean log|a| - log a(inf)|` accepted as outer.
pub const OUTER_TOL: f64 = 1e-9;

/// `|a(inf)|` below this makes a strip step ill-defined.
pub const DEGENERATE_A: f64 = 1e-8;

const RENORMALISE_EVERY: usize = 64;
const OUTER_CHECK_EVERY: usize = 16;

/// `|mean log|a| - log a(inf)|`; zero for outer `a` with `a(inf) > 0`.
pub fn outerness_defect(a: &CircleFunction) -> f64 {
    let n = a.samples().len() as f64;
    let mean_log = a.samples().iter().map(|c| c.norm().ln()).sum::<f64>() / n;
    let inf = a.mean_value();
    if inf.re <= 0.0 {
        return f64::INFINITY;
    }
    (mean_log - inf.norm().ln()).abs().max(inf.im.abs())
}

/// Largest pair margin: `inf |a| >= 2^(-1/2) + eps` with `eps < 1 - 2^(-1/2)`.
pub fn pair_margin_limit() -> f64 {
    1.0 - INV_SQRT_2
}

fn check_pair_epsilon(epsilon: f64) -> Result<()> {
    if !(epsilon > 0.0 && epsilon < pair_margin_limit()) {
        return Err(Error::InvalidEpsilon(epsilon));
    }
    Ok(())
}

/// A pair with `inf |a| >= 2^(-1/2) + eps`, `sup |b/a| <= 1 - eta eps` and
/// outer `a`.
///
/// The infimum is taken over the grid. Since `log |a|` is harmonic in the
/// exterior disk its infimum there sits on the boundary, so the grid check
/// is the right proxy.
#[derive(Clone, Debug)]
pub struct BEpsilonPair {
    pair: SU2Pair,
    epsilon: f64,
}

impl BEpsilonPair {
    pub fn new(pair: SU2Pair, epsilon: f64) -> Result<Self> {
        check_pair_epsilon(epsilon)?;
        let inf_a = pair.a.inf_abs();
        if inf_a < INV_SQRT_2 + epsilon - MARGIN_SLACK {
            return Err(Error::NotInBEpsilon(format!(
                "inf |a| = {inf_a} is below 2^(-1/2) + {epsilon}"
            )));
        }
        let ratio = sup_ratio(&pair);
        if ratio > 1.0 - ETA * epsilon + MARGIN_SLACK {
            return Err(Error::NotInBEpsilon(format!(
                "sup |b/a| = {ratio} exceeds 1 - eta * {epsilon}"
            )));
        }
        let defect = outerness_defect(&pair.a);
        if defect > OUTER_TOL {
            return Err(Error::NotInBEpsilon(format!("a is not outer (defect {defect:e})")));
        }
        Ok(Self { pair, epsilon })
    }

    /// Uses the margin `inf |a| - 2^(-1/2)` measured on the grid.
    pub fn with_measured_margin(pair: SU2Pair) -> Result<Self> {
        let epsilon = pair.a.inf_abs() - INV_SQRT_2;
        Self::new(pair, epsilon.min(pair_margin_limit() - 1e-15))
    }

    pub fn pair(&self) -> &SU2Pair {
        &self.pair
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// `1 - eta eps`, the proven contraction rate.
    pub fn rate_bound(&self) -> f64 {
        1.0 - ETA * self.epsilon
    }

    pub fn into_pair(self) -> SU2Pair {
        self.pair
    }
}

fn sup_ratio(pair: &SU2Pair) -> f64 {
    pair.a
        .samples()
        .iter()
        .zip(pair.b.samples())
        .map(|(a, b)| b.norm() / a.norm())
        .fold(0.0, f64::max)
}

/// `a = exp(M - iHM)` with `M = log sqrt(1 - |b|^2)`.
pub fn complete_outer(b: &CircleFunction, epsilon: f64) -> Result<BEpsilonPair> {
    check_pair_epsilon(epsilon)?;
    let limit = 1.0 - (INV_SQRT_2 + epsilon).powi(2);
    let sup_sq = b.sup_norm().powi(2);
    if sup_sq > limit + MARGIN_SLACK {
        return Err(Error::SignalTooLarge { sup_sq, limit });
    }
    let m = b.map(|c| Complex64::new(0.5 * (-c.norm_sqr()).ln_1p(), 0.0));
    let hm = m.hilbert_transform()?;
    let exponent = m.sub(&hm.scale(Complex64::new(0.0, 1.0)))?;
    let a = exponent.map(|c| c.exp());
    BEpsilonPair::new(SU2Pair::new(a, b.clone())?, epsilon)
}

/// `ceil(log tol / log(1 - eta eps)) + 16`.
pub fn default_max_iter(epsilon: f64, tol: f64) -> usize {
    let rate = (1.0 - ETA * epsilon).max(f64::MIN_POSITIVE);
    (tol.ln() / rate.ln()).ceil().max(0.0) as usize + 16
}

/// Measurements taken while solving the fixed point.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct FixedPointDiagnostics {
    pub iterations: usize,
    pub final_residual: f64,
    /// Successive residual ratios, recorded while the residual exceeds
    /// [`RATIO_FLOOR`].
    pub ratios: Vec<f64>,
    /// `sup |minus * plus - (a, b)|` on the grid.
    pub reconstruction_error: f64,
    /// Largest coefficient of either factor outside its Hardy support.
    pub support_leakage: f64,
}

impl FixedPointDiagnostics {
    pub fn max_ratio(&self) -> f64 {
        self.ratios.iter().copied().fold(0.0, f64::max)
    }
}

/// `(a, b) = minus * plus` with `a_+(inf) > 0`.
#[derive(Clone, Debug)]
pub struct RHFactors {
    pub minus: SU2Pair,
    pub plus: SU2Pair,
    pub a_plus_infinity: f64,
    pub diagnostics: FixedPointDiagnostics,
}

/// Solves the fixed point and splits the pair.
pub fn rh_factorize(p: &BEpsilonPair, tol_fp: f64, max_iter: usize) -> Result<RHFactors> {
    if !(tol_fp > 0.0) {
        return Err(Error::InvalidArgument(format!("tol_fp = {tol_fp} must be positive")));
    }
    let pair = p.pair();
    let grid = pair.grid();
    let r = pair.b.div(&pair.a)?;
    let one = CircleFunction::one(grid);
    let mut big_a = one.clone();
    let mut big_b = CircleFunction::zero(grid);
    let mut diag = FixedPointDiagnostics::default();
    let mut previous = f64::INFINITY;
    let mut converged = false;
    for iteration in 1..=max_iter {
        let next_a = one.sub(&r.mul(&big_b.star())?.project_disk())?.star();
        let next_b = r.mul(&big_a)?.project_disk();
        let da = next_a.l2_distance(&big_a)?;
        let db = next_b.l2_distance(&big_b)?;
        let residual = (da * da + db * db).sqrt();
        if previous.is_finite() && previous > RATIO_FLOOR {
            let ratio = residual / previous;
            diag.ratios.push(ratio);
            if ratio > 1.0 {
                return Err(Error::ContractionBroken { iteration, ratio });
            }
        }
        big_a = next_a;
        big_b = next_b;
        previous = residual;
        diag.iterations = iteration;
        diag.final_residual = residual;
        if residual <= tol_fp {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::NoConvergence {
            iterations: diag.iterations,
            residual: diag.final_residual,
        });
    }

    let a_inf = big_a.mean_value();
    if !(a_inf.re > 0.0) {
        return Err(Error::NonPositiveAInfinity(a_inf.re));
    }
    let scale = Complex64::new(1.0 / a_inf.re.sqrt(), 0.0);
    let plus = SU2Pair::new(big_a.scale(scale), big_b.scale(scale))?;
    let plus_inverse = plus.inverse();
    let minus = pair.product(&plus_inverse)?;

    diag.reconstruction_error = minus.product(&plus)?.sup_distance(pair)?;
    let plus_a = plus.a.to_coeffs().max_outside(|n| n <= 0);
    let plus_b = plus.b.to_coeffs().max_outside(|n| n >= 0);
    let minus_a = minus.a.to_coeffs().max_outside(|n| n <= 0);
    let minus_b = minus.b.to_coeffs().max_outside(|n| n <= -1);
    diag.support_leakage = plus_a.max(plus_b).max(minus_a).max(minus_b);

    Ok(RHFactors {
        minus,
        plus,
        a_plus_infinity: a_inf.re.sqrt(),
        diagnostics: diag,
    })
}

/// Largest measured ratio of successive fixed-point residuals, using the
/// default tolerance and iteration cap.
pub fn contraction_rate(p: &BEpsilonPair) -> Result<f64> {
    let max_iter = default_max_iter(p.epsilon(), DEFAULT_FP_TOL);
    Ok(rh_factorize(p, DEFAULT_FP_TOL, max_iter)?.diagnostics.max_ratio())
}

/// One strip in place. Returns `(F, c0)` where `c0` is the coefficient of
/// `b - y a*` at index 0 that the exact algebra would make vanish.
fn strip_in_place(
    a: &mut [Complex64],
    b: &mut [Complex64],
    nodes: &[Complex64],
) -> Result<(Complex64, f64)> {
    let n = a.len() as f64;
    let a_inf = a.iter().sum::<Complex64>() / n;
    if a_inf.norm() < DEGENERATE_A {
        return Err(Error::DegenerateA(a_inf.norm()));
    }
    let b_zero = b.iter().sum::<Complex64>() / n;
    let y = b_zero / a_inf.conj();
    let s = 1.0 / (1.0 + y.norm_sqr()).sqrt();
    let mut mean_new = Complex64::new(0.0, 0.0);
    for j in 0..a.len() {
        let (aj, bj) = (a[j], b[j]);
        a[j] = (aj + y * bj.conj()) * s;
        b[j] = bj - y * aj.conj();
        mean_new += b[j];
    }
    let c0 = mean_new / n;
    for (bj, z) in b.iter_mut().zip(nodes) {
        *bj = (*bj - c0) * s * z.conj();
    }
    Ok((y, c0.norm()))
}

/// `(F_0, next)` with `(c, d z) = (1 + |F_0|^2)^(-1/2) (1, -F_0)(a, b)`.
pub fn layer_strip_step(plus: &SU2Pair) -> Result<(Complex64, SU2Pair)> {
    let grid = plus.grid().clone();
    let mut a = plus.a.samples().to_vec();
    let mut b = plus.b.samples().to_vec();
    let (f0, _) = strip_in_place(&mut a, &mut b, grid.nodes())?;
    let next = SU2Pair::new(
        CircleFunction::from_samples(&grid, a)?,
        CircleFunction::from_samples(&grid, b)?,
    )?;
    Ok((f0, next))
}

/// Result of stripping with monitoring.
#[derive(Clone, Debug)]
pub struct StripOutcome {
    pub coeffs: CoeffSequence,
    /// Whether the tail fell below the requested tolerance.
    pub reached: bool,
    /// `-2 log a_n(inf)` for the pair left after the last step.
    pub tail: f64,
    /// Largest `|c0|` dropped before a downshift.
    pub max_drift: f64,
    /// Largest `| |a|^2 + |b|^2 - 1 |` seen before renormalisation.
    pub max_unitarity_defect: f64,
    /// Largest outerness defect seen at the periodic checks.
    pub max_outer_defect: f64,
}

fn unitarity_defect(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x.norm_sqr() + y.norm_sqr() - 1.0).abs())
        .fold(0.0, f64::max)
}

fn tail_of(a: &[Complex64]) -> f64 {
    let a_inf = a.iter().sum::<Complex64>() / a.len() as f64;
    -2.0 * a_inf.re.ln()
}

/// Strips up to `max_coeffs` coefficients, stopping early once the tail
/// `-2 log a_n(inf)` is at most `tail_tol`.
pub fn strip_with_diagnostics(plus: &SU2Pair, max_coeffs: usize, tail_tol: f64) -> Result<StripOutcome> {
    let grid = plus.grid().clone();
    let nodes = grid.nodes();
    let mut a = plus.a.samples().to_vec();
    let mut b = plus.b.samples().to_vec();
    let a_start = plus.a_infinity();
    if !(a_start.re > 0.0) {
        return Err(Error::NonPositiveAInfinity(a_start.re));
    }
    let mut coeffs = Vec::new();
    let mut out = StripOutcome {
        coeffs: CoeffSequence::zero(),
        reached: false,
        tail: tail_of(&a),
        max_drift: 0.0,
        max_unitarity_defect: 0.0,
        max_outer_defect: 0.0,
    };
    while coeffs.len() < max_coeffs && out.tail > tail_tol {
        let (f, drift) = strip_in_place(&mut a, &mut b, nodes)?;
        coeffs.push(f);
        out.max_drift = out.max_drift.max(drift);
        let step = coeffs.len();
        if step % RENORMALISE_EVERY == 0 {
            out.max_unitarity_defect = out.max_unitarity_defect.max(unitarity_defect(&a, &b));
            for (x, y) in a.iter_mut().zip(b.iter_mut()) {
                let s = 1.0 / (x.norm_sqr() + y.norm_sqr()).sqrt();
                *x *= s;
                *y *= s;
            }
        }
        if step % OUTER_CHECK_EVERY == 0 {
            let current = CircleFunction::from_samples(&grid, a.clone())?;
            out.max_outer_defect = out.max_outer_defect.max(outerness_defect(&current));
        }
        out.tail = tail_of(&a);
    }
    out.max_unitarity_defect = out.max_unitarity_defect.max(unitarity_defect(&a, &b));
    out.reached = out.tail <= tail_tol;
    out.coeffs = CoeffSequence::new(0, coeffs);

    // Stripping can only lose mass: a(inf) <= prod (1 + |F_n|^2)^(-1/2).
    let product = out.coeffs.normaliser();
    if product < a_start.re - 1e-8 {
        return Err(Error::InvalidArgument(format!(
            "stripped coefficients overshoot a(inf): product {product} < {}",
            a_start.re
        )));
    }
    Ok(out)
}

/// Layer-stripping sequence `F_0, ..., F_k` with `k <= d_max`, stopping once
/// the Plancherel tail is at most `tail_tol`.
pub fn layer_strip_all(plus: &SU2Pair, d_max: usize, tail_tol: f64) -> Result<CoeffSequence> {
    let outcome = strip_with_diagnostics(plus, d_max + 1, tail_tol)?;
    if !outcome.reached {
        return Err(Error::TailNotDecaying {
            steps: outcome.coeffs.len(),
            tail: outcome.tail,
            tol: tail_tol,
        });
    }
    Ok(outcome.coeffs)
}

/// `(8 + 2^(5/2)) (eta eps)^(-3/2)`.
pub fn layer_lipschitz_constant(epsilon: f64) -> f64 {
    (8.0 + 2f64.powf(2.5)) * (ETA * epsilon).powf(-1.5)
}

/// Empirical check of the Lipschitz bound for the map `(a, b) -> F_0`.
#[derive(Clone, Debug, PartialEq)]
pub struct LayerLipschitzProbe {
    pub f0_distance: f64,
    pub pair_distance: f64,
    pub constant: f64,
    pub holds: bool,
}

/// Compares `F_0` of two pairs, using the smaller of their margins.
pub fn layer_lipschitz_probe(p: &BEpsilonPair, q: &BEpsilonPair) -> Result<LayerLipschitzProbe> {
    let epsilon = p.epsilon().min(q.epsilon());
    let f0 = |x: &BEpsilonPair| -> Result<Complex64> {
        let factors = rh_factorize(x, DEFAULT_FP_TOL, default_max_iter(x.epsilon(), DEFAULT_FP_TOL))?;
        Ok(layer_strip_step(&factors.plus)?.0)
    };
    let f0_distance = (f0(p)? - f0(q)?).norm();
    let pair_distance = p.pair().h_distance(q.pair())?;
    let constant = layer_lipschitz_constant(epsilon);
    Ok(LayerLipschitzProbe {
        f0_distance,
        pair_distance,
        constant,
        holds: f0_distance <= constant * pair_distance + 1e-12,
    })
}
