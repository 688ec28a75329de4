//! Signal to phases, end to end.
//!
//! A target `f` on `[0, 1]` is extended evenly and sampled at
//! `x_j = cos(pi j / N)`, so that `b(z_j) = i f(x_j)` lives on the same grid as
//! the circle functions. The phases come from completing `b` to an outer pair,
//! splitting off the plus factor and stripping it; `F_{-n} = F_n` supplies the
//! other half.

use std::collections::BTreeMap;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::inverse::{
    complete_outer, default_max_iter, outerness_defect, pair_margin_limit, rh_factorize,
    strip_with_diagnostics, DEFAULT_FP_TOL,
};
use crate::nlfs::{nlfs_finite, CoeffSequence, SU2Pair};
use crate::qsp::{response_sweep, PhaseSequence};
use crate::spectral::{CircleFunction, CircleGrid};
use crate::INV_SQRT_2;

/// Smallest accepted signal margin.
pub const MIN_EPSILON: f64 = 1e-6;

/// Tolerance on `Re F_n` for the recovered sequence.
pub const IMAGINARY_TOL: f64 = 1e-9;

/// `7.3`, the constant in `||Psi - Psi'||_inf <= 7.3 eps^(-3/2) ||f - f'||`.
pub const PHASE_LIPSCHITZ: f64 = 7.3;

/// Real samples of an even signal at `x_j = cos(pi j / N)`, `j = 0..N`.
#[derive(Clone, Debug, PartialEq)]
pub struct SignalSamples {
    grid: CircleGrid,
    values: Vec<f64>,
    epsilon: f64,
}

impl SignalSamples {
    /// Samples `f(|x_j|)` of a function on `[0, 1]`.
    pub fn from_fn(grid: &CircleGrid, f: impl Fn(f64) -> f64, epsilon: Option<f64>) -> Result<Self> {
        let values = (0..grid.size()).map(|j| f(grid.abscissa(j).abs())).collect();
        Self::build(grid, values, epsilon)
    }

    /// Values at all `N` abscissae. They are symmetrised as
    /// `f_j <- (f_j + f_{N-j}) / 2`, which enforces evenness in `x`.
    pub fn from_samples(grid: &CircleGrid, values: &[f64], epsilon: Option<f64>) -> Result<Self> {
        let n = grid.size();
        if values.len() != n {
            return Err(Error::InvalidArgument(format!(
                "expected {n} samples, got {}",
                values.len()
            )));
        }
        if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(format!("non-finite sample {bad}")));
        }
        let symmetric = (0..n).map(|j| 0.5 * (values[j] + values[(n - j) % n])).collect();
        Self::build(grid, symmetric, epsilon)
    }

    /// `f(x) = sum_k c_k T_k(x)`, evaluated at `|x_j|` by Clenshaw's recurrence.
    pub fn from_chebyshev(grid: &CircleGrid, coeffs: &[f64], epsilon: Option<f64>) -> Result<Self> {
        if let Some(bad) = coeffs.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(format!("non-finite coefficient {bad}")));
        }
        Self::from_fn(grid, |x| chebyshev_eval(coeffs, x), epsilon)
    }

    fn build(grid: &CircleGrid, values: Vec<f64>, epsilon: Option<f64>) -> Result<Self> {
        let sup = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let epsilon = match epsilon {
            Some(e) if !(e > MIN_EPSILON && e <= INV_SQRT_2) => return Err(Error::InvalidEpsilon(e)),
            Some(e) => e,
            None => INV_SQRT_2 - sup,
        };
        let ceiling = INV_SQRT_2 - epsilon.max(MIN_EPSILON);
        // A few ulps of slack so that the default margin accepts its own signal.
        if sup > ceiling + 4.0 * f64::EPSILON || epsilon <= MIN_EPSILON {
            return Err(Error::SignalTooLarge {
                sup_sq: sup * sup,
                limit: ceiling.max(0.0).powi(2),
            });
        }
        Ok(Self {
            grid: grid.clone(),
            values,
            epsilon,
        })
    }

    pub fn grid(&self) -> &CircleGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Margin `eps` with `sup |f| <= 2^(-1/2) - eps`.
    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn with_epsilon(&self, epsilon: f64) -> Result<Self> {
        Self::build(&self.grid, self.values.clone(), Some(epsilon))
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Margin of the completed pair, `inf |a| - 2^(-1/2)`, implied by the
    /// signal margin. See [`pair_margin`].
    pub fn pair_epsilon(&self) -> f64 {
        pair_margin(self.epsilon)
    }
}

/// `sqrt(1 - (2^(-1/2) - eps)^2) - 2^(-1/2)`: for `sup |b| <= 2^(-1/2) - eps`
/// the outer completion has `inf |a|` at least `2^(-1/2)` plus this amount.
/// It is smaller than `eps` and always below `1 - 2^(-1/2)`; the top of that
/// range is nudged inward to keep the margin interval open.
pub fn pair_margin(signal_epsilon: f64) -> f64 {
    let sup = (INV_SQRT_2 - signal_epsilon).max(0.0);
    let margin = (1.0 - sup * sup).sqrt() - INV_SQRT_2;
    margin.min(pair_margin_limit() * (1.0 - 1e-12))
}

fn chebyshev_eval(coeffs: &[f64], x: f64) -> f64 {
    let (mut b1, mut b2) = (0.0, 0.0);
    for &c in coeffs.iter().skip(1).rev() {
        let b0 = 2.0 * x * b1 - b2 + c;
        b2 = b1;
        b1 = b0;
    }
    coeffs.first().copied().unwrap_or(0.0) + x * b1 - b2
}

/// `b(z_j) = i f_j`.
pub fn signal_to_b(f: &SignalSamples) -> CircleFunction {
    CircleFunction::from_index_fn(f.grid(), |j| Complex64::new(0.0, f.values[j]))
}

/// `(2/pi int_0^1 |f|^2 dx / sqrt(1 - x^2))^(1/2)`, i.e. the root mean square
/// over the uniform `theta` grid.
pub fn hs_norm(f: &SignalSamples) -> f64 {
    rms(f.values())
}

fn rms(v: &[f64]) -> f64 {
    (v.iter().map(|x| x * x).sum::<f64>() / v.len() as f64).sqrt()
}

/// `sum_{k in Z} log(1 + tan^2 psi_|k|)`, counting `psi_0` once and each
/// later phase twice.
pub fn phase_log_mass(psi: &PhaseSequence) -> f64 {
    psi.as_slice()
        .iter()
        .enumerate()
        .map(|(k, p)| {
            let w = if k == 0 { 1.0 } else { 2.0 };
            w * (p.tan().powi(2)).ln_1p()
        })
        .sum()
}

fn signal_log_mass(values: &[f64]) -> f64 {
    -values.iter().map(|v| (-v * v).ln_1p()).sum::<f64>() / values.len() as f64
}

/// Both sides of the Plancherel identity: `(phase mass, -mean log(1 - f^2))`.
pub fn plancherel_check(psi: &PhaseSequence, f: &SignalSamples) -> (f64, f64) {
    (phase_log_mass(psi), signal_log_mass(f.values()))
}

/// `||Im u_d - f||` for each requested `d`, phases past the end counting as
/// zero. One recursion pass per node covers every `d`.
pub fn convergence_profile(psi: &PhaseSequence, f: &SignalSamples, degrees: &[usize]) -> Vec<f64> {
    let Some(&d_max) = degrees.iter().max() else {
        return Vec::new();
    };
    let grid = f.grid();
    let mut sums = vec![0.0; degrees.len()];
    for (j, &fj) in f.values().iter().enumerate() {
        let responses = response_sweep(psi, d_max, grid.abscissa(j).abs());
        for (s, &d) in sums.iter_mut().zip(degrees) {
            *s += (responses[d] - fj).powi(2);
        }
    }
    sums.into_iter().map(|s| (s / grid.size() as f64).sqrt()).collect()
}

/// Outcome of [`synthesize`].
#[derive(Clone, Debug)]
pub struct SynthesisReport {
    pub phases: PhaseSequence,
    pub degree: usize,
    pub epsilon: f64,
    pub grid_size: usize,
    pub plancherel_lhs: f64,
    pub plancherel_rhs: f64,
    /// Allowance for `|lhs - rhs|`: twice the unstripped tail, the change in
    /// the right side when every other sample is dropped, and `1e-10`.
    pub plancherel_budget: f64,
    pub hs_residual: f64,
    /// Set when no degree up to `d_max` brings the residual within `tol`.
    pub not_converged: bool,
    pub fixed_point_iterations: usize,
    pub diagnostics: BTreeMap<String, f64>,
}

impl SynthesisReport {
    pub fn plancherel_gap(&self) -> f64 {
        (self.plancherel_lhs - self.plancherel_rhs).abs()
    }
}

/// Largest degree accepted on a grid of `size` points. Grids of at least
/// `8 d` points are recommended; `4 d` is the hard floor.
pub fn max_degree_for(size: usize) -> usize {
    size / 4
}

/// `f -> Psi`.
///
/// Stripping stops once the Plancherel tail `-2 log a_d(inf)` is at most
/// `tol^2 / 4` or `d_max` is reached. The reported degree is then the lowest
/// one from which `||Im u_d - f||` stays at most `tol`.
pub fn synthesize(f: &SignalSamples, tol: f64, d_max: usize) -> Result<SynthesisReport> {
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!("tol = {tol} must be positive")));
    }
    let grid = f.grid();
    if d_max > max_degree_for(grid.size()) {
        return Err(Error::GridTooCoarse {
            grid: grid.size(),
            bandwidth: d_max,
        });
    }
    let b = signal_to_b(f);
    let pair_eps = f.pair_epsilon();
    let completed = complete_outer(&b, pair_eps)?;
    let factors = rh_factorize(&completed, DEFAULT_FP_TOL, default_max_iter(pair_eps, DEFAULT_FP_TOL))?;
    let tail_tol = 0.25 * tol * tol;
    let outcome = strip_with_diagnostics(&factors.plus, d_max + 1, tail_tol)?;

    let coeffs = outcome.coeffs.entries();
    let max_real = coeffs.iter().fold(0.0f64, |m, c| m.max(c.re.abs()));
    if max_real > IMAGINARY_TOL {
        return Err(Error::SymmetryViolation { deviation: max_real });
    }
    let stripped = if coeffs.is_empty() {
        PhaseSequence::zeros(1)
    } else {
        PhaseSequence::new(coeffs.iter().map(|c| c.im.atan()).collect())?
    };

    // Trim to the lowest degree from which every residual stays within tol.
    let all: Vec<usize> = (0..=stripped.max_degree()).collect();
    let profile = convergence_profile(&stripped, f, &all);
    let mut degree = stripped.max_degree();
    while degree > 0 && profile[degree - 1] <= tol && profile[degree] <= tol {
        degree -= 1;
    }
    let hs_residual = profile[degree];
    let phases = stripped.padded(degree);
    let dropped: f64 = coeffs.iter().skip(degree + 1).map(|c| c.norm_sqr().ln_1p()).sum();
    let tail = outcome.tail + dropped;

    let (lhs, rhs) = plancherel_check(&phases, f);
    let half: Vec<f64> = f.values().iter().step_by(2).copied().collect();
    let quadrature = (rhs - signal_log_mass(&half)).abs();

    let mut diagnostics = BTreeMap::new();
    let mut put = |k: &str, v: f64| {
        diagnostics.insert(k.to_string(), v);
    };
    put("epsilon_signal", f.epsilon());
    put("epsilon_pair", pair_eps);
    put("outer_defect", outerness_defect(&completed.pair().a));
    put("fixed_point_residual", factors.diagnostics.final_residual);
    put("fixed_point_max_ratio", factors.diagnostics.max_ratio());
    put("fixed_point_rate_bound", completed.rate_bound());
    put("factorization_error", factors.diagnostics.reconstruction_error);
    put("factor_support_leakage", factors.diagnostics.support_leakage);
    put("strip_tail", outcome.tail);
    put("strip_tail_reached", if outcome.reached { 1.0 } else { 0.0 });
    put("stripped_degree", stripped.max_degree() as f64);
    put("tail_at_degree", tail);
    put("strip_tail_tol", tail_tol);
    put("strip_max_drift", outcome.max_drift);
    put("strip_unitarity_defect", outcome.max_unitarity_defect);
    put("strip_outer_defect", outcome.max_outer_defect);
    put("coeff_max_real_part", max_real);
    put("quadrature_shift", quadrature);
    if 4 * outcome.coeffs.len() <= grid.size() && !outcome.coeffs.is_empty() {
        put("minus_mirror_defect", mirror_defect(&factors.minus, &outcome.coeffs)?);
    }

    Ok(SynthesisReport {
        phases,
        degree,
        epsilon: f.epsilon(),
        grid_size: grid.size(),
        plancherel_lhs: lhs,
        plancherel_rhs: rhs,
        plancherel_budget: 2.0 * tail + quadrature + 1e-10,
        hs_residual,
        not_converged: hs_residual > tol,
        fixed_point_iterations: factors.diagnostics.iterations,
        diagnostics,
    })
}

/// Sup distance between the minus factor and the series of the mirrored
/// coefficients `F_{-1}, F_{-2}, ...`, which evenness predicts.
fn mirror_defect(minus: &SU2Pair, plus_coeffs: &CoeffSequence) -> Result<f64> {
    let k = plus_coeffs.len() as i64 - 1;
    let mirrored = CoeffSequence::from_fn(-k, -1, |n| plus_coeffs.get(-n));
    minus.sup_distance(&nlfs_finite(&mirrored, minus.grid())?)
}

/// `||Psi - Psi'||_inf / ||f - f'||` for two syntheses under a shared margin.
#[derive(Clone, Debug, PartialEq)]
pub struct LipschitzProbe {
    pub phase_distance: f64,
    pub signal_distance: f64,
    /// Zero when `signal_distance` vanishes.
    pub ratio: f64,
    /// Set when both signals coincide and the ratio is `0/0`.
    pub degenerate: bool,
    /// `7.3 eps^(-3/2)`.
    pub bound: f64,
    /// Whether both syntheses met their tolerance.
    pub converged: bool,
}

/// Synthesises both signals at `tol` and compares the phases.
pub fn lipschitz_probe(
    f: &SignalSamples,
    g: &SignalSamples,
    epsilon: f64,
    tol: f64,
    d_max: usize,
) -> Result<LipschitzProbe> {
    f.grid().ensure_same(g.grid())?;
    let (f, g) = (f.with_epsilon(epsilon)?, g.with_epsilon(epsilon)?);
    let diff: Vec<f64> = f.values().iter().zip(g.values()).map(|(a, b)| a - b).collect();
    let signal_distance = rms(&diff);
    let bound = PHASE_LIPSCHITZ * epsilon.powf(-1.5);
    if signal_distance == 0.0 {
        return Ok(LipschitzProbe {
            phase_distance: 0.0,
            signal_distance,
            ratio: 0.0,
            degenerate: true,
            bound,
            converged: true,
        });
    }
    let rf = synthesize(&f, tol, d_max)?;
    let rg = synthesize(&g, tol, d_max)?;
    let phase_distance = rf.phases.max_distance(&rg.phases);
    Ok(LipschitzProbe {
        phase_distance,
        signal_distance,
        ratio: phase_distance / signal_distance,
        degenerate: false,
        bound,
        converged: !rf.not_converged && !rg.not_converged,
    })
}

/// The three summands of the metric
/// `rho((a, b), (c, d)) = ||a - c|| + ||b - d|| + |log a(inf) - log c(inf)|`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RhoMetric {
    pub a_distance: f64,
    pub b_distance: f64,
    pub log_distance: f64,
}

impl RhoMetric {
    pub fn total(&self) -> f64 {
        self.a_distance + self.b_distance + self.log_distance
    }
}

pub fn rho_metric(p: &SU2Pair, q: &SU2Pair) -> Result<RhoMetric> {
    let log_inf = |x: &SU2Pair| -> Result<f64> {
        let v = x.a_infinity().re;
        if v > 0.0 {
            Ok(v.ln())
        } else {
            Err(Error::NonPositiveAInfinity(v))
        }
    };
    Ok(RhoMetric {
        a_distance: p.a.l2_distance(&q.a)?,
        b_distance: p.b.l2_distance(&q.b)?,
        log_distance: (log_inf(p)? - log_inf(q)?).abs(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qsp::qsp_response;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn grid(n: usize) -> CircleGrid {
        CircleGrid::new(n).unwrap()
    }

    #[test]
    fn signal_validation() {
        let g = grid(64);
        assert!(matches!(
            SignalSamples::from_fn(&g, |_| 0.8, None),
            Err(Error::SignalTooLarge { .. })
        ));
        assert!(matches!(
            SignalSamples::from_fn(&g, |_| 0.6, Some(0.2)),
            Err(Error::SignalTooLarge { .. })
        ));
        assert!(matches!(SignalSamples::from_fn(&g, |_| 0.1, Some(0.0)), Err(Error::InvalidEpsilon(_))));
        assert!(SignalSamples::from_fn(&g, |_| INV_SQRT_2 - 1e-7, None).is_err());
        let s = SignalSamples::from_fn(&g, |x| 0.4 * x, None).unwrap();
        assert!((s.epsilon() - (INV_SQRT_2 - 0.4)).abs() < 1e-15);
        assert!(matches!(SignalSamples::from_samples(&g, &[0.0; 3], None), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn samples_are_symmetrised() {
        let g = grid(16);
        let raw: Vec<f64> = (0..16).map(|j| 0.01 * j as f64).collect();
        let s = SignalSamples::from_samples(&g, &raw, None).unwrap();
        for j in 1..16 {
            assert_eq!(s.values()[j], s.values()[16 - j]);
        }
        assert_eq!(s.values()[0], 0.0);
        assert!((s.values()[3] - 0.5 * (0.03 + 0.13)).abs() < 1e-16);
    }

    #[test]
    fn chebyshev_input() {
        let g = grid(32);
        let s = SignalSamples::from_chebyshev(&g, &[0.1, 0.0, 0.3], None).unwrap();
        for j in 0..32 {
            let x = g.abscissa(j);
            assert!((s.values()[j] - (0.1 + 0.3 * (2.0 * x * x - 1.0))).abs() < 1e-15);
        }
        assert_eq!(chebyshev_eval(&[], 0.3), 0.0);
        assert!((chebyshev_eval(&[0.0, 0.0, 0.0, 1.0], 0.3) - (4.0 * 0.027 - 0.9)).abs() < 1e-15);
    }

    #[test]
    fn pair_margin_examples() {
        // sup |f| = 0.4 gives inf |a| = sqrt(0.84).
        assert!((pair_margin(INV_SQRT_2 - 0.4) - (0.84f64.sqrt() - INV_SQRT_2)).abs() < 1e-15);
        assert!(pair_margin(0.2) < 0.2);
        assert!(pair_margin(INV_SQRT_2) < pair_margin_limit());
    }

    #[test]
    fn signal_to_b_examples() {
        let g = grid(32);
        let zero = SignalSamples::from_fn(&g, |_| 0.0, None).unwrap();
        assert_eq!(signal_to_b(&zero).sup_norm(), 0.0);
        let c = SignalSamples::from_fn(&g, |_| 0.3, None).unwrap();
        let b = signal_to_b(&c);
        assert!(b.sup_distance(&CircleFunction::constant(&g, Complex64::new(0.0, 0.3))).unwrap() < 1e-16);
    }

    /// Direct DFT of `0.4 i |cos(theta_j)|`.
    #[test]
    fn signal_to_b_kinked_linear() {
        let n = 64;
        let g = grid(n);
        let s = SignalSamples::from_fn(&g, |x| 0.4 * x, None).unwrap();
        let b = signal_to_b(&s);
        for k in -8i64..=8 {
            let direct: Complex64 = (0..n)
                .map(|j| {
                    let theta = std::f64::consts::PI * j as f64 / n as f64;
                    Complex64::new(0.0, 0.4 * theta.cos().abs())
                        * Complex64::from_polar(1.0, -2.0 * theta * k as f64)
                })
                .sum::<Complex64>()
                / n as f64;
            assert!((b.coeff(k) - direct).norm() < 1e-15);
            assert!((b.coeff(k) - b.coeff(-k)).norm() < 1e-12);
            assert!(b.coeff(k).re.abs() < 1e-15);
        }
        // Leading coefficients of |cos(phi / 2)|: 2/pi and 2/(3 pi).
        assert!((b.coeff(0).im - 0.8 / std::f64::consts::PI).abs() < 1e-3);
        assert!((b.coeff(1).im - 0.8 / (3.0 * std::f64::consts::PI)).abs() < 1e-3);
    }

    #[test]
    fn hs_norm_examples() {
        let g = grid(256);
        let c = SignalSamples::from_fn(&g, |_| -0.3, None).unwrap();
        assert!((hs_norm(&c) - 0.3).abs() < 1e-15);
        assert_eq!(hs_norm(&SignalSamples::from_fn(&g, |x| x * 0.0, None).unwrap()), 0.0);
        let lin = SignalSamples::from_fn(&g, |x| 0.5 * x, None).unwrap();
        assert!((hs_norm(&lin) - 0.5 * INV_SQRT_2).abs() < 1e-15);
    }

    #[test]
    fn hs_norm_matches_circle_norm() {
        let g = grid(512);
        let s = SignalSamples::from_chebyshev(&g, &[0.1, 0.2, -0.1, 0.05], None).unwrap();
        assert!((hs_norm(&s) - signal_to_b(&s).l2_norm()).abs() < 1e-12);
    }

    #[test]
    fn plancherel_check_examples() {
        let g = grid(64);
        let zero = SignalSamples::from_fn(&g, |_| 0.0, None).unwrap();
        assert_eq!(plancherel_check(&PhaseSequence::zeros(3), &zero), (0.0, 0.0));
        let psi0 = 0.4f64;
        let c = SignalSamples::from_fn(&g, |_| psi0.sin(), None).unwrap();
        let (lhs, rhs) = plancherel_check(&PhaseSequence::new(vec![psi0]).unwrap(), &c);
        let expected = -2.0 * psi0.cos().ln();
        assert!((lhs - expected).abs() < 1e-15);
        assert!((rhs - expected).abs() < 1e-15);
        let two = PhaseSequence::new(vec![0.1, 0.2]).unwrap();
        let mass = (0.1f64.tan().powi(2)).ln_1p() + 2.0 * (0.2f64.tan().powi(2)).ln_1p();
        assert!((phase_log_mass(&two) - mass).abs() < 1e-16);
    }

    #[test]
    fn zero_signal() {
        let g = grid(64);
        let s = SignalSamples::from_fn(&g, |_| 0.0, None).unwrap();
        let r = synthesize(&s, 1e-8, 16).unwrap();
        assert_eq!(r.phases.as_slice(), &[0.0]);
        assert_eq!((r.plancherel_lhs, r.plancherel_rhs), (0.0, 0.0));
        assert!(!r.not_converged);
        assert_eq!(convergence_profile(&r.phases, &s, &[0, 4, 8]), vec![0.0; 3]);
    }

    #[test]
    fn constant_signal() {
        let g = grid(256);
        let c = 0.3;
        let s = SignalSamples::from_fn(&g, |_| c, None).unwrap();
        let r = synthesize(&s, 1e-10, 32).unwrap();
        assert!((r.phases.get(0) - c.asin()).abs() < 1e-10);
        assert!(r.phases.as_slice()[1..].iter().all(|p| p.abs() < 1e-10));
        assert!((qsp_response(&r.phases, 0, 0.37).unwrap() - c).abs() < 1e-8);
        assert!(r.hs_residual < 1e-10);
        let psi0 = PhaseSequence::new(vec![c.asin()]).unwrap();
        assert!(convergence_profile(&psi0, &s, &[0])[0] < 1e-15);
    }

    #[test]
    fn smooth_signal_plancherel_and_symmetry() {
        let g = grid(4096);
        let s = SignalSamples::from_fn(&g, |x| 0.3 * (2.0 * x * x - 1.0), None).unwrap();
        let r = synthesize(&s, 1e-8, 256).unwrap();
        assert!(!r.not_converged);
        assert!(r.plancherel_gap() <= 1e-8, "gap {:e}", r.plancherel_gap());
        assert!(r.plancherel_gap() <= r.plancherel_budget);
        assert!(r.diagnostics["coeff_max_real_part"] < 1e-9);
        assert!(r.diagnostics["minus_mirror_defect"] < 1e-9);
        assert!(r.hs_residual < 1e-8);
    }

    #[test]
    fn round_trip_from_known_phases() {
        let g = grid(1024);
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let truth = PhaseSequence::new((0..9).map(|_| rng.gen_range(-0.06..0.06)).collect()).unwrap();
        let d = truth.max_degree();
        let s = SignalSamples::from_fn(&g, |x| qsp_response(&truth, d, x).unwrap(), None).unwrap();
        let r = synthesize(&s, 1e-10, 64).unwrap();
        assert!(r.phases.max_distance(&truth) < 1e-8, "{:e}", r.phases.max_distance(&truth));
    }

    #[test]
    fn lipschitz_probe_examples() {
        let g = grid(256);
        let f = SignalSamples::from_fn(&g, |_| 0.2, None).unwrap();
        let same = lipschitz_probe(&f, &f, 0.2, 1e-9, 32).unwrap();
        assert!(same.degenerate);
        assert_eq!(same.ratio, 0.0);
        let h = SignalSamples::from_fn(&g, |_| 0.21, None).unwrap();
        let probe = lipschitz_probe(&f, &h, 0.2, 1e-9, 32).unwrap();
        assert!(!probe.degenerate && probe.converged);
        assert!((probe.bound - 7.3 * 0.2f64.powf(-1.5)).abs() < 1e-12);
        // Constants give |asin(0.21) - asin(0.2)| / 0.01.
        assert!((probe.ratio - (0.21f64.asin() - 0.2f64.asin()) / 0.01).abs() < 1e-6);
        assert!(probe.ratio <= probe.bound);
    }

    #[test]
    fn rho_metric_examples() {
        let g = grid(64);
        let id = SU2Pair::identity(&g);
        assert_eq!(rho_metric(&id, &id).unwrap().total(), 0.0);
        let c = 1.09f64.sqrt().recip();
        let one = SU2Pair::constant(&g, Complex64::new(c, 0.0), Complex64::new(0.0, 0.3 * c));
        let rho = rho_metric(&id, &one).unwrap();
        assert!((rho.a_distance - (1.0 - c)).abs() < 1e-15);
        assert!((rho.b_distance - 0.3 * c).abs() < 1e-15);
        assert!((rho.log_distance - 0.5 * 1.09f64.ln()).abs() < 1e-15);
        let bad = SU2Pair::constant(&g, Complex64::new(-0.6, 0.0), Complex64::new(0.8, 0.0));
        assert!(matches!(rho_metric(&id, &bad), Err(Error::NonPositiveAInfinity(_))));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn rho_triangle_inequality(seed in any::<u64>()) {
            let g = grid(64);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut pair = || {
                let f = CoeffSequence::from_fn(-3, 3, |_| Complex64::new(rng.gen_range(-0.3..0.3), rng.gen_range(-0.3..0.3)));
                nlfs_finite(&f, &g).unwrap()
            };
            let (p, q, r) = (pair(), pair(), pair());
            let pq = rho_metric(&p, &q).unwrap().total();
            let qr = rho_metric(&q, &r).unwrap().total();
            let pr = rho_metric(&p, &r).unwrap().total();
            prop_assert!(pr <= pq + qr + 1e-12);
        }
    }
}
