//! Brute-force multilinear expansion of the series.
//!
//! `T_n(F)(z)` sums over increasing index tuples `j_1 < ... < j_n` the product
//! whose odd positions contribute `F_j z^j` and even positions
//! `-conj(F_j) z^(-j)`. Then `a = C(F) sum T_(2n)` and `b = C(F) sum T_(2n+1)`
//! with `C(F) = prod (1 + |F_j|^2)^(-1/2)`. Each term obeys
//! `||T_n||_A <= ||F||_1^n / n!`.

use num_complex::Complex64;

use super::{CoeffSequence, SU2Pair};
use crate::error::{Error, Result};
use crate::spectral::{CircleFunction, CircleGrid, Spectrum};

pub const MAX_ORDER: usize = 5;
pub const MAX_WIDTH: usize = 32;

fn check_caps(order: usize, f: &CoeffSequence) -> Result<()> {
    if order > MAX_ORDER || f.len() > MAX_WIDTH {
        return Err(Error::OracleTooLarge {
            order,
            width: f.len(),
        });
    }
    Ok(())
}

fn accumulate(
    f: &CoeffSequence,
    order: usize,
    first: usize,
    depth: usize,
    product: Complex64,
    frequency: i64,
    out: &mut Spectrum,
) -> Result<()> {
    if depth == order {
        let old = out.get(frequency);
        return out.set(frequency, old + product);
    }
    // Position depth + 1 is odd when depth is even.
    let odd = depth % 2 == 0;
    for idx in first..f.len() {
        let j = f.start() + idx as i64;
        let fj = f.entries()[idx];
        let (factor, step) = if odd { (fj, j) } else { (-fj.conj(), -j) };
        accumulate(f, order, idx + 1, depth + 1, product * factor, frequency + step, out)?;
    }
    Ok(())
}

/// `T_order(F, ..., F)` sampled on `grid`.
pub fn multilinear_t(order: usize, f: &CoeffSequence, grid: &CircleGrid) -> Result<CircleFunction> {
    check_caps(order, f)?;
    let mut spectrum = Spectrum::zeros(grid);
    accumulate(f, order, 0, 0, Complex64::new(1.0, 0.0), 0, &mut spectrum)?;
    Ok(CircleFunction::from_coeffs(&spectrum))
}

/// Truncated multilinear expansion together with its a priori error bound.
#[derive(Clone, Debug)]
pub struct MultilinearApprox {
    pub pair: SU2Pair,
    pub max_order: usize,
    /// `sum_{k > max_order} ||F||_1^k / k!`, bounding the sup error of each
    /// component.
    pub tail_bound: f64,
}

/// Expansion including all terms `T_n` with `n <= max_order`.
pub fn nlfs_via_multilinear(
    f: &CoeffSequence,
    max_order: usize,
    grid: &CircleGrid,
) -> Result<MultilinearApprox> {
    check_caps(max_order, f)?;
    let normaliser = Complex64::new(f.normaliser(), 0.0);
    let mut a = CircleFunction::zero(grid);
    let mut b = CircleFunction::zero(grid);
    for order in 0..=max_order {
        let t = multilinear_t(order, f, grid)?;
        if order % 2 == 0 {
            a = a.add(&t)?;
        } else {
            b = b.add(&t)?;
        }
    }
    let pair = SU2Pair::new(a.scale(normaliser), b.scale(normaliser))?;
    Ok(MultilinearApprox {
        pair,
        max_order,
        tail_bound: factorial_tail(f.l1_norm(), max_order),
    })
}

/// `sum_{k > n} r^k / k!`, summed directly to avoid cancellation.
fn factorial_tail(r: f64, n: usize) -> f64 {
    let mut term = 1.0;
    for k in 1..=n {
        term *= r / k as f64;
    }
    let mut sum = 0.0;
    for k in n + 1..n + 200 {
        term *= r / k as f64;
        sum += term;
        if term <= sum * 1e-17 {
            break;
        }
    }
    sum
}
