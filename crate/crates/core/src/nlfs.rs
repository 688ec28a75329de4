//! The SU(2) nonlinear Fourier series of finitely supported sequences.
//!
//! A sequence `F` maps to the ordered product over increasing `k` of
//! `(1 + |F_k|^2)^(-1/2) (1, F_k z^k)`, where a row `(a, b)` stands for the
//! matrix `[[a, b], [-b*, a*]]` and `(a, b)(c, d) = (ac - bd*, ad + bc*)`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::spectral::{CircleFunction, CircleGrid};

mod multilinear;

pub use multilinear::{multilinear_t, nlfs_via_multilinear, MultilinearApprox};

/// Finitely supported complex sequence on the integer window `[start, end]`.
///
/// Entries outside the window are zero. An empty sequence is the zero
/// sequence.
#[derive(Clone, Debug, PartialEq)]
pub struct CoeffSequence {
    start: i64,
    entries: Vec<Complex64>,
}

impl CoeffSequence {
    pub fn new(start: i64, entries: Vec<Complex64>) -> Self {
        Self { start, entries }
    }

    pub fn zero() -> Self {
        Self::new(0, Vec::new())
    }

    /// Sequence with the single entry `value` at index `n`.
    pub fn single(n: i64, value: Complex64) -> Self {
        Self::new(n, vec![value])
    }

    /// Builds `F_n = f(n)` for `n` in `[start, end]`.
    pub fn from_fn(start: i64, end: i64, f: impl FnMut(i64) -> Complex64) -> Self {
        Self::new(start, (start..=end).map(f).collect())
    }

    pub fn start(&self) -> i64 {
        self.start
    }

    /// Last index of the window (`start - 1` when empty).
    pub fn end(&self) -> i64 {
        self.start + self.entries.len() as i64 - 1
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    pub fn get(&self, n: i64) -> Complex64 {
        let idx = n - self.start;
        if idx < 0 || idx >= self.entries.len() as i64 {
            Complex64::new(0.0, 0.0)
        } else {
            self.entries[idx as usize]
        }
    }

    /// `(n, F_n)` over the window.
    pub fn iter(&self) -> impl Iterator<Item = (i64, Complex64)> + '_ {
        self.entries
            .iter()
            .enumerate()
            .map(move |(i, &c)| (self.start + i as i64, c))
    }

    pub fn l1_norm(&self) -> f64 {
        self.entries.iter().map(|c| c.norm()).sum()
    }

    pub fn l2_norm(&self) -> f64 {
        self.entries.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn sup_norm(&self) -> f64 {
        self.entries.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Restriction to `[lo, hi]`, keeping the original indices.
    pub fn truncated(&self, lo: i64, hi: i64) -> Self {
        let lo = lo.max(self.start);
        let hi = hi.min(self.end());
        if lo > hi {
            return Self::zero();
        }
        Self::from_fn(lo, hi, |n| self.get(n))
    }

    /// Pointwise combination over the union of both windows.
    pub fn zip_with(&self, other: &Self, f: impl Fn(Complex64, Complex64) -> Complex64) -> Self {
        match (self.is_empty(), other.is_empty()) {
            (true, true) => Self::zero(),
            _ => {
                let lo = if self.is_empty() {
                    other.start
                } else if other.is_empty() {
                    self.start
                } else {
                    self.start.min(other.start)
                };
                let hi = self.end().max(other.end());
                Self::from_fn(lo, hi, |n| f(self.get(n), other.get(n)))
            }
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn map(&self, f: impl Fn(Complex64) -> Complex64) -> Self {
        Self::new(self.start, self.entries.iter().map(|&c| f(c)).collect())
    }

    /// `prod (1 + |F_n|^2)^(-1/2)`, the value `a(infinity)` of the series.
    pub fn normaliser(&self) -> f64 {
        (-0.5 * self.log_mass()).exp()
    }

    /// `sum log(1 + |F_n|^2)`.
    pub fn log_mass(&self) -> f64 {
        self.entries.iter().map(|c| c.norm_sqr().ln_1p()).sum()
    }

    /// `max(width, |start|, |end|)`: the frequency extent of `a` and `b`.
    pub fn bandwidth(&self) -> usize {
        if self.is_empty() {
            return 0;
        }
        (self.len() as i64)
            .max(self.start.abs())
            .max(self.end().abs()) as usize
    }
}

/// The row `(a, b)` of an SU(2)-valued function on the circle.
#[derive(Clone, Debug, PartialEq)]
pub struct SU2Pair {
    pub a: CircleFunction,
    pub b: CircleFunction,
}

impl SU2Pair {
    pub fn new(a: CircleFunction, b: CircleFunction) -> Result<Self> {
        a.grid().ensure_same(b.grid())?;
        Ok(Self { a, b })
    }

    /// The identity element `(1, 0)`.
    pub fn identity(grid: &CircleGrid) -> Self {
        Self {
            a: CircleFunction::one(grid),
            b: CircleFunction::zero(grid),
        }
    }

    /// Constant pair `(c, d)`.
    pub fn constant(grid: &CircleGrid, a: Complex64, b: Complex64) -> Self {
        Self {
            a: CircleFunction::constant(grid, a),
            b: CircleFunction::constant(grid, b),
        }
    }

    pub fn grid(&self) -> &CircleGrid {
        self.a.grid()
    }

    /// `a(infinity)`, the mean of `a`.
    pub fn a_infinity(&self) -> Complex64 {
        self.a.mean_value()
    }

    /// Pointwise matrix product `(a, b)(c, d) = (ac - b conj(d), ad + b conj(c))`.
    pub fn product(&self, other: &SU2Pair) -> Result<SU2Pair> {
        self.grid().ensure_same(other.grid())?;
        let n = self.grid().size();
        let (sa, sb) = (self.a.samples(), self.b.samples());
        let (oa, ob) = (other.a.samples(), other.b.samples());
        let mut a = Vec::with_capacity(n);
        let mut b = Vec::with_capacity(n);
        for j in 0..n {
            a.push(sa[j] * oa[j] - sb[j] * ob[j].conj());
            b.push(sa[j] * ob[j] + sb[j] * oa[j].conj());
        }
        Ok(SU2Pair {
            a: CircleFunction::from_samples(self.grid(), a)?,
            b: CircleFunction::from_samples(self.grid(), b)?,
        })
    }

    /// Group inverse `(a*, -b)`.
    pub fn inverse(&self) -> SU2Pair {
        SU2Pair {
            a: self.a.star(),
            b: self.b.scale(Complex64::new(-1.0, 0.0)),
        }
    }

    /// `max_j | |a_j|^2 + |b_j|^2 - 1 |`, the determinant defect on the grid.
    pub fn unitarity_defect(&self) -> f64 {
        self.a
            .samples()
            .iter()
            .zip(self.b.samples())
            .map(|(a, b)| (a.norm_sqr() + b.norm_sqr() - 1.0).abs())
            .fold(0.0, f64::max)
    }

    /// `sqrt(||a||^2 + ||b||^2)` in `L^2(T) + L^2(T)`.
    pub fn h_norm(&self) -> f64 {
        (self.a.l2_norm().powi(2) + self.b.l2_norm().powi(2)).sqrt()
    }

    pub fn h_distance(&self, other: &SU2Pair) -> Result<f64> {
        let da = self.a.l2_distance(&other.a)?;
        let db = self.b.l2_distance(&other.b)?;
        Ok((da * da + db * db).sqrt())
    }

    /// Largest sample deviation in either component.
    pub fn sup_distance(&self, other: &SU2Pair) -> Result<f64> {
        Ok(self
            .a
            .sup_distance(&other.a)?
            .max(self.b.sup_distance(&other.b)?))
    }

    /// Largest coefficient of `b` outside `[lo, hi]` and of `a` outside
    /// `[lo - hi, 0]`, the support predicted for a series on `[lo, hi]`.
    pub fn support_leakage(&self, lo: i64, hi: i64) -> f64 {
        let b_out = self.b.to_coeffs().max_outside(|n| (lo..=hi).contains(&n));
        let a_out = self.a.to_coeffs().max_outside(|n| (lo - hi..=0).contains(&n));
        a_out.max(b_out)
    }
}

fn check_bandwidth(f: &CoeffSequence, grid: &CircleGrid) -> Result<()> {
    let bandwidth = f.bandwidth();
    if 4 * bandwidth > grid.size() {
        return Err(Error::GridTooCoarse {
            grid: grid.size(),
            bandwidth,
        });
    }
    Ok(())
}

/// Ordered product evaluated at a single point `z` of the circle.
pub fn nlfs_at(f: &CoeffSequence, z: Complex64) -> (Complex64, Complex64) {
    let mut a = Complex64::new(1.0, 0.0);
    let mut b = Complex64::new(0.0, 0.0);
    let mut zk = z.powi(f.start() as i32);
    for &fk in f.entries() {
        let s = 1.0 / (1.0 + fk.norm_sqr()).sqrt();
        let d = fk * zk;
        let na = a - b * d.conj();
        let nb = a * d + b;
        a = na * s;
        b = nb * s;
        zk *= z;
    }
    (a, b)
}

/// Nonlinear Fourier series of a finite sequence sampled on `grid`.
///
/// The grid must satisfy `N >= 4 * bandwidth` so that the coefficients of
/// `a` (in `[M - N, 0]`) and `b` (in `[M, N]`) do not alias.
pub fn nlfs_finite(f: &CoeffSequence, grid: &CircleGrid) -> Result<SU2Pair> {
    check_bandwidth(f, grid)?;
    let size = grid.size();
    let scales: Vec<f64> = f
        .entries()
        .iter()
        .map(|c| 1.0 / (1.0 + c.norm_sqr()).sqrt())
        .collect();
    let mut a = vec![Complex64::new(1.0, 0.0); size];
    let mut b = vec![Complex64::new(0.0, 0.0); size];
    for j in 0..size {
        let (mut aj, mut bj) = (a[j], b[j]);
        for ((k, fk), &s) in f.iter().zip(&scales) {
            let d = fk * grid.node_power(j, k);
            let na = aj - bj * d.conj();
            let nb = aj * d + bj;
            aj = na * s;
            bj = nb * s;
        }
        a[j] = aj;
        b[j] = bj;
    }
    SU2Pair::new(
        CircleFunction::from_samples(grid, a)?,
        CircleFunction::from_samples(grid, b)?,
    )
}

/// Elementary transformations of a sequence and their effect on the series.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Symmetry {
    /// `H_n = F_{n-1}`; maps `(a, b)` to `(a, z b)`.
    Shift,
    /// `H_n = c F_n` with `|c| = 1`; maps `(a, b)` to `(a, c b)`.
    Modulate(Complex64),
    /// `H_n = F_{-n}`; maps `(a, b)` to `(a*(1/z), b(1/z))`.
    Reflect,
    /// `H_n = conj(F_n)`; maps `(a, b)` to `(a*(1/z), b*(1/z))`.
    Conjugate,
}

impl Symmetry {
    fn validate(&self) -> Result<()> {
        if let Symmetry::Modulate(c) = self {
            let m = c.norm();
            if (m - 1.0).abs() > 1e-12 {
                return Err(Error::NonUnimodularFactor(m));
            }
        }
        Ok(())
    }

    pub fn transform(&self, f: &CoeffSequence) -> Result<CoeffSequence> {
        self.validate()?;
        Ok(match *self {
            Symmetry::Shift => CoeffSequence::new(f.start() + 1, f.entries().to_vec()),
            Symmetry::Modulate(c) => f.map(|x| c * x),
            Symmetry::Reflect => {
                let mut entries = f.entries().to_vec();
                entries.reverse();
                CoeffSequence::new(-f.end(), entries)
            }
            Symmetry::Conjugate => f.map(|x| x.conj()),
        })
    }

    /// The series of the transformed sequence, predicted from `(a, b)`.
    pub fn predict(&self, pair: &SU2Pair) -> Result<SU2Pair> {
        self.validate()?;
        Ok(match *self {
            Symmetry::Shift => SU2Pair::new(pair.a.clone(), pair.b.shift(1))?,
            Symmetry::Modulate(c) => SU2Pair::new(pair.a.clone(), pair.b.scale(c))?,
            Symmetry::Reflect => SU2Pair::new(pair.a.star().reflect(), pair.b.reflect())?,
            Symmetry::Conjugate => {
                SU2Pair::new(pair.a.star().reflect(), pair.b.star().reflect())?
            }
        })
    }

    /// Max sample deviation between the series of the transformed sequence
    /// and the predicted transform of the original series.
    pub fn check(&self, f: &CoeffSequence, grid: &CircleGrid) -> Result<f64> {
        let direct = nlfs_finite(&self.transform(f)?, grid)?;
        let predicted = self.predict(&nlfs_finite(f, grid)?)?;
        direct.sup_distance(&predicted)
    }
}

/// Both sides of the finite Plancherel identity:
/// `sum log(1 + |F_n|^2)` and `-mean log(1 - |b|^2)`.
pub fn plancherel_finite(f: &CoeffSequence, grid: &CircleGrid) -> Result<(f64, f64)> {
    let pair = nlfs_finite(f, grid)?;
    Ok((f.log_mass(), minus_mean_log_one_minus_sq(&pair.b)))
}

pub(crate) fn minus_mean_log_one_minus_sq(b: &CircleFunction) -> f64 {
    -b.samples()
        .iter()
        .map(|c| (-c.norm_sqr()).ln_1p())
        .sum::<f64>()
        / b.grid().size() as f64
}

/// Outcome of a Wiener-algebra Lipschitz probe for two sequences.
#[derive(Clone, Debug, PartialEq)]
pub struct WienerProbe {
    /// `||b - b'||_A`
    pub b_distance: f64,
    /// `||F - F'||_1`
    pub f_distance: f64,
    /// `e^R ||F - F'||_1`
    pub forward_bound: f64,
    pub forward_holds: bool,
    /// Checked only when `R <= 0.36`.
    pub reverse_holds: Option<bool>,
}

/// Largest radius for which the reverse inequality
/// `||F - F'||_1 <= 2 ||b - b'||_A` is guaranteed.
pub const REVERSE_LIPSCHITZ_RADIUS: f64 = 0.36;

pub fn wiener_lipschitz_probe(
    f: &CoeffSequence,
    g: &CoeffSequence,
    radius: f64,
    grid: &CircleGrid,
) -> Result<WienerProbe> {
    let (nf, ng) = (f.l1_norm(), g.l1_norm());
    if nf > radius || ng > radius {
        return Err(Error::InvalidArgument(format!(
            "l1 norms {nf} and {ng} must not exceed R = {radius}"
        )));
    }
    let bf = nlfs_finite(f, grid)?.b;
    let bg = nlfs_finite(g, grid)?.b;
    let b_distance = bf.sub(&bg)?.wiener_norm();
    let f_distance = f.sub(g).l1_norm();
    let forward_bound = radius.exp() * f_distance;
    // Relative slack for round-off in the FFT-based Wiener norm.
    let slack = 1e-12;
    let forward_holds = b_distance <= forward_bound * (1.0 + slack) + slack;
    let reverse_holds = (radius <= REVERSE_LIPSCHITZ_RADIUS)
        .then(|| f_distance <= 2.0 * b_distance * (1.0 + slack) + slack);
    Ok(WienerProbe {
        b_distance,
        f_distance,
        forward_bound,
        forward_holds,
        reverse_holds,
    })
}
