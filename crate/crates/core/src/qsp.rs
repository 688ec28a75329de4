//! Symmetric QSP protocol and its link to the nonlinear Fourier series.
//!
//! `U_0 = e^{i psi_0 Z}` and `U_d = e^{i psi_d Z} W(x) U_{d-1} W(x) e^{i psi_d Z}`
//! with `W(x) = [[x, i sqrt(1-x^2)], [i sqrt(1-x^2), x]]`. With `x = cos(theta)`
//! and `z = e^{2i theta}`, `M U_d M = D G_d(z) D` where `D = diag(e^{id theta},
//! e^{-id theta})` and `G_d` is the series of `F_n = i tan(psi_|n|)` restricted
//! to `|n| <= d`.

use std::f64::consts::FRAC_PI_2;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::nlfs::{nlfs_at, CoeffSequence};

/// Phases must stay this far inside `(-pi/2, pi/2)`.
pub const PHASE_MARGIN: f64 = 1e-12;

/// Tolerance for the even and purely imaginary checks in [`coeffs_to_phases`].
pub const SYMMETRY_TOL: f64 = 1e-9;

/// Phases `psi_0, ..., psi_K`.
#[derive(Clone, Debug, PartialEq)]
pub struct PhaseSequence {
    phases: Vec<f64>,
}

impl PhaseSequence {
    pub fn new(phases: Vec<f64>) -> Result<Self> {
        if phases.is_empty() {
            return Err(Error::InvalidArgument("phase sequence is empty".into()));
        }
        for (index, &value) in phases.iter().enumerate() {
            if !(value.abs() < FRAC_PI_2 - PHASE_MARGIN) {
                return Err(Error::PhaseOutOfDomain { index, value });
            }
        }
        Ok(Self { phases })
    }

    pub fn zeros(len: usize) -> Self {
        Self {
            phases: vec![0.0; len.max(1)],
        }
    }

    pub fn len(&self) -> usize {
        self.phases.len()
    }

    /// Always false; kept for API symmetry with `len`.
    pub fn is_empty(&self) -> bool {
        self.phases.is_empty()
    }

    /// Largest admissible degree.
    pub fn max_degree(&self) -> usize {
        self.phases.len() - 1
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.phases
    }

    pub fn get(&self, k: usize) -> f64 {
        self.phases.get(k).copied().unwrap_or(0.0)
    }

    /// Extends with zeros (or truncates) to exactly `degree + 1` phases.
    pub fn padded(&self, degree: usize) -> Self {
        let phases = (0..=degree).map(|k| self.get(k)).collect();
        Self { phases }
    }

    pub fn sup_norm(&self) -> f64 {
        self.phases.iter().fold(0.0, |m, p| m.max(p.abs()))
    }

    pub fn max_distance(&self, other: &Self) -> f64 {
        let n = self.len().max(other.len());
        (0..n).fold(0.0, |m, k| m.max((self.get(k) - other.get(k)).abs()))
    }
}

/// A 2x2 complex matrix, row major.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Unitary2 {
    pub m: [[Complex64; 2]; 2],
}

impl Unitary2 {
    pub fn new(m: [[Complex64; 2]; 2]) -> Self {
        Self { m }
    }

    pub fn identity() -> Self {
        let (o, l) = (Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0));
        Self::new([[l, o], [o, l]])
    }

    pub fn diag(p: Complex64, q: Complex64) -> Self {
        let o = Complex64::new(0.0, 0.0);
        Self::new([[p, o], [o, q]])
    }

    pub fn mul(&self, other: &Self) -> Self {
        let (a, b) = (&self.m, &other.m);
        let mut m = [[Complex64::new(0.0, 0.0); 2]; 2];
        for (r, row) in m.iter_mut().enumerate() {
            for (c, entry) in row.iter_mut().enumerate() {
                *entry = a[r][0] * b[0][c] + a[r][1] * b[1][c];
            }
        }
        Self { m }
    }

    pub fn adjoint(&self) -> Self {
        let m = &self.m;
        Self::new([[m[0][0].conj(), m[1][0].conj()], [m[0][1].conj(), m[1][1].conj()]])
    }

    pub fn det(&self) -> Complex64 {
        self.m[0][0] * self.m[1][1] - self.m[0][1] * self.m[1][0]
    }

    /// Max entry of `|U U^dagger - I|` combined with `||det| - 1|`.
    pub fn unitarity_defect(&self) -> f64 {
        let gram = self.mul(&self.adjoint());
        let entries = gram.max_entry_distance(&Self::identity());
        entries.max((self.det().norm() - 1.0).abs())
    }

    pub fn max_entry_distance(&self, other: &Self) -> f64 {
        let mut d: f64 = 0.0;
        for r in 0..2 {
            for c in 0..2 {
                d = d.max((self.m[r][c] - other.m[r][c]).norm());
            }
        }
        d
    }

    pub fn upper_left(&self) -> Complex64 {
        self.m[0][0]
    }
}

fn check_degree(psi: &PhaseSequence, d: usize) -> Result<()> {
    if d > psi.max_degree() {
        return Err(Error::DegreeOutOfRange {
            degree: d,
            available: psi.len(),
        });
    }
    Ok(())
}

fn check_abscissa(x: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::InvalidArgument(format!("x = {x} is outside [0, 1]")));
    }
    Ok(())
}

/// Runs the recursion for every degree up to `d`, handing each `U_k` to `visit`.
/// Accepts any `x` in `[-1, 1]`.
pub(crate) fn unitary_sweep(psi: &[f64], d: usize, x: f64, mut visit: impl FnMut(usize, &Unitary2)) {
    let s = Complex64::new(0.0, (1.0 - x * x).max(0.0).sqrt());
    let c = Complex64::new(x, 0.0);
    let phase = |k: usize| Complex64::from_polar(1.0, psi.get(k).copied().unwrap_or(0.0));
    let p0 = phase(0);
    let mut u = Unitary2::diag(p0, p0.conj());
    visit(0, &u);
    for k in 1..=d {
        // W U W, written out for the symmetric W.
        let m = &u.m;
        let wu = [
            [c * m[0][0] + s * m[1][0], c * m[0][1] + s * m[1][1]],
            [s * m[0][0] + c * m[1][0], s * m[0][1] + c * m[1][1]],
        ];
        let wuw = [
            [wu[0][0] * c + wu[0][1] * s, wu[0][0] * s + wu[0][1] * c],
            [wu[1][0] * c + wu[1][1] * s, wu[1][0] * s + wu[1][1] * c],
        ];
        // Left and right multiplication by diag(e^{i psi}, e^{-i psi}).
        let e = phase(k);
        let e2 = e * e;
        u = Unitary2::new([[wuw[0][0] * e2, wuw[0][1]], [wuw[1][0], wuw[1][1] * e2.conj()]]);
        visit(k, &u);
    }
}

fn unitary_unchecked(psi: &PhaseSequence, d: usize, x: f64) -> Unitary2 {
    let mut out = Unitary2::identity();
    unitary_sweep(psi.as_slice(), d, x, |k, u| {
        if k == d {
            out = *u;
        }
    });
    out
}

/// `U_d(psi, x)`.
pub fn qsp_unitary(psi: &PhaseSequence, d: usize, x: f64) -> Result<Unitary2> {
    check_degree(psi, d)?;
    check_abscissa(x)?;
    Ok(unitary_unchecked(psi, d, x))
}

/// `Im u_d(psi, x)`, the imaginary part of the upper left entry.
pub fn qsp_response(psi: &PhaseSequence, d: usize, x: f64) -> Result<f64> {
    Ok(qsp_unitary(psi, d, x)?.upper_left().im)
}

/// Responses for all degrees `0..=d_max` at `x` in one pass. Phases past the
/// end of `psi` count as zero. Any `x` in `[-1, 1]` is accepted.
pub fn response_sweep(psi: &PhaseSequence, d_max: usize, x: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(d_max + 1);
    unitary_sweep(psi.as_slice(), d_max, x, |_, u| out.push(u.upper_left().im));
    out
}

/// Angle `theta` in `[0, pi/2]` with `cos(theta) = x`.
pub fn angle_of(x: f64) -> f64 {
    (1.0 - x * x).max(0.0).sqrt().atan2(x)
}

fn series_matrix(psi: &PhaseSequence, d: usize, theta: f64) -> Unitary2 {
    let f = phases_to_coeffs(&psi.padded(d));
    let z = Complex64::from_polar(1.0, 2.0 * theta);
    let (a, b) = nlfs_at(&f, z);
    Unitary2::new([[a, b], [-b.conj(), a.conj()]])
}

fn hadamard() -> Unitary2 {
    let h = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    Unitary2::new([[h, h], [h, -h]])
}

/// Max entrywise deviation between `M U_d M` and `D G_d(z) D`.
pub fn correspondence_check(psi: &PhaseSequence, d: usize, x: f64) -> Result<f64> {
    let u = qsp_unitary(psi, d, x)?;
    let theta = angle_of(x);
    let m = hadamard();
    let lhs = m.mul(&u).mul(&m);
    let e = Complex64::from_polar(1.0, d as f64 * theta);
    let dd = Unitary2::diag(e, e.conj());
    let rhs = dd.mul(&series_matrix(psi, d, theta)).mul(&dd);
    Ok(lhs.max_entry_distance(&rhs))
}

/// `Re u_d` against `Re(a(z) z^d)`; returns both values.
pub fn real_part_diagnostic(psi: &PhaseSequence, d: usize, x: f64) -> Result<(f64, f64)> {
    let u = qsp_unitary(psi, d, x)?;
    let theta = angle_of(x);
    let g = series_matrix(psi, d, theta);
    let zd = Complex64::from_polar(1.0, 2.0 * d as f64 * theta);
    Ok((u.upper_left().re, (g.m[0][0] * zd).re))
}

/// `F_n = i tan(psi_|n|)` on `[-K, K]`.
pub fn phases_to_coeffs(psi: &PhaseSequence) -> CoeffSequence {
    let k = psi.max_degree() as i64;
    CoeffSequence::from_fn(-k, k, |n| Complex64::new(0.0, psi.get(n.unsigned_abs() as usize).tan()))
}

/// `psi_n = arctan(F_n / i)` for an even, purely imaginary sequence.
pub fn coeffs_to_phases(f: &CoeffSequence) -> Result<PhaseSequence> {
    let k = f.start().unsigned_abs().max(f.end().unsigned_abs()) as i64;
    let mut deviation: f64 = 0.0;
    for n in 0..=k {
        let (p, q) = (f.get(n), f.get(-n));
        deviation = deviation.max((p - q).norm()).max(p.re.abs()).max(q.re.abs());
    }
    if deviation > SYMMETRY_TOL {
        return Err(Error::SymmetryViolation { deviation });
    }
    let phases = (0..=k)
        .map(|n| (0.5 * (f.get(n).im + f.get(-n).im)).atan())
        .collect();
    PhaseSequence::new(phases)
}
