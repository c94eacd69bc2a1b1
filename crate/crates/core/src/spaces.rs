//! Sobolev, Paley–Wiener and Besov norms for signals with a known finite spectrum.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::filters::{dyadic_scale_cap, FilterFamily};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SignalTag {
    Population,
    Empirical,
}

/// `f = Σ c_i v_i` against an orthonormal eigenbasis with eigenvalues `λ_i > 0`,
/// stored in descending eigenvalue order.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralSignal {
    eigenvalues: Vec<f64>,
    coeffs: Vec<f64>,
    tag: SignalTag,
}

impl SpectralSignal {
    /// Pairs are reordered by descending eigenvalue.
    pub fn new(eigenvalues: Vec<f64>, coeffs: Vec<f64>, tag: SignalTag) -> Result<Self> {
        if eigenvalues.len() != coeffs.len() {
            return Err(Error::DimensionMismatch {
                expected: eigenvalues.len(),
                found: coeffs.len(),
            });
        }
        if let Some(bad) = eigenvalues.iter().find(|l| !(**l > 0.0) || !l.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "eigenvalues must be positive, got {bad}"
            )));
        }
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidParameter(
                "coefficients must be finite".into(),
            ));
        }
        let mut pairs: Vec<(f64, f64)> = eigenvalues.into_iter().zip(coeffs).collect();
        pairs.sort_by(|a, b| b.0.total_cmp(&a.0));
        let (eigenvalues, coeffs) = pairs.into_iter().unzip();
        Ok(Self {
            eigenvalues,
            coeffs,
            tag,
        })
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn tag(&self) -> SignalTag {
        self.tag
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn hilbert_norm(&self) -> f64 {
        libm::sqrt(self.coeffs.iter().map(|c| c * c).sum())
    }

    /// `‖√T f‖_H`, the `L²(ρ)` norm of the signal.
    pub fn rho_norm(&self) -> f64 {
        libm::sqrt(
            self.eigenvalues
                .iter()
                .zip(&self.coeffs)
                .map(|(l, c)| l * c * c)
                .sum(),
        )
    }

    pub fn scaled(&self, a: f64) -> Self {
        Self {
            coeffs: self.coeffs.iter().map(|c| a * c).collect(),
            ..self.clone()
        }
    }

    /// Sum of two signals on the same spectrum.
    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.eigenvalues != other.eigenvalues {
            return Err(Error::InvalidParameter(
                "signals live on different spectra".into(),
            ));
        }
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| a + b)
            .collect();
        Ok(Self {
            coeffs,
            ..self.clone()
        })
    }

    /// `T^α f`.
    pub fn apply_power(&self, alpha: f64) -> Self {
        let coeffs = self
            .eigenvalues
            .iter()
            .zip(&self.coeffs)
            .map(|(l, c)| libm::pow(*l, alpha) * c)
            .collect();
        Self {
            coeffs,
            ..self.clone()
        }
    }
}

/// Besov smoothness `s > 0` and summability `q ∈ [1, ∞]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BesovParams {
    pub s: f64,
    pub q: f64,
}

impl BesovParams {
    pub fn new(s: f64, q: f64) -> Result<Self> {
        if !(s > 0.0) || !s.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "Besov smoothness must be positive, got {s}"
            )));
        }
        if !(q >= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "Besov q must be in [1, ∞], got {q}"
            )));
        }
        Ok(Self { s, q })
    }
}

/// A Besov norm together with the last scale index that entered the sum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BesovNorm {
    pub value: f64,
    pub last_scale: u32,
}

/// `(Σ λ_i^{−2α} c_i²)^{1/2}`.
pub fn sobolev_norm(f: &SpectralSignal, alpha: f64) -> f64 {
    libm::sqrt(
        f.eigenvalues
            .iter()
            .zip(&f.coeffs)
            .map(|(l, c)| libm::pow(*l, -2.0 * alpha) * c * c)
            .sum(),
    )
}

/// Paley–Wiener error `E(f, ω) = (Σ_{λ_i < 1/ω} c_i²)^{1/2}`.
pub fn approx_error(f: &SpectralSignal, omega: f64) -> f64 {
    let cut = 1.0 / omega;
    libm::sqrt(
        f.eigenvalues
            .iter()
            .zip(&f.coeffs)
            .filter(|(l, _)| **l < cut)
            .map(|(_, c)| c * c)
            .sum(),
    )
}

fn lq_accumulate(terms: impl Iterator<Item = f64>, q: f64) -> f64 {
    if q.is_infinite() {
        terms.fold(0.0, f64::max)
    } else {
        libm::pow(terms.map(|t| libm::pow(t, q)).sum::<f64>(), 1.0 / q)
    }
}

/// `‖f‖_H + ‖(2^{js} E(f, 2^j))_j‖_{ℓ^q}`, summed up to and including the first
/// scale where the error vanishes.
pub fn besov_norm_discrete(f: &SpectralSignal, p: BesovParams) -> BesovNorm {
    let mut terms = Vec::new();
    let mut j = 0u32;
    loop {
        let e = approx_error(f, libm::exp2(j as f64));
        terms.push(libm::exp2(j as f64 * p.s) * e);
        if e == 0.0 {
            break;
        }
        j += 1;
    }
    BesovNorm {
        value: f.hilbert_norm() + lq_accumulate(terms.into_iter(), p.q),
        last_scale: j,
    }
}

/// `‖F_j(T) f‖_H` for `j = 0..=J`, where `J` is the last scale that can be nonzero.
pub fn filtered_band_norms(f: &SpectralSignal, fam: &FilterFamily) -> Result<Vec<f64>> {
    if !fam.localized() {
        return Err(Error::NotLocalized);
    }
    let lmin = f.eigenvalues.last().copied().unwrap_or(1.0);
    let cap = dyadic_scale_cap(lmin);
    let mut out = Vec::with_capacity(cap as usize + 1);
    for j in 0..=cap {
        let mut s = 0.0;
        for (l, c) in f.eigenvalues.iter().zip(&f.coeffs) {
            let fj = fam.f_j(j, *l)?;
            s += fj * fj * c * c;
        }
        out.push(libm::sqrt(s));
    }
    Ok(out)
}

/// `‖f‖_H + ‖(2^{js} ‖F_j(T) f‖_H)_j‖_{ℓ^q}` for a spectrally localized family.
pub fn besov_norm_filtered(
    f: &SpectralSignal,
    p: BesovParams,
    fam: &FilterFamily,
) -> Result<BesovNorm> {
    let bands = filtered_band_norms(f, fam)?;
    let last_scale = bands.len().saturating_sub(1) as u32;
    let terms = bands
        .iter()
        .enumerate()
        .map(|(j, b)| libm::exp2(j as f64 * p.s) * b);
    Ok(BesovNorm {
        value: f.hilbert_norm() + lq_accumulate(terms, p.q),
        last_scale,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HardyReport {
    pub lhs: f64,
    pub rhs: f64,
    pub constant: f64,
}

impl HardyReport {
    /// `lhs ≤ rhs` up to a relative slack.
    pub fn holds(&self, rel_slack: f64) -> bool {
        self.lhs <= self.rhs * (1.0 + rel_slack)
    }
}

/// Discrete Hardy inequality with `b_j = (Σ_{k≥j} a_k^p)^{1/p}`:
/// `lhs = Σ (2^{js} b_j)^q`, `rhs = 2^{sq}/(2^{sq}−1) · Σ (2^{js} a_j)^q`.
pub fn hardy_check(a: &[f64], s: f64, q: f64, p: f64) -> Result<HardyReport> {
    if !(p > 0.0) || !(q >= p) || !q.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "Hardy check needs 0 < p ≤ q < ∞, got p={p}, q={q}"
        )));
    }
    if !(s > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "Hardy check needs s > 0, got {s}"
        )));
    }
    if a.iter().any(|x| !(*x >= 0.0)) {
        return Err(Error::InvalidParameter(
            "Hardy sequence must be nonnegative".into(),
        ));
    }
    let n = a.len();
    let mut b = alloc::vec![0.0; n];
    let mut tail = 0.0;
    for j in (0..n).rev() {
        tail += libm::pow(a[j], p);
        b[j] = libm::pow(tail, 1.0 / p);
    }
    let weight = |j: usize, x: f64| libm::pow(libm::exp2(j as f64 * s) * x, q);
    let lhs: f64 = b.iter().enumerate().map(|(j, x)| weight(j, *x)).sum();
    let base: f64 = a.iter().enumerate().map(|(j, x)| weight(j, *x)).sum();
    let r = libm::exp2(s * q);
    let constant = r / (r - 1.0);
    Ok(HardyReport {
        lhs,
        rhs: constant * base,
        constant,
    })
}
