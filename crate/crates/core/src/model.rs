//! Circle heat testbed with a closed-form population eigensystem, smoothness
//! schedules for the resolution `τ`, and log–log rate fitting.

use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::{PI, SQRT_2};

use crate::error::{Error, Result};
use crate::filters::FilterFamily;
use crate::kernels::{KernelSpec, PointSet};
use crate::spaces::{SignalTag, SpectralSignal};

/// Truncated heat kernel on the circle with uniform sampling measure.
///
/// Basis order is `m = 0`, then `(cos, sin)` pairs for `m = 1..=M`; this matches
/// [`KernelSpec::features`]. Eigenvalues are `λ_0 = 1` and `λ_m = e^{−t m²}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnalyticModel {
    pub time: f64,
    pub truncation: usize,
}

impl AnalyticModel {
    pub fn new(time: f64, truncation: usize) -> Result<Self> {
        KernelSpec::circle_heat(time, truncation)?;
        Ok(Self { time, truncation })
    }

    pub fn dim(&self) -> usize {
        2 * self.truncation + 1
    }

    pub fn kernel(&self) -> KernelSpec {
        KernelSpec::circle_heat(self.time, self.truncation).expect("validated in new")
    }

    pub fn kappa_sq(&self) -> f64 {
        self.kernel().kappa_sq()
    }

    fn frequency(i: usize) -> usize {
        i.div_ceil(2)
    }

    pub fn eigenvalue(&self, i: usize) -> f64 {
        let m = Self::frequency(i) as f64;
        libm::exp(-self.time * m * m)
    }

    /// Population eigenvalues in basis order (descending, pairs repeated).
    pub fn eigenvalues(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.eigenvalue(i)).collect()
    }

    /// `L²(ρ)`-orthonormal eigenfunction `u_i`: `1`, `√2 cos(mx)`, `√2 sin(mx)`.
    pub fn eigenfunction(&self, i: usize, x: f64) -> f64 {
        let m = Self::frequency(i) as f64;
        if i == 0 {
            1.0
        } else if i % 2 == 1 {
            SQRT_2 * libm::cos(m * x)
        } else {
            SQRT_2 * libm::sin(m * x)
        }
    }

    /// Value at `x` of the signal with coordinates `c` against the RKHS basis
    /// `v_i = √λ_i u_i`.
    pub fn eval(&self, c: &[f64], x: f64) -> f64 {
        c.iter()
            .enumerate()
            .map(|(i, ci)| ci * libm::sqrt(self.eigenvalue(i)) * self.eigenfunction(i, x))
            .sum()
    }

    /// `4M` equispaced nodes, on which the empirical covariance equals `T` exactly.
    pub fn quadrature_points(&self) -> PointSet {
        PointSet::circle_equispaced(4 * self.truncation).expect("M ≥ 1")
    }

    /// Uniform angles in `[0, 2π)` from unit-interval draws.
    pub fn points_from_uniform(&self, unit: &[f64]) -> Result<PointSet> {
        PointSet::circle(unit.iter().map(|u| (2.0 * PI * u) % (2.0 * PI)).collect())
    }
}

/// A source-condition signal `f = T^α h` with `‖h‖_H = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct SourceSignal {
    pub signal: SpectralSignal,
    pub alpha: f64,
    /// `‖T^{−α} f‖_H`, equal to one by construction.
    pub source_norm: f64,
}

/// Normalizes `h` and returns `f = T^α h`.
pub fn make_source_signal(model: &AnalyticModel, alpha: f64, h: &[f64]) -> Result<SourceSignal> {
    if !(alpha >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "source exponent must be nonnegative, got {alpha}"
        )));
    }
    if h.len() != model.dim() {
        return Err(Error::DimensionMismatch {
            expected: model.dim(),
            found: h.len(),
        });
    }
    let norm = libm::sqrt(h.iter().map(|x| x * x).sum());
    if !(norm > 0.0) {
        return Err(Error::InvalidParameter(
            "source coefficients are zero".into(),
        ));
    }
    let unit: Vec<f64> = h.iter().map(|x| x / norm).collect();
    let hs = SpectralSignal::new(model.eigenvalues(), unit, SignalTag::Population)?;
    Ok(SourceSignal {
        signal: hs.apply_power(alpha),
        alpha,
        source_norm: 1.0,
    })
}

/// `‖f − f̂‖_H` from population coordinates of both functions.
pub fn h_error(f: &SpectralSignal, fhat: &[f64]) -> Result<f64> {
    check_len(f, fhat)?;
    Ok(libm::sqrt(
        f.coeffs()
            .iter()
            .zip(fhat)
            .map(|(c, d)| (c - d) * (c - d))
            .sum(),
    ))
}

/// `‖f − f̂‖_ρ = ‖√T (f − f̂)‖_H`.
pub fn rho_error(f: &SpectralSignal, fhat: &[f64]) -> Result<f64> {
    check_len(f, fhat)?;
    Ok(libm::sqrt(
        f.eigenvalues()
            .iter()
            .zip(f.coeffs())
            .zip(fhat)
            .map(|((l, c), d)| l * (c - d) * (c - d))
            .sum(),
    ))
}

/// Approximation part `‖(I − T g_τ(T)) f‖_H`.
pub fn approximation_error(f: &SpectralSignal, fam: &FilterFamily, tau: u32) -> f64 {
    libm::sqrt(
        f.eigenvalues()
            .iter()
            .zip(f.coeffs())
            .map(|(l, c)| {
                let r = fam.residual(tau, *l) * c;
                r * r
            })
            .sum(),
    )
}

/// Estimation part `‖(T g_τ(T) − T̂ g_τ(T̂)) f‖_H`, where `fhat` holds the population
/// coordinates of `T̂ g_τ(T̂) f`.
pub fn estimation_error(
    f: &SpectralSignal,
    fam: &FilterFamily,
    tau: u32,
    fhat: &[f64],
) -> Result<f64> {
    check_len(f, fhat)?;
    Ok(libm::sqrt(
        f.eigenvalues()
            .iter()
            .zip(f.coeffs())
            .zip(fhat)
            .map(|((l, c), d)| {
                let e = fam.lambda_g(tau, *l) * c - d;
                e * e
            })
            .sum(),
    ))
}

fn check_len(f: &SpectralSignal, fhat: &[f64]) -> Result<()> {
    if f.len() != fhat.len() {
        return Err(Error::DimensionMismatch {
            expected: f.len(),
            found: fhat.len(),
        });
    }
    Ok(())
}

/// `⌈x⌉`, treating values within `1e-9` relative of an integer as that integer.
fn ceil_tolerant(x: f64) -> f64 {
    let r = libm::round(x);
    if (x - r).abs() <= 1e-9 * r.abs().max(1.0) {
        r
    } else {
        libm::ceil(x)
    }
}

/// `τ = ⌈N^{1/(2(β+p))}⌉`.
pub fn tau_schedule_sobolev(n: usize, beta: f64, p: f64) -> u32 {
    let e = 1.0 / (2.0 * (beta + p));
    ceil_tolerant(libm::pow(n as f64, e)) as u32
}

/// `τ = ⌈log₂(N)/(2s+2)⌉`.
pub fn tau_schedule_besov(n: usize, s: f64) -> u32 {
    ceil_tolerant(libm::log2(n.max(1) as f64) / (2.0 * s + 2.0)).max(0.0) as u32
}

/// Theoretical `H`-norm exponent `−β/(2(β+p))` with `β = min(α, ν)`.
pub fn theoretical_slope_h(alpha: f64, nu: f64, p: f64) -> f64 {
    let beta = alpha.min(nu);
    -beta / (2.0 * (beta + p))
}

/// Theoretical `L²(ρ)` exponent with `β = min(α + 1/2, ν)`.
pub fn theoretical_slope_rho(alpha: f64, nu: f64, p: f64) -> f64 {
    theoretical_slope_h(alpha + 0.5, nu, p)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateFit {
    pub slope: f64,
    pub intercept: f64,
    /// Root mean square of the log-space residuals.
    pub residual: f64,
    pub theoretical: f64,
}

/// Least-squares fit of `log(err) = intercept + slope · log(N)`.
pub fn fit_rate(points: &[(f64, f64)], theoretical: f64) -> Result<RateFit> {
    let mut ns: Vec<f64> = points.iter().map(|p| p.0).collect();
    ns.sort_by(f64::total_cmp);
    ns.dedup();
    if ns.len() < 3 {
        return Err(Error::InsufficientData {
            needed: 3,
            found: ns.len(),
        });
    }
    if let Some(bad) = points.iter().find(|p| !(p.0 > 0.0) || !(p.1 > 0.0)) {
        return Err(Error::InvalidParameter(format!(
            "rate fit needs positive N and error, got {bad:?}"
        )));
    }
    let xs: Vec<f64> = points.iter().map(|p| libm::log(p.0)).collect();
    let ys: Vec<f64> = points.iter().map(|p| libm::log(p.1)).collect();
    let m = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / m, ys.iter().sum::<f64>() / m);
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| {
            let r = y - intercept - slope * x;
            r * r
        })
        .sum();
    Ok(RateFit {
        slope,
        intercept,
        residual: libm::sqrt(ss / m),
        theoretical,
    })
}

/// `r(T) = Σ λ_i / λ_max`.
pub fn effective_rank(spectrum: &[f64]) -> Result<f64> {
    let max = spectrum.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if spectrum.is_empty() {
        return Err(Error::Empty("spectrum"));
    }
    if !(max > 0.0) {
        return Err(Error::InvalidParameter(
            "spectrum has no positive eigenvalue".into(),
        ));
    }
    Ok(spectrum.iter().filter(|l| **l > 0.0).sum::<f64>() / max)
}

/// Median of a nonempty slice (mean of the middle pair for even length).
pub fn median(values: &[f64]) -> f64 {
    quantile(values, 0.5)
}

/// Linear-interpolation quantile `q ∈ [0, 1]` of a nonempty slice.
pub fn quantile(values: &[f64], q: f64) -> f64 {
    let mut v: Vec<f64> = values.to_vec();
    v.sort_by(f64::total_cmp);
    if v.is_empty() {
        return f64::NAN;
    }
    let pos = q.clamp(0.0, 1.0) * (v.len() - 1) as f64;
    let lo = libm::floor(pos) as usize;
    let hi = libm::ceil(pos) as usize;
    v[lo] + (pos - lo as f64) * (v[hi] - v[lo])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn schedules() {
        assert_eq!(tau_schedule_sobolev(16, 1.0, 1.0), 2);
        assert_eq!(tau_schedule_sobolev(1, 1.0, 1.0), 1);
        assert_eq!(tau_schedule_sobolev(17, 1.0, 1.0), 3);
        assert_eq!(tau_schedule_besov(1 << 12, 1.0), 3);
        assert_eq!(tau_schedule_besov(1, 1.0), 0);
        let s: Vec<u32> = [64, 128, 256, 512, 1024, 2048]
            .iter()
            .map(|&n| tau_schedule_sobolev(n, 1.0, 1.0))
            .collect();
        assert_eq!(s, vec![3, 4, 4, 5, 6, 7]);
    }

    #[test]
    fn exact_power_law_fit() {
        let pts: Vec<(f64, f64)> = [64.0, 128.0, 256.0, 512.0]
            .iter()
            .map(|&n| (n, libm::pow(n, -0.25)))
            .collect();
        let f = fit_rate(&pts, -0.25).unwrap();
        assert!((f.slope + 0.25).abs() < 1e-12);
        let flat: Vec<(f64, f64)> = [10.0, 20.0, 40.0].iter().map(|&n| (n, 0.3)).collect();
        assert!(fit_rate(&flat, 0.0).unwrap().slope.abs() < 1e-12);
        assert!(matches!(
            fit_rate(&pts[..2], 0.0),
            Err(Error::InsufficientData { .. })
        ));
        assert_eq!(theoretical_slope_h(1.0, f64::INFINITY, 1.0), -0.25);
    }

    #[test]
    fn effective_rank_examples() {
        assert_eq!(effective_rank(&[2.0; 7]).unwrap(), 7.0);
        assert_eq!(effective_rank(&[0.3]).unwrap(), 1.0);
        let m = AnalyticModel::new(0.1, 64).unwrap();
        let direct: f64 = 1.0
            + 2.0
                * (1..=64)
                    .map(|k| libm::exp(-0.1 * (k * k) as f64))
                    .sum::<f64>();
        assert!((effective_rank(&m.eigenvalues()).unwrap() - direct).abs() < 1e-12);
    }

    #[test]
    fn source_signal_examples() {
        let m = AnalyticModel::new(0.1, 4).unwrap();
        let mut h = alloc::vec![0.0; m.dim()];
        h[3] = 2.0;
        let f = make_source_signal(&m, 1.0, &h).unwrap();
        assert!((f.signal.coeffs()[3] - libm::exp(-0.4)).abs() < 1e-15);
        let f0 = make_source_signal(&m, 0.0, &h).unwrap();
        assert_eq!(f0.signal.coeffs()[3], 1.0);
    }

    #[test]
    fn quantiles() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), 2.5);
        assert!((quantile(&[0.0, 10.0], 0.1) - 1.0).abs() < 1e-15);
    }
}
