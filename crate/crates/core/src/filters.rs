//! Spectral-function families `g_j`, filters `G_j` and `F_j = √λ G_j`.
//!
//! Every family is defined on `[0, κ²]`, with `g_0 ≡ 0` except for the dyadic one. Values at `λ = 0` are the
//! continuous limits. The ν-method and Nesterov families are marked
//! [experimental](FilterFamily::experimental): their residual polynomials change
//! sign, so `g_j` is not monotone in `j` and `G_j` may not exist.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Radicands in `[-RADICAND_CLAMP, 0)` are treated as zero.
pub const RADICAND_CLAMP: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FilterKind {
    Tikhonov,
    IteratedTikhonov {
        m: u32,
    },
    /// Requires `0 < γ < 1/κ²`.
    Landweber {
        gamma: f64,
    },
    Asymptotic,
    /// Heavy-ball acceleration with the ν-method coefficients.
    NuMethod {
        nu: f64,
    },
    /// Nesterov momentum with parameter `β ≥ 1` and step `0.9/κ²`.
    Nesterov {
        beta: f64,
    },
    /// `λ g_j(λ) = bump(2^j λ)`.
    Dyadic,
}

/// How the Lipschitz constant of `λ ↦ λ g_τ(λ)` grows with `τ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LipschitzGrowth {
    /// `L(τ) ≤ c·τ`.
    Linear { c: f64 },
    /// `L(τ) ≤ c·τ²`.
    Quadratic { c: f64 },
    /// `L(τ) ≤ c·2^τ`.
    Exponential { c: f64 },
}

impl LipschitzGrowth {
    pub fn exponent(&self) -> Option<f64> {
        match self {
            LipschitzGrowth::Linear { .. } => Some(1.0),
            LipschitzGrowth::Quadratic { .. } => Some(2.0),
            LipschitzGrowth::Exponential { .. } => None,
        }
    }

    pub fn bound(&self, tau: u32) -> f64 {
        let t = tau as f64;
        match *self {
            LipschitzGrowth::Linear { c } => c * t,
            LipschitzGrowth::Quadratic { c } => c * t * t,
            LipschitzGrowth::Exponential { c } => c * libm::exp2(t),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FilterFamily {
    kind: FilterKind,
    kappa_sq: f64,
}

impl FilterFamily {
    pub fn new(kind: FilterKind, kappa_sq: f64) -> Result<Self> {
        if !(kappa_sq > 0.0) || !kappa_sq.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "kappa² must be positive, got {kappa_sq}"
            )));
        }
        match kind {
            FilterKind::IteratedTikhonov { m: 0 } => {
                return Err(Error::InvalidParameter(
                    "iterated Tikhonov needs m ≥ 1".into(),
                ));
            }
            FilterKind::Landweber { gamma } if !(gamma > 0.0 && gamma * kappa_sq < 1.0) => {
                return Err(Error::InvalidParameter(format!(
                    "Landweber step {gamma} must lie in (0, 1/κ²) = (0, {})",
                    1.0 / kappa_sq
                )));
            }
            FilterKind::NuMethod { nu } if !(nu > 0.0) => {
                return Err(Error::InvalidParameter(format!(
                    "ν-method needs ν > 0, got {nu}"
                )));
            }
            FilterKind::Nesterov { beta } if !(beta >= 1.0) => {
                return Err(Error::InvalidParameter(format!(
                    "Nesterov needs β ≥ 1, got {beta}"
                )));
            }
            _ => {}
        }
        Ok(Self { kind, kappa_sq })
    }

    pub fn tikhonov(kappa_sq: f64) -> Result<Self> {
        Self::new(FilterKind::Tikhonov, kappa_sq)
    }

    /// Landweber with the conventional step `γ = 0.9/κ²`.
    pub fn landweber_default(kappa_sq: f64) -> Result<Self> {
        Self::new(
            FilterKind::Landweber {
                gamma: 0.9 / kappa_sq,
            },
            kappa_sq,
        )
    }

    pub fn dyadic(kappa_sq: f64) -> Result<Self> {
        Self::new(FilterKind::Dyadic, kappa_sq)
    }

    /// Parses `tikhonov`, `iter-tikhonov:m`, `landweber[:gamma]`, `asymptotic`,
    /// `nu-method:nu`, `nesterov:beta` or `dyadic`.
    pub fn parse(name: &str, kappa_sq: f64) -> Result<Self> {
        let (head, arg) = match name.trim().split_once(':') {
            Some((h, a)) => (h.trim(), Some(a.trim())),
            None => (name.trim(), None),
        };
        let num = |what: &str| -> Result<f64> {
            let a = arg.ok_or_else(|| {
                Error::InvalidParameter(format!("`{head}` needs a {what} argument"))
            })?;
            a.parse::<f64>()
                .map_err(|_| Error::InvalidParameter(format!("bad {what} `{a}` in `{name}`")))
        };
        let no_arg = |kind: FilterKind| -> Result<FilterKind> {
            match arg {
                None => Ok(kind),
                Some(a) => Err(Error::InvalidParameter(format!(
                    "`{head}` takes no argument, got `{a}`"
                ))),
            }
        };
        let kind = match head {
            "tikhonov" => no_arg(FilterKind::Tikhonov)?,
            "asymptotic" => no_arg(FilterKind::Asymptotic)?,
            "dyadic" => no_arg(FilterKind::Dyadic)?,
            "iter-tikhonov" => {
                let a =
                    arg.ok_or_else(|| Error::InvalidParameter("`iter-tikhonov` needs m".into()))?;
                let m = a
                    .parse::<u32>()
                    .map_err(|_| Error::InvalidParameter(format!("bad m `{a}`")))?;
                FilterKind::IteratedTikhonov { m }
            }
            "landweber" => match arg {
                None => FilterKind::Landweber {
                    gamma: 0.9 / kappa_sq,
                },
                Some(_) => FilterKind::Landweber {
                    gamma: num("gamma")?,
                },
            },
            "nu-method" => FilterKind::NuMethod { nu: num("nu")? },
            "nesterov" => FilterKind::Nesterov { beta: num("beta")? },
            _ => {
                return Err(Error::InvalidParameter(format!(
                    "unknown filter family `{name}`"
                )))
            }
        };
        Self::new(kind, kappa_sq)
    }

    /// Canonical name accepted by [`FilterFamily::parse`].
    pub fn name(&self) -> alloc::string::String {
        match self.kind {
            FilterKind::Tikhonov => "tikhonov".into(),
            FilterKind::IteratedTikhonov { m } => format!("iter-tikhonov:{m}"),
            FilterKind::Landweber { gamma } => format!("landweber:{gamma}"),
            FilterKind::Asymptotic => "asymptotic".into(),
            FilterKind::NuMethod { nu } => format!("nu-method:{nu}"),
            FilterKind::Nesterov { beta } => format!("nesterov:{beta}"),
            FilterKind::Dyadic => "dyadic".into(),
        }
    }

    pub fn kind(&self) -> FilterKind {
        self.kind
    }

    pub fn kappa_sq(&self) -> f64 {
        self.kappa_sq
    }

    /// Dyadic filters have `F_j` supported on dyadic bands.
    pub fn localized(&self) -> bool {
        matches!(self.kind, FilterKind::Dyadic)
    }

    /// Accelerated families whose `g_j` need not be monotone in `j`.
    pub fn experimental(&self) -> bool {
        matches!(
            self.kind,
            FilterKind::NuMethod { .. } | FilterKind::Nesterov { .. }
        )
    }

    /// Step used by the Nesterov recursion.
    pub fn nesterov_step(&self) -> f64 {
        0.9 / self.kappa_sq
    }

    /// Declared qualification `ν` (`+∞` when unbounded). For Nesterov this is the
    /// guaranteed lower value `1/2`.
    pub fn qualification(&self) -> f64 {
        match self.kind {
            FilterKind::Tikhonov => 1.0,
            FilterKind::IteratedTikhonov { m } => m as f64,
            FilterKind::Landweber { .. } | FilterKind::Asymptotic | FilterKind::Dyadic => {
                f64::INFINITY
            }
            FilterKind::NuMethod { nu } => nu,
            FilterKind::Nesterov { .. } => 0.5,
        }
    }

    /// Reference growth of the Lipschitz constant of `λ g_τ(λ)` on `[0, κ²]`.
    ///
    /// The accelerated families use Markov's inequality for the degree-`τ`
    /// residual polynomial, assuming it is bounded by one on `[0, κ²]`.
    pub fn lipschitz_growth(&self) -> LipschitzGrowth {
        match self.kind {
            FilterKind::Tikhonov | FilterKind::Asymptotic => LipschitzGrowth::Linear { c: 1.0 },
            FilterKind::IteratedTikhonov { m } => LipschitzGrowth::Linear { c: m as f64 },
            FilterKind::Landweber { gamma } => LipschitzGrowth::Linear { c: gamma },
            FilterKind::NuMethod { .. } | FilterKind::Nesterov { .. } => {
                LipschitzGrowth::Quadratic {
                    c: 2.0 / self.kappa_sq,
                }
            }
            FilterKind::Dyadic => LipschitzGrowth::Exponential {
                c: bump_slope_bound(),
            },
        }
    }

    /// `g_j(λ)`.
    pub fn g(&self, j: u32, lambda: f64) -> f64 {
        if j == 0 && !self.localized() {
            return 0.0;
        }
        let jf = j as f64;
        match self.kind {
            FilterKind::Tikhonov => 1.0 / (lambda + 1.0 / jf),
            FilterKind::IteratedTikhonov { m } => {
                let eps = 1.0 / jf;
                if lambda == 0.0 {
                    return m as f64 * jf;
                }
                // ((λ+ε)^m − ε^m) / (λ (λ+ε)^m) = (1 − (1 − λ/(λ+ε))^m) / λ
                -libm::expm1(m as f64 * libm::log1p(-lambda / (lambda + eps))) / lambda
            }
            FilterKind::Landweber { gamma } => {
                if lambda == 0.0 {
                    return gamma * jf;
                }
                -libm::expm1(jf * libm::log1p(-gamma * lambda)) / lambda
            }
            FilterKind::Asymptotic => {
                if lambda == 0.0 {
                    return jf;
                }
                -libm::expm1(-jf * lambda) / lambda
            }
            FilterKind::NuMethod { nu } => nu_method(nu, self.kappa_sq, j, lambda).0,
            FilterKind::Nesterov { beta } => nesterov(beta, self.nesterov_step(), j, lambda).0,
            FilterKind::Dyadic => {
                if lambda <= 0.0 {
                    return 0.0;
                }
                smooth_bump(libm::ldexp(lambda, j as i32)) / lambda
            }
        }
    }

    /// `g_j(λ) − g_{j−1}(λ)` (with `g_{−1} := 0`), in closed form where one exists.
    /// May be negative for experimental families.
    pub fn increment(&self, j: u32, lambda: f64) -> f64 {
        if j == 0 {
            return self.g(0, lambda);
        }
        let jf = j as f64;
        match self.kind {
            FilterKind::Tikhonov if j > 1 => {
                let (a, b) = (1.0 / (jf - 1.0), 1.0 / jf);
                (a - b) / ((lambda + a) * (lambda + b))
            }
            FilterKind::Landweber { gamma } => gamma * libm::pow(1.0 - gamma * lambda, jf - 1.0),
            FilterKind::Asymptotic => {
                if lambda == 0.0 {
                    return 1.0;
                }
                libm::exp(-(jf - 1.0) * lambda) * (-libm::expm1(-lambda)) / lambda
            }
            FilterKind::NuMethod { nu } => {
                let (g, prev) = nu_method(nu, self.kappa_sq, j, lambda);
                g - prev
            }
            FilterKind::Nesterov { beta } => {
                let (g, prev) = nesterov(beta, self.nesterov_step(), j, lambda);
                g - prev
            }
            FilterKind::Dyadic => {
                if lambda <= 0.0 {
                    return 0.0;
                }
                (smooth_bump(libm::ldexp(lambda, j as i32))
                    - smooth_bump(libm::ldexp(lambda, j as i32 - 1)))
                    / lambda
            }
            _ => self.g(j, lambda) - self.g(j - 1, lambda),
        }
    }

    /// `G_j(λ) = √(g_j − g_{j−1})`.
    pub fn big_g(&self, j: u32, lambda: f64) -> Result<f64> {
        let r = self.increment(j, lambda);
        if r >= 0.0 {
            Ok(libm::sqrt(r))
        } else if r >= -RADICAND_CLAMP {
            Ok(0.0)
        } else {
            Err(Error::MonotonicityViolation {
                scale: j as usize,
                lambda,
                radicand: r,
            })
        }
    }

    /// `F_j(λ) = √λ·G_j(λ)`.
    pub fn f_j(&self, j: u32, lambda: f64) -> Result<f64> {
        Ok(libm::sqrt(lambda.max(0.0)) * self.big_g(j, lambda)?)
    }

    /// `λ g_j(λ)`.
    pub fn lambda_g(&self, j: u32, lambda: f64) -> f64 {
        match self.kind {
            FilterKind::Dyadic if lambda > 0.0 => smooth_bump(libm::ldexp(lambda, j as i32)),
            _ => lambda * self.g(j, lambda),
        }
    }

    /// `1 − λ g_j(λ)`, computed without cancellation where possible.
    pub fn residual(&self, j: u32, lambda: f64) -> f64 {
        let jf = j as f64;
        match self.kind {
            FilterKind::Dyadic => 1.0 - self.lambda_g(j, lambda),
            _ if j == 0 => 1.0,
            FilterKind::Tikhonov => 1.0 / (1.0 + jf * lambda),
            FilterKind::IteratedTikhonov { m } => libm::pow(1.0 / (1.0 + jf * lambda), m as f64),
            FilterKind::Landweber { gamma } => libm::pow(1.0 - gamma * lambda, jf),
            FilterKind::Asymptotic => libm::exp(-jf * lambda),
            _ => 1.0 - self.lambda_g(j, lambda),
        }
    }

    /// Largest `j` at which a dyadic filter can be nonzero for spectra bounded
    /// below by `lambda_min`; `None` for families with unbounded support.
    pub fn max_active_scale(&self, lambda_min: f64) -> Option<u32> {
        match self.kind {
            FilterKind::Dyadic => Some(dyadic_scale_cap(lambda_min)),
            _ => None,
        }
    }
}

/// ν-method values `(g_j, g_{j−1})` with Engl–Hanke–Neubauer coefficients.
fn nu_method(nu: f64, kappa_sq: f64, j: u32, lambda: f64) -> (f64, f64) {
    let (mut prev, mut cur) = (0.0, 0.0);
    for k in 1..=j {
        let kf = k as f64;
        let (mu, omega) = if k == 1 {
            (0.0, (4.0 * nu + 2.0) / (4.0 * nu + 1.0))
        } else {
            let mu = (kf - 1.0) * (2.0 * kf - 3.0) * (2.0 * kf + 2.0 * nu - 1.0)
                / ((kf + 2.0 * nu - 1.0)
                    * (2.0 * kf + 4.0 * nu - 1.0)
                    * (2.0 * kf + 2.0 * nu - 3.0));
            let omega = 4.0 * (2.0 * kf + 2.0 * nu - 1.0) * (kf + nu - 1.0)
                / ((kf + 2.0 * nu - 1.0) * (2.0 * kf + 4.0 * nu - 1.0));
            (mu, omega)
        };
        let a = omega / kappa_sq;
        let next = (1.0 + mu - a * lambda) * cur - mu * prev + a;
        prev = cur;
        cur = next;
    }
    (cur, prev)
}

/// Nesterov values `(g_j, g_{j−1})` from the momentum recursion.
fn nesterov(beta: f64, gamma: f64, j: u32, lambda: f64) -> (f64, f64) {
    let (mut prev, mut cur) = (0.0, 0.0);
    for k in 1..=j {
        let kf = k as f64;
        let momentum = (kf - 2.0) / (kf - 1.0 + beta);
        let next = (1.0 - gamma * lambda) * (cur + momentum * (cur - prev)) + gamma;
        prev = cur;
        cur = next;
    }
    (cur, prev)
}

fn bump_s(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        libm::exp(-1.0 / x)
    }
}

/// Smooth monotone step: `0` on `(−∞, 1/2]`, `1` on `[1, ∞)`,
/// `s(2λ−1) / (s(2λ−1) + s(2−2λ))` in between, with `s(x) = e^{−1/x}`.
pub fn smooth_bump(lambda: f64) -> f64 {
    if lambda <= 0.5 {
        0.0
    } else if lambda >= 1.0 {
        1.0
    } else {
        let a = bump_s(2.0 * lambda - 1.0);
        let b = bump_s(2.0 - 2.0 * lambda);
        a / (a + b)
    }
}

/// Sup of `|bump'|` on `(1/2, 1)` estimated by central differences (about `4`).
pub fn bump_slope_bound() -> f64 {
    const STEPS: usize = 20_000;
    let h = 0.5 / STEPS as f64;
    let mut best: f64 = 0.0;
    for i in 1..STEPS {
        let x = 0.5 + i as f64 * h;
        let d = (smooth_bump(x + 0.25 * h) - smooth_bump(x - 0.25 * h)) / (0.5 * h);
        best = best.max(d.abs());
    }
    best
}

/// `J(λ) = ⌈log₂(1/λ)⌉ + 1`: for `j ≥ J(λ)`, `F_j(λ) = 0` and `λ g_j(λ) = 1`.
pub fn dyadic_scale_cap(lambda: f64) -> u32 {
    if !(lambda > 0.0) {
        return u32::MAX;
    }
    let v = libm::ceil(-libm::log2(lambda)) + 1.0;
    if v <= 0.0 {
        0
    } else {
        v as u32
    }
}

/// `sup_grid λ^ν |1 − λ g_j(λ)|`.
pub fn qualification_sup(fam: &FilterFamily, nu: f64, j: u32, grid: &[f64]) -> f64 {
    grid.iter()
        .map(|&l| libm::pow(l, nu) * fam.residual(j, l).abs())
        .fold(0.0, f64::max)
}

/// Max over adjacent grid pairs of `|Δ(λ g_τ(λ)) / Δλ|`. The grid is sorted first and
/// points within `1e-9` relative of their predecessor are merged, since rounding in
/// the values dominates such quotients.
pub fn lipschitz_estimate(fam: &FilterFamily, tau: u32, grid: &[f64]) -> f64 {
    let mut pts: Vec<f64> = grid.to_vec();
    pts.sort_by(f64::total_cmp);
    pts.dedup_by(|b, a| (*b - *a).abs() <= 1e-9 * a.abs().max(b.abs()));
    let vals: Vec<f64> = pts.iter().map(|&l| fam.lambda_g(tau, l)).collect();
    let mut best: f64 = 0.0;
    for i in 1..pts.len() {
        let slope = (vals[i] - vals[i - 1]) / (pts[i] - pts[i - 1]);
        best = best.max(slope.abs());
    }
    best
}

/// `n` equispaced points on `[0, κ²]`.
pub fn uniform_grid(kappa_sq: f64, n: usize) -> Vec<f64> {
    if n < 2 {
        return alloc::vec![kappa_sq];
    }
    (0..n)
        .map(|i| kappa_sq * i as f64 / (n - 1) as f64)
        .collect()
}

/// `n` log-spaced points on `[lo, hi]`, `0 < lo < hi`.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n < 2 {
        return alloc::vec![hi];
    }
    let (a, b) = (libm::log(lo), libm::log(hi));
    (0..n)
        .map(|i| libm::exp(a + (b - a) * i as f64 / (n - 1) as f64))
        .collect()
}
