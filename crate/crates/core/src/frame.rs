//! Monte Carlo wavelet frames on a sample `x_1, …, x_N`.
//!
//! Conventions. `U` holds Euclidean-orthonormal eigenvectors `u_i` of `N⁻¹K` with
//! eigenvalues `λ̂_i`; the `1/N`-normalized vectors are `û_i = √N u_i`. A function
//! in the sample span is stored as a [`KernelExpansion`] `Σ_ℓ a_ℓ K(·, x_ℓ)`.
//!
//! * atom `ψ̂_{j,k} = G_j(T̂) K_{x_k}` has coefficients `Σ_i G_j(λ̂_i) u_i[k] u_i`;
//! * analysis `c[j] = U G_j(Λ) Uᵀ y`;
//! * reconstruction `a = N⁻¹ U g_τ(Λ) Uᵀ y`.
//!
//! Eigenpairs with `λ̂_i < drop_threshold` are left out of everything that divides
//! by `√λ̂_i` (atoms, eigenfunctions, synthesis, the Parseval norm) but not out of
//! the plain spectral maps.

use alloc::vec;
use alloc::vec::Vec;

use crate::eigensolve::{default_clamp_floor, sym_eig, EigenSystem};
use crate::error::{Error, Result};
use crate::filters::{dyadic_scale_cap, FilterFamily};
use crate::kernels::{KernelSpec, Point, PointSet};
use crate::linalg::{dot, Matrix};

/// Relative drop threshold: `drop_threshold = DEFAULT_DROP_RELATIVE · λ̂_max`.
pub const DEFAULT_DROP_RELATIVE: f64 = 1e-12;

/// `f = Σ_ℓ coeffs[ℓ] K(·, x_ℓ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelExpansion {
    pub pts: PointSet,
    pub coeffs: Vec<f64>,
    pub kernel: KernelSpec,
}

impl KernelExpansion {
    pub fn new(kernel: KernelSpec, pts: PointSet, coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.len() != pts.len() {
            return Err(Error::DimensionMismatch {
                expected: pts.len(),
                found: coeffs.len(),
            });
        }
        Ok(Self {
            pts,
            coeffs,
            kernel,
        })
    }

    pub fn eval(&self, x: Point<'_>) -> Result<f64> {
        let mut s = 0.0;
        for (xl, a) in self.pts.iter().zip(&self.coeffs) {
            if *a != 0.0 {
                s += a * self.kernel.eval(x, xl)?;
            }
        }
        Ok(s)
    }

    /// Values at every point of `at`.
    pub fn eval_on(&self, at: &PointSet) -> Result<Vec<f64>> {
        at.iter().map(|x| self.eval(x)).collect()
    }

    /// `‖f‖²_H = aᵀ K a`.
    pub fn hilbert_norm_sq(&self) -> Result<f64> {
        let k = self.kernel.kernel_matrix(&self.pts)?;
        Ok(dot(&self.coeffs, &k.matvec(&self.coeffs)?))
    }

    /// Coordinates against an explicit feature map: `Σ_ℓ a_ℓ φ(x_ℓ)`. For the
    /// circle heat kernel these are the inner products with the population
    /// eigenfunctions.
    pub fn feature_coordinates(&self) -> Result<Vec<f64>> {
        let d = self
            .kernel
            .feature_dim()
            .ok_or_else(|| Error::InvalidParameter("kernel has no finite feature map".into()))?;
        let mut out = vec![0.0; d];
        for (x, a) in self.pts.iter().zip(&self.coeffs) {
            let phi = self.kernel.features(x)?.expect("feature_dim is Some");
            for (o, p) in out.iter_mut().zip(&phi) {
                *o += a * p;
            }
        }
        Ok(out)
    }
}

/// `c[j][k] = ⟨f, ψ̂_{j,k}⟩_H` for `j = 0..=τ`.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveletCoefficients {
    pub tau: u32,
    pub coeffs: Vec<Vec<f64>>,
}

impl WaveletCoefficients {
    /// `Σ_j N⁻¹ Σ_k c[j][k]²`.
    pub fn energy(&self) -> f64 {
        self.coeffs
            .iter()
            .map(|row| row.iter().map(|c| c * c).sum::<f64>() / row.len().max(1) as f64)
            .sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParsevalReport {
    /// `Σ_{j≤τ} N⁻¹ Σ_k c[j][k]²`.
    pub lhs: f64,
    /// `‖f‖²_H` of the sample-span function with samples `y`.
    pub rhs: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalFrame {
    pts: PointSet,
    kernel: KernelSpec,
    filters: FilterFamily,
    eig: EigenSystem,
    drop_threshold: f64,
    retained: usize,
}

/// Builds a frame from the dense kernel matrix. `drop_threshold = None` selects
/// `1e-12 · λ̂_max`.
pub fn build_frame(
    kernel: &KernelSpec,
    pts: &PointSet,
    filters: FilterFamily,
    drop_threshold: Option<f64>,
) -> Result<EmpiricalFrame> {
    let n = pts.len();
    if n == 0 {
        return Err(Error::Empty("point set"));
    }
    let k = kernel.kernel_matrix(pts)?.scale(1.0 / n as f64);
    let floor = default_clamp_floor(&k);
    let eig = sym_eig(&k, floor)?;
    EmpiricalFrame::from_parts(kernel.clone(), pts.clone(), filters, eig, drop_threshold)
}

impl EmpiricalFrame {
    /// Assembles a frame from a precomputed eigensystem of `N⁻¹K`.
    pub fn from_parts(
        kernel: KernelSpec,
        pts: PointSet,
        filters: FilterFamily,
        eig: EigenSystem,
        drop_threshold: Option<f64>,
    ) -> Result<Self> {
        if eig.dim() != pts.len() {
            return Err(Error::DimensionMismatch {
                expected: pts.len(),
                found: eig.dim(),
            });
        }
        let lmax = eig.values.first().copied().unwrap_or(0.0);
        let drop_threshold = drop_threshold.unwrap_or(DEFAULT_DROP_RELATIVE * lmax);
        let retained = eig
            .values
            .iter()
            .take_while(|&&l| l >= drop_threshold && l > 0.0)
            .count();
        if retained == 0 {
            return Err(Error::EmptySpectrum);
        }
        Ok(Self {
            pts,
            kernel,
            filters,
            eig,
            drop_threshold,
            retained,
        })
    }

    /// Builds the frame through an explicit feature map `φ: X → R^D` instead of
    /// the `N × N` kernel matrix: with `Φ` the `N × D` feature matrix,
    /// `C = N⁻¹ΦᵀΦ = W Σ Wᵀ` shares its nonzero spectrum with `N⁻¹K` and
    /// `u_i = Φ w_i / √(N σ_i)`. Only eigenpairs at or above the drop threshold are
    /// stored.
    pub fn from_features(
        kernel: &KernelSpec,
        pts: &PointSet,
        filters: FilterFamily,
        drop_threshold: Option<f64>,
    ) -> Result<Self> {
        let n = pts.len();
        if n == 0 {
            return Err(Error::Empty("point set"));
        }
        let d = kernel
            .feature_dim()
            .ok_or_else(|| Error::InvalidParameter("kernel has no finite feature map".into()))?;
        let mut phi = Matrix::zeros(n, d);
        for (i, x) in pts.iter().enumerate() {
            let f = kernel.features(x)?.expect("feature_dim is Some");
            for (c, v) in f.into_iter().enumerate() {
                phi[(i, c)] = v;
            }
        }
        let cov = phi.transpose().matmul(&phi)?.scale(1.0 / n as f64);
        let eig = sym_eig(&cov, default_clamp_floor(&cov))?;
        let lmax = eig.values.first().copied().unwrap_or(0.0);
        let threshold = drop_threshold.unwrap_or(DEFAULT_DROP_RELATIVE * lmax);
        let keep = eig
            .values
            .iter()
            .take_while(|&&l| l >= threshold && l > 0.0)
            .count();
        if keep == 0 {
            return Err(Error::EmptySpectrum);
        }
        let mut vectors = Matrix::zeros(n, keep);
        for i in 0..keep {
            let w = eig.vector(i);
            let u = phi.matvec(&w)?;
            let scale = 1.0 / libm::sqrt(n as f64 * eig.values[i]);
            for r in 0..n {
                vectors[(r, i)] = u[r] * scale;
            }
        }
        let eig = EigenSystem {
            values: eig.values[..keep].to_vec(),
            vectors,
            clamp_floor: eig.clamp_floor,
        };
        Self::from_parts(kernel.clone(), pts.clone(), filters, eig, Some(threshold))
    }

    pub fn points(&self) -> &PointSet {
        &self.pts
    }

    pub fn kernel(&self) -> &KernelSpec {
        &self.kernel
    }

    pub fn filters(&self) -> &FilterFamily {
        &self.filters
    }

    pub fn eigensystem(&self) -> &EigenSystem {
        &self.eig
    }

    pub fn len(&self) -> usize {
        self.pts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pts.is_empty()
    }

    pub fn drop_threshold(&self) -> f64 {
        self.drop_threshold
    }

    /// Number of eigenpairs with `λ̂ ≥ drop_threshold`.
    pub fn retained(&self) -> usize {
        self.retained
    }

    pub fn retained_values(&self) -> &[f64] {
        &self.eig.values[..self.retained]
    }

    /// Smallest retained eigenvalue.
    pub fn lambda_min(&self) -> f64 {
        self.eig.values[self.retained - 1]
    }

    /// `J(λ̂_min)`: for dyadic filters, analysis up to this scale is exactly Parseval.
    pub fn parseval_scale(&self) -> u32 {
        dyadic_scale_cap(self.lambda_min())
    }

    /// `J(drop_threshold)`, the last dyadic scale that can carry any energy.
    pub fn scale_cap(&self) -> u32 {
        dyadic_scale_cap(self.drop_threshold)
    }

    fn check_samples(&self, y: &[f64]) -> Result<()> {
        if y.len() != self.len() {
            return Err(Error::DimensionMismatch {
                expected: self.len(),
                found: y.len(),
            });
        }
        Ok(())
    }

    fn check_index(&self, k: usize) -> Result<()> {
        if k >= self.len() {
            return Err(Error::IndexOutOfRange {
                index: k,
                len: self.len(),
            });
        }
        Ok(())
    }

    /// `U diag(w) Uᵀ y` with `w_i = f(λ̂_i)` over the first `count` eigenpairs.
    fn spectral_apply(
        &self,
        count: usize,
        y: &[f64],
        mut f: impl FnMut(f64) -> Result<f64>,
    ) -> Result<Vec<f64>> {
        let n = self.len();
        let mut out = vec![0.0; n];
        let coords = self.eig.coordinates(y)?;
        for i in 0..count {
            let w = f(self.eig.values[i])? * coords[i];
            if w == 0.0 {
                continue;
            }
            for (r, o) in out.iter_mut().enumerate() {
                *o += w * self.eig.vectors[(r, i)];
            }
        }
        Ok(out)
    }

    /// Coefficients of `ψ̂_{j,k}` against `K(·, x_ℓ)`.
    pub fn atom_coefficients(&self, j: u32, k: usize) -> Result<Vec<f64>> {
        self.check_index(k)?;
        let n = self.len();
        let mut out = vec![0.0; n];
        for i in 0..self.retained {
            let w = self.filters.big_g(j, self.eig.values[i])? * self.eig.vectors[(k, i)];
            if w == 0.0 {
                continue;
            }
            for (r, o) in out.iter_mut().enumerate() {
                *o += w * self.eig.vectors[(r, i)];
            }
        }
        Ok(out)
    }

    pub fn atom(&self, j: u32, k: usize) -> Result<KernelExpansion> {
        KernelExpansion::new(
            self.kernel.clone(),
            self.pts.clone(),
            self.atom_coefficients(j, k)?,
        )
    }

    /// `ψ̂_{j,k}(x)`.
    pub fn atom_eval(&self, j: u32, k: usize, x: Point<'_>) -> Result<f64> {
        let a = self.atom_coefficients(j, k)?;
        let mut s = 0.0;
        for (xl, c) in self.pts.iter().zip(&a) {
            if *c != 0.0 {
                s += c * self.kernel.eval(x, xl)?;
            }
        }
        Ok(s)
    }

    /// Wavelet transform of the signal with samples `y` at scales `0..=τ`.
    pub fn analyze(&self, y: &[f64], tau: u32) -> Result<WaveletCoefficients> {
        self.check_samples(y)?;
        let count = self.eig.len();
        let coeffs = (0..=tau)
            .map(|j| self.spectral_apply(count, y, |l| self.filters.big_g(j, l)))
            .collect::<Result<Vec<_>>>()?;
        Ok(WaveletCoefficients { tau, coeffs })
    }

    /// `Σ_j N⁻¹ Σ_k c[j][k] ψ̂_{j,k}`.
    pub fn synthesize(&self, c: &WaveletCoefficients) -> Result<KernelExpansion> {
        let n = self.len();
        let mut a = vec![0.0; n];
        for (j, row) in c.coeffs.iter().enumerate() {
            self.check_samples(row)?;
            let part =
                self.spectral_apply(self.retained, row, |l| self.filters.big_g(j as u32, l))?;
            for (x, p) in a.iter_mut().zip(part) {
                *x += p / n as f64;
            }
        }
        KernelExpansion::new(self.kernel.clone(), self.pts.clone(), a)
    }

    /// `f̂_{τ,N} = g_τ(T̂) T̂ f`, with coefficients `N⁻¹ U g_τ(Λ) Uᵀ y`.
    pub fn reconstruct(&self, y: &[f64], tau: u32) -> Result<KernelExpansion> {
        self.check_samples(y)?;
        let n = self.len() as f64;
        let a = self.spectral_apply(self.eig.len(), y, |l| Ok(self.filters.g(tau, l) / n))?;
        KernelExpansion::new(self.kernel.clone(), self.pts.clone(), a)
    }

    /// Samples of `T̂_j f = T̂ G_j(T̂)² f`, i.e. `U Λ G_j(Λ)² Uᵀ y`. For experimental
    /// families `G_j²` is the signed increment `g_j − g_{j−1}`.
    pub fn frame_operator_apply(&self, j: u32, y: &[f64]) -> Result<Vec<f64>> {
        self.check_samples(y)?;
        self.spectral_apply(self.eig.len(), y, |l| Ok(l * self.filters.increment(j, l)))
    }

    /// Samples of `T̂ g_τ(T̂) f`.
    pub fn resolution_apply(&self, tau: u32, y: &[f64]) -> Result<Vec<f64>> {
        self.check_samples(y)?;
        self.spectral_apply(self.eig.len(), y, |l| Ok(l * self.filters.g(tau, l)))
    }

    /// `‖f‖²_H` for the sample-span function with samples `y`:
    /// `Σ_{retained} (u_iᵀ y)² / (N λ̂_i)`.
    pub fn sample_hilbert_norm_sq(&self, y: &[f64]) -> Result<f64> {
        self.check_samples(y)?;
        let n = self.len() as f64;
        let coords = self.eig.coordinates(y)?;
        Ok((0..self.retained)
            .map(|i| coords[i] * coords[i] / (n * self.eig.values[i]))
            .sum())
    }

    pub fn parseval_check(&self, y: &[f64], tau: u32) -> Result<ParsevalReport> {
        let c = self.analyze(y, tau)?;
        Ok(ParsevalReport {
            lhs: c.energy(),
            rhs: self.sample_hilbert_norm_sq(y)?,
        })
    }

    /// `û_i = √N u_i`.
    pub fn empirical_eigenvector(&self, i: usize) -> Result<Vec<f64>> {
        if i >= self.eig.len() {
            return Err(Error::IndexOutOfRange {
                index: i,
                len: self.eig.len(),
            });
        }
        let s = libm::sqrt(self.len() as f64);
        Ok(self.eig.vector(i).into_iter().map(|v| v * s).collect())
    }

    /// `v̂_i = λ̂_i^{-1/2} Ŝ* û_i`, coefficients `u_i / √(N λ̂_i)`.
    pub fn empirical_eigenfunction(&self, i: usize) -> Result<KernelExpansion> {
        if i >= self.retained {
            return Err(Error::IndexOutOfRange {
                index: i,
                len: self.retained,
            });
        }
        let s = 1.0 / libm::sqrt(self.len() as f64 * self.eig.values[i]);
        let coeffs = self.eig.vector(i).into_iter().map(|v| v * s).collect();
        KernelExpansion::new(self.kernel.clone(), self.pts.clone(), coeffs)
    }

    /// Coordinates `⟨f, v̂_i⟩_H = u_iᵀ y / √(N λ̂_i)` over the retained spectrum.
    pub fn sample_coordinates(&self, y: &[f64]) -> Result<Vec<f64>> {
        self.check_samples(y)?;
        let n = self.len() as f64;
        let coords = self.eig.coordinates(y)?;
        Ok((0..self.retained)
            .map(|i| coords[i] / libm::sqrt(n * self.eig.values[i]))
            .collect())
    }

    /// Samples of `Σ_i a_i v̂_i`: `Σ_i a_i √(N λ̂_i) u_i`.
    pub fn samples_from_coordinates(&self, a: &[f64]) -> Result<Vec<f64>> {
        if a.len() != self.retained {
            return Err(Error::DimensionMismatch {
                expected: self.retained,
                found: a.len(),
            });
        }
        let n = self.len() as f64;
        let mut y = vec![0.0; self.len()];
        for (i, ai) in a.iter().enumerate() {
            let w = ai * libm::sqrt(n * self.eig.values[i]);
            for (r, yr) in y.iter_mut().enumerate() {
                *yr += w * self.eig.vectors[(r, i)];
            }
        }
        Ok(y)
    }
}

/// `y[i] = f(x_i)`.
pub fn sample_signal(f: impl Fn(Point<'_>) -> f64, pts: &PointSet) -> Vec<f64> {
    pts.iter().map(f).collect()
}

/// `Ŝ* u = N⁻¹ Σ_ℓ u_ℓ K(·, x_ℓ)`.
pub fn out_of_sample_extend(
    u: &[f64],
    pts: &PointSet,
    kernel: &KernelSpec,
) -> Result<KernelExpansion> {
    let n = pts.len() as f64;
    KernelExpansion::new(
        kernel.clone(),
        pts.clone(),
        u.iter().map(|v| v / n).collect(),
    )
}

/// `‖f‖²_ρ` for uniform `ρ` on the circle by the trapezoid rule on `nodes`
/// equispaced points. Exact for trigonometric polynomials `|f|²` of degree
/// `2·band`, which needs `nodes ≥ 2·band + 1`.
pub fn circle_rho_norm_sq(f: impl Fn(f64) -> f64, nodes: usize, band: usize) -> Result<f64> {
    let required = 2 * band + 1;
    if nodes < required {
        return Err(Error::Aliasing { nodes, required });
    }
    let h = 2.0 * core::f64::consts::PI / nodes as f64;
    Ok((0..nodes)
        .map(|i| f(i as f64 * h))
        .map(|v| v * v)
        .sum::<f64>()
        / nodes as f64)
}

/// Monte Carlo estimate of `‖f‖²_ρ` from values at fresh samples, with its
/// standard error.
pub fn monte_carlo_rho_norm_sq(values: &[f64]) -> Result<(f64, f64)> {
    let n = values.len();
    if n == 0 {
        return Err(Error::Empty("held-out sample"));
    }
    let sq: Vec<f64> = values.iter().map(|v| v * v).collect();
    let mean = sq.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return Ok((mean, f64::INFINITY));
    }
    let var = sq.iter().map(|s| (s - mean) * (s - mean)).sum::<f64>() / (n - 1) as f64;
    Ok((mean, libm::sqrt(var / n as f64)))
}
