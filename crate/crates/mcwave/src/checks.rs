//! Randomized self-checks exposed through `mcwave check`.

use mcwave_core::linalg::norm;
use mcwave_core::{build_frame, FilterFamily, KernelSpec, Matrix, PointSet};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::AppResult;

/// Families covered by the telescoping check.
pub const FAMILIES: [&str; 7] = [
    "tikhonov",
    "iter-tikhonov:3",
    "landweber",
    "asymptotic",
    "nu-method:1",
    "nesterov:1",
    "dyadic",
];

/// Worst observed discrepancy of a check against its tolerance.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckReport {
    pub name: String,
    pub cases: usize,
    pub worst: f64,
    pub tolerance: f64,
}

impl CheckReport {
    pub fn passed(&self) -> bool {
        self.worst <= self.tolerance
    }
}

/// Random points of the kernel's domain; matrix kernels use all vertices.
pub fn random_points(kernel: &KernelSpec, n: usize, rng: &mut ChaCha8Rng) -> AppResult<PointSet> {
    use mcwave_core::kernels::Kernel;
    Ok(match kernel.kernel() {
        Kernel::CircleHeat { .. } => {
            let two_pi = 2.0 * std::f64::consts::PI;
            PointSet::circle((0..n).map(|_| rng.random::<f64>() * two_pi).collect())?
        }
        Kernel::Gaussian { dim, .. } => {
            PointSet::euclidean(*dim, (0..n * dim).map(|_| rng.random::<f64>()).collect())?
        }
        Kernel::Matrix(m) => PointSet::vertices((0..m.rows()).collect())?,
    })
}

/// Samples `y = K a` of a random function in the sample span.
pub fn span_samples(k: &Matrix, rng: &mut ChaCha8Rng) -> AppResult<Vec<f64>> {
    let a: Vec<f64> = (0..k.rows()).map(|_| rng.sample(StandardNormal)).collect();
    Ok(k.matvec(&a)?)
}

fn rng_for(seed: u64, case: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(case);
    r
}

/// Dyadic analysis energy against `‖f‖²_H` at the Parseval scale, relative.
pub fn parseval(
    kernel: &KernelSpec,
    sizes: &[usize],
    trials: usize,
    seed: u64,
) -> AppResult<CheckReport> {
    let fam = FilterFamily::dyadic(kernel.kappa_sq())?;
    let mut worst: f64 = 0.0;
    let mut case = 0;
    for &n in sizes {
        for _ in 0..trials {
            let mut rng = rng_for(seed, case);
            case += 1;
            let pts = random_points(kernel, n, &mut rng)?;
            let y = span_samples(&kernel.kernel_matrix(&pts)?, &mut rng)?;
            let frame = build_frame(kernel, &pts, fam, None)?;
            let r = frame.parseval_check(&y, frame.parseval_scale())?;
            worst = worst.max((r.lhs - r.rhs).abs() / r.rhs);
        }
    }
    Ok(CheckReport {
        name: "parseval".into(),
        cases: case as usize,
        worst,
        tolerance: 1e-10,
    })
}

/// `Σ_{j≤τ} T̂_j y = T̂ g_τ(T̂) y` for every family and `τ ≤ tau_max`, relative to `‖y‖`.
pub fn telescope(kernel: &KernelSpec, n: usize, tau_max: u32, seed: u64) -> AppResult<CheckReport> {
    let mut rng = rng_for(seed, 0);
    let pts = random_points(kernel, n, &mut rng)?;
    let y = span_samples(&kernel.kernel_matrix(&pts)?, &mut rng)?;
    let scale = norm(&y).max(1.0);
    let mut worst: f64 = 0.0;
    let mut cases = 0;
    for name in FAMILIES {
        let fam = FilterFamily::parse(name, kernel.kappa_sq())?;
        let frame = build_frame(kernel, &pts, fam, None)?;
        let mut acc = vec![0.0; y.len()];
        for tau in 0..=tau_max {
            let inc = frame.frame_operator_apply(tau, &y)?;
            acc.iter_mut().zip(&inc).for_each(|(a, b)| *a += b);
            let direct = frame.resolution_apply(tau, &y)?;
            let d = acc
                .iter()
                .zip(&direct)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            worst = worst.max(d / scale);
            cases += 1;
        }
    }
    Ok(CheckReport {
        name: "telescope".into(),
        cases,
        worst,
        tolerance: 1e-10,
    })
}

/// Tikhonov reconstruction against `(K + (N/τ) I)⁻¹ y`, relative.
pub fn krr(
    kernel: &KernelSpec,
    sizes: &[usize],
    taus: &[u32],
    seed: u64,
) -> AppResult<CheckReport> {
    let fam = FilterFamily::tikhonov(kernel.kappa_sq())?;
    let mut worst: f64 = 0.0;
    let mut cases = 0;
    for (i, &n) in sizes.iter().enumerate() {
        let mut rng = rng_for(seed, i as u64);
        let pts = random_points(kernel, n, &mut rng)?;
        let k = kernel.kernel_matrix(&pts)?;
        let y: Vec<f64> = (0..pts.len()).map(|_| rng.sample(StandardNormal)).collect();
        let frame = build_frame(kernel, &pts, fam, None)?;
        for &tau in taus {
            let a = frame.reconstruct(&y, tau)?;
            let reg = pts.len() as f64 / tau.max(1) as f64;
            let shifted = k.add(&Matrix::identity(pts.len()).scale(reg))?;
            let b = shifted.solve_spd(&y)?;
            let d: Vec<f64> = a.coeffs.iter().zip(&b).map(|(p, q)| p - q).collect();
            worst = worst.max(norm(&d) / norm(&b));
            cases += 1;
        }
    }
    Ok(CheckReport {
        name: "krr".into(),
        cases,
        worst,
        tolerance: 1e-8,
    })
}
