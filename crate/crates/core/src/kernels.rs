//! Positive semi-definite kernels, point sets and kernel matrices.

use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::error::{Error, Result};
use crate::linalg::Matrix;

const TWO_PI: f64 = 2.0 * PI;

/// A single point of one of the supported domains.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Point<'a> {
    Euclidean(&'a [f64]),
    /// Angle in `[0, 2π)`.
    Circle(f64),
    Vertex(usize),
}

impl Point<'_> {
    fn tag(&self) -> &'static str {
        match self {
            Point::Euclidean(_) => "euclidean",
            Point::Circle(_) => "circle",
            Point::Vertex(_) => "vertex",
        }
    }
}

/// Ordered sample points `x_1, …, x_N` on one domain.
#[derive(Debug, Clone, PartialEq)]
pub enum PointSet {
    Euclidean { dim: usize, coords: Vec<f64> },
    Circle(Vec<f64>),
    Vertices(Vec<usize>),
}

impl PointSet {
    /// Row-major coordinates, `dim` per point.
    pub fn euclidean(dim: usize, coords: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidParameter(
                "euclidean dimension must be positive".into(),
            ));
        }
        if coords.is_empty() {
            return Err(Error::Empty("point set"));
        }
        if !coords.len().is_multiple_of(dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: coords.len() % dim,
            });
        }
        Ok(PointSet::Euclidean { dim, coords })
    }

    /// Angles must lie in `[0, 2π)`.
    pub fn circle(angles: Vec<f64>) -> Result<Self> {
        if angles.is_empty() {
            return Err(Error::Empty("point set"));
        }
        if let Some(bad) = angles.iter().find(|a| !(0.0..TWO_PI).contains(*a)) {
            return Err(Error::InvalidParameter(alloc::format!(
                "circle angle {bad} outside [0, 2π)"
            )));
        }
        Ok(PointSet::Circle(angles))
    }

    /// `n` equispaced angles `2πk/n`.
    pub fn circle_equispaced(n: usize) -> Result<Self> {
        Self::circle((0..n).map(|k| TWO_PI * k as f64 / n as f64).collect())
    }

    pub fn vertices(indices: Vec<usize>) -> Result<Self> {
        if indices.is_empty() {
            return Err(Error::Empty("point set"));
        }
        Ok(PointSet::Vertices(indices))
    }

    pub fn len(&self) -> usize {
        match self {
            PointSet::Euclidean { dim, coords } => coords.len() / dim,
            PointSet::Circle(a) => a.len(),
            PointSet::Vertices(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn get(&self, i: usize) -> Point<'_> {
        match self {
            PointSet::Euclidean { dim, coords } => {
                Point::Euclidean(&coords[i * dim..(i + 1) * dim])
            }
            PointSet::Circle(a) => Point::Circle(a[i]),
            PointSet::Vertices(v) => Point::Vertex(v[i]),
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = Point<'_>> + '_ {
        (0..self.len()).map(move |i| self.get(i))
    }

    /// Concatenation, used to build nested sample sets.
    pub fn extended(&self, other: &PointSet) -> Result<Self> {
        match (self, other) {
            (
                PointSet::Euclidean { dim: a, coords: ca },
                PointSet::Euclidean { dim: b, coords: cb },
            ) if a == b => {
                let mut c = ca.clone();
                c.extend_from_slice(cb);
                Ok(PointSet::Euclidean { dim: *a, coords: c })
            }
            (PointSet::Circle(a), PointSet::Circle(b)) => {
                let mut c = a.clone();
                c.extend_from_slice(b);
                Ok(PointSet::Circle(c))
            }
            (PointSet::Vertices(a), PointSet::Vertices(b)) => {
                let mut c = a.clone();
                c.extend_from_slice(b);
                Ok(PointSet::Vertices(c))
            }
            _ => Err(Error::DomainMismatch {
                expected: self.get(0).tag(),
                found: other.get(0).tag(),
            }),
        }
    }
}

/// Kernel family.
#[derive(Debug, Clone, PartialEq)]
pub enum Kernel {
    /// `exp(-|x-y|² / (2σ²))` on `R^dim`.
    Gaussian { bandwidth: f64, dim: usize },
    /// Heat kernel on the circle truncated to frequencies `|m| ≤ truncation`:
    /// `Σ_{|m|≤M} e^{-t m²} e^{i m (x-y)}`.
    CircleHeat { time: f64, truncation: usize },
    /// Explicit symmetric PSD matrix over vertex indices.
    Matrix(Matrix),
}

/// A kernel together with its bound `κ = sup_x √K(x,x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelSpec {
    kernel: Kernel,
    kappa: f64,
}

impl KernelSpec {
    pub fn gaussian(bandwidth: f64, dim: usize) -> Result<Self> {
        if !(bandwidth > 0.0) || dim == 0 {
            return Err(Error::InvalidParameter(
                "gaussian kernel needs bandwidth > 0 and dim ≥ 1".into(),
            ));
        }
        Ok(Self::from_kernel(Kernel::Gaussian { bandwidth, dim }))
    }

    pub fn circle_heat(time: f64, truncation: usize) -> Result<Self> {
        if !(time > 0.0) || truncation == 0 {
            return Err(Error::InvalidParameter(
                "circle heat kernel needs t > 0 and M ≥ 1".into(),
            ));
        }
        Ok(Self::from_kernel(Kernel::CircleHeat { time, truncation }))
    }

    /// Symmetric PSD matrix; symmetry is checked to `1e-12` relative and
    /// positive semi-definiteness is the caller's responsibility (checked when decomposed).
    pub fn matrix_backed(matrix: Matrix) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::DimensionMismatch {
                expected: matrix.rows(),
                found: matrix.cols(),
            });
        }
        if matrix.rows() == 0 {
            return Err(Error::Empty("kernel matrix"));
        }
        let asym = matrix.relative_asymmetry();
        if asym > 1e-12 {
            return Err(Error::NotSymmetric {
                max_asymmetry: asym,
            });
        }
        Ok(Self::from_kernel(Kernel::Matrix(matrix)))
    }

    fn from_kernel(kernel: Kernel) -> Self {
        let kappa = kappa_of(&kernel);
        Self { kernel, kappa }
    }

    pub fn kernel(&self) -> &Kernel {
        &self.kernel
    }

    /// `κ = sup_x √K(x,x)`.
    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn kappa_sq(&self) -> f64 {
        self.kappa * self.kappa
    }

    pub fn eval(&self, x: Point<'_>, y: Point<'_>) -> Result<f64> {
        match (&self.kernel, x, y) {
            (Kernel::Gaussian { bandwidth, dim }, Point::Euclidean(a), Point::Euclidean(b)) => {
                if a.len() != *dim {
                    return Err(Error::DimensionMismatch {
                        expected: *dim,
                        found: a.len(),
                    });
                }
                if b.len() != *dim {
                    return Err(Error::DimensionMismatch {
                        expected: *dim,
                        found: b.len(),
                    });
                }
                let d2: f64 = a.iter().zip(b).map(|(p, q)| (p - q) * (p - q)).sum();
                Ok(libm::exp(-d2 / (2.0 * bandwidth * bandwidth)))
            }
            (Kernel::CircleHeat { time, truncation }, Point::Circle(a), Point::Circle(b)) => {
                Ok(circle_heat_value(*time, *truncation, a - b))
            }
            (Kernel::Matrix(m), Point::Vertex(i), Point::Vertex(k)) => {
                let n = m.rows();
                if i >= n {
                    return Err(Error::IndexOutOfRange { index: i, len: n });
                }
                if k >= n {
                    return Err(Error::IndexOutOfRange { index: k, len: n });
                }
                Ok(m[(i, k)])
            }
            (kernel, x, y) => {
                let expected = match kernel {
                    Kernel::Gaussian { .. } => "euclidean",
                    Kernel::CircleHeat { .. } => "circle",
                    Kernel::Matrix(_) => "vertex",
                };
                let found = if x.tag() != expected {
                    x.tag()
                } else {
                    y.tag()
                };
                Err(Error::DomainMismatch { expected, found })
            }
        }
    }

    /// Kernel matrix `K[i,k] = K(x_i, x_k)`.
    pub fn kernel_matrix(&self, pts: &PointSet) -> Result<Matrix> {
        let n = pts.len();
        if n == 0 {
            return Err(Error::Empty("point set"));
        }
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            for k in i..n {
                let v = self.eval(pts.get(i), pts.get(k))?;
                m[(i, k)] = v;
                m[(k, i)] = v;
            }
        }
        Ok(m)
    }

    /// Cross matrix `C[i,k] = K(a_i, b_k)`.
    pub fn cross_matrix(&self, a: &PointSet, b: &PointSet) -> Result<Matrix> {
        let mut m = Matrix::zeros(a.len(), b.len());
        for i in 0..a.len() {
            for k in 0..b.len() {
                m[(i, k)] = self.eval(a.get(i), b.get(k))?;
            }
        }
        Ok(m)
    }

    /// Dimension of an explicit finite feature map, when the kernel has one.
    pub fn feature_dim(&self) -> Option<usize> {
        match self.kernel {
            Kernel::CircleHeat { truncation, .. } => Some(2 * truncation + 1),
            _ => None,
        }
    }

    /// Finite feature map `φ(x)` with `K(x,y) = φ(x)·φ(y)`, when available.
    ///
    /// For the circle heat kernel the coordinates are the values at `x` of the
    /// orthonormal eigenfunctions of the RKHS: `1`, then `√(2λ_m) cos(mx)`,
    /// `√(2λ_m) sin(mx)` for `m = 1..=M`, with `λ_m = e^{-t m²}`.
    pub fn features(&self, x: Point<'_>) -> Result<Option<Vec<f64>>> {
        match (&self.kernel, x) {
            (Kernel::CircleHeat { time, truncation }, Point::Circle(a)) => {
                Ok(Some(circle_heat_features(*time, *truncation, a)))
            }
            (Kernel::CircleHeat { .. }, p) => Err(Error::DomainMismatch {
                expected: "circle",
                found: p.tag(),
            }),
            _ => Ok(None),
        }
    }
}

/// `κ` for a kernel.
pub fn kappa_bound(spec: &KernelSpec) -> f64 {
    spec.kappa()
}

fn kappa_of(kernel: &Kernel) -> f64 {
    match kernel {
        Kernel::Gaussian { .. } => 1.0,
        Kernel::CircleHeat { time, truncation } => {
            libm::sqrt(circle_heat_value(*time, *truncation, 0.0))
        }
        Kernel::Matrix(m) => libm::sqrt(m.diagonal().into_iter().fold(0.0, f64::max)),
    }
}

/// `1 + 2 Σ_{m=1}^{M} e^{-t m²} cos(m θ)` via the Chebyshev recurrence for `cos(mθ)`.
pub fn circle_heat_value(time: f64, truncation: usize, theta: f64) -> f64 {
    let c1 = libm::cos(theta);
    let (mut prev, mut cur) = (1.0, c1);
    let mut sum = 0.0;
    for m in 1..=truncation {
        let mf = m as f64;
        sum += libm::exp(-time * mf * mf) * cur;
        let next = 2.0 * c1 * cur - prev;
        prev = cur;
        cur = next;
    }
    1.0 + 2.0 * sum
}

fn circle_heat_features(time: f64, truncation: usize, x: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(2 * truncation + 1);
    out.push(1.0);
    let (s1, c1) = (libm::sin(x), libm::cos(x));
    let (mut c, mut s) = (c1, s1);
    for m in 1..=truncation {
        let mf = m as f64;
        let w = libm::sqrt(2.0 * libm::exp(-time * mf * mf));
        out.push(w * c);
        out.push(w * s);
        // angle addition: (cos, sin)((m+1)x)
        let (nc, ns) = (c * c1 - s * s1, s * c1 + c * s1);
        c = nc;
        s = ns;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn gaussian_is_one_on_diagonal_and_translation_invariant() {
        let k = KernelSpec::gaussian(1.0, 1).unwrap();
        let a = [0.0];
        let b = [1.0];
        assert_eq!(
            k.eval(Point::Euclidean(&a), Point::Euclidean(&a)).unwrap(),
            1.0
        );
        assert_eq!(
            k.eval(Point::Euclidean(&a), Point::Euclidean(&a)).unwrap(),
            k.eval(Point::Euclidean(&b), Point::Euclidean(&b)).unwrap()
        );
        assert_eq!(KernelSpec::gaussian(2.0, 3).unwrap().kappa(), 1.0);
    }

    #[test]
    fn circle_heat_diagonal_is_direct_sum() {
        let k = KernelSpec::circle_heat(0.1, 64).unwrap();
        let direct = 1.0 + 2.0 * (1..=64).map(|m| (-0.1 * (m * m) as f64).exp()).sum::<f64>();
        let v = k.eval(Point::Circle(0.3), Point::Circle(0.3)).unwrap();
        assert!((v - direct).abs() < 1e-13);
        assert!((k.kappa() - v.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn matrix_backed_kappa_is_root_of_max_diagonal() {
        let m = Matrix::from_rows(&[vec![4.0, 0.0], vec![0.0, 9.0]]).unwrap();
        assert_eq!(KernelSpec::matrix_backed(m).unwrap().kappa(), 3.0);
    }

    #[test]
    fn domain_mismatch_is_typed() {
        let k = KernelSpec::circle_heat(0.1, 4).unwrap();
        let err = k.eval(Point::Vertex(0), Point::Circle(0.0)).unwrap_err();
        assert_eq!(
            err,
            Error::DomainMismatch {
                expected: "circle",
                found: "vertex"
            }
        );
        let g = KernelSpec::gaussian(1.0, 2).unwrap();
        assert!(matches!(
            g.eval(Point::Euclidean(&[0.0]), Point::Euclidean(&[0.0])),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn vertex_index_out_of_range() {
        let k = KernelSpec::matrix_backed(Matrix::identity(2)).unwrap();
        assert!(matches!(
            k.eval(Point::Vertex(2), Point::Vertex(0)),
            Err(Error::IndexOutOfRange { .. })
        ));
    }

    #[test]
    fn single_point_matrix() {
        let k = KernelSpec::circle_heat(0.5, 3).unwrap();
        let pts = PointSet::circle(vec![1.0]).unwrap();
        let m = k.kernel_matrix(&pts).unwrap();
        assert_eq!((m.rows(), m.cols()), (1, 1));
        assert!((m[(0, 0)] - k.kappa_sq()).abs() < 1e-14);
    }

    #[test]
    fn features_reproduce_kernel() {
        let k = KernelSpec::circle_heat(0.1, 16).unwrap();
        let fx = k.features(Point::Circle(0.7)).unwrap().unwrap();
        let fy = k.features(Point::Circle(4.1)).unwrap().unwrap();
        let dotp: f64 = fx.iter().zip(&fy).map(|(a, b)| a * b).sum();
        let direct = k.eval(Point::Circle(0.7), Point::Circle(4.1)).unwrap();
        assert!((dotp - direct).abs() < 1e-13);
    }

    #[test]
    fn point_set_validation() {
        assert!(PointSet::circle(vec![]).is_err());
        assert!(PointSet::circle(vec![7.0]).is_err());
        assert!(PointSet::euclidean(2, vec![1.0, 2.0, 3.0]).is_err());
        assert_eq!(PointSet::circle_equispaced(8).unwrap().len(), 8);
    }
}
