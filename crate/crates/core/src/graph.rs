//! Weighted graphs, Laplacians, the pseudoinverse kernel `L⁺` and Parseval graph frames.
//!
//! Graph frames use the counting measure on vertices: `Σ_{j,k} ⟨f, φ_{j,k}⟩² = ‖f‖²`.
//! The kernel-side frames in [`crate::frame`] weight samples by `1/N` instead.
//! The two are related through `H_j(ξ) = F_j(1/ξ)`.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::eigensolve::{sym_eig, EigenSystem};
use crate::error::{Error, Result};
use crate::filters::{dyadic_scale_cap, FilterFamily};
use crate::kernels::{Point, PointSet};
use crate::linalg::Matrix;

/// Relative cutoff for zero Laplacian eigenvalues: `ξ ≤ tol · ξ_max`.
pub const DEFAULT_PINV_TOL: f64 = 1e-10;
/// Partition of unity tolerance for graph filters.
pub const PARTITION_TOL: f64 = 1e-10;

/// Undirected graph with strictly positive weights; every edge stored once.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedGraph {
    n: usize,
    edges: Vec<(usize, usize, f64)>,
}

impl WeightedGraph {
    pub fn new(n: usize, edges: Vec<(usize, usize, f64)>) -> Result<Self> {
        if n == 0 {
            return Err(Error::Empty("graph"));
        }
        let mut seen = Vec::with_capacity(edges.len());
        for &(i, k, w) in &edges {
            for v in [i, k] {
                if v >= n {
                    return Err(Error::IndexOutOfRange { index: v, len: n });
                }
            }
            if i == k {
                return Err(Error::InvalidParameter(format!("self-loop at vertex {i}")));
            }
            if !(w > 0.0) || !w.is_finite() {
                return Err(Error::InvalidParameter(format!(
                    "edge ({i}, {k}) has non-positive weight {w}"
                )));
            }
            seen.push((i.min(k), i.max(k)));
        }
        seen.sort_unstable();
        if let Some(w) = seen.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::InvalidParameter(format!(
                "edge ({}, {}) listed twice",
                w[0].0, w[0].1
            )));
        }
        Ok(Self { n, edges })
    }

    pub fn vertex_count(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[(usize, usize, f64)] {
        &self.edges
    }

    /// Symmetric weight matrix `W`.
    pub fn weight_matrix(&self) -> Matrix {
        let mut w = Matrix::zeros(self.n, self.n);
        for &(i, k, x) in &self.edges {
            w[(i, k)] = x;
            w[(k, i)] = x;
        }
        w
    }

    pub fn degrees(&self) -> Vec<f64> {
        let mut d = vec![0.0; self.n];
        for &(i, k, w) in &self.edges {
            d[i] += w;
            d[k] += w;
        }
        d
    }

    /// Vertices with no incident edge.
    pub fn isolated_vertices(&self) -> Vec<usize> {
        self.degrees()
            .iter()
            .enumerate()
            .filter(|(_, d)| **d == 0.0)
            .map(|(i, _)| i)
            .collect()
    }

    /// Number of connected components.
    pub fn components(&self) -> usize {
        let mut parent: Vec<usize> = (0..self.n).collect();
        fn find(p: &mut [usize], mut x: usize) -> usize {
            while p[x] != x {
                p[x] = p[p[x]];
                x = p[x];
            }
            x
        }
        let mut count = self.n;
        for &(i, k, _) in &self.edges {
            let (a, b) = (find(&mut parent, i), find(&mut parent, k));
            if a != b {
                parent[a] = b;
                count -= 1;
            }
        }
        count
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LaplacianKind {
    /// `L = D − W`.
    Unnormalized,
    /// `L′ = I − D^{-1/2} W D^{-1/2}`.
    SymmetricNormalized,
}

pub fn build_laplacian(g: &WeightedGraph, kind: LaplacianKind) -> Result<Matrix> {
    let n = g.vertex_count();
    let d = g.degrees();
    let w = g.weight_matrix();
    match kind {
        LaplacianKind::Unnormalized => Ok(Matrix::from_fn(n, n, |i, k| {
            if i == k {
                d[i]
            } else {
                -w[(i, k)]
            }
        })),
        LaplacianKind::SymmetricNormalized => {
            if let Some(v) = d.iter().position(|x| *x == 0.0) {
                return Err(Error::IsolatedVertex(v));
            }
            let s: Vec<f64> = d.iter().map(|x| 1.0 / libm::sqrt(*x)).collect();
            Ok(Matrix::from_fn(n, n, |i, k| {
                let off = -s[i] * w[(i, k)] * s[k];
                if i == k {
                    1.0 + off
                } else {
                    off
                }
            }))
        }
    }
}

/// Eigendecomposition with eigenvalues in ascending order.
fn ascending_eig(l: &Matrix) -> Result<EigenSystem> {
    let floor = 1e-12 * l.trace().abs();
    let eig = sym_eig(l, floor)?;
    let n = eig.len();
    let values: Vec<f64> = eig.values.iter().rev().copied().collect();
    let vectors = Matrix::from_fn(eig.dim(), n, |r, c| eig.vectors[(r, n - 1 - c)]);
    Ok(EigenSystem {
        values,
        vectors,
        clamp_floor: eig.clamp_floor,
    })
}

/// `K = L⁺` together with the Laplacian eigensystem it was built from.
#[derive(Debug, Clone, PartialEq)]
pub struct PinvKernel {
    pub kernel: Matrix,
    /// Eigensystem of `L`, ascending.
    pub laplacian: EigenSystem,
    /// Eigenvalues `1/ξ_i` of `K` on the retained part, in the order of `laplacian`.
    pub lambdas: Vec<f64>,
    /// Number of eigenvalues treated as zero.
    pub null_dim: usize,
}

/// Pseudoinverse kernel: `λ_i = 1/ξ_i` for `ξ_i > tol · ξ_max`, zero otherwise.
pub fn laplacian_pinv_kernel(l: &Matrix, tol: f64) -> Result<PinvKernel> {
    let eig = ascending_eig(l)?;
    let xmax = eig.values.last().copied().unwrap_or(0.0);
    let cut = tol * xmax;
    if !(xmax > 0.0) {
        return Err(Error::EmptySpectrum);
    }
    let lambdas: Vec<f64> = eig
        .values
        .iter()
        .map(|&x| if x > cut { 1.0 / x } else { 0.0 })
        .collect();
    let null_dim = lambdas.iter().filter(|l| **l == 0.0).count();
    let kernel = EigenSystem {
        values: lambdas.clone(),
        ..eig.clone()
    }
    .reconstruct();
    Ok(PinvKernel {
        kernel,
        laplacian: eig,
        lambdas,
        null_dim,
    })
}

/// Laplacian eigenbasis `ξ_0 ≤ ξ_1 ≤ …` with orthonormal `u_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct GraphFrame {
    eig: EigenSystem,
    tol: f64,
}

impl GraphFrame {
    pub fn new(l: &Matrix) -> Result<Self> {
        Ok(Self {
            eig: ascending_eig(l)?,
            tol: DEFAULT_PINV_TOL,
        })
    }

    pub fn xi(&self) -> &[f64] {
        &self.eig.values
    }

    pub fn eigensystem(&self) -> &EigenSystem {
        &self.eig
    }

    pub fn len(&self) -> usize {
        self.eig.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eig.is_empty()
    }

    /// Whether `ξ` counts as a zero eigenvalue.
    pub fn is_null(&self, xi: f64) -> bool {
        let xmax = self.eig.values.last().copied().unwrap_or(0.0);
        xi <= self.tol * xmax
    }

    /// Dyadic scale filters `H_j(ξ) = F_j(1/ξ)`, with `H_0 = 1` and `H_j = 0`
    /// for `j ≥ 1` on the null space. Rows are scales `0..=J(1/ξ_max)`.
    pub fn dyadic_filters(&self, fam: &FilterFamily) -> Result<Vec<Vec<f64>>> {
        if !fam.localized() {
            return Err(Error::NotLocalized);
        }
        let xmax = self.eig.values.last().copied().unwrap_or(0.0);
        let cap = if xmax > 0.0 {
            dyadic_scale_cap(1.0 / xmax)
        } else {
            0
        };
        let mut h = Vec::with_capacity(cap as usize + 1);
        for j in 0..=cap {
            let row = self
                .eig
                .values
                .iter()
                .map(|&x| {
                    if self.is_null(x) {
                        Ok(if j == 0 { 1.0 } else { 0.0 })
                    } else {
                        fam.f_j(j, 1.0 / x)
                    }
                })
                .collect::<Result<Vec<_>>>()?;
            h.push(row);
        }
        Ok(h)
    }
}

/// `F f = (u_iᵀ f)_i`.
pub fn graph_fourier(frame: &GraphFrame, f: &[f64]) -> Result<Vec<f64>> {
    frame.eig.coordinates(f)
}

/// Atoms `φ_{j,k} = Σ_i H_j(ξ_i) u_i[k] u_i`, indexed `[j][k]`. `h[j][i]` is
/// `H_j(ξ_i)`; every column must satisfy `Σ_j H_j(ξ_i)² = 1`.
pub fn graph_frame_atoms(frame: &GraphFrame, h: &[Vec<f64>]) -> Result<Vec<Vec<Vec<f64>>>> {
    let n = frame.len();
    for row in h {
        if row.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: row.len(),
            });
        }
    }
    for i in 0..n {
        let s: f64 = h.iter().map(|row| row[i] * row[i]).sum();
        if (s - 1.0).abs() > PARTITION_TOL {
            return Err(Error::PartitionViolation { index: i, sum: s });
        }
    }
    let u = &frame.eig.vectors;
    let mut atoms = Vec::with_capacity(h.len());
    for row in h {
        let mut scale = Vec::with_capacity(n);
        for k in 0..n {
            let mut phi = vec![0.0; n];
            for (i, hi) in row.iter().enumerate() {
                let w = hi * u[(k, i)];
                if w == 0.0 {
                    continue;
                }
                for (r, p) in phi.iter_mut().enumerate() {
                    *p += w * u[(r, i)];
                }
            }
            scale.push(phi);
        }
        atoms.push(scale);
    }
    Ok(atoms)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NeighborRule {
    /// Connect points at distance `≤ ε`.
    EpsBall(f64),
    /// Connect each point to its `k` nearest neighbours, symmetrized by union.
    Knn(usize),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EdgeWeight {
    Unit,
    /// `exp(−d² / (2σ²))`.
    Gaussian(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct NeighborhoodGraph {
    pub graph: WeightedGraph,
    /// Vertices left without neighbours by the rule.
    pub isolated: Vec<usize>,
}

fn distance(a: Point<'_>, b: Point<'_>) -> Result<f64> {
    match (a, b) {
        (Point::Euclidean(x), Point::Euclidean(y)) => Ok(libm::sqrt(
            x.iter().zip(y).map(|(p, q)| (p - q) * (p - q)).sum(),
        )),
        (Point::Circle(x), Point::Circle(y)) => {
            let d = (x - y).abs() % (2.0 * core::f64::consts::PI);
            Ok(d.min(2.0 * core::f64::consts::PI - d))
        }
        _ => Err(Error::DomainMismatch {
            expected: "euclidean or circle",
            found: "vertex",
        }),
    }
}

/// Builds an ε-ball or k-nearest-neighbour graph under the Euclidean or circle
/// geodesic distance.
pub fn neighborhood_graph(
    pts: &PointSet,
    rule: NeighborRule,
    weight: EdgeWeight,
) -> Result<NeighborhoodGraph> {
    let n = pts.len();
    if n == 0 {
        return Err(Error::Empty("point set"));
    }
    if let EdgeWeight::Gaussian(s) = weight {
        if !(s > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "edge bandwidth must be positive, got {s}"
            )));
        }
    }
    let mut dist = Matrix::zeros(n, n);
    for i in 0..n {
        for k in (i + 1)..n {
            let d = distance(pts.get(i), pts.get(k))?;
            dist[(i, k)] = d;
            dist[(k, i)] = d;
        }
    }
    let mut adj = vec![false; n * n];
    match rule {
        NeighborRule::EpsBall(eps) => {
            if !(eps > 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "ε must be positive, got {eps}"
                )));
            }
            for i in 0..n {
                for k in (i + 1)..n {
                    if dist[(i, k)] <= eps {
                        adj[i * n + k] = true;
                    }
                }
            }
        }
        NeighborRule::Knn(k) => {
            if k == 0 || k >= n {
                return Err(Error::InvalidParameter(format!(
                    "k must be in 1..{n}, got {k}"
                )));
            }
            for i in 0..n {
                let mut order: Vec<usize> = (0..n).filter(|&m| m != i).collect();
                order.sort_by(|&a, &b| dist[(i, a)].total_cmp(&dist[(i, b)]).then(a.cmp(&b)));
                for &m in &order[..k] {
                    let (a, b) = (i.min(m), i.max(m));
                    adj[a * n + b] = true;
                }
            }
        }
    }
    let mut edges = Vec::new();
    for i in 0..n {
        for k in (i + 1)..n {
            if adj[i * n + k] {
                let d = dist[(i, k)];
                let w = match weight {
                    EdgeWeight::Unit => 1.0,
                    EdgeWeight::Gaussian(s) => libm::exp(-d * d / (2.0 * s * s)),
                };
                if w > 0.0 {
                    edges.push((i, k, w));
                }
            }
        }
    }
    let graph = WeightedGraph::new(n, edges)?;
    let isolated = graph.isolated_vertices();
    Ok(NeighborhoodGraph { graph, isolated })
}
