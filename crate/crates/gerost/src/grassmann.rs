//! Grassmannian and Stiefel primitives.
//!
//! A point on Gr(k, n) is represented by an orthonormal basis matrix
//! U in R^{n x k}; the orthogonal projector U U^T identifies the subspace
//! independently of the basis choice, so all subspace comparisons go through
//! projectors or the chordal metric, never through bases.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::tol;

/// A k-dimensional linear subspace of R^n, stored as an orthonormal basis.
#[derive(Clone, Debug)]
pub struct SubspacePoint {
    basis: DMatrix<f64>,
}

impl SubspacePoint {
    /// Wraps an already orthonormal basis, validating the invariants
    /// `1 <= k <= n` and `||basis^T basis - I||_F <= ORTHONORMALITY_TOL`.
    pub fn from_orthonormal(basis: DMatrix<f64>) -> Result<Self> {
        let (n, k) = basis.shape();
        if k == 0 || k > n {
            return Err(Error::Dimension(format!(
                "subspace dimension k={k} must satisfy 1 <= k <= n={n}"
            )));
        }
        let gram = basis.transpose() * &basis;
        let dev = (&gram - DMatrix::identity(k, k)).norm();
        if dev > tol::ORTHONORMALITY_TOL {
            return Err(Error::Domain(format!(
                "basis is not orthonormal: ||U^T U - I||_F = {dev:.3e}"
            )));
        }
        Ok(Self { basis })
    }

    pub fn ambient_dim(&self) -> usize {
        self.basis.nrows()
    }

    pub fn sub_dim(&self) -> usize {
        self.basis.ncols()
    }

    pub fn basis(&self) -> &DMatrix<f64> {
        &self.basis
    }

    /// The orthogonal projector U U^T, derived on demand.
    pub fn projector(&self) -> DMatrix<f64> {
        &self.basis * self.basis.transpose()
    }

    /// `||P_self - P_other||_F`. Basis-independent subspace comparison.
    pub fn projector_distance(&self, other: &SubspacePoint) -> Result<f64> {
        check_same_ambient(self, other)?;
        Ok((self.projector() - other.projector()).norm())
    }
}

/// Principal angles between two subspaces, ascending, in [0, pi/2].
#[derive(Clone, Debug)]
pub struct PrincipalAngleSet {
    pub angles: Vec<f64>,
    pub dims: (usize, usize),
}

/// A horizontal tangent vector at a Grassmannian point: an n x k matrix
/// with `basis^T direction = 0`.
#[derive(Clone, Debug)]
pub struct TangentVector {
    at: SubspacePoint,
    direction: DMatrix<f64>,
}

impl TangentVector {
    pub fn new(at: SubspacePoint, direction: DMatrix<f64>) -> Result<Self> {
        if direction.shape() != at.basis.shape() {
            return Err(Error::Dimension(format!(
                "tangent direction shape {:?} does not match base point {:?}",
                direction.shape(),
                at.basis.shape()
            )));
        }
        let horiz = (at.basis.transpose() * &direction).norm();
        let scale = direction.norm().max(1.0);
        if horiz > tol::HORIZONTAL_TOL * scale {
            return Err(Error::Domain(format!(
                "direction is not horizontal: ||Y^T D||_F = {horiz:.3e}"
            )));
        }
        Ok(Self { at, direction })
    }

    pub fn at(&self) -> &SubspacePoint {
        &self.at
    }

    pub fn direction(&self) -> &DMatrix<f64> {
        &self.direction
    }

    pub fn norm(&self) -> f64 {
        self.direction.norm()
    }

    /// Same base point, direction multiplied by `factor`. Horizontality is
    /// preserved under scaling.
    pub fn scaled(&self, factor: f64) -> TangentVector {
        TangentVector {
            at: self.at.clone(),
            direction: &self.direction * factor,
        }
    }
}

/// Top-d eigenspace of a symmetric matrix together with the full spectrum
/// and the spectral gap at the cut.
#[derive(Clone, Debug)]
pub struct Eigenspace {
    pub basis: SubspacePoint,
    /// Full spectrum, sorted descending.
    pub eigenvalues: DVector<f64>,
    /// `mu_d - mu_{d+1}` at the cut index.
    pub gap_at_d: f64,
    /// Set when the gap falls below `DEGENERATE_GAP_TOL`; the eigenspace is
    /// then not uniquely determined and the consumer decides how to proceed.
    pub degenerate_gap: bool,
}

fn check_same_ambient(a: &SubspacePoint, b: &SubspacePoint) -> Result<()> {
    if a.ambient_dim() != b.ambient_dim() {
        return Err(Error::Dimension(format!(
            "ambient dimensions differ: {} vs {}",
            a.ambient_dim(),
            b.ambient_dim()
        )));
    }
    Ok(())
}

/// Modified Gram-Schmidt with a re-orthogonalization pass.
///
/// Returns the orthonormalized columns, or the achieved numerical rank if a
/// pivot collapses below `RANK_TOL` relative to the largest original column.
fn mgs(raw: &DMatrix<f64>) -> std::result::Result<DMatrix<f64>, usize> {
    let (n, k) = raw.shape();
    let mut q = raw.clone();
    let col_scale = (0..k)
        .map(|j| raw.column(j).norm())
        .fold(0.0_f64, f64::max)
        .max(1.0);
    for j in 0..k {
        // two passes keep orthogonality near machine precision
        for _ in 0..2 {
            for i in 0..j {
                let proj = q.column(i).dot(&q.column(j));
                let qi = q.column(i).into_owned();
                let mut cj = q.column_mut(j);
                cj.axpy(-proj, &qi, 1.0);
            }
        }
        let norm = q.column(j).norm();
        if norm <= tol::RANK_TOL * col_scale {
            return Err(j);
        }
        q.column_mut(j).scale_mut(1.0 / norm);
    }
    let _ = n;
    Ok(q)
}

/// Orthonormalizes a full-column-rank matrix, preserving its column space.
pub fn orthonormalize(raw: &DMatrix<f64>) -> Result<SubspacePoint> {
    let (n, k) = raw.shape();
    if k == 0 || k > n {
        return Err(Error::Dimension(format!(
            "cannot orthonormalize a {n} x {k} matrix into a subspace basis"
        )));
    }
    match mgs(raw) {
        Ok(q) => SubspacePoint::from_orthonormal(q),
        Err(rank) => Err(Error::RankDeficient { rank, required: k }),
    }
}

/// Draws a uniformly seeded random subspace by orthonormalizing a Gaussian
/// matrix. Gaussian matrices are full rank almost surely.
pub fn random_subspace<R: Rng + ?Sized>(n: usize, k: usize, rng: &mut R) -> SubspacePoint {
    loop {
        let raw = gaussian_matrix(n, k, rng);
        if let Ok(s) = orthonormalize(&raw) {
            return s;
        }
    }
}

/// n x k matrix with i.i.d. standard normal entries, filled column-major.
pub fn gaussian_matrix<R: Rng + ?Sized>(n: usize, k: usize, rng: &mut R) -> DMatrix<f64> {
    DMatrix::from_fn(n, k, |_, _| rng.sample::<f64, _>(StandardNormal))
}

/// Orthonormal basis for span(A) + span(B), dropping numerically dependent
/// columns instead of failing. Columns of `a` are kept first.
pub(crate) fn orthonormal_union(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    let n = a.nrows();
    let scale = (0..a.ncols())
        .map(|j| a.column(j).norm())
        .chain((0..b.ncols()).map(|j| b.column(j).norm()))
        .fold(0.0_f64, f64::max)
        .max(1.0);
    let mut kept: Vec<DVector<f64>> = Vec::with_capacity(a.ncols() + b.ncols());
    for source in [a, b] {
        for j in 0..source.ncols() {
            let mut col = source.column(j).into_owned();
            for _ in 0..2 {
                for q in &kept {
                    let proj = q.dot(&col);
                    col.axpy(-proj, q, 1.0);
                }
            }
            let norm = col.norm();
            if norm > tol::RANK_TOL * scale {
                kept.push(col / norm);
            }
        }
    }
    let mut out = DMatrix::zeros(n, kept.len());
    for (j, q) in kept.iter().enumerate() {
        out.set_column(j, q);
    }
    out
}

/// Principal angles via the singular values of `A^T B`, clamped to [0, 1]
/// before arccos, returned ascending.
pub fn principal_angles(a: &SubspacePoint, b: &SubspacePoint) -> Result<PrincipalAngleSet> {
    check_same_ambient(a, b)?;
    let cross = a.basis.transpose() * &b.basis;
    let svd = cross.svd(false, false);
    let mut angles: Vec<f64> = svd
        .singular_values
        .iter()
        .map(|&s| s.clamp(0.0, 1.0).acos())
        .collect();
    angles.sort_by(|x, y| x.partial_cmp(y).unwrap());
    Ok(PrincipalAngleSet {
        angles,
        dims: (a.sub_dim(), b.sub_dim()),
    })
}

/// Chordal distance `(|k - d| + sum_i sin^2 theta_i)^{1/2}`.
///
/// Computed as `sqrt(max(k, d) - ||A^T B||_F^2)`, which is algebraically the
/// same and avoids the arccos/sin round trip. When k = d it equals
/// `(1/sqrt(2)) ||P_A - P_B||_F`. That subtraction cancels catastrophically
/// for nearly equal subspaces, so tiny results are recomputed through the
/// projector difference `d_c^2 = |k - d| / 2 + ||P_A - P_B||_F^2 / 2`, which
/// is accurate near zero.
pub fn chordal_distance(a: &SubspacePoint, b: &SubspacePoint) -> Result<f64> {
    check_same_ambient(a, b)?;
    let cross = a.basis.transpose() * &b.basis;
    let overlap = cross.norm_squared();
    let max_dim = a.sub_dim().max(b.sub_dim()) as f64;
    let gram_sq = (max_dim - overlap).max(0.0);
    if gram_sq > 1e-8 {
        return Ok(gram_sq.sqrt());
    }
    let dim_gap = a.sub_dim().abs_diff(b.sub_dim()) as f64;
    let proj_sq = (a.projector() - b.projector()).norm_squared();
    Ok((0.5 * dim_gap + 0.5 * proj_sq).max(0.0).sqrt())
}

/// Squared chordal distance; equals `||P_A^perp P_B||_F^2` when
/// `dim(B) >= dim(A)`.
pub fn chordal_distance_sq(a: &SubspacePoint, b: &SubspacePoint) -> Result<f64> {
    let d = chordal_distance(a, b)?;
    Ok(d * d)
}

/// Top-d eigenspace of a symmetric matrix via dense eigendecomposition.
///
/// The input must be symmetric within `SYMMETRY_TOL` entrywise; it is
/// symmetrized before factorization. A gap below `DEGENERATE_GAP_TOL` sets
/// the degenerate flag instead of failing.
pub fn top_eigenspace(m: &DMatrix<f64>, d: usize) -> Result<Eigenspace> {
    let n = m.nrows();
    if m.ncols() != n {
        return Err(Error::Dimension(format!(
            "expected a square matrix, got {} x {}",
            n,
            m.ncols()
        )));
    }
    if d == 0 || d >= n {
        return Err(Error::Dimension(format!(
            "eigenspace dimension d={d} must satisfy 1 <= d <= n-1 = {}",
            n - 1
        )));
    }
    let mut asym = 0.0_f64;
    for i in 0..n {
        for j in (i + 1)..n {
            asym = asym.max((m[(i, j)] - m[(j, i)]).abs());
        }
    }
    if asym > tol::SYMMETRY_TOL {
        return Err(Error::NotSymmetric(asym));
    }
    let sym = (m + m.transpose()) * 0.5;
    let eig = nalgebra::SymmetricEigen::new(sym);
    Ok(eigenspace_from_pairs(&eig.eigenvalues, &eig.eigenvectors, d))
}

/// Assembles a sorted [`Eigenspace`] from unordered eigenpairs.
pub(crate) fn eigenspace_from_pairs(
    values: &DVector<f64>,
    vectors: &DMatrix<f64>,
    d: usize,
) -> Eigenspace {
    let n = values.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| values[j].partial_cmp(&values[i]).unwrap());
    let sorted = DVector::from_iterator(n, order.iter().map(|&i| values[i]));
    let mut basis = DMatrix::zeros(vectors.nrows(), d);
    for (col, &i) in order.iter().take(d).enumerate() {
        basis.set_column(col, &vectors.column(i));
    }
    let gap = (sorted[d - 1] - sorted[d]).max(0.0);
    // eigenvectors from the symmetric solver are orthonormal by construction
    let basis = SubspacePoint { basis };
    Eigenspace {
        basis,
        eigenvalues: sorted,
        gap_at_d: gap,
        degenerate_gap: gap < tol::DEGENERATE_GAP_TOL,
    }
}

/// Projects a Euclidean gradient onto the horizontal space at `y`:
/// `(I - Y Y^T) * euclid_grad`.
pub fn riemannian_gradient(y: &SubspacePoint, euclid_grad: &DMatrix<f64>) -> Result<TangentVector> {
    if euclid_grad.shape() != y.basis.shape() {
        return Err(Error::Dimension(format!(
            "gradient shape {:?} does not match base point {:?}",
            euclid_grad.shape(),
            y.basis.shape()
        )));
    }
    let coeff = y.basis.transpose() * euclid_grad;
    let direction = euclid_grad - &y.basis * coeff;
    TangentVector::new(y.clone(), direction)
}

/// Grassmannian exponential map along a tangent direction.
///
/// With the thin SVD `direction = Q S V^T`, the geodesic at arc parameter
/// `step` has basis `Y V cos(step S) V^T + Q sin(step S) V^T`; the result is
/// re-orthonormalized to clean accumulated rounding.
pub fn exp_map(v: &TangentVector, step: f64) -> Result<SubspacePoint> {
    let y = &v.at;
    let k = y.sub_dim();
    let svd = v.direction.clone().svd(true, true);
    let q = svd.u.expect("svd with u requested");
    let vt = svd.v_t.expect("svd with v_t requested");
    let sigma = &svd.singular_values;

    let mut cos_s = DMatrix::zeros(k, k);
    let mut sin_s = DMatrix::zeros(k, k);
    for i in 0..k {
        cos_s[(i, i)] = (step * sigma[i]).cos();
        sin_s[(i, i)] = (step * sigma[i]).sin();
    }
    let vmat = vt.transpose();
    let moved = &y.basis * &vmat * cos_s * &vt + q * sin_s * &vt;
    orthonormalize(&moved)
}

/// Draws a subspace on the chordal sphere of the given radius around
/// `center`, by scaling a random geodesic until the measured distance
/// matches the radius.
///
/// The chordal distance along a geodesic `t -> Exp_center(t H)` is strictly
/// increasing until the largest principal angle reaches pi/2, so a bisection
/// on `t` over that range converges; directions whose geodesic cannot reach
/// the radius are resampled.
pub fn sample_ball_boundary(
    center: &SubspacePoint,
    radius: f64,
    rng_seed: u64,
) -> Result<SubspacePoint> {
    let d = center.sub_dim();
    let max_radius = (d as f64).sqrt();
    if !(radius > 0.0 && radius < max_radius) {
        return Err(Error::Domain(format!(
            "boundary radius {radius} outside (0, sqrt(d)) = (0, {max_radius})"
        )));
    }
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(rng_seed);

    for _ in 0..64 {
        let raw = gaussian_matrix(center.ambient_dim(), d, &mut rng);
        let tangent = match riemannian_gradient(center, &raw) {
            Ok(t) => t,
            Err(_) => continue,
        };
        let norm = tangent.norm();
        if norm < 1e-12 {
            continue;
        }
        // largest singular value caps the monotone range of the geodesic
        let svd = tangent.direction.clone().svd(false, false);
        let sigma_max = svd
            .singular_values
            .iter()
            .fold(0.0_f64, |acc, &s| acc.max(s));
        let t_max = std::f64::consts::FRAC_PI_2 / sigma_max;
        let dist_at = |t: f64| -> Result<f64> {
            let point = exp_map(&tangent, t)?;
            chordal_distance(&point, center)
        };
        if dist_at(t_max)? < radius {
            continue;
        }
        let mut lo = 0.0;
        let mut hi = t_max;
        for _ in 0..tol::BISECTION_MAX_ITERS {
            let mid = 0.5 * (lo + hi);
            let dist = dist_at(mid)?;
            if (dist - radius).abs() <= tol::BOUNDARY_SAMPLE_TOL * 1e-2 {
                return exp_map(&tangent, mid);
            }
            if dist < radius {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        return exp_map(&tangent, 0.5 * (lo + hi));
    }
    Err(Error::Domain(
        "could not reach the requested boundary radius from sampled directions".into(),
    ))
}
