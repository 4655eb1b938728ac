//! Ordered singular value decomposition with tolerance-based grouping.
//!
//! Every matrix is handled in a frame with `m <= n`. Wider-than-tall inputs
//! are transposed once on entry and the flag is kept on the decomposition so
//! directions can be mapped into the same frame with [`OrderedSvd::orient`].

use std::ops::Range;

use nalgebra::linalg::SymmetricEigen;
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

pub type Mat = DMatrix<f64>;
pub type Vector = DVector<f64>;

/// Default grouping tolerance relative to the largest singular value.
pub fn default_group_tol(sigma_max: f64) -> f64 {
    1e-8 * sigma_max.max(1.0)
}

/// Partition of `0..m` into positive blocks `a_1..a_r`, the zero block `b`,
/// plus the column tail `c = m..n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupPartition {
    pub blocks: Vec<Range<usize>>,
    pub zero_block: Range<usize>,
    pub tail_block: Range<usize>,
}

impl GroupPartition {
    /// Groups non-increasing nonnegative `values` (length m) for an m x n matrix.
    pub fn from_sorted(values: &[f64], n: usize, tol: f64) -> Self {
        let m = values.len();
        // the zero block is everything chained down to 0 by gaps <= tol
        let mut zstart = m;
        let mut prev = 0.0;
        while zstart > 0 && values[zstart - 1] - prev <= tol {
            prev = values[zstart - 1];
            zstart -= 1;
        }
        let blocks = cluster_sorted(&values[..zstart], tol);
        GroupPartition {
            blocks,
            zero_block: zstart..m,
            tail_block: m..n.max(m),
        }
    }

    pub fn m(&self) -> usize {
        self.zero_block.end
    }

    /// Number of positive blocks.
    pub fn r(&self) -> usize {
        self.blocks.len()
    }

    /// Positive blocks followed by the zero block (possibly empty), i.e. `a_1..a_{r+1}`.
    pub fn all_blocks(&self) -> Vec<Range<usize>> {
        let mut all = self.blocks.clone();
        all.push(self.zero_block.clone());
        all
    }

    /// Index of the positive block holding `i`, or `None` when `i` is in `b`.
    pub fn block_of(&self, i: usize) -> Option<usize> {
        self.blocks.iter().position(|b| b.contains(&i))
    }

    fn range_of(&self, i: usize) -> Range<usize> {
        match self.block_of(i) {
            Some(l) => self.blocks[l].clone(),
            None => self.zero_block.clone(),
        }
    }

    /// Number of entries equal to entry `i` ranked before it, `i` included.
    pub fn l(&self, i: usize) -> usize {
        i - self.range_of(i).start + 1
    }

    /// Number of entries equal to entry `i` ranked after it.
    pub fn s(&self, i: usize) -> usize {
        self.range_of(i).end - i - 1
    }
}

/// Splits a non-increasing sequence into maximal runs whose consecutive gaps are `<= tol`.
pub fn cluster_sorted(values: &[f64], tol: f64) -> Vec<Range<usize>> {
    let mut out = Vec::new();
    let mut start = 0;
    for i in 1..=values.len() {
        if i == values.len() || values[i - 1] - values[i] > tol {
            if i > start {
                out.push(start..i);
            }
            start = i;
        }
    }
    out
}

/// Full SVD `X = U [Diag(sigma) 0] V^T` in the `m <= n` frame.
#[derive(Debug, Clone)]
pub struct OrderedSvd {
    pub u: Mat,
    pub v: Mat,
    pub sigma: Vector,
    pub groups: GroupPartition,
    pub group_tol: f64,
    pub transposed: bool,
}

impl OrderedSvd {
    pub fn m(&self) -> usize {
        self.u.nrows()
    }

    pub fn n(&self) -> usize {
        self.v.nrows()
    }

    pub fn v1(&self) -> Mat {
        self.v.columns(0, self.m()).into_owned()
    }

    pub fn v2(&self) -> Mat {
        self.v.columns(self.m(), self.n() - self.m()).into_owned()
    }

    pub fn sigma_max(&self) -> f64 {
        if self.sigma.is_empty() {
            0.0
        } else {
            self.sigma[0]
        }
    }

    /// Maps an ambient matrix into the decomposition frame.
    pub fn orient(&self, a: &Mat) -> Mat {
        if self.transposed {
            a.transpose()
        } else {
            a.clone()
        }
    }

    /// Inverse of [`orient`](Self::orient).
    pub fn unorient(&self, a: &Mat) -> Mat {
        self.orient(a)
    }

    /// Shape of the ambient matrix.
    pub fn ambient_shape(&self) -> (usize, usize) {
        if self.transposed {
            (self.n(), self.m())
        } else {
            (self.m(), self.n())
        }
    }

    /// `U^T H V` for an ambient direction `H` (m x n).
    pub fn rotate(&self, h: &Mat) -> Mat {
        self.u.transpose() * self.orient(h) * &self.v
    }

    /// `U D V^T` for an m x n matrix `D` given in singular coordinates, returned in ambient shape.
    pub fn compose(&self, d: &Mat) -> Mat {
        self.unorient(&(&self.u * d * self.v.transpose()))
    }

    /// `U [Diag(d) 0] V^T` in ambient shape.
    pub fn compose_diag(&self, d: &[f64]) -> Mat {
        let mut full = Mat::zeros(self.m(), self.n());
        for (i, &x) in d.iter().enumerate() {
            full[(i, i)] = x;
        }
        self.compose(&full)
    }

    pub fn reconstruct(&self) -> Mat {
        self.compose_diag(self.sigma.as_slice())
    }
}

/// Rejects empty or non-finite matrices.
pub fn check_matrix(a: &Mat, name: &str) -> Result<()> {
    if a.nrows() == 0 || a.ncols() == 0 {
        return Err(Error::Input(format!("{name} is empty")));
    }
    if a.iter().any(|x| !x.is_finite()) {
        return Err(Error::Input(format!("{name} has non-finite entries")));
    }
    Ok(())
}

pub fn check_same_shape(a: &Mat, b: &Mat, what: &str) -> Result<()> {
    if a.shape() != b.shape() {
        return Err(Error::Input(format!(
            "shape mismatch for {what}: {:?} vs {:?}",
            a.shape(),
            b.shape()
        )));
    }
    Ok(())
}

/// Decomposes `a` with singular values in non-increasing order and groups them.
///
/// `group_tol = None` selects [`default_group_tol`].
pub fn ordered_svd(a: &Mat, group_tol: Option<f64>) -> Result<OrderedSvd> {
    check_matrix(a, "matrix")?;
    if let Some(t) = group_tol {
        if !(t >= 0.0) || !t.is_finite() {
            return Err(Error::Parameter(format!("group_tol must be finite and >= 0, got {t}")));
        }
    }
    let transposed = a.nrows() > a.ncols();
    let work = if transposed { a.transpose() } else { a.clone() };
    let (m, n) = work.shape();

    let (u, mut v, sigma) = jacobi_svd(&work)?;
    if n > m {
        let comp = orthonormal_complement(&v.columns(0, m).into_owned());
        v = v.insert_columns(m, n - m, 0.0);
        v.columns_mut(m, n - m).copy_from(&comp);
    }

    let tol = group_tol.unwrap_or_else(|| default_group_tol(sigma.get(0).copied().unwrap_or(0.0)));
    let groups = GroupPartition::from_sorted(sigma.as_slice(), n, tol);
    Ok(OrderedSvd {
        u,
        v,
        sigma,
        groups,
        group_tol: tol,
        transposed,
    })
}

/// One-sided Jacobi SVD of a wide matrix `a` (m <= n).
///
/// Returns `U` (m x m), `V1` (n x m) and the singular values, all sorted
/// non-increasingly. Columns of `V1` attached to numerically null singular
/// values are replaced by an orthonormal completion.
fn jacobi_svd(a: &Mat) -> Result<(Mat, Mat, Vector)> {
    let (m, n) = a.shape();
    let mut g = a.transpose();
    let mut j = Mat::identity(m, m);
    let tol = f64::EPSILON * (n as f64).sqrt();
    // columns below this squared norm are numerically null and never rotated
    let null_sq = (f64::EPSILON * a.norm()).powi(2);
    let mut converged = m < 2;
    for _sweep in 0..80 {
        let mut rotated = false;
        for p in 0..m {
            for q in (p + 1)..m {
                let alpha = g.column(p).norm_squared();
                let beta = g.column(q).norm_squared();
                let gamma = g.column(p).dot(&g.column(q));
                if gamma == 0.0 || alpha.min(beta) <= null_sq || gamma.abs() <= tol * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                rotate_columns(&mut g, p, q, c, s);
                rotate_columns(&mut j, p, q, c, s);
            }
        }
        if !rotated {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::Decomposition("Jacobi sweeps did not converge".into()));
    }
    let norms: Vec<f64> = (0..m).map(|i| g.column(i).norm()).collect();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&x, &y| norms[y].partial_cmp(&norms[x]).unwrap_or(std::cmp::Ordering::Equal));
    let smax = norms.iter().cloned().fold(0.0, f64::max);
    let null_tol = smax * f64::EPSILON * (m.max(n) as f64);

    let mut u = Mat::zeros(m, m);
    let mut sigma = Vector::zeros(m);
    let mut good = Vec::new();
    for (dst, &src) in order.iter().enumerate() {
        u.set_column(dst, &j.column(src));
        sigma[dst] = norms[src];
        if norms[src] > null_tol {
            good.push(src);
        }
    }
    let mut v1 = Mat::zeros(n, m);
    for (dst, &src) in good.iter().enumerate() {
        v1.set_column(dst, &(g.column(src) / norms[src]));
    }
    if good.len() < m {
        let comp = orthonormal_complement(&v1.columns(0, good.len()).into_owned());
        v1.columns_mut(good.len(), m - good.len())
            .copy_from(&comp.columns(0, m - good.len()));
    }
    Ok((u, v1, sigma))
}

fn rotate_columns(a: &mut Mat, p: usize, q: usize, c: f64, s: f64) {
    for r in 0..a.nrows() {
        let x = a[(r, p)];
        let y = a[(r, q)];
        a[(r, p)] = c * x - s * y;
        a[(r, q)] = s * x + c * y;
    }
}

/// Singular values of `a` in non-increasing order (length `min(rows, cols)`).
pub fn singular_values(a: &Mat) -> Vector {
    if a.nrows() == 0 || a.ncols() == 0 {
        return Vector::zeros(0);
    }
    let work = if a.nrows() > a.ncols() { a.transpose() } else { a.clone() };
    match jacobi_svd(&work) {
        Ok((_, _, s)) => s,
        Err(_) => Vector::from_element(work.nrows(), f64::NAN),
    }
}

/// Another SVD of the same matrix, rotated inside every block.
pub fn equivalent_svd(svd: &OrderedSvd, seed: u64) -> OrderedSvd {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = svd.clone();
    for blk in &svd.groups.blocks {
        let q = random_orthogonal(blk.len(), &mut rng);
        let uq = svd.u.columns(blk.start, blk.len()) * &q;
        let vq = svd.v.columns(blk.start, blk.len()) * &q;
        out.u.columns_mut(blk.start, blk.len()).copy_from(&uq);
        out.v.columns_mut(blk.start, blk.len()).copy_from(&vq);
    }
    let b = svd.groups.zero_block.clone();
    if !b.is_empty() {
        let qb = random_orthogonal(b.len(), &mut rng);
        let ub = svd.u.columns(b.start, b.len()) * &qb;
        out.u.columns_mut(b.start, b.len()).copy_from(&ub);
    }
    let width = svd.n() - b.start;
    if width > 0 {
        let qc = random_orthogonal(width, &mut rng);
        let vc = svd.v.columns(b.start, width) * &qc;
        out.v.columns_mut(b.start, width).copy_from(&vc);
    }
    out
}

/// Haar-distributed orthogonal matrix.
pub fn random_orthogonal<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Mat {
    if n == 0 {
        return Mat::zeros(0, 0);
    }
    let g = Mat::from_fn(n, n, |_, _| rng.sample::<f64, _>(StandardNormal));
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..n {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    q
}

/// Orthonormal basis of the orthogonal complement of the columns of `q`.
pub fn orthonormal_complement(q: &Mat) -> Mat {
    let n = q.nrows();
    let p = q.ncols();
    let mut basis = q.clone();
    let mut out = Mat::zeros(n, n - p);
    for col in 0..(n - p) {
        let mut best: Option<Vector> = None;
        let mut best_norm = -1.0;
        for e in 0..n {
            let mut x = Vector::zeros(n);
            x[e] = 1.0;
            for _ in 0..2 {
                let proj = basis.transpose() * &x;
                x -= &basis * proj;
            }
            let nx = x.norm();
            if nx > best_norm {
                best_norm = nx;
                best = Some(x);
            }
        }
        let x = best.expect("n > p") / best_norm;
        out.set_column(col, &x);
        let last = basis.ncols();
        basis = basis.insert_column(last, 0.0);
        basis.set_column(last, &x);
    }
    out
}

/// Eigen-decomposition of the symmetric part of `a`, eigenvalues non-increasing.
pub fn sym_eigen_desc(a: &Mat) -> (Vector, Mat) {
    let n = a.nrows();
    if n == 0 {
        return (Vector::zeros(0), Mat::zeros(0, 0));
    }
    let eig = SymmetricEigen::new(sym(a));
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        eig.eigenvalues[j]
            .partial_cmp(&eig.eigenvalues[i])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let mut vals = Vector::zeros(n);
    let mut vecs = Mat::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vals[dst] = eig.eigenvalues[src];
        vecs.set_column(dst, &eig.eigenvectors.column(src));
    }
    (vals, vecs)
}

/// Eigenvalues of the symmetric part of `a`, non-increasing.
pub fn sym_eigenvalues_desc(a: &Mat) -> Vector {
    sym_eigen_desc(a).0
}

/// `(A + A^T) / 2`.
pub fn sym(a: &Mat) -> Mat {
    (a + a.transpose()) * 0.5
}

/// `(A - A^T) / 2`.
pub fn skew(a: &Mat) -> Mat {
    (a - a.transpose()) * 0.5
}

/// Frobenius inner product.
pub fn inner(a: &Mat, b: &Mat) -> f64 {
    a.dot(b)
}

/// Submatrix with the given row and column index lists.
pub fn sub(a: &Mat, rows: &[usize], cols: &[usize]) -> Mat {
    Mat::from_fn(rows.len(), cols.len(), |i, j| a[(rows[i], cols[j])])
}

/// Contiguous submatrix `a[rows, cols]`.
pub fn block(a: &Mat, rows: Range<usize>, cols: Range<usize>) -> Mat {
    a.view((rows.start, cols.start), (rows.len(), cols.len())).into_owned()
}

/// Columns of `a` selected by index list.
pub fn cols(a: &Mat, idx: &[usize]) -> Mat {
    Mat::from_fn(a.nrows(), idx.len(), |i, j| a[(i, idx[j])])
}
