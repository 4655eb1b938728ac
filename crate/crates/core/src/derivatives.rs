//! First- and second-order directional derivatives of singular values.
//!
//! All quantities are computed from `H̃ = U^T H V` and `W̃ = U^T W V` in the
//! frame of an [`OrderedSvd`]. Inside each block the inner eigen- or singular
//! values are sorted non-increasingly and assigned by rank.

use crate::error::{Error, Result};
use crate::spectral::{block, check_matrix, cluster_sorted, ordered_svd, singular_values, skew, sym, sym_eigen_desc, Mat, OrderedSvd, Vector};

fn check_direction(svd: &OrderedSvd, h: &Mat, name: &str) -> Result<()> {
    check_matrix(h, name)?;
    if h.shape() != svd.ambient_shape() {
        return Err(Error::Input(format!(
            "{name} has shape {:?}, expected {:?}",
            h.shape(),
            svd.ambient_shape()
        )));
    }
    Ok(())
}

/// `σ'(X; H)` from a rotated direction `H̃`.
pub(crate) fn sigma_dd1_rotated(svd: &OrderedSvd, ht: &Mat) -> Vector {
    let (m, n) = (svd.m(), svd.n());
    let mut out = Vector::zeros(m);
    for a in &svd.groups.blocks {
        let lam = sym_eigen_desc(&block(ht, a.clone(), a.clone())).0;
        for (p, i) in a.clone().enumerate() {
            out[i] = lam[p];
        }
    }
    let b = svd.groups.zero_block.clone();
    if !b.is_empty() {
        let s = singular_values(&block(ht, b.clone(), b.start..n));
        for (p, i) in b.enumerate() {
            out[i] = s[p];
        }
    }
    out
}

/// Directional derivatives `σ'_i(X; H)` for all `i`.
pub fn sigma_dd1(svd: &OrderedSvd, h: &Mat) -> Result<Vector> {
    check_direction(svd, h, "h")?;
    Ok(sigma_dd1_rotated(svd, &svd.rotate(h)))
}

/// `θ'(X; H) = Σ_{i<=k} σ'_i(X; H)`.
pub fn theta_dd1(svd: &OrderedSvd, h: &Mat, k: usize) -> Result<f64> {
    check_k_svd(svd, k)?;
    Ok(sigma_dd1(svd, h)?.iter().take(k).sum())
}

pub(crate) fn check_k_svd(svd: &OrderedSvd, k: usize) -> Result<()> {
    if k == 0 || k > svd.m() {
        return Err(Error::Parameter(format!("k = {k} outside 1..={}", svd.m())));
    }
    Ok(())
}

/// The quadratic correction block `Ω_a(X, H)`.
#[derive(Debug, Clone)]
pub struct OmegaMatrix {
    pub block: Vec<usize>,
    pub value: Mat,
}

/// `Ω` from a rotated direction and an explicit diagonal `sigma`.
///
/// Entries with `|σ_i - ν| <= tol` are dropped from the first pseudoinverse.
pub(crate) fn omega_rotated(ht: &Mat, sigma: &[f64], block: &[usize], nu: f64, tol: f64) -> Mat {
    let m = ht.nrows();
    let n = ht.ncols();
    let h1 = ht.columns(0, m).into_owned();
    let s = sym(&h1);
    let t = skew(&h1);
    let ds: Vec<f64> = sigma
        .iter()
        .map(|&x| if (x - nu).abs() <= tol { 0.0 } else { 1.0 / (x - nu) })
        .collect();
    let dt: Vec<f64> = sigma.iter().map(|&x| -1.0 / (x + nu)).collect();
    let q = block.len();
    let mut out = Mat::zeros(q, q);
    for p in 0..q {
        for r in p..q {
            let (bp, br) = (block[p], block[r]);
            let mut v = 0.0;
            for i in 0..m {
                v += s[(i, bp)] * ds[i] * s[(i, br)] + t[(i, bp)] * dt[i] * t[(i, br)];
            }
            let mut c = 0.0;
            for j in m..n {
                c += ht[(bp, j)] * ht[(br, j)];
            }
            v -= c / (2.0 * nu);
            out[(p, r)] = v;
            out[(r, p)] = v;
        }
    }
    out
}

/// `Ω_a(X, H)` for a block of positive singular values with common value `nu`.
pub fn omega_matrix(svd: &OrderedSvd, h: &Mat, block: &[usize], nu: f64) -> Result<OmegaMatrix> {
    check_direction(svd, h, "h")?;
    if !(nu > 0.0) {
        return Err(Error::Parameter(format!("nu must be positive, got {nu}")));
    }
    if let Some(&bad) = block.iter().find(|&&i| i >= svd.m()) {
        return Err(Error::Parameter(format!("block index {} outside 1..={}", bad + 1, svd.m())));
    }
    let ht = svd.rotate(h);
    Ok(OmegaMatrix {
        block: block.to_vec(),
        value: omega_rotated(&ht, svd.sigma.as_slice(), block, nu, svd.group_tol),
    })
}

/// `σ''(X; H, W)` from rotated directions.
pub(crate) fn sigma_dd2_rotated(svd: &OrderedSvd, ht: &Mat, wt: &Mat, gtol: f64) -> Result<Vector> {
    let (m, n) = (svd.m(), svd.n());
    let sigma = svd.sigma.as_slice();
    let mut out = Vector::zeros(m);

    for a in &svd.groups.blocks {
        let idx: Vec<usize> = a.clone().collect();
        let nu = idx.iter().map(|&i| sigma[i]).sum::<f64>() / idx.len() as f64;
        let omega = omega_rotated(ht, sigma, &idx, nu, svd.group_tol);
        let mm = sym(&block(wt, a.clone(), a.clone())) - omega * 2.0;
        let (lam, r) = sym_eigen_desc(&block(ht, a.clone(), a.clone()));
        for g in cluster_sorted(lam.as_slice(), gtol) {
            let rg = r.columns(g.start, g.len());
            let inner = sym_eigen_desc(&(rg.transpose() * &mm * rg)).0;
            for (p, pos) in g.enumerate() {
                out[a.start + pos] = inner[p];
            }
        }
    }

    let b = svd.groups.zero_block.clone();
    if !b.is_empty() {
        // Z̃ = W̃ - 2 H̃ P H̃ with P = [Diag(σ^†); 0]
        let mut hp = ht.columns(0, m).into_owned();
        for i in 0..m {
            let inv = if b.contains(&i) { 0.0 } else { 1.0 / sigma[i] };
            hp.column_mut(i).scale_mut(inv);
        }
        let zt = wt - (hp * ht) * 2.0;
        let bmat = block(ht, b.clone(), b.start..n);
        let zb = block(&zt, b.clone(), b.start..n);
        let inner = ordered_svd(&bmat, Some(gtol))?;
        let (e, f) = (&inner.u, &inner.v);
        for g in &inner.groups.blocks {
            let eg = e.columns(g.start, g.len());
            let fg = f.columns(g.start, g.len());
            let vals = sym_eigen_desc(&(eg.transpose() * &zb * fg)).0;
            for (p, pos) in g.clone().enumerate() {
                out[b.start + pos] = vals[p];
            }
        }
        let z0 = inner.groups.zero_block.clone();
        if !z0.is_empty() {
            let ez = e.columns(z0.start, z0.len());
            let fz = f.columns(z0.start, f.ncols() - z0.start);
            let vals = singular_values(&(ez.transpose() * &zb * fz));
            for (p, pos) in z0.enumerate() {
                out[b.start + pos] = vals[p];
            }
        }
    }
    Ok(out)
}

/// Which formula produces `σ''_i`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SecondOrderCase {
    /// `i` lies in a positive block of `σ(X)`.
    PositiveBlock,
    /// `i` lies in the zero block and the inner singular value of `H̃` there is positive.
    ZeroBlockPositiveInner,
    /// `i` lies in the zero block and the inner singular value of `H̃` there is zero.
    ZeroBlockZeroInner,
}

/// Case of every index `i` for direction `h`.
pub fn sigma_dd2_cases(svd: &OrderedSvd, h: &Mat, group_tol: Option<f64>) -> Result<Vec<SecondOrderCase>> {
    check_direction(svd, h, "h")?;
    let gtol = group_tol.unwrap_or(svd.group_tol);
    let ht = svd.rotate(h);
    let m = svd.m();
    let b = svd.groups.zero_block.clone();
    let mut out = vec![SecondOrderCase::PositiveBlock; m];
    if !b.is_empty() {
        let inner = ordered_svd(&block(&ht, b.clone(), b.start..svd.n()), Some(gtol))?;
        for (p, i) in b.enumerate() {
            out[i] = if inner.groups.zero_block.contains(&p) {
                SecondOrderCase::ZeroBlockZeroInner
            } else {
                SecondOrderCase::ZeroBlockPositiveInner
            };
        }
    }
    Ok(out)
}

/// Second-order directional derivatives `σ''_i(X; H, W)` for all `i`.
///
/// `group_tol = None` reuses the grouping tolerance of `svd` for the inner groupings.
pub fn sigma_dd2(svd: &OrderedSvd, h: &Mat, w: &Mat, group_tol: Option<f64>) -> Result<Vector> {
    check_direction(svd, h, "h")?;
    check_direction(svd, w, "w")?;
    let gtol = group_tol.unwrap_or(svd.group_tol);
    sigma_dd2_rotated(svd, &svd.rotate(h), &svd.rotate(w), gtol)
}

/// `θ''(X; H, W) = Σ_{i<=k} σ''_i(X; H, W)`.
pub fn theta_dd2(svd: &OrderedSvd, h: &Mat, w: &Mat, k: usize) -> Result<f64> {
    check_k_svd(svd, k)?;
    Ok(sigma_dd2(svd, h, w, None)?.iter().take(k).sum())
}
