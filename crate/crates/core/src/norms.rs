//! Ky Fan k-norm, its dual, and the associated proximal maps.

use crate::error::{Error, Result};
use crate::spectral::{check_matrix, ordered_svd, singular_values, Mat, Vector};

/// Validates `1 <= k <= min(rows, cols)`.
pub fn check_k(k: usize, a: &Mat) -> Result<()> {
    let m = a.nrows().min(a.ncols());
    if k == 0 || k > m {
        return Err(Error::Parameter(format!("k = {k} outside 1..={m}")));
    }
    Ok(())
}

/// Sum of the `k` largest singular values.
pub fn kyfan_norm(a: &Mat, k: usize) -> Result<f64> {
    check_matrix(a, "matrix")?;
    check_k(k, a)?;
    Ok(singular_values(a).iter().take(k).sum())
}

/// `max(sigma_1, ||A||_* / k)`.
pub fn dual_kyfan_norm(a: &Mat, k: usize) -> Result<f64> {
    check_matrix(a, "matrix")?;
    check_k(k, a)?;
    Ok(dual_from_singular(singular_values(a).as_slice(), k))
}

pub(crate) fn dual_from_singular(s: &[f64], k: usize) -> f64 {
    let top = s.first().copied().unwrap_or(0.0);
    top.max(s.iter().sum::<f64>() / k as f64)
}

/// Sum of the `k` largest absolute entries.
pub fn vector_knorm(x: &[f64], k: usize) -> f64 {
    let mut a: Vec<f64> = x.iter().map(|v| v.abs()).collect();
    a.sort_by(|p, q| q.partial_cmp(p).unwrap());
    a.iter().take(k).sum()
}

const TIE_TOL: f64 = 1e-12;

/// Euclidean projection onto `{s : ||s||_inf <= 1, ||s||_1 <= k}`.
pub fn project_dual_ball(x: &[f64], k: usize) -> Vec<f64> {
    let y: Vec<f64> = x.iter().map(|v| v.abs()).collect();
    let clamp = |lam: f64| -> f64 { y.iter().map(|&v| (v - lam).clamp(0.0, 1.0)).sum() };
    let kf = k as f64;
    let lam = if clamp(0.0) <= kf + TIE_TOL {
        0.0
    } else {
        // phi(lam) = sum clamp(y - lam, 0, 1) is piecewise linear and non-increasing
        let mut bps: Vec<f64> = y
            .iter()
            .flat_map(|&v| [v, v - 1.0])
            .filter(|&b| b > 0.0)
            .collect();
        bps.push(0.0);
        bps.sort_by(|p, q| p.partial_cmp(q).unwrap());
        bps.dedup_by(|p, q| (*p - *q).abs() <= TIE_TOL);
        let mut lam = *bps.last().unwrap();
        for w in bps.windows(2) {
            let (lo, hi) = (w[0], w[1]);
            let (flo, fhi) = (clamp(lo), clamp(hi));
            if flo >= kf && fhi <= kf {
                lam = if flo - fhi <= TIE_TOL {
                    lo
                } else {
                    lo + (flo - kf) / (flo - fhi) * (hi - lo)
                };
                break;
            }
        }
        lam
    };
    x.iter()
        .zip(&y)
        .map(|(&xi, &yi)| (yi - lam).clamp(0.0, 1.0).copysign(xi))
        .collect()
}

/// Proximal map of the vector k-norm, `g(x) = x - P(x)`.
pub fn vector_knorm_prox(x: &[f64], k: usize) -> Vec<f64> {
    let p = project_dual_ball(x, k);
    x.iter().zip(p).map(|(a, b)| a - b).collect()
}

/// Moreau split of a matrix into the proximal points of the norm and its conjugate.
#[derive(Debug, Clone)]
pub struct ProxPair {
    pub prox_theta: Mat,
    pub prox_theta_star: Mat,
    pub sigma_bar: Vector,
    pub u_bar: Vector,
}

pub fn matrix_prox_pair(x: &Mat, k: usize, group_tol: Option<f64>) -> Result<ProxPair> {
    check_matrix(x, "matrix")?;
    check_k(k, x)?;
    let svd = ordered_svd(x, group_tol)?;
    let g = vector_knorm_prox(svd.sigma.as_slice(), k);
    let u_bar: Vec<f64> = svd.sigma.iter().zip(&g).map(|(s, gi)| s - gi).collect();
    Ok(ProxPair {
        prox_theta: svd.compose_diag(&g),
        prox_theta_star: svd.compose_diag(&u_bar),
        sigma_bar: Vector::from_vec(g),
        u_bar: Vector::from_vec(u_bar),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::random_orthogonal;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    fn diag(v: &[f64]) -> Mat {
        Mat::from_diagonal(&Vector::from_vec(v.to_vec()))
    }

    fn gauss(m: usize, n: usize, rng: &mut ChaCha8Rng) -> Mat {
        Mat::from_fn(m, n, |_, _| rng.sample::<f64, _>(StandardNormal))
    }

    fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
        a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
    }

    #[test]
    fn norm_examples() {
        assert!((kyfan_norm(&diag(&[3.0, 2.0, 1.0]), 2).unwrap() - 5.0).abs() < 1e-12);
        assert_eq!(kyfan_norm(&Mat::zeros(2, 3), 1).unwrap(), 0.0);
        let p = Mat::from_row_slice(2, 2, &[0.0, 2.0, 1.0, 0.0]);
        assert!((kyfan_norm(&p, 2).unwrap() - 3.0).abs() < 1e-12);
        assert!((dual_kyfan_norm(&Mat::identity(3, 3), 2).unwrap() - 1.5).abs() < 1e-12);
        assert!((dual_kyfan_norm(&diag(&[5.0, 0.0]), 2).unwrap() - 5.0).abs() < 1e-12);
    }

    #[test]
    fn k_out_of_range() {
        assert!(matches!(kyfan_norm(&Mat::zeros(2, 3), 3), Err(Error::Parameter(_))));
        assert!(matches!(dual_kyfan_norm(&Mat::zeros(2, 3), 0), Err(Error::Parameter(_))));
    }

    #[test]
    fn prox_examples() {
        assert_eq!(vector_knorm_prox(&[0.0, 0.0], 1), vec![0.0, 0.0]);
        assert!(close(&vector_knorm_prox(&[3.0, 0.0], 2), &[2.0, 0.0], 1e-12));
        assert!(close(&vector_knorm_prox(&[5.0, 1.0], 1), &[4.0, 1.0], 1e-12));
    }

    #[test]
    fn projection_examples() {
        assert!(close(&project_dual_ball(&[0.3, -0.2], 1), &[0.3, -0.2], 0.0));
        assert!(close(&project_dual_ball(&[2.0, 2.0], 2), &[1.0, 1.0], 1e-12));
        assert!(close(&project_dual_ball(&[5.0, 1.0], 1), &[1.0, 0.0], 1e-12));
        // l1 active with interior box coordinates: lambda = 0.5
        assert!(close(&project_dual_ball(&[1.2, -0.8, 0.1], 1), &[0.7, -0.3, 0.0], 1e-12));
    }

    #[test]
    fn matrix_prox_examples() {
        let z = matrix_prox_pair(&Mat::zeros(2, 2), 1, None).unwrap();
        assert_eq!(z.prox_theta.norm(), 0.0);
        assert_eq!(z.prox_theta_star.norm(), 0.0);
        let p = matrix_prox_pair(&diag(&[5.0, 1.0]), 1, None).unwrap();
        assert!((p.prox_theta - diag(&[4.0, 1.0])).abs().max() < 1e-12);
        assert!((p.prox_theta_star - diag(&[1.0, 0.0])).abs().max() < 1e-12);
    }

    #[test]
    fn duality_pairing_sampled() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for t in 0..1000 {
            let (m, n) = (1 + t % 4, 1 + t % 4 + (t / 4) % 3);
            let k = 1 + t % m;
            let y = gauss(m, n, &mut rng);
            let z = gauss(m, n, &mut rng);
            let lhs = y.dot(&z);
            let rhs = dual_kyfan_norm(&y, k).unwrap() * kyfan_norm(&z, k).unwrap();
            assert!(lhs <= rhs + 1e-9);
        }
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(96))]

            #[test]
            fn prox_kkt(x in proptest::collection::vec(-4.0f64..4.0, 1..8), kk in 1usize..8) {
                let k = 1 + (kk - 1) % x.len();
                let g = vector_knorm_prox(&x, k);
                let s: Vec<f64> = x.iter().zip(&g).map(|(a, b)| a - b).collect();
                let linf = s.iter().fold(0.0f64, |m, v| m.max(v.abs()));
                let l1: f64 = s.iter().map(|v| v.abs()).sum();
                prop_assert!(linf <= 1.0 + 1e-12);
                prop_assert!(l1 <= k as f64 + 1e-9);
                let pairing: f64 = s.iter().zip(&g).map(|(a, b)| a * b).sum();
                prop_assert!((pairing - vector_knorm(&g, k)).abs() <= 1e-9);
            }

            #[test]
            fn unitary_invariance(m in 1usize..5, extra in 0usize..3, seed in 0u64..500) {
                let n = m + extra;
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let a = gauss(m, n, &mut rng);
                let p = random_orthogonal(m, &mut rng);
                let q = random_orthogonal(n, &mut rng);
                for k in 1..=m {
                    let base = kyfan_norm(&a, k).unwrap();
                    let rot = kyfan_norm(&(&p * &a * q.transpose()), k).unwrap();
                    prop_assert!((base - rot).abs() <= 1e-9);
                }
            }

            #[test]
            fn norm_axioms(m in 1usize..5, extra in 0usize..3, seed in 0u64..500, c in -3.0f64..3.0) {
                let n = m + extra;
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let a = gauss(m, n, &mut rng);
                let b = gauss(m, n, &mut rng);
                for k in 1..=m {
                    let na = kyfan_norm(&a, k).unwrap();
                    let nb = kyfan_norm(&b, k).unwrap();
                    prop_assert!(kyfan_norm(&(&a + &b), k).unwrap() <= na + nb + 1e-9);
                    prop_assert!((kyfan_norm(&(&a * c), k).unwrap() - c.abs() * na).abs() <= 1e-9);
                }
            }

            #[test]
            fn fan_von_neumann(m in 1usize..5, extra in 0usize..3, seed in 0u64..500) {
                let n = m + extra;
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let y = gauss(m, n, &mut rng);
                let z = gauss(m, n, &mut rng);
                let sy = singular_values(&y);
                let sz = singular_values(&z);
                prop_assert!(y.dot(&z) <= sy.dot(&sz) + 1e-9);
                // shared factors give equality
                let svd = crate::spectral::ordered_svd(&y, None).unwrap();
                let zz = svd.compose_diag(sz.as_slice());
                prop_assert!((y.dot(&zz) - sy.dot(&sz)).abs() <= 1e-9);
            }

            #[test]
            fn moreau_and_subgradient(m in 1usize..5, extra in 0usize..3, seed in 0u64..500, scale in 0.1f64..4.0) {
                let n = m + extra;
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let x = gauss(m, n, &mut rng) * scale;
                for k in 1..=m {
                    let p = matrix_prox_pair(&x, k, None).unwrap();
                    prop_assert!((&p.prox_theta + &p.prox_theta_star - &x).abs().max() <= 1e-10);
                    prop_assert!(dual_kyfan_norm(&p.prox_theta_star, k).unwrap() <= 1.0 + 1e-9);
                    let pair = p.prox_theta_star.dot(&p.prox_theta);
                    prop_assert!((pair - kyfan_norm(&p.prox_theta, k).unwrap()).abs() <= 1e-8);
                    for i in 1..m {
                        prop_assert!(p.sigma_bar[i - 1] >= p.sigma_bar[i] - 1e-12);
                        prop_assert!(p.u_bar[i - 1] >= p.u_bar[i] - 1e-12);
                    }
                    prop_assert!(p.sigma_bar.iter().chain(p.u_bar.iter()).all(|&v| v >= -1e-12));
                }
            }
        }
    }
}
