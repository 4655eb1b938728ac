//! The sigma-term `Υ_X̄(S̄, H)` and its dual counterpart `Υ°_S̄(X̄, H)`.
//!
//! Route A evaluates the Ω-trace definitions directly. Route B sums weighted
//! squared compartment norms of `S(H̃_1)`, `T(H̃_1)` and `H̃_2` over the
//! blocks of the analysis. The routes share nothing beyond `H̃ = Ū^T H V̄`.

use std::ops::Range;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::cones::{critical_cone_primal_contains, TOL_CONE};
use crate::derivatives::omega_rotated;
use crate::error::{Error, Result};
use crate::ge::{BlockClass, GeAnalysis, SigmaCase};
use crate::spectral::{check_matrix, skew, sym, Mat};

/// Both evaluations of a sigma-term.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SigmaTermResult {
    pub value_omega_route: f64,
    pub value_quadratic_route: f64,
    pub equality_conditions_hold: bool,
    pub route_gap: f64,
}

/// Allowed gap between the two routes.
pub fn route_threshold(h: &Mat) -> f64 {
    1e-9 * h.norm_squared().max(1.0)
}

fn check_h(an: &GeAnalysis, h: &Mat) -> Result<()> {
    check_matrix(h, "h")?;
    if h.shape() != an.ambient_shape() {
        return Err(Error::Input(format!("h has shape {:?}, expected {:?}", h.shape(), an.ambient_shape())));
    }
    Ok(())
}

fn eq_tol(an: &GeAnalysis) -> f64 {
    an.options.class_tol * an.svd.sigma_max().max(1.0)
}

fn sq(a: &Mat, rows: &Range<usize>, cols: &Range<usize>) -> f64 {
    a.view((rows.start, cols.start), (rows.len(), cols.len())).norm_squared()
}

fn tail_sq(ht: &Mat, rows: &Range<usize>) -> f64 {
    let m = ht.nrows();
    ht.view((rows.start, m), (rows.len(), ht.ncols() - m)).norm_squared()
}

/// `(H̃ [Diag(d^†); 0] H̃)_jj` with entries `d_i <= tol` dropped.
fn pinv_quadratic_diag(ht: &Mat, d: &[f64], j: usize, tol: f64) -> f64 {
    d.iter()
        .enumerate()
        .filter(|(_, &x)| x > tol)
        .map(|(i, &x)| ht[(j, i)] * ht[(i, j)] / x)
        .sum()
}

struct Parts {
    s: Mat,
    t: Mat,
}

fn parts(ht: &Mat) -> Parts {
    let h1 = ht.columns(0, ht.nrows()).into_owned();
    Parts { s: sym(&h1), t: skew(&h1) }
}

fn sigma_bar_k_block(an: &GeAnalysis) -> f64 {
    let l = an.blocks.iter().position(|b| b.contains(&(an.k - 1))).expect("k inside a block");
    an.block_sigma_bar[l]
}

fn block_mu(an: &GeAnalysis, l: usize) -> f64 {
    match an.classes[l] {
        BlockClass::Alpha | BlockClass::Beta1 => 1.0,
        BlockClass::Beta2 => an.block_u_bar[l],
        BlockClass::Beta3 | BlockClass::Gamma => 0.0,
    }
}

/// `Υ` through the Ω-trace definition.
pub(crate) fn upsilon_primal_route_a(an: &GeAnalysis, ht: &Mat) -> f64 {
    let tol = eq_tol(an);
    let sb = an.sigma_bar.as_slice();
    let mut v = 0.0;
    for (l, b) in an.blocks.iter().enumerate() {
        if an.classes[l] == BlockClass::Alpha {
            let idx: Vec<usize> = b.clone().collect();
            v += 2.0 * omega_rotated(ht, sb, &idx, an.block_sigma_bar[l], tol).trace();
        }
    }
    let beta: Vec<usize> = an.beta.clone().collect();
    match an.case {
        SigmaCase::PositiveSigmaK => {
            let om = omega_rotated(ht, sb, &beta, sigma_bar_k_block(an), tol);
            for (p, &j) in beta.iter().enumerate() {
                v += 2.0 * an.u_bar[j] * om[(p, p)];
            }
        }
        SigmaCase::ZeroSigmaK => {
            for &j in &beta {
                v += 2.0 * an.u_bar[j] * pinv_quadratic_diag(ht, sb, j, tol);
            }
        }
    }
    v
}

/// `Υ` through the compartment expansion.
pub(crate) fn upsilon_primal_route_b(an: &GeAnalysis, ht: &Mat) -> f64 {
    use BlockClass::*;
    let Parts { s, t } = parts(ht);
    let bl = &an.blocks;
    let cl = &an.classes;
    let nu = |l: usize| an.block_sigma_bar[l];
    let mu = |l: usize| block_mu(an, l);
    let mut v = 0.0;
    match an.case {
        SigmaCase::PositiveSigmaK => {
            let sk = sigma_bar_k_block(an);
            for l in 0..bl.len() {
                for lp in 0..bl.len() {
                    let s2 = sq(&s, &bl[l], &bl[lp]);
                    let t2 = sq(&t, &bl[l], &bl[lp]);
                    match (cl[l], cl[lp]) {
                        (Alpha, Beta2) => v += 2.0 * (1.0 - mu(lp)) / (sk - nu(l)) * s2,
                        (Alpha, Beta3 | Gamma) => v += 2.0 / (nu(lp) - nu(l)) * s2,
                        (Beta1 | Beta2, Gamma) => v += 2.0 * mu(l) / (nu(lp) - sk) * s2,
                        _ => {}
                    }
                    match cl[l] {
                        Alpha => v += 2.0 / (-nu(lp) - nu(l)) * t2,
                        Beta1 | Beta2 => v += 2.0 * mu(l) / (-nu(lp) - sk) * t2,
                        _ => {}
                    }
                }
                match cl[l] {
                    Alpha => v -= tail_sq(ht, &bl[l]) / nu(l),
                    Beta1 | Beta2 => v -= mu(l) * tail_sq(ht, &bl[l]) / sk,
                    _ => {}
                }
            }
        }
        SigmaCase::ZeroSigmaK => {
            for l in (0..bl.len()).filter(|&l| cl[l] == Alpha) {
                let w = nu(l);
                for lp in 0..bl.len() {
                    let s2 = sq(&s, &bl[l], &bl[lp]);
                    let t2 = sq(&t, &bl[l], &bl[lp]);
                    match cl[lp] {
                        Alpha => v += 2.0 / (-nu(lp) - w) * t2,
                        Beta1 => v += -4.0 / w * t2,
                        Beta2 => v += 2.0 * (mu(lp) - 1.0) / w * s2 - 2.0 * (mu(lp) + 1.0) / w * t2,
                        Beta3 | Gamma => v += -2.0 / w * (s2 + t2),
                    }
                }
                v -= tail_sq(ht, &bl[l]) / w;
            }
        }
    }
    v
}

/// `Υ°` through the Ω-trace definition built from the singular values of `S̄`.
pub(crate) fn upsilon_dual_route_a(an: &GeAnalysis, ht: &Mat) -> f64 {
    let tol = eq_tol(an);
    let ub = an.u_bar.as_slice();
    let sb = &an.sigma_bar;
    let sk = sigma_bar_k_block(an);
    let a: Vec<usize> = (0..an.beta1.end).collect();
    let mut v = 0.0;
    if !a.is_empty() {
        let om = omega_rotated(ht, ub, &a, 1.0, tol);
        for (p, &j) in a.iter().enumerate() {
            v += 2.0 * sb[j] * om[(p, p)];
        }
    }
    for (l, b) in an.blocks.iter().enumerate() {
        if an.classes[l] == BlockClass::Beta2 {
            let idx: Vec<usize> = b.clone().collect();
            v += 2.0 * sk * omega_rotated(ht, ub, &idx, an.block_u_bar[l], tol).trace();
        }
    }
    for j in an.beta3.start..an.m() {
        if sb[j] > tol {
            v += 2.0 * sb[j] * pinv_quadratic_diag(ht, ub, j, tol);
        }
    }
    v
}

/// `Υ°` through the compartment expansion.
pub(crate) fn upsilon_dual_route_b(an: &GeAnalysis, ht: &Mat) -> f64 {
    use BlockClass::*;
    let Parts { s, t } = parts(ht);
    let bl = &an.blocks;
    let cl = &an.classes;
    let nu = |l: usize| an.block_sigma_bar[l];
    let mu = |l: usize| block_mu(an, l);
    let mut v = 0.0;
    match an.case {
        SigmaCase::PositiveSigmaK => {
            let sk = sigma_bar_k_block(an);
            for l in 0..bl.len() {
                for lp in 0..bl.len() {
                    let s2 = sq(&s, &bl[l], &bl[lp]);
                    let t2 = sq(&t, &bl[l], &bl[lp]);
                    match (cl[l], cl[lp]) {
                        (Alpha, Beta2) => v += (2.0 * nu(l) / (mu(lp) - 1.0) + 2.0 * sk / (1.0 - mu(lp))) * s2,
                        (Alpha | Beta1, Beta3 | Gamma) => v += 2.0 * (nu(lp) - nu(l)) * s2,
                        (Beta2, Gamma) => v += 2.0 * (nu(lp) - sk) / mu(l) * s2,
                        _ => {}
                    }
                    match (cl[l], cl[lp]) {
                        (Alpha | Beta1, _) => v += 2.0 * nu(l) / (-mu(lp) - 1.0) * t2,
                        (Beta2, _) => v += 2.0 * sk / (-mu(lp) - mu(l)) * t2,
                        (Beta3 | Gamma, Alpha | Beta1 | Beta2) => v += -2.0 * nu(l) / mu(lp) * t2,
                        _ => {}
                    }
                }
                match cl[l] {
                    Alpha | Beta1 => v -= nu(l) * tail_sq(ht, &bl[l]),
                    Beta2 => v -= sk / mu(l) * tail_sq(ht, &bl[l]),
                    _ => {}
                }
            }
        }
        SigmaCase::ZeroSigmaK => {
            for l in (0..bl.len()).filter(|&l| cl[l] == Alpha) {
                let w = nu(l);
                for lp in 0..bl.len() {
                    let s2 = sq(&s, &bl[l], &bl[lp]);
                    let t2 = sq(&t, &bl[l], &bl[lp]);
                    match cl[lp] {
                        Beta2 => v += 2.0 * w / (mu(lp) - 1.0) * s2,
                        Beta3 | Gamma => v += -2.0 * w * s2,
                        _ => {}
                    }
                    v += 2.0 * w / (-mu(lp) - 1.0) * t2;
                }
                v -= w * tail_sq(ht, &bl[l]);
            }
        }
    }
    v
}

fn finish(a: f64, b: f64, h: &Mat, zero: bool, what: &str) -> Result<SigmaTermResult> {
    let gap = (a - b).abs();
    if gap > route_threshold(h) {
        return Err(Error::RouteDisagreement {
            what: what.into(),
            detail: format!("omega route {a:.17e}, quadratic route {b:.17e}, gap {gap:.3e}"),
        });
    }
    Ok(SigmaTermResult {
        value_omega_route: a,
        value_quadratic_route: b,
        equality_conditions_hold: zero,
        route_gap: gap,
    })
}

/// `Υ_X̄(S̄, H)` by both routes.
pub fn upsilon_primal(an: &GeAnalysis, h: &Mat) -> Result<SigmaTermResult> {
    check_h(an, h)?;
    let ht = an.rotate(h);
    let a = upsilon_primal_route_a(an, &ht);
    let b = upsilon_primal_route_b(an, &ht);
    finish(a, b, h, upsilon_zero_conditions(an, h, TOL_CONE)?, "upsilon")
}

/// `Υ°_S̄(X̄, H)` by both routes.
pub fn upsilon_dual(an: &GeAnalysis, h: &Mat) -> Result<SigmaTermResult> {
    check_h(an, h)?;
    let ht = an.rotate(h);
    let a = upsilon_dual_route_a(an, &ht);
    let b = upsilon_dual_route_b(an, &ht);
    finish(a, b, h, upsilon_zero_conditions(an, h, TOL_CONE)?, "dual upsilon")
}

/// Compartment residuals of the conditions under which both sigma-terms vanish.
pub fn upsilon_zero_residuals(an: &GeAnalysis, h: &Mat) -> Result<Vec<(&'static str, f64)>> {
    check_h(an, h)?;
    let ht = an.rotate(h);
    let m = an.m();
    let (a, b1, b2, b3, g) = (an.alpha.clone(), an.beta1.clone(), an.beta2.clone(), an.beta3.clone(), an.gamma.clone());
    let t = skew(&ht.columns(0, m).into_owned());
    let both = |r: &Range<usize>, c: &Range<usize>| (sq(&ht, r, c) + sq(&ht, c, r)).sqrt();
    let coupled = |r: &Range<usize>, c: &Range<usize>| sq(&t, r, c).sqrt();
    let mut out = vec![
        ("skew_alpha_alpha", coupled(&a, &a)),
        ("skew_alpha_beta1", coupled(&a, &b1)),
        ("alpha_beta2", both(&a, &b2)),
        ("alpha_tail", tail_sq(&ht, &a).sqrt()),
    ];
    match an.case {
        SigmaCase::PositiveSigmaK => {
            out.extend([
                ("skew_beta1_beta1", coupled(&b1, &b1)),
                ("skew_beta1_beta2", coupled(&b1, &b2)),
                ("skew_beta2_beta2", coupled(&b2, &b2)),
                ("alpha_beta3", both(&a, &b3)),
                ("alpha_gamma", both(&a, &g)),
                ("skew_beta1_beta3", coupled(&b1, &b3)),
                ("skew_beta2_beta3", coupled(&b2, &b3)),
                ("beta12_gamma", both(&(b1.start..b2.end), &g)),
                ("beta12_tail", tail_sq(&ht, &(b1.start..b2.end)).sqrt()),
            ]);
        }
        SigmaCase::ZeroSigmaK => {
            out.push(("alpha_zero_block", both(&a, &b3)));
        }
    }
    Ok(out)
}

/// Whether `Υ = Υ° = 0` is predicted by the compartment conditions.
pub fn upsilon_zero_conditions(an: &GeAnalysis, h: &Mat, tol: f64) -> Result<bool> {
    let thr = tol * h.norm().max(1.0);
    Ok(upsilon_zero_residuals(an, h)?.iter().all(|(_, r)| *r <= thr))
}

/// `δ*_{T²(H)}(S̄, -1)`: equal to `Υ` on the critical cone and `+∞` off it.
pub fn support_t2(an: &GeAnalysis, h: &Mat) -> Result<f64> {
    let rep = critical_cone_primal_contains(an, h, TOL_CONE)?;
    if !rep.member {
        return Ok(f64::INFINITY);
    }
    Ok(upsilon_primal_route_a(an, &an.rotate(h)))
}

/// A second-order direction `W` attaining the support value.
///
/// Zero case: `W = 2 H X̄^† H`. Positive case: `W̃ = blockdiag(2Ω_{a_l}, 2Ω_β, 0)`.
pub fn support_maximizer(an: &GeAnalysis, h: &Mat) -> Result<Mat> {
    check_h(an, h)?;
    let ht = an.rotate(h);
    let (m, n) = (an.m(), an.n());
    let tol = eq_tol(an);
    let sb = an.sigma_bar.as_slice();
    let mut w = Mat::zeros(m, n);
    match an.case {
        SigmaCase::ZeroSigmaK => {
            let mut hp = ht.columns(0, m).into_owned();
            for i in 0..m {
                let inv = if sb[i] > tol { 1.0 / sb[i] } else { 0.0 };
                hp.column_mut(i).scale_mut(inv);
            }
            w = (hp * &ht) * 2.0;
        }
        SigmaCase::PositiveSigmaK => {
            let mut put = |idx: Vec<usize>, nu: f64| {
                let om = omega_rotated(&ht, sb, &idx, nu, tol) * 2.0;
                for (p, &i) in idx.iter().enumerate() {
                    for (q, &j) in idx.iter().enumerate() {
                        w[(i, j)] = om[(p, q)];
                    }
                }
            };
            for (l, b) in an.blocks.iter().enumerate() {
                if an.classes[l] == BlockClass::Alpha {
                    put(b.clone().collect(), an.block_sigma_bar[l]);
                }
            }
            put(an.beta.clone().collect(), sigma_bar_k_block(an));
        }
    }
    Ok(an.compose(&w))
}

fn gauss<R: Rng + ?Sized>(m: usize, n: usize, rng: &mut R) -> Mat {
    Mat::from_fn(m, n, |_, _| rng.sample::<f64, _>(StandardNormal))
}

fn fill(a: &mut Mat, r: &Range<usize>, c: &Range<usize>, v: f64) {
    a.view_mut((r.start, c.start), (r.len(), c.len())).fill(v);
}

fn mirror(a: &mut Mat, r: &Range<usize>, c: &Range<usize>) {
    for i in r.clone() {
        for j in c.clone() {
            a[(j, i)] = a[(i, j)];
        }
    }
}

/// Random direction satisfying every zero condition of the sigma-terms.
pub fn upsilon_zero_direction<R: Rng + ?Sized>(an: &GeAnalysis, rng: &mut R) -> Mat {
    let (m, n) = (an.m(), an.n());
    let (a, b1, b2, b3, g) = (an.alpha.clone(), an.beta1.clone(), an.beta2.clone(), an.beta3.clone(), an.gamma.clone());
    let c = m..n;
    let mut ht = gauss(m, n, rng);
    match an.case {
        SigmaCase::PositiveSigmaK => {
            let head = 0..b2.end;
            mirror(&mut ht, &head, &head);
            fill(&mut ht, &a, &b2, 0.0);
            fill(&mut ht, &b2, &a, 0.0);
            fill(&mut ht, &a, &b3, 0.0);
            fill(&mut ht, &b3, &a, 0.0);
            mirror(&mut ht, &(b1.start..b2.end), &b3);
            fill(&mut ht, &head, &g, 0.0);
            fill(&mut ht, &g, &head, 0.0);
            fill(&mut ht, &head, &c, 0.0);
        }
        SigmaCase::ZeroSigmaK => {
            mirror(&mut ht, &a, &(0..b1.end));
            fill(&mut ht, &a, &(b2.start..m), 0.0);
            fill(&mut ht, &(b2.start..m), &a, 0.0);
            fill(&mut ht, &a, &c, 0.0);
        }
    }
    an.compose(&ht)
}

/// Entries `(i, j)` of `H̃` whose perturbation alone breaks a zero condition.
pub fn constrained_entries(an: &GeAnalysis) -> Vec<(usize, usize)> {
    let (m, n) = (an.m(), an.n());
    let (a, b1, b2, b3, g) = (an.alpha.clone(), an.beta1.clone(), an.beta2.clone(), an.beta3.clone(), an.gamma.clone());
    let class = |i: usize| -> usize {
        if a.contains(&i) {
            0
        } else if b1.contains(&i) {
            1
        } else if b2.contains(&i) {
            2
        } else if b3.contains(&i) {
            3
        } else if g.contains(&i) {
            4
        } else {
            5
        }
    };
    let mut out = Vec::new();
    for i in 0..m {
        for j in 0..n {
            let lowest = class(i).min(class(j));
            let hit = i != j
                && match an.case {
                    SigmaCase::PositiveSigmaK => lowest <= 2,
                    SigmaCase::ZeroSigmaK => lowest == 0,
                };
            if hit {
                out.push((i, j));
            }
        }
    }
    out
}

/// Random direction violating exactly one zero condition, or `None` when no condition applies.
pub fn upsilon_violating_direction<R: Rng + ?Sized>(an: &GeAnalysis, rng: &mut R) -> Option<Mat> {
    let entries = constrained_entries(an);
    if entries.is_empty() {
        return None;
    }
    let base = an.rotate(&upsilon_zero_direction(an, rng));
    let (i, j) = entries[rng.random_range(0..entries.len())];
    let mut ht = base;
    let delta: f64 = rng.random_range(0.5..2.0) * if rng.random_bool(0.5) { 1.0 } else { -1.0 };
    ht[(i, j)] += delta;
    Some(an.compose(&ht))
}
