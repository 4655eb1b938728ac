//! Membership tests for the tangent, lineality and critical cones of a subgradient pair.
//!
//! Every test works on `H̃ = Ū^T H V̄` and reports the residual of each
//! defining condition. Pattern residuals are Frobenius norms compared against
//! `tol * ‖H‖_F`, so verdicts are invariant under positive scaling of `H`.

use std::ops::Range;

use crate::derivatives::theta_dd1;
use crate::error::{Error, Result};
use crate::ge::{GeAnalysis, SigmaCase};
use crate::spectral::{block, check_matrix, inner, singular_values, skew, sym, sym_eigenvalues_desc, Mat};

/// Default tolerance of the pattern tests.
pub const TOL_CONE: f64 = 1e-8;

/// A disagreement between the two critical-cone routes is a boundary case when
/// the direct residual is below this multiple of `‖H‖_F`.
pub const BOUNDARY_DIRECT: f64 = 1e-7;

/// Companion band for the structural residuals. The direct residual can be
/// quadratic in an off-diagonal compartment, so the band is its square root.
pub const BOUNDARY_STRUCTURAL: f64 = 3.2e-4;

/// Which characterization produced a verdict.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConeRoute {
    Structural,
    Both,
    FullSpace,
}

impl ConeRoute {
    pub fn tag(self) -> &'static str {
        match self {
            ConeRoute::Structural => "structural",
            ConeRoute::Both => "structural+direct",
            ConeRoute::FullSpace => "full_space",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConeCondition {
    pub name: String,
    pub residual: f64,
    pub threshold: f64,
}

impl ConeCondition {
    pub fn holds(&self) -> bool {
        self.residual <= self.threshold
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConeReport {
    pub member: bool,
    pub conditions: Vec<ConeCondition>,
    pub route: ConeRoute,
    /// Set when the two critical-cone routes disagree inside the boundary band.
    pub boundary: bool,
}

impl ConeReport {
    fn new(conditions: Vec<ConeCondition>, route: ConeRoute) -> Self {
        ConeReport {
            member: conditions.iter().all(ConeCondition::holds),
            conditions,
            route,
            boundary: false,
        }
    }

    /// Condition by name.
    pub fn condition(&self, name: &str) -> Option<&ConeCondition> {
        self.conditions.iter().find(|c| c.name == name)
    }
}

struct Conds {
    thr: f64,
    list: Vec<ConeCondition>,
}

impl Conds {
    fn new(thr: f64) -> Self {
        Conds { thr, list: Vec::new() }
    }

    fn add(&mut self, name: &str, residual: f64) {
        self.list.push(ConeCondition {
            name: name.to_string(),
            residual,
            threshold: self.thr,
        });
    }
}

fn check_h(an: &GeAnalysis, h: &Mat) -> Result<()> {
    check_matrix(h, "h")?;
    if h.shape() != an.ambient_shape() {
        return Err(Error::Input(format!("h has shape {:?}, expected {:?}", h.shape(), an.ambient_shape())));
    }
    Ok(())
}

fn fro(a: &Mat) -> f64 {
    a.norm()
}

fn lambda_min(a: &Mat) -> f64 {
    sym_eigenvalues_desc(a).iter().cloned().fold(f64::INFINITY, f64::min)
}

fn lambda_max(a: &Mat) -> f64 {
    sym_eigenvalues_desc(a).iter().cloned().fold(f64::NEG_INFINITY, f64::max)
}

fn trace(a: &Mat) -> f64 {
    a.diagonal().sum()
}

fn scalar_residual(a: &Mat) -> (f64, f64) {
    let tau = trace(a) / a.nrows() as f64;
    (fro(&(a - Mat::identity(a.nrows(), a.ncols()) * tau)), tau)
}

fn plus(x: f64) -> f64 {
    x.max(0.0)
}

/// `θ'(X̄; H)` from the taxonomy: `tr(H̃_αα)` plus the top `k - k0` values of the β compartment.
pub fn tangent_functional(an: &GeAnalysis, ht: &Mat) -> f64 {
    let n = an.n();
    let alpha = an.alpha.clone();
    let beta = an.beta.clone();
    let take = an.k - an.k0;
    let head = trace(&block(ht, alpha.clone(), alpha));
    let tail: f64 = match an.case {
        SigmaCase::PositiveSigmaK => sym_eigenvalues_desc(&sym(&block(ht, beta.clone(), beta))).iter().take(take).sum(),
        SigmaCase::ZeroSigmaK => singular_values(&block(ht, beta.clone(), beta.start..n)).iter().take(take).sum(),
    };
    head + tail
}

/// `(H, τ) ∈ T_K(X̄, θ(X̄))`, i.e. `θ'(X̄; H) <= τ`.
pub fn tangent_cone_contains(an: &GeAnalysis, h: &Mat, tau: f64, tol: f64) -> Result<ConeReport> {
    check_h(an, h)?;
    let val = tangent_functional(an, &an.rotate(h));
    let mut c = Conds::new(tol);
    c.add("theta_prime_minus_tau", val - tau);
    Ok(ConeReport::new(c.list, ConeRoute::Structural))
}

/// Membership in the lineality space of the tangent cone (first component).
pub fn lineality_primal_contains(an: &GeAnalysis, h: &Mat, tol: f64) -> Result<ConeReport> {
    check_h(an, h)?;
    let ht = an.rotate(h);
    let beta = an.beta.clone();
    let mut c = Conds::new(tol * h.norm());
    match an.case {
        SigmaCase::PositiveSigmaK => {
            if !beta.is_empty() {
                c.add("beta_scalar", scalar_residual(&sym(&block(&ht, beta.clone(), beta))).0);
            }
        }
        SigmaCase::ZeroSigmaK => {
            c.add("beta_zero", fro(&block(&ht, beta.clone(), beta.start..an.n())));
        }
    }
    let plus_h = theta_dd1(&an.svd_x, h, an.k)?;
    let minus_h = theta_dd1(&an.svd_x, &(-h), an.k)?;
    c.add("odd_directional_derivative", (plus_h + minus_h).abs());
    Ok(ConeReport::new(c.list, ConeRoute::Both))
}

/// Membership in the lineality space of the dual tangent cone.
pub fn lineality_dual_contains(an: &GeAnalysis, h: &Mat, tol: f64) -> Result<ConeReport> {
    check_h(an, h)?;
    if !an.dual_active() {
        return Ok(ConeReport::new(Vec::new(), ConeRoute::FullSpace));
    }
    let ht = an.rotate(h);
    let a = 0..an.beta1.end;
    let mut c = Conds::new(tol * h.norm());
    c.add("sym_alpha_beta1", fro(&sym(&block(&ht, a.clone(), a))));
    if an.nuclear_at_k() {
        c.add("trace_beta2", trace(&block(&ht, an.beta2.clone(), an.beta2.clone())).abs());
        let z = an.beta3.start;
        c.add("zero_rows", fro(&block(&ht, z..an.m(), z..an.n())));
    }
    Ok(ConeReport::new(c.list, ConeRoute::Structural))
}

/// Frobenius norm of `a[rows, cols]` with the sub-block `a[keep_r, keep_c]` removed.
fn norm_outside(a: &Mat, rows: Range<usize>, cols: Range<usize>, keep_r: Range<usize>, keep_c: Range<usize>) -> f64 {
    let mut s = 0.0;
    for i in rows {
        for j in cols.clone() {
            if !(keep_r.contains(&i) && keep_c.contains(&j)) {
                s += a[(i, j)] * a[(i, j)];
            }
        }
    }
    s.sqrt()
}

fn primal_structural(an: &GeAnalysis, ht: &Mat, c: &mut Conds, hull: bool) {
    let (m, n) = (an.m(), an.n());
    let (b1, b2, b3) = (an.beta1.clone(), an.beta2.clone(), an.beta3.clone());
    match an.case {
        SigmaCase::PositiveSigmaK => {
            let s = sym(&ht.columns(0, m).into_owned());
            c.add("sym_beta1_beta2", fro(&block(&s, b1.clone(), b2.clone())));
            c.add("sym_beta1_beta3", fro(&block(&s, b1.clone(), b3.clone())));
            c.add("sym_beta2_beta3", fro(&block(&s, b2.clone(), b3.clone())));
            let mut tau = None;
            if !b2.is_empty() {
                let (res, t) = scalar_residual(&block(&s, b2.clone(), b2.clone()));
                c.add("beta2_scalar", res);
                tau = Some(t);
            }
            if hull {
                return;
            }
            let l1 = (!b1.is_empty()).then(|| lambda_min(&block(&s, b1.clone(), b1.clone())));
            let l3 = (!b3.is_empty()).then(|| lambda_max(&block(&s, b3.clone(), b3.clone())));
            match tau {
                Some(t) => {
                    if let Some(l1) = l1 {
                        c.add("beta1_above_tau", plus(t - l1));
                    }
                    if let Some(l3) = l3 {
                        c.add("tau_above_beta3", plus(l3 - t));
                    }
                }
                None => {
                    if let (Some(l1), Some(l3)) = (l1, l3) {
                        c.add("beta1_above_beta3", plus(l3 - l1));
                    }
                }
            }
        }
        SigmaCase::ZeroSigmaK => {
            let beta = an.beta.clone();
            if an.nuclear_at_k() {
                c.add("skew_beta1", fro(&skew(&block(ht, b1.clone(), b1.clone()))));
                c.add("beta1_rows_cols", {
                    let r = fro(&block(ht, b1.clone(), b1.end..n));
                    let l = fro(&block(ht, b1.end..m, b1.clone()));
                    r.hypot(l)
                });
                let mut tau = None;
                if !b2.is_empty() {
                    let (res, t) = scalar_residual(&block(ht, b2.clone(), b2.clone()));
                    c.add("beta2_scalar", res);
                    tau = Some(t);
                }
                c.add("beta2_rows_cols", {
                    let r = fro(&block(ht, b2.clone(), b2.end..n));
                    let l = fro(&block(ht, b2.end..m, b2.clone()));
                    r.hypot(l)
                });
                if hull {
                    return;
                }
                let zb = if b3.is_empty() { 0.0 } else { singular_values(&block(ht, b3.clone(), b3.start..n))[0] };
                let l1 = (!b1.is_empty()).then(|| lambda_min(&sym(&block(ht, b1.clone(), b1.clone()))));
                match tau {
                    Some(t) => {
                        c.add("tau_nonnegative", plus(-t));
                        if let Some(l1) = l1 {
                            c.add("beta1_above_tau", plus(t - l1));
                        }
                        c.add("tau_above_zero_block", plus(zb - t));
                    }
                    None => {
                        if let Some(l1) = l1 {
                            c.add("beta1_above_zero_block", plus(zb - l1));
                        }
                    }
                }
            } else {
                c.add("skew_beta1", fro(&skew(&block(ht, b1.clone(), b1.clone()))));
                c.add("beta_rest", norm_outside(ht, beta.clone(), beta.start..n, b1.clone(), b1.clone()));
                if !hull && !b1.is_empty() {
                    c.add("beta1_psd", plus(-lambda_min(&sym(&block(ht, b1.clone(), b1)))));
                }
            }
        }
    }
}

/// Membership in the critical cone, evaluated by the directional-derivative
/// identity and by the block structure. The routes must agree outside the boundary band.
pub fn critical_cone_primal_contains(an: &GeAnalysis, h: &Mat, tol: f64) -> Result<ConeReport> {
    check_h(an, h)?;
    let ht = an.rotate(h);
    let hn = h.norm();
    let mut c = Conds::new(tol * hn);
    primal_structural(an, &ht, &mut c, false);
    let structural_ok = c.list.iter().all(ConeCondition::holds);
    let structural_res = c.list.iter().map(|x| x.residual).fold(0.0, f64::max);

    let direct = (theta_dd1(&an.svd_x, h, an.k)? - inner(&an.s_bar, h)).abs();
    c.add("direct_identity", direct);
    let direct_ok = direct <= tol * hn;

    let mut report = ConeReport::new(c.list, ConeRoute::Both);
    if structural_ok != direct_ok {
        if direct <= BOUNDARY_DIRECT * hn && structural_res <= BOUNDARY_STRUCTURAL * hn {
            report.boundary = true;
        } else {
            return Err(Error::RouteDisagreement {
                what: "critical cone".into(),
                detail: format!(
                    "direct residual {direct:.3e}, largest structural residual {structural_res:.3e}, ‖H‖ = {hn:.3e}"
                ),
            });
        }
    }
    Ok(report)
}

/// Membership in the affine hull of the critical cone.
pub fn critical_cone_primal_aff_contains(an: &GeAnalysis, h: &Mat, tol: f64) -> Result<ConeReport> {
    check_h(an, h)?;
    let mut c = Conds::new(tol * h.norm());
    primal_structural(an, &an.rotate(h), &mut c, true);
    Ok(ConeReport::new(c.list, ConeRoute::Structural))
}

fn dual_structural(an: &GeAnalysis, ht: &Mat, c: &mut Conds, hull: bool) {
    let (m, n) = (an.m(), an.n());
    let b1 = an.beta1.clone();
    let a = 0..b1.end;
    let s = sym(&block(ht, a.clone(), a.clone()));
    c.add("sym_alpha_rows", norm_outside(&s, a.clone(), a.clone(), b1.clone(), b1.clone()));
    if !hull && !b1.is_empty() {
        c.add("beta1_nsd", plus(lambda_max(&block(&s, b1.clone(), b1.clone()))));
    }
    match an.case {
        SigmaCase::PositiveSigmaK => {
            let beta = an.beta.clone();
            c.add("trace_beta", trace(&block(ht, beta.clone(), beta)).abs());
            let b3 = an.beta3.clone();
            let z = b3.start;
            c.add("tail_outside_beta3", norm_outside(ht, z..m, z..n, b3.clone(), b3.clone()));
            let h33 = block(ht, b3.clone(), b3.clone());
            c.add("skew_beta3", fro(&skew(&h33)));
            if !hull && !b3.is_empty() {
                c.add("beta3_psd", plus(-lambda_min(&sym(&h33))));
            }
        }
        SigmaCase::ZeroSigmaK => {
            if !hull && an.nuclear_at_k() {
                let b3 = an.beta3.clone();
                let tr = trace(&block(ht, b1.start..an.beta2.end, b1.start..an.beta2.end));
                let nuc: f64 = if b3.is_empty() { 0.0 } else { singular_values(&block(ht, b3.clone(), b3.start..n)).sum() };
                c.add("trace_plus_nuclear", plus(tr + nuc));
            }
        }
    }
}

/// Membership in the critical cone of the dual problem.
pub fn critical_cone_dual_contains(an: &GeAnalysis, h: &Mat, tol: f64) -> Result<ConeReport> {
    check_h(an, h)?;
    if !an.dual_active() {
        return Ok(ConeReport::new(Vec::new(), ConeRoute::FullSpace));
    }
    let mut c = Conds::new(tol * h.norm());
    dual_structural(an, &an.rotate(h), &mut c, false);
    Ok(ConeReport::new(c.list, ConeRoute::Structural))
}

/// Membership in the affine hull of the dual critical cone.
pub fn critical_cone_dual_aff_contains(an: &GeAnalysis, h: &Mat, tol: f64) -> Result<ConeReport> {
    check_h(an, h)?;
    if !an.dual_active() {
        return Ok(ConeReport::new(Vec::new(), ConeRoute::FullSpace));
    }
    let mut c = Conds::new(tol * h.norm());
    dual_structural(an, &an.rotate(h), &mut c, true);
    Ok(ConeReport::new(c.list, ConeRoute::Structural))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ge::{analyze_ge, GeOptions};
    use crate::spectral::{random_orthogonal, Vector};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    fn diag(v: &[f64]) -> Mat {
        Mat::from_diagonal(&Vector::from_vec(v.to_vec()))
    }

    fn an(x: &[f64], s: &[f64], k: usize) -> GeAnalysis {
        analyze_ge(&diag(x), &diag(s), k, GeOptions::default()).unwrap()
    }

    fn rotated(sb: &[f64], ub: &[f64], n: usize, k: usize, seed: u64) -> GeAnalysis {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = sb.len();
        let u = random_orthogonal(m, &mut rng);
        let v = random_orthogonal(n, &mut rng);
        let mk = |d: &[f64]| {
            let mut a = Mat::zeros(m, n);
            for (i, &x) in d.iter().enumerate() {
                a[(i, i)] = x;
            }
            &u * a * v.transpose()
        };
        analyze_ge(&mk(sb), &mk(ub), k, GeOptions::default()).unwrap()
    }

    fn gauss(m: usize, n: usize, rng: &mut ChaCha8Rng) -> Mat {
        Mat::from_fn(m, n, |_, _| rng.sample::<f64, _>(StandardNormal))
    }

    #[test]
    fn tangent_examples() {
        let a = an(&[2.0, 1.0], &[1.0, 0.0], 1);
        assert!(tangent_cone_contains(&a, &Mat::zeros(2, 2), 0.0, TOL_CONE).unwrap().member);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..20 {
            let h = gauss(2, 2, &mut rng);
            let t = theta_dd1(&a.svd_x, &h, 1).unwrap();
            let rep = tangent_cone_contains(&a, &h, t, TOL_CONE).unwrap();
            assert!(rep.member && rep.conditions[0].residual.abs() < 1e-12);
            assert!(!tangent_cone_contains(&a, &h, t - 1.0, TOL_CONE).unwrap().member);
        }
    }

    #[test]
    fn lineality_primal_examples() {
        let a = an(&[2.0, 1.0], &[1.0, 0.0], 1);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..20 {
            assert!(lineality_primal_contains(&a, &gauss(2, 2, &mut rng), TOL_CONE).unwrap().member);
        }
        let id = an(&[1.0, 1.0], &[0.5, 0.5], 1);
        assert_eq!(id.beta, 0..2);
        assert!(lineality_primal_contains(&id, &Mat::identity(2, 2), TOL_CONE).unwrap().member);
        let rep = lineality_primal_contains(&id, &diag(&[1.0, 0.0]), TOL_CONE).unwrap();
        assert!(!rep.member);
        assert!(!rep.condition("beta_scalar").unwrap().holds());
        assert!(!rep.condition("odd_directional_derivative").unwrap().holds());
    }

    #[test]
    fn lineality_dual_examples() {
        let inner_ball = an(&[0.0, 0.0], &[0.5, 0.2], 1);
        assert!(!inner_ball.dual_active());
        let rep = lineality_dual_contains(&inner_ball, &diag(&[3.0, -1.0]), TOL_CONE).unwrap();
        assert!(rep.member && rep.route == ConeRoute::FullSpace);

        let a = an(&[3.0, 3.0, 1.0, 0.5], &[1.0, 1.0, 1.0, 0.0], 3);
        assert_eq!((a.alpha.clone(), a.beta1.clone()), (0..2, 2..3));
        assert!(lineality_dual_contains(&a, &Mat::zeros(4, 4), TOL_CONE).unwrap().member);
        let mut h = Mat::zeros(4, 4);
        h[(0, 2)] = 1.0;
        h[(2, 0)] = -1.0;
        h[(0, 1)] = -0.5;
        h[(1, 0)] = 0.5;
        assert!(lineality_dual_contains(&a, &h, TOL_CONE).unwrap().member);
        h[(3, 3)] = 1.0;
        assert!(!lineality_dual_contains(&a, &h, TOL_CONE).unwrap().member);
    }

    #[test]
    fn critical_primal_examples() {
        let a = an(&[2.0, 1.0], &[1.0, 0.0], 1);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let rep = critical_cone_primal_contains(&a, &gauss(2, 2, &mut rng), TOL_CONE).unwrap();
            assert!(rep.member && !rep.boundary);
        }
        assert!(critical_cone_primal_contains(&a, &Mat::zeros(2, 2), TOL_CONE).unwrap().member);

        // zero sigma_k with nuclear norm of S below k
        let z = an(&[1.0, 0.0, 0.0], &[1.0, 1.0, 0.0], 3);
        assert_eq!(z.case, SigmaCase::ZeroSigmaK);
        assert!(!z.nuclear_at_k());
        assert_eq!(z.beta1, 1..2);
        let h = diag(&[0.0, -1.0, 0.0]);
        assert!(!critical_cone_primal_contains(&z, &h, TOL_CONE).unwrap().member);
        assert!(critical_cone_primal_aff_contains(&z, &h, TOL_CONE).unwrap().member);
        assert!(critical_cone_primal_contains(&z, &(-&h), TOL_CONE).unwrap().member);
    }

    #[test]
    fn critical_dual_examples() {
        let inner_ball = an(&[0.0, 0.0], &[0.5, 0.2], 1);
        assert!(critical_cone_dual_contains(&inner_ball, &diag(&[3.0, -1.0]), TOL_CONE).unwrap().member);

        let a = an(&[3.0, 3.0, 1.0, 0.5], &[1.0, 1.0, 1.0, 0.0], 3);
        assert!(critical_cone_dual_contains(&a, &Mat::zeros(4, 4), TOL_CONE).unwrap().member);
        let mut h = Mat::zeros(4, 4);
        h[(0, 1)] = 1.0;
        h[(1, 0)] = -1.0;
        assert!(critical_cone_dual_contains(&a, &h, TOL_CONE).unwrap().member);
        h[(0, 0)] = 0.1;
        assert!(!critical_cone_dual_contains(&a, &h, TOL_CONE).unwrap().member);
        assert!(!critical_cone_dual_aff_contains(&a, &h, TOL_CONE).unwrap().member);

        let z = an(&[1.0, 0.0, 0.0], &[1.0, 1.0, 0.0], 3);
        let h = diag(&[0.0, 2.0, 0.0]);
        assert!(critical_cone_dual_aff_contains(&z, &h, TOL_CONE).unwrap().member);
        assert!(!critical_cone_dual_contains(&z, &h, TOL_CONE).unwrap().member);
        assert!(critical_cone_dual_contains(&z, &(-&h), TOL_CONE).unwrap().member);
    }

    #[test]
    fn lineality_inside_critical_cone() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let cases = [
            rotated(&[3.0, 1.0, 1.0, 1.0, 1.0, 0.2], &[1.0, 1.0, 0.5, 0.5, 0.0, 0.0], 7, 3, 1),
            rotated(&[2.0, 0.0, 0.0, 0.0], &[1.0, 0.75, 0.25, 0.0], 5, 3, 2),
        ];
        for a in &cases {
            for _ in 0..20 {
                let mut ht = gauss(a.m(), a.n(), &mut rng);
                let beta = a.beta.clone();
                match a.case {
                    SigmaCase::PositiveSigmaK => {
                        let s = skew(&block(&ht, beta.clone(), beta.clone()));
                        let t: f64 = rng.sample(StandardNormal);
                        let blockv = s + Mat::identity(beta.len(), beta.len()) * t;
                        ht.view_mut((beta.start, beta.start), (beta.len(), beta.len())).copy_from(&blockv);
                    }
                    SigmaCase::ZeroSigmaK => {
                        ht.view_mut((beta.start, beta.start), (beta.len(), a.n() - beta.start)).fill(0.0);
                    }
                }
                let h = a.compose(&ht);
                assert!(lineality_primal_contains(a, &h, TOL_CONE).unwrap().member);
                let rep = critical_cone_primal_contains(a, &h, TOL_CONE).unwrap();
                assert!(rep.member, "{rep:?}");
                assert!(critical_cone_primal_aff_contains(a, &(-&h), TOL_CONE).unwrap().member);
            }
        }
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(64))]

            #[test]
            fn scaling_and_negation(seed in 0u64..5_000, c in 0.001f64..1000.0) {
                let a = rotated(&[2.0, 1.0, 1.0, 0.0], &[1.0, 0.6, 0.4, 0.0], 5, 2, seed % 7);
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let h = gauss(4, 5, &mut rng);
                let hc = &h * c;
                let funcs: [fn(&GeAnalysis, &Mat, f64) -> Result<ConeReport>; 5] = [
                    critical_cone_primal_contains,
                    critical_cone_primal_aff_contains,
                    critical_cone_dual_contains,
                    critical_cone_dual_aff_contains,
                    lineality_dual_contains,
                ];
                for f in funcs {
                    prop_assert_eq!(f(&a, &h, TOL_CONE).unwrap().member, f(&a, &hc, TOL_CONE).unwrap().member);
                }
                for f in [critical_cone_primal_aff_contains, critical_cone_dual_aff_contains, lineality_dual_contains, lineality_primal_contains] {
                    prop_assert_eq!(f(&a, &h, TOL_CONE).unwrap().member, f(&a, &(-&h), TOL_CONE).unwrap().member);
                }
            }
        }
    }
}
