//! Acceptance criteria, one PASS/FAIL line each. Exits non-zero if any criterion fails.

use std::collections::HashSet;
use std::process::Command;
use std::time::Instant;

use kyfan_core::cones::{critical_cone_primal_contains, TOL_CONE};
use kyfan_core::derivatives::{sigma_dd2_cases, theta_dd2, SecondOrderCase};
use kyfan_core::ge::SigmaCase;
use kyfan_core::norms::{matrix_prox_pair, vector_knorm_prox};
use kyfan_core::oracles::{
    certify_pair, check_fd_first, check_fd_second, corrupt_multiplier, critical_cone_dual_member, critical_cone_member,
    dykstra_project, gauge_quantities, gaussian, random_ge_instance, rank_deficient_direction, resolvable_direction,
    special_case_deviation, unit_gaussian, vector_prox_kkt_residual, Corruption,
    GeInstance, OracleConfig, SpectrumProfile, FD_MIN_RESOLUTION,
};
use kyfan_core::sigma::{support_maximizer, support_t2, upsilon_dual, upsilon_primal, upsilon_violating_direction, upsilon_zero_conditions, upsilon_zero_direction};
use kyfan_core::spectral::{inner, Mat};
use kyfan_core::Error;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Desk-scale shapes, m <= 8 and n <= 10, a few of them tall.
const SHAPES: [(usize, usize); 12] = [
    (2, 2),
    (2, 5),
    (3, 3),
    (3, 6),
    (4, 4),
    (4, 7),
    (5, 5),
    (5, 9),
    (6, 8),
    (8, 10),
    (5, 3),
    (7, 4),
];

/// The i-th instance: profiles cycle fastest, then shapes; k sweeps `1..=min(m, n)`.
fn instance(i: usize) -> GeInstance {
    let profile = SpectrumProfile::ALL[i % 5];
    let (m, n) = SHAPES[(i / 5) % SHAPES.len()];
    let p = m.min(n);
    let k = 1 + (i / 5 + i / 60) % p;
    random_ge_instance(m, n, k, profile, 1000 + i as u64).expect("instance generation")
}

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn c1_moreau() -> Outcome {
    let xs: Vec<(Mat, usize)> = (0..200).map(|i| {
        let inst = instance(i);
        (inst.x, inst.k)
    }).collect();
    let t0 = Instant::now();
    let mut worst: f64 = 0.0;
    for (x, k) in &xs {
        let p = matrix_prox_pair(x, *k, None).unwrap();
        worst = worst.max((&p.prox_theta + &p.prox_theta_star - x).abs().max());
    }
    let secs = t0.elapsed().as_secs_f64();
    outcome(worst <= 1e-10 && secs < 5.0, format!("200 X, max |error| {worst:.2e} (<= 1e-10), runtime {secs:.3}s (< 5s)"))
}

fn c2_prox() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let (mut dev, mut kkt, mut infeas): (f64, f64, f64) = (0.0, 0.0, 0.0);
    let mut not_converged = 0;
    for _ in 0..100 {
        let len = rng.random_range(1..=6usize);
        let k = rng.random_range(1..=len);
        let x: Vec<f64> = (gaussian(1, len, &mut rng) * 2.0).iter().copied().collect();
        let g = vector_knorm_prox(&x, k);
        let d = dykstra_project(&x, k, 200_000);
        not_converged += usize::from(d.not_converged);
        let box_excess = d.x.iter().map(|v| v.abs() - 1.0).fold(0.0, f64::max);
        let l1_excess = d.x.iter().map(|v| v.abs()).sum::<f64>() - k as f64;
        infeas = infeas.max(box_excess).max(l1_excess);
        for i in 0..len {
            dev = dev.max((g[i] - (x[i] - d.x[i])).abs());
        }
        kkt = kkt.max(vector_prox_kkt_residual(&x, &g, k));
    }
    outcome(
        dev <= 1e-7 && kkt <= 1e-9 && not_converged == 0 && infeas <= 1e-10,
        format!("100 vectors, max deviation from Dykstra {dev:.2e} (<= 1e-7), KKT {kkt:.2e} (<= 1e-9), Dykstra infeasibility {infeas:.1e}, unconverged {not_converged}"),
    )
}

fn c3_certification() -> Outcome {
    let mut failed_valid = 0;
    for i in 0..200 {
        let inst = instance(i);
        let c = certify_pair(&inst.x_bar, &inst.s_bar, inst.k, 50, i as u64).unwrap();
        failed_valid += usize::from(!c.all());
    }
    let kinds = [Corruption::Inflate, Corruption::Negate, Corruption::Rotate];
    let (mut corrupted, mut caught, mut i) = (0, 0, 0);
    while corrupted < 100 {
        let inst = instance(i);
        if let Some(bad) = corrupt_multiplier(&inst, kinds[i % 3], i as u64).unwrap() {
            corrupted += 1;
            let c = certify_pair(&inst.x_bar, &bad, inst.k, 50, i as u64).unwrap();
            caught += usize::from(c.any_fails());
        }
        i += 1;
    }
    outcome(
        failed_valid == 0 && caught == 100,
        format!("200 generated pairs, {failed_valid} failing a check; {caught}/100 corrupted pairs rejected"),
    )
}

fn c4_fd_first() -> Outcome {
    let cfg = OracleConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let (mut worst_value, mut min_slope) = (0.0_f64, f64::INFINITY);
    let (mut failures, mut noise_limited, mut clustered) = (0, 0, 0);
    let mut checks = 0;
    for i in 0..100 {
        let inst = instance(i);
        if inst.profile == Some(SpectrumProfile::Clustered) {
            clustered += 1;
        }
        for _ in 0..3 {
            let h = resolvable_direction(&inst.analysis.svd_x, FD_MIN_RESOLUTION, &mut rng).unwrap();
            let c = check_fd_first(&inst.x_bar, &h, inst.k, &cfg).unwrap();
            checks += 1;
            worst_value = worst_value.max(c.value_error / c.theta_prime.abs().max(1.0));
            if c.noise_limited {
                noise_limited += 1;
            } else {
                min_slope = min_slope.min(c.slope);
            }
            failures += usize::from(!c.pass);
        }
    }
    outcome(
        failures == 0 && clustered > 0,
        format!(
            "{checks} directions on 100 instances ({clustered} clustered): max relative error {worst_value:.2e} at t = 1e-5 (<= 1e-3), min slope {min_slope:.2} (>= 1.8), {noise_limited} remainders at rounding level"
        ),
    )
}

fn c5_fd_second() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut seen: HashSet<SecondOrderCase> = HashSet::new();
    let (mut worst, mut failures, mut checks) = (0.0_f64, 0, 0);
    for i in 0..100 {
        let inst = instance(i);
        let an = &inst.analysis;
        let (m, n) = inst.x.shape();
        let k = inst.k;
        for rep in 0..2 {
            // on zero-σ̄_k instances, alternate with directions whose zero-block coupling
            // loses rank at index k, so the zero-inner formula enters θ''
            let h = if an.case == SigmaCase::ZeroSigmaK && (rep + i / 5) % 2 == 1 {
                let drop = an.m() - k + 1;
                rank_deficient_direction(&an.svd_x, drop, FD_MIN_RESOLUTION, &mut rng).unwrap().unwrap()
            } else {
                resolvable_direction(&an.svd_x, FD_MIN_RESOLUTION, &mut rng).unwrap()
            };
            let w = unit_gaussian(m, n, &mut rng);
            let cases = sigma_dd2_cases(&an.svd_x, &h, None).unwrap();
            seen.extend(cases.into_iter().take(k));
            let c = check_fd_second(&inst.x_bar, &h, &w, k, 1e-3, 1e-2).unwrap();
            checks += 1;
            worst = worst.max(c.error / c.theta_second.abs().max(1.0));
            failures += usize::from(!c.pass);
        }
    }
    let all = [SecondOrderCase::PositiveBlock, SecondOrderCase::ZeroBlockPositiveInner, SecondOrderCase::ZeroBlockZeroInner];
    let covered = all.iter().filter(|c| seen.contains(c)).count();
    outcome(
        failures == 0 && covered == 3,
        format!("{checks} (H, W) pairs on 100 instances: max relative error {worst:.2e} at t = 1e-3 (<= 1e-2), {covered}/3 second-order cases entering θ''"),
    )
}

fn c6_cone_routes() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let (mut disagreements, mut boundary, mut members, mut missed_members) = (0, 0, 0, 0);
    for i in 0..50 {
        let inst = instance(i);
        let an = &inst.analysis;
        let (m, n) = inst.x.shape();
        for j in 0..500 {
            let (h, built_member) = match j % 4 {
                0 => (gaussian(m, n, &mut rng), false),
                1 => (critical_cone_member(an, &mut rng), true),
                2 => (critical_cone_member(an, &mut rng) + gaussian(m, n, &mut rng) * 1e-6, false),
                _ => (-critical_cone_member(an, &mut rng), false),
            };
            match critical_cone_primal_contains(an, &h, TOL_CONE) {
                Ok(r) => {
                    members += usize::from(r.member);
                    boundary += usize::from(r.boundary);
                    missed_members += usize::from(built_member && !r.member);
                }
                Err(Error::RouteDisagreement { .. }) => disagreements += 1,
                Err(e) => panic!("{e}"),
            }
        }
    }
    outcome(
        disagreements == 0 && missed_members == 0,
        format!("25000 directions on 50 instances: {disagreements} route disagreements, {boundary} inside the boundary band, {members} members, {missed_members} constructed members rejected"),
    )
}

fn c7_sigma_sign() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let tol = 1e-9;
    let (mut sign_fail, mut zero_fail, mut viol_fail, mut equiv_fail, mut errors) = (0, 0, 0, 0, 0);
    let (mut random_count, mut zero_count, mut viol_count) = (0, 0, 0);
    let mut max_val = f64::NEG_INFINITY;
    for i in 0..50 {
        let inst = instance(i);
        let an = &inst.analysis;
        let (m, n) = inst.x.shape();
        let mut dirs: Vec<(u8, Mat)> = (0..20).map(|_| (0, gaussian(m, n, &mut rng))).collect();
        for _ in 0..4 {
            dirs.push((1, upsilon_zero_direction(an, &mut rng)));
            if let Some(h) = upsilon_violating_direction(an, &mut rng) {
                dirs.push((2, h));
            }
        }
        for (kind, h) in dirs {
            let (up, ud) = match (upsilon_primal(an, &h), upsilon_dual(an, &h)) {
                (Ok(a), Ok(b)) => (a.value_omega_route, b.value_omega_route),
                _ => {
                    errors += 1;
                    continue;
                }
            };
            let cond = upsilon_zero_conditions(an, &h, TOL_CONE).unwrap();
            max_val = max_val.max(up).max(ud);
            sign_fail += usize::from(up > tol || ud > tol);
            match kind {
                0 => random_count += 1,
                1 => {
                    zero_count += 1;
                    zero_fail += usize::from(up.abs() > tol || !cond);
                }
                _ => {
                    viol_count += 1;
                    viol_fail += usize::from(up >= -tol);
                }
            }
            let (zp, zd) = (up.abs() <= tol, ud.abs() <= tol);
            equiv_fail += usize::from(zp != zd || zd != cond);
        }
    }
    outcome(
        sign_fail + zero_fail + viol_fail + equiv_fail + errors == 0 && random_count >= 1000,
        format!(
            "{random_count} random, {zero_count} condition-satisfying, {viol_count} violating directions: max(Υ, Υ°) {max_val:.2e}; failures sign {sign_fail}, zero {zero_fail}, violating {viol_fail}, equivalence {equiv_fail}, errors {errors}"
        ),
    )
}

fn c8_sigma_routes() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let (mut samples, mut fails, mut worst) = (0, 0, 0.0_f64);
    let mut with_beta2 = 0;
    for i in 0..50 {
        let inst = instance(i);
        let an = &inst.analysis;
        let (m, n) = inst.x.shape();
        for j in 0..10 {
            let h = match j % 3 {
                0 => gaussian(m, n, &mut rng) * 2.0,
                1 => upsilon_zero_direction(an, &mut rng),
                _ => upsilon_violating_direction(an, &mut rng).unwrap_or_else(|| gaussian(m, n, &mut rng)),
            };
            samples += 1;
            let thr = 1e-9 * h.norm_squared().max(1.0);
            match (upsilon_primal(an, &h), upsilon_dual(an, &h)) {
                (Ok(a), Ok(b)) => {
                    let g = a.route_gap.max(b.route_gap);
                    worst = worst.max(g / thr);
                    fails += usize::from(g > thr);
                }
                _ => fails += 1,
            }
            if an.case == SigmaCase::PositiveSigmaK && !an.beta2.is_empty() {
                with_beta2 += 1;
            }
        }
    }
    outcome(
        fails == 0 && with_beta2 > 0,
        format!("{samples} samples: largest gap {worst:.2e} of the 1e-9·max(1, ‖H‖²) allowance, {fails} failures, {with_beta2} samples with nonempty β₂"),
    )
}

fn c9_support() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let (mut bound_fail, mut worst_bound) = (0, f64::NEG_INFINITY);
    let (mut zero_inst, mut attain_fail, mut worst_attain) = (0, 0, 0.0_f64);
    let mut bonus_worst = 0.0_f64;
    for i in 0..50 {
        let inst = instance(i);
        let an = &inst.analysis;
        let (m, n) = inst.x.shape();
        let k = inst.k;
        let h = critical_cone_member(an, &mut rng);
        let sup = support_t2(an, &h).unwrap();
        if !sup.is_finite() {
            bound_fail += 1;
            continue;
        }
        for _ in 0..200 {
            let w = gaussian(m, n, &mut rng) * 3.0;
            let v = inner(&inst.s_bar, &w) - theta_dd2(&an.svd_x, &h, &w, k).unwrap();
            worst_bound = worst_bound.max(v - sup);
            bound_fail += usize::from(v > sup + 1e-7);
        }
        if an.case == SigmaCase::ZeroSigmaK {
            zero_inst += 1;
            // W* = 2 H X̄^† H from an independent pseudo-inverse
            let pinv = inst.x_bar.clone().pseudo_inverse(1e-9).unwrap();
            let w = &h * pinv * &h * 2.0;
            let lib = support_maximizer(an, &h).unwrap();
            let v = inner(&inst.s_bar, &w) - theta_dd2(&an.svd_x, &h, &w, k).unwrap();
            let e = (v - sup).abs().max((&w - &lib).abs().max());
            worst_attain = worst_attain.max(e);
            attain_fail += usize::from(e > 1e-8);
        } else {
            let w = support_maximizer(an, &h).unwrap();
            let v = inner(&inst.s_bar, &w) - theta_dd2(&an.svd_x, &h, &w, k).unwrap();
            bonus_worst = bonus_worst.max((v - sup).abs());
        }
    }
    outcome(
        bound_fail == 0 && attain_fail == 0 && zero_inst > 0,
        format!(
            "50 instances × 200 W: max excess {worst_bound:.2e} (<= 1e-7); attainment on {zero_inst} zero-σ̄_k instances {worst_attain:.2e} (<= 1e-8); positive-case maximiser gap {bonus_worst:.2e}"
        ),
    )
}

fn c10_gauge() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let (mut worst, mut flips, mut count) = (0.0_f64, 0, 0);
    for i in 0..50 {
        let inst = instance(i);
        let an = &inst.analysis;
        let (m, n) = inst.x.shape();
        for j in 0..3 {
            let h = match j {
                0 => critical_cone_member(an, &mut rng),
                1 => critical_cone_dual_member(an, &mut rng),
                _ => gaussian(m, n, &mut rng),
            };
            let w = gaussian(m, n, &mut rng);
            let (v0, c0) = gauge_quantities(an, &h, &w).unwrap();
            for _ in 0..10 {
                let g = an.regauged(rng.random());
                let (v1, c1) = gauge_quantities(&g, &h, &w).unwrap();
                count += 1;
                worst = v0.iter().zip(&v1).map(|(a, b)| (a - b).abs()).fold(worst, f64::max);
                flips += usize::from(c0 != c1);
            }
        }
    }
    outcome(
        worst <= 1e-8 && flips == 0,
        format!("{count} regauged evaluations: max change in θ', θ'', Υ, Υ° {worst:.2e} (<= 1e-8), {flips} changed cone verdicts"),
    )
}

fn c11_special() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut worst = 0.0_f64;
    for i in 0..200 {
        let (m, n) = SHAPES[i % SHAPES.len()];
        let x = gaussian(m, n, &mut rng) * 2.0;
        worst = worst.max(special_case_deviation(&x).unwrap());
    }
    outcome(worst <= 1e-10, format!("200 X: k = 1 and k = m against spectral/nuclear formulas, max deviation {worst:.2e} (<= 1e-10)"))
}

fn c12_verify_runtime() -> Outcome {
    let t0 = Instant::now();
    let (mut runs, mut broken, mut failing) = (0, 0, 0);
    for p in SpectrumProfile::ALL {
        for (m, n, k) in [(4, 5, 2), (8, 10, 4)] {
            let out = Command::new(env!("CARGO_BIN_EXE_kyfan"))
                .args(["verify", "--profile", p.name(), "--m", &m.to_string(), "--n", &n.to_string(), "--k", &k.to_string(), "--seed", "12"])
                .output()
                .expect("run kyfan");
            runs += 1;
            match out.status.code() {
                Some(0) => {}
                Some(1) => failing += 1,
                _ => broken += 1,
            }
        }
    }
    let secs = t0.elapsed().as_secs_f64();
    outcome(
        broken == 0 && secs < 60.0,
        format!("{runs} `kyfan verify` runs over all profiles in {secs:.2}s (< 60s); {failing} reported a failing property, {broken} did not complete"),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 12] = [
        ("Moreau identity", c1_moreau),
        ("prox correctness", c2_prox),
        ("subgradient certification", c3_certification),
        ("first-order finite differences", c4_fd_first),
        ("second-order finite differences", c5_fd_second),
        ("critical-cone route agreement", c6_cone_routes),
        ("sigma-term sign and equality", c7_sigma_sign),
        ("two-route sigma-term equality", c8_sigma_routes),
        ("support-function bound and attainment", c9_support),
        ("gauge invariance", c10_gauge),
        ("special-case reduction", c11_special),
        ("verify suite runtime", c12_verify_runtime),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let t0 = Instant::now();
        let o = f();
        let tag = if o.pass { "PASS" } else { "FAIL" };
        failed += usize::from(!o.pass);
        println!("{tag} criterion {:>2} {name}: {} [{:.2}s]", i + 1, o.detail, t0.elapsed().as_secs_f64());
    }
    println!("acceptance: {}/{} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
