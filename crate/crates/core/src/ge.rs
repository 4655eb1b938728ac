//! Validation of subgradient pairs `S ∈ ∂θ(X)` and their index taxonomy.
//!
//! A pair is analysed through the SVD of `X = X̄ + S̄`, which diagonalises
//! both members simultaneously. All index sets are 0-based half-open ranges
//! in the `m <= n` frame of that SVD.

use std::ops::Range;

use crate::error::{Error, Result};
use crate::norms::{check_k, dual_kyfan_norm, kyfan_norm};
use crate::spectral::{check_matrix, check_same_shape, equivalent_svd, ordered_svd, singular_values, Mat, OrderedSvd, Vector};

/// Which side of zero the k-th singular value of `X̄` sits on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SigmaCase {
    PositiveSigmaK,
    ZeroSigmaK,
}

impl SigmaCase {
    pub fn tag(self) -> &'static str {
        match self {
            SigmaCase::PositiveSigmaK => "POSITIVE_SIGMA_K",
            SigmaCase::ZeroSigmaK => "ZERO_SIGMA_K",
        }
    }
}

/// Role of a block `a_l` in the taxonomy.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BlockClass {
    Alpha,
    Beta1,
    Beta2,
    Beta3,
    Gamma,
}

/// Tolerances used by [`analyze_ge`].
#[derive(Debug, Clone, Copy)]
pub struct GeOptions {
    /// Residue allowed on the simultaneous diagonalisation and the multiplier conditions.
    pub tol: f64,
    /// Band used to classify `ū` into `{1, (0,1), 0}` and to decide `σ̄_k = 0`.
    pub class_tol: f64,
    /// Grouping tolerance for the SVD of `X`; `None` selects the default.
    pub group_tol: Option<f64>,
}

impl Default for GeOptions {
    fn default() -> Self {
        GeOptions {
            tol: 1e-8,
            class_tol: 1e-8,
            group_tol: None,
        }
    }
}

/// Outcome of the norm-duality membership test.
#[derive(Debug, Clone, Copy)]
pub struct DualityCheck {
    pub holds: bool,
    pub dual_norm: f64,
    /// `ϑ(S̄) - 1`, positive when outside the dual ball.
    pub dual_residual: f64,
    /// `|<S̄, X̄> - θ(X̄)|`.
    pub pairing_residual: f64,
}

/// `S̄ ∈ ∂θ(X̄)` iff `ϑ(S̄) <= 1` and `<S̄, X̄> = θ(X̄)`.
pub fn check_subgradient_duality(x_bar: &Mat, s_bar: &Mat, k: usize, tol: f64) -> Result<DualityCheck> {
    check_matrix(x_bar, "x_bar")?;
    check_matrix(s_bar, "s_bar")?;
    check_same_shape(x_bar, s_bar, "x_bar/s_bar")?;
    check_k(k, x_bar)?;
    let dual_norm = dual_kyfan_norm(s_bar, k)?;
    let theta = kyfan_norm(x_bar, k)?;
    let pairing_residual = (s_bar.dot(x_bar) - theta).abs();
    Ok(DualityCheck {
        holds: dual_norm <= 1.0 + tol && pairing_residual <= tol * theta.max(1.0),
        dual_norm,
        dual_residual: dual_norm - 1.0,
        pairing_residual,
    })
}

/// A validated subgradient pair with its full index taxonomy.
#[derive(Debug, Clone)]
pub struct GeAnalysis {
    pub x_bar: Mat,
    pub s_bar: Mat,
    pub k: usize,
    /// SVD of `X = X̄ + S̄`; its factors are the shared `(Ū, V̄)`.
    pub svd: OrderedSvd,
    /// Independent SVD of `X̄` alone, used for direct evaluations of `θ'(X̄; ·)`.
    pub svd_x: OrderedSvd,
    pub sigma_bar: Vector,
    pub u_bar: Vector,
    pub case: SigmaCase,
    pub k0: usize,
    pub k1: usize,
    pub alpha: Range<usize>,
    pub beta: Range<usize>,
    pub gamma: Range<usize>,
    pub beta1: Range<usize>,
    pub beta2: Range<usize>,
    pub beta3: Range<usize>,
    /// `a_1..a_r` followed by `a_{r+1} = b`.
    pub blocks: Vec<Range<usize>>,
    pub classes: Vec<BlockClass>,
    /// Common `σ̄` value of each block.
    pub block_sigma_bar: Vec<f64>,
    /// Common `ū` value of each block.
    pub block_u_bar: Vec<f64>,
    pub r: usize,
    pub r0: usize,
    pub r_tilde0: usize,
    pub r_tilde1: usize,
    pub r1: usize,
    pub nu_bar: Vec<f64>,
    pub mu_bar: Vec<f64>,
    pub dual_norm_s: f64,
    pub nuclear_norm_s: f64,
    pub options: GeOptions,
}

impl GeAnalysis {
    pub fn m(&self) -> usize {
        self.svd.m()
    }

    pub fn n(&self) -> usize {
        self.svd.n()
    }

    /// `σ̄_k`.
    pub fn sigma_bar_k(&self) -> f64 {
        self.sigma_bar[self.k - 1]
    }

    /// `ϑ(S̄) = 1` up to the classification band.
    pub fn dual_active(&self) -> bool {
        self.dual_norm_s >= 1.0 - self.options.class_tol
    }

    /// `‖S̄‖_* = k` up to the classification band.
    pub fn nuclear_at_k(&self) -> bool {
        self.nuclear_norm_s >= self.k as f64 * (1.0 - self.options.class_tol)
    }

    /// Block indices (into `blocks`) with the given class.
    pub fn blocks_of(&self, class: BlockClass) -> Vec<usize> {
        (0..self.blocks.len()).filter(|&l| self.classes[l] == class).collect()
    }

    /// `Ū^T H V̄` for an ambient direction.
    pub fn rotate(&self, h: &Mat) -> Mat {
        self.svd.rotate(h)
    }

    /// `Ū H̃ V̄^T` in ambient shape.
    pub fn compose(&self, h_tilde: &Mat) -> Mat {
        self.svd.compose(h_tilde)
    }

    /// Shape of the ambient matrices.
    pub fn ambient_shape(&self) -> (usize, usize) {
        self.svd.ambient_shape()
    }

    /// The same analysis expressed in a randomly re-chosen pair of singular factors.
    pub fn regauged(&self, seed: u64) -> GeAnalysis {
        let mut out = self.clone();
        out.svd = equivalent_svd(&self.svd, seed);
        out.svd_x = equivalent_svd(&self.svd_x, seed ^ 0x9e37_79b9_7f4a_7c15);
        out
    }
}

fn mean(v: &Vector, r: &Range<usize>) -> f64 {
    if r.is_empty() {
        0.0
    } else {
        r.clone().map(|i| v[i]).sum::<f64>() / r.len() as f64
    }
}

fn union(blocks: &[Range<usize>], classes: &[BlockClass], c: BlockClass, default_at: usize) -> Range<usize> {
    let mut lo = usize::MAX;
    let mut hi = 0;
    for (l, b) in blocks.iter().enumerate() {
        if classes[l] == c && !b.is_empty() {
            lo = lo.min(b.start);
            hi = hi.max(b.end);
        }
    }
    if lo == usize::MAX {
        default_at..default_at
    } else {
        lo..hi
    }
}

/// Validates `(X̄, S̄)` and derives the index taxonomy.
pub fn analyze_ge(x_bar: &Mat, s_bar: &Mat, k: usize, options: GeOptions) -> Result<GeAnalysis> {
    check_matrix(x_bar, "x_bar")?;
    check_matrix(s_bar, "s_bar")?;
    check_same_shape(x_bar, s_bar, "x_bar/s_bar")?;
    check_k(k, x_bar)?;
    let x = x_bar + s_bar;
    let svd = ordered_svd(&x, options.group_tol)?;
    let (m, n) = (svd.m(), svd.n());
    let scale = svd.sigma_max().max(1.0);
    let tol = options.tol * scale;

    let dx = svd.rotate(x_bar);
    let ds = svd.rotate(s_bar);
    let mut residue: f64 = 0.0;
    for i in 0..m {
        for j in 0..n {
            if i != j {
                residue = residue.max(dx[(i, j)].abs()).max(ds[(i, j)].abs());
            }
        }
    }
    if residue > tol {
        return Err(Error::SimultaneousSvdViolation { residue, threshold: tol });
    }
    let sigma_bar = Vector::from_fn(m, |i, _| dx[(i, i)]);
    let u_bar = Vector::from_fn(m, |i, _| ds[(i, i)]);

    for i in 0..m {
        if sigma_bar[i] < -tol || u_bar[i] < -tol {
            return Err(Error::ConditionViolation(format!(
                "negative diagonal entry at index {}: sigma_bar = {:.3e}, u_bar = {:.3e}",
                i + 1,
                sigma_bar[i],
                u_bar[i]
            )));
        }
        if i > 0 && (sigma_bar[i] > sigma_bar[i - 1] + tol || u_bar[i] > u_bar[i - 1] + tol) {
            return Err(Error::ConditionViolation(format!(
                "diagonal factors are not jointly non-increasing at index {}",
                i + 1
            )));
        }
    }

    let blocks = svd.groups.all_blocks();
    let block_sigma_bar: Vec<f64> = blocks.iter().map(|b| mean(&sigma_bar, b).max(0.0)).collect();
    let block_u_bar: Vec<f64> = blocks.iter().map(|b| mean(&u_bar, b).max(0.0)).collect();
    let block_of_k = blocks.iter().position(|b| b.contains(&(k - 1))).expect("k within 1..m");
    let sbk = block_sigma_bar[block_of_k];
    let ctol = options.class_tol;
    let case = if sbk <= ctol * scale {
        SigmaCase::ZeroSigmaK
    } else {
        SigmaCase::PositiveSigmaK
    };
    let eq_tol = ctol * scale;
    let r = svd.groups.r();

    let mut classes = Vec::with_capacity(blocks.len());
    for (l, b) in blocks.iter().enumerate() {
        let sb = block_sigma_bar[l];
        let ub = block_u_bar[l];
        let in_beta = match case {
            SigmaCase::PositiveSigmaK => (sb - sbk).abs() <= eq_tol,
            SigmaCase::ZeroSigmaK => sb <= eq_tol,
        };
        let class = if !in_beta {
            if sb > sbk {
                BlockClass::Alpha
            } else {
                BlockClass::Gamma
            }
        } else if case == SigmaCase::ZeroSigmaK && l == r {
            BlockClass::Beta3
        } else if ub >= 1.0 - ctol {
            BlockClass::Beta1
        } else if ub <= ctol {
            if case == SigmaCase::ZeroSigmaK {
                return Err(Error::DegenerateClassification(format!(
                    "block {}..{} has positive singular values but u_bar = {:.3e} in the zero-sigma case",
                    b.start + 1,
                    b.end,
                    ub
                )));
            }
            BlockClass::Beta3
        } else {
            BlockClass::Beta2
        };
        classes.push(class);
    }

    let alpha = union(&blocks, &classes, BlockClass::Alpha, 0);
    let k0 = alpha.end;
    let beta1 = union(&blocks, &classes, BlockClass::Beta1, k0);
    let beta2 = union(&blocks, &classes, BlockClass::Beta2, beta1.end);
    let beta3 = union(&blocks, &classes, BlockClass::Beta3, beta2.end);
    let beta = k0..beta3.end;
    let gamma = beta.end..m;
    let k1 = beta.end;

    // contiguity of the classes in block order
    let order = |c: BlockClass| match c {
        BlockClass::Alpha => 0,
        BlockClass::Beta1 => 1,
        BlockClass::Beta2 => 2,
        BlockClass::Beta3 => 3,
        BlockClass::Gamma => 4,
    };
    for l in 1..blocks.len() {
        if !blocks[l].is_empty() && order(classes[l]) < order(classes[l - 1]) && !blocks[l - 1].is_empty() {
            return Err(Error::ConditionViolation("index classes are not ordered as alpha, beta, gamma".into()));
        }
    }

    let count = |c: BlockClass| classes.iter().filter(|&&x| x == c).count();
    let r0 = count(BlockClass::Alpha);
    let r_tilde0 = r0 + count(BlockClass::Beta1);
    let r_tilde1 = r_tilde0 + count(BlockClass::Beta2);
    let r1 = match case {
        SigmaCase::ZeroSigmaK => r + 1,
        SigmaCase::PositiveSigmaK => r_tilde1 + (0..r).filter(|&l| classes[l] == BlockClass::Beta3).count(),
    };

    // multiplier conditions
    let need = (k - k0) as f64;
    let violation = |what: String| Err(Error::ConditionViolation(what));
    for i in alpha.clone() {
        if (u_bar[i] - 1.0).abs() > tol {
            return violation(format!("u_bar_alpha = 1 fails at index {} (u = {:.6e})", i + 1, u_bar[i]));
        }
    }
    for i in beta.clone() {
        if u_bar[i] < -tol || u_bar[i] > 1.0 + tol {
            return violation(format!("0 <= u_bar_beta <= 1 fails at index {} (u = {:.6e})", i + 1, u_bar[i]));
        }
    }
    let sum_beta: f64 = beta.clone().map(|i| u_bar[i]).sum();
    match case {
        SigmaCase::PositiveSigmaK => {
            if (sum_beta - need).abs() > tol * need.max(1.0) {
                return violation(format!("sum of u_bar over beta = {sum_beta:.6e} differs from k - k0 = {need}"));
            }
            for i in gamma.clone() {
                if u_bar[i].abs() > tol {
                    return violation(format!("u_bar_gamma = 0 fails at index {} (u = {:.6e})", i + 1, u_bar[i]));
                }
            }
        }
        SigmaCase::ZeroSigmaK => {
            if sum_beta > need + tol * need.max(1.0) {
                return violation(format!("sum of u_bar over beta = {sum_beta:.6e} exceeds k - k0 = {need}"));
            }
        }
    }

    let nu_bar: Vec<f64> = (0..blocks.len())
        .filter(|&l| classes[l] == BlockClass::Alpha)
        .map(|l| block_sigma_bar[l])
        .collect();
    let mu_bar: Vec<f64> = (0..blocks.len())
        .filter(|&l| matches!(classes[l], BlockClass::Beta1 | BlockClass::Beta2))
        .map(|l| if classes[l] == BlockClass::Beta1 { 1.0 } else { block_u_bar[l] })
        .collect();

    let nuclear_norm_s: f64 = u_bar.iter().map(|v| v.max(0.0)).sum();
    let dual_norm_s = u_bar[0].max(nuclear_norm_s / k as f64);

    Ok(GeAnalysis {
        x_bar: x_bar.clone(),
        s_bar: s_bar.clone(),
        k,
        svd,
        svd_x: ordered_svd(x_bar, None)?,
        sigma_bar,
        u_bar,
        case,
        k0,
        k1,
        alpha,
        beta,
        gamma,
        beta1,
        beta2,
        beta3,
        blocks,
        classes,
        block_sigma_bar,
        block_u_bar,
        r,
        r0,
        r_tilde0,
        r_tilde1,
        r1,
        nu_bar,
        mu_bar,
        dual_norm_s,
        nuclear_norm_s,
        options,
    })
}

/// Result of the strict complementarity test.
#[derive(Debug, Clone, Copy)]
pub struct StrictComplementarity {
    pub holds: bool,
    /// Smallest slack among the strict inequalities.
    pub margin: f64,
}

pub fn check_strict_complementarity(an: &GeAnalysis, tol: f64) -> StrictComplementarity {
    let mut margin = f64::INFINITY;
    match an.case {
        SigmaCase::PositiveSigmaK => {
            for i in an.beta.clone() {
                margin = margin.min(an.u_bar[i]).min(1.0 - an.u_bar[i]);
            }
        }
        SigmaCase::ZeroSigmaK => {
            let mut sum = 0.0;
            for i in an.beta.clone() {
                margin = margin.min(1.0 - an.u_bar[i]);
                sum += an.u_bar[i];
            }
            margin = margin.min((an.k - an.k0) as f64 - sum);
        }
    }
    StrictComplementarity {
        holds: margin > tol,
        margin,
    }
}

/// Spanning set of the range of the constraint derivative.
#[derive(Debug, Clone, Default)]
pub struct LinearMapRange {
    pub basis: Vec<Mat>,
}

/// Orthonormal basis of the primal lineality space, in ambient coordinates.
pub fn lineality_basis(an: &GeAnalysis) -> Vec<Mat> {
    let (m, n) = (an.m(), an.n());
    let beta = an.beta.clone();
    let mut out = Vec::new();
    let unit = |i: usize, j: usize| {
        let mut e = Mat::zeros(m, n);
        e[(i, j)] = 1.0;
        e
    };
    match an.case {
        SigmaCase::PositiveSigmaK => {
            for i in 0..m {
                for j in 0..n {
                    if !(beta.contains(&i) && beta.contains(&j)) {
                        out.push(unit(i, j));
                    }
                }
            }
            let h = std::f64::consts::FRAC_1_SQRT_2;
            for i in beta.clone() {
                for j in (i + 1)..beta.end {
                    let mut e = Mat::zeros(m, n);
                    e[(i, j)] = h;
                    e[(j, i)] = -h;
                    out.push(e);
                }
            }
            if !beta.is_empty() {
                let mut e = Mat::zeros(m, n);
                let c = 1.0 / (beta.len() as f64).sqrt();
                for i in beta.clone() {
                    e[(i, i)] = c;
                }
                out.push(e);
            }
        }
        SigmaCase::ZeroSigmaK => {
            for i in 0..m {
                for j in 0..n {
                    if !beta.contains(&i) || an.alpha.contains(&j) {
                        out.push(unit(i, j));
                    }
                }
            }
        }
    }
    out.iter().map(|e| an.compose(e)).collect()
}

/// Result of the nondegeneracy test.
#[derive(Debug, Clone, Copy)]
pub struct Nondegeneracy {
    pub holds: bool,
    pub rank: usize,
    pub dimension: usize,
    pub smallest_singular_value: f64,
}

/// Tests `span(range) + T^lin = R^{m x n}` by a rank test on the stacked vectorisations.
pub fn check_nondegeneracy(an: &GeAnalysis, range: &LinearMapRange, tol: f64) -> Result<Nondegeneracy> {
    let shape = an.ambient_shape();
    for (i, b) in range.basis.iter().enumerate() {
        if b.shape() != shape {
            return Err(Error::Input(format!("basis element {} has shape {:?}, expected {:?}", i + 1, b.shape(), shape)));
        }
        check_matrix(b, "basis element")?;
    }
    let dim = shape.0 * shape.1;
    let mut columns: Vec<Mat> = lineality_basis(an);
    for b in &range.basis {
        let nb = b.norm();
        if nb > 0.0 {
            columns.push(b / nb);
        }
    }
    if columns.len() < dim {
        let stacked = Mat::from_fn(dim, columns.len(), |r, c| columns[c].as_slice()[r]);
        let s = singular_values(&stacked);
        let rank = s.iter().filter(|&&v| v > tol).count();
        return Ok(Nondegeneracy {
            holds: false,
            rank,
            dimension: dim,
            smallest_singular_value: 0.0,
        });
    }
    let stacked = Mat::from_fn(dim, columns.len(), |r, c| columns[c].as_slice()[r]);
    let s = singular_values(&stacked);
    let rank = s.iter().filter(|&&v| v > tol).count();
    Ok(Nondegeneracy {
        holds: rank == dim,
        rank,
        dimension: dim,
        smallest_singular_value: s.iter().take(dim).cloned().fold(f64::INFINITY, f64::min),
    })
}
