//! The fourteen Haralick textural features of a normalized co-occurrence
//! matrix.
//!
//! Gray levels are numbered from 1 inside the moment formulas (f3, f4, f6,
//! f7), so the sum distribution is indexed `2..=2N_g`. Logarithms are
//! natural and `0·log 0` is taken as 0. Degenerate inputs never fail:
//!
//! * f3 is 0 when `σ_x σ_y = 0`;
//! * f12 is 0 when `max(HX, HY) = 0`;
//! * f14 is 0 when fewer than two levels have nonzero row marginal.

use nalgebra::DMatrix;

use crate::glcm::{marginals, Marginals, NormalizedCooccurrence};

pub const NUM_FEATURES: usize = 14;

pub const FEATURE_NAMES: [&str; NUM_FEATURES] = [
    "angular_second_moment",
    "contrast",
    "correlation",
    "variance",
    "inverse_difference_moment",
    "sum_average",
    "sum_variance",
    "sum_entropy",
    "entropy",
    "difference_variance",
    "difference_entropy",
    "info_correlation_1",
    "info_correlation_2",
    "max_correlation_coeff",
];

/// Intermediate statistics shared by several features.
#[derive(Debug, Clone, PartialEq)]
pub struct Intermediates {
    pub mu_x: f64,
    pub mu_y: f64,
    pub sigma_x: f64,
    pub sigma_y: f64,
    pub hx: f64,
    pub hy: f64,
    pub hxy: f64,
    pub hxy1: f64,
    pub hxy2: f64,
    /// `Q(i, j) = Σ_k p(i,k) p(j,k) / (p_x(i) p_y(k))`, row-major
    /// `N_g × N_g`. Rows and columns of levels with `p_x = 0` are zero.
    pub q: Vec<f64>,
}

/// `-x ln x` with the `0 ln 0 = 0` convention.
#[inline]
fn neg_xlogx(x: f64) -> f64 {
    if x > 0.0 {
        -x * x.ln()
    } else {
        0.0
    }
}

pub fn intermediates(p: &NormalizedCooccurrence, m: &Marginals) -> Intermediates {
    let n = p.levels();

    let (mut mu_x, mut mu_y) = (0.0, 0.0);
    for i in 0..n {
        let level = (i + 1) as f64;
        mu_x += level * m.px[i];
        mu_y += level * m.py[i];
    }
    let (mut var_x, mut var_y) = (0.0, 0.0);
    for i in 0..n {
        let level = (i + 1) as f64;
        var_x += (level - mu_x).powi(2) * m.px[i];
        var_y += (level - mu_y).powi(2) * m.py[i];
    }

    let hx = m.px.iter().map(|&v| neg_xlogx(v)).sum();
    let hy = m.py.iter().map(|&v| neg_xlogx(v)).sum();

    let (mut hxy, mut hxy1, mut hxy2) = (0.0, 0.0, 0.0);
    for i in 0..n {
        for j in 0..n {
            let pij = p.get(i, j);
            let indep = m.px[i] * m.py[j];
            hxy += neg_xlogx(pij);
            if pij > 0.0 {
                hxy1 -= pij * indep.ln();
            }
            hxy2 += neg_xlogx(indep);
        }
    }

    let mut q = vec![0.0; n * n];
    for i in 0..n {
        if m.px[i] <= 0.0 {
            continue;
        }
        for j in 0..n {
            if m.px[j] <= 0.0 {
                continue;
            }
            let mut acc = 0.0;
            for k in 0..n {
                let denom = m.px[i] * m.py[k];
                if denom > 0.0 {
                    acc += p.get(i, k) * p.get(j, k) / denom;
                }
            }
            q[i * n + j] = acc;
        }
    }

    Intermediates {
        mu_x,
        mu_y,
        sigma_x: var_x.max(0.0).sqrt(),
        sigma_y: var_y.max(0.0).sqrt(),
        hx,
        hy,
        hxy,
        hxy1,
        hxy2,
        q,
    }
}

/// The fourteen textural features of one co-occurrence matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeatureVector(pub [f64; NUM_FEATURES]);

impl FeatureVector {
    #[inline]
    pub fn as_array(&self) -> &[f64; NUM_FEATURES] {
        &self.0
    }

    /// Feature `f_k` for 1-based `k`.
    #[inline]
    pub fn f(&self, k: usize) -> f64 {
        self.0[k - 1]
    }

    pub fn angular_second_moment(&self) -> f64 {
        self.0[0]
    }
    pub fn contrast(&self) -> f64 {
        self.0[1]
    }
    pub fn correlation(&self) -> f64 {
        self.0[2]
    }
    pub fn variance(&self) -> f64 {
        self.0[3]
    }
    pub fn inverse_difference_moment(&self) -> f64 {
        self.0[4]
    }
    pub fn sum_average(&self) -> f64 {
        self.0[5]
    }
    pub fn sum_variance(&self) -> f64 {
        self.0[6]
    }
    pub fn sum_entropy(&self) -> f64 {
        self.0[7]
    }
    pub fn entropy(&self) -> f64 {
        self.0[8]
    }
    pub fn difference_variance(&self) -> f64 {
        self.0[9]
    }
    pub fn difference_entropy(&self) -> f64 {
        self.0[10]
    }
    pub fn info_correlation_1(&self) -> f64 {
        self.0[11]
    }
    pub fn info_correlation_2(&self) -> f64 {
        self.0[12]
    }
    pub fn max_correlation_coeff(&self) -> f64 {
        self.0[13]
    }
}

pub fn features(p: &NormalizedCooccurrence) -> FeatureVector {
    let m = marginals(p);
    let it = intermediates(p, &m);
    features_from_parts(p, &m, &it)
}

pub fn features_from_parts(
    p: &NormalizedCooccurrence,
    m: &Marginals,
    it: &Intermediates,
) -> FeatureVector {
    let n = p.levels();

    let mut asm = 0.0;
    let mut ij_moment = 0.0;
    let mut variance = 0.0;
    let mut idm = 0.0;
    for i in 0..n {
        let li = (i + 1) as f64;
        for (j, &v) in p.row(i).iter().enumerate() {
            if v == 0.0 {
                continue;
            }
            let lj = (j + 1) as f64;
            asm += v * v;
            ij_moment += li * lj * v;
            variance += (li - it.mu_x).powi(2) * v;
            let d = li - lj;
            idm += v / (1.0 + d * d);
        }
    }

    let sd = it.sigma_x * it.sigma_y;
    let correlation = if sd > 0.0 {
        (ij_moment - it.mu_x * it.mu_y) / sd
    } else {
        0.0
    };

    // `m.sum[t]` is p_{x+y}(t + 2).
    let sum_average: f64 = m
        .sum
        .iter()
        .enumerate()
        .map(|(t, &v)| (t + 2) as f64 * v)
        .sum();
    let sum_variance: f64 = m
        .sum
        .iter()
        .enumerate()
        .map(|(t, &v)| ((t + 2) as f64 - sum_average).powi(2) * v)
        .sum();
    let sum_entropy: f64 = m.sum.iter().map(|&v| neg_xlogx(v)).sum();

    let contrast: f64 = m
        .diff
        .iter()
        .enumerate()
        .map(|(k, &v)| (k * k) as f64 * v)
        .sum();
    let diff_mean: f64 = m.diff.iter().enumerate().map(|(k, &v)| k as f64 * v).sum();
    let difference_variance: f64 = m
        .diff
        .iter()
        .enumerate()
        .map(|(k, &v)| (k as f64 - diff_mean).powi(2) * v)
        .sum();
    let difference_entropy: f64 = m.diff.iter().map(|&v| neg_xlogx(v)).sum();

    let hmax = it.hx.max(it.hy);
    let info_corr_1 = if hmax > 0.0 {
        (it.hxy - it.hxy1) / hmax
    } else {
        0.0
    };
    let info_corr_2 = (1.0 - (-2.0 * (it.hxy2 - it.hxy).max(0.0)).exp())
        .max(0.0)
        .sqrt();

    FeatureVector([
        asm,
        contrast,
        correlation,
        variance,
        idm,
        sum_average,
        sum_variance,
        sum_entropy,
        it.hxy,
        difference_variance,
        difference_entropy,
        info_corr_1,
        info_corr_2,
        max_correlation_coeff(p, m),
    ])
}

/// Square root of the second largest eigenvalue of `Q`.
///
/// `Q` restricted to levels with `p_x > 0` equals `D^{-1/2} S D^{1/2}` with
/// `D = diag(p_x)` and `S(i,j) = Σ_k p(i,k) p(j,k) / (sqrt(p_x(i) p_x(j)) p_y(k))`,
/// so its spectrum is that of the symmetric positive semidefinite `S`.
fn max_correlation_coeff(p: &NormalizedCooccurrence, m: &Marginals) -> f64 {
    let n = p.levels();
    let active: Vec<usize> = (0..n).filter(|&i| m.px[i] > 0.0).collect();
    let a = active.len();
    if a < 2 {
        return 0.0;
    }
    let cols: Vec<usize> = (0..n).filter(|&k| m.py[k] > 0.0).collect();

    // B(i, k) = p(i,k) / sqrt(p_x(i) p_y(k)); S = B Bᵀ.
    let b = DMatrix::from_fn(a, cols.len(), |r, c| {
        let (i, k) = (active[r], cols[c]);
        p.get(i, k) / (m.px[i] * m.py[k]).sqrt()
    });
    let s = &b * b.transpose();
    let mut eig: Vec<f64> = s.symmetric_eigenvalues().iter().copied().collect();
    eig.sort_by(|x, y| y.abs().total_cmp(&x.abs()));
    eig[1].clamp(0.0, 1.0).sqrt()
}
