//! Brute-force reference implementations used as test oracles.
//!
//! Everything here is written directly from the printed formulas with plain
//! loops and shares no code path with the library beyond its input types.

#![allow(dead_code, clippy::needless_range_loop)]

use nalgebra::DMatrix;
use palmtex_core::pipeline::FeatureMatrix;
use palmtex_core::{MultispectralFeatures, PersonId, PersonTemplate};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Enumerates every ordered pair of pixel positions and counts those whose
/// displacement equals `(dx, dy)`.
pub fn glcm_pairs(
    w: usize,
    h: usize,
    px: &[u8],
    levels: usize,
    dx: i32,
    dy: i32,
) -> (Vec<u64>, u64) {
    let mut counts = vec![0u64; levels * levels];
    let mut total = 0;
    for y1 in 0..h {
        for x1 in 0..w {
            for y2 in 0..h {
                for x2 in 0..w {
                    if x2 as i64 - x1 as i64 == dx as i64 && y2 as i64 - y1 as i64 == dy as i64 {
                        let a = px[y1 * w + x1] as usize;
                        let b = px[y2 * w + x2] as usize;
                        counts[a * levels + b] += 1;
                        total += 1;
                    }
                }
            }
        }
    }
    (counts, total)
}

pub fn quantize_pixel(v: u8, step: u32) -> u8 {
    (v as f64 / step as f64).floor() as u8
}

pub struct OracleMarginals {
    pub px: Vec<f64>,
    pub py: Vec<f64>,
    /// Indexed by the 1-based sum k = 2..=2N, stored at [k].
    pub sum: Vec<f64>,
    pub diff: Vec<f64>,
}

/// `p` is given as a 1-based matrix: `p[i][j]` for i, j in 1..=n (row/col 0 unused).
pub fn marginals(n: usize, p: &[Vec<f64>]) -> OracleMarginals {
    let mut px = vec![0.0; n + 1];
    let mut py = vec![0.0; n + 1];
    let mut sum = vec![0.0; 2 * n + 1];
    let mut diff = vec![0.0; n];
    for i in 1..=n {
        for j in 1..=n {
            px[i] += p[i][j];
        }
    }
    for j in 1..=n {
        for i in 1..=n {
            py[j] += p[i][j];
        }
    }
    for k in 2..=2 * n {
        for i in 1..=n {
            for j in 1..=n {
                if i + j == k {
                    sum[k] += p[i][j];
                }
            }
        }
    }
    for (k, d) in diff.iter_mut().enumerate() {
        for i in 1..=n {
            for j in 1..=n {
                if (i as i64 - j as i64).unsigned_abs() as usize == k {
                    *d += p[i][j];
                }
            }
        }
    }
    OracleMarginals { px, py, sum, diff }
}

pub fn one_based(n: usize, flat: &[f64]) -> Vec<Vec<f64>> {
    let mut p = vec![vec![0.0; n + 1]; n + 1];
    for i in 0..n {
        for j in 0..n {
            p[i + 1][j + 1] = flat[i * n + j];
        }
    }
    p
}

fn plogp(x: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x * x.ln()
    }
}

pub struct OracleTerms {
    pub mu_x: f64,
    pub mu_y: f64,
    pub sigma_x: f64,
    pub sigma_y: f64,
    pub hx: f64,
    pub hy: f64,
    pub hxy: f64,
    pub hxy1: f64,
    pub hxy2: f64,
}

pub fn terms(n: usize, p: &[Vec<f64>]) -> OracleTerms {
    let m = marginals(n, p);
    let mu_x: f64 = (1..=n).map(|i| i as f64 * m.px[i]).sum();
    let mu_y: f64 = (1..=n).map(|j| j as f64 * m.py[j]).sum();
    let sigma_x = (1..=n)
        .map(|i| (i as f64 - mu_x).powi(2) * m.px[i])
        .sum::<f64>()
        .sqrt();
    let sigma_y = (1..=n)
        .map(|j| (j as f64 - mu_y).powi(2) * m.py[j])
        .sum::<f64>()
        .sqrt();
    let hx = -(1..=n).map(|i| plogp(m.px[i])).sum::<f64>();
    let hy = -(1..=n).map(|j| plogp(m.py[j])).sum::<f64>();
    let mut hxy = 0.0;
    let mut hxy1 = 0.0;
    let mut hxy2 = 0.0;
    for i in 1..=n {
        for j in 1..=n {
            hxy -= plogp(p[i][j]);
            if p[i][j] != 0.0 {
                hxy1 -= p[i][j] * (m.px[i] * m.py[j]).ln();
            }
            hxy2 -= plogp(m.px[i] * m.py[j]);
        }
    }
    OracleTerms {
        mu_x,
        mu_y,
        sigma_x,
        sigma_y,
        hx,
        hy,
        hxy,
        hxy1,
        hxy2,
    }
}

/// The fourteen features evaluated from the printed formulas, with `f14`
/// from a general (non-symmetric) dense eigensolve of `Q`.
pub fn features(n: usize, flat: &[f64]) -> [f64; 14] {
    let p = one_based(n, flat);
    let m = marginals(n, &p);
    let t = terms(n, &p);
    let mut f = [0.0; 14];

    for i in 1..=n {
        for j in 1..=n {
            f[0] += p[i][j] * p[i][j];
        }
    }
    for k in 0..n {
        f[1] += (k * k) as f64 * m.diff[k];
    }
    let mut sij = 0.0;
    for i in 1..=n {
        for j in 1..=n {
            sij += (i * j) as f64 * p[i][j];
        }
    }
    f[2] = if t.sigma_x * t.sigma_y == 0.0 {
        0.0
    } else {
        (sij - t.mu_x * t.mu_y) / (t.sigma_x * t.sigma_y)
    };
    for i in 1..=n {
        for j in 1..=n {
            f[3] += (i as f64 - t.mu_x).powi(2) * p[i][j];
            f[4] += p[i][j] / (1.0 + (i as f64 - j as f64).powi(2));
        }
    }
    for k in 2..=2 * n {
        f[5] += k as f64 * m.sum[k];
    }
    for k in 2..=2 * n {
        f[6] += (k as f64 - f[5]).powi(2) * m.sum[k];
        f[7] -= plogp(m.sum[k]);
    }
    f[8] = t.hxy;
    let mu_d: f64 = (0..n).map(|k| k as f64 * m.diff[k]).sum();
    for k in 0..n {
        f[9] += (k as f64 - mu_d).powi(2) * m.diff[k];
        f[10] -= plogp(m.diff[k]);
    }
    let hmax = t.hx.max(t.hy);
    f[11] = if hmax == 0.0 {
        0.0
    } else {
        (t.hxy - t.hxy1) / hmax
    };
    f[12] = (1.0 - (-2.0 * (t.hxy2 - t.hxy)).exp()).max(0.0).sqrt();
    f[13] = max_corr(n, &p, &m);
    f
}

fn max_corr(n: usize, p: &[Vec<f64>], m: &OracleMarginals) -> f64 {
    let active: Vec<usize> = (1..=n).filter(|&i| m.px[i] > 0.0).collect();
    if active.len() < 2 {
        return 0.0;
    }
    let q = DMatrix::from_fn(active.len(), active.len(), |a, b| {
        let (i, j) = (active[a], active[b]);
        let mut s = 0.0;
        for k in 1..=n {
            if m.px[i] * m.py[k] > 0.0 {
                s += p[i][k] * p[j][k] / (m.px[i] * m.py[k]);
            }
        }
        s
    });
    let mut eig: Vec<_> = q.complex_eigenvalues().iter().copied().collect();
    eig.sort_by(|a, b| b.norm().total_cmp(&a.norm()));
    eig[1].re.clamp(0.0, 1.0).sqrt()
}

/// A random normalized co-occurrence table. Roughly a third of the cells
/// are zero so the degenerate-term conventions are exercised.
pub fn random_probs(rng: &mut impl Rng, n: usize) -> Vec<f64> {
    let mut counts: Vec<f64> = (0..n * n)
        .map(|_| {
            if rng.random_bool(0.35) {
                0.0
            } else {
                rng.random_range(1..1000) as f64
            }
        })
        .collect();
    if counts.iter().all(|&c| c == 0.0) {
        counts[0] = 1.0;
    }
    let total: f64 = counts.iter().sum();
    counts.iter().map(|c| c / total).collect()
}

/// `|a − b| ≤ rel · max(|a|, |b|)`, with an absolute floor of `1e-12` for
/// quantities that are zero in exact arithmetic.
pub fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs()) || (a - b).abs() <= 1e-12
}

pub fn random_matrix(rng: &mut impl Rng, cols: usize) -> FeatureMatrix {
    FeatureMatrix::from_row_major(
        cols,
        (0..14 * cols)
            .map(|_| rng.random_range(-1.0..1.0))
            .collect(),
    )
    .unwrap()
}

pub fn random_features(rng: &mut impl Rng, cols: usize) -> MultispectralFeatures {
    MultispectralFeatures::new(std::array::from_fn(|_| random_matrix(rng, cols))).unwrap()
}

/// Plain quadruple-loop weighted distance, averaged over spectra.
pub fn mdc_distance(
    test: &MultispectralFeatures,
    tpl: &MultispectralFeatures,
    w: &[f64; 14],
    alpha: &[f64; 14],
) -> f64 {
    let mut per_spectrum = Vec::new();
    for s in 0..4 {
        let (a, b) = (&test.matrices()[s], &tpl.matrices()[s]);
        let mut d = 0.0;
        for m in 0..14 {
            for n in 0..a.cols() {
                d += w[m] * alpha[m] * (a.get(m, n) - b.get(m, n)).powi(2);
            }
        }
        per_spectrum.push(d);
    }
    per_spectrum.iter().sum::<f64>() / 4.0
}

/// Exhaustive scan: sort candidates by (distance, id) and take the first.
pub fn mdc_scan(
    test: &MultispectralFeatures,
    templates: &[PersonTemplate],
    w: &[f64; 14],
    alpha: &[f64; 14],
) -> PersonId {
    let mut all: Vec<(f64, &PersonId)> = templates
        .iter()
        .map(|t| (mdc_distance(test, &t.features, w, alpha), &t.person_id))
        .collect();
    all.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(b.1)));
    all[0].1.clone()
}

/// Independent vote tally: per (spectrum, row), the Euclidean-nearest
/// template receives `w[row]`.
pub fn wmv_tally(
    test: &MultispectralFeatures,
    templates: &[PersonTemplate],
    w: &[f64; 14],
) -> (PersonId, Vec<(PersonId, f64)>) {
    let mut ids: Vec<PersonId> = templates.iter().map(|t| t.person_id.clone()).collect();
    ids.sort();
    let mut score = vec![0.0; ids.len()];
    for s in 0..4 {
        for m in 0..14 {
            let mut best: Option<(f64, usize)> = None;
            for (k, id) in ids.iter().enumerate() {
                let t = templates.iter().find(|t| &t.person_id == id).unwrap();
                let mut sq = 0.0;
                for n in 0..test.cols() {
                    sq +=
                        (test.matrices()[s].get(m, n) - t.features.matrices()[s].get(m, n)).powi(2);
                }
                let norm = sq.sqrt();
                if best.is_none_or(|(b, _)| norm < b) {
                    best = Some((norm, k));
                }
            }
            score[best.unwrap().1] += w[m];
        }
    }
    let mut win = 0;
    for k in 1..ids.len() {
        if score[k] > score[win] {
            win = k;
        }
    }
    let scores = ids.iter().cloned().zip(score).collect();
    (ids[win].clone(), scores)
}

/// The 4×4 worked-example image, levels 1..=3.
pub fn worked_a() -> palmtex_core::QuantizedImage {
    #[rustfmt::skip]
    let px = vec![
        1, 1, 2, 1,
        2, 3, 1, 2,
        2, 1, 3, 2,
        3, 3, 2, 1,
    ];
    palmtex_core::QuantizedImage::new(4, 4, 4, px).unwrap()
}
