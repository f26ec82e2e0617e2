//! Weighted minimum-distance and weighted majority-voting classifiers over
//! multispectral person templates.
//!
//! Both classifiers break ties in favour of the lowest-ordered [`PersonId`],
//! for individual votes as well as for the final decision.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::haralick::NUM_FEATURES;
use crate::pipeline::{MultispectralFeatures, PersonId};

/// Floor applied to the mean absolute feature value before taking its
/// reciprocal.
pub const ALPHA_EPSILON: f64 = 1e-12;

/// A person's enrolled template: per-spectrum mean of training matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct PersonTemplate {
    pub person_id: PersonId,
    pub features: MultispectralFeatures,
}

impl PersonTemplate {
    pub fn from_samples<'a, I>(person_id: PersonId, samples: I) -> Result<Self>
    where
        I: IntoIterator<Item = &'a MultispectralFeatures>,
        I::IntoIter: Clone,
    {
        Ok(Self {
            person_id,
            features: MultispectralFeatures::mean(samples)?,
        })
    }
}

/// Per-row feature importance `w` and normalizing factor `alpha`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassifierWeights {
    pub w: [f64; NUM_FEATURES],
    pub alpha: [f64; NUM_FEATURES],
}

impl ClassifierWeights {
    pub fn new(w: [f64; NUM_FEATURES], alpha: [f64; NUM_FEATURES]) -> Result<Self> {
        if w.iter().any(|&v| !v.is_finite() || v < 0.0) {
            return Err(Error::InvalidParameter(
                "feature weights must be finite and nonnegative".into(),
            ));
        }
        if !w.iter().any(|&v| v > 0.0) {
            return Err(Error::InvalidParameter(
                "at least one feature weight must be positive".into(),
            ));
        }
        if alpha.iter().any(|&v| !v.is_finite() || v <= 0.0) {
            return Err(Error::InvalidParameter(
                "normalizing factors must be finite and positive".into(),
            ));
        }
        Ok(Self { w, alpha })
    }

    /// `w = 1`, `alpha = 1`.
    pub fn ones() -> Self {
        Self {
            w: [1.0; NUM_FEATURES],
            alpha: [1.0; NUM_FEATURES],
        }
    }

    /// Combined per-row factor `w_m · alpha_m`.
    pub fn row_factors(&self) -> [f64; NUM_FEATURES] {
        std::array::from_fn(|m| self.w[m] * self.alpha[m])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightMode {
    /// Every row has importance 1.
    Uniform,
    /// Row importance is the leave-one-out accuracy of that row alone.
    PerRowAccuracy,
}

impl fmt::Display for WeightMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            WeightMode::Uniform => "uniform",
            WeightMode::PerRowAccuracy => "per_row_accuracy",
        })
    }
}

impl std::str::FromStr for WeightMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "uniform" | "none" | "unweighted" => Ok(WeightMode::Uniform),
            "per_row_accuracy" | "accuracy" | "weighted" => Ok(WeightMode::PerRowAccuracy),
            _ => Err(Error::InvalidParameter(format!(
                "unknown weight mode `{s}`"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClassifierKind {
    /// Weighted minimum-distance classifier.
    Mdc,
    /// Weighted majority voting.
    Wmv,
}

impl ClassifierKind {
    /// Whether larger scores are better.
    pub fn maximizes(self) -> bool {
        matches!(self, ClassifierKind::Wmv)
    }
}

impl fmt::Display for ClassifierKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ClassifierKind::Mdc => "mdc",
            ClassifierKind::Wmv => "wmv",
        })
    }
}

impl std::str::FromStr for ClassifierKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mdc" => Ok(ClassifierKind::Mdc),
            "wmv" => Ok(ClassifierKind::Wmv),
            _ => Err(Error::InvalidParameter(format!("unknown classifier `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IdentificationResult {
    pub classifier: ClassifierKind,
    pub predicted_id: PersonId,
    /// Distance (MDC) or total vote score (WMV) of every candidate.
    pub scores: BTreeMap<PersonId, f64>,
    pub elapsed: Duration,
}

impl IdentificationResult {
    /// Candidates ordered best first, ties by id.
    pub fn ranked(&self) -> Vec<(&PersonId, f64)> {
        let mut v: Vec<_> = self.scores.iter().map(|(id, &s)| (id, s)).collect();
        let max = self.classifier.maximizes();
        v.sort_by(|a, b| {
            let ord = if max {
                b.1.total_cmp(&a.1)
            } else {
                a.1.total_cmp(&b.1)
            };
            ord.then_with(|| a.0.cmp(b.0))
        });
        v
    }
}

fn check_templates(test: &MultispectralFeatures, templates: &[PersonTemplate]) -> Result<()> {
    if templates.is_empty() {
        return Err(Error::InvalidParameter(
            "no templates to match against".into(),
        ));
    }
    let mut seen = BTreeSet::new();
    for t in templates {
        test.check_shape(&t.features)?;
        if !seen.insert(&t.person_id) {
            return Err(Error::InvalidParameter(format!(
                "duplicate template for person {}",
                t.person_id
            )));
        }
    }
    Ok(())
}

fn mdc_distance_unchecked(
    test: &MultispectralFeatures,
    tpl: &MultispectralFeatures,
    factors: &[f64; NUM_FEATURES],
) -> f64 {
    let mut total = 0.0;
    for (a, b) in test.matrices().iter().zip(tpl.matrices()) {
        for (m, &factor) in factors.iter().enumerate() {
            if factor == 0.0 {
                continue;
            }
            let sq: f64 = a
                .row(m)
                .iter()
                .zip(b.row(m))
                .map(|(x, y)| (x - y) * (x - y))
                .sum();
            total += factor * sq;
        }
    }
    total / 4.0
}

/// Mean over the four spectra of `Σ_m Σ_n w_m α_m (F*_mn − F_mn)²`.
pub fn mdc_distance(
    test: &MultispectralFeatures,
    tpl: &PersonTemplate,
    wts: &ClassifierWeights,
) -> Result<f64> {
    test.check_shape(&tpl.features)?;
    Ok(mdc_distance_unchecked(
        test,
        &tpl.features,
        &wts.row_factors(),
    ))
}

/// Returns the candidate with the minimum weighted distance.
pub fn mdc_identify(
    test: &MultispectralFeatures,
    templates: &[PersonTemplate],
    wts: &ClassifierWeights,
) -> Result<IdentificationResult> {
    let start = Instant::now();
    check_templates(test, templates)?;
    let factors = wts.row_factors();
    let mut scores = BTreeMap::new();
    let mut best: Option<(f64, &PersonId)> = None;
    for t in templates {
        let d = mdc_distance_unchecked(test, &t.features, &factors);
        if better_min(d, &t.person_id, best) {
            best = Some((d, &t.person_id));
        }
        scores.insert(t.person_id.clone(), d);
    }
    let predicted_id = best.expect("nonempty templates").1.clone();
    Ok(IdentificationResult {
        classifier: ClassifierKind::Mdc,
        predicted_id,
        scores,
        elapsed: start.elapsed(),
    })
}

#[inline]
fn better_min(score: f64, id: &PersonId, best: Option<(f64, &PersonId)>) -> bool {
    match best {
        None => true,
        Some((b, bid)) => match score.total_cmp(&b) {
            Ordering::Less => true,
            Ordering::Equal => id < bid,
            Ordering::Greater => false,
        },
    }
}

/// Every (spectrum, feature row) pair votes `w_i` for the template whose row
/// is closest in Euclidean norm; the largest total wins.
pub fn wmv_identify(
    test: &MultispectralFeatures,
    templates: &[PersonTemplate],
    wts: &ClassifierWeights,
) -> Result<IdentificationResult> {
    let start = Instant::now();
    check_templates(test, templates)?;
    let mut totals = vec![0.0f64; templates.len()];
    for (s, tm) in test.matrices().iter().enumerate() {
        for m in 0..NUM_FEATURES {
            let row = tm.row(m);
            let mut best: Option<(f64, &PersonId)> = None;
            let mut winner = 0;
            for (k, t) in templates.iter().enumerate() {
                // Squared norm has the same argmin as the norm.
                let d: f64 = row
                    .iter()
                    .zip(t.features.matrices()[s].row(m))
                    .map(|(x, y)| (x - y) * (x - y))
                    .sum();
                if better_min(d, &t.person_id, best) {
                    best = Some((d, &t.person_id));
                    winner = k;
                }
            }
            totals[winner] += wts.w[m];
        }
    }

    let mut scores = BTreeMap::new();
    let mut best: Option<(f64, &PersonId)> = None;
    for (t, &score) in templates.iter().zip(&totals) {
        // Maximize score by minimizing its negation.
        if better_min(-score, &t.person_id, best) {
            best = Some((-score, &t.person_id));
        }
        scores.insert(t.person_id.clone(), score);
    }
    Ok(IdentificationResult {
        classifier: ClassifierKind::Wmv,
        predicted_id: best.expect("nonempty templates").1.clone(),
        scores,
        elapsed: start.elapsed(),
    })
}

pub fn identify(
    kind: ClassifierKind,
    test: &MultispectralFeatures,
    templates: &[PersonTemplate],
    wts: &ClassifierWeights,
) -> Result<IdentificationResult> {
    match kind {
        ClassifierKind::Mdc => mdc_identify(test, templates, wts),
        ClassifierKind::Wmv => wmv_identify(test, templates, wts),
    }
}

/// Training samples of one person.
#[derive(Debug, Clone)]
pub struct TrainingPerson<'a> {
    pub person_id: PersonId,
    pub samples: Vec<&'a MultispectralFeatures>,
}

/// One template per person, in input order.
pub fn build_templates(training: &[TrainingPerson<'_>]) -> Result<Vec<PersonTemplate>> {
    training
        .iter()
        .map(|p| PersonTemplate::from_samples(p.person_id.clone(), p.samples.iter().copied()))
        .collect()
}

/// `alpha_m = 1 / max(mean |F_mn|, ε)` over every training sample, spectrum
/// and block.
pub fn normalizing_factors(training: &[TrainingPerson<'_>]) -> Result<[f64; NUM_FEATURES]> {
    let mut sums = [0.0f64; NUM_FEATURES];
    let mut count = 0usize;
    for p in training {
        for s in &p.samples {
            for fm in s.matrices() {
                for (m, acc) in sums.iter_mut().enumerate() {
                    *acc += fm.row(m).iter().map(|v| v.abs()).sum::<f64>();
                }
                count += fm.cols();
            }
        }
    }
    if count == 0 {
        return Err(Error::InvalidParameter("empty training set".into()));
    }
    Ok(sums.map(|s| 1.0 / (s / count as f64).max(ALPHA_EPSILON)))
}

/// Learns `alpha` from the training data and `w` according to `mode`.
pub fn learn_weights(
    training: &[TrainingPerson<'_>],
    mode: WeightMode,
) -> Result<ClassifierWeights> {
    let alpha = normalizing_factors(training)?;
    let w = match mode {
        WeightMode::Uniform => [1.0; NUM_FEATURES],
        WeightMode::PerRowAccuracy => per_row_accuracy(training)?,
    };
    // A row-accuracy vector can be all zero only when every row misidentifies
    // every sample; fall back to uniform importance so the weights stay usable.
    let w = if w.iter().any(|&v| v > 0.0) {
        w
    } else {
        [1.0; NUM_FEATURES]
    };
    ClassifierWeights::new(w, alpha)
}

/// Leave-one-out identification accuracy of each feature row used on its
/// own with an unweighted minimum-distance classifier.
pub fn per_row_accuracy(training: &[TrainingPerson<'_>]) -> Result<[f64; NUM_FEATURES]> {
    if training.is_empty() {
        return Err(Error::InvalidParameter("empty training set".into()));
    }
    if let Some(p) = training.iter().find(|p| p.samples.len() < 2) {
        return Err(Error::InvalidParameter(format!(
            "row accuracy needs at least two training samples per person; {} has {}",
            p.person_id,
            p.samples.len()
        )));
    }

    let mut order: Vec<usize> = (0..training.len()).collect();
    order.sort_by(|&a, &b| training[a].person_id.cmp(&training[b].person_id));
    if order
        .windows(2)
        .any(|w| training[w[0]].person_id == training[w[1]].person_id)
    {
        return Err(Error::InvalidParameter(
            "duplicate person in training set".into(),
        ));
    }
    let first = training[0].samples[0];
    for p in training {
        for s in &p.samples {
            first.check_shape(s)?;
        }
    }

    // Per-person element-wise sums, so a leave-one-out mean is (sum - x) / (n - 1).
    let sums: Vec<[Vec<f64>; 4]> = order
        .iter()
        .map(|&pi| {
            let p = &training[pi];
            std::array::from_fn(|s| {
                let mut acc = vec![0.0; first.matrices()[s].values().len()];
                for x in &p.samples {
                    for (a, v) in acc.iter_mut().zip(x.matrices()[s].values()) {
                        *a += v;
                    }
                }
                acc
            })
        })
        .collect();
    let counts: Vec<usize> = order.iter().map(|&pi| training[pi].samples.len()).collect();
    let cols = first.cols();

    let held_out: Vec<(usize, &MultispectralFeatures)> = order
        .iter()
        .enumerate()
        .flat_map(|(rank, &pi)| training[pi].samples.iter().map(move |&s| (rank, s)))
        .collect();

    let correct = held_out
        .par_iter()
        .map(|&(own, sample)| {
            let mut best: [(f64, usize); NUM_FEATURES] =
                [(f64::INFINITY, usize::MAX); NUM_FEATURES];
            for (cand, cand_sums) in sums.iter().enumerate() {
                let (n, exclude) = if cand == own {
                    ((counts[cand] - 1) as f64, Some(sample))
                } else {
                    (counts[cand] as f64, None)
                };
                let mut dist = [0.0f64; NUM_FEATURES];
                for (s, acc) in cand_sums.iter().enumerate() {
                    let x = sample.matrices()[s].values();
                    let ex = exclude.map(|e| e.matrices()[s].values());
                    for (m, d) in dist.iter_mut().enumerate() {
                        let range = m * cols..(m + 1) * cols;
                        let mut sq = 0.0;
                        for idx in range {
                            let total = match ex {
                                Some(e) => acc[idx] - e[idx],
                                None => acc[idx],
                            };
                            let diff = x[idx] - total / n;
                            sq += diff * diff;
                        }
                        *d += sq;
                    }
                }
                // Candidates are visited in id order, so strict < keeps the lowest id on ties.
                for (b, &d) in best.iter_mut().zip(&dist) {
                    if d < b.0 {
                        *b = (d, cand);
                    }
                }
            }
            best.map(|(_, cand)| usize::from(cand == own))
        })
        .reduce(
            || [0usize; NUM_FEATURES],
            |a, b| std::array::from_fn(|m| a[m] + b[m]),
        );

    let total = held_out.len() as f64;
    Ok(correct.map(|c| c as f64 / total))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pipeline::FeatureMatrix;

    fn filled(cols: usize, v: f64) -> MultispectralFeatures {
        let fm = FeatureMatrix::from_row_major(cols, vec![v; NUM_FEATURES * cols]).unwrap();
        MultispectralFeatures::new([fm.clone(), fm.clone(), fm.clone(), fm]).unwrap()
    }

    fn tpl(id: &str, f: MultispectralFeatures) -> PersonTemplate {
        PersonTemplate {
            person_id: id.into(),
            features: f,
        }
    }

    #[test]
    fn self_distance_zero() {
        let f = filled(3, 0.7);
        let t = tpl("a", f.clone());
        assert_eq!(
            mdc_distance(&f, &t, &ClassifierWeights::ones()).unwrap(),
            0.0
        );
    }

    #[test]
    fn hand_evaluated_distance() {
        // Rows 0 and 1 carry the difference [[1,1],[2,0]]; every other row is equal.
        let mut a = FeatureMatrix::zeros(2);
        a.set(0, 0, 1.0);
        a.set(0, 1, 1.0);
        a.set(1, 0, 2.0);
        let b = FeatureMatrix::zeros(2);
        let test = MultispectralFeatures::new([a.clone(), a.clone(), a.clone(), a]).unwrap();
        let t = tpl(
            "x",
            MultispectralFeatures::new([b.clone(), b.clone(), b.clone(), b]).unwrap(),
        );
        let mut w = [1.0; NUM_FEATURES];
        let mut alpha = [1.0; NUM_FEATURES];
        w[0] = 2.0;
        alpha[0] = 0.5;
        let wts = ClassifierWeights::new(w, alpha).unwrap();
        assert_eq!(mdc_distance(&test, &t, &wts).unwrap(), 6.0);
    }

    #[test]
    fn dimension_mismatch_is_error() {
        let t = tpl("a", filled(3, 0.0));
        let r = mdc_distance(&filled(2, 0.0), &t, &ClassifierWeights::ones());
        assert!(matches!(r, Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn empty_templates_rejected() {
        let f = filled(2, 0.0);
        let w = ClassifierWeights::ones();
        assert!(mdc_identify(&f, &[], &w).is_err());
        assert!(wmv_identify(&f, &[], &w).is_err());
    }

    #[test]
    fn single_template_always_wins() {
        let t = [tpl("only", filled(2, 5.0))];
        let f = filled(2, -3.0);
        let mut w = [0.0; NUM_FEATURES];
        w[2] = 0.5;
        w[9] = 1.25;
        let wts = ClassifierWeights::new(w, [1.0; NUM_FEATURES]).unwrap();
        assert_eq!(
            mdc_identify(&f, &t, &wts).unwrap().predicted_id.as_str(),
            "only"
        );
        let r = wmv_identify(&f, &t, &wts).unwrap();
        assert_eq!(r.predicted_id.as_str(), "only");
        assert_eq!(r.scores[&PersonId::from("only")], 4.0 * 1.75);
    }

    #[test]
    fn ties_go_to_lowest_id() {
        let t = [tpl("b", filled(2, 1.0)), tpl("a", filled(2, 1.0))];
        let f = filled(2, 0.0);
        let w = ClassifierWeights::ones();
        assert_eq!(mdc_identify(&f, &t, &w).unwrap().predicted_id.as_str(), "a");
        let r = wmv_identify(&f, &t, &w).unwrap();
        assert_eq!(r.predicted_id.as_str(), "a");
        assert_eq!(r.scores[&PersonId::from("a")], 56.0);
        assert_eq!(r.scores[&PersonId::from("b")], 0.0);
    }

    #[test]
    fn duplicate_templates_rejected() {
        let t = [tpl("a", filled(2, 1.0)), tpl("a", filled(2, 2.0))];
        assert!(mdc_identify(&filled(2, 0.0), &t, &ClassifierWeights::ones()).is_err());
    }

    #[test]
    fn weights_validation() {
        assert!(ClassifierWeights::new([0.0; 14], [1.0; 14]).is_err());
        assert!(ClassifierWeights::new([1.0; 14], [0.0; 14]).is_err());
        assert!(ClassifierWeights::new([-1.0; 14], [1.0; 14]).is_err());
    }

    #[test]
    fn alpha_is_reciprocal_mean() {
        let a = filled(3, 4.0);
        let b = filled(3, -4.0);
        let training = [TrainingPerson {
            person_id: "p".into(),
            samples: vec![&a, &b],
        }];
        let wts = learn_weights(&training, WeightMode::Uniform).unwrap();
        assert_eq!(wts.alpha, [0.25; NUM_FEATURES]);
        assert_eq!(wts.w, [1.0; NUM_FEATURES]);

        let z = filled(3, 0.0);
        let zero = [TrainingPerson {
            person_id: "p".into(),
            samples: vec![&z],
        }];
        assert_eq!(normalizing_factors(&zero).unwrap(), [1e12; NUM_FEATURES]);
    }

    #[test]
    fn row_accuracy_needs_enough_samples() {
        let a = filled(2, 1.0);
        let one = [
            TrainingPerson {
                person_id: "p".into(),
                samples: vec![&a, &a],
            },
            TrainingPerson {
                person_id: "q".into(),
                samples: vec![&a],
            },
        ];
        assert!(learn_weights(&one, WeightMode::PerRowAccuracy).is_err());
        assert!(learn_weights(&[], WeightMode::PerRowAccuracy).is_err());
        // A lone person is always identified correctly.
        let w = learn_weights(&one[..1], WeightMode::PerRowAccuracy).unwrap();
        assert_eq!(w.w, [1.0; NUM_FEATURES]);
        assert!(learn_weights(&one, WeightMode::Uniform).is_ok());
    }

    #[test]
    fn ranked_orders_best_first() {
        let t = [
            tpl("a", filled(1, 3.0)),
            tpl("b", filled(1, 1.0)),
            tpl("c", filled(1, 2.0)),
        ];
        let r = mdc_identify(&filled(1, 0.0), &t, &ClassifierWeights::ones()).unwrap();
        let ids: Vec<_> = r.ranked().iter().map(|(id, _)| id.as_str()).collect();
        assert_eq!(ids, ["b", "c", "a"]);
    }
}
