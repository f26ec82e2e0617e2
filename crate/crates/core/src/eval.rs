//! Evaluation harness: runs a grid of (train count × classifier × weight
//! mode) over split protocols and collects a report.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classify::{
    build_templates, identify, learn_weights, ClassifierKind, ClassifierWeights, TrainingPerson,
    WeightMode,
};
use crate::dataset::{splits, Fold, PersonFeatures, SplitScheme, SplitSpec};
use crate::error::{Error, Result};
use crate::pipeline::FeatureConfig;

pub const REPORT_FORMAT: &str = "palmtex-report";
pub const REPORT_VERSION: u32 = 1;

/// How training sets are drawn for each classifier.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Protocol {
    /// MDC on circular-adjacent folds, WMV averaged over seeded random
    /// repeats.
    PerClassifier { repeats: usize, seed: u64 },
    /// The same scheme for every classifier.
    Uniform { scheme: SplitScheme },
}

impl Default for Protocol {
    fn default() -> Self {
        Protocol::PerClassifier {
            repeats: 10,
            seed: 0,
        }
    }
}

impl Protocol {
    pub fn scheme_for(&self, kind: ClassifierKind) -> SplitScheme {
        match *self {
            Protocol::PerClassifier { repeats, seed } => match kind {
                ClassifierKind::Mdc => SplitScheme::CircularAdjacent,
                ClassifierKind::Wmv => SplitScheme::RandomRepeats { repeats, seed },
            },
            Protocol::Uniform { scheme } => scheme,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EvalPlan {
    pub train_counts: Vec<usize>,
    pub classifiers: Vec<ClassifierKind>,
    pub weight_modes: Vec<WeightMode>,
    pub protocol: Protocol,
}

impl EvalPlan {
    /// The full 4/12 … 10/12 grid with both classifiers and both weight modes.
    pub fn full_grid(protocol: Protocol) -> Self {
        Self {
            train_counts: (4..=10).collect(),
            classifiers: vec![ClassifierKind::Mdc, ClassifierKind::Wmv],
            weight_modes: vec![WeightMode::Uniform, WeightMode::PerRowAccuracy],
            protocol,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldReport {
    pub fold: usize,
    pub train: Vec<usize>,
    pub correct: usize,
    pub total: usize,
    pub accuracy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellReport {
    pub train_count: usize,
    pub train_fraction: String,
    pub classifier: ClassifierKind,
    pub weight_mode: WeightMode,
    pub scheme: SplitScheme,
    pub folds: Vec<FoldReport>,
    /// Mean of the per-fold accuracies.
    pub mean_accuracy: f64,
    pub misidentifications: usize,
    pub total_tests: usize,
    /// Mean wall-clock seconds per identification.
    pub mean_latency_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetInfo {
    pub source: String,
    pub persons: usize,
    pub samples_per_person: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub format: String,
    pub format_version: u32,
    pub tool_version: String,
    pub dataset: DatasetInfo,
    pub feature_config: FeatureConfig,
    pub plan: EvalPlan,
    pub cells: Vec<CellReport>,
}

struct FoldOutcome {
    correct: usize,
    total: usize,
    latency_sum: f64,
}

fn run_fold(
    data: &[PersonFeatures],
    fold: &Fold,
    modes: &[WeightMode],
    kinds: &[ClassifierKind],
) -> Result<BTreeMap<(ClassifierKind, WeightMode), FoldOutcome>> {
    let training: Vec<TrainingPerson<'_>> = data
        .iter()
        .map(|p| TrainingPerson {
            person_id: p.person_id.clone(),
            samples: fold.train.iter().map(|&i| &p.samples[i]).collect(),
        })
        .collect();
    let templates = build_templates(&training)?;
    let tests: Vec<_> = data
        .iter()
        .flat_map(|p| {
            fold.test
                .iter()
                .map(move |&i| (&p.person_id, &p.samples[i]))
        })
        .collect();

    let mut out = BTreeMap::new();
    for &mode in modes {
        let weights: ClassifierWeights = learn_weights(&training, mode)?;
        for &kind in kinds {
            let results = tests
                .par_iter()
                .map(|(truth, sample)| {
                    identify(kind, sample, &templates, &weights)
                        .map(|r| (r.predicted_id == **truth, r.elapsed.as_secs_f64()))
                })
                .collect::<Result<Vec<_>>>()?;
            out.insert(
                (kind, mode),
                FoldOutcome {
                    correct: results.iter().filter(|r| r.0).count(),
                    total: results.len(),
                    latency_sum: results.iter().map(|r| r.1).sum(),
                },
            );
        }
    }
    Ok(out)
}

/// Runs every cell of `plan` over the extracted dataset.
pub fn evaluate(
    data: &[PersonFeatures],
    plan: &EvalPlan,
    feature_config: FeatureConfig,
    source: impl Into<String>,
) -> Result<EvaluationReport> {
    if data.is_empty() {
        return Err(Error::InvalidParameter("dataset has no persons".into()));
    }
    let n = data[0].samples.len();
    if let Some(p) = data.iter().find(|p| p.samples.len() != n) {
        return Err(Error::InvalidParameter(format!(
            "person {} has {} samples, expected {n}",
            p.person_id,
            p.samples.len()
        )));
    }
    if plan.train_counts.is_empty() || plan.classifiers.is_empty() || plan.weight_modes.is_empty() {
        return Err(Error::InvalidParameter("evaluation grid is empty".into()));
    }
    for &m in &plan.train_counts {
        if m == 0 || m >= n {
            return Err(Error::InvalidParameter(format!(
                "train count {m} leaves no test samples out of {n}"
            )));
        }
    }

    let mut cells = Vec::new();
    for &m in &plan.train_counts {
        // Group classifiers sharing a split scheme so folds and weights are
        // computed once per scheme.
        let mut by_scheme: Vec<(SplitScheme, Vec<ClassifierKind>)> = Vec::new();
        for &kind in &plan.classifiers {
            let scheme = plan.protocol.scheme_for(kind);
            match by_scheme.iter_mut().find(|(s, _)| *s == scheme) {
                Some((_, kinds)) => kinds.push(kind),
                None => by_scheme.push((scheme, vec![kind])),
            }
        }

        let mut partial: BTreeMap<(ClassifierKind, WeightMode), CellReport> = BTreeMap::new();
        for (scheme, kinds) in &by_scheme {
            let folds = splits(
                n,
                &SplitSpec {
                    train_count: m,
                    scheme: *scheme,
                },
            )?;
            let mut latency: BTreeMap<(ClassifierKind, WeightMode), f64> = BTreeMap::new();
            for (fi, fold) in folds.iter().enumerate() {
                for (key, o) in run_fold(data, fold, &plan.weight_modes, kinds)? {
                    *latency.entry(key).or_default() += o.latency_sum;
                    let cell = partial.entry(key).or_insert_with(|| CellReport {
                        train_count: m,
                        train_fraction: format!("{m}/{n}"),
                        classifier: key.0,
                        weight_mode: key.1,
                        scheme: *scheme,
                        folds: Vec::new(),
                        mean_accuracy: 0.0,
                        misidentifications: 0,
                        total_tests: 0,
                        mean_latency_s: 0.0,
                    });
                    cell.folds.push(FoldReport {
                        fold: fi,
                        train: fold.train.clone(),
                        correct: o.correct,
                        total: o.total,
                        accuracy: o.correct as f64 / o.total as f64,
                    });
                    cell.misidentifications += o.total - o.correct;
                    cell.total_tests += o.total;
                }
            }
            for (key, sum) in latency {
                let cell = partial.get_mut(&key).expect("cell exists");
                cell.mean_latency_s = sum / cell.total_tests as f64;
                cell.mean_accuracy =
                    cell.folds.iter().map(|f| f.accuracy).sum::<f64>() / cell.folds.len() as f64;
            }
        }
        for &kind in &plan.classifiers {
            for &mode in &plan.weight_modes {
                cells.push(partial.remove(&(kind, mode)).expect("every cell evaluated"));
            }
        }
    }

    Ok(EvaluationReport {
        format: REPORT_FORMAT.into(),
        format_version: REPORT_VERSION,
        tool_version: crate::VERSION.into(),
        dataset: DatasetInfo {
            source: source.into(),
            persons: data.len(),
            samples_per_person: n,
        },
        feature_config,
        plan: plan.clone(),
        cells,
    })
}

fn column_name(kind: ClassifierKind, mode: WeightMode) -> String {
    let w = match mode {
        WeightMode::Uniform => "unweighted",
        WeightMode::PerRowAccuracy => "weighted",
    };
    format!("{kind}_{w}")
}

impl EvaluationReport {
    pub fn cell(
        &self,
        train_count: usize,
        kind: ClassifierKind,
        mode: WeightMode,
    ) -> Option<&CellReport> {
        self.cells
            .iter()
            .find(|c| c.train_count == train_count && c.classifier == kind && c.weight_mode == mode)
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Serialize(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Serialize(e.to_string()))
    }

    /// Accuracy grid: one row per train fraction, one column per
    /// (classifier, weight mode) pair in plan order. Values are percentages.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header = vec!["train_fraction".to_string()];
        for &k in &self.plan.classifiers {
            for &m in &self.plan.weight_modes {
                header.push(column_name(k, m));
            }
        }
        w.write_record(&header)
            .map_err(|e| Error::Serialize(e.to_string()))?;
        for &t in &self.plan.train_counts {
            let mut row = vec![format!("{t}/{}", self.dataset.samples_per_person)];
            for &k in &self.plan.classifiers {
                for &m in &self.plan.weight_modes {
                    let cell = self.cell(t, k, m).ok_or_else(|| {
                        Error::Serialize(format!("report is missing cell {t}/{k}/{m}"))
                    })?;
                    row.push(format!("{:.2}", 100.0 * cell.mean_accuracy));
                }
            }
            w.write_record(&row)
                .map_err(|e| Error::Serialize(e.to_string()))?;
        }
        let bytes = w
            .into_inner()
            .map_err(|e| Error::Serialize(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| Error::Serialize(e.to_string()))
    }

    /// Long-form `series,train_fraction,accuracy_percent` rows for plotting
    /// accuracy against training fraction.
    pub fn plot_data_csv(&self) -> String {
        let mut out = String::from("series,train_count,train_fraction,accuracy_percent\n");
        for c in &self.cells {
            let _ = writeln!(
                out,
                "{},{},{},{:.4}",
                column_name(c.classifier, c.weight_mode),
                c.train_count,
                c.train_count as f64 / self.dataset.samples_per_person as f64,
                100.0 * c.mean_accuracy
            );
        }
        out
    }
}
