//! Measures end-to-end accuracy of both classifiers on the default synthetic
//! dataset with circular-adjacent folds. Used to pin the synthetic acceptance
//! thresholds.
//!
//! ```text
//! cargo run --release -p palmtex-core --example calibrate_synth [persons] [train_count] [knob=value ...]
//! ```
//!
//! Knobs: `orientation`, `frequency`, `amplitude`, `brightness`, `noise`, `seed`.

use std::time::Instant;

use palmtex_core::dataset::{extract_features, synthesize, SplitScheme, SynthConfig};
use palmtex_core::eval::{evaluate, EvalPlan, Protocol};
use palmtex_core::{ClassifierKind, FeatureConfig, WeightMode};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let persons = args.next().map(|s| s.parse()).transpose()?.unwrap_or(50);
    let train_count = args.next().map(|s| s.parse()).transpose()?.unwrap_or(6);

    let mut cfg = SynthConfig {
        num_persons: persons,
        ..Default::default()
    };
    for kv in args {
        let (k, v) = kv.split_once('=').ok_or("knobs are key=value")?;
        match k {
            "orientation" => cfg.orientation_jitter = v.parse()?,
            "frequency" => cfg.frequency_jitter = v.parse()?,
            "amplitude" => cfg.amplitude_jitter = v.parse()?,
            "brightness" => cfg.brightness_jitter = v.parse()?,
            "noise" => cfg.noise_sigma = v.parse()?,
            "seed" => cfg.seed = v.parse()?,
            _ => return Err(format!("unknown knob `{k}`").into()),
        }
    }
    println!("{cfg:?}");
    let t = Instant::now();
    let raw = synthesize(&cfg)?;
    let data = extract_features(&raw, &FeatureConfig::default())?;
    println!(
        "synthesized + extracted {} persons in {:.2?}",
        persons,
        t.elapsed()
    );

    let plan = EvalPlan {
        train_counts: vec![train_count],
        classifiers: vec![ClassifierKind::Mdc, ClassifierKind::Wmv],
        weight_modes: vec![WeightMode::Uniform, WeightMode::PerRowAccuracy],
        protocol: Protocol::Uniform {
            scheme: SplitScheme::CircularAdjacent,
        },
    };
    let t = Instant::now();
    let report = evaluate(&data, &plan, FeatureConfig::default(), "synthetic")?;
    let training: Vec<_> = data
        .iter()
        .map(|p| palmtex_core::classify::TrainingPerson {
            person_id: p.person_id.clone(),
            samples: p.samples[..train_count].iter().collect(),
        })
        .collect();
    let rows = palmtex_core::classify::per_row_accuracy(&training)?;
    println!("per-row leave-one-out accuracy: {:.3?}", rows);
    println!("evaluated in {:.2?}", t.elapsed());
    for c in &report.cells {
        println!(
            "{:>3} {} {:<16} accuracy {:.4} ({} errors / {}) latency {:.2e}s",
            c.train_fraction,
            c.classifier,
            c.weight_mode.to_string(),
            c.mean_accuracy,
            c.misidentifications,
            c.total_tests,
            c.mean_latency_s
        );
    }
    Ok(())
}
