use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use palmtex_core::archive::{FeatureArchive, FeatureEntry, TemplateArchive};
use palmtex_core::classify::{build_templates, identify as classify, TrainingPerson};
use palmtex_core::dataset::{
    self, extract_features, read_gray, synthesize, DatasetManifest, LoadOptions, PersonFeatures,
    SplitScheme, SynthConfig,
};
use palmtex_core::eval::{evaluate as run_grid, EvalPlan, Protocol};
use palmtex_core::pipeline::extract_feature_matrix;
use palmtex_core::{learn_weights, ClassifierKind, FeatureConfig, MultispectralFeatures, Spectrum};
use rayon::prelude::*;

use crate::{DataArgs, EvaluateArgs, ExtractArgs, IdentifyArgs, SchemeArg, SynthArgs, TrainArgs};

/// Tags from the `<person>/<spectrum>/<index>.<ext>` layout, when present.
fn infer_tags(
    path: &Path,
) -> (
    Option<palmtex_core::PersonId>,
    Option<Spectrum>,
    Option<u32>,
) {
    let parent = path.parent();
    let spectrum = parent
        .and_then(|p| p.file_name())
        .and_then(|n| n.to_str())
        .and_then(|n| n.parse::<Spectrum>().ok());
    let person = spectrum
        .and(parent.and_then(|p| p.parent()))
        .and_then(|p| p.file_name())
        .and_then(|n| n.to_str())
        .map(palmtex_core::PersonId::from);
    let index = path
        .file_stem()
        .and_then(|s| s.to_str())
        .and_then(|s| s.parse().ok());
    (person, spectrum, index)
}

pub fn extract(args: ExtractArgs) -> Result<()> {
    let config = args.features.config();
    config.validate()?;
    let entries = args
        .images
        .par_iter()
        .map(|path| -> Result<FeatureEntry> {
            let img = read_gray(path)?;
            let matrix = extract_feature_matrix(&img, &config)
                .with_context(|| format!("{}", path.display()))?;
            let (person_id, spectrum, sample_index) = infer_tags(path);
            Ok(FeatureEntry {
                source: path.display().to_string(),
                person_id,
                spectrum,
                sample_index,
                matrix,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let n = entries.len();
    FeatureArchive { config, entries }
        .save(&args.out)
        .with_context(|| format!("writing {}", args.out.display()))?;
    eprintln!("wrote {n} feature matrices to {}", args.out.display());
    Ok(())
}

fn load_features(data: &DataArgs, config: &FeatureConfig) -> Result<(Vec<PersonFeatures>, String)> {
    let (raw, source) = match &data.source.dataset {
        Some(root) => {
            let manifest = DatasetManifest::discover(root)?;
            let opts = LoadOptions {
                expected_size: (data.image_size > 0).then_some((data.image_size, data.image_size)),
                ..LoadOptions::default()
            };
            (dataset::load(&manifest, &opts)?, root.display().to_string())
        }
        None => {
            let cfg = SynthConfig {
                num_persons: data.persons,
                image_size: if data.image_size == 0 {
                    128
                } else {
                    data.image_size
                },
                seed: data.synth_seed,
                ..SynthConfig::default()
            };
            let source = format!("synthetic(persons={}, seed={})", cfg.num_persons, cfg.seed);
            (synthesize(&cfg)?, source)
        }
    };
    eprintln!("extracting features from {} images", raw.num_images());
    Ok((extract_features(&raw, config)?, source))
}

pub fn train(args: TrainArgs) -> Result<()> {
    let config = args.features.config();
    config.validate()?;
    let (data, _) = load_features(&args.data, &config)?;
    let available = data.iter().map(|p| p.samples.len()).min().unwrap_or(0);
    let m = args.train_count.unwrap_or(available);
    if m == 0 || m > available {
        bail!("train count must be in 1..={available}, got {m}");
    }
    let training: Vec<TrainingPerson<'_>> = data
        .iter()
        .map(|p| TrainingPerson {
            person_id: p.person_id.clone(),
            samples: p.samples[..m].iter().collect(),
        })
        .collect();
    let weights = learn_weights(&training, args.weights)?;
    let templates = build_templates(&training)?;
    let n = templates.len();
    TemplateArchive {
        config,
        weights,
        templates,
    }
    .save(&args.out)
    .with_context(|| format!("writing {}", args.out.display()))?;
    eprintln!(
        "enrolled {n} persons from {m} samples each into {}",
        args.out.display()
    );
    Ok(())
}

fn with_extension(prefix: &Path, ext: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_owned();
    s.push(".");
    s.push(ext);
    PathBuf::from(s)
}

pub fn evaluate(args: EvaluateArgs) -> Result<()> {
    let config = args.features.config();
    config.validate()?;
    let protocol = match args.scheme {
        SchemeArg::Protocol => Protocol::PerClassifier {
            repeats: args.repeats,
            seed: args.seed,
        },
        SchemeArg::Adjacent => Protocol::Uniform {
            scheme: SplitScheme::CircularAdjacent,
        },
        SchemeArg::Random => Protocol::Uniform {
            scheme: SplitScheme::RandomRepeats {
                repeats: args.repeats,
                seed: args.seed,
            },
        },
    };
    let mut plan = EvalPlan::full_grid(protocol);
    if !args.train_count.is_empty() {
        plan.train_counts = args.train_count.clone();
    }
    if let Some(k) = args.classifier {
        plan.classifiers = vec![k];
    }
    if let Some(w) = args.weights {
        plan.weight_modes = vec![w];
    }

    let (data, source) = load_features(&args.data, &config)?;
    let report = run_grid(&data, &plan, config, source)?;
    let csv = report.to_csv()?;
    let json_path = with_extension(&args.out, "json");
    let csv_path = with_extension(&args.out, "csv");
    if let Some(parent) = args.out.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent)?;
    }
    fs::write(&json_path, report.to_json()?)
        .with_context(|| format!("writing {}", json_path.display()))?;
    fs::write(&csv_path, &csv).with_context(|| format!("writing {}", csv_path.display()))?;
    if let Some(p) = &args.plot_data {
        fs::write(p, report.plot_data_csv()).with_context(|| format!("writing {}", p.display()))?;
    }
    print!("{csv}");
    eprintln!("wrote {} and {}", json_path.display(), csv_path.display());
    Ok(())
}

pub fn identify(args: IdentifyArgs) -> Result<()> {
    let given = [&args.red, &args.green, &args.blue, &args.nir];
    let missing: Vec<&str> = Spectrum::ALL
        .iter()
        .zip(given)
        .filter(|(_, p)| p.is_none())
        .map(|(s, _)| s.name())
        .collect();
    if !missing.is_empty() {
        bail!("missing spectrum image(s): {}", missing.join(", "));
    }
    let archive = TemplateArchive::load(&args.templates)
        .with_context(|| format!("reading {}", args.templates.display()))?;
    let images = given
        .iter()
        .map(|p| read_gray(p.as_ref().expect("checked above")))
        .collect::<palmtex_core::Result<Vec<_>>>()?;
    let sample = MultispectralFeatures::extract(
        [&images[0], &images[1], &images[2], &images[3]],
        &archive.config,
    )?;
    let result = classify(
        args.classifier,
        &sample,
        &archive.templates,
        &archive.weights,
    )?;

    println!("predicted: {}", result.predicted_id);
    println!("classifier: {}", result.classifier);
    let label = match args.classifier {
        ClassifierKind::Mdc => "distance",
        ClassifierKind::Wmv => "votes",
    };
    println!("top candidates ({label}):");
    for (rank, (id, score)) in result.ranked().into_iter().take(args.top).enumerate() {
        println!("  {:>2}. {id}  {score:.6}", rank + 1);
    }
    println!("elapsed: {:.6} s", result.elapsed.as_secs_f64());
    Ok(())
}

pub fn synth(args: SynthArgs) -> Result<()> {
    let mut cfg = SynthConfig {
        num_persons: args.persons,
        samples_per_person: args.samples,
        image_size: args.image_size,
        seed: args.seed,
        ..SynthConfig::default()
    };
    if let Some(noise) = args.noise {
        cfg.noise_sigma = noise;
    }
    let raw = synthesize(&cfg)?;
    raw.write(&args.out, args.format)
        .with_context(|| format!("writing dataset to {}", args.out.display()))?;
    eprintln!(
        "wrote {} images to {}",
        raw.num_images(),
        args.out.display()
    );
    Ok(())
}
