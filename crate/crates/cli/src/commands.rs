use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use gaborface::dataset::Dataset;
use gaborface::face_locate::FaceBox;
use gaborface::features::{
    build_bank_with, feature_names, feature_vector, FeatureKind, FeatureSpec, JetMode, GEOMETRIC_NAMES, ORIENTATIONS,
    WAVELENGTHS,
};
use gaborface::imaging::io;
use gaborface::pipeline::{analyze, extract_dataset, face_features, image_augmenter, ExtractedDataset, PipelineConfig};
use gaborface::recognizer::{
    load_model, run_experiment_with, save_model, train_with_log, ExperimentPlan, ExperimentRow, LabeledVector,
};
use gaborface::toyset::write_toyset;
use gaborface::ImageGray;

use crate::config::RunConfig;
use crate::draw;
use crate::{Command, GlobalArgs};

/// Config file (or defaults) with the command-line overrides applied.
fn effective_config(args: &GlobalArgs) -> Result<RunConfig> {
    let mut cfg = match &args.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(seed) = args.seed {
        cfg.split.seed = seed;
        cfg.train.seed = seed;
        cfg.toyset.seed = seed;
    }
    if let Some(n) = args.orientations {
        cfg.features.orientations = n;
    }
    if let Some(kind) = args.features {
        cfg.features.kind = kind;
    }
    if let Some(ratio) = args.split {
        cfg.split.ratios = vec![ratio];
    }
    if let Some(c) = args.combinations {
        cfg.split.combinations = c;
    }
    Ok(cfg)
}

fn write(path: &Path, contents: impl AsRef<[u8]>) -> Result<()> {
    fs::write(path, contents).with_context(|| format!("writing {}", path.display()))
}

pub fn run(args: &GlobalArgs, command: Command) -> Result<()> {
    let mut cfg = effective_config(args)?;
    if let Command::GenToyset { persons, samples } = &command {
        cfg.toyset.persons = persons.unwrap_or(cfg.toyset.persons);
        cfg.toyset.samples = samples.unwrap_or(cfg.toyset.samples);
    }
    cfg.validate()?;
    let out = &args.out;
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    write(&out.join("effective_config.toml"), cfg.to_toml())?;
    match command {
        Command::Detect { image } => detect(&cfg, &image, out),
        Command::Landmarks { image } => landmarks(&cfg, &image, out),
        Command::Features { input } => features(&cfg, &input, out),
        Command::Train { input } => train(&cfg, &input, out),
        Command::Eval { dataset } => eval(&cfg, args, &dataset, out),
        Command::Annotate { image } => annotate(&cfg, &image, out),
        Command::GenToyset { .. } => gen_toyset(&cfg, out),
        Command::Kernels => kernels(&cfg, out),
        Command::Identify { model, image } => identify(&cfg, &model, &image, out),
    }
}

fn box_text(b: &FaceBox) -> String {
    format!(
        "left {}\ntop {}\nright {}\nbottom {}\nclipped {}\n",
        b.left, b.top, b.right, b.bottom, b.clipped
    )
}

fn detect(cfg: &RunConfig, image: &Path, out: &Path) -> Result<()> {
    let pipeline = cfg.pipeline()?;
    let img = io::read_rgb(image)?;
    let det = gaborface::face_locate::detect_face(&img, &pipeline.fis, &pipeline.detect)?;
    write(&out.join("box.txt"), box_text(&det.face_box))?;
    io::write_mask(&det.skin, out.join("skin_mask.png"))?;
    io::write_mask(&det.edge, out.join("edges.png"))?;
    io::write_rgb(&det.chip, out.join("chip.png"))?;
    println!("{}", box_text(&det.face_box).trim_end().replace('\n', ", "));
    Ok(())
}

fn landmarks(cfg: &RunConfig, image: &Path, out: &Path) -> Result<()> {
    let p = cfg.pipeline()?;
    let img = io::read_rgb(image)?;
    let a = analyze(&img, &p.fis, &p.detect, &p.fiducial)?;
    let text = a.landmarks.to_text();
    write(&out.join("landmarks.txt"), &text)?;
    io::write_rgb(
        &draw::annotate_chip(&a.detection.chip, &a.landmarks, 8),
        out.join("landmarks.png"),
    )?;
    print!("{text}");
    Ok(())
}

fn annotate(cfg: &RunConfig, image: &Path, out: &Path) -> Result<()> {
    let p = cfg.pipeline()?;
    let img = io::read_rgb(image)?;
    let a = analyze(&img, &p.fis, &p.detect, &p.fiducial)?;
    let drawn = draw::annotate_scene(&img, &a.detection.face_box, Some(&a.landmarks));
    io::write_rgb(&drawn, out.join("annotated.png"))?;
    Ok(())
}

/// A single image becomes a one-entry dataset labeled by its directory.
fn dataset_of(input: &Path) -> Result<Dataset> {
    if input.is_file() {
        let label = input
            .parent()
            .and_then(|d| d.file_name())
            .and_then(|n| n.to_str())
            .unwrap_or("unlabeled")
            .to_string();
        return Ok(Dataset {
            root: input.parent().map(Path::to_path_buf).unwrap_or_default(),
            entries: vec![gaborface::dataset::DatasetEntry {
                label,
                path: input.to_path_buf(),
            }],
        });
    }
    Ok(Dataset::scan(input)?)
}

fn extract(pipeline: &PipelineConfig, dataset: &Dataset, spec: &FeatureSpec, out: &Path) -> Result<ExtractedDataset> {
    log::info!("extracting features from {} images", dataset.len());
    let ex = extract_dataset(dataset, pipeline, spec)?;
    write(&out.join("skipped.txt"), ex.skip_report())?;
    if !ex.skipped.is_empty() {
        log::warn!(
            "{} of {} images skipped, see skipped.txt",
            ex.skipped.len(),
            dataset.len()
        );
    }
    Ok(ex)
}

fn features(cfg: &RunConfig, input: &Path, out: &Path) -> Result<()> {
    let pipeline = cfg.pipeline()?;
    let dataset = dataset_of(input)?;
    let spec = cfg.features;
    let ex = extract(&pipeline, &dataset, &spec, out)?;
    let path = out.join("features.csv");
    let mut w = csv::Writer::from_path(&path).with_context(|| format!("writing {}", path.display()))?;
    let names = feature_names(spec.kind, ex.table.bank());
    w.write_record(["label", "path"].into_iter().map(String::from).chain(names))?;
    for ((label, file), v) in ex.table.labels.iter().zip(&ex.paths).zip(ex.table.vectors(&spec)?) {
        let mut record = vec![label.clone(), file.display().to_string()];
        record.extend(v.iter().map(|x| x.to_string()));
        w.write_record(&record)?;
    }
    w.flush()?;
    println!("{} rows, {} skipped", ex.table.len(), ex.skipped.len());
    if ex.table.is_empty() {
        bail!("no image produced features");
    }
    Ok(())
}

/// Labeled vectors from a feature CSV, plus the feature spec its header
/// implies. The wavelength scale is not recorded in the CSV and comes from
/// `base`.
fn read_feature_csv(path: &Path, base: FeatureSpec) -> Result<(Vec<LabeledVector>, FeatureSpec)> {
    let mut r = csv::Reader::from_path(path).with_context(|| format!("reading {}", path.display()))?;
    let header: Vec<String> = r.headers()?.iter().map(String::from).collect();
    if header.len() < 3 || header[0] != "label" || header[1] != "path" {
        bail!("{}: header must start with `label,path`", path.display());
    }
    let names = &header[2..];
    let has_geom = names.len() >= GEOMETRIC_NAMES.len() && names.iter().zip(GEOMETRIC_NAMES).all(|(a, b)| a == b);
    let jet_cols = names.len() - if has_geom { GEOMETRIC_NAMES.len() } else { 0 };
    let kind = match (has_geom, jet_cols) {
        (true, 0) => FeatureKind::Geometric,
        (true, _) => FeatureKind::Fused,
        (false, _) => FeatureKind::Gabor,
    };
    let jet_mode = if names.last().is_some_and(|n| n.ends_with("_im")) {
        JetMode::Quadrature
    } else {
        JetMode::Magnitude
    };
    let per_channel = match jet_mode {
        JetMode::Magnitude => 1,
        JetMode::Quadrature => 2,
    };
    let mut spec = FeatureSpec { kind, jet_mode, ..base };
    if kind.uses_jets() {
        let channels = jet_cols / (10 * per_channel);
        if channels * 10 * per_channel != jet_cols || !channels.is_multiple_of(WAVELENGTHS.len()) {
            bail!("{}: {jet_cols} jet columns do not form a Gabor bank", path.display());
        }
        spec.orientations = channels / WAVELENGTHS.len();
    }
    spec.validate()?;
    let mut rows = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec?;
        let values = rec
            .iter()
            .skip(2)
            .map(|v| v.parse::<f64>())
            .collect::<Result<Vec<_>, _>>()
            .with_context(|| format!("{}: row {} has a non-numeric value", path.display(), i + 1))?;
        if values.len() != names.len() {
            bail!(
                "{}: row {} has {} values, expected {}",
                path.display(),
                i + 1,
                values.len(),
                names.len()
            );
        }
        rows.push(LabeledVector::new(&rec[0], values));
    }
    Ok((rows, spec))
}

fn train(cfg: &RunConfig, input: &Path, out: &Path) -> Result<()> {
    let (samples, spec) = if input.is_file() {
        read_feature_csv(input, cfg.features)?
    } else {
        let pipeline = cfg.pipeline()?;
        let dataset = Dataset::scan(input)?;
        let ex = extract(&pipeline, &dataset, &cfg.features, out)?;
        let vectors = ex.table.vectors(&cfg.features)?;
        let samples = ex
            .table
            .labels
            .iter()
            .zip(vectors)
            .map(|(l, v)| LabeledVector::new(l, v))
            .collect();
        (samples, cfg.features)
    };
    log::info!("training on {} vectors of kind {}", samples.len(), spec.kind);
    let (model, log) = train_with_log(&samples, spec, &cfg.train)?;
    save_model(&model, out.join("model.txt"))?;
    write(&out.join("training_log.csv"), log.to_csv(model.labels()))?;
    println!("trained {} networks on {} vectors", model.labels().len(), samples.len());
    Ok(())
}

fn eval_rows(cfg: &RunConfig, args: &GlobalArgs) -> Vec<ExperimentRow> {
    let kinds = match args.features {
        Some(k) => vec![k],
        None => FeatureKind::ALL.to_vec(),
    };
    let counts: Vec<usize> = match args.orientations {
        Some(n) => vec![n],
        None => (1..=5).collect(),
    };
    let mut rows = Vec::new();
    for kind in kinds {
        let counts = if kind.uses_jets() {
            counts.clone()
        } else {
            vec![counts[0]]
        };
        for n in counts {
            let mut row = ExperimentRow::new(kind, n);
            row.spec.jet_mode = cfg.features.jet_mode;
            row.spec.wavelength_scale = cfg.features.wavelength_scale;
            rows.push(row);
        }
    }
    rows
}

fn eval(cfg: &RunConfig, args: &GlobalArgs, dataset: &Path, out: &Path) -> Result<()> {
    let pipeline = cfg.pipeline()?;
    let dataset = Dataset::scan(dataset)?;
    let rows = eval_rows(cfg, args);
    let widest = rows
        .iter()
        .any(|r| r.spec.kind.uses_jets() && r.spec.orientations == ORIENTATIONS);
    let superset = FeatureSpec {
        kind: FeatureKind::Fused,
        orientations: if widest { ORIENTATIONS } else { 5 },
        ..cfg.features
    };
    let ex = extract(&pipeline, &dataset, &superset, out)?;
    let plan = ExperimentPlan {
        rows,
        ratios: cfg.split.ratios.clone(),
        combinations: cfg.split.combinations,
        seed: cfg.split.seed,
    };
    let augmenter = cfg
        .augment
        .enabled
        .then(|| image_augmenter(&ex, &pipeline, cfg.augment));
    log::info!(
        "evaluating {} rows x {} ratios x {} combinations",
        plan.rows.len(),
        plan.ratios.len(),
        plan.combinations
    );
    let results = run_experiment_with(&ex.table, &plan, &cfg.train, augmenter.as_deref())?;
    let csv = results.to_csv();
    write(&out.join("results.csv"), &csv)?;
    let failures: String = results.failures.iter().map(|f| format!("{f}\n")).collect();
    write(&out.join("failures.txt"), failures)?;
    print!("{csv}");
    Ok(())
}

fn gen_toyset(cfg: &RunConfig, out: &Path) -> Result<()> {
    let files = write_toyset(&cfg.toyset, out)?;
    println!("wrote {} images to {}", files.len(), out.display());
    Ok(())
}

fn kernels(cfg: &RunConfig, out: &Path) -> Result<()> {
    let all: Vec<usize> = (0..ORIENTATIONS).collect();
    let bank = build_bank_with(&all, cfg.features.wavelength_scale)?;
    let dir = out.join("kernels");
    fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
    for ch in bank.channels() {
        let img: ImageGray = ch.even.to_image();
        io::write_gray_normalized(&img, dir.join(format!("o{}_l{}.png", ch.orientation, ch.wavelength)))?;
    }
    println!("wrote {} kernels to {}", bank.len(), dir.display());
    Ok(())
}

fn identify(cfg: &RunConfig, model: &Path, image: &Path, out: &Path) -> Result<()> {
    let model = load_model(model)?;
    let p = cfg.pipeline()?;
    let img = io::read_rgb(image)?;
    let a = analyze(&img, &p.fis, &p.detect, &p.fiducial)?;
    let spec = *model.features();
    let f = face_features(&a, &spec.bank()?)?;
    let v = feature_vector(spec.kind, &f.geometric, &f.jets);
    let pred = model.predict(&v)?;
    let mut text = format!("identity {}\n", pred.label);
    for (label, s) in model.labels().iter().zip(&pred.scores) {
        text.push_str(&format!("score {label} {s}\n"));
    }
    write(&out.join("identity.txt"), &text)?;
    println!("{}", pred.label);
    Ok(())
}
