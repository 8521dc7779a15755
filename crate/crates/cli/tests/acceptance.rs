//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each and
//! exits nonzero if any failed.

use std::f64::consts::{FRAC_PI_2, PI};
use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use gaborface::features::{
    build_bank, gabor_kernel, geometric_vector, jets, GaborParams, ORIENTATIONS, ORIENTATION_COUNTS, WAVELENGTHS,
};
use gaborface::fiducial::{landmarks, FiducialConfig, LandmarkSet, Role};
use gaborface::imaging::{
    canny_stages, connected_components, dilate_disk, gaussian_blur, resize_bilinear, CannyParams, YCbCrChannel,
};
use gaborface::recognizer::{gradient_check, Loss, MlpNet, SplitRatio};
use gaborface::skin::{crisp_skin, fis_evaluate, FisConfig, Label};
use gaborface::toyset::ChipSpec;
use gaborface::{BinaryMask, ImageGray};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
/// `(features, channels, cells)` of one results row.
type ResultLine = (String, String, Vec<Option<f64>>);
type Criterion<'a> = (&'static str, Box<dyn Fn() -> Outcome + 'a>);

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        let ok: bool = $cond;
        if !ok {
            return Err(format!($($msg)+));
        }
    };
}

fn within(elapsed: Duration, limit: Duration) -> Outcome {
    ensure!(elapsed < limit, "took {:.2?}, limit {:.0?}", elapsed, limit);
    Ok(format!("{elapsed:.2?}"))
}

fn gabor_identities() -> Outcome {
    let start = Instant::now();
    let mut worst = 0.0f64;
    for &lambda in &WAVELENGTHS {
        for k in 0..ORIENTATIONS {
            let theta = k as f64 * PI / 8.0;
            let even = GaborParams::with_tied_sigma(theta, lambda, 0.0);
            let odd = GaborParams::with_tied_sigma(theta, lambda, FRAC_PI_2);
            ensure!(
                (even.value(0.0, 0.0) - 1.0).abs() < 1e-12,
                "even origin {}",
                even.value(0.0, 0.0)
            );
            ensure!(odd.value(0.0, 0.0).abs() < 1e-12, "odd origin {}", odd.value(0.0, 0.0));
            let ke = gabor_kernel(&even, 16).map_err(|e| e.to_string())?;
            let ko = gabor_kernel(&odd, 16).map_err(|e| e.to_string())?;
            for dy in -16..=16isize {
                for dx in -16..=16isize {
                    worst = worst.max((ke.at(dx, dy) - ke.at(-dx, -dy)).abs());
                    worst = worst.max((ko.at(dx, dy) + ko.at(-dx, -dy)).abs());
                }
            }
        }
        let half = GaborParams::with_tied_sigma(0.0, lambda, 0.0).value(lambda / 2.0, 0.0);
        ensure!(
            (half + (-0.125f64).exp()).abs() < 1e-9,
            "lambda {lambda}: value at lambda/2 is {half}"
        );
    }
    ensure!(worst < 1e-12, "symmetry error {worst:e}");
    within(start.elapsed(), Duration::from_secs(1)).map(|t| format!("40 kernels, symmetry error {worst:e}, {t}"))
}

fn bank_cardinalities() -> Outcome {
    let chip = ChipSpec::default();
    let lms = chip.expected_landmarks().unwrap();
    let gray = chip.render().channel(YCbCrChannel::Y);
    let mut sizes = Vec::new();
    for n in ORIENTATION_COUNTS {
        let bank = build_bank(n).map_err(|e| e.to_string())?;
        let expected = if n == 8 { 40 } else { 5 * n };
        ensure!(bank.len() == expected, "{n} orientations gave {} channels", bank.len());
        let j = jets(&gray, &lms, &bank).map_err(|e| e.to_string())?;
        ensure!(
            j.len() == 10 * bank.len(),
            "jets length {} for C = {}",
            j.len(),
            bank.len()
        );
        sizes.push(bank.len());
    }
    Ok(format!("channels {sizes:?}, jets 10 x C"))
}

fn fuzzy_system() -> Outcome {
    let start = Instant::now();
    let cfg = FisConfig::default();
    let mut grid = vec![0.0; 256 * 256];
    for cb in 0..256 {
        for cr in 0..256 {
            let v = fis_evaluate(cb as f64, cr as f64, &cfg).map_err(|e| e.to_string())?;
            ensure!((0.0..=1.0).contains(&v), "({cb}, {cr}) -> {v}");
            grid[cb * 256 + cr] = v;
        }
    }
    let mut checked = 0;
    for rule in &cfg.rules {
        let (tb, tr) = (cfg.cb.get(rule.cb), cfg.cr.get(rule.cr));
        let expected = f64::from(rule.output);
        for cb in (tb.b.ceil() as usize)..=(tb.c.floor() as usize) {
            for cr in (tr.b.ceil() as usize)..=(tr.c.floor() as usize) {
                let v = grid[cb * 256 + cr];
                ensure!(
                    v == expected,
                    "rule ({:?}, {:?}) core ({cb}, {cr}) -> {v}",
                    rule.cb,
                    rule.cr
                );
                checked += 1;
            }
        }
    }
    let skin_rules = cfg.rules.iter().filter(|r| r.output == 1).count();
    ensure!(
        skin_rules == 3 && cfg.rules.len() == 9,
        "expected 3 of 9 skin rules, found {skin_rules} of {}",
        cfg.rules.len()
    );
    ensure!(
        cfg.rules
            .iter()
            .filter(|r| r.output == 1)
            .all(|r| r.cb != Label::Light && r.cr != Label::Light),
        "a skin rule uses a light label"
    );
    for (cb, cr) in [(77.0, 133.0), (77.0, 173.0), (127.0, 133.0), (127.0, 173.0)] {
        ensure!(crisp_skin(cb, cr), "crisp corner ({cb}, {cr}) rejected");
    }
    for (cb, cr) in [(76.0, 133.0), (128.0, 173.0), (77.0, 132.0), (127.0, 174.0)] {
        ensure!(!crisp_skin(cb, cr), "crisp outside ({cb}, {cr}) accepted");
    }
    within(start.elapsed(), Duration::from_secs(5)).map(|t| format!("65536 grid points, {checked} plateau points, {t}"))
}

fn imaging_oracles() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let masks: Vec<BinaryMask> = (0..1000)
        .map(|_| {
            let density = rng.random_range(0.05..0.95);
            BinaryMask::from_fn(32, 32, |_, _| rng.random_bool(density))
        })
        .collect();
    for (i, m) in masks.iter().enumerate() {
        let total: usize = connected_components(m).iter().map(|c| c.area).sum();
        ensure!(
            total == m.count(),
            "mask {i}: areas sum to {total}, population {}",
            m.count()
        );
        let other = &masks[(i + 1) % masks.len()];
        let union = BinaryMask::from_fn(32, 32, |x, y| m.get(x, y) || other.get(x, y));
        let r = i % 4;
        let d = dilate_disk(m, r);
        ensure!(m.is_subset_of(&d), "mask {i}: dilation not extensive");
        ensure!(
            d.is_subset_of(&dilate_disk(&union, r)),
            "mask {i}: dilation not monotone"
        );
    }
    for i in 0..100 {
        let noise = ImageGray::from_fn(32, 32, |_, _| rng.random_range(0.0..255.0));
        let img = gaussian_blur(&noise, 2.0).map_err(|e| e.to_string())?;
        let s = canny_stages(&img, &CannyParams::default()).map_err(|e| e.to_string())?;
        ensure!(
            s.strong.is_subset_of(&s.edges) && s.edges.is_subset_of(&s.candidates),
            "image {i}: hysteresis subset violated"
        );
    }
    let src = ImageGray::new(2, 1, vec![0.0, 255.0]).unwrap();
    let out = resize_bilinear(&src, 3, 1).map_err(|e| e.to_string())?;
    ensure!(
        out.data() == [0.0, 127.5, 255.0],
        "bilinear 2x1 -> 3x1 gave {:?}",
        out.data()
    );
    Ok("1000 masks, 100 Canny images, bilinear exact".into())
}

fn gradient_checks() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let mut worst = 0.0f64;
    for _ in 0..50 {
        let n = rng.random_range(1..=6);
        let h = rng.random_range(1..=4);
        let net = MlpNet::random(n, h, 0.5, &mut rng).map_err(|e| e.to_string())?;
        let x: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..1.0)).collect();
        let t = if rng.random_bool(0.5) { 1.0 } else { 0.0 };
        for loss in [Loss::Mse, Loss::CrossEntropy] {
            worst = worst.max(gradient_check(&net, &x, t, loss, 1e-5));
        }
    }
    ensure!(worst < 1e-4, "max relative error {worst:e}");
    within(start.elapsed(), Duration::from_secs(5))
        .map(|t| format!("50 instances, max relative error {worst:.1e}, {t}"))
}

fn mirror_equivariance() -> Outcome {
    let cfg = FiducialConfig::default();
    let mut worst = 0.0f64;
    for seed in 0..100u64 {
        let chip = ChipSpec::random(&mut ChaCha8Rng::seed_from_u64(seed)).render();
        let a = landmarks(&chip, &cfg).map_err(|e| format!("chip {seed}: {e}"))?;
        let b = landmarks(&chip.flip_horizontal(), &cfg).map_err(|e| format!("mirrored chip {seed}: {e}"))?;
        let expected = a.mirrored(chip.width());
        for role in Role::ALL {
            worst = worst.max(b.get(role).distance(expected.get(role)));
        }
    }
    ensure!(worst <= 1.0, "max deviation {worst} px");
    Ok(format!("100 chips, max deviation {worst:.3} px"))
}

fn geometric_vector_checks() -> Outcome {
    let hand = LandmarkSet::from_positions([
        (10.0, 17.0),
        (16.0, 17.0),
        (30.0, 17.0),
        (36.0, 17.0),
        (13.0, 17.0),
        (33.0, 17.0),
        (17.0, 40.0),
        (33.0, 40.0),
        (20.0, 29.0),
        (26.0, 29.0),
    ]);
    let g = geometric_vector(&hand);
    ensure!(g.eye() == 6.0 && g.center_eye() == 20.0, "hand example gave {:?}", g.0);
    ensure!(
        g.0 == [20.0, 6.0, 14.0, 6.0, 12.0, 16.0, 11.0],
        "hand example gave {:?}",
        g.0
    );
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let set = LandmarkSet::from_positions(std::array::from_fn(|_| {
            (rng.random_range(0.0..50.0), rng.random_range(0.0..50.0))
        }));
        let (tx, ty, s) = (
            rng.random_range(-50.0..50.0),
            rng.random_range(-50.0..50.0),
            rng.random_range(0.2..5.0),
        );
        let base = geometric_vector(&set);
        let moved = geometric_vector(&set.map(|x, y| (x + tx, y + ty)));
        let scaled = geometric_vector(&set.map(|x, y| (s * x, s * y)));
        for i in 0..7 {
            let b = base.0[i];
            if b > 1e-6 {
                worst = worst.max((moved.0[i] - b).abs() / b);
                worst = worst.max((scaled.0[i] - s * b).abs() / (s * b));
            }
        }
    }
    ensure!(worst < 1e-9, "relative error {worst:e}");
    Ok(format!("hand example exact, 100 sets, max relative error {worst:.1e}"))
}

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_gaborface"))
}

fn run(cmd: &mut Command) -> Result<String, String> {
    let out = cmd.output().map_err(|e| e.to_string())?;
    ensure!(
        out.status.success(),
        "{:?} exited with {}: {}",
        cmd,
        out.status,
        String::from_utf8_lossy(&out.stderr)
    );
    Ok(String::from_utf8_lossy(&out.stdout).into_owned())
}

fn parse_results(csv: &str) -> Result<Vec<ResultLine>, String> {
    let mut lines = csv.lines();
    ensure!(
        lines.next() == Some("features,channels,60-40,50-50,30-70"),
        "unexpected header in {csv}"
    );
    lines
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            ensure!(f.len() == 5, "malformed row `{l}`");
            Ok((
                f[0].to_string(),
                f[1].to_string(),
                f[2..].iter().map(|v| v.parse().ok()).collect(),
            ))
        })
        .collect()
}

fn end_to_end(work: &Path) -> Outcome {
    let toy = work.join("toy");
    run(bin()
        .args(["gen-toyset", "--persons", "5", "--samples", "20", "--out"])
        .arg(&toy))?;
    let start = Instant::now();
    let eval = |out: &Path| run(bin().arg("eval").arg(&toy).arg("--out").arg(out));
    eval(&work.join("eval1"))?;
    let elapsed = start.elapsed();
    eval(&work.join("eval2"))?;
    let first = fs::read(work.join("eval1/results.csv")).map_err(|e| e.to_string())?;
    let second = fs::read(work.join("eval2/results.csv")).map_err(|e| e.to_string())?;
    let rows = parse_results(&String::from_utf8_lossy(&first))?;
    ensure!(rows.len() == 11, "{} rows instead of 11", rows.len());
    let cells = |kind: &str, ch: &str| rows.iter().find(|r| r.0 == kind && r.1 == ch).map(|r| r.2.clone());
    let mut lowest = f64::INFINITY;
    for (kind, ch, vals) in rows.iter().filter(|r| r.0 != "geom") {
        for (v, ratio) in vals.iter().zip(SplitRatio::ALL) {
            let v = v.ok_or(format!("{kind} {ch} {ratio} failed"))?;
            ensure!(v >= 80.0, "(a) {kind} {ch} at {ratio}: {v:.4}% < 80%");
            lowest = lowest.min(v);
        }
    }
    let geom = cells("geom", "").ok_or("no geom row")?;
    let fused = cells("fused", "25").ok_or("no fused 25 row")?;
    for ((g, f), ratio) in geom.iter().zip(&fused).zip(SplitRatio::ALL) {
        let (g, f) = (g.ok_or("geom cell failed")?, f.ok_or("fused cell failed")?);
        ensure!(f >= g, "(b) fused 25 {f:.4}% < geom {g:.4}% at {ratio}");
    }
    ensure!(elapsed < Duration::from_secs(600), "(c) sweep took {elapsed:.1?}");
    ensure!(first == second, "(d) rerun changed results.csv");
    Ok(format!(
        "min gabor/fused {lowest:.2}%, geom {geom:?}, sweep {elapsed:.1?}, rerun identical"
    ))
}

fn dir_contents(dir: &Path) -> Result<Vec<(PathBuf, Vec<u8>)>, String> {
    let mut out = Vec::new();
    let mut entries: Vec<_> = fs::read_dir(dir)
        .map_err(|e| e.to_string())?
        .map(|e| e.unwrap().path())
        .collect();
    entries.sort();
    for p in entries {
        out.push((p.file_name().unwrap().into(), fs::read(&p).map_err(|e| e.to_string())?));
    }
    Ok(out)
}

fn determinism(work: &Path) -> Outcome {
    let scene = Path::new(env!("CARGO_MANIFEST_DIR")).join("assets/sample_scene.png");
    let mut compared = 0;
    for cmd in ["detect", "landmarks", "features"] {
        let a = work.join(format!("{cmd}1"));
        let b = work.join(format!("{cmd}2"));
        for out in [&a, &b] {
            run(bin().arg(cmd).arg(&scene).arg("--out").arg(out))?;
        }
        let (ca, cb) = (dir_contents(&a)?, dir_contents(&b)?);
        ensure!(ca == cb, "{cmd} outputs differ between runs");
        compared += ca.len();
    }
    Ok(format!("{compared} files byte-identical"))
}

fn main() {
    let work = tempfile::tempdir().expect("temp dir");
    let criteria: Vec<Criterion> = vec![
        ("gabor kernel identities", Box::new(gabor_identities)),
        ("bank cardinalities", Box::new(bank_cardinalities)),
        ("fuzzy system grid", Box::new(fuzzy_system)),
        ("imaging oracles", Box::new(imaging_oracles)),
        ("mlp gradient check", Box::new(gradient_checks)),
        ("fiducial mirror equivariance", Box::new(mirror_equivariance)),
        ("geometric vector", Box::new(geometric_vector_checks)),
        ("end-to-end toy experiment", Box::new(|| end_to_end(work.path()))),
        ("cli determinism", Box::new(|| determinism(work.path()))),
    ];
    let mut failed = 0;
    for (name, check) in &criteria {
        match check() {
            Ok(detail) => println!("PASS {name}: {detail}"),
            Err(why) => {
                failed += 1;
                println!("FAIL {name}: {why}");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
