use std::path::{Path, PathBuf};

use log::{error, info, warn};
use motor_dae::dataset::{
    csv_to_wav, fetch_dataset, split_dataset, synth_motor_sound, write_csv, Category, DatasetError, DatasetSplit,
    SyntheticMotorConfig, MAFAULDA_CHANNELS,
};
use motor_dae::evaluation::{
    emit_comparison_bundle, emit_report, evaluate_testset, BundleOptions, ReportMeta, SoundPair,
};
use motor_dae::nn::{denoise_samples, init_model, load_checkpoint, save_checkpoint, Checkpoint};
use motor_dae::noise::corrupt;
use motor_dae::rng::{derive_seed, CounterRng};
use motor_dae::spectrogram::{WindowKind, DEFAULT_WINDOW_SIZE};
use motor_dae::training::{fit, make_windows, TrainError, TrainPair};
use motor_dae::wav::{read_wav, write_wav};
use motor_dae::{minmax_normalize, NormalizedWaveform, Waveform};
use sha2::{Digest, Sha256};

use crate::config::PipelineConfig;
use crate::manifest::{
    read_json, relative_id, resolve, write_json, PairsManifest, PreparedFile, PreparedManifest, SoundPairEntry,
    MANIFEST_VERSION,
};
use crate::*;

pub(crate) fn dispatch(cli: &Cli, cfg: &PipelineConfig) -> Result<(), Failure> {
    match &cli.command {
        Command::Fetch(a) => cmd_fetch(a, cfg),
        Command::Prepare(a) => cmd_prepare(a, cfg),
        Command::Corrupt(a) => cmd_corrupt(a, cfg),
        Command::Train(a) => cmd_train(a, cfg),
        Command::Denoise(a) => cmd_denoise(a, cfg),
        Command::Evaluate(a) => cmd_evaluate(a, cfg),
        Command::Synth(a) => cmd_synth(a, cli.seed.unwrap_or(0), cfg),
    }
}

fn other(msg: impl Into<String>) -> Failure {
    Failure::new(EXIT_OTHER, msg)
}

fn cmd_fetch(a: &FetchArgs, cfg: &PipelineConfig) -> Result<(), Failure> {
    let dest = a.dest.clone().unwrap_or_else(|| cfg.dataset_dir.clone());
    fetch_dataset(&a.url, &dest, a.checksum.as_deref()).map_err(|e| {
        let code = match e {
            DatasetError::NetworkFailure { .. } => EXIT_NETWORK,
            DatasetError::ChecksumMismatch { .. } => EXIT_CHECKSUM,
            DatasetError::ExtractionFailure(_) => EXIT_EXTRACTION,
            _ => EXIT_OTHER,
        };
        Failure::new(code, e.to_string())
    })?;
    info!("fetched {} into {}", a.url, dest.display());
    Ok(())
}

fn is_csv(path: &Path) -> bool {
    path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv"))
}

fn cmd_prepare(a: &PrepareArgs, cfg: &PipelineConfig) -> Result<(), Failure> {
    let root = a.dataset_dir.clone().unwrap_or_else(|| cfg.dataset_dir.clone());
    let out_dir = a.out_dir.clone().unwrap_or_else(|| cfg.prepared_dir.clone());
    let mic_column = a.mic_column.unwrap_or(cfg.mic_column);
    let fail = |m: String| Failure::new(EXIT_PREPARE, m);
    if !root.is_dir() {
        return Err(fail(format!("{}: no such dataset directory", root.display())));
    }
    let mut inputs = Vec::new();
    for entry in walkdir::WalkDir::new(&root).sort_by_file_name() {
        let entry = entry.map_err(|e| fail(e.to_string()))?;
        if entry.file_type().is_file() && is_csv(entry.path()) {
            inputs.push(entry.into_path());
        }
    }
    if inputs.is_empty() {
        return Err(fail(format!("no input files under {}", root.display())));
    }

    let mut files = Vec::with_capacity(inputs.len());
    let mut failed = Vec::new();
    for csv in &inputs {
        let id = relative_id(&root, csv).expect("walked paths lie under the root");
        let wav = PathBuf::from(format!("{id}.wav"));
        let dest = out_dir.join(&wav);
        if let Some(parent) = dest.parent() {
            std::fs::create_dir_all(parent).map_err(|e| fail(format!("{}: {e}", parent.display())))?;
        }
        match csv_to_wav(csv, &dest, mic_column) {
            Ok(w) => {
                info!("{} -> {} ({} samples)", csv.display(), dest.display(), w.len());
                files.push(PreparedFile {
                    category: Category::from_path(Path::new(&id)).as_str().to_string(),
                    id,
                    wav,
                    source: csv.clone(),
                });
            }
            Err(e) => {
                error!("{e}");
                failed.push(csv.display().to_string());
            }
        }
    }
    if !failed.is_empty() {
        return Err(fail(format!("{} file(s) failed: {}", failed.len(), failed.join(", "))));
    }
    let manifest = PreparedManifest {
        version: MANIFEST_VERSION,
        mic_column,
        files,
    };
    write_json(&out_dir.join("manifest.json"), &manifest).map_err(fail)
}

/// Seed of the noise realization for one file.
pub fn file_noise_seed(split_seed: u64, file_id: &str) -> u64 {
    let mut h = Sha256::new();
    h.update(split_seed.to_le_bytes());
    h.update(file_id.as_bytes());
    let digest = h.finalize();
    u64::from_le_bytes(digest[..8].try_into().unwrap())
}

fn cmd_corrupt(a: &CorruptArgs, cfg: &PipelineConfig) -> Result<(), Failure> {
    let manifest_path = a.manifest.clone().unwrap_or_else(|| cfg.prepared_manifest());
    let out_dir = a.out_dir.clone().unwrap_or_else(|| cfg.noisy_dir.clone());
    let fail = |m: String| Failure::new(EXIT_CORRUPT, m);
    let manifest: PreparedManifest = read_json(&manifest_path).map_err(fail)?;
    cfg.noise.validate().map_err(|e| fail(e.to_string()))?;

    let mut pairs = Vec::with_capacity(manifest.files.len());
    let mut failed = Vec::new();
    for file in &manifest.files {
        let clean_path = resolve(&manifest_path, &file.wav);
        let noisy_rel = PathBuf::from(format!("{}.wav", file.id));
        let noisy_path = out_dir.join(&noisy_rel);
        let seed = file_noise_seed(cfg.split_seed, &file.id);
        let result = (|| -> Result<PathBuf, String> {
            let clean = read_wav(&clean_path).map_err(|e| e.to_string())?;
            let noise = cfg
                .noise
                .generate(clean.len(), clean.sample_rate_hz(), seed)
                .map_err(|e| e.to_string())?;
            let noisy = corrupt(&clean, &noise, cfg.noise.noise_factor).map_err(|e| e.to_string())?;
            if let Some(parent) = noisy_path.parent() {
                std::fs::create_dir_all(parent).map_err(|e| format!("{}: {e}", parent.display()))?;
            }
            write_wav(&noisy_path, &noisy).map_err(|e| e.to_string())?;
            std::fs::canonicalize(&clean_path).map_err(|e| format!("{}: {e}", clean_path.display()))
        })();
        match result {
            Ok(clean_abs) => pairs.push(SoundPairEntry {
                id: file.id.clone(),
                category: file.category.clone(),
                clean: clean_abs,
                noisy: noisy_rel,
                noise_seed: seed,
            }),
            Err(e) => {
                error!("{}: {e}", file.id);
                failed.push(file.id.clone());
            }
        }
    }
    if !failed.is_empty() {
        return Err(fail(format!("{} file(s) failed: {}", failed.len(), failed.join(", "))));
    }
    let out = PairsManifest {
        version: MANIFEST_VERSION,
        noise: cfg.noise.clone(),
        split_seed: cfg.split_seed,
        pairs,
    };
    write_json(&out_dir.join("pairs.json"), &out).map_err(fail)
}

/// Clean and noisy signals of one pair, each min-max normalized on its own.
fn load_pair(manifest_path: &Path, entry: &SoundPairEntry) -> Result<(NormalizedWaveform, NormalizedWaveform), String> {
    let clean = read_wav(&resolve(manifest_path, &entry.clean)).map_err(|e| e.to_string())?;
    let noisy = read_wav(&resolve(manifest_path, &entry.noisy)).map_err(|e| e.to_string())?;
    if clean.len() != noisy.len() || clean.sample_rate_hz() != noisy.sample_rate_hz() {
        return Err(format!("{}: clean and noisy signals do not line up", entry.id));
    }
    let norm = |w: &Waveform| minmax_normalize(w).map_err(|e| format!("{}: {e}", entry.id));
    Ok((norm(&clean)?, norm(&noisy)?))
}

fn selected_pairs(manifest: &PairsManifest, cfg: &PipelineConfig) -> Result<Vec<SoundPairEntry>, Failure> {
    let filter = cfg.category_filter()?;
    Ok(manifest
        .pairs
        .iter()
        .filter(|p| filter.is_none_or(|c| p.category == c.as_str()))
        .cloned()
        .collect())
}

fn split_path(model_path: &Path) -> PathBuf {
    model_path.with_file_name("split.json")
}

fn cmd_train(a: &TrainArgs, cfg: &PipelineConfig) -> Result<(), Failure> {
    let usage = |m: String| Failure::new(EXIT_USAGE, m);
    cfg.arch.validate().map_err(|e| usage(e.to_string()))?;
    cfg.train
        .validate(cfg.arch.downsampling_factor())
        .map_err(|e| usage(e.to_string()))?;
    let pairs_path = a.pairs.clone().unwrap_or_else(|| cfg.pairs_manifest());
    let model_path = a.model.clone().unwrap_or_else(|| cfg.model_path.clone());
    let manifest: PairsManifest = read_json(&pairs_path).map_err(other)?;
    let entries = selected_pairs(&manifest, cfg)?;
    let empty = |m: String| Failure::new(EXIT_EMPTY_SPLIT, m);
    let ids: Vec<String> = entries.iter().map(|p| p.id.clone()).collect();
    let split = split_dataset(&ids, cfg.split_seed).map_err(|e| match e {
        DatasetError::EmptyCorpus => empty(format!("no pairs of category {:?}", cfg.category)),
        e => other(e.to_string()),
    })?;
    if split.train.is_empty() {
        return Err(empty(format!("{} pair(s) leave an empty training split", ids.len())));
    }

    let windows = |set: &[String]| -> Result<Vec<TrainPair>, Failure> {
        let mut out = Vec::new();
        for id in set {
            let entry = entries
                .iter()
                .find(|p| &p.id == id)
                .expect("split ids come from the manifest");
            let (clean, noisy) = load_pair(&pairs_path, entry).map_err(other)?;
            out.extend(make_windows(noisy.samples(), clean.samples(), cfg.train.window_len));
        }
        Ok(out)
    };
    let train = windows(&split.train)?;
    let val = windows(&split.val)?;
    if train.is_empty() {
        return Err(empty(format!(
            "training sounds are shorter than one {}-sample window",
            cfg.train.window_len
        )));
    }
    info!(
        "training on {} windows from {} sounds, validating on {} windows",
        train.len(),
        split.train.len(),
        val.len()
    );

    let model = init_model(cfg.train.seed, &cfg.arch).map_err(|e| usage(e.to_string()))?;
    let (model, curve) = fit(model, &train, &val, &cfg.train).map_err(|e| match e {
        TrainError::NonFiniteLoss { .. } => Failure::new(EXIT_NON_FINITE, e.to_string()),
        TrainError::InvalidConfig(_) => usage(e.to_string()),
        e => other(e.to_string()),
    })?;

    if let Some(dir) = model_path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| other(format!("{}: {e}", dir.display())))?;
    }
    let ckpt = Checkpoint {
        model,
        seed: cfg.train.seed,
        window_len: cfg.train.window_len,
    };
    save_checkpoint(&model_path, &ckpt).map_err(|e| other(e.to_string()))?;
    let write = |name: &str, text: String| {
        let p = model_path.with_file_name(name);
        std::fs::write(&p, text).map_err(|e| other(format!("{}: {e}", p.display())))
    };
    write("loss_curve.csv", curve.to_csv())?;
    write("loss_curve.json", curve.to_json())?;
    write_json(&split_path(&model_path), &split).map_err(other)?;
    write_json(&model_path.with_file_name("config.json"), cfg).map_err(other)?;
    Ok(())
}

/// Largest power of two not above `n`, capped at the default STFT window.
fn bundle_window(n: usize) -> usize {
    if n < 2 {
        return 2;
    }
    let p = 1usize << (usize::BITS - 1 - n.leading_zeros());
    p.min(DEFAULT_WINDOW_SIZE)
}

fn cmd_denoise(a: &DenoiseArgs, cfg: &PipelineConfig) -> Result<(), Failure> {
    let model_path = a.model.clone().unwrap_or_else(|| cfg.model_path.clone());
    let io = |m: String| Failure::new(EXIT_DENOISE_IO, m);
    let ckpt = load_checkpoint(&model_path).map_err(|e| Failure::new(EXIT_CHECKPOINT, e.to_string()))?;
    let noisy = read_wav(&a.input).map_err(|e| io(e.to_string()))?;
    let normalized = minmax_normalize(&noisy).map_err(|e| io(format!("{}: {e}", a.input.display())))?;
    let out = denoise_samples(&ckpt.model, normalized.samples(), ckpt.window_len)
        .map_err(|e| Failure::new(EXIT_CHECKPOINT, e.to_string()))?;
    let denoised =
        Waveform::new(normalized.norm().denormalize(&out), noisy.sample_rate_hz()).map_err(|e| io(e.to_string()))?;
    if let Some(dir) = a.output.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| io(format!("{}: {e}", dir.display())))?;
    }
    write_wav(&a.output, &denoised).map_err(|e| io(e.to_string()))?;

    if let (Some(bundle), Some(clean_path)) = (&a.bundle, &a.clean) {
        let clean = read_wav(clean_path).map_err(|e| io(e.to_string()))?;
        let window_size = bundle_window(clean.len());
        let opts = BundleOptions {
            window_size,
            hop: window_size / 2,
            window_kind: WindowKind::Hann,
        };
        emit_comparison_bundle(&clean, &noisy, &denoised, bundle, opts).map_err(|e| io(e.to_string()))?;
    }
    Ok(())
}

fn cmd_evaluate(a: &EvaluateArgs, cfg: &PipelineConfig) -> Result<(), Failure> {
    let model_path = a.model.clone().unwrap_or_else(|| cfg.model_path.clone());
    let pairs_path = a.pairs.clone().unwrap_or_else(|| cfg.pairs_manifest());
    let split_file = a.split.clone().unwrap_or_else(|| split_path(&model_path));
    let report_dir = a.report_dir.clone().unwrap_or_else(|| cfg.report_dir.clone());

    let ckpt = load_checkpoint(&model_path).map_err(|e| Failure::new(EXIT_CHECKPOINT, e.to_string()))?;
    let manifest: PairsManifest = read_json(&pairs_path).map_err(other)?;
    let split: DatasetSplit = read_json(&split_file).map_err(other)?;
    if split.test.is_empty() {
        return Err(Failure::new(EXIT_EMPTY_TEST, "the test split is empty"));
    }
    let mut test = Vec::with_capacity(split.test.len());
    for id in &split.test {
        let entry = manifest
            .pairs
            .iter()
            .find(|p| &p.id == id)
            .ok_or_else(|| other(format!("test sound {id:?} is missing from {}", pairs_path.display())))?;
        let (clean, noisy) = load_pair(&pairs_path, entry).map_err(other)?;
        test.push(SoundPair {
            id: id.clone(),
            clean,
            noisy,
        });
    }
    let meta = ReportMeta {
        category: cfg.category.clone(),
        noise_kind: manifest.noise.kind.as_str().to_string(),
    };
    let report = evaluate_testset(&ckpt.model, &test, &meta, ckpt.window_len).map_err(|e| other(e.to_string()))?;
    emit_report(&report, &report_dir).map_err(|e| other(e.to_string()))?;
    println!("{}", report.summary_line());
    Ok(())
}

fn cmd_synth(a: &SynthArgs, seed: u64, cfg: &PipelineConfig) -> Result<(), Failure> {
    let usage = |m: String| Failure::new(EXIT_USAGE, m);
    if cfg.mic_column >= MAFAULDA_CHANNELS {
        return Err(usage(format!("mic_column {} is out of range", cfg.mic_column)));
    }
    if !(a.min_hz > 0.0 && a.min_hz <= a.max_hz) {
        return Err(usage("need 0 < --min-hz <= --max-hz".into()));
    }
    let root = a.out_dir.clone().unwrap_or_else(|| cfg.dataset_dir.clone());
    let dir = root.join(&a.subdir);
    if a.count == 0 {
        warn!("--count 0 writes nothing");
    }
    let mut rng = CounterRng::new(seed);
    for i in 0..a.count {
        let sc = SyntheticMotorConfig {
            rotation_hz: rng.uniform(a.min_hz, a.max_hz),
            duration_s: a.duration_s,
            seed: derive_seed(seed, i as u64),
            ..SyntheticMotorConfig::default()
        };
        let w = synth_motor_sound(&sc).map_err(|e| usage(e.to_string()))?;
        let rows: Vec<[f64; MAFAULDA_CHANNELS]> = w
            .samples()
            .iter()
            .map(|&s| {
                let mut row = [0.0; MAFAULDA_CHANNELS];
                row[cfg.mic_column] = s;
                row
            })
            .collect();
        let path = dir.join(format!("{i:03}.csv"));
        write_csv(&path, &rows).map_err(|e| other(e.to_string()))?;
        info!("{} at {:.2} Hz", path.display(), sc.rotation_hz);
    }
    Ok(())
}
