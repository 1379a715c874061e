//! `u2s`: dataset generation, training, evaluation, formant
//! extraction, vowel synthesis, and saliency export.

use std::path::PathBuf;
use std::process::ExitCode;

// training shuttles ~100 MB activation tensors per batch; mimalloc
// recycles those blocks instead of returning them to the kernel
#[global_allocator]
static ALLOC: mimalloc::MiMalloc = mimalloc::MiMalloc;

use anyhow::Context;
use clap::{Parser, Subcommand, ValueEnum};
use u2s_data::{
    generate_dataset, read_dataset, read_wav, write_pgm, write_wav, Dataset,
};
use u2s_dsp::{
    extract_formant_trajectory, synthesize_vowel_trajectory, ExtractConfig, FormantTrajectory,
    SynthConfig,
};
use u2s_model::{load_checkpoint, save_checkpoint, U2fConfig, U2fModel};
use u2s_train::{
    compute_saliency, evaluate, split_dataset, train_loop, SaliencyMode, SplitSpec, TrainConfig,
};

#[derive(Parser)]
#[command(name = "u2s", version, about = "Ultrasound-to-formant pipeline")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Ablation {
    Spatial,
    Temporal,
    Shuffle,
    Plain3d,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum MapMode {
    Input,
    Lastconv,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic clip dataset.
    GenData {
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        clips: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Train the network on a dataset (80/10/10 split).
    Train {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 100)]
        epochs: usize,
        #[arg(long, default_value_t = 10)]
        batch: usize,
        #[arg(long, default_value_t = 0.001)]
        lr: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Disable one architectural component.
        #[arg(long, value_enum)]
        ablate: Option<Ablation>,
        /// Desk-scale network (filters 12/24/16) instead of the full one.
        #[arg(long)]
        reduced: bool,
        /// Optional training-history CSV path.
        #[arg(long)]
        history: Option<PathBuf>,
    },
    /// Evaluate a checkpoint on the dev and test splits of a dataset.
    Eval {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        ckpt: PathBuf,
        #[arg(long)]
        report: PathBuf,
    },
    /// Extract a formant trajectory from a WAV file.
    Extract {
        #[arg(long)]
        wav: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Synthesize a vowel from a formant trajectory.
    Synth {
        #[arg(long)]
        traj: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 120.0)]
        f0: f64,
    },
    /// Export saliency maps for one clip as PGM images.
    Saliency {
        #[arg(long)]
        ckpt: PathBuf,
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        index: usize,
        #[arg(long, value_enum, default_value = "input")]
        mode: MapMode,
        #[arg(long)]
        outdir: PathBuf,
    },
}

fn apply_ablation(mut config: U2fConfig, ablate: Option<Ablation>) -> U2fConfig {
    match ablate {
        Some(Ablation::Spatial) => config.use_spatial_branch = false,
        Some(Ablation::Temporal) => config.use_temporal_branch = false,
        Some(Ablation::Shuffle) => config.use_shuffle = false,
        Some(Ablation::Plain3d) => config.hybrid_as_plain3d = true,
        None => {}
    }
    config
}

fn load_dataset(path: &PathBuf) -> anyhow::Result<Dataset> {
    read_dataset(path).with_context(|| format!("reading dataset {}", path.display()))
}

fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::GenData { out, clips, seed } => {
            println!("gen-data: clips={clips} seed={seed} out={}", out.display());
            generate_dataset(clips, seed, &out)
                .with_context(|| format!("writing dataset {}", out.display()))?;
            println!("wrote {} clips", clips);
        }
        Command::Train { data, out, epochs, batch, lr, seed, ablate, reduced, history } => {
            let base = if reduced { U2fConfig::reduced() } else { U2fConfig::default() };
            let config = apply_ablation(base, ablate);
            println!(
                "train: data={} out={} epochs={epochs} batch={batch} lr={lr} seed={seed} \
                 ablate={ablate:?} reduced={reduced}",
                data.display(),
                out.display()
            );
            println!("config: {config:?}");
            let dataset = load_dataset(&data)?;
            let (train_idx, dev_idx, _) = split_dataset(dataset.len(), &SplitSpec::new(seed))?;
            let mut model = U2fModel::build(config, seed)?;
            let cfg = TrainConfig { epochs, batch_size: batch, learning_rate: lr, seed };
            let records = train_loop(&mut model, &dataset, &train_idx, &dev_idx, &cfg)?;
            for rec in &records {
                println!(
                    "epoch {} trainMAE {:.6} devMAE {:.6} devMeanR2 {:.6}",
                    rec.epoch, rec.train_mae, rec.dev_mae, rec.dev_mean_r2
                );
            }
            if let Some(path) = history {
                std::fs::write(&path, u2s_train::history_to_csv(&records))
                    .with_context(|| format!("writing history {}", path.display()))?;
            }
            save_checkpoint(&model, &out)
                .with_context(|| format!("writing checkpoint {}", out.display()))?;
            println!("checkpoint written to {}", out.display());
        }
        Command::Eval { data, ckpt, report } => {
            let mut model = load_checkpoint(&ckpt)
                .with_context(|| format!("loading checkpoint {}", ckpt.display()))?;
            println!("eval: data={} ckpt={} seed={}", data.display(), ckpt.display(), model.seed);
            let dataset = load_dataset(&data)?;
            let (_, dev_idx, test_idx) = split_dataset(dataset.len(), &SplitSpec::new(model.seed))?;
            let mut csv = String::from("split,maeF1,maeF2,maeJoint,r2F1,r2F2,r2Joint\n");
            for (name, idx) in [("dev", &dev_idx), ("test", &test_idx)] {
                let r = evaluate(&mut model, &dataset, idx)?;
                println!(
                    "{name}: maeJoint {:.6} meanR2 {:.6} (maeF1 {:.6} maeF2 {:.6})",
                    r.mae_joint, r.r2_joint, r.mae_f1, r.mae_f2
                );
                csv.push_str(&format!(
                    "{name},{},{},{},{},{},{}\n",
                    r.mae_f1, r.mae_f2, r.mae_joint, r.r2_f1, r.r2_f2, r.r2_joint
                ));
            }
            std::fs::write(&report, csv)
                .with_context(|| format!("writing report {}", report.display()))?;
        }
        Command::Extract { wav, out } => {
            println!("extract: wav={} out={}", wav.display(), out.display());
            let w = read_wav(&wav).with_context(|| format!("reading {}", wav.display()))?;
            let traj = extract_formant_trajectory(&w, &ExtractConfig::default())?;
            std::fs::write(&out, traj.to_csv())
                .with_context(|| format!("writing trajectory {}", out.display()))?;
        }
        Command::Synth { traj, out, f0 } => {
            println!("synth: traj={} out={} f0={f0}", traj.display(), out.display());
            let text = std::fs::read_to_string(&traj)
                .with_context(|| format!("reading trajectory {}", traj.display()))?;
            let trajectory = FormantTrajectory::from_csv(&text)?;
            let cfg = SynthConfig { f0, ..SynthConfig::default() };
            let w = synthesize_vowel_trajectory(&trajectory, &cfg)?;
            write_wav(&out, &w).with_context(|| format!("writing {}", out.display()))?;
        }
        Command::Saliency { ckpt, data, index, mode, outdir } => {
            println!(
                "saliency: ckpt={} data={} index={index} mode={mode:?} outdir={}",
                ckpt.display(),
                data.display(),
                outdir.display()
            );
            let mut model = load_checkpoint(&ckpt)
                .with_context(|| format!("loading checkpoint {}", ckpt.display()))?;
            let dataset = load_dataset(&data)?;
            let record = dataset
                .records
                .get(index)
                .with_context(|| format!("clip index {index} out of range 0..{}", dataset.len()))?;
            let clip: Vec<f64> = record.pixels.iter().map(|&v| v as f64).collect();
            let sal_mode = match mode {
                MapMode::Input => SaliencyMode::Input,
                MapMode::Lastconv => SaliencyMode::LastConv,
            };
            let maps = compute_saliency(&mut model, &clip, sal_mode)?;
            std::fs::create_dir_all(&outdir)
                .with_context(|| format!("creating {}", outdir.display()))?;
            for (t, map) in maps.iter().enumerate() {
                let path = outdir.join(format!("frame{t:02}.pgm"));
                write_pgm(&path, map)?;
            }
            println!("wrote {} maps to {}", maps.len(), outdir.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse(); // exits with code 2 on usage errors
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
