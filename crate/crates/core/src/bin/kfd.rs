use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use kfd::dataset::SynthSpec;
use kfd::pipeline::commands;

#[derive(Parser)]
#[command(
    name = "kfd",
    version,
    about = "Keyframe detection over per-frame feature sequences"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic dataset with planted keyframes.
    Synth {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 5)]
        classes: usize,
        #[arg(long, default_value_t = 10)]
        videos_per_class: usize,
        /// Extra videos per class written to test.json (train.json gets the rest).
        #[arg(long, default_value_t = 0)]
        holdout_per_class: usize,
        #[arg(long, default_value_t = 40)]
        frames_min: usize,
        #[arg(long, default_value_t = 200)]
        frames_max: usize,
        #[arg(long, default_value_t = 32)]
        dim: usize,
        #[arg(long, default_value_t = 0.0)]
        noise: f64,
    },
    /// Generate per-frame labels from class discriminants.
    Label {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Train the regression head on labeled frames.
    Train {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        labels: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        /// Overrides the config file's seed.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Predict, smooth and select keyframes for every video.
    Detect {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        /// Directory for one `frame,raw,fitted,keyframe` CSV per video.
        #[arg(long)]
        emit_curve: Option<PathBuf>,
    },
    /// Compare detections with ground-truth keyframes.
    Eval {
        #[arg(long)]
        detections: PathBuf,
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Synth {
            out,
            seed,
            classes,
            videos_per_class,
            holdout_per_class,
            frames_min,
            frames_max,
            dim,
            noise,
        } => {
            let spec = SynthSpec {
                num_classes: classes,
                videos_per_class,
                frames_min,
                frames_max,
                dim,
                noise_sigma: noise,
                seed,
            };
            commands::cmd_synth(&spec, holdout_per_class, &out).map(|_| ())
        }
        Command::Label {
            manifest,
            config,
            out,
        } => commands::cmd_label(&manifest, config.as_deref(), &out),
        Command::Train {
            manifest,
            labels,
            config,
            seed,
            out,
        } => commands::cmd_train(&manifest, &labels, config.as_deref(), seed, &out),
        Command::Detect {
            manifest,
            model,
            config,
            out,
            emit_curve,
        } => commands::cmd_detect(
            &manifest,
            &model,
            config.as_deref(),
            &out,
            emit_curve.as_deref(),
        ),
        Command::Eval {
            detections,
            manifest,
            out,
        } => commands::cmd_eval(&detections, &manifest, &out),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("kfd: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
