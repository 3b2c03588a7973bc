//! Experiment driver for the adversarial social recommender: prepare folds,
//! seed friends from the heterogeneous graph, train bpr/rsgan/random models,
//! then evaluate ranking, link prediction, and the reliable network.
//!
//! Every subcommand is a pure function of (input files, config, --seed):
//! re-running a command writes byte-identical outputs. Flags override config
//! keys; each flag documents its key and default in --help.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rsgan::{Error, Result};

pub mod commands;
pub mod config;

use config::{resolve, ConfigFile};

#[derive(Parser, Debug)]
#[command(
    name = "rsgan",
    version,
    about = "Adversarial social recommendation experiments",
    after_help = "Config files are flat `key=value` lines; unknown keys are rejected.\n\
                  Flags win over config values. Exit codes: 0 ok, 2 input error,\n\
                  3 numeric fault, 4 checkpoint/format error."
)]
pub struct Cli {
    /// Flat key=value config file; flags override its values
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    /// Master random seed [default: 42] [key: seed]
    #[arg(long, global = true, value_name = "N")]
    pub seed: Option<u64>,

    /// Directory all outputs are written to [default: out] [key: out]
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,

    /// Worker threads for parallel passes; 0 keeps the library default
    /// [default: 0] [key: threads]
    #[arg(long, global = true, value_name = "N")]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Load ratings (and social edges), split cross-validation folds, and
    /// write the fold manifest plus a dataset summary
    Prepare(PrepareArgs),
    /// Embed the user-item-user graph with meta-path walks and export each
    /// user's top-similar seeded friends
    Seed(SeedArgs),
    /// Train a model per fold and write checkpoints plus learning curves
    Train(TrainArgs),
    /// Rank held-out items with a checkpoint and write metric reports
    Eval(EvalArgs),
    /// Score held-out followees with a trained generator
    Linkpred(LinkpredArgs),
    /// Export the reliable network, follower histogram, and overlap stats
    Analyze(AnalyzeArgs),
}

/// Which recommender `train` and `eval` operate on. `random` is the
/// ablation that replaces the generator with a uniform sampler.
#[derive(Copy, Clone, PartialEq, Eq, Debug, ValueEnum)]
pub enum Model {
    Bpr,
    Rsgan,
    Random,
}

impl Model {
    pub fn as_str(self) -> &'static str {
        match self {
            Model::Bpr => "bpr",
            Model::Rsgan => "rsgan",
            Model::Random => "random",
        }
    }
}

impl std::str::FromStr for Model {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "bpr" => Ok(Model::Bpr),
            "rsgan" => Ok(Model::Rsgan),
            "random" => Ok(Model::Random),
            other => Err(format!("unknown model `{other}` (bpr, rsgan, random)")),
        }
    }
}

#[derive(Args, Debug)]
pub struct PrepareArgs {
    /// Ratings file: `user item [rating]` per line [key: prepare.ratings]
    #[arg(long, value_name = "FILE")]
    pub ratings: Option<PathBuf>,

    /// Social edge file: `follower followee` per line [key: prepare.social]
    #[arg(long, value_name = "FILE")]
    pub social: Option<PathBuf>,

    /// Keep ratings >= this value as positive feedback [default: 0]
    /// [key: prepare.threshold]
    #[arg(long, value_name = "X")]
    pub threshold: Option<f64>,

    /// Cross-validation fold count [default: 5] [key: prepare.folds]
    #[arg(long, value_name = "K")]
    pub folds: Option<usize>,
}

#[derive(Args, Debug)]
pub struct SeedArgs {
    /// Ratings file [key: seed.ratings]
    #[arg(long, value_name = "FILE")]
    pub ratings: Option<PathBuf>,

    /// Social edge file [key: seed.social]
    #[arg(long, value_name = "FILE")]
    pub social: Option<PathBuf>,

    /// Positive-feedback threshold [default: 0] [key: seed.threshold]
    #[arg(long, value_name = "X")]
    pub threshold: Option<f64>,

    /// Fraction of each user's followees held out before walking, for later
    /// link prediction [default: 0] [key: seed.holdout_frac]
    #[arg(long, value_name = "F")]
    pub holdout_frac: Option<f64>,

    /// Comma-separated walk patterns over U/I node types
    /// [default: U-U,U-I-U,U-U-I-U] [key: seed.meta_paths]
    #[arg(long, value_name = "LIST")]
    pub meta_paths: Option<String>,

    /// Walks started per user per pattern [default: 10] [key: seed.walks]
    #[arg(long, value_name = "N")]
    pub walks: Option<usize>,

    /// Emitted users per walk [default: 40] [key: seed.walk_length]
    #[arg(long, value_name = "N")]
    pub walk_length: Option<usize>,

    /// Node embedding dimension [default: 64] [key: seed.dim]
    #[arg(long, value_name = "D")]
    pub dim: Option<usize>,

    /// Skip-gram context window [default: 5] [key: seed.window]
    #[arg(long, value_name = "W")]
    pub window: Option<usize>,

    /// Negative samples per context pair [default: 5] [key: seed.neg]
    #[arg(long, value_name = "N")]
    pub neg: Option<usize>,

    /// Skip-gram epochs over the corpus [default: 5] [key: seed.sg_epochs]
    #[arg(long, value_name = "N")]
    pub sg_epochs: Option<usize>,

    /// Initial skip-gram learning rate [default: 0.025] [key: seed.sg_lr]
    #[arg(long, value_name = "LR")]
    pub sg_lr: Option<f64>,

    /// Seeded friends kept per user [default: 10] [key: seed.k_seed]
    #[arg(long, value_name = "K")]
    pub k_seed: Option<usize>,

    /// Minimum cosine similarity for a seeded friend [default: 0]
    /// [key: seed.min_sim]
    #[arg(long, value_name = "S")]
    pub min_sim: Option<f64>,
}

#[derive(Args, Debug)]
pub struct TrainArgs {
    /// Ratings file [key: train.ratings]
    #[arg(long, value_name = "FILE")]
    pub ratings: Option<PathBuf>,

    /// Seeded-friends file; required for rsgan [default: {out}/seeds.tsv]
    /// [key: train.seeds]
    #[arg(long, value_name = "FILE")]
    pub seeds: Option<PathBuf>,

    /// Fold manifest from `prepare` [default: {out}/folds.tsv]
    /// [key: train.manifest]
    #[arg(long, value_name = "FILE")]
    pub manifest: Option<PathBuf>,

    /// Positive-feedback threshold [default: 0] [key: train.threshold]
    #[arg(long, value_name = "X")]
    pub threshold: Option<f64>,

    /// Model to train [default: rsgan] [key: train.model]
    #[arg(long, value_enum, value_name = "MODEL")]
    pub model: Option<Model>,

    /// Train only this fold index [default: all folds] [key: train.fold]
    #[arg(long, value_name = "F")]
    pub fold: Option<usize>,

    /// Latent factor dimension [default: 50] [key: train.dim]
    #[arg(long, value_name = "D")]
    pub dim: Option<usize>,

    /// Generator hidden units [default: 200] [key: train.hidden]
    #[arg(long, value_name = "H")]
    pub hidden: Option<usize>,

    /// Gumbel-Softmax temperature [default: 0.2] [key: train.tau]
    #[arg(long, value_name = "T")]
    pub tau: Option<f64>,

    /// L2 regularization coefficient [default: 0.001] [key: train.lambda]
    #[arg(long, value_name = "L")]
    pub lambda: Option<f64>,

    /// Discriminator learning rate [default: 0.05] [key: train.lr_d]
    #[arg(long, value_name = "LR")]
    pub lr_d: Option<f64>,

    /// Generator learning rate [default: 0.05] [key: train.lr_g]
    #[arg(long, value_name = "LR")]
    pub lr_g: Option<f64>,

    /// Per-epoch multiplicative learning-rate decay [default: 0.9]
    /// [key: train.lr_decay]
    #[arg(long, value_name = "D")]
    pub lr_decay: Option<f64>,

    /// Users per shuffled batch [default: 512] [key: train.batch_size]
    #[arg(long, value_name = "B")]
    pub batch_size: Option<usize>,

    /// Generator pretraining epochs [default: 30] [key: train.pretrain_epochs]
    #[arg(long, value_name = "N")]
    pub pretrain_epochs: Option<usize>,

    /// Generator pretraining learning rate [default: 0.05]
    /// [key: train.pretrain_lr]
    #[arg(long, value_name = "LR")]
    pub pretrain_lr: Option<f64>,

    /// Negative users per positive in pretraining [default: 5]
    /// [key: train.pretrain_negatives]
    #[arg(long, value_name = "N")]
    pub pretrain_negatives: Option<usize>,

    /// Input corruption rate of the denoising autoencoder [default: 0.2]
    /// [key: train.q_corrupt]
    #[arg(long, value_name = "Q")]
    pub q_corrupt: Option<f64>,

    /// Epoch budget; early stopping may end sooner [default: 200]
    /// [key: train.epochs]
    #[arg(long = "epochs", visible_alias = "max-epochs", value_name = "N")]
    pub epochs: Option<usize>,

    /// Discriminator steps per generator step [default: 1] [key: train.d_steps]
    #[arg(long, value_name = "N")]
    pub d_steps: Option<usize>,

    /// Epochs without validation improvement before stopping [default: 10]
    /// [key: train.patience]
    #[arg(long, value_name = "N")]
    pub patience: Option<usize>,

    /// Plain pairwise epochs for the discriminator before the minimax loop
    /// [default: 0] [key: train.warmup_epochs]
    #[arg(long, value_name = "N")]
    pub warmup_epochs: Option<usize>,

    /// Hold the generator fixed within each epoch [key: train.epoch_alternation]
    #[arg(long)]
    pub epoch_alternation: bool,

    /// Feed the discriminator a hardened one-hot z [key: train.hard_z]
    #[arg(long)]
    pub hard_z: bool,

    /// Assert the resting network does not move during the opposing update
    /// (slow; debugging aid) [key: train.freeze_checks]
    #[arg(long)]
    pub freeze_checks: bool,
}

#[derive(Args, Debug)]
pub struct EvalArgs {
    /// Ratings file [key: eval.ratings]
    #[arg(long, value_name = "FILE")]
    pub ratings: Option<PathBuf>,

    /// Fold manifest [default: {out}/folds.tsv] [key: eval.manifest]
    #[arg(long, value_name = "FILE")]
    pub manifest: Option<PathBuf>,

    /// Positive-feedback threshold [default: 0] [key: eval.threshold]
    #[arg(long, value_name = "X")]
    pub threshold: Option<f64>,

    /// Model name used for default paths and report columns [default: rsgan]
    /// [key: eval.model]
    #[arg(long, value_enum, value_name = "MODEL")]
    pub model: Option<Model>,

    /// Fold to evaluate [default: 0] [key: eval.fold]
    #[arg(long, value_name = "F")]
    pub fold: Option<usize>,

    /// Checkpoint to load [default: {out}/ckpt_{model}_fold{fold}.bin]
    /// [key: eval.checkpoint]
    #[arg(long, value_name = "FILE")]
    pub checkpoint: Option<PathBuf>,

    /// Comma-separated ranking cutoffs [default: 10,20] [key: eval.ks]
    #[arg(long, value_name = "LIST")]
    pub ks: Option<String>,

    /// Cold-start users have fewer training interactions than this
    /// [default: 10] [key: eval.cold_max]
    #[arg(long, value_name = "N")]
    pub cold_max: Option<usize>,
}

#[derive(Args, Debug)]
pub struct LinkpredArgs {
    /// Ratings file [key: linkpred.ratings]
    #[arg(long, value_name = "FILE")]
    pub ratings: Option<PathBuf>,

    /// Social edge file the holdout is drawn from [key: linkpred.social]
    #[arg(long, value_name = "FILE")]
    pub social: Option<PathBuf>,

    /// Seeded-friends file [default: {out}/seeds.tsv] [key: linkpred.seeds]
    #[arg(long, value_name = "FILE")]
    pub seeds: Option<PathBuf>,

    /// Positive-feedback threshold [default: 0] [key: linkpred.threshold]
    #[arg(long, value_name = "X")]
    pub threshold: Option<f64>,

    /// Checkpoint with a trained generator
    /// [default: {out}/ckpt_rsgan_fold0.bin] [key: linkpred.checkpoint]
    #[arg(long, value_name = "FILE")]
    pub checkpoint: Option<PathBuf>,

    /// Second generator checkpoint reported alongside as `baseline`
    /// [key: linkpred.baseline_checkpoint]
    #[arg(long, value_name = "FILE")]
    pub baseline_checkpoint: Option<PathBuf>,

    /// Fraction of each user's followees held out as targets; must match the
    /// --holdout-frac given to `seed` [default: 0.2] [key: linkpred.holdout_frac]
    #[arg(long, value_name = "F")]
    pub holdout_frac: Option<f64>,

    /// Ranking cutoff [default: 10] [key: linkpred.k]
    #[arg(long, value_name = "K")]
    pub k: Option<usize>,
}

#[derive(Args, Debug)]
pub struct AnalyzeArgs {
    /// Ratings file [key: analyze.ratings]
    #[arg(long, value_name = "FILE")]
    pub ratings: Option<PathBuf>,

    /// Explicit social edge file for overlap stats [key: analyze.social]
    #[arg(long, value_name = "FILE")]
    pub social: Option<PathBuf>,

    /// Seeded-friends file [default: {out}/seeds.tsv] [key: analyze.seeds]
    #[arg(long, value_name = "FILE")]
    pub seeds: Option<PathBuf>,

    /// Positive-feedback threshold [default: 0] [key: analyze.threshold]
    #[arg(long, value_name = "X")]
    pub threshold: Option<f64>,

    /// Checkpoint with a trained generator
    /// [default: {out}/ckpt_rsgan_fold0.bin] [key: analyze.checkpoint]
    #[arg(long, value_name = "FILE")]
    pub checkpoint: Option<PathBuf>,

    /// Reliable friends kept per user [default: 20] [key: analyze.top]
    #[arg(long, value_name = "T")]
    pub top: Option<usize>,
}

/// Settings shared by every subcommand.
pub struct Globals {
    pub seed: u64,
    pub out: PathBuf,
}

pub fn run(cli: Cli) -> Result<()> {
    let cfg = match &cli.config {
        Some(path) => ConfigFile::load(path)?,
        None => ConfigFile::empty(),
    };
    let globals = Globals {
        seed: resolve(cli.seed, &cfg, "seed", 42)?,
        out: resolve(cli.out, &cfg, "out", PathBuf::from("out"))?,
    };
    let threads = resolve(cli.threads, &cfg, "threads", 0usize)?;
    if threads > 0 {
        // Errors only if a pool already exists (e.g. run() called twice in
        // one process); the existing pool then stays in charge.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global();
    }
    std::fs::create_dir_all(&globals.out).map_err(|e| Error::Io {
        path: globals.out.clone(),
        source: e,
    })?;
    match &cli.command {
        Command::Prepare(args) => commands::prepare(args, &cfg, &globals),
        Command::Seed(args) => commands::seed(args, &cfg, &globals),
        Command::Train(args) => commands::train(args, &cfg, &globals),
        Command::Eval(args) => commands::eval(args, &cfg, &globals),
        Command::Linkpred(args) => commands::linkpred(args, &cfg, &globals),
        Command::Analyze(args) => commands::analyze(args, &cfg, &globals),
    }
}

/// Exit-code contract: 0 ok, 2 input error, 3 numeric fault, 4 format error.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Io { .. }
        | Error::Parse { .. }
        | Error::EmptyDataset
        | Error::EmptyCorpus
        | Error::Config(_)
        | Error::DegenerateDistribution
        | Error::EmptySupport => 2,
        Error::NumericFault { .. } => 3,
        Error::Format(_) => 4,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn cli_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn every_flag_documents_its_config_key() {
        // The bijection between flags and config keys is enforced by
        // grepping the generated help for each namespaced key.
        let mut cmd = Cli::command();
        cmd.build();
        for sub in cmd.get_subcommands() {
            let name = sub.get_name().to_string();
            let mut help = Vec::new();
            sub.clone()
                .write_long_help(&mut help)
                .expect("help renders");
            let help = String::from_utf8(help).unwrap();
            for key in config::KNOWN_KEYS {
                if let Some(flag) = key.strip_prefix(&format!("{name}.")) {
                    assert!(
                        help.contains(&format!("[key: {name}.{flag}]")),
                        "{name} --help missing config key {key}"
                    );
                }
            }
        }
    }

    #[test]
    fn exit_codes_follow_the_contract() {
        assert_eq!(exit_code(&Error::EmptyDataset), 2);
        assert_eq!(exit_code(&Error::Config("x".into())), 2);
        assert_eq!(
            exit_code(&Error::NumericFault {
                epoch: 3,
                msg: "x".into()
            }),
            3
        );
        assert_eq!(exit_code(&Error::Format("x".into())), 4);
    }

    #[test]
    fn model_parses_from_config_strings() {
        assert_eq!("bpr".parse::<Model>().unwrap(), Model::Bpr);
        assert_eq!("rsgan".parse::<Model>().unwrap(), Model::Rsgan);
        assert_eq!("random".parse::<Model>().unwrap(), Model::Random);
        assert!("gan".parse::<Model>().is_err());
    }
}
