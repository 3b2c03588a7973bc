//! One function per subcommand. Each resolves its settings (flag beats
//! config beats default), runs the pipeline stage, and writes files into the
//! output directory. Nothing here writes timestamps: outputs are pure
//! functions of (inputs, config, master seed).

use std::path::{Path, PathBuf};

use rsgan::data::{
    build_dataset, holdout_followees, load_fold_manifest, load_interactions, load_social,
    split_folds, Dataset,
};
use rsgan::eval::{
    evaluate_cold_start, evaluate_ranking, export_reliable_network, link_prediction_eval,
    overlap_stats, reports_to_json, reports_to_tsv,
};
use rsgan::hetgraph::{
    export_seeded_friends, generate_walks, load_seeded_friends, select_seeded_friends,
    train_skipgram, MetaPath, SeededFriendSet,
};
use rsgan::trainer::{
    adversarial_train, load_checkpoint, save_checkpoint, train_bpr_baseline, Checkpoint,
    TrainConfig, TrainState,
};
use rsgan::generator::GeneratorParams;
use rsgan::{Error, Result};

use crate::config::{resolve, resolve_opt, resolve_req, resolve_switch, ConfigFile};
use crate::{
    AnalyzeArgs, EvalArgs, Globals, LinkpredArgs, Model, PrepareArgs, SeedArgs, TrainArgs,
};

fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })
}

fn load_dataset(path: &Path, threshold: f64) -> Result<Dataset> {
    let (records, _) = load_interactions(path, threshold)?;
    build_dataset(&records)
}

/// "10,20" -> [10, 20]; empty or zero cutoffs are input errors.
fn parse_ks(raw: &str) -> Result<Vec<usize>> {
    let mut ks = Vec::new();
    for part in raw.split(',') {
        let part = part.trim();
        if part.is_empty() {
            continue;
        }
        let k: usize = part
            .parse()
            .map_err(|e| Error::Config(format!("bad ranking cutoff {part:?}: {e}")))?;
        if k == 0 {
            return Err(Error::Config("ranking cutoffs must be >= 1".into()));
        }
        ks.push(k);
    }
    if ks.is_empty() {
        return Err(Error::Config(format!("no ranking cutoffs in {raw:?}")));
    }
    Ok(ks)
}

/// Pull the generator out of a checkpoint and shape-check it against the
/// dataset; bpr checkpoints have none.
fn require_generator(ckpt: Checkpoint, path: &Path, ds: &Dataset) -> Result<GeneratorParams> {
    let gen = ckpt.generator.ok_or_else(|| {
        Error::Config(format!(
            "{}: checkpoint has no generator (trained with --model bpr?)",
            path.display()
        ))
    })?;
    if gen.num_users() != ds.num_users() || gen.num_items() != ds.num_items() {
        return Err(Error::Config(format!(
            "{}: generator shape {}x{} does not match dataset {}x{}",
            path.display(),
            gen.num_users(),
            gen.num_items(),
            ds.num_users(),
            ds.num_items()
        )));
    }
    Ok(gen)
}

pub fn prepare(args: &PrepareArgs, cfg: &ConfigFile, g: &Globals) -> Result<()> {
    let ratings: PathBuf = resolve_req(args.ratings.clone(), cfg, "prepare.ratings", "--ratings")?;
    let threshold = resolve(args.threshold, cfg, "prepare.threshold", 0.0)?;
    let fold_count = resolve(args.folds, cfg, "prepare.folds", 5usize)?;
    let social: Option<PathBuf> = resolve_opt(args.social.clone(), cfg, "prepare.social")?;

    let (records, load) = load_interactions(&ratings, threshold)?;
    let ds = build_dataset(&records)?;
    println!(
        "ratings: kept {} of {} rows ({} duplicate, {} below threshold)",
        load.kept, load.rows, load.duplicates, load.below_threshold
    );
    let relations = match &social {
        Some(path) => {
            let (graph, rep) = load_social(path, &ds)?;
            println!(
                "social: kept {} of {} rows ({} self-loops, {} duplicate, {} unknown users)",
                rep.kept, rep.rows, rep.self_loops, rep.duplicates, rep.unknown_users
            );
            let _ = graph;
            rep.rows
        }
        None => 0,
    };

    let folds = split_folds(&ds, fold_count, g.seed)?;
    let manifest = g.out.join("folds.tsv");
    rsgan::data::export_fold_manifest(&manifest, &ds, &folds)?;

    let summary = format!(
        "# users items feedback relations\n{} {} {} {}\n",
        ds.num_users(),
        ds.num_items(),
        ds.feedback().nnz(),
        relations
    );
    let summary_path = g.out.join("summary.txt");
    write_text(&summary_path, &summary)?;

    println!(
        "dataset: {} users, {} items, {} feedback, {} relations",
        ds.num_users(),
        ds.num_items(),
        ds.feedback().nnz(),
        relations
    );
    println!("wrote {}", manifest.display());
    println!("wrote {}", summary_path.display());
    Ok(())
}

pub fn seed(args: &SeedArgs, cfg: &ConfigFile, g: &Globals) -> Result<()> {
    let ratings: PathBuf = resolve_req(args.ratings.clone(), cfg, "seed.ratings", "--ratings")?;
    let social: PathBuf = resolve_req(args.social.clone(), cfg, "seed.social", "--social")?;
    let threshold = resolve(args.threshold, cfg, "seed.threshold", 0.0)?;
    let holdout = resolve(args.holdout_frac, cfg, "seed.holdout_frac", 0.0)?;
    let meta = resolve(
        args.meta_paths.clone(),
        cfg,
        "seed.meta_paths",
        "U-U,U-I-U,U-U-I-U".to_string(),
    )?;
    let walks = resolve(args.walks, cfg, "seed.walks", 10usize)?;
    let walk_length = resolve(args.walk_length, cfg, "seed.walk_length", 40usize)?;
    let dim = resolve(args.dim, cfg, "seed.dim", 64usize)?;
    let window = resolve(args.window, cfg, "seed.window", 5usize)?;
    let neg = resolve(args.neg, cfg, "seed.neg", 5usize)?;
    let sg_epochs = resolve(args.sg_epochs, cfg, "seed.sg_epochs", 5usize)?;
    let sg_lr = resolve(args.sg_lr, cfg, "seed.sg_lr", 0.025)?;
    let k_seed = resolve(args.k_seed, cfg, "seed.k_seed", 10usize)?;
    let min_sim = resolve(args.min_sim, cfg, "seed.min_sim", 0.0)?;

    if walks == 0 {
        return Err(Error::Config("--walks must be >= 1".into()));
    }
    if walk_length < 2 {
        return Err(Error::Config("--walk-length must be >= 2".into()));
    }
    if dim < 2 || window == 0 || neg == 0 {
        return Err(Error::Config(
            "--dim must be >= 2, --window and --neg >= 1".into(),
        ));
    }
    if k_seed == 0 {
        return Err(Error::Config("--k-seed must be >= 1".into()));
    }
    if !(-1.0..=1.0).contains(&min_sim) {
        return Err(Error::Config("--min-sim must be in [-1, 1]".into()));
    }
    let paths: Vec<MetaPath> = meta
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(str::parse)
        .collect::<Result<_>>()?;
    if paths.is_empty() {
        return Err(Error::Config("no meta-paths given".into()));
    }

    let ds = load_dataset(&ratings, threshold)?;
    let (graph, _) = load_social(&social, &ds)?;
    let graph = if holdout > 0.0 {
        let (kept, held) = holdout_followees(&graph, holdout, g.seed)?;
        println!(
            "holdout: kept {} edges, held out {}",
            kept.num_edges(),
            held.num_edges()
        );
        kept
    } else {
        graph
    };

    let corpus = generate_walks(&ds, &graph, &paths, walks, walk_length, g.seed);
    let emb = train_skipgram(&corpus, dim, window, neg, sg_epochs, sg_lr, g.seed)?;
    let set = select_seeded_friends(&emb, k_seed, min_sim);

    let out_path = g.out.join("seeds.tsv");
    export_seeded_friends(&out_path, &set, &ds)?;
    let seeded = (0..set.num_users())
        .filter(|&u| !set.friends(u).is_empty())
        .count();
    let pairs: usize = (0..set.num_users()).map(|u| set.friends(u).len()).sum();
    println!(
        "walked {} sequences; seeded {} of {} users ({} pairs)",
        corpus.walks.len(),
        seeded,
        ds.num_users(),
        pairs
    );
    println!("wrote {}", out_path.display());
    Ok(())
}

/// The exact settings a checkpoint was produced under, echoed into it.
fn config_echo(model: Model, fold: usize, threshold: f64, tc: &TrainConfig) -> Vec<(String, String)> {
    let mut echo: Vec<(String, String)> = Vec::new();
    let mut push = |k: &str, v: String| echo.push((k.to_string(), v));
    push("model", model.as_str().to_string());
    push("fold", fold.to_string());
    push("threshold", threshold.to_string());
    push("latent_dim", tc.latent_dim.to_string());
    push("hidden_units", tc.hidden_units.to_string());
    push("tau", tc.tau.to_string());
    push("lambda", tc.lambda.to_string());
    push("lr_d", tc.lr_d.to_string());
    push("lr_g", tc.lr_g.to_string());
    push("lr_decay", tc.lr_decay.to_string());
    push("batch_size", tc.batch_size.to_string());
    push("pretrain_epochs", tc.pretrain_epochs.to_string());
    push("pretrain_lr", tc.pretrain_lr.to_string());
    push("pretrain_negatives", tc.pretrain_negatives.to_string());
    push("q_corrupt", tc.q_corrupt.to_string());
    push("max_epochs", tc.max_epochs.to_string());
    push("d_steps", tc.d_steps_per_g_step.to_string());
    push("patience", tc.patience.to_string());
    push("warmup_epochs", tc.warmup_epochs.to_string());
    push("epoch_alternation", tc.epoch_alternation.to_string());
    push("hard_z", tc.hard_z.to_string());
    push("random_friends", tc.random_friends.to_string());
    push("freeze_checks", tc.freeze_checks.to_string());
    push("master_seed", tc.master_seed.to_string());
    echo
}

pub fn train(args: &TrainArgs, cfg: &ConfigFile, g: &Globals) -> Result<()> {
    let ratings: PathBuf = resolve_req(args.ratings.clone(), cfg, "train.ratings", "--ratings")?;
    let threshold = resolve(args.threshold, cfg, "train.threshold", 0.0)?;
    let model = resolve(args.model, cfg, "train.model", Model::Rsgan)?;
    let manifest = resolve(
        args.manifest.clone(),
        cfg,
        "train.manifest",
        g.out.join("folds.tsv"),
    )?;
    let fold_sel: Option<usize> = resolve_opt(args.fold, cfg, "train.fold")?;

    let defaults = TrainConfig::default();
    let tc = TrainConfig {
        latent_dim: resolve(args.dim, cfg, "train.dim", defaults.latent_dim)?,
        hidden_units: resolve(args.hidden, cfg, "train.hidden", defaults.hidden_units)?,
        tau: resolve(args.tau, cfg, "train.tau", defaults.tau)?,
        lambda: resolve(args.lambda, cfg, "train.lambda", defaults.lambda)?,
        lr_d: resolve(args.lr_d, cfg, "train.lr_d", defaults.lr_d)?,
        lr_g: resolve(args.lr_g, cfg, "train.lr_g", defaults.lr_g)?,
        lr_decay: resolve(args.lr_decay, cfg, "train.lr_decay", defaults.lr_decay)?,
        batch_size: resolve(args.batch_size, cfg, "train.batch_size", defaults.batch_size)?,
        pretrain_epochs: resolve(
            args.pretrain_epochs,
            cfg,
            "train.pretrain_epochs",
            defaults.pretrain_epochs,
        )?,
        pretrain_lr: resolve(args.pretrain_lr, cfg, "train.pretrain_lr", defaults.pretrain_lr)?,
        pretrain_negatives: resolve(
            args.pretrain_negatives,
            cfg,
            "train.pretrain_negatives",
            defaults.pretrain_negatives,
        )?,
        q_corrupt: resolve(args.q_corrupt, cfg, "train.q_corrupt", defaults.q_corrupt)?,
        max_epochs: resolve(args.epochs, cfg, "train.epochs", defaults.max_epochs)?,
        d_steps_per_g_step: resolve(args.d_steps, cfg, "train.d_steps", defaults.d_steps_per_g_step)?,
        patience: resolve(args.patience, cfg, "train.patience", defaults.patience)?,
        warmup_epochs: resolve(args.warmup_epochs, cfg, "train.warmup_epochs", defaults.warmup_epochs)?,
        epoch_alternation: resolve_switch(args.epoch_alternation, cfg, "train.epoch_alternation")?,
        hard_z: resolve_switch(args.hard_z, cfg, "train.hard_z")?,
        random_friends: model == Model::Random,
        freeze_checks: resolve_switch(args.freeze_checks, cfg, "train.freeze_checks")?,
        master_seed: g.seed,
    };
    tc.validate()?;

    let ds = load_dataset(&ratings, threshold)?;
    let folds = load_fold_manifest(&manifest, &ds)?;
    let targets: Vec<usize> = match fold_sel {
        Some(f) if f >= folds.len() => {
            return Err(Error::Config(format!(
                "fold {f} out of range: manifest has {} folds",
                folds.len()
            )))
        }
        Some(f) => vec![f],
        None => (0..folds.len()).collect(),
    };

    // rsgan needs seeded friends; the random ablation takes them only if
    // explicitly pointed at a file; bpr ignores them entirely.
    let explicit_seeds: Option<PathBuf> = resolve_opt(args.seeds.clone(), cfg, "train.seeds")?;
    let seed_set: Option<SeededFriendSet> = match model {
        Model::Bpr => None,
        Model::Rsgan => {
            let path = explicit_seeds.unwrap_or_else(|| g.out.join("seeds.tsv"));
            let (set, rep) = load_seeded_friends(&path, &ds)?;
            println!(
                "seeds: kept {} of {} rows from {}",
                rep.kept,
                rep.rows,
                path.display()
            );
            Some(set)
        }
        Model::Random => match explicit_seeds {
            Some(path) => Some(load_seeded_friends(&path, &ds)?.0),
            None => None,
        },
    };
    let empty_seeds = SeededFriendSet::new(
        vec![Vec::new(); ds.num_users()],
        vec![Vec::new(); ds.num_users()],
    );

    let mut curve = String::from("# fold\tepoch\tloss_d\tloss_g\tval_ndcg10\n");
    for &f in &targets {
        let fold = &folds[f];
        let (generator, discriminator, state): (Option<GeneratorParams>, _, TrainState) =
            match model {
                Model::Bpr => {
                    let (disc, state) = train_bpr_baseline(&ds, fold, &tc)?;
                    (None, disc, state)
                }
                Model::Rsgan | Model::Random => {
                    let seeds = seed_set.as_ref().unwrap_or(&empty_seeds);
                    let (gen, disc, state) = adversarial_train(&ds, fold, seeds, &tc)?;
                    (Some(gen), disc, state)
                }
            };
        for rec in &state.history {
            curve.push_str(&format!(
                "{f}\t{}\t{:.6}\t{:.6}\t{:.6}\n",
                rec.epoch, rec.loss_d, rec.loss_g, rec.val_ndcg
            ));
        }
        let ckpt_path = g.out.join(format!("ckpt_{}_fold{f}.bin", model.as_str()));
        let ckpt = Checkpoint {
            generator,
            discriminator,
            master_seed: g.seed,
            config_echo: config_echo(model, f, threshold, &tc),
        };
        save_checkpoint(&ckpt_path, &ckpt)?;
        match state.best_epoch {
            Some(best) => println!(
                "fold {f}: {} epochs, best epoch {best} (val ndcg@10 {:.6}) -> {}",
                state.epochs_run(),
                state.best_val_ndcg,
                ckpt_path.display()
            ),
            None => println!(
                "fold {f}: 0 epochs, checkpoint of initialization -> {}",
                ckpt_path.display()
            ),
        }
    }

    let curve_path = g.out.join(format!("curve_{}.tsv", model.as_str()));
    write_text(&curve_path, &curve)?;
    println!("wrote {}", curve_path.display());
    Ok(())
}

pub fn eval(args: &EvalArgs, cfg: &ConfigFile, g: &Globals) -> Result<()> {
    let ratings: PathBuf = resolve_req(args.ratings.clone(), cfg, "eval.ratings", "--ratings")?;
    let threshold = resolve(args.threshold, cfg, "eval.threshold", 0.0)?;
    let model = resolve(args.model, cfg, "eval.model", Model::Rsgan)?;
    let fold = resolve(args.fold, cfg, "eval.fold", 0usize)?;
    let manifest = resolve(
        args.manifest.clone(),
        cfg,
        "eval.manifest",
        g.out.join("folds.tsv"),
    )?;
    let ckpt_path = resolve(
        args.checkpoint.clone(),
        cfg,
        "eval.checkpoint",
        g.out.join(format!("ckpt_{}_fold{fold}.bin", model.as_str())),
    )?;
    let ks = parse_ks(&resolve(args.ks.clone(), cfg, "eval.ks", "10,20".to_string())?)?;
    let cold_max = resolve(args.cold_max, cfg, "eval.cold_max", 10usize)?;

    let ds = load_dataset(&ratings, threshold)?;
    let folds = load_fold_manifest(&manifest, &ds)?;
    if fold >= folds.len() {
        return Err(Error::Config(format!(
            "fold {fold} out of range: manifest has {} folds",
            folds.len()
        )));
    }
    let ckpt = load_checkpoint(&ckpt_path)?;
    let disc = &ckpt.discriminator;
    if disc.num_users() != ds.num_users() || disc.num_items() != ds.num_items() {
        return Err(Error::Config(format!(
            "{}: checkpoint shape {}x{} does not match dataset {}x{}",
            ckpt_path.display(),
            disc.num_users(),
            disc.num_items(),
            ds.num_users(),
            ds.num_items()
        )));
    }

    let report = evaluate_ranking(disc, &folds[fold], &ks);
    let cold = evaluate_cold_start(disc, &folds[fold], cold_max, &ks);

    let name = model.as_str().to_string();
    let tsv_path = g.out.join(format!("report_{name}_fold{fold}.tsv"));
    let json_path = g.out.join(format!("report_{name}_fold{fold}.json"));
    let cold_path = g.out.join(format!("coldstart_{name}_fold{fold}.tsv"));
    write_text(&tsv_path, &reports_to_tsv(&[(name.clone(), report.clone())]))?;
    write_text(&json_path, &reports_to_json(&[(name.clone(), report.clone())]))?;
    write_text(&cold_path, &reports_to_tsv(&[(name.clone(), cold.clone())]))?;

    for row in &report.rows {
        println!(
            "k={}: precision {:.6} recall {:.6} ndcg {:.6}",
            row.k, row.precision, row.recall, row.ndcg
        );
    }
    println!(
        "evaluated {} users ({} cold-start)",
        report.users_evaluated, cold.users_evaluated
    );
    println!("wrote {}", tsv_path.display());
    println!("wrote {}", json_path.display());
    println!("wrote {}", cold_path.display());
    Ok(())
}

pub fn linkpred(args: &LinkpredArgs, cfg: &ConfigFile, g: &Globals) -> Result<()> {
    let ratings: PathBuf = resolve_req(args.ratings.clone(), cfg, "linkpred.ratings", "--ratings")?;
    let social: PathBuf = resolve_req(args.social.clone(), cfg, "linkpred.social", "--social")?;
    let threshold = resolve(args.threshold, cfg, "linkpred.threshold", 0.0)?;
    let seeds_path = resolve(
        args.seeds.clone(),
        cfg,
        "linkpred.seeds",
        g.out.join("seeds.tsv"),
    )?;
    let ckpt_path = resolve(
        args.checkpoint.clone(),
        cfg,
        "linkpred.checkpoint",
        g.out.join("ckpt_rsgan_fold0.bin"),
    )?;
    let baseline: Option<PathBuf> =
        resolve_opt(args.baseline_checkpoint.clone(), cfg, "linkpred.baseline_checkpoint")?;
    let frac = resolve(args.holdout_frac, cfg, "linkpred.holdout_frac", 0.2)?;
    let k = resolve(args.k, cfg, "linkpred.k", 10usize)?;
    if k == 0 {
        return Err(Error::Config("--k must be >= 1".into()));
    }

    let ds = load_dataset(&ratings, threshold)?;
    let (graph, _) = load_social(&social, &ds)?;
    // Re-derives the same split the seed stage used: same file, same seed.
    let (_kept, held) = holdout_followees(&graph, frac, g.seed)?;
    let (seeds, _) = load_seeded_friends(&seeds_path, &ds)?;

    let gen = require_generator(load_checkpoint(&ckpt_path)?, &ckpt_path, &ds)?;
    let mut entries = vec![(
        "rsgan".to_string(),
        link_prediction_eval(&gen, &seeds, &held, k),
    )];
    if let Some(path) = baseline {
        let base = require_generator(load_checkpoint(&path)?, &path, &ds)?;
        entries.push((
            "baseline".to_string(),
            link_prediction_eval(&base, &seeds, &held, k),
        ));
    }

    let out_path = g.out.join("linkpred.tsv");
    if entries.iter().all(|(_, rep)| rep.users_evaluated == 0) {
        write_text(&out_path, "# no users evaluated\n")?;
        println!("no users evaluated (held-out followee set is empty)");
    } else {
        write_text(&out_path, &reports_to_tsv(&entries))?;
        for (name, rep) in &entries {
            let row = &rep.rows[0];
            println!(
                "{name}: precision@{} {:.6} recall@{} {:.6} ndcg@{} {:.6} ({} users)",
                row.k, row.precision, row.k, row.recall, row.k, row.ndcg, rep.users_evaluated
            );
        }
    }
    println!("wrote {}", out_path.display());
    Ok(())
}

pub fn analyze(args: &AnalyzeArgs, cfg: &ConfigFile, g: &Globals) -> Result<()> {
    let ratings: PathBuf = resolve_req(args.ratings.clone(), cfg, "analyze.ratings", "--ratings")?;
    let social: PathBuf = resolve_req(args.social.clone(), cfg, "analyze.social", "--social")?;
    let threshold = resolve(args.threshold, cfg, "analyze.threshold", 0.0)?;
    let seeds_path = resolve(
        args.seeds.clone(),
        cfg,
        "analyze.seeds",
        g.out.join("seeds.tsv"),
    )?;
    let ckpt_path = resolve(
        args.checkpoint.clone(),
        cfg,
        "analyze.checkpoint",
        g.out.join("ckpt_rsgan_fold0.bin"),
    )?;
    let top = resolve(args.top, cfg, "analyze.top", 20usize)?;
    if top == 0 {
        return Err(Error::Config("--top must be >= 1".into()));
    }

    let ds = load_dataset(&ratings, threshold)?;
    if ds.num_users() < 2 {
        return Err(Error::DegenerateDistribution);
    }
    let (graph, _) = load_social(&social, &ds)?;
    let (seeds, _) = load_seeded_friends(&seeds_path, &ds)?;
    let gen = require_generator(load_checkpoint(&ckpt_path)?, &ckpt_path, &ds)?;

    let net = export_reliable_network(&gen, &seeds, top);
    let stats = overlap_stats(&net, &seeds, &graph);

    let mut edges = String::from("# user\tfriend\tprobability\n");
    for u in 0..net.num_users() {
        for &(v, p) in net.followees(u) {
            edges.push_str(&format!("{}\t{}\t{:.6}\n", ds.user_id(u), ds.user_id(v), p));
        }
    }
    let edges_path = g.out.join("reliable_edges.tsv");
    write_text(&edges_path, &edges)?;

    let mut hist = String::from("# followers\tusers\n");
    for (followers, users) in net.follower_histogram() {
        hist.push_str(&format!("{followers}\t{users}\n"));
    }
    let hist_path = g.out.join("follower_hist.tsv");
    write_text(&hist_path, &hist)?;

    let fmt_ratio = |r: Option<f64>| match r {
        Some(v) => format!("{v:.6}"),
        None => "na".to_string(),
    };
    let overlap = format!(
        "# stat\tvalue\n\
         seed_retention\t{}\n\
         seed_pairs\t{}\n\
         seed_retained\t{}\n\
         explicit_retention\t{}\n\
         explicit_edges\t{}\n\
         explicit_retained\t{}\n",
        fmt_ratio(stats.seed_retention),
        stats.seed_pairs,
        stats.seed_retained,
        fmt_ratio(stats.explicit_retention),
        stats.explicit_edges,
        stats.explicit_retained
    );
    let overlap_path = g.out.join("overlap.tsv");
    write_text(&overlap_path, &overlap)?;

    println!(
        "reliable network: {} edges ({} per user); seed retention {}, explicit retention {}",
        net.num_edges(),
        top,
        fmt_ratio(stats.seed_retention),
        fmt_ratio(stats.explicit_retention)
    );
    println!("wrote {}", edges_path.display());
    println!("wrote {}", hist_path.display());
    println!("wrote {}", overlap_path.display());
    Ok(())
}
