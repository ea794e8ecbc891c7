use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use ontokge::pipeline::{Pipeline, PipelineConfig, Seeds, Stage};
use ontokge::synthetic::{demo_config, SyntheticConfig, SyntheticCorpus};

/// Gene-disease association prediction from ontology knowledge graphs.
#[derive(Parser, Debug)]
#[command(name = "ontokge", version, about)]
struct Cli {
    /// Pipeline configuration (JSON).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory, overriding the configured one.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Use this value for every seed in the configuration.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Leave wall-clock timings out of manifests so reruns are byte-identical.
    #[arg(long, global = true)]
    deterministic: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug, Clone, Copy)]
enum Command {
    /// Parse inputs, filter associations, sample negatives and split.
    Ingest,
    /// Build the configured knowledge graph variants.
    BuildKg,
    /// Score the dataset with the six semantic similarity measures.
    Baseline,
    /// Train node embeddings.
    Embed,
    /// Combine gene and disease vectors into pair features.
    Pair,
    /// Grid-search the classifiers.
    Train,
    /// Evaluate every grid cell on the test split.
    Evaluate,
    /// Write the consolidated ranking.
    Report,
    /// Run every stage in order.
    RunAll,
    /// Write a planted-structure corpus and a matching config.json into --out.
    Synth,
}

impl Command {
    fn stage(self) -> Option<Stage> {
        Some(match self {
            Command::Ingest => Stage::Ingest,
            Command::BuildKg => Stage::BuildKg,
            Command::Baseline => Stage::Baseline,
            Command::Embed => Stage::Embed,
            Command::Pair => Stage::Pair,
            Command::Train => Stage::Train,
            Command::Evaluate => Stage::Evaluate,
            Command::Report => Stage::Report,
            Command::RunAll | Command::Synth => return None,
        })
    }
}

fn synth(dir: &Path, seed: Option<u64>) -> Result<()> {
    let mut corpus_config = SyntheticConfig::default();
    if let Some(seed) = seed {
        corpus_config.seed = seed;
    }
    let corpus = SyntheticCorpus::generate(&corpus_config)?;
    let files = corpus.write(dir)?;
    let config = demo_config(files, seed.unwrap_or(0));
    let path = dir.join("config.json");
    std::fs::write(&path, config.to_json()? + "\n").with_context(|| format!("writing {}", path.display()))?;
    println!("wrote {} terms and {} into {}", corpus.term_count, path.display(), dir.display());
    Ok(())
}

fn main() -> Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    if let Command::Synth = cli.command {
        let Some(dir) = &cli.out else { bail!("synth needs --out DIR") };
        return synth(dir, cli.seed);
    }
    let Some(config_path) = &cli.config else {
        bail!("--config PATH is required");
    };
    let mut config = PipelineConfig::load(config_path)?;
    if let Some(seed) = cli.seed {
        config.seeds = Seeds::all(seed);
    }
    let pipeline = Pipeline::new(config, cli.out.clone(), cli.deterministic);
    let stages = match cli.command.stage() {
        Some(stage) => vec![stage],
        None => Stage::ALL.to_vec(),
    };
    for stage in stages {
        let manifest = pipeline.run(stage).with_context(|| format!("stage {stage} failed"))?;
        println!(
            "{stage}: {} files written to {}",
            manifest.outputs.len(),
            pipeline.output_dir().join(stage.as_str()).display()
        );
    }
    Ok(())
}
