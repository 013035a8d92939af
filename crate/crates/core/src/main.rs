use std::fs::{self, File, OpenOptions};
use std::io::{BufWriter, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use citeclust::clustering::{load_clusters, save_clusters, Clustering};
use citeclust::corpus::{build_blocks, load_corpus, load_profiles, resolve_profiles, Corpus, GoldProfile, KeyMode, ProfileLine};
use citeclust::hmodel::{self, crossover, fit_m, log_bin, pareto_ccdf, HModel};
use citeclust::metrics::{
    aggregate_errors, h_index_of, merged_name_test, sample_name_pairs, second_initial_precision, MixingReport,
};
use citeclust::optimizer::{
    ablate, best_of, local_search_traced, random_search, write_results, EvalSet, FeatureSet, ParamSpace, RadiusSchedule,
    SearchResult, RESULTS_HEADER,
};
use citeclust::similarity::{compute_all, load_link_cache, save_link_cache, DisambiguationParams, DEFAULT_YEAR_GAP};
use citeclust::synth::{generate, write_jsonl, PapersPerAuthor, SynthConfig};

/// Author name disambiguation on citation data.
#[derive(Parser, Debug)]
#[command(name = "citeclust", version)]
struct Cli {
    /// Worker threads; 0 picks one per core.
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a synthetic corpus with ground truth and gold profiles.
    Synth(SynthArgs),
    /// Precompute similarity terms for every name block.
    Links(LinksArgs),
    /// Cluster every name block.
    Disambiguate(DisambiguateArgs),
    /// Score clusters against initials and gold profiles.
    Validate(ValidateArgs),
    /// Random search followed by local search over the parameters.
    Optimize(OptimizeArgs),
    /// Random search per feature subset, with lower hulls.
    Ablate(AblateArgs),
    /// h-index histogram of clusters and the product-model fit.
    Hdist(HdistArgs),
    /// Resolve profile title lists to corpus paper ids.
    Crossref(CrossrefArgs),
}

#[derive(Args, Debug, Serialize)]
struct OutArgs {
    /// Output directory, created if missing.
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Args, Debug, Serialize)]
struct BlockArgs {
    /// papers.jsonl
    #[arg(long)]
    corpus: PathBuf,
    /// Block key: `surname` or `surname-initial`.
    #[arg(long, default_value = "surname", value_parser = parse_key_mode)]
    #[serde(serialize_with = "display")]
    key_mode: KeyMode,
    /// Largest publication-year difference for which a pair is scored.
    #[arg(long, default_value_t = DEFAULT_YEAR_GAP)]
    year_gap: u32,
    /// links.jsonl from the `links` command; computed on the fly if absent.
    #[arg(long)]
    links: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
struct SynthArgs {
    #[arg(long, default_value_t = 7)]
    seed: u64,
    /// JSON file with generator settings; flags below override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    authors: Option<usize>,
    #[arg(long)]
    surnames: Option<usize>,
    /// Mean number of led papers per author.
    #[arg(long)]
    papers_mean: Option<f64>,
    /// Emit profiles as title lists instead of paper ids.
    #[arg(long)]
    noisy_profiles: bool,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Args, Debug, Serialize)]
struct LinksArgs {
    #[command(flatten)]
    blocks: BlockArgs,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Args, Debug, Serialize)]
struct DisambiguateArgs {
    #[command(flatten)]
    blocks: BlockArgs,
    /// Parameter file, e.g. best_params.json from `optimize`.
    #[arg(long)]
    params: Option<PathBuf>,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Args, Debug, Serialize)]
struct ValidateArgs {
    #[command(flatten)]
    blocks: BlockArgs,
    #[arg(long)]
    clusters: PathBuf,
    #[arg(long)]
    profiles: PathBuf,
    /// Also run the merged-name test on this many random name pairs.
    #[arg(long, default_value_t = 0)]
    merged_pairs: usize,
    /// Parameters for the merged-name test.
    #[arg(long)]
    params: Option<PathBuf>,
    #[arg(long, default_value_t = 7)]
    seed: u64,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Args, Debug, Serialize)]
struct SearchArgs {
    #[arg(long)]
    profiles: PathBuf,
    #[arg(long, default_value_t = 200)]
    samples: usize,
    #[arg(long, default_value_t = 7)]
    seed: u64,
    /// Weight of the h-index error in the scalar objective.
    #[arg(long, default_value_t = 0.5)]
    weight: f64,
}

#[derive(Args, Debug, Serialize)]
struct OptimizeArgs {
    #[command(flatten)]
    blocks: BlockArgs,
    #[command(flatten)]
    search: SearchArgs,
    /// Skip the local search after random sampling.
    #[arg(long)]
    no_local: bool,
    #[arg(long, default_value_t = RadiusSchedule::default().max_iterations)]
    max_iterations: usize,
    #[arg(long, default_value_t = RadiusSchedule::default().initial)]
    radius: f64,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Args, Debug, Serialize)]
struct AblateArgs {
    #[command(flatten)]
    blocks: BlockArgs,
    #[command(flatten)]
    search: SearchArgs,
    /// Comma-separated feature subsets over the letters A, S, R, C.
    #[arg(long, default_value = "ASRC,A,S,R,C")]
    subsets: String,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Args, Debug, Serialize)]
struct HdistArgs {
    /// Corpus and clusters to take h-indices from.
    #[arg(long, requires = "clusters")]
    corpus: Option<PathBuf>,
    #[arg(long)]
    clusters: Option<PathBuf>,
    /// Draw values from the model with this m instead of reading clusters.
    #[arg(long, conflicts_with = "corpus")]
    sample_m: Option<f64>,
    #[arg(long, default_value_t = 1_000_000)]
    draws: usize,
    #[arg(long, default_value_t = 7)]
    seed: u64,
    #[arg(long, default_value_t = hmodel::DEFAULT_LINEAR_UPTO)]
    linear_upto: u64,
    #[arg(long, default_value_t = hmodel::DEFAULT_BINS_PER_DECADE)]
    bins_per_decade: u32,
    #[arg(long, default_value_t = 2)]
    support_min: u64,
    /// Lower cutoff of the power-law reference tail.
    #[arg(long, default_value_t = 2.0)]
    pareto_hmin: f64,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Args, Debug, Serialize)]
struct CrossrefArgs {
    #[arg(long)]
    corpus: PathBuf,
    #[arg(long)]
    profiles: PathBuf,
    #[command(flatten)]
    out: OutArgs,
}

fn parse_key_mode(s: &str) -> Result<KeyMode, String> {
    s.parse().map_err(|e| format!("{e}"))
}

fn display<T: std::fmt::Display, S: serde::Serializer>(v: &T, s: S) -> Result<S::Ok, S::Error> {
    s.collect_str(v)
}

/// Record of one artifact-producing run, appended to `manifest.jsonl`.
#[derive(Serialize)]
struct RunManifest {
    command: &'static str,
    config: Value,
    seeds: Vec<u64>,
    inputs: Vec<InputDigest>,
    outputs: Vec<String>,
    wall_time_s: f64,
    /// Resident-set high-water mark, where the platform reports one.
    #[serde(skip_serializing_if = "Option::is_none")]
    peak_memory_kib: Option<u64>,
}

fn peak_memory_kib() -> Option<u64> {
    let status = fs::read_to_string("/proc/self/status").ok()?;
    let line = status.lines().find(|l| l.starts_with("VmHWM:"))?;
    line.split_whitespace().nth(1)?.parse().ok()
}

#[derive(Serialize)]
struct InputDigest {
    path: String,
    sha256: String,
}

fn sha256_file(path: &Path) -> Result<String> {
    let mut file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    let mut hasher = Sha256::new();
    let mut buf = vec![0u8; 1 << 16];
    loop {
        let n = file.read(&mut buf)?;
        if n == 0 {
            break;
        }
        hasher.update(&buf[..n]);
    }
    Ok(hex::encode(hasher.finalize()))
}

struct Run {
    command: &'static str,
    config: Value,
    seeds: Vec<u64>,
    inputs: Vec<PathBuf>,
    out_dir: PathBuf,
    started: Instant,
}

impl Run {
    fn new(command: &'static str, config: &impl Serialize, out: &OutArgs, inputs: Vec<PathBuf>) -> Result<Self> {
        for input in &inputs {
            if !input.is_file() {
                bail!("input file {} does not exist", input.display());
            }
        }
        fs::create_dir_all(&out.out).with_context(|| format!("creating {}", out.out.display()))?;
        Ok(Run {
            command,
            config: serde_json::to_value(config)?,
            seeds: Vec::new(),
            inputs,
            out_dir: out.out.clone(),
            started: Instant::now(),
        })
    }

    fn path(&self, name: &str) -> PathBuf {
        self.out_dir.join(name)
    }

    fn finish(self, outputs: &[PathBuf]) -> Result<()> {
        let inputs = self
            .inputs
            .iter()
            .map(|p| {
                Ok(InputDigest {
                    path: p.display().to_string(),
                    sha256: sha256_file(p)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let manifest = RunManifest {
            command: self.command,
            config: self.config,
            seeds: self.seeds,
            inputs,
            outputs: outputs.iter().map(|p| p.display().to_string()).collect(),
            wall_time_s: self.started.elapsed().as_secs_f64(),
            peak_memory_kib: peak_memory_kib(),
        };
        let path = self.out_dir.join("manifest.jsonl");
        let mut file = OpenOptions::new()
            .create(true)
            .append(true)
            .open(&path)
            .with_context(|| format!("opening {}", path.display()))?;
        serde_json::to_writer(&mut file, &manifest)?;
        file.write_all(b"\n")?;
        log::info!("{} finished in {:.2} s", manifest.command, manifest.wall_time_s);
        Ok(())
    }
}

fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    let mut out = BufWriter::new(File::create(path).with_context(|| format!("creating {}", path.display()))?);
    serde_json::to_writer_pretty(&mut out, value)?;
    out.write_all(b"\n")?;
    out.flush()?;
    Ok(())
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path).with_context(|| format!("creating {}", path.display()))?))
}

fn read_params(path: &Path) -> Result<DisambiguationParams> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    // accepts a bare parameter object or one carrying extra fields
    let params: DisambiguationParams =
        serde_json::from_str(&text).with_context(|| format!("parsing parameters in {}", path.display()))?;
    params.validate()?;
    Ok(params)
}

fn open_corpus(path: &Path) -> Result<Corpus> {
    let (corpus, report) = load_corpus(path).with_context(|| format!("loading {}", path.display()))?;
    log::info!("loaded {} papers ({report:?})", corpus.len());
    Ok(corpus)
}

fn open_profiles(corpus: &Corpus, path: &Path) -> Result<Vec<GoldProfile>> {
    let lines = load_profiles(path).with_context(|| format!("loading {}", path.display()))?;
    let (profiles, report) = resolve_profiles(corpus, &lines);
    log::info!("resolved {} profiles ({report:?})", profiles.len());
    Ok(profiles)
}

fn block_inputs(args: &BlockArgs) -> Vec<PathBuf> {
    let mut v = vec![args.corpus.clone()];
    v.extend(args.links.clone());
    v
}

fn eval_set<'c>(corpus: &'c Corpus, args: &BlockArgs, profiles: Vec<GoldProfile>) -> Result<EvalSet<'c>> {
    let blocks = build_blocks(corpus, args.key_mode);
    match &args.links {
        Some(path) => {
            let graphs = load_link_cache(path).with_context(|| format!("loading {}", path.display()))?;
            EvalSet::from_graphs(corpus, blocks, graphs, profiles).map_err(anyhow::Error::msg)
        }
        None => Ok(EvalSet::build(corpus, blocks, profiles, args.year_gap)),
    }
}

fn cmd_synth(args: &SynthArgs) -> Result<()> {
    let mut config: SynthConfig = match &args.config {
        Some(path) => serde_json::from_str(&fs::read_to_string(path)?)
            .with_context(|| format!("parsing {}", path.display()))?,
        None => SynthConfig::default(),
    };
    config.seed = args.seed;
    if let Some(n) = args.authors {
        config.authors = n;
    }
    if let Some(n) = args.surnames {
        config.surnames = n;
    }
    if let Some(mean) = args.papers_mean {
        config.papers_per_author = PapersPerAuthor::Exponential(mean);
    }
    config.noisy_profiles |= args.noisy_profiles;
    config.validate()?;
    let mut run = Run::new("synth", &config, &args.out, args.config.iter().cloned().collect())?;
    run.seeds.push(config.seed);
    let corpus = generate(&config)?;
    let outputs = corpus.write_to(&run.out_dir)?;
    log::info!("{} authors, {} papers", corpus.authors.len(), corpus.papers.len());
    run.finish(&outputs)
}

fn cmd_links(args: &LinksArgs) -> Result<()> {
    let run = Run::new("links", args, &args.out, block_inputs(&args.blocks))?;
    let corpus = open_corpus(&args.blocks.corpus)?;
    let blocks = build_blocks(&corpus, args.blocks.key_mode);
    let graphs = compute_all(&corpus, &blocks, args.blocks.year_gap);
    let path = run.path("links.jsonl");
    save_link_cache(&graphs, &path)?;
    run.finish(&[path])
}

fn cmd_disambiguate(args: &DisambiguateArgs) -> Result<()> {
    let params = match &args.params {
        Some(p) => read_params(p)?,
        None => DisambiguationParams::default(),
    };
    let mut inputs = block_inputs(&args.blocks);
    inputs.extend(args.params.clone());
    let run = Run::new("disambiguate", args, &args.out, inputs)?;
    let corpus = open_corpus(&args.blocks.corpus)?;
    let set = eval_set(&corpus, &args.blocks, Vec::new())?;
    let clusterings = set.cluster(&params);
    let path = run.path("clusters.jsonl");
    save_clusters(&clusterings, &path)?;
    log::info!(
        "{} blocks, {} clusters",
        clusterings.len(),
        clusterings.iter().map(Clustering::len).sum::<usize>()
    );
    run.finish(&[path])
}

fn cmd_validate(args: &ValidateArgs) -> Result<()> {
    let mut inputs = block_inputs(&args.blocks);
    inputs.push(args.clusters.clone());
    inputs.push(args.profiles.clone());
    inputs.extend(args.params.clone());
    let mut run = Run::new("validate", args, &args.out, inputs)?;
    let corpus = open_corpus(&args.blocks.corpus)?;
    let profiles = open_profiles(&corpus, &args.profiles)?;
    let clusterings = load_clusters(&args.clusters).with_context(|| format!("loading {}", args.clusters.display()))?;
    let blocks = build_blocks(&corpus, args.blocks.key_mode);
    let result = aggregate_errors(&clusterings, &blocks, &profiles, &corpus)?;
    let second = second_initial_precision(&clusterings, &blocks, &corpus);
    let mixing: Option<MixingReport> = if args.merged_pairs > 0 {
        let params = match &args.params {
            Some(p) => read_params(p)?,
            None => DisambiguationParams::default(),
        };
        run.seeds.push(args.seed);
        let pairs = sample_name_pairs(&blocks, args.merged_pairs, args.seed);
        Some(merged_name_test(&corpus, &pairs, &params, args.blocks.year_gap))
    } else {
        None
    };
    let path = run.path("metrics.jsonl");
    let mut out = create(&path)?;
    for c in &result.clusters {
        serde_json::to_writer(&mut out, &json!({"kind": "cluster", "block": c.block, "cluster_id": c.cluster_id, "size": c.size, "precision": c.precision}))?;
        out.write_all(b"\n")?;
    }
    for p in &result.profiles {
        serde_json::to_writer(&mut out, &json!({"kind": "profile", "profile_id": p.profile_id, "size": p.size, "gold_h": p.gold_h, "recall": p.recall, "h_recall": p.h_recall}))?;
        out.write_all(b"\n")?;
    }
    let summary = json!({
        "kind": "summary",
        "p_error": result.p_error,
        "rh_error": result.rh_error,
        "support": result.support,
        "second_initial": second,
        "mixing": mixing.as_ref().map(|m| json!({"report": m, "mixed_fraction": m.mixed_fraction()})),
    });
    serde_json::to_writer(&mut out, &summary)?;
    out.write_all(b"\n")?;
    out.flush()?;
    log::info!("p_error {:.4}, rh_error {:.4}", result.p_error, result.rh_error);
    run.finish(&[path])
}

#[derive(Serialize, Deserialize)]
struct BestParams {
    #[serde(flatten)]
    params: DisambiguationParams,
    p_error: f64,
    rh_error: f64,
    objective: f64,
    weight: f64,
    evaluations: usize,
    seed: u64,
}

fn check_search(args: &SearchArgs) -> Result<()> {
    if args.samples == 0 {
        bail!("--samples must be at least 1");
    }
    if !(0.0..=1.0).contains(&args.weight) {
        bail!("--weight must lie in [0, 1]");
    }
    Ok(())
}

fn cmd_optimize(args: &OptimizeArgs) -> Result<()> {
    check_search(&args.search)?;
    let mut inputs = block_inputs(&args.blocks);
    inputs.push(args.search.profiles.clone());
    let mut run = Run::new("optimize", args, &args.out, inputs)?;
    run.seeds.push(args.search.seed);
    let corpus = open_corpus(&args.blocks.corpus)?;
    let profiles = open_profiles(&corpus, &args.search.profiles)?;
    let set = eval_set(&corpus, &args.blocks, profiles)?;
    let space = ParamSpace::default();
    let sampled = random_search(&space, args.search.samples, args.search.seed, args.search.weight, &set);
    let mut best = best_of(&sampled).expect("at least one sample").clone();
    best.evaluations = sampled.len();
    log::info!("random search best objective {:.4}", best.objective);
    let mut trace = Vec::new();
    if !args.no_local {
        let schedule = RadiusSchedule {
            initial: args.radius,
            max_iterations: args.max_iterations,
            ..Default::default()
        };
        let (found, probes) = local_search_traced(&best, &space, &schedule, args.search.seed, &set);
        log::info!("local search objective {:.4}", found.objective);
        best = found;
        trace = probes;
    }
    let results_path = run.path("results.tsv");
    let mut out = create(&results_path)?;
    writeln!(out, "phase\t{RESULTS_HEADER}")?;
    write_results(&mut out, Some("random"), &sampled)?;
    write_results(&mut out, Some("local"), &trace)?;
    out.flush()?;
    let best_path = run.path("best_params.json");
    write_json(&best_path, &best_params(&best))?;
    run.finish(&[results_path, best_path])
}

fn best_params(r: &SearchResult) -> BestParams {
    BestParams {
        params: r.params,
        p_error: r.p_error,
        rh_error: r.rh_error,
        objective: r.objective,
        weight: r.weight,
        evaluations: r.evaluations,
        seed: r.seed,
    }
}

fn cmd_ablate(args: &AblateArgs) -> Result<()> {
    check_search(&args.search)?;
    let subsets = args
        .subsets
        .split(',')
        .map(|s| s.trim().parse::<FeatureSet>().map_err(anyhow::Error::msg))
        .collect::<Result<Vec<_>>>()?;
    let mut inputs = block_inputs(&args.blocks);
    inputs.push(args.search.profiles.clone());
    let mut run = Run::new("ablate", args, &args.out, inputs)?;
    run.seeds.push(args.search.seed);
    let corpus = open_corpus(&args.blocks.corpus)?;
    let profiles = open_profiles(&corpus, &args.search.profiles)?;
    let set = eval_set(&corpus, &args.blocks, profiles)?;
    let runs = ablate(
        &ParamSpace::default(),
        &subsets,
        args.search.samples,
        args.search.seed,
        args.search.weight,
        &set,
    );
    let table = run.path("ablation.tsv");
    let mut out = create(&table)?;
    writeln!(out, "subset\t{RESULTS_HEADER}")?;
    for r in &runs {
        write_results(&mut out, Some(&r.features.to_string()), &r.results)?;
    }
    out.flush()?;
    let hulls = run.path("hulls.tsv");
    let mut out = create(&hulls)?;
    writeln!(out, "subset\tp_error\trh_error")?;
    for r in &runs {
        for (p, rh) in &r.hull {
            writeln!(out, "{}\t{p}\t{rh}", r.features)?;
        }
    }
    out.flush()?;
    run.finish(&[table, hulls])
}

fn cmd_hdist(args: &HdistArgs) -> Result<()> {
    let inputs: Vec<PathBuf> = args.corpus.iter().chain(&args.clusters).cloned().collect();
    let mut run = Run::new("hdist", args, &args.out, inputs)?;
    let values: Vec<u64> = match (&args.corpus, &args.clusters, args.sample_m) {
        (Some(corpus), Some(clusters), None) => {
            let corpus = open_corpus(corpus)?;
            let clusterings = load_clusters(clusters)?;
            clusterings
                .iter()
                .flat_map(|c| &c.clusters)
                .map(|k| h_index_of(&k.paper_ids, &corpus) as u64)
                .collect()
        }
        (None, None, Some(m)) => {
            use rand::SeedableRng;
            run.seeds.push(args.seed);
            let model = HModel::new(m)?;
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(args.seed);
            (0..args.draws).map(|_| model.sample_integer(&mut rng)).collect()
        }
        _ => bail!("give either --corpus with --clusters, or --sample-m"),
    };
    let binned = log_bin(&values, args.linear_upto, args.bins_per_decade)?;
    let (model, report) = fit_m(&binned, args.support_min)?;
    let norm = model.ccdf(args.support_min as f64)?;
    let pareto_min = args.pareto_hmin;
    let cross = crossover(
        |h| model.ccdf(h).unwrap_or(0.0) / norm,
        |h| pareto_ccdf(h, pareto_min).unwrap_or(1.0),
        (pareto_min + 0.5, 1e4),
    );
    let bins_path = run.path("hdist_bins.tsv");
    let mut out = create(&bins_path)?;
    writeln!(out, "lo\thi\tmass\tfit_empirical\tfit_model")?;
    for i in 0..binned.bins() {
        let (lo, hi, mass) = binned.bin(i);
        match report.bins.iter().find(|b| b.lo == lo) {
            Some(b) => writeln!(out, "{lo}\t{hi}\t{mass}\t{}\t{}", b.empirical, b.model)?,
            None => writeln!(out, "{lo}\t{hi}\t{mass}\t\t")?,
        }
    }
    out.flush()?;
    let fit_path = run.path("hdist_fit.json");
    write_json(
        &fit_path,
        &json!({
            "values": values.len(),
            "fit": report,
            "pareto_hmin": pareto_min,
            "crossover": cross.as_ref().ok(),
            "crossover_error": cross.as_ref().err().map(|e| e.to_string()),
        }),
    )?;
    run.finish(&[bins_path, fit_path])
}

fn cmd_crossref(args: &CrossrefArgs) -> Result<()> {
    let run = Run::new("crossref", args, &args.out, vec![args.corpus.clone(), args.profiles.clone()])?;
    let corpus = open_corpus(&args.corpus)?;
    let lines = load_profiles(&args.profiles)?;
    let (profiles, report) = resolve_profiles(&corpus, &lines);
    let resolved_path = run.path("profiles_resolved.jsonl");
    write_jsonl(
        &resolved_path,
        profiles.iter().map(|p| ProfileLine::Resolved {
            profile_id: p.profile_id.clone(),
            surname: p.surname.clone(),
            paper_ids: p.paper_ids.iter().copied().collect(),
        }),
    )?;
    let report_path = run.path("crossref_report.json");
    write_json(&report_path, &report)?;
    run.finish(&[resolved_path, report_path])
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .target(env_logger::Target::Stderr)
        .init();
    let cli = Cli::parse();
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(cli.threads).build() {
        Ok(pool) => pool,
        Err(e) => {
            eprintln!("error: thread pool: {e}");
            return ExitCode::FAILURE;
        }
    };
    let result = pool.install(|| match &cli.command {
        Command::Synth(a) => cmd_synth(a),
        Command::Links(a) => cmd_links(a),
        Command::Disambiguate(a) => cmd_disambiguate(a),
        Command::Validate(a) => cmd_validate(a),
        Command::Optimize(a) => cmd_optimize(a),
        Command::Ablate(a) => cmd_ablate(a),
        Command::Hdist(a) => cmd_hdist(a),
        Command::Crossref(a) => cmd_crossref(a),
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
