//! Command-line surface for the three-qubit KS-set engine: catalog
//! inspection, seed search, transformation, enumeration, verification, and
//! orthogonality-graph export.
//!
//! Exit codes: 0 success, 1 verification failure, 2 invalid input.

use std::collections::BTreeSet;
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use kset_core::{
    enumerate_matchings, enumerate_transforms, find_seed_sets, gammas, matching_from_pairs,
    transform, validate_catalog, verify, BasisId, Catalog, EnumerateOptions, KsSet, KsSetDoc,
    SkippedPool, StepChoice,
};

mod graph;

#[derive(Parser)]
#[command(
    name = "kset",
    version,
    about = "Kochen-Specker sets for three qubits: search, transform, verify"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Worker threads for the seed search (default: $KSET_WORKERS, else all cores)
    #[arg(long, global = true)]
    workers: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Print the 40 catalog rays
    Rays {
        #[arg(long, value_enum, default_value_t = TableFormat::Text)]
        format: TableFormat,
    },
    /// Print the 25 catalog bases
    Bases {
        #[arg(long, value_enum, default_value_t = TableFormat::Text)]
        format: TableFormat,
    },
    /// Search the 25 bases for all 15-basis seed KS sets
    Seek {
        #[arg(long, value_enum, default_value_t = SeekFormat::Text)]
        format: SeekFormat,
    },
    /// Apply the five-step transformation to a seed with explicit choices
    Transform {
        #[command(flatten)]
        seed: SeedSelector,
        /// Five specs "step:i;match:g1>p1,g2>p2,g3>p3,g4>p4;r3:yes|no"
        /// (repeat the flag or separate the specs with whitespace)
        #[arg(long, required = true, num_args = 1..)]
        choices: Vec<String>,
        #[arg(long, value_enum, default_value_t = SetFormat::Json)]
        format: SetFormat,
    },
    /// Enumerate every transformation of a seed
    Enumerate {
        #[command(flatten)]
        seed: SeedSelector,
        /// Steps (of 2..=5) at which rule 3 is not applied, e.g. "2,4"
        #[arg(long)]
        skip: Option<String>,
        /// Draw skipped steps from all 9 matchings instead of the 6
        /// rule-3-incompatible ones
        #[arg(long)]
        all_matchings: bool,
        /// Allow step 1 in --skip
        #[arg(long)]
        allow_skip_step1: bool,
        #[arg(long, value_enum, default_value_t = EnumFormat::Jsonl)]
        format: EnumFormat,
    },
    /// Verify a set: structure, parity proof, colorability
    Verify {
        #[command(flatten)]
        source: VerifySource,
        #[arg(long, value_enum, default_value_t = ReportFormat::Text)]
        format: ReportFormat,
    },
    /// Export the ray orthogonality graph
    Export {
        #[arg(long, value_enum, default_value_t = GraphFormat::Dot)]
        format: GraphFormat,
    },
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct SeedSelector {
    /// Seed by 1-based index into the 64 search results
    #[arg(long)]
    seed_index: Option<usize>,
    /// Seed by explicit basis list, e.g. "1,2,3,4,5,6,7,8,10,14,15,16,20,22,24"
    #[arg(long)]
    seed_bases: Option<String>,
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct VerifySource {
    /// The full 25-basis catalog
    #[arg(long)]
    catalog: bool,
    /// Seed by 1-based index into the 64 search results
    #[arg(long)]
    seed_index: Option<usize>,
    /// Seed by explicit basis list
    #[arg(long)]
    seed_bases: Option<String>,
    /// A KS-set JSON document
    #[arg(long)]
    input: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum TableFormat {
    Text,
    Json,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SeekFormat {
    Text,
    Json,
    Jsonl,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SetFormat {
    Text,
    Json,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum EnumFormat {
    /// Census summary only
    Text,
    /// One KS-set JSON document per line
    Jsonl,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ReportFormat {
    Text,
    Json,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum GraphFormat {
    Dot,
}

fn main() -> ExitCode {
    // die quietly when the output pipe closes (e.g. `kset seek | head`)
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    let workers = resolve_workers(cli.workers);
    match cli.command {
        Command::Rays { format } => {
            let catalog = Catalog::kernaghan_peres();
            match format {
                TableFormat::Text => print!("{}", catalog.rays_text()),
                TableFormat::Json => {
                    let rays: Vec<serde_json::Value> = catalog
                        .rays()
                        .iter()
                        .map(|r| {
                            serde_json::json!({
                                "index": r.index().map(|i| i.get()),
                                "coords": r.coords(),
                                "text": r.to_string(),
                            })
                        })
                        .collect();
                    println!("{}", serde_json::to_string_pretty(&rays)?);
                }
            }
        }
        Command::Bases { format } => {
            let catalog = Catalog::kernaghan_peres();
            match format {
                TableFormat::Text => print!("{}", catalog.bases_text()),
                TableFormat::Json => {
                    let bases: Vec<serde_json::Value> = catalog
                        .bases()
                        .iter()
                        .map(|b| {
                            serde_json::json!({
                                "index": b.index().get(),
                                "kind": b.kind(),
                                "rays": b.ray_set().iter().map(|r| r.get()).collect::<Vec<u8>>(),
                            })
                        })
                        .collect();
                    println!("{}", serde_json::to_string_pretty(&bases)?);
                }
            }
        }
        Command::Seek { format } => {
            let catalog = validated_catalog()?;
            let seeds = find_seed_sets(&catalog, workers);
            match format {
                SeekFormat::Text => {
                    for (i, seed) in seeds.iter().enumerate() {
                        let ids: Vec<String> = seed
                            .basis_ids()
                            .iter()
                            .map(|b| b.get().to_string())
                            .collect();
                        println!("{}: {}", i + 1, ids.join(" "));
                    }
                }
                SeekFormat::Json => {
                    let docs: Vec<KsSetDoc> = seeds.iter().map(KsSet::to_doc).collect();
                    println!("{}", serde_json::to_string_pretty(&docs)?);
                }
                SeekFormat::Jsonl => {
                    for seed in &seeds {
                        println!("{}", seed.to_json_line());
                    }
                }
            }
        }
        Command::Transform {
            seed,
            choices,
            format,
        } => {
            let catalog = validated_catalog()?;
            let seed = resolve_seed(&catalog, &seed, workers)?;
            let choices = resolve_choices(&seed, &choices)?;
            let set = transform(&catalog, &seed, &choices)?;
            match format {
                SetFormat::Text => println!("{set}"),
                SetFormat::Json => println!("{}", set.to_json_pretty()),
            }
        }
        Command::Enumerate {
            seed,
            skip,
            all_matchings,
            allow_skip_step1,
            format,
        } => {
            let catalog = validated_catalog()?;
            let seed = resolve_seed(&catalog, &seed, workers)?;
            let options = EnumerateOptions {
                skip_steps: parse_skip(skip.as_deref())?,
                skipped_pool: if all_matchings {
                    SkippedPool::AllMatchings
                } else {
                    SkippedPool::IncompatibleOnly
                },
                allow_skip_step1,
            };
            let enumeration = enumerate_transforms(&catalog, &seed, &options)?;
            let skipped = enumeration.n_r3_skipped();
            match format {
                EnumFormat::Jsonl => {
                    let mut n_ks = 0usize;
                    let mut rank_counts = (0usize, 0usize);
                    for set in enumeration {
                        println!("{}", set.to_json_line());
                        rank_counts = set.census().rank_counts();
                        n_ks += 1;
                    }
                    eprintln!(
                        "sets: {n_ks}; rule-3 skipped at {skipped} steps; rank-2 per set: {}; rank-1 per set: {}",
                        rank_counts.1, rank_counts.0
                    );
                }
                EnumFormat::Text => {
                    let census = enumeration.census();
                    println!(
                        "sets: {}; rule-3 skipped at {} steps; rank-2 per set: {}; rank-1 per set: {}",
                        census.n_ks, census.n_r3_skipped, census.n_rank2, census.n_rank1
                    );
                }
            }
        }
        Command::Verify { source, format } => {
            let catalog = validated_catalog()?;
            let set = resolve_verify_source(&catalog, &source, workers)?;
            let report = verify(&catalog, &set);
            match format {
                ReportFormat::Text => println!("{report}"),
                ReportFormat::Json => println!("{}", serde_json::to_string_pretty(&report)?),
            }
            if !report.passed() {
                return Ok(ExitCode::from(1));
            }
        }
        Command::Export { format } => {
            let catalog = validated_catalog()?;
            let graph = graph::orthogonality_graph(&catalog);
            match format {
                GraphFormat::Dot => print!("{}", graph.to_dot()),
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn resolve_workers(flag: Option<usize>) -> usize {
    let from_env = || {
        std::env::var("KSET_WORKERS")
            .ok()
            .and_then(|v| v.parse::<usize>().ok())
    };
    let fallback = || {
        std::thread::available_parallelism()
            .map(|n| n.get())
            .unwrap_or(1)
    };
    flag.or_else(from_env).unwrap_or_else(fallback).max(1)
}

fn validated_catalog() -> Result<Catalog> {
    let catalog = Catalog::kernaghan_peres();
    let report = validate_catalog(&catalog);
    if !report.is_ok() {
        bail!("catalog validation failed:\n{report}");
    }
    Ok(catalog)
}

fn parse_basis_list(list: &str) -> Result<Vec<BasisId>> {
    list.split(',')
        .map(|tok| {
            let n: u8 = tok
                .trim()
                .parse()
                .with_context(|| format!("bad basis index {tok:?} in --seed-bases"))?;
            Ok(BasisId::new(n))
        })
        .collect()
}

fn resolve_seed(catalog: &Catalog, selector: &SeedSelector, workers: usize) -> Result<KsSet> {
    if let Some(index) = selector.seed_index {
        let seeds = find_seed_sets(catalog, workers);
        if index == 0 || index > seeds.len() {
            bail!(
                "unknown seed index {index}: the search yields {} seeds",
                seeds.len()
            );
        }
        return Ok(seeds[index - 1].clone());
    }
    let list = selector
        .seed_bases
        .as_deref()
        .expect("clap enforces one selector");
    let ids = parse_basis_list(list)?;
    Ok(KsSet::from_basis_ids(catalog, &ids)?)
}

fn resolve_verify_source(
    catalog: &Catalog,
    source: &VerifySource,
    workers: usize,
) -> Result<KsSet> {
    if source.catalog {
        let all: Vec<BasisId> = catalog.bases().iter().map(|b| b.index()).collect();
        return Ok(KsSet::from_basis_ids(catalog, &all)?);
    }
    if let Some(path) = &source.input {
        let text =
            fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
        let doc: KsSetDoc = serde_json::from_str(&text)
            .with_context(|| format!("{} is not a KS-set document", path.display()))?;
        return Ok(KsSet::from_doc(catalog, &doc)?);
    }
    resolve_seed(
        catalog,
        &SeedSelector {
            seed_index: source.seed_index,
            seed_bases: source.seed_bases.clone(),
        },
        workers,
    )
}

fn parse_skip(skip: Option<&str>) -> Result<BTreeSet<usize>> {
    let Some(skip) = skip else {
        return Ok(BTreeSet::new());
    };
    skip.split(',')
        .map(|tok| {
            tok.trim()
                .parse::<usize>()
                .with_context(|| format!("bad step {tok:?} in --skip"))
        })
        .collect()
}

/// Parse and validate the five choice specs
/// ("step:i;match:g1>p1,...;r3:yes|no") against the seed's candidates.
fn resolve_choices(seed: &KsSet, specs: &[String]) -> Result<[StepChoice; 5]> {
    let parts: Vec<String> = specs
        .iter()
        .flat_map(|s| s.split_whitespace())
        .map(str::to_string)
        .collect();
    if parts.len() != 5 {
        bail!("expected 5 choice specs, got {}", parts.len());
    }
    let gs = gammas(seed)?;
    let mut out: Vec<Option<StepChoice>> = vec![None; 5];
    for part in &parts {
        let (step, pairs, apply_r3) = parse_choice_spec(part)?;
        if !(1..=5).contains(&step) {
            bail!("choice step {step} outside 1..=5");
        }
        if out[step - 1].is_some() {
            bail!("duplicate choice spec for step {step}");
        }
        let wanted = matching_from_pairs(&pairs);
        let candidates = enumerate_matchings(seed, &gs[step - 1])?;
        let candidate = candidates
            .iter()
            .find(|c| c.matching == wanted)
            .with_context(|| format!("step {step}: matching is not a rule-2 candidate"))?;
        out[step - 1] = Some(candidate.to_choice(step, apply_r3)?);
    }
    let choices: Vec<StepChoice> = out.into_iter().map(|c| c.expect("all steps set")).collect();
    Ok(choices.try_into().expect("five choices"))
}

type ParsedChoice = (usize, [(u8, u8); 4], bool);

fn parse_choice_spec(spec: &str) -> Result<ParsedChoice> {
    let mut step = None;
    let mut pairs: Option<Vec<(u8, u8)>> = None;
    let mut apply_r3 = None;
    for field in spec.split(';') {
        let (key, value) = field
            .split_once(':')
            .with_context(|| format!("malformed choice field {field:?}"))?;
        match key.trim() {
            "step" => {
                step = Some(
                    value
                        .trim()
                        .parse::<usize>()
                        .with_context(|| format!("bad step number {value:?}"))?,
                )
            }
            "match" => {
                let parsed = value
                    .split(',')
                    .map(|pair| {
                        let (g, p) = pair
                            .split_once('>')
                            .with_context(|| format!("malformed pair {pair:?} (want g>p)"))?;
                        Ok((
                            g.trim().parse::<u8>().context("bad ray index")?,
                            p.trim().parse::<u8>().context("bad ray index")?,
                        ))
                    })
                    .collect::<Result<Vec<(u8, u8)>>>()?;
                pairs = Some(parsed);
            }
            "r3" => {
                apply_r3 = Some(match value.trim() {
                    "yes" => true,
                    "no" => false,
                    other => bail!("r3 must be yes or no, got {other:?}"),
                })
            }
            other => bail!("unknown choice field {other:?}"),
        }
    }
    let step = step.context("choice spec is missing step:")?;
    let pairs = pairs.context("choice spec is missing match:")?;
    let apply_r3 = apply_r3.context("choice spec is missing r3:")?;
    let pairs: [(u8, u8); 4] = pairs
        .try_into()
        .map_err(|v: Vec<_>| anyhow::anyhow!("expected 4 pairs, got {}", v.len()))?;
    Ok((step, pairs, apply_r3))
}
