use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use pprl_cli::bench::{render_table, run_bench};
use pprl_cli::config::{load_config, parse_disclosure, parse_seed, sample_config_json};
use pprl_cli::eval::evaluate;
use pprl_cli::records::{
    read_records, read_scores, read_truth, write_records, write_scores, write_truth, ScoreRow,
};
use pprl_cli::synth::{synthesize, SynthSpec};
use pprl_linkage::{best_match_plain, encode_record, EncodedRecord};
use pprl_net::{MeshRole, NetPreset};
use pprl_protocol::{spawn_party, ClientSession, PartySpec};
use pprl_ring::{RandomStream, StreamPair};
use std::path::PathBuf;

/// Privacy-preserving record linkage over three-party secret sharing.
#[derive(Parser)]
#[command(name = "pprl", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one of the three computation parties.
    Party {
        /// p0, p1 or helper.
        #[arg(long)]
        role: String,
        #[arg(long, default_value = "127.0.0.1:0")]
        listen: String,
        /// P1's address (required for p0).
        #[arg(long)]
        p1: Option<String>,
        /// Helper's address (required for proxies).
        #[arg(long)]
        helper: Option<String>,
        #[arg(long)]
        config: PathBuf,
        /// a, b, c or off.
        #[arg(long, default_value = "off")]
        net_preset: String,
        #[arg(long)]
        quiet: bool,
    },
    /// Secret-share a record file and upload it to the two proxies.
    Upload {
        #[arg(long)]
        p0: String,
        #[arg(long)]
        p1: String,
        #[arg(long)]
        records: PathBuf,
        #[arg(long, default_value_t = 0)]
        owner: u64,
        /// Replace the proxies' database instead of appending.
        #[arg(long)]
        reset: bool,
        /// Hex masking seed; fresh randomness when omitted.
        #[arg(long)]
        seed: Option<String>,
    },
    /// Run linkage sessions for each record in a file and print the results.
    Query {
        #[arg(long)]
        p0: String,
        #[arg(long)]
        p1: String,
        #[arg(long)]
        records: PathBuf,
        #[arg(long)]
        config: PathBuf,
        /// Override the config's disclosure mode: bit, index or full.
        #[arg(long)]
        disclosure: Option<String>,
        #[arg(long)]
        seed: Option<String>,
    },
    /// Generate two synthetic record sets with ground truth.
    Synth {
        #[arg(long)]
        out_a: PathBuf,
        #[arg(long)]
        out_b: PathBuf,
        #[arg(long)]
        truth: PathBuf,
        #[arg(long, default_value_t = 1000)]
        size: usize,
        #[arg(long, default_value_t = 0.6)]
        overlap: f64,
        #[arg(long, default_value_t = 0.10)]
        corruption: f64,
        #[arg(long, default_value_t = 2)]
        max_errors: usize,
        #[arg(long, default_value_t = 0.60)]
        birth_name_omit: f64,
        #[arg(long, default_value_t = 0.10)]
        group_shuffle: f64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Plaintext best-match linkage of a query set against a database,
    /// writing one score row per query (no threshold applied).
    Link {
        #[arg(long)]
        queries: PathBuf,
        #[arg(long)]
        db: PathBuf,
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Error counts and ROC AUC of score rows against ground truth.
    Eval {
        #[arg(long)]
        scores: PathBuf,
        #[arg(long)]
        truth: PathBuf,
        /// Comma-separated threshold list.
        #[arg(long, default_value = "0.60,0.65,0.70,0.75,0.80,0.85")]
        thresholds: String,
        /// Write the per-threshold table as CSV.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Single-query benchmark across database sizes on a self-hosted mesh.
    Bench {
        #[arg(long, default_value = "100,250,1000")]
        sizes: String,
        #[arg(long, default_value = "off")]
        net_preset: String,
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value_t = 7)]
        data_seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print a ready-to-edit sample configuration.
    SampleConfig,
}

fn owner_stream(seed: &Option<String>) -> Result<RandomStream> {
    let key = match seed {
        Some(s) => parse_seed(s)?,
        None => rand::random(),
    };
    Ok(RandomStream::new(key, StreamPair::Owner))
}

fn encode_all(records: &[pprl_linkage::RawRecord]) -> Result<Vec<EncodedRecord>> {
    records
        .iter()
        .enumerate()
        .map(|(i, r)| {
            encode_record(r).with_context(|| format!("record {i} failed validation"))
        })
        .collect()
}

fn parse_preset(s: &str) -> Result<NetPreset> {
    NetPreset::parse(s).ok_or_else(|| anyhow::anyhow!("unknown net preset '{s}'"))
}

fn parse_list<T: std::str::FromStr>(s: &str) -> Result<Vec<T>>
where
    T::Err: std::fmt::Display,
{
    s.split(',')
        .map(|part| {
            part.trim()
                .parse::<T>()
                .map_err(|e| anyhow::anyhow!("bad list entry '{part}': {e}"))
        })
        .collect()
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Party {
            role,
            listen,
            p1,
            helper,
            config,
            net_preset,
            quiet,
        } => {
            let (_, master_seed) = load_config(&config)?;
            let role = match role.to_ascii_lowercase().as_str() {
                "p0" => MeshRole::P0,
                "p1" => MeshRole::P1,
                "helper" => MeshRole::Helper,
                other => bail!("unknown role '{other}' (use p0, p1 or helper)"),
            };
            let handle = spawn_party(PartySpec {
                role,
                listen,
                p1_addr: p1,
                helper_addr: helper,
                master_seed,
                preset: parse_preset(&net_preset)?,
                verbose: !quiet,
            })
            .map_err(|e| anyhow::anyhow!("party startup: {e}"))?;
            println!("{role:?} listening on {}", handle.local_addr);
            loop {
                std::thread::park();
            }
        }
        Command::Upload {
            p0,
            p1,
            records,
            owner,
            reset,
            seed,
        } => {
            let raw = read_records(&records)?;
            let encoded = encode_all(&raw)?;
            let client = ClientSession::connect(&p0, &p1)
                .map_err(|e| anyhow::anyhow!("connecting: {e}"))?;
            let mut stream = owner_stream(&seed)?;
            client
                .upload_db(&encoded, owner, reset, &mut stream)
                .map_err(|e| anyhow::anyhow!("upload: {e}"))?;
            println!(
                "uploaded {} records as owner {owner}{}",
                encoded.len(),
                if reset { " (reset)" } else { "" }
            );
            Ok(())
        }
        Command::Query {
            p0,
            p1,
            records,
            config,
            disclosure,
            seed,
        } => {
            let (mut cfg, _) = load_config(&config)?;
            if let Some(d) = disclosure {
                cfg.disclosure = parse_disclosure(&d)?;
            }
            let raw = read_records(&records)?;
            let encoded = encode_all(&raw)?;
            let client = ClientSession::connect(&p0, &p1)
                .map_err(|e| anyhow::anyhow!("connecting: {e}"))?;
            let mut stream = owner_stream(&seed)?;
            for (i, record) in encoded.iter().enumerate() {
                let outcome = client
                    .query(&cfg, record, &mut stream)
                    .map_err(|e| anyhow::anyhow!("query {i}: {e}"))?;
                let mut line = format!(
                    "query {i}: {}",
                    if outcome.matched { "MATCH" } else { "NO MATCH" }
                );
                if let Some(index) = outcome.index {
                    line.push_str(&format!(" index={index}"));
                }
                if let Some(score) = outcome.score {
                    line.push_str(&format!(
                        " score={}/{} ({:.4})",
                        score.numerator,
                        score.denominator,
                        score.value()
                    ));
                }
                println!("{line}");
            }
            Ok(())
        }
        Command::Synth {
            out_a,
            out_b,
            truth,
            size,
            overlap,
            corruption,
            max_errors,
            birth_name_omit,
            group_shuffle,
            seed,
        } => {
            if !(0.0..=1.0).contains(&overlap) {
                bail!("overlap must be in [0, 1]");
            }
            let spec = SynthSpec {
                size,
                overlap,
                corruption_prob: corruption,
                max_errors,
                birth_name_omit,
                group_shuffle,
                seed,
            };
            let (a, b, t) = synthesize(&spec);
            write_records(&out_a, &a)?;
            write_records(&out_b, &b)?;
            write_truth(&truth, &t)?;
            println!(
                "wrote {size} + {size} records with {} shared entities",
                t.iter().filter(|x| x.is_some()).count()
            );
            Ok(())
        }
        Command::Link {
            queries,
            db,
            config,
            out,
        } => {
            let (cfg, _) = load_config(&config)?;
            let query_records = encode_all(&read_records(&queries)?)?;
            let db_records = encode_all(&read_records(&db)?)?;
            let mut rows = Vec::with_capacity(query_records.len());
            for (i, q) in query_records.iter().enumerate() {
                let (index, score, _) = best_match_plain(q, &db_records, &cfg)?;
                rows.push(ScoreRow {
                    query_id: i as u64,
                    index: index as u64,
                    numerator: score.numerator,
                    denominator: score.denominator,
                });
            }
            write_scores(&out, &rows)?;
            println!("scored {} queries against {} records", rows.len(), db_records.len());
            Ok(())
        }
        Command::Eval {
            scores,
            truth,
            thresholds,
            out,
        } => {
            let scores = read_scores(&scores)?;
            let truth = read_truth(&truth)?;
            let taus: Vec<f64> = parse_list(&thresholds)?;
            let report = evaluate(&scores, &truth, &taus);
            println!("tau\tFP\tFN\ttotal");
            for row in &report.rows {
                println!(
                    "{:.2}\t{}\t{}\t{}",
                    row.tau,
                    row.false_positives,
                    row.false_negatives,
                    row.total()
                );
            }
            println!(
                "best tau {:.4}: FP={} FN={} total={} of {} queries",
                report.best_tau,
                report.best_errors.false_positives,
                report.best_errors.false_negatives,
                report.best_errors.total(),
                report.queries
            );
            println!("ROC AUC = {:.4}", report.auc);
            if let Some(path) = out {
                let mut writer = csv::Writer::from_path(&path)?;
                writer.write_record(["tau", "fp", "fn", "total"])?;
                for row in &report.rows {
                    writer.write_record([
                        format!("{:.4}", row.tau),
                        row.false_positives.to_string(),
                        row.false_negatives.to_string(),
                        row.total().to_string(),
                    ])?;
                }
                writer.flush()?;
            }
            Ok(())
        }
        Command::Bench {
            sizes,
            net_preset,
            config,
            data_seed,
            out,
        } => {
            let (cfg, master_seed) = load_config(&config)?;
            let sizes: Vec<usize> = parse_list(&sizes)?;
            let rows = run_bench(&sizes, parse_preset(&net_preset)?, &cfg, master_seed, data_seed)?;
            print!("{}", render_table(&rows));
            if let Some(path) = out {
                let mut writer = csv::Writer::from_path(&path)?;
                writer.write_record(["size", "seconds", "bytes"])?;
                for row in &rows {
                    writer.write_record([
                        row.size.to_string(),
                        format!("{:.4}", row.wall.as_secs_f64()),
                        row.bytes.to_string(),
                    ])?;
                }
                writer.flush()?;
            }
            Ok(())
        }
        Command::SampleConfig => {
            println!("{}", sample_config_json());
            Ok(())
        }
    }
}
