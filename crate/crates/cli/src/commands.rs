use std::io::Write;
use std::path::Path;
use std::time::Instant;

use anyhow::{bail, Context, Result};

use deltacom_core::baselines::{label_propagation, louvain, DetectorConfig};
use deltacom_core::engine::{read_dendrogram, write_dendrogram};
use deltacom_core::graph::{
    load_edge_list, open_text, write_affiliations, write_edge_list,
};
use deltacom_core::matching::{
    cumulative_distribution, mean_recall, read_fit_csv, read_match_results_csv, recall_r1,
    recall_r2, recall_r3, size_resolution_regression, write_cdf_csv, write_fit_csv,
    write_match_results_csv, GroundTruth, MatchResult,
};
use deltacom_core::partition::write_partition;
use deltacom_core::preprocess;
use deltacom_core::stats::degree_stats;
use deltacom_core::synth::{
    generate, write_decoration_manifest, write_ground_truth_manifest, SynthSpec,
};
use deltacom_core::deltacom;

use crate::manifest::Manifest;
use crate::outdir::OutputDir;
use crate::{Command, GlobalArgs, Method, Mode};

pub fn run(command: Command, global: &GlobalArgs) -> Result<()> {
    let started = Instant::now();
    let mut out = OutputDir::create(&global.output_dir)?;
    let manifest = match &command {
        Command::Stats {
            graph,
            affiliations,
            k_min,
        } => cmd_stats(&mut out, global, graph, affiliations.as_deref(), *k_min)?,
        Command::Preprocess {
            graph,
            affiliations,
            k,
            iterate,
        } => cmd_preprocess(&mut out, global, graph, affiliations, *k, *iterate)?,
        Command::Detect {
            graph,
            method,
            max_sweeps,
        } => cmd_detect(&mut out, global, graph, *method, *max_sweeps)?,
        Command::Match {
            ground_truth,
            mode,
            partition,
            dendrogram,
            sample_fraction,
            fit_from,
            min_size,
        } => cmd_match(
            &mut out,
            global,
            ground_truth,
            *mode,
            partition.as_deref(),
            dendrogram.as_deref(),
            *sample_fraction,
            fit_from.as_deref(),
            *min_size,
        )?,
        Command::Regress { results, min_size } => {
            cmd_regress(&mut out, global, results, *min_size)?
        }
        Command::Synth { spec } => cmd_synth(&mut out, global, spec)?,
    };
    manifest.write(&mut out, started.elapsed())?;
    out.commit();
    Ok(())
}

fn cmd_stats(
    out: &mut OutputDir,
    global: &GlobalArgs,
    graph_path: &Path,
    affiliations: Option<&Path>,
    k_min: u32,
) -> Result<Manifest> {
    let (graph, aff, load) = load_edge_list(graph_path, affiliations)?;
    let stats = degree_stats(&graph, k_min);

    stats.write_degree_histogram_csv(&mut *out.create_file("degree_histogram.csv")?)?;
    stats.write_clustering_histogram_csv(&mut *out.create_file("clustering_histogram.csv")?)?;
    stats.write_clustering_by_degree_csv(&mut *out.create_file("clustering_by_degree.csv")?)?;
    stats.write_neighbor_degree_csv(&mut *out.create_file("neighbor_degree_by_degree.csv")?)?;

    let mut summary = out.create_file("stats_summary.txt")?;
    writeln!(summary, "nodes={}", graph.node_count())?;
    writeln!(summary, "edges={}", graph.edge_count())?;
    match stats.alpha {
        Some(alpha) => writeln!(summary, "power_law_alpha={alpha:.6}")?,
        None => writeln!(summary, "power_law_alpha=unfitted")?,
    }
    writeln!(summary, "power_law_k_min={k_min}")?;
    writeln!(summary, "affiliation_coverage={:.6}", aff.coverage())?;
    writeln!(summary, "duplicate_edges_dropped={}", load.duplicate_edges_dropped)?;
    writeln!(summary, "self_loops_dropped={}", load.self_loops_dropped)?;
    writeln!(summary, "affiliations_skipped={}", load.affiliations_skipped)?;
    drop(summary);

    let mut manifest = Manifest::new("stats", global.seed, global.threads);
    manifest.input("graph", graph_path);
    if let Some(path) = affiliations {
        manifest.input("affiliations", path);
    }
    manifest.param("k_min", k_min);
    Ok(manifest)
}

fn cmd_preprocess(
    out: &mut OutputDir,
    global: &GlobalArgs,
    graph_path: &Path,
    affiliations: &Path,
    k: u32,
    iterate: bool,
) -> Result<Manifest> {
    let (graph, aff, _) = load_edge_list(graph_path, Some(affiliations))?;
    let (cleaned, cleaned_aff, report) = preprocess::clean(&graph, &aff, k, iterate);

    write_edge_list(&cleaned, &mut *out.create_file("cleaned.edges")?)?;
    write_affiliations(&cleaned, &cleaned_aff, &mut *out.create_file("cleaned.aff")?)?;
    report.write_text(&mut *out.create_file("report.txt")?)?;
    report.write_taxonomy_csv(&mut *out.create_file("taxonomy.csv")?)?;

    let mut manifest = Manifest::new("preprocess", global.seed, global.threads);
    manifest.input("graph", graph_path);
    manifest.input("affiliations", affiliations);
    manifest.param("k", k);
    manifest.param("iterate", iterate);
    Ok(manifest)
}

fn cmd_detect(
    out: &mut OutputDir,
    global: &GlobalArgs,
    graph_path: &Path,
    method: Method,
    max_sweeps: u32,
) -> Result<Manifest> {
    let (graph, _, _) = load_edge_list(graph_path, None)?;
    let method_name = match method {
        Method::Deltacom => {
            let dendrogram = deltacom(&graph)?;
            write_dendrogram(&dendrogram, &graph, &mut *out.create_file("dendrogram.txt")?)?;
            // The classical-modularity slice comes along for free.
            let labels = dendrogram.labels_at(1.0);
            write_partition(&graph, &labels, &mut *out.create_file("partition_t1.txt")?)?;
            "deltacom"
        }
        Method::Louvain => {
            let cfg = DetectorConfig {
                seed: global.seed,
                max_sweeps,
            };
            let (state, q) = louvain(&graph, &cfg)?;
            write_partition(&graph, state.community_of(), &mut *out.create_file("partition.txt")?)?;
            let mut summary = out.create_file("detect_summary.txt")?;
            writeln!(summary, "method=louvain")?;
            writeln!(summary, "communities={}", state.community_count())?;
            writeln!(summary, "modularity={q:.9}")?;
            "louvain"
        }
        Method::Lpm => {
            let cfg = DetectorConfig {
                seed: global.seed,
                max_sweeps,
            };
            let state = label_propagation(&graph, &cfg)?;
            write_partition(&graph, state.community_of(), &mut *out.create_file("partition.txt")?)?;
            let mut summary = out.create_file("detect_summary.txt")?;
            writeln!(summary, "method=lpm")?;
            writeln!(summary, "communities={}", state.community_count())?;
            "lpm"
        }
    };

    let mut manifest = Manifest::new("detect", global.seed, global.threads);
    manifest.input("graph", graph_path);
    manifest.param("method", method_name);
    manifest.param("max_sweeps", max_sweeps);
    Ok(manifest)
}

#[allow(clippy::too_many_arguments)]
fn cmd_match(
    out: &mut OutputDir,
    global: &GlobalArgs,
    ground_truth: &Path,
    mode: Mode,
    partition: Option<&Path>,
    dendrogram: Option<&Path>,
    sample_fraction: f64,
    fit_from: Option<&Path>,
    min_size: u32,
) -> Result<Manifest> {
    let results: Vec<MatchResult> = match mode {
        Mode::R1 => {
            let Some(partition_path) = partition else {
                bail!("--mode r1 needs --partition");
            };
            if dendrogram.is_some() {
                bail!("--mode r1 scores a partition, not a dendrogram");
            }
            // The partition file itself defines the node universe.
            let labeled = read_labeled_partition(partition_path)?;
            let (gt, skipped) = GroundTruth::from_token_stream(open_text(ground_truth)?, |tok| {
                labeled.index.get(tok).copied()
            })?;
            warn_skipped(skipped);
            recall_r1(&labeled.labels, &gt)
        }
        Mode::R2 | Mode::R3 => {
            let Some(dendrogram_path) = dendrogram else {
                bail!("--mode r2/r3 needs --dendrogram");
            };
            if partition.is_some() {
                bail!("--mode r2/r3 scores a dendrogram, not a partition");
            }
            let (d, tokens) = read_dendrogram(open_text(dendrogram_path)?)?;
            let index: std::collections::HashMap<&str, u32> = tokens
                .iter()
                .enumerate()
                .map(|(i, t)| (t.as_str(), i as u32))
                .collect();
            let (gt, skipped) = GroundTruth::from_token_stream(open_text(ground_truth)?, |tok| {
                index.get(tok).copied()
            })?;
            warn_skipped(skipped);
            match mode {
                Mode::R2 => recall_r2(&d, &gt),
                Mode::R3 => {
                    let Some(fit_path) = fit_from else {
                        bail!("--mode r3 needs --fit-from (a fit CSV or r2 matches CSV)");
                    };
                    let fit = load_fit(fit_path, min_size)?;
                    recall_r3(&d, &gt, sample_fraction, &fit, global.seed)?
                }
                Mode::R1 => unreachable!(),
            }
        }
    };

    let reported: Vec<MatchResult> = results
        .iter()
        .filter(|r| r.group_size >= min_size)
        .cloned()
        .collect();
    if reported.is_empty() {
        bail!("no ground-truth group passes --min-size {min_size}");
    }

    write_match_results_csv(&reported, &mut *out.create_file("matches.csv")?)?;
    let scores: Vec<f64> = reported.iter().map(|r| r.score).collect();
    write_cdf_csv(&cumulative_distribution(&scores), &mut *out.create_file("cdf.csv")?)?;
    let mean = mean_recall(&reported)?;
    let mut summary = out.create_file("match_summary.txt")?;
    writeln!(summary, "mode={}", mode_name(mode))?;
    writeln!(summary, "groups={}", reported.len())?;
    writeln!(summary, "min_size={min_size}")?;
    writeln!(summary, "mean_recall={mean:.9}")?;
    drop(summary);

    let mut manifest = Manifest::new("match", global.seed, global.threads);
    manifest.input("ground_truth", ground_truth);
    if let Some(p) = partition {
        manifest.input("partition", p);
    }
    if let Some(p) = dendrogram {
        manifest.input("dendrogram", p);
    }
    if let Some(p) = fit_from {
        manifest.input("fit_from", p);
    }
    manifest.param("mode", mode_name(mode));
    manifest.param("min_size", min_size);
    if mode == Mode::R3 {
        manifest.param("sample_fraction", sample_fraction);
    }
    Ok(manifest)
}

/// `--fit-from` accepts either a regression fit CSV or a prior r2 matches
/// CSV (refitted on the fly); the header says which.
fn load_fit(path: &Path, min_size: u32) -> Result<deltacom_core::matching::RegressionFit> {
    let mut reader = open_text(path)?;
    let mut header = String::new();
    std::io::BufRead::read_line(&mut reader, &mut header)?;
    let fit = if header.trim_end() == "slope,intercept,r2,pearson,points,min_size" {
        read_fit_csv(open_text(path)?)?
    } else if header.trim_end() == "group,size,small,community,score,t,method" {
        let results = read_match_results_csv(open_text(path)?)?;
        size_resolution_regression(&results, min_size)?
    } else {
        bail!(
            "{}: unrecognized CSV header `{}`",
            path.display(),
            header.trim_end()
        );
    };
    Ok(fit)
}

fn mode_name(mode: Mode) -> &'static str {
    match mode {
        Mode::R1 => "r1",
        Mode::R2 => "r2",
        Mode::R3 => "r3",
    }
}

fn warn_skipped(skipped: u64) {
    if skipped > 0 {
        eprintln!("warning: {skipped} ground-truth lines named unknown nodes; skipped");
    }
}

struct LabeledPartition {
    index: std::collections::HashMap<String, u32>,
    labels: Vec<u32>,
}

/// Read a partition file standalone: the lines define both the node universe
/// and the labels.
fn read_labeled_partition(path: &Path) -> Result<LabeledPartition> {
    let reader = open_text(path)?;
    let mut index = std::collections::HashMap::new();
    let mut labels = Vec::new();
    for (lineno, line) in std::io::BufRead::lines(reader).enumerate() {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let mut it = trimmed.split_whitespace();
        let (Some(token), Some(community), None) = (it.next(), it.next(), it.next()) else {
            bail!("{}:{}: expected `node community`", path.display(), lineno + 1);
        };
        let community: u32 = community
            .parse()
            .with_context(|| format!("{}:{}: bad community id", path.display(), lineno + 1))?;
        if index.insert(token.to_string(), labels.len() as u32).is_some() {
            bail!("{}:{}: node `{token}` listed twice", path.display(), lineno + 1);
        }
        labels.push(community);
    }
    if labels.is_empty() {
        bail!("partition file {} is empty", path.display());
    }
    Ok(LabeledPartition { index, labels })
}

fn cmd_regress(
    out: &mut OutputDir,
    global: &GlobalArgs,
    results_path: &Path,
    min_size: u32,
) -> Result<Manifest> {
    let results = read_match_results_csv(open_text(results_path)?)?;
    let fit = size_resolution_regression(&results, min_size)?;
    write_fit_csv(&fit, &mut *out.create_file("fit.csv")?)?;

    let mut manifest = Manifest::new("regress", global.seed, global.threads);
    manifest.input("results", results_path);
    manifest.param("min_size", min_size);
    manifest.param("slope", fit.slope);
    manifest.param("intercept", fit.intercept);
    Ok(manifest)
}

fn cmd_synth(out: &mut OutputDir, global: &GlobalArgs, spec_path: &Path) -> Result<Manifest> {
    let mut spec = SynthSpec::read_text(open_text(spec_path)?)?;
    if global.seed != 0 {
        spec.seed = global.seed;
    }
    let synth = generate(&spec)?;

    write_edge_list(&synth.graph, &mut *out.create_file("graph.edges")?)?;
    write_affiliations(&synth.graph, &synth.affiliations, &mut *out.create_file("graph.aff")?)?;
    write_ground_truth_manifest(
        &synth.ground_truth,
        &synth.graph,
        &mut *out.create_file("ground_truth.txt")?,
    )?;
    write_decoration_manifest(
        &synth.planted_chains,
        &synth.planted_tendrils,
        &synth.graph,
        &mut *out.create_file("decorations.txt")?,
    )?;
    spec.write_text(&mut *out.create_file("spec_used.txt")?)?;

    let mut manifest = Manifest::new("synth", global.seed, global.threads);
    manifest.input("spec", spec_path);
    manifest.param("effective_seed", spec.seed);
    manifest.param("nodes", synth.graph.node_count());
    manifest.param("edges", synth.graph.edge_count());
    Ok(manifest)
}
