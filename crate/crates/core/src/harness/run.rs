//! Experiment runners.
//!
//! Work is split into (parameter point, trial) tasks that run on a rayon pool
//! of `jobs` threads. Each task sends finished records to a single collector
//! together with a sort key; the collector sorts before anything is written,
//! so output bytes do not depend on scheduling.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::mpsc;
use std::time::Instant;

use rayon::prelude::*;

use crate::bisection::{apply_cut, rw_from_sym, second_eigenvector, CutRule, SpectralEmbedding};
use crate::eigen::{smallest_eigenpairs_with_known, EigenOptions};
use crate::error::{Error, Result};
use crate::graph::{Graph, MatrixKind, Partition};
use crate::harness::config::{EmbedModel, Experiment, ExperimentConfig};
use crate::harness::plot::{emit_plots, PlotKind};
use crate::harness::record::{
    fmt_float, summarize, write_records, write_summary, ExperimentRecord,
};
use crate::metrics::{agreement, embedding_variance, planted_vector};
use crate::models::{clique_dcm_spec, sample_block_model, sample_dcm, BlockProbabilitySpec};
use crate::rng::{stable_hash, Seed};
use crate::theory::{dcm_expected_laplacian, p_info, p_thr, thm2_requirements};

/// Scores of one matrix/cut pair on one graph.
#[derive(Clone, Debug, PartialEq)]
pub struct Evaluation {
    pub matrix: MatrixKind,
    pub cut: CutRule,
    pub agreement: f64,
    pub lambda2: f64,
    pub lambda3: f64,
    pub embedding_variance: f64,
    pub degenerate: bool,
    pub runtime_ms: u64,
}

/// Second eigenvectors of every requested matrix. The random-walk vector is
/// derived from the symmetric one, so that solve happens at most once.
pub fn embeddings(
    g: &Graph,
    matrices: &[MatrixKind],
    opts: &EigenOptions,
) -> Result<Vec<(SpectralEmbedding, u64)>> {
    let mut sym: Option<(SpectralEmbedding, u64)> = None;
    let mut sym_once = |g: &Graph| -> Result<(SpectralEmbedding, u64)> {
        if let Some(s) = &sym {
            return Ok(s.clone());
        }
        let t = Instant::now();
        let e = second_eigenvector(g, MatrixKind::SymNormalizedLaplacian, opts)?;
        let s = (e, t.elapsed().as_millis() as u64);
        sym = Some(s.clone());
        Ok(s)
    };
    matrices
        .iter()
        .map(|&kind| match kind {
            MatrixKind::SymNormalizedLaplacian => sym_once(g),
            MatrixKind::RwNormalizedLaplacian => {
                let (s, ms) = sym_once(g)?;
                let t = Instant::now();
                let rw = rw_from_sym(g, &s);
                Ok((rw, ms + t.elapsed().as_millis() as u64))
            }
            _ => {
                let t = Instant::now();
                let e = second_eigenvector(g, kind, opts)?;
                Ok((e, t.elapsed().as_millis() as u64))
            }
        })
        .collect()
}

/// Runs every matrix × cut combination on `g`.
pub fn evaluate_graph(
    g: &Graph,
    planted: &Partition,
    matrices: &[MatrixKind],
    cuts: &[CutRule],
    opts: &EigenOptions,
    timing: bool,
) -> Result<Vec<Evaluation>> {
    let mut out = Vec::with_capacity(matrices.len() * cuts.len());
    for (e, ms) in embeddings(g, matrices, opts)? {
        let variance = embedding_variance(&e.u2, planted)?;
        for &cut in cuts {
            let part = apply_cut(&e.u2, cut);
            out.push(Evaluation {
                matrix: e.kind,
                cut,
                agreement: agreement(&part, planted)?,
                lambda2: e.lambda2,
                lambda3: e.lambda3,
                embedding_variance: variance,
                degenerate: e.degenerate,
                runtime_ms: if timing { ms } else { 0 },
            });
        }
    }
    Ok(out)
}

fn eigen_options(cfg: &ExperimentConfig, seed: Seed) -> EigenOptions {
    EigenOptions {
        tol: cfg.tol,
        dense_cap: cfg.dense_cap,
        seed,
        ..EigenOptions::default()
    }
}

/// Seed stream of one parameter point and trial. Depends only on the point's
/// own values, so editing a grid leaves unchanged points alone.
pub fn trial_seed(cfg: &ExperimentConfig, point: &[f64], trial: u64) -> Seed {
    let mut words = vec![cfg.experiment.tag(), cfg.n as u64];
    words.extend(point.iter().map(|x| x.to_bits()));
    words.push(trial);
    Seed::new(cfg.base_seed, stable_hash(&words))
}

/// Sort key: point index, trial, matrix position, cut position.
type Key = (usize, usize, usize, usize);

fn run_tasks<T, F>(tasks: &[T], jobs: usize, f: F) -> Result<Vec<ExperimentRecord>>
where
    T: Sync,
    F: Fn(&T) -> Result<Vec<(Key, ExperimentRecord)>> + Sync,
{
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?;
    let (tx, rx) = mpsc::channel::<(Key, ExperimentRecord)>();
    let result = pool.install(|| {
        tasks.par_iter().try_for_each_with(tx, |tx, task| {
            for item in f(task)? {
                tx.send(item).expect("collector outlives workers");
            }
            Ok::<(), Error>(())
        })
    });
    result?;
    let mut keyed: Vec<(Key, ExperimentRecord)> = rx.into_iter().collect();
    keyed.sort_by(|a, b| a.0.cmp(&b.0));
    Ok(keyed.into_iter().map(|(_, r)| r).collect())
}

fn position<T: PartialEq>(list: &[T], x: &T) -> usize {
    list.iter().position(|y| y == x).unwrap_or(usize::MAX)
}

fn records_for(
    cfg: &ExperimentConfig,
    point: usize,
    trial: usize,
    seed: Seed,
    (p, pbar, q, param): (f64, Option<f64>, f64, Option<f64>),
    evals: Vec<Evaluation>,
) -> Vec<(Key, ExperimentRecord)> {
    evals
        .into_iter()
        .map(|e| {
            let key = (point, trial, position(&cfg.matrices, &e.matrix), position(&cfg.cuts, &e.cut));
            let rec = ExperimentRecord {
                experiment: cfg.experiment,
                n: cfg.n,
                p,
                pbar,
                q,
                k: None,
                param,
                matrix: e.matrix,
                cut: e.cut,
                trial,
                base_seed: seed.base,
                stream: seed.stream,
                agreement: e.agreement,
                misclassification: 1.0 - e.agreement,
                lambda2: e.lambda2,
                lambda3: e.lambda3,
                embedding_variance: e.embedding_variance,
                degeneracy_flag: e.degenerate,
                runtime_ms: e.runtime_ms,
            };
            (key, rec)
        })
        .collect()
}

fn expect_experiment(cfg: &ExperimentConfig, want: Experiment) -> Result<()> {
    if cfg.experiment != want {
        return Err(Error::InvalidArgument(format!(
            "config is for '{}', not '{}'",
            cfg.experiment, want
        )));
    }
    cfg.validate()
}

/// Agreement as `pbar` varies over the benchmark NSSBM.
pub fn run_vary_pbar(cfg: &ExperimentConfig, jobs: usize) -> Result<Vec<ExperimentRecord>> {
    expect_experiment(cfg, Experiment::VaryPbar)?;
    let specs: Vec<BlockProbabilitySpec> = cfg
        .pbar_grid
        .iter()
        .map(|&pbar| BlockProbabilitySpec::nssbm_benchmark(cfg.n, cfg.p, pbar, cfg.q))
        .collect::<Result<_>>()?;
    let tasks: Vec<(usize, usize)> = (0..specs.len())
        .flat_map(|i| (0..cfg.trials).map(move |t| (i, t)))
        .collect();
    run_tasks(&tasks, jobs, |&(i, t)| {
        let pbar = cfg.pbar_grid[i];
        let seed = trial_seed(cfg, &[cfg.p, pbar, cfg.q], t as u64);
        let g = sample_block_model(&specs[i], seed);
        let planted = specs[i].planted();
        let evals = evaluate_graph(&g, &planted, &cfg.matrices, &cfg.cuts, &eigen_options(cfg, seed), cfg.timing)?;
        log::debug!("vary-pbar pbar={pbar} trial={t} done");
        Ok(records_for(cfg, i, t, seed, (cfg.p, Some(pbar), cfg.q, None), evals))
    })
}

/// One heatmap cell.
#[derive(Clone, Debug, PartialEq)]
pub struct GridCell {
    pub p: f64,
    pub q: f64,
    /// `false` for `p <= q`, whose agreement is the sentinel 0.
    pub valid: bool,
    pub mean_agreement: f64,
    pub p_thr: f64,
    pub p_info: f64,
}

pub const CELL_COLUMNS: [&str; 8] = ["n", "pbar", "p", "q", "valid", "mean_agreement", "p_thr", "p_info"];

/// Unnormalized zero-cut agreement over the `(p, q)` grid. Cells with
/// `p <= q` are not sampled and report agreement 0.
pub fn run_pq_grid(cfg: &ExperimentConfig, jobs: usize) -> Result<(Vec<ExperimentRecord>, Vec<GridCell>)> {
    expect_experiment(cfg, Experiment::PqGrid)?;
    let mut points = Vec::new();
    for &p in &cfg.p_grid {
        for &q in &cfg.q_grid {
            points.push((p, q));
        }
    }
    let tasks: Vec<(usize, usize)> = points
        .iter()
        .enumerate()
        .filter(|(_, (p, q))| p > q)
        .flat_map(|(i, _)| (0..cfg.trials).map(move |t| (i, t)))
        .collect();
    let records = run_tasks(&tasks, jobs, |&(i, t)| {
        let (p, q) = points[i];
        let spec = BlockProbabilitySpec::nssbm_benchmark(cfg.n, p, cfg.pbar, q)?;
        let seed = trial_seed(cfg, &[p, cfg.pbar, q], t as u64);
        let g = sample_block_model(&spec, seed);
        let evals = evaluate_graph(&g, &spec.planted(), &cfg.matrices, &cfg.cuts, &eigen_options(cfg, seed), cfg.timing)?;
        Ok(records_for(cfg, i, t, seed, (p, Some(cfg.pbar), q, None), evals))
    })?;
    let cells = points
        .iter()
        .map(|&(p, q)| {
            let valid = p > q;
            let mine: Vec<f64> = records
                .iter()
                .filter(|r| {
                    r.p == p
                        && r.q == q
                        && r.matrix == MatrixKind::UnnormalizedLaplacian
                        && r.cut == CutRule::Zero
                })
                .map(|r| r.agreement)
                .collect();
            let mean = if valid && !mine.is_empty() {
                mine.iter().sum::<f64>() / mine.len() as f64
            } else {
                0.0
            };
            GridCell {
                p,
                q,
                valid,
                mean_agreement: mean,
                p_thr: p_thr(cfg.n, cfg.pbar, q),
                p_info: p_info(cfg.n, q),
            }
        })
        .collect();
    Ok((records, cells))
}

pub fn write_cells<W: Write>(out: W, n: usize, pbar: f64, cells: &[GridCell]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CELL_COLUMNS)?;
    for c in cells {
        w.write_record([
            n.to_string(),
            fmt_float(pbar),
            fmt_float(c.p),
            fmt_float(c.q),
            u8::from(c.valid).to_string(),
            fmt_float(c.mean_agreement),
            fmt_float(c.p_thr),
            fmt_float(c.p_info),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Conditions of the deterministic-clusters result at one clique size.
#[derive(Clone, Debug, PartialEq)]
pub struct CliqueConditions {
    pub clique_size: usize,
    pub d_in_min: usize,
    pub lhat_lambda2: f64,
    pub lhat_lambda3: f64,
    pub din_required: f64,
    pub gap_required: f64,
}

impl CliqueConditions {
    pub fn gap(&self) -> f64 {
        self.lhat_lambda3 - self.lhat_lambda2
    }

    pub fn din_ok(&self) -> bool {
        self.d_in_min as f64 >= self.din_required
    }

    pub fn gap_ok(&self) -> bool {
        self.gap() >= self.gap_required
    }
}

pub const CONDITION_COLUMNS: [&str; 10] = [
    "clique_size",
    "d_in_min",
    "lhat_lambda2",
    "lhat_lambda3",
    "lhat_gap",
    "din_required",
    "gap_required",
    "din_ok",
    "gap_ok",
    "n",
];

/// Agreement as the planted clique in the first half grows. Internal graphs
/// are drawn once per clique size; the trials resample crossing edges only.
pub fn run_clique_sweep(
    cfg: &ExperimentConfig,
    jobs: usize,
) -> Result<(Vec<ExperimentRecord>, Vec<CliqueConditions>)> {
    expect_experiment(cfg, Experiment::CliqueSweep)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?;
    let (din_required, gap_required) = thm2_requirements(cfg.n, cfg.q, &cfg.constants);
    let prepared: Vec<_> = pool.install(|| {
        cfg.clique_sizes
            .par_iter()
            .map(|&size| {
                let seed = trial_seed(cfg, &[cfg.p, cfg.q, size as f64], u64::MAX);
                let spec = clique_dcm_spec(cfg.n, cfg.p, cfg.q, size, seed)?;
                let [g1, g2] = spec.internal();
                let lhat = dcm_expected_laplacian(g1, g2, cfg.q)?;
                let ones = vec![1.0; cfg.n];
                let eig = smallest_eigenpairs_with_known(&lhat, 3, &ones, &eigen_options(cfg, seed))?;
                let cond = CliqueConditions {
                    clique_size: size,
                    d_in_min: g1.min_degree().min(g2.min_degree()),
                    lhat_lambda2: eig.values[1],
                    lhat_lambda3: eig.values[2],
                    din_required,
                    gap_required,
                };
                Ok((spec, cond))
            })
            .collect::<Result<Vec<_>>>()
    })?;
    let tasks: Vec<(usize, usize)> = (0..prepared.len())
        .flat_map(|i| (0..cfg.trials).map(move |t| (i, t)))
        .collect();
    let records = run_tasks(&tasks, jobs, |&(i, t)| {
        let size = cfg.clique_sizes[i];
        let seed = trial_seed(cfg, &[cfg.p, cfg.q, size as f64], t as u64);
        let (spec, _) = &prepared[i];
        let g = sample_dcm(spec, seed)?.graph;
        let evals = evaluate_graph(&g, &spec.planted(), &cfg.matrices, &cfg.cuts, &eigen_options(cfg, seed), cfg.timing)?;
        log::debug!("clique-sweep size={size} trial={t} done");
        Ok(records_for(cfg, i, t, seed, (cfg.p, None, cfg.q, Some(size as f64)), evals))
    })?;
    Ok((records, prepared.into_iter().map(|(_, c)| c).collect()))
}

pub fn write_conditions<W: Write>(out: W, n: usize, conds: &[CliqueConditions]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CONDITION_COLUMNS)?;
    for c in conds {
        w.write_record([
            c.clique_size.to_string(),
            c.d_in_min.to_string(),
            fmt_float(c.lhat_lambda2),
            fmt_float(c.lhat_lambda3),
            fmt_float(c.gap()),
            fmt_float(c.din_required),
            fmt_float(c.gap_required),
            u8::from(c.din_ok()).to_string(),
            u8::from(c.gap_ok()).to_string(),
            n.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Per-vertex second-eigenvector entries of several matrices, each signed to
/// correlate positively with the planted vector.
#[derive(Clone, Debug, PartialEq)]
pub struct EmbedDump {
    pub planted: Partition,
    pub matrices: Vec<MatrixKind>,
    /// `columns[j][v]`: entry `v` of the vector for `matrices[j]`.
    pub columns: Vec<Vec<f64>>,
}

pub fn embed_graph(
    g: &Graph,
    planted: &Partition,
    matrices: &[MatrixKind],
    opts: &EigenOptions,
) -> Result<EmbedDump> {
    let star = planted_vector(planted);
    let columns = embeddings(g, matrices, opts)?
        .into_iter()
        .map(|(e, _)| {
            let c: f64 = e.u2.iter().zip(&star).map(|(a, b)| a * b).sum();
            let s = if c < 0.0 { -1.0 } else { 1.0 };
            e.u2.iter().map(|x| s * x).collect()
        })
        .collect();
    Ok(EmbedDump {
        planted: planted.clone(),
        matrices: matrices.to_vec(),
        columns,
    })
}

/// One sampled graph at the configured point, embedded by every matrix.
pub fn run_embed_dump(cfg: &ExperimentConfig) -> Result<EmbedDump> {
    expect_experiment(cfg, Experiment::EmbedDump)?;
    let (g, planted, seed) = match cfg.embed_model {
        EmbedModel::Nssbm => {
            let spec = BlockProbabilitySpec::nssbm_benchmark(cfg.n, cfg.p, cfg.pbar, cfg.q)?;
            let seed = trial_seed(cfg, &[cfg.p, cfg.pbar, cfg.q], 0);
            (sample_block_model(&spec, seed), spec.planted(), seed)
        }
        EmbedModel::Clique => {
            let point = [cfg.p, cfg.q, cfg.clique_size as f64];
            let spec = clique_dcm_spec(cfg.n, cfg.p, cfg.q, cfg.clique_size, trial_seed(cfg, &point, u64::MAX))?;
            let seed = trial_seed(cfg, &point, 0);
            (sample_dcm(&spec, seed)?.graph, spec.planted(), seed)
        }
    };
    embed_graph(&g, &planted, &cfg.matrices, &eigen_options(cfg, seed))
}

/// CSV with a leading `#` metadata line carrying `n` and the reference
/// levels `±1/√n`, then `vertex,planted_label,<matrix>...` with 1-based vertices.
pub fn write_embed_dump<W: Write>(mut out: W, dump: &EmbedDump) -> Result<()> {
    let n = dump.planted.len();
    let r = 1.0 / (n as f64).sqrt();
    writeln!(out, "# n={n} reference_upper={} reference_lower={}", fmt_float(r), fmt_float(-r))?;
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["vertex".to_string(), "planted_label".to_string()];
    header.extend(dump.matrices.iter().map(|m| m.short_name().to_string()));
    w.write_record(&header)?;
    for v in 0..n {
        let mut row = vec![(v + 1).to_string(), dump.planted.side(v).to_string()];
        row.extend(dump.columns.iter().map(|c| fmt_float(c[v])));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path)?))
}

/// Runs the configured experiment and writes its CSV files and plots into
/// `cfg.out_dir`. Returns the paths written.
pub fn run_experiment(cfg: &ExperimentConfig, jobs: usize) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(&cfg.out_dir)?;
    let dir = &cfg.out_dir;
    let mut written = Vec::new();
    let write_main = |records: &[ExperimentRecord], written: &mut Vec<PathBuf>| -> Result<PathBuf> {
        let path = dir.join("records.csv");
        write_records(create(&path)?, records)?;
        let summary = dir.join("summary.csv");
        write_summary(create(&summary)?, &summarize(records))?;
        written.push(path.clone());
        written.push(summary);
        Ok(path)
    };
    match cfg.experiment {
        Experiment::VaryPbar => {
            let records = run_vary_pbar(cfg, jobs)?;
            let csv = write_main(&records, &mut written)?;
            written.push(emit_plots(&csv, PlotKind::Lines, &dir.join("agreement.svg"))?);
        }
        Experiment::PqGrid => {
            let (records, cells) = run_pq_grid(cfg, jobs)?;
            write_main(&records, &mut written)?;
            let path = dir.join("cells.csv");
            write_cells(create(&path)?, cfg.n, cfg.pbar, &cells)?;
            written.push(path.clone());
            written.push(emit_plots(&path, PlotKind::Heatmap, &dir.join("heatmap.svg"))?);
        }
        Experiment::CliqueSweep => {
            let (records, conds) = run_clique_sweep(cfg, jobs)?;
            let csv = write_main(&records, &mut written)?;
            let path = dir.join("conditions.csv");
            write_conditions(create(&path)?, cfg.n, &conds)?;
            written.push(path);
            written.push(emit_plots(&csv, PlotKind::Lines, &dir.join("agreement.svg"))?);
        }
        Experiment::EmbedDump => {
            let dump = run_embed_dump(cfg)?;
            let path = dir.join("embedding.csv");
            write_embed_dump(create(&path)?, &dump)?;
            written.push(path.clone());
            written.push(emit_plots(&path, PlotKind::Embed, &dir.join("embedding.svg"))?);
        }
    }
    Ok(written)
}
