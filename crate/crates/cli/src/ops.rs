//! Command implementations: synth, cluster, sweep, eval.

use std::collections::BTreeMap;
use std::path::Path;
use std::time::Instant;

use gclust_core::io::{
    ingest_manifest, load_labels, load_set, save_labels, save_set, IngestOptions,
    LabeledGrassmannSet,
};
use gclust_core::io::save_matrix_gmx;
use gclust_core::seed::{derive_seed, STAGE_KMEANS};
use gclust_core::{
    accuracy, build_laplacian, cluster_coefficients, delta_matrix, solve, synth, DeltaMatrix,
    Error, GraphLaplacian, KktReport, SolverConfig, SolverState, SynthesisSpec, WeightKernel,
};
use serde::Serialize;

use crate::manifest::RunManifest;
use crate::svg::write_residual_chart;
use crate::{ClusterArgs, EvalArgs, SweepArgs, SynthArgs};

pub enum CliError {
    Usage(String),
    Core(Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Core(Error::Parameter(_)) => 2,
            CliError::Core(Error::Numerical { .. }) => 4,
            CliError::Core(_) => 3,
        }
    }

    pub fn message(&self) -> String {
        match self {
            CliError::Usage(msg) => msg.clone(),
            CliError::Core(e) => e.to_string(),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

// ---------------------------------------------------------------------------
// synth

pub fn cmd_synth(args: &SynthArgs) -> Result<(), CliError> {
    let spec = SynthesisSpec {
        clusters: args.clusters,
        per_cluster: args.per_cluster,
        ambient_dim: args.ambient_dim,
        subspace_dim: args.subspace_dim,
        noise_sigma: args.sigma,
        seed: args.seed,
        orthogonal_prototypes: args.orthogonal_prototypes,
    };
    let started = Instant::now();
    let set = synth(&spec)?;
    std::fs::create_dir_all(&args.out_dir).map_err(Error::from)?;
    save_set(&args.out_dir, &set)?;

    let mut manifest = RunManifest::new(
        "synth",
        serde_json::to_value(&spec).map_err(|e| Error::data(e.to_string()))?,
    );
    manifest.record_timing("total", started.elapsed().as_secs_f64() * 1e3);
    manifest.record_output(&args.out_dir.join("meta.json"))?;
    manifest.record_output(&args.out_dir.join("labels.csv"))?;
    manifest.record_output(&args.out_dir.join("points"))?;
    manifest.write(&args.out_dir.join("manifest.json"))?;

    println!(
        "wrote {} points (d={}, p={}) to {}",
        set.points.len(),
        spec.ambient_dim,
        spec.subspace_dim,
        args.out_dir.display()
    );
    Ok(())
}

// ---------------------------------------------------------------------------
// cluster

#[derive(Debug, Clone, Serialize)]
pub struct PipelineConfig {
    pub solver: SolverConfig,
    pub k: usize,
    pub neighbors: Option<usize>,
    pub kernel: String,
    pub subspace_dim: Option<usize>,
    pub normalize: bool,
}

pub fn parse_kernel(spec: &str) -> Result<WeightKernel, CliError> {
    if spec == "distance" {
        return Ok(WeightKernel::Distance);
    }
    if let Some(sigma) = spec.strip_prefix("heat:") {
        let sigma: f64 = sigma
            .parse()
            .map_err(|_| usage(format!("cannot parse heat kernel width '{sigma}'")))?;
        return Ok(WeightKernel::Heat { sigma });
    }
    Err(usage(format!(
        "unknown kernel '{spec}' (expected 'distance' or 'heat:SIGMA')"
    )))
}

pub fn load_dataset(
    path: &Path,
    subspace_dim: Option<usize>,
    normalize: bool,
) -> Result<LabeledGrassmannSet, CliError> {
    if path.extension().is_some_and(|e| e == "jsonl") {
        let p = subspace_dim.ok_or_else(|| {
            usage("ingesting a frame manifest requires --subspace-dim".to_string())
        })?;
        let options = IngestOptions { normalize };
        Ok(ingest_manifest(path, p, &options)?)
    } else {
        Ok(load_set(path)?)
    }
}

struct PipelineOutcome {
    state: SolverState,
    kkt: KktReport,
    cluster: gclust_core::ClusterResult,
    timings: BTreeMap<String, f64>,
}

fn run_pipeline(
    set: &LabeledGrassmannSet,
    delta: &DeltaMatrix,
    graph: Option<&GraphLaplacian>,
    config: &SolverConfig,
    k: usize,
) -> Result<PipelineOutcome, CliError> {
    let mut timings = BTreeMap::new();

    let t = Instant::now();
    let laplacian = graph.map(|g| g.laplacian());
    let (state, kkt) = solve(delta, laplacian, config)?;
    timings.insert("solve".to_string(), t.elapsed().as_secs_f64() * 1e3);

    let t = Instant::now();
    let cluster = cluster_coefficients(
        &state.z,
        k,
        derive_seed(config.seed, STAGE_KMEANS),
        set.labels.as_deref(),
    )?;
    timings.insert("ncut".to_string(), t.elapsed().as_secs_f64() * 1e3);

    Ok(PipelineOutcome {
        state,
        kkt,
        cluster,
        timings,
    })
}

#[derive(Serialize)]
struct KktFile {
    converged: bool,
    iterations: usize,
    #[serde(flatten)]
    kkt: KktReport,
}

pub fn cmd_cluster(args: &ClusterArgs) -> Result<(), CliError> {
    if args.beta > 0.0 && args.neighbors.is_none() {
        return Err(usage("--beta > 0 requires --neighbors"));
    }
    let kernel = parse_kernel(&args.kernel)?;

    let total_start = Instant::now();
    let mut timings = BTreeMap::new();

    let t = Instant::now();
    let set = load_dataset(&args.dataset, args.subspace_dim, !args.no_normalize)?;
    timings.insert("load".to_string(), t.elapsed().as_secs_f64() * 1e3);

    let t = Instant::now();
    let delta = delta_matrix(&set.points)?;
    timings.insert("delta".to_string(), t.elapsed().as_secs_f64() * 1e3);

    let graph = if args.beta > 0.0 {
        let t = Instant::now();
        let g = build_laplacian(&set.points, args.neighbors.unwrap(), kernel)?;
        timings.insert("graph".to_string(), t.elapsed().as_secs_f64() * 1e3);
        Some(g)
    } else {
        None
    };

    let config = SolverConfig {
        lambda: args.lambda,
        beta: args.beta,
        expected_rank: args.rank,
        mu_init: args.mu_init,
        mu_max: args.mu_max,
        rho: args.rho,
        epsilon: args.epsilon,
        max_iter: args.max_iter,
        partial_svd: args.partial_svd,
        seed: args.seed,
    };

    let outcome = run_pipeline(&set, &delta, graph.as_ref(), &config, args.k)?;
    timings.extend(outcome.timings.clone());

    // Outputs.
    std::fs::create_dir_all(&args.out_dir).map_err(Error::from)?;
    let t = Instant::now();
    let labels_path = args.out_dir.join("labels.csv");
    save_labels(&labels_path, &outcome.cluster.labels)?;

    let diagnostics_path = args.out_dir.join("diagnostics.csv");
    write_diagnostics(&diagnostics_path, &outcome.state)?;

    let kkt_path = args.out_dir.join("kkt.json");
    let kkt_file = KktFile {
        converged: outcome.state.converged,
        iterations: outcome.state.iteration,
        kkt: outcome.kkt,
    };
    std::fs::write(
        &kkt_path,
        serde_json::to_string_pretty(&kkt_file).map_err(|e| Error::data(e.to_string()))? + "\n",
    )
    .map_err(Error::from)?;

    let z_path = args.out_dir.join("z.gmx");
    save_matrix_gmx(&z_path, &outcome.state.z)?;
    let affinity_path = args.out_dir.join("affinity.gmx");
    save_matrix_gmx(&affinity_path, &outcome.cluster.affinity)?;

    let mut output_paths = vec![labels_path, diagnostics_path, kkt_path, z_path, affinity_path];
    if args.svg {
        let svg_path = args.out_dir.join("residual.svg");
        write_residual_chart(&svg_path, &outcome.state.residual_history)?;
        output_paths.push(svg_path);
    }
    timings.insert("write".to_string(), t.elapsed().as_secs_f64() * 1e3);
    timings.insert("total".to_string(), total_start.elapsed().as_secs_f64() * 1e3);

    let pipeline_config = PipelineConfig {
        solver: config,
        k: args.k,
        neighbors: args.neighbors,
        kernel: args.kernel.clone(),
        subspace_dim: args.subspace_dim,
        normalize: !args.no_normalize,
    };
    let mut manifest = RunManifest::new(
        "cluster",
        serde_json::to_value(&pipeline_config).map_err(|e| Error::data(e.to_string()))?,
    );
    manifest.record_input(&args.dataset)?;
    for path in &output_paths {
        manifest.record_output(path)?;
    }
    for (stage, ms) in &timings {
        manifest.record_timing(stage, *ms);
    }
    manifest.write(&args.out_dir.join("manifest.json"))?;

    println!(
        "converged={} iterations={} primal_residual={:.3e}",
        outcome.state.converged,
        outcome.state.iteration,
        outcome
            .state
            .residual_history
            .last()
            .copied()
            .unwrap_or(0.0)
    );
    if let Some(acc) = outcome.cluster.accuracy {
        println!("accuracy = {acc:.4}");
    }
    for (stage, ms) in &timings {
        log::info!("stage {stage}: {ms:.1} ms");
    }
    println!("outputs in {}", args.out_dir.display());
    Ok(())
}

fn write_diagnostics(path: &Path, state: &SolverState) -> Result<(), CliError> {
    use std::io::Write;
    let mut out = std::io::BufWriter::new(std::fs::File::create(path).map_err(Error::from)?);
    writeln!(out, "iteration,residual,objective,mu").map_err(Error::from)?;
    for i in 0..state.residual_history.len() {
        writeln!(
            out,
            "{},{:e},{:e},{:e}",
            i + 1,
            state.residual_history[i],
            state.objective_history[i],
            state.mu_history[i]
        )
        .map_err(Error::from)?;
    }
    out.flush().map_err(Error::from)?;
    Ok(())
}

// ---------------------------------------------------------------------------
// sweep

pub fn parse_f64_grid(spec: &str, flag: &str) -> Result<Vec<f64>, CliError> {
    let values: Result<Vec<f64>, _> = spec.split(',').map(|s| s.trim().parse::<f64>()).collect();
    values.map_err(|_| usage(format!("cannot parse {flag} grid '{spec}'")))
}

/// Integer grids accept comma lists and inclusive ranges: `0..5` expands to
/// 0,1,2,3,4,5.
pub fn parse_usize_grid(spec: &str, flag: &str) -> Result<Vec<usize>, CliError> {
    let mut out = Vec::new();
    for part in spec.split(',') {
        let part = part.trim();
        if let Some((lo, hi)) = part.split_once("..") {
            let lo: usize = lo
                .trim()
                .parse()
                .map_err(|_| usage(format!("cannot parse {flag} range '{part}'")))?;
            let hi: usize = hi
                .trim()
                .trim_start_matches('=')
                .parse()
                .map_err(|_| usage(format!("cannot parse {flag} range '{part}'")))?;
            if hi < lo {
                return Err(usage(format!("{flag} range '{part}' is empty")));
            }
            out.extend(lo..=hi);
        } else {
            out.push(
                part.parse()
                    .map_err(|_| usage(format!("cannot parse {flag} value '{part}'")))?,
            );
        }
    }
    Ok(out)
}

struct SweepCell {
    lambda: f64,
    beta: f64,
    rank: usize,
    neighbors: usize,
    repeat: usize,
}

struct SweepRow {
    cell: SweepCell,
    accuracy: Option<f64>,
    iterations: usize,
    converged: bool,
    runtime_ms: f64,
}

pub fn cmd_sweep(args: &SweepArgs) -> Result<(), CliError> {
    let lambdas = parse_f64_grid(&args.lambda, "--lambda")?;
    let betas = parse_f64_grid(&args.beta, "--beta")?;
    let ranks = parse_usize_grid(&args.rank, "--rank")?;
    let neighbor_grid = match &args.neighbors {
        Some(spec) => parse_usize_grid(spec, "--neighbors")?,
        None => vec![0],
    };
    if betas.iter().any(|&b| b > 0.0) && args.neighbors.is_none() {
        return Err(usage("sweep over beta > 0 requires --neighbors"));
    }
    let kernel = parse_kernel(&args.kernel)?;

    let cells = lambdas.len() * betas.len() * ranks.len() * neighbor_grid.len();
    if cells > args.cell_cap {
        return Err(usage(format!(
            "grid has {cells} cells, exceeding the cap of {} (raise --cell-cap if intended)",
            args.cell_cap
        )));
    }

    let set = load_dataset(&args.dataset, args.subspace_dim, !args.no_normalize)?;
    let delta = delta_matrix(&set.points)?;

    // One Laplacian per distinct neighbor count.
    let mut laplacians: BTreeMap<usize, GraphLaplacian> = BTreeMap::new();
    if betas.iter().any(|&b| b > 0.0) {
        for &c in &neighbor_grid {
            laplacians
                .entry(c)
                .or_insert(build_laplacian(&set.points, c, kernel)?);
        }
    }

    // Cells in grid order; each repeat re-runs the identical configuration.
    let mut grid = Vec::with_capacity(cells * args.repeat);
    for &lambda in &lambdas {
        for &beta in &betas {
            for &rank in &ranks {
                for &neighbors in &neighbor_grid {
                    for repeat in 0..args.repeat {
                        grid.push(SweepCell {
                            lambda,
                            beta,
                            rank,
                            neighbors,
                            repeat,
                        });
                    }
                }
            }
        }
    }

    use rayon::prelude::*;
    let rows: Vec<Result<SweepRow, Error>> = grid
        .into_par_iter()
        .map(|cell| {
            let config = SolverConfig {
                lambda: cell.lambda,
                beta: cell.beta,
                expected_rank: cell.rank,
                max_iter: args.max_iter,
                seed: args.seed,
                ..SolverConfig::default()
            };
            let graph = if cell.beta > 0.0 {
                Some(&laplacians[&cell.neighbors])
            } else {
                None
            };
            let started = Instant::now();
            let (state, _kkt) = solve(&delta, graph.map(|g| g.laplacian()), &config)?;
            let result = cluster_coefficients(
                &state.z,
                args.k,
                derive_seed(args.seed, STAGE_KMEANS),
                set.labels.as_deref(),
            )?;
            Ok(SweepRow {
                accuracy: result.accuracy,
                iterations: state.iteration,
                converged: state.converged,
                runtime_ms: started.elapsed().as_secs_f64() * 1e3,
                cell,
            })
        })
        .collect();

    use std::io::Write;
    let mut out = std::io::BufWriter::new(std::fs::File::create(&args.out).map_err(Error::from)?);
    writeln!(
        out,
        "lambda,beta,rank,neighbors,repeat,accuracy,iterations,converged,runtime_ms"
    )
    .map_err(Error::from)?;
    for row in rows {
        let row = row?;
        let acc = row.accuracy.map(|a| format!("{a:.4}")).unwrap_or_default();
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{:.3}",
            row.cell.lambda,
            row.cell.beta,
            row.cell.rank,
            row.cell.neighbors,
            row.cell.repeat,
            acc,
            row.iterations,
            row.converged,
            row.runtime_ms
        )
        .map_err(Error::from)?;
    }
    out.flush().map_err(Error::from)?;
    println!("wrote {} to {}", cells * args.repeat, args.out.display());
    Ok(())
}

// ---------------------------------------------------------------------------
// eval

pub fn cmd_eval(args: &EvalArgs) -> Result<(), CliError> {
    let predicted = load_labels(&args.predicted)?;
    let truth = load_labels(&args.truth)?;
    let acc = accuracy(&predicted, &truth)?;
    println!("{acc:.4}");
    let json = serde_json::json!({
        "accuracy": acc,
        "samples": predicted.len(),
    });
    println!("{json}");
    if let Some(path) = &args.json {
        std::fs::write(path, json.to_string() + "\n").map_err(Error::from)?;
    }
    Ok(())
}
