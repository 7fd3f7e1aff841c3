use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use edgefuse::cost::Evaluator;
use edgefuse::generate::{self, MatrixParams};
use edgefuse::gridmap::{self, synthetic};
use edgefuse::pipeline::{run_policy, verify, PipelineConfig, Policy};
use edgefuse::profile;
use edgefuse::report::{sort_rows, write_csv, ResultRow, RowOptions, RunReport};
use edgefuse::scenario::Scenario;
use edgefuse::tabu::TabuConfig;

use crate::args::{parse_counts, parse_seeds, parse_weight_range, Fixture, GenerateArgs, MapmergeArgs, ProfileArgs, RunArgs, ScheduleArgs, SweepArgs};
use crate::output::Outputs;
use crate::CliError;

type Result<T> = std::result::Result<T, CliError>;

fn parse_policies(s: &str) -> Result<Vec<Policy>> {
    let mut out = Vec::new();
    for name in s.split(',').map(str::trim).filter(|n| !n.is_empty()) {
        let p: Policy = name.parse()?;
        if !out.contains(&p) {
            out.push(p);
        }
    }
    if out.is_empty() {
        return Err(CliError::usage("--policy: at least one policy is required"));
    }
    Ok(out)
}

fn profile_dir() -> Option<PathBuf> {
    std::env::var_os(profile::PROFILE_DIR_ENV).map(PathBuf::from)
}

fn load_scenario(path: &Path, profile_flag: Option<&str>) -> Result<Scenario> {
    let dir = profile_dir();
    let s = Scenario::load(path, dir.as_deref()).map_err(|e| CliError::usage(format!("{}: {e}", path.display())))?;
    Ok(match profile_flag {
        Some(spec) => s.with_profile(profile::resolve(spec, dir.as_deref())?),
        None => s,
    })
}

struct RunPlan {
    policies: Vec<Policy>,
    seeds: Vec<u64>,
    config: PipelineConfig,
    row_opts: RowOptions,
}

fn plan(a: &RunArgs) -> Result<RunPlan> {
    let policies = parse_policies(&a.policy)?;
    let seeds = parse_seeds(&a.seeds).map_err(|e| CliError::usage(format!("--seeds: {e}")))?;
    if a.tabu_capacity == 0 {
        return Err(CliError::usage("--tabu-capacity must be at least 1"));
    }
    if a.jobs == 0 {
        return Err(CliError::usage("--jobs must be at least 1"));
    }
    let config = PipelineConfig {
        tabu: TabuConfig {
            max_iterations: a.tabu_iters,
            tabu_capacity: a.tabu_capacity,
            rng_seed: 0,
        },
        use_tabu: !a.no_tabu,
        ..PipelineConfig::default()
    };
    Ok(RunPlan {
        policies,
        seeds,
        config,
        row_opts: RowOptions {
            wall_time: !a.no_timestamp,
            oracle: a.oracle,
        },
    })
}

fn pool(jobs: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| CliError {
            code: 3,
            message: format!("thread pool: {e}"),
        })
}

struct Run {
    row: ResultRow,
    json: Option<String>,
}

fn execute(eval: &Evaluator, policy: Policy, seed: u64, plan: &RunPlan, want_json: bool) -> Result<Run> {
    let r = run_policy(eval, policy, &plan.config, seed)?;
    verify(eval, &r)?;
    let row = ResultRow::new(eval, &r, plan.row_opts)?;
    let json = want_json.then(|| RunReport::new(eval, &r).to_json());
    Ok(Run { row, json })
}

fn json_name(row: &ResultRow) -> String {
    let seed = row.seed.map(|s| format!("-seed{s}")).unwrap_or_default();
    format!("{}-r{}{seed}.json", row.policy, row.robots)
}

fn emit(runs: Vec<Run>, a: &RunArgs) -> Result<()> {
    let mut outputs = Outputs::default();
    if let Some(dir) = &a.json {
        for run in &runs {
            if let Some(j) = &run.json {
                outputs.add(dir.join(json_name(&run.row)), format!("{j}\n"));
            }
        }
    }
    let mut rows: Vec<ResultRow> = runs.into_iter().map(|r| r.row).collect();
    sort_rows(&mut rows);
    let stamp = (!a.no_timestamp).then(|| chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true));
    let mut csv = Vec::new();
    write_csv(&rows, stamp.as_deref(), &mut csv)?;

    let summary = summarize(&rows);
    match &a.out {
        Some(path) => {
            outputs.add(path, csv);
            outputs.commit()?;
            print!("{summary}");
        }
        None => {
            outputs.commit()?;
            std::io::stdout()
                .write_all(&csv)
                .map_err(|e| CliError::io(Path::new("<stdout>"), e))?;
            eprint!("{summary}");
        }
    }
    Ok(())
}

fn summarize(rows: &[ResultRow]) -> String {
    let mut cells: BTreeMap<(usize, Policy), Vec<&ResultRow>> = BTreeMap::new();
    for r in rows {
        cells.entry((r.robots, r.policy)).or_default().push(r);
    }
    let mut out = String::new();
    for ((robots, policy), rs) in cells {
        let n = rs.len() as f64;
        let mean = rs.iter().map(|r| r.total_latency_s).sum::<f64>() / n;
        let min = rs.iter().map(|r| r.total_latency_s).fold(f64::INFINITY, f64::min);
        let max = rs.iter().map(|r| r.total_latency_s).fold(0.0, f64::max);
        out.push_str(&format!(
            "{policy:<8} robots={robots:<3} runs={:<4} mean={mean:.4}s min={min:.4}s max={max:.4}s",
            rs.len()
        ));
        let fits: Vec<f64> = rs.iter().filter_map(|r| r.fitness).collect();
        if !fits.is_empty() {
            out.push_str(&format!(" fitness={:.4}", fits.iter().sum::<f64>() / fits.len() as f64));
        }
        let gaps: Vec<f64> = rs.iter().filter_map(|r| r.oracle_gap).collect();
        if !gaps.is_empty() {
            out.push_str(&format!(" oracle_gap={:.4}", gaps.iter().cloned().fold(0.0, f64::max)));
        }
        out.push('\n');
    }
    out
}

pub fn schedule(a: ScheduleArgs) -> Result<()> {
    let plan = plan(&a.run)?;
    let scenario = load_scenario(&a.scenario, a.run.profile.as_deref())?;
    let eval = Evaluator::new(&scenario.scene, &scenario.profile)?;
    let jobs: Vec<(Policy, u64)> = plan
        .policies
        .iter()
        .flat_map(|&p| {
            let seeds = if p.is_seeded() { plan.seeds.clone() } else { vec![0] };
            seeds.into_iter().map(move |s| (p, s))
        })
        .collect();
    let want_json = a.run.json.is_some();
    let runs = pool(a.run.jobs)?.install(|| {
        jobs.par_iter()
            .map(|&(p, s)| execute(&eval, p, s, &plan, want_json))
            .collect::<Result<Vec<_>>>()
    })?;
    emit(runs, &a.run)
}

pub fn sweep(a: SweepArgs) -> Result<()> {
    let plan = plan(&a.run)?;
    let counts = parse_counts(&a.robots).map_err(|e| CliError::usage(format!("--robots: {e}")))?;
    let (weight_low, weight_high) = parse_weight_range(&a.weight_range).map_err(|e| CliError::usage(format!("--weight-range: {e}")))?;
    let params = MatrixParams {
        density: a.density,
        weight_low,
        weight_high,
    };
    params.validate()?;
    let template = load_scenario(&a.template, a.run.profile.as_deref())?;
    let robot = template.scene.robots[0].clone();
    let edges = template.scene.edges.clone();
    let cells: Vec<(usize, u64)> = counts
        .iter()
        .flat_map(|&n| plan.seeds.iter().map(move |&s| (n, s)))
        .collect();
    let want_json = a.run.json.is_some();
    let runs = pool(a.run.jobs)?.install(|| {
        cells
            .par_iter()
            .map(|&(n, seed)| {
                let s = generate::random_matrix_scenario(n, edges.clone(), &robot, template.profile.clone(), &params, seed)?;
                let eval = Evaluator::new(&s.scene, &s.profile)?;
                plan.policies
                    .iter()
                    .map(|&p| {
                        let mut run = execute(&eval, p, seed, &plan, want_json)?;
                        // the scene itself depends on the seed
                        run.row.seed = Some(seed);
                        Ok(run)
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()
    })?;
    emit(runs.into_iter().flatten().collect(), &a.run)
}

pub fn mapmerge(a: MapmergeArgs) -> Result<()> {
    let maps = a
        .maps
        .iter()
        .map(|p| gridmap::read_map(p).map_err(|e| CliError::usage(format!("{}: {e}", p.display()))))
        .collect::<Result<Vec<_>>>()?;
    let merged = gridmap::compose_detailed(&maps)?;
    let image_name = a
        .out
        .file_name()
        .ok_or_else(|| CliError::usage("--out must name a file"))?
        .to_string_lossy()
        .into_owned();
    let (image, meta) = gridmap::write_map(&merged.grid, &image_name);
    let mut outputs = Outputs::default();
    outputs.add(&a.out, image);
    outputs.add(a.out.with_extension("yaml"), meta);
    outputs.commit()?;

    for (path, m) in a.maps.iter().zip(&maps) {
        println!("input {} known={}", path.display(), gridmap::known_size_bytes(m));
    }
    for i in 0..maps.len() {
        for j in (i + 1)..maps.len() {
            let shared = gridmap::intersection_known(&maps[i], &maps[j])?;
            let degree = gridmap::measured_overlap_degree(&maps[i], &maps[j])?;
            println!("pair {i} {j} shared={shared} degree={degree:.6}");
        }
    }
    println!(
        "merged known={} size={}x{} pairwise_checks={} components={:?}",
        gridmap::known_size_bytes(&merged.grid),
        merged.grid.width(),
        merged.grid.height(),
        merged.pairwise_checks,
        merged.components
    );
    Ok(())
}

pub fn profile(a: ProfileArgs) -> Result<()> {
    let ks = parse_counts(&a.k).map_err(|e| CliError::usage(format!("--k: {e}")))?;
    if a.side < 3 {
        return Err(CliError::usage("--side must be at least 3"));
    }
    let p = gridmap::profile_fusion(&ks, a.reps, |k| synthetic::robot_maps(k, a.side, a.seed))?;
    println!("{:>4} {:>8} {:>12}", "k", "checks", "seconds");
    for s in &p.samples {
        println!("{:>4} {:>8} {:>12.6}", s.k, s.pairwise_checks, s.seconds);
    }
    println!(
        "fit alpha={:.6e} beta={:.6e} gamma={:.6e} r2={:.4}",
        p.fit.alpha, p.fit.beta, p.fit.gamma, p.fit.r_squared
    );
    if let Some(out) = &a.out {
        let mut outputs = Outputs::default();
        outputs.add(out, serde_json::to_string_pretty(&p).expect("profiles serialize") + "\n");
        outputs.commit()?;
    }
    Ok(())
}

pub fn generate(a: GenerateArgs) -> Result<()> {
    let mut outputs = Outputs::default();
    match a.kind {
        Fixture::Maps => {
            if a.side < 3 {
                return Err(CliError::usage("--side must be at least 3"));
            }
            for (i, m) in synthetic::robot_maps(a.robots, a.side, a.seed)?.iter().enumerate() {
                let name = format!("map_{i}.pgm");
                let (image, meta) = gridmap::write_map(m, &name);
                outputs.add(a.out.join(&name), image);
                outputs.add(a.out.join(format!("map_{i}.yaml")), meta);
            }
        }
        kind => {
            let prof = profile::resolve(&a.profile, profile_dir().as_deref())?;
            let s = match kind {
                Fixture::Apartment => generate::apartment_scenario(a.robots, a.edges, prof, a.seed)?,
                Fixture::Prototype => generate::prototype_scenario(prof)?,
                Fixture::Random => {
                    let (weight_low, weight_high) =
                        parse_weight_range(&a.weight_range).map_err(|e| CliError::usage(format!("--weight-range: {e}")))?;
                    let params = MatrixParams {
                        density: a.density,
                        weight_low,
                        weight_high,
                    };
                    generate::random_matrix_scenario(
                        a.robots,
                        generate::default_edges(a.edges),
                        &generate::template_robot(),
                        prof,
                        &params,
                        a.seed,
                    )?
                }
                Fixture::Maps => unreachable!(),
            };
            outputs.add(&a.out, s.to_json() + "\n");
        }
    }
    outputs.commit()
}
