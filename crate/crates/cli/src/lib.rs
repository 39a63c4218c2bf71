//! Commands behind the `glcip` binary: generate, solve, verify and bench.

use std::collections::HashMap;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Duration;

use anyhow::{bail, Context, Result};
use glcip::{
    generate_instance, solve, Formulation, GeneratorParams, IncentiveSolution, Instance, Propagator, Rational,
    SolveOptions, SolveReport, Termination,
};
use serde::{Deserialize, Serialize};

/// JSON schema of the solve report.
pub const REPORT_SCHEMA: &str = include_str!("../schema/solve_report.schema.json");

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_LIMIT: i32 = 2;
pub const EXIT_INFEASIBLE_SOLUTION: i32 = 3;

pub fn load_instance(path: &Path) -> Result<Instance> {
    Instance::load(path).with_context(|| format!("loading instance {}", path.display()))
}

pub fn cmd_generate(params: &GeneratorParams, out: Option<&Path>) -> Result<Instance> {
    let inst = generate_instance(params)?;
    if let Some(path) = out {
        inst.save(path).with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(inst)
}

#[derive(Clone, Debug)]
pub struct SolveArgs {
    pub formulation: Formulation,
    pub time_limit: f64,
    pub node_limit: Option<usize>,
    pub cutoff: Option<u64>,
    /// The solver is deterministic; the seed only labels the run.
    pub seed: u64,
    /// Leave wall time out of the report.
    pub reproducible: bool,
}

impl SolveArgs {
    pub fn new(formulation: Formulation) -> Self {
        SolveArgs { formulation, time_limit: 60.0, node_limit: None, cutoff: None, seed: 0, reproducible: false }
    }

    pub fn options(&self) -> SolveOptions {
        let mut opts = SolveOptions::new(self.formulation);
        opts.time_limit = Some(Duration::from_secs_f64(self.time_limit));
        opts.node_limit = self.node_limit;
        opts.cutoff = self.cutoff;
        opts.reproducible = self.reproducible;
        opts
    }
}

pub fn solve_instance(inst: &Instance, args: &SolveArgs) -> Result<SolveReport> {
    Ok(solve(inst, &args.options())?.report)
}

pub fn cmd_solve(path: &Path, args: &SolveArgs) -> Result<SolveReport> {
    solve_instance(&load_instance(path)?, args)
}

pub fn report_json(report: &SolveReport) -> String {
    serde_json::to_string_pretty(report).expect("report serializes")
}

pub fn exit_code(report: &SolveReport) -> i32 {
    match report.termination {
        Termination::Optimal | Termination::Infeasible => EXIT_OK,
        Termination::TimeLimit | Termination::NodeLimit => EXIT_LIMIT,
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verification {
    pub feasible: bool,
    pub cost: u64,
    pub activated: usize,
    pub required: usize,
}

pub fn verify(inst: &Instance, sol: &IncentiveSolution) -> Result<Verification> {
    let prop = Propagator::new(inst);
    let idx = sol.indices(inst)?;
    let activated = prop.cascade(&idx).activated.len();
    let required = inst.coverage_target();
    let cost = idx.iter().enumerate().map(|(i, &p)| inst.costs(i)[p]).sum();
    Ok(Verification { feasible: activated >= required, cost, activated, required })
}

/// Reads either a bare incentive vector or a solve report's incumbent.
pub fn load_solution(path: &Path) -> Result<IncentiveSolution> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    if let Ok(sol) = serde_json::from_str::<IncentiveSolution>(&text) {
        return Ok(sol);
    }
    let report: SolveReport =
        serde_json::from_str(&text).with_context(|| format!("{} is neither a solution nor a report", path.display()))?;
    match report.incumbent {
        Some(sol) => Ok(sol),
        None => bail!("report {} carries no incumbent", path.display()),
    }
}

pub fn cmd_verify(instance: &Path, solution: &Path) -> Result<Verification> {
    verify(&load_instance(instance)?, &load_solution(solution)?)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Grid {
    /// `n` in {8, 12, 20}.
    Desk,
    /// `n` in {50, 75, 100}; no optimality promise within default limits.
    Full,
}

const ALPHAS: [&str; 3] = ["0.1", "0.5", "1"];
const GAMMAS: [&str; 3] = ["0.9", "1", "1.1"];

/// Generator parameters of a benchmark grid, `seeds` graphs per
/// `(n, K, beta)` and nine `(alpha, gamma)` variants per graph.
pub fn grid_params(grid: Grid, seeds: u64) -> Vec<GeneratorParams> {
    let (sizes, degrees): (&[usize], &[usize]) = match grid {
        Grid::Desk => (&[8, 12, 20], &[4, 8]),
        Grid::Full => (&[50, 75, 100], &[4, 8, 12, 16]),
    };
    let mut out = Vec::new();
    for &n in sizes {
        for &k in degrees.iter().filter(|&&k| k < n) {
            for beta in [0.1, 0.3] {
                for seed in 0..seeds {
                    for a in ALPHAS {
                        for g in GAMMAS {
                            let alpha: Rational = a.parse().expect("grid alpha");
                            let gamma: Rational = g.parse().expect("grid gamma");
                            out.push(GeneratorParams::new(n, k, beta, seed, alpha, gamma));
                        }
                    }
                }
            }
        }
    }
    out
}

fn instance_file_name(p: &GeneratorParams) -> String {
    format!(
        "n{}_k{}_b{}_s{}_a{}_g{}.txt",
        p.n,
        p.k,
        p.beta,
        p.seed,
        p.alpha.to_f64(),
        p.gamma.to_f64()
    )
}

/// Writes every grid instance into `dir` plus a `manifest.csv` pairing each
/// with every formulation. Returns the manifest path.
pub fn cmd_generate_grid(grid: Grid, seeds: u64, dir: &Path, formulations: &[Formulation]) -> Result<PathBuf> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let manifest = dir.join("manifest.csv");
    let mut w = csv::Writer::from_path(&manifest)?;
    for p in grid_params(grid, seeds) {
        let name = instance_file_name(&p);
        cmd_generate(&p, Some(&dir.join(&name)))?;
        for f in formulations {
            w.serialize(ManifestRow { instance: PathBuf::from(&name), formulation: f.to_string(), k: p.k, beta: p.beta, time_limit: None })?;
        }
    }
    w.flush()?;
    Ok(manifest)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ManifestRow {
    /// Relative paths are resolved against the manifest's directory.
    pub instance: PathBuf,
    pub formulation: String,
    pub k: usize,
    pub beta: f64,
    pub time_limit: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunRow {
    pub instance: String,
    pub formulation: String,
    pub n: Option<usize>,
    #[serde(rename = "K")]
    pub k: usize,
    pub beta: f64,
    pub alpha: Option<f64>,
    pub gamma: Option<f64>,
    pub termination: Option<Termination>,
    pub z_ub: Option<u64>,
    pub z_lb: Option<u64>,
    pub gap_pct: Option<f64>,
    pub time_s: Option<f64>,
    pub nodes: Option<usize>,
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AggregateRow {
    pub n: usize,
    #[serde(rename = "K")]
    pub k: usize,
    pub beta: f64,
    pub alpha: f64,
    pub formulation: String,
    pub avg_gap_pct: f64,
    pub avg_time_s: f64,
    pub n_optimal: usize,
}

fn run_row(base: &Path, row: &ManifestRow, default_limit: f64) -> RunRow {
    let mut out = RunRow {
        instance: row.instance.display().to_string(),
        formulation: row.formulation.clone(),
        n: None,
        k: row.k,
        beta: row.beta,
        alpha: None,
        gamma: None,
        termination: None,
        z_ub: None,
        z_lb: None,
        gap_pct: None,
        time_s: None,
        nodes: None,
        error: None,
    };
    let attempt = || -> Result<(Instance, SolveReport)> {
        let formulation: Formulation = row.formulation.parse()?;
        let inst = load_instance(&base.join(&row.instance))?;
        let mut args = SolveArgs::new(formulation);
        args.time_limit = row.time_limit.unwrap_or(default_limit);
        let report = solve_instance(&inst, &args)?;
        Ok((inst, report))
    };
    match attempt() {
        Ok((inst, report)) => {
            out.n = Some(inst.node_count());
            out.alpha = Some(inst.alpha().to_f64());
            out.gamma = Some(inst.gamma().to_f64());
            out.termination = Some(report.termination);
            out.z_ub = report.z_ub;
            out.z_lb = report.z_lb;
            out.gap_pct = Some(report.gap_pct);
            out.time_s = report.wall_time_s;
            out.nodes = Some(report.nodes);
        }
        Err(e) => out.error = Some(format!("{e:#}")),
    }
    out
}

/// Averages successful runs per `(n, K, beta, alpha, formulation)` cell in
/// order of first appearance.
pub fn aggregate(runs: &[RunRow]) -> Vec<AggregateRow> {
    let mut order = Vec::new();
    let mut cells: HashMap<(usize, usize, u64, u64, String), Vec<&RunRow>> = HashMap::new();
    for r in runs {
        let (Some(n), Some(alpha), None) = (r.n, r.alpha, &r.error) else { continue };
        let key = (n, r.k, r.beta.to_bits(), alpha.to_bits(), r.formulation.clone());
        cells.entry(key.clone()).or_insert_with(|| {
            order.push(key);
            Vec::new()
        });
    }
    for r in runs {
        let (Some(n), Some(alpha), None) = (r.n, r.alpha, &r.error) else { continue };
        let key = (n, r.k, r.beta.to_bits(), alpha.to_bits(), r.formulation.clone());
        cells.get_mut(&key).expect("cell registered").push(r);
    }
    order
        .into_iter()
        .map(|key| {
            let rows = &cells[&key];
            let count = rows.len() as f64;
            AggregateRow {
                n: key.0,
                k: key.1,
                beta: f64::from_bits(key.2),
                alpha: f64::from_bits(key.3),
                formulation: key.4.clone(),
                avg_gap_pct: rows.iter().map(|r| r.gap_pct.unwrap_or(100.0)).sum::<f64>() / count,
                avg_time_s: rows.iter().map(|r| r.time_s.unwrap_or(0.0)).sum::<f64>() / count,
                n_optimal: rows.iter().filter(|r| r.termination == Some(Termination::Optimal)).count(),
            }
        })
        .collect()
}

pub fn read_manifest(path: &Path) -> Result<Vec<ManifestRow>> {
    let mut rdr = csv::Reader::from_path(path).with_context(|| format!("reading manifest {}", path.display()))?;
    let rows = rdr.deserialize().collect::<Result<Vec<ManifestRow>, _>>()?;
    Ok(rows)
}

/// Runs every manifest row in order. A row that fails is recorded with its
/// error and the run continues.
pub fn cmd_bench(manifest: &Path, default_limit: f64) -> Result<(Vec<RunRow>, Vec<AggregateRow>)> {
    let rows = read_manifest(manifest)?;
    let base = manifest.parent().unwrap_or(Path::new("."));
    let mut runs = Vec::with_capacity(rows.len());
    for (i, row) in rows.iter().enumerate() {
        let run = run_row(base, row, default_limit);
        log::info!("[{}/{}] {} {}: {:?} gap {:?}", i + 1, rows.len(), run.instance, run.formulation, run.termination, run.gap_pct);
        runs.push(run);
    }
    let agg = aggregate(&runs);
    Ok((runs, agg))
}

pub fn write_csv<T: Serialize>(rows: &[T], out: impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(n: usize, alpha: f64, f: &str, gap: f64, optimal: bool) -> RunRow {
        RunRow {
            instance: "x".into(),
            formulation: f.into(),
            n: Some(n),
            k: 4,
            beta: 0.1,
            alpha: Some(alpha),
            gamma: Some(1.0),
            termination: Some(if optimal { Termination::Optimal } else { Termination::TimeLimit }),
            z_ub: Some(10),
            z_lb: Some(10),
            gap_pct: Some(gap),
            time_s: Some(1.0),
            nodes: Some(1),
            error: None,
        }
    }

    #[test]
    fn cells_average_in_manifest_order() {
        let mut failed = run(8, 0.5, "cf", 0.0, true);
        failed.error = Some("missing".into());
        let runs = vec![run(8, 0.5, "arc", 0.0, true), run(8, 0.1, "arc", 20.0, false), run(8, 0.5, "arc", 10.0, false), failed];
        let agg = aggregate(&runs);
        assert_eq!(agg.len(), 2);
        assert_eq!((agg[0].alpha, agg[0].avg_gap_pct, agg[0].n_optimal), (0.5, 5.0, 1));
        assert_eq!((agg[1].alpha, agg[1].avg_gap_pct, agg[1].n_optimal), (0.1, 20.0, 0));
    }

    #[test]
    fn all_optimal_cell_has_zero_gap() {
        let runs: Vec<RunRow> = (0..5).map(|_| run(12, 1.0, "icc", 0.0, true)).collect();
        let agg = aggregate(&runs);
        assert_eq!(agg.len(), 1);
        assert_eq!(agg[0].avg_gap_pct, 0.0);
        assert_eq!(agg[0].n_optimal, 5);
    }

    #[test]
    fn desk_grid_respects_degree_bound() {
        let params = grid_params(Grid::Desk, 1);
        // n = 8 admits K = 4 only: (1 + 2 + 2) degree choices, 2 betas, 9 variants.
        assert_eq!(params.len(), 5 * 2 * 9);
        assert!(params.iter().all(|p| p.k < p.n));
    }

    #[test]
    fn exit_codes() {
        let inst = Instance::new(
            vec![glcip::NodeSpec { threshold: 5, incentives: vec![0, 5], costs: vec![0, 4] }],
            vec![],
            "1".parse().unwrap(),
            "1".parse().unwrap(),
        )
        .unwrap();
        let mut args = SolveArgs::new(Formulation::Cf);
        args.reproducible = true;
        let report = solve_instance(&inst, &args).unwrap();
        assert_eq!(exit_code(&report), EXIT_OK);
        let mut limited = report.clone();
        limited.termination = Termination::TimeLimit;
        assert_eq!(exit_code(&limited), EXIT_LIMIT);
    }
}
