use std::fs::File;
use std::io::BufReader;
use std::path::{Path, PathBuf};

use chainstate_core::chainopt::{
    default_t_max, first_maximum, optimize_boundary, BoundarySearch, DEFAULT_DT,
};
use chainstate_core::disorder::{
    default_p_grid, disorder_study, line_params, ControlSource, DisorderConfig,
};
use chainstate_core::inverse::{
    discrepancy, feasibility_scan, solve_general, solve_werner, InverseSolution, SolveOptions,
    TargetState,
};
use chainstate_core::probing::{
    extract_params, probe_set, read_probe_json, simulate_probes, write_probe_json, MatrixRecord,
};
use chainstate_core::receiver::{
    assemble_rho, compute_line_params, partial_trace_oracle, Family, LineParams,
};
use chainstate_core::{diagonalize, reference, ChainSpec, ExcitationBasis, HamiltonianBlocks};
use clap::{Args, Subcommand, ValueEnum};
use nalgebra::Matrix4;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::error::CliError;
use crate::output::{provenance, Artifacts};
use crate::report;

#[derive(Subcommand, Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Command {
    /// Tune the two boundary coupling pairs for end-to-end transfer.
    OptimizeChain(OptimizeArgs),
    /// Compute the 170 line parameters of a chain.
    ComputeParams(ComputeArgs),
    /// Recover the line parameters from probe-state receiver matrices.
    ProbeParams(ProbeArgs),
    /// Find sender amplitudes creating a target receiver state.
    CreateState(CreateArgs),
    /// Locate the largest creatable Werner parameter.
    Feasibility(FeasibilityArgs),
    /// Monte-Carlo study of random bulk couplings.
    DisorderStudy(DisorderArgs),
    /// Run the reference reproduction checks and print a report.
    #[command(alias = "reproduce-paper")]
    Reproduce(ReproduceArgs),
    /// Execute a command described by a JSON config file.
    #[serde(skip)]
    Run(RunArgs),
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChainArgs {
    /// Number of nodes.
    #[arg(long)]
    pub n: usize,
    /// Boundary-tuned couplings: tabulated for 20 and 60 nodes, optimized otherwise.
    #[arg(long)]
    #[serde(default)]
    pub tuned: bool,
    #[arg(long, requires = "delta2", conflicts_with = "tuned")]
    #[serde(default)]
    pub delta1: Option<f64>,
    #[arg(long, requires = "delta1", conflicts_with = "tuned")]
    #[serde(default)]
    pub delta2: Option<f64>,
    /// Registration time; defaults to the first transfer maximum.
    #[arg(long)]
    #[serde(default)]
    pub t0: Option<f64>,
}

/// Chain and registration time after defaults are filled in.
#[derive(Debug, Clone, Serialize)]
pub struct ResolvedChain {
    pub chain: ChainSpec,
    pub t0: f64,
    pub source: &'static str,
}

impl ChainArgs {
    pub fn resolve(&self) -> Result<ResolvedChain, CliError> {
        let (chain, t_ref, source) = match (self.delta1, self.delta2, self.tuned) {
            (Some(d1), Some(d2), _) => (ChainSpec::tuned(self.n, d1, d2)?, None, "explicit"),
            (None, None, true) => match reference::tuned(self.n) {
                Some(r) => (
                    ChainSpec::tuned(self.n, r.delta1, r.delta2)?,
                    Some(r.t0),
                    "tabulated",
                ),
                None => {
                    let opt = optimize_boundary(self.n, &BoundarySearch::new(self.n))?;
                    (
                        ChainSpec::tuned(self.n, opt.delta1, opt.delta2)?,
                        Some(opt.t0),
                        "optimized",
                    )
                }
            },
            (None, None, false) => (ChainSpec::uniform(self.n)?, None, "uniform"),
            _ => {
                return Err(CliError::Config(
                    "delta1 and delta2 must be given together".into(),
                ))
            }
        };
        let t0 = match (self.t0, t_ref) {
            (Some(t), _) => t,
            (None, Some(t)) => t,
            (None, None) => {
                let basis = ExcitationBasis::new(chain.n_nodes)?;
                let spectral = diagonalize(&HamiltonianBlocks::build(&chain, &basis)?)?;
                first_maximum(&spectral, default_t_max(chain.n_nodes), DEFAULT_DT)?.0
            }
        };
        if !(t0.is_finite() && t0 >= 0.0) {
            return Err(CliError::Config(format!(
                "registration time {t0} must be finite and non-negative"
            )));
        }
        Ok(ResolvedChain { chain, t0, source })
    }
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptimizeArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 0.01)]
    #[serde(default = "default_grid_step")]
    pub grid_step: f64,
    /// Scan horizon for the first maximum; defaults to 3N.
    #[arg(long)]
    #[serde(default)]
    pub t_max: Option<f64>,
    #[arg(long)]
    #[serde(default)]
    pub out: Option<PathBuf>,
}

fn default_grid_step() -> f64 {
    0.01
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComputeArgs {
    #[command(flatten)]
    pub chain: ChainArgs,
    /// Line-parameter CSV; printed to stdout when absent.
    #[arg(long)]
    #[serde(default)]
    pub out: Option<PathBuf>,
    /// Also export the transfer amplitudes from the sender.
    #[arg(long)]
    #[serde(default)]
    pub amplitudes_out: Option<PathBuf>,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProbeArgs {
    #[command(flatten)]
    pub chain: ChainArgs,
    /// Probe measurements to extract from; simulated on the chain when absent.
    #[arg(long)]
    #[serde(default)]
    pub input: Option<PathBuf>,
    /// Where to save simulated probe measurements.
    #[arg(long)]
    #[serde(default)]
    pub probes_out: Option<PathBuf>,
    #[arg(long)]
    #[serde(default)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverArgs {
    /// Random starts of the multi-start solver.
    #[arg(long, default_value_t = 32)]
    #[serde(default = "default_starts")]
    pub starts: usize,
    #[arg(long, default_value_t = 0)]
    #[serde(default)]
    pub seed: u64,
}

fn default_starts() -> usize {
    32
}

impl SolverArgs {
    fn options(&self) -> Result<SolveOptions, CliError> {
        if self.starts == 0 {
            return Err(CliError::Config("at least one start is required".into()));
        }
        Ok(SolveOptions {
            starts: self.starts,
            seed: self.seed,
            ..SolveOptions::default()
        })
    }
}

#[derive(ValueEnum, Debug, Clone, Copy, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "UPPERCASE")]
pub enum FamilyArg {
    #[value(name = "I")]
    I,
    #[value(name = "II")]
    Ii,
    #[value(name = "III")]
    Iii,
}

impl From<FamilyArg> for Family {
    fn from(f: FamilyArg) -> Self {
        match f {
            FamilyArg::I => Family::I,
            FamilyArg::Ii => Family::II,
            FamilyArg::Iii => Family::III,
        }
    }
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CreateArgs {
    /// Line-parameter CSV.
    #[arg(long)]
    pub params: PathBuf,
    /// `werner` or `file:<path>` with a JSON {re, im} 4x4 matrix.
    #[arg(long)]
    pub target: String,
    /// Werner parameter.
    #[arg(long)]
    #[serde(default)]
    pub p: Option<f64>,
    /// Solve with this family set to zero; the discrepancy is still
    /// evaluated on the full table.
    #[arg(long, value_enum)]
    #[serde(default)]
    pub zero_family: Option<FamilyArg>,
    #[command(flatten)]
    #[serde(default = "default_solver")]
    pub solver: SolverArgs,
    #[arg(long)]
    #[serde(default)]
    pub out: Option<PathBuf>,
}

fn default_solver() -> SolverArgs {
    SolverArgs {
        starts: default_starts(),
        seed: 0,
    }
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FeasibilityArgs {
    #[arg(long)]
    pub params: PathBuf,
    #[arg(long, default_value_t = 0.0)]
    #[serde(default)]
    pub p_min: f64,
    #[arg(long, default_value_t = 1.0)]
    #[serde(default = "one")]
    pub p_max: f64,
    #[arg(long, default_value_t = 0.05)]
    #[serde(default = "default_p_step")]
    pub p_step: f64,
    /// Bisection stops when the bracket is narrower than this.
    #[arg(long, default_value_t = 1e-3)]
    #[serde(default = "default_resolution")]
    pub resolution: f64,
    #[command(flatten)]
    #[serde(default = "default_solver")]
    pub solver: SolverArgs,
    #[arg(long)]
    #[serde(default)]
    pub out: Option<PathBuf>,
}

fn one() -> f64 {
    1.0
}
fn default_p_step() -> f64 {
    0.05
}
fn default_resolution() -> f64 {
    1e-3
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DisorderArgs {
    #[command(flatten)]
    pub chain: ChainArgs,
    #[arg(long)]
    pub epsilon: f64,
    #[arg(long, default_value_t = 100)]
    #[serde(default = "default_chains")]
    pub chains: usize,
    #[arg(long)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = ControlArg::Solved)]
    #[serde(default)]
    pub controls: ControlArg,
    /// Study JSON; printed to stdout when absent.
    #[arg(long)]
    #[serde(default)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    #[serde(default)]
    pub params_csv: Option<PathBuf>,
    #[arg(long)]
    #[serde(default)]
    pub werner_csv: Option<PathBuf>,
}

fn default_chains() -> usize {
    100
}

#[derive(ValueEnum, Debug, Clone, Copy, Serialize, Deserialize, PartialEq, Eq, Default)]
#[serde(rename_all = "kebab-case")]
pub enum ControlArg {
    /// Solved on the unperturbed chain.
    #[default]
    Solved,
    /// Tabulated controls of the tuned 20-node chain.
    Published,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReproduceArgs {
    /// 20 runs every check, 60 the chain and parameter-table checks.
    #[arg(long, default_value_t = 20)]
    #[serde(default = "twenty")]
    pub n: usize,
    #[arg(long, default_value_t = 7)]
    #[serde(default = "seven")]
    pub seed: u64,
    #[arg(long, default_value_t = 100)]
    #[serde(default = "default_chains")]
    pub chains: usize,
    /// Skip the Monte-Carlo disorder checks.
    #[arg(long)]
    #[serde(default)]
    pub skip_disorder: bool,
}

fn twenty() -> usize {
    20
}
fn seven() -> u64 {
    7
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct RunArgs {
    #[arg(long)]
    pub config: PathBuf,
}

fn open(path: &Path) -> Result<BufReader<File>, CliError> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn read_params(path: &Path) -> Result<LineParams, CliError> {
    Ok(LineParams::read_csv(open(path)?)?)
}

fn params_csv(params: &LineParams, header: &[String]) -> Result<Vec<u8>, CliError> {
    let mut buf = Vec::new();
    params.write_csv(&mut buf, header)?;
    Ok(buf)
}

/// Writes `bytes` to `out`, or stdout when no path is given.
fn emit(artifacts: &mut Artifacts, out: &Option<PathBuf>, bytes: Vec<u8>) {
    match out {
        Some(p) => artifacts.add(p, bytes),
        None => print!("{}", String::from_utf8_lossy(&bytes)),
    }
}

fn json_bytes(value: &serde_json::Value) -> Vec<u8> {
    let mut b = serde_json::to_vec_pretty(value).expect("json value serializes");
    b.push(b'\n');
    b
}

pub fn execute(cmd: &Command) -> Result<(), CliError> {
    let mut artifacts = Artifacts::default();
    match cmd {
        Command::Run(args) => {
            let text = std::fs::read_to_string(&args.config)
                .map_err(|e| CliError::Io(format!("{}: {e}", args.config.display())))?;
            let inner: Command = serde_json::from_str(&text)
                .map_err(|e| CliError::Config(format!("{}: {e}", args.config.display())))?;
            return execute(&inner);
        }
        Command::OptimizeChain(a) => {
            let mut search = BoundarySearch::new(a.n);
            search.grid_step = a.grid_step;
            if let Some(t) = a.t_max {
                search.t_max = t;
            }
            let opt = optimize_boundary(a.n, &search)?;
            let out = json!({
                "config": cmd,
                "delta1": opt.delta1,
                "delta2": opt.delta2,
                "t0": opt.t0,
                "amplitude": opt.amplitude,
            });
            emit(&mut artifacts, &a.out, json_bytes(&out));
        }
        Command::ComputeParams(a) => {
            let r = a.chain.resolve()?;
            let basis = ExcitationBasis::new(r.chain.n_nodes)?;
            let spectral = diagonalize(&HamiltonianBlocks::build(&r.chain, &basis)?)?;
            let amps = spectral.propagators_from(r.t0, 4);
            let params = compute_line_params(&amps, 4)?;
            let mut header = provenance(cmd);
            header.push(format!(
                "chain: {}",
                serde_json::to_string(&r).expect("chain serializes")
            ));
            emit(&mut artifacts, &a.out, params_csv(&params, &header)?);
            if let Some(path) = &a.amplitudes_out {
                let mut buf = Vec::new();
                for h in &header {
                    buf.extend_from_slice(format!("# {h}\n").as_bytes());
                }
                amps.write_csv(&mut buf)?;
                artifacts.add(path, buf);
            }
        }
        Command::ProbeParams(a) => {
            let r = a.chain.resolve()?;
            let outputs = match &a.input {
                Some(path) => read_probe_json(open(path)?)?,
                None => {
                    let basis = ExcitationBasis::new(r.chain.n_nodes)?;
                    let spectral = diagonalize(&HamiltonianBlocks::build(&r.chain, &basis)?)?;
                    let amps = spectral.propagators_from(r.t0, 4);
                    simulate_probes(&probe_set(4)?, |s| partial_trace_oracle(s, &amps, &basis))?
                }
            };
            let params = extract_params(&outputs, r.chain.n_nodes, r.t0)?;
            let mut header = provenance(cmd);
            header.push(format!(
                "chain: {}",
                serde_json::to_string(&r).expect("chain serializes")
            ));
            emit(&mut artifacts, &a.out, params_csv(&params, &header)?);
            if let Some(path) = &a.probes_out {
                let mut buf = Vec::new();
                write_probe_json(&mut buf, &outputs)?;
                buf.push(b'\n');
                artifacts.add(path, buf);
            }
        }
        Command::CreateState(a) => {
            let params = read_params(&a.params)?;
            let opts = a.solver.options()?;
            let solve_on = match a.zero_family {
                Some(f) => params.with_family_zeroed(f.into()),
                None => params.clone(),
            };
            let (target, solution) = match a.target.as_str() {
                "werner" => {
                    let p = a.p.ok_or_else(|| {
                        CliError::Config("--p is required for a Werner target".into())
                    })?;
                    let target = TargetState::werner(p)?;
                    (target, solve_werner(&solve_on, p, &opts)?)
                }
                t => {
                    let Some(path) = t.strip_prefix("file:") else {
                        return Err(CliError::Config(format!(
                            "unknown target {t:?}; use werner or file:<path>"
                        )));
                    };
                    let rec: MatrixRecord = serde_json::from_reader(open(Path::new(path))?)
                        .map_err(|e| CliError::Config(format!("{path}: {e}")))?;
                    let target = TargetState::new(Matrix4::<Complex64>::from(&rec))?;
                    let sol = solve_general(&solve_on, &target, &opts)?;
                    (target, sol)
                }
            };
            let created = assemble_rho(&params, &solution.a)?;
            let true_delta = discrepancy(&created.rho, &target.matrix)?;
            let out = json!({
                "config": cmd,
                "a": sender_json(&solution),
                "residual": solution.residual,
                "discrepancy": true_delta,
                "discrepancy_on_solved_table": solution.discrepancy,
                "rho": MatrixRecord::from(&created.rho),
            });
            emit(&mut artifacts, &a.out, json_bytes(&out));
        }
        Command::Feasibility(a) => {
            let params = read_params(&a.params)?;
            if !(a.p_step > 0.0 && a.p_min <= a.p_max && a.resolution > 0.0) {
                return Err(CliError::Config(
                    "need p_step > 0, p_min <= p_max and resolution > 0".into(),
                ));
            }
            let steps = ((a.p_max - a.p_min) / a.p_step + 1e-9).floor() as usize;
            let grid: Vec<f64> = (0..=steps).map(|i| a.p_min + i as f64 * a.p_step).collect();
            let b = feasibility_scan(&params, &grid, a.resolution, &a.solver.options()?)?;
            let out = json!({
                "config": cmd,
                "estimate": b.estimate(),
                "uncertainty": b.uncertainty(),
                "lower": b.lower,
                "upper": b.upper,
                "grid": b.grid,
            });
            emit(&mut artifacts, &a.out, json_bytes(&out));
        }
        Command::DisorderStudy(a) => {
            if a.epsilon < 0.0 || !a.epsilon.is_finite() {
                return Err(CliError::Config(format!(
                    "epsilon {} must be non-negative",
                    a.epsilon
                )));
            }
            if a.chains < 2 {
                return Err(CliError::Config("at least two chains are required".into()));
            }
            let r = a.chain.resolve()?;
            let config = DisorderConfig {
                chain: r.chain,
                t0: r.t0,
                epsilon: a.epsilon,
                n_chains: a.chains,
                seed: a.seed,
                p_grid: default_p_grid(),
                controls: match a.controls {
                    ControlArg::Solved => ControlSource::Solved,
                    ControlArg::Published => ControlSource::Published,
                },
            };
            let study = disorder_study(&config)?;
            let header = provenance(cmd);
            let out = json!({ "config": cmd, "study": study });
            emit(&mut artifacts, &a.out, json_bytes(&out));
            if let Some(path) = &a.params_csv {
                let mut buf = Vec::new();
                study.write_params_csv(&mut buf, &header)?;
                artifacts.add(path, buf);
            }
            if let Some(path) = &a.werner_csv {
                let mut buf = Vec::new();
                study.write_werner_csv(&mut buf, &header)?;
                artifacts.add(path, buf);
            }
        }
        Command::Reproduce(a) => {
            let failed = report::reproduce(a)?;
            if failed > 0 {
                return Err(CliError::ChecksFailed(failed));
            }
        }
    }
    artifacts.commit()
}

/// Sender amplitudes in basis order, labelled `0`, `1`..`4`, `12`..`34`.
fn sender_json(sol: &InverseSolution) -> serde_json::Value {
    let s = &sol.a;
    let entry = |label: String, z: Complex64| json!({ "state": label, "re": z.re, "im": z.im });
    let mut rows = vec![entry("0".into(), s.a0)];
    for (k, z) in s.single.iter().enumerate() {
        rows.push(entry((k + 1).to_string(), *z));
    }
    let pairs = chainstate_core::basis::pair_list(s.n_sender());
    for ((n, m), z) in pairs.iter().zip(&s.double) {
        rows.push(entry(format!("{n}{m}"), *z));
    }
    serde_json::Value::Array(rows)
}

/// Line parameters of a chain at a time, shared with the report.
pub fn chain_params(chain: &ChainSpec, t0: f64) -> Result<LineParams, CliError> {
    Ok(line_params(chain, t0, 4)?)
}
