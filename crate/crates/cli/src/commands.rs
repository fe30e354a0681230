use std::fs;
use std::path::{Path, PathBuf};
use std::time::Duration;

use degsched::bench::{run_bench, BenchPlan};
use degsched::net::{
    evaluate_accuracy, train_cold_observed, train_warm_observed, EpochRecord, SparseNet, TrainConfig,
    DEFAULT_TOLERANCES, HIDDEN_NEURONS,
};
use degsched::oracle::{generate_dataset, Dataset, SamplingPlan};
use degsched::sched::{bess_csv, costs_csv, dispatch_csv, recompute_degradation, schedule as solve_case, Case, Scheduled};
use degsched::solve::{compute_lmp, SolverOptions};
use serde::Serialize;

use crate::config::{input_file, output_path, BenchArgs, GenDataArgs, LmpArgs, Mode, ScheduleArgs, TrainArgs};
use crate::CliError;

pub const ACCURACY_HEADER: &str = "sparsity,acc_5,acc_10,acc_15,test_mse";
pub const BUS_LMP_HEADER: &str = "t,lmp,congested";
const SWEEP_SPARSITIES: [f64; 9] = [0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8];
const DENSE_EPOCHS: usize = 300;
const WARM_EPOCHS: usize = 250;
const COLD_EPOCHS: usize = 300;

fn write(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|e| CliError::Core(degsched::Error::Environment(format!("cannot write {}: {e}", path.display()))))
}

fn out_dir(p: Option<&PathBuf>) -> Result<PathBuf, CliError> {
    let dir = output_path(p, "out")?;
    fs::create_dir_all(&dir)
        .map_err(|e| CliError::Core(degsched::Error::Environment(format!("cannot create {}: {e}", dir.display()))))?;
    Ok(dir)
}

/// Appends `suffix` to the file name of `path`.
fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

fn load_case(spec: Option<&String>) -> Result<Case, CliError> {
    let spec = spec.ok_or_else(|| CliError::Usage("--case is required".into()))?;
    if degsched::fixtures::source(spec).is_some() {
        return Ok(degsched::fixtures::load(spec)?);
    }
    let path = input_file(Some(&PathBuf::from(spec)), "case")?;
    Ok(Case::load(&path)?)
}

fn load_net(p: &PathBuf, flag: &str) -> Result<SparseNet, CliError> {
    Ok(SparseNet::load(&input_file(Some(p), flag)?)?)
}

fn solver_options(gap: Option<f64>, time_limit: Option<f64>, threads: Option<usize>) -> Result<SolverOptions, CliError> {
    let mut opts = SolverOptions::from_env();
    if let Some(g) = gap {
        opts.mip_gap = g;
    }
    if let Some(t) = time_limit {
        if !(t > 0.0 && t.is_finite()) {
            return Err(CliError::Usage(format!("--time-limit {t} must be positive")));
        }
        opts.time_limit = Duration::from_secs_f64(t);
    }
    opts.threads = threads;
    opts.validate().map_err(|e| CliError::Usage(e.to_string()))?;
    Ok(opts)
}

fn check_sparsity(eps: f64) -> Result<(), CliError> {
    let max = (HIDDEN_NEURONS - 1) as f64 / HIDDEN_NEURONS as f64;
    if !(0.0..max).contains(&eps) {
        return Err(CliError::Usage(format!("sparsity {eps} must be in [0, 29/30)")));
    }
    Ok(())
}

pub fn gen_data(a: GenDataArgs) -> Result<(), CliError> {
    let out = output_path(a.out.as_ref(), "out")?;
    let samples = a.samples.unwrap_or(5000);
    if samples == 0 {
        return Err(CliError::Usage("--samples must be positive".into()));
    }
    let mut plan = SamplingPlan::with_samples(samples);
    if let Some(f) = a.test_fraction {
        plan.test_fraction = f;
    }
    let data = generate_dataset(&plan, a.seed.unwrap_or(42))?;
    if let Some(dir) = out.parent() {
        fs::create_dir_all(dir)?;
    }
    data.save(&out)
        .map_err(|e| CliError::Core(degsched::Error::Environment(format!("cannot write {}: {e}", out.display()))))?;
    println!("wrote {} samples to {}", data.samples.len(), out.display());
    Ok(())
}

struct Trainer<'a> {
    data: &'a Dataset,
    base: TrainConfig,
    dense_epochs: usize,
    epochs: usize,
}

impl Trainer<'_> {
    fn dense(&self, log: &mut Vec<EpochRecord>) -> Result<SparseNet, CliError> {
        let cfg = TrainConfig {
            epochs: self.dense_epochs,
            sparsity: 0.0,
            ..self.base.clone()
        };
        Ok(train_cold_observed(self.data, &cfg, &mut |r| log.push(*r))?)
    }

    /// Warm mode logs dense then fine-tune epochs as one numbered run.
    fn train(&self, mode: Mode, eps: f64, dense: Option<&SparseNet>, log: &mut Vec<EpochRecord>) -> Result<SparseNet, CliError> {
        let cfg = TrainConfig {
            epochs: self.epochs,
            sparsity: eps,
            ..self.base.clone()
        };
        match (mode, dense) {
            (Mode::Cold, _) => Ok(train_cold_observed(self.data, &cfg, &mut |r| log.push(*r))?),
            (Mode::Warm, Some(d)) if eps == 0.0 => Ok(d.clone()),
            (Mode::Warm, Some(d)) => {
                let offset = log.len();
                Ok(train_warm_observed(d, self.data, &cfg, &mut |r| {
                    log.push(EpochRecord {
                        epoch: r.epoch + offset,
                        ..*r
                    })
                })?)
            }
            (Mode::Warm, None) => unreachable!("warm training always has a dense net"),
        }
    }
}

fn accuracy_row(eps: f64, net: &SparseNet, data: &Dataset) -> Result<String, CliError> {
    let r = evaluate_accuracy(net, &data.test_samples(), &DEFAULT_TOLERANCES)?;
    let acc: Vec<String> = r.by_tolerance.iter().map(|(_, a)| a.to_string()).collect();
    Ok(format!("{eps},{},{}", acc.join(","), r.mse))
}

pub fn train(a: TrainArgs) -> Result<(), CliError> {
    let data_path = input_file(a.data.as_ref(), "data")?;
    let out = output_path(a.out.as_ref(), "out")?;
    let mode = a.mode.unwrap_or(Mode::Warm);
    let eps = a.sparsity.unwrap_or(0.0);
    check_sparsity(eps)?;
    let data = Dataset::load(&data_path)?;
    let defaults = TrainConfig::default();
    let trainer = Trainer {
        data: &data,
        base: TrainConfig {
            seed: a.seed.unwrap_or(defaults.seed),
            learning_rate: a.learning_rate.unwrap_or(defaults.learning_rate),
            batch_size: a.batch_size.unwrap_or(defaults.batch_size),
            ..defaults
        },
        dense_epochs: a.dense_epochs.unwrap_or(DENSE_EPOCHS),
        epochs: a.epochs.unwrap_or(if mode == Mode::Warm { WARM_EPOCHS } else { COLD_EPOCHS }),
    };
    trainer.base.validate().map_err(|e| CliError::Usage(e.to_string()))?;

    let mut log = Vec::new();
    let dense = match mode {
        Mode::Warm => Some(trainer.dense(&mut log)?),
        Mode::Cold => None,
    };
    let net = trainer.train(mode, eps, dense.as_ref(), &mut log)?;
    if let Some(dir) = out.parent() {
        fs::create_dir_all(dir)?;
    }
    net.save(&out)?;
    let mut text = format!("{}\n", EpochRecord::CSV_HEADER);
    for r in &log {
        text.push_str(&r.csv_line());
        text.push('\n');
    }
    write(&sibling(&out, ".log.csv"), &text)?;
    let row = accuracy_row(eps, &net, &data)?;
    println!("{ACCURACY_HEADER}\n{row}");

    if a.sweep {
        let mut table = format!("{ACCURACY_HEADER}\n");
        for &e in &SWEEP_SPARSITIES {
            let n = if e == eps { net.clone() } else { trainer.train(mode, e, dense.as_ref(), &mut Vec::new())? };
            table.push_str(&accuracy_row(e, &n, &data)?);
            table.push('\n');
        }
        let path = sibling(&out, ".accuracy.csv");
        write(&path, &table)?;
        println!("accuracy sweep written to {}", path.display());
    }
    Ok(())
}

#[derive(Serialize)]
struct ScheduleSummary {
    #[serde(flatten)]
    run: degsched::sched::RunSummary,
    operation: f64,
    bd_cost: f64,
    pseudo_total: f64,
    og_bd_cost: Option<f64>,
    updated_total: Option<f64>,
    total_discharged_mwh: f64,
    violations: usize,
}

pub fn schedule(a: ScheduleArgs) -> Result<(), CliError> {
    let case = load_case(a.case.as_ref())?;
    let net = match (&a.net, a.no_degradation) {
        (Some(p), _) => Some(load_net(p, "net")?),
        (None, true) => None,
        (None, false) => return Err(CliError::Usage("give --net or --no-degradation".into())),
    };
    let reference = a.reference.as_ref().map(|p| load_net(p, "reference")).transpose()?;
    let opts = solver_options(a.gap, a.time_limit, a.threads)?;
    let dir = out_dir(a.out.as_ref())?;

    let s: Scheduled = solve_case(&case, net.as_ref(), &opts)?;
    let sol = &s.solution;
    let og = match &reference {
        Some(r) => Some(recompute_degradation(r, &case, sol)?.iter().map(|d| d.cost).sum::<f64>()),
        None => None,
    };
    let report = degsched::sched::validate_solution(&case, sol);
    write(&dir.join("dispatch.csv"), &dispatch_csv(sol))?;
    write(&dir.join("bess.csv"), &bess_csv(&case, sol, net.as_ref()))?;
    write(&dir.join("costs.csv"), &costs_csv(sol, og))?;
    let summary = ScheduleSummary {
        run: s.summary(),
        operation: sol.costs.operation,
        bd_cost: sol.costs.degradation,
        pseudo_total: sol.costs.pseudo_total,
        og_bd_cost: og,
        updated_total: og.map(|o| sol.costs.operation + o),
        total_discharged_mwh: sol.total_discharged(),
        violations: report.violations.len(),
    };
    let json = serde_json::to_string_pretty(&summary).expect("summary serializes");
    write(&dir.join("summary.json"), &format!("{json}\n"))?;
    println!(
        "{}: {} objective {} in {:.2}s, {} binaries ({} NN)",
        summary.run.case,
        summary.run.status,
        summary.run.objective.map_or("-".into(), |o| o.to_string()),
        summary.run.wall_time_s,
        summary.run.binaries,
        summary.run.nn_binaries
    );
    if !report.is_empty() {
        write(&dir.join("violations.txt"), &report.to_string())?;
        return Err(CliError::Failed(format!(
            "schedule failed validation ({} violations, worst {:.3e}); see violations.txt",
            report.violations.len(),
            report.worst()
        )));
    }
    Ok(())
}

pub fn lmp(a: LmpArgs) -> Result<(), CliError> {
    let Case::Network(mut nc) = load_case(a.case.as_ref())? else {
        return Err(CliError::Usage("lmp needs a network case".into()));
    };
    let bus = a.bus.ok_or_else(|| CliError::Usage("--bus is required".into()))?;
    if !nc.buses.contains(&bus) {
        return Err(CliError::Usage(format!("bus {bus} is not in case `{}`", nc.name)));
    }
    if a.no_bess {
        nc = nc.without_bess();
    }
    let net = match (&a.net, a.no_degradation || a.no_bess) {
        (Some(p), _) => Some(load_net(p, "net")?),
        (None, true) => None,
        (None, false) => return Err(CliError::Usage("give --net, --no-degradation or --no-bess".into())),
    };
    let opts = solver_options(a.gap, a.time_limit, a.threads)?;
    let case = Case::Network(nc.clone());
    let s = solve_case(&case, net.as_ref(), &opts)?;
    let report = degsched::sched::validate_solution(&case, &s.solution);
    if !report.is_empty() {
        return Err(CliError::Failed(format!("schedule failed validation:\n{report}")));
    }
    let l = compute_lmp(&nc, &s.solution, net.as_ref(), &opts)?;
    let mut table = format!("{BUS_LMP_HEADER}\n");
    for t in 0..l.hours() {
        let price = l.price(bus, t).expect("bus checked above");
        table.push_str(&format!("{},{},{}\n", t + 1, price, l.is_congested(t) as u8));
    }
    print!("{table}");
    if a.out.is_some() {
        let dir = out_dir(a.out.as_ref())?;
        write(&dir.join("lmp.csv"), &l.csv())?;
        write(&dir.join(format!("lmp_bus{bus}.csv")), &table)?;
    }
    Ok(())
}

pub fn bench(a: BenchArgs) -> Result<(), CliError> {
    let case = load_case(a.case.as_ref())?;
    let data = Dataset::load(&input_file(a.data.as_ref(), "data")?)?;
    let sparsities = a.sparsities.clone().unwrap_or_else(|| vec![0.2, 0.3, 0.4, 0.5]);
    if sparsities.is_empty() {
        return Err(CliError::Usage("--sparsities is empty".into()));
    }
    for &e in &sparsities {
        check_sparsity(e)?;
    }
    let gaps = a.gaps.clone().unwrap_or_else(|| vec![0.01, 0.005, 0.001]);
    if gaps.len() == 1 {
        return Err(CliError::Usage("--gaps needs at least two values".into()));
    }
    let workers = a.workers.unwrap_or(1);
    if workers == 0 {
        return Err(CliError::Usage("--workers must be at least 1".into()));
    }
    let opts = solver_options(a.gap, a.time_limit, a.threads)?;
    let dir = out_dir(a.out.as_ref())?;
    let nets_dir = dir.join("nets");
    fs::create_dir_all(&nets_dir)?;

    let trainer = Trainer {
        data: &data,
        base: TrainConfig {
            seed: a.seed.unwrap_or(0),
            ..TrainConfig::default()
        },
        dense_epochs: DENSE_EPOCHS,
        epochs: WARM_EPOCHS,
    };
    let dense = match &a.dense {
        Some(p) => load_net(p, "dense")?,
        None => trainer.dense(&mut Vec::new())?,
    };
    dense.save(&nets_dir.join("dense.json"))?;
    let mut scenarios = Vec::new();
    for &e in &sparsities {
        let net = trainer.train(Mode::Warm, e, Some(&dense), &mut Vec::new())?;
        net.save(&nets_dir.join(format!("net_{e}.json")))?;
        scenarios.push((e, net));
    }
    let plan = BenchPlan {
        case: &case,
        scenarios,
        reference: Some(&dense),
        gaps,
        workers,
        opts,
    };
    let report = run_bench(&plan)?;
    let rows = report.rows_csv()?;
    write(&dir.join("bench.csv"), &rows)?;
    write(&dir.join("gaps.csv"), &report.gaps_csv()?)?;
    print!("{rows}");
    Ok(())
}
