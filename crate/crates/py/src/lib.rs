//! Python bindings: datasets, nets, cases, schedules and nodal prices.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::time::Duration;

use degsched::net::{self as dnet, TrainConfig, DEFAULT_TOLERANCES};
use degsched::oracle::{self, CycleFeatures, SamplingPlan};
use degsched::sched::{self, RunSummary};
use degsched::solve::{self, SolverOptions};
use pyo3::exceptions::{PyOSError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;

fn err(e: degsched::Error) -> PyErr {
    use degsched::Error as E;
    match e {
        E::Io(_) | E::Environment(_) => PyOSError::new_err(e.to_string()),
        E::InputDomain(_)
        | E::Config(_)
        | E::Range { .. }
        | E::Parse { .. }
        | E::Case(_)
        | E::Coupling { .. }
        | E::Structural(_) => PyValueError::new_err(e.to_string()),
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

fn options(gap: f64, time_limit: f64) -> PyResult<SolverOptions> {
    if !(time_limit > 0.0 && time_limit.is_finite()) {
        return Err(PyValueError::new_err(format!("time_limit {time_limit} must be positive")));
    }
    let opts = SolverOptions::from_env()
        .with_gap(gap)
        .with_time_limit(Duration::from_secs_f64(time_limit));
    opts.validate().map_err(err)?;
    Ok(opts)
}

/// Fractional capacity loss of one cycle under the synthetic aging law.
#[pyfunction]
fn cycle_degradation(soc_start: f64, dod: f64, temp_c: f64, c_rate: f64, soh: f64) -> PyResult<f64> {
    oracle::cycle_degradation(&CycleFeatures { soc_start, dod, temp_c, c_rate, soh }).map_err(err)
}

#[pyfunction]
fn fixtures() -> Vec<&'static str> {
    degsched::fixtures::names().collect()
}

#[pyclass(module = "degsched", frozen)]
struct Dataset {
    inner: oracle::Dataset,
}

#[pymethods]
impl Dataset {
    #[staticmethod]
    #[pyo3(signature = (samples = 5000, seed = 42, test_fraction = 0.2))]
    fn generate(samples: usize, seed: u64, test_fraction: f64) -> PyResult<Self> {
        let plan = SamplingPlan { test_fraction, ..SamplingPlan::with_samples(samples) };
        Ok(Dataset { inner: oracle::generate_dataset(&plan, seed).map_err(err)? })
    }

    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        Ok(Dataset { inner: oracle::Dataset::load(&path).map_err(err)? })
    }

    fn save(&self, path: PathBuf) -> PyResult<()> {
        self.inner.save(&path).map_err(err)
    }

    fn to_csv(&self) -> PyResult<String> {
        self.inner.to_csv().map_err(err)
    }

    #[getter]
    fn train_size(&self) -> usize {
        self.inner.train.len()
    }

    #[getter]
    fn test_size(&self) -> usize {
        self.inner.test.len()
    }

    fn __len__(&self) -> usize {
        self.inner.samples.len()
    }

    fn __repr__(&self) -> String {
        format!("Dataset(samples={}, seed={})", self.inner.samples.len(), self.inner.seed)
    }
}

#[pyclass(module = "degsched", frozen)]
struct Net {
    inner: dnet::SparseNet,
}

#[pymethods]
impl Net {
    /// Trains from random weights (`mode="cold"`) or fine-tunes a freshly
    /// trained dense net under the sparsity mask (`mode="warm"`).
    #[staticmethod]
    #[pyo3(signature = (data, sparsity = 0.0, mode = "warm", epochs = None, dense_epochs = 300, seed = 0))]
    fn train(
        data: &Dataset,
        sparsity: f64,
        mode: &str,
        epochs: Option<usize>,
        dense_epochs: usize,
        seed: u64,
    ) -> PyResult<Self> {
        let base = TrainConfig { seed, ..Default::default() };
        let inner = match mode {
            "cold" => {
                let cfg = TrainConfig { epochs: epochs.unwrap_or(300), sparsity, ..base };
                dnet::train_cold(&data.inner, &cfg).map_err(err)?
            }
            "warm" => {
                let dense_cfg = TrainConfig { epochs: dense_epochs, ..base.clone() };
                let dense = dnet::train_cold(&data.inner, &dense_cfg).map_err(err)?;
                if sparsity == 0.0 {
                    dense
                } else {
                    let cfg = TrainConfig { epochs: epochs.unwrap_or(250), sparsity, ..base };
                    dnet::train_warm(&dense, &data.inner, &cfg).map_err(err)?
                }
            }
            other => return Err(PyValueError::new_err(format!("mode `{other}` is not warm or cold"))),
        };
        Ok(Net { inner })
    }

    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        Ok(Net { inner: dnet::SparseNet::load(&path).map_err(err)? })
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(Net { inner: dnet::SparseNet::from_json(text).map_err(err)? })
    }

    fn save(&self, path: PathBuf) -> PyResult<()> {
        self.inner.save(&path).map_err(err)
    }

    fn to_json(&self) -> String {
        self.inner.to_json()
    }

    fn predict(&self, soc_start: f64, dod: f64, temp_c: f64, c_rate: f64, soh: f64) -> PyResult<f64> {
        self.inner.predict(&CycleFeatures { soc_start, dod, temp_c, c_rate, soh }).map_err(err)
    }

    /// Fraction of held-out samples within each relative tolerance, plus `mse`.
    fn accuracy(&self, data: &Dataset) -> PyResult<BTreeMap<String, f64>> {
        let r = dnet::evaluate_accuracy(&self.inner, &data.inner.test_samples(), &DEFAULT_TOLERANCES).map_err(err)?;
        let mut out: BTreeMap<String, f64> =
            r.by_tolerance.iter().map(|(t, a)| (format!("{}", (t * 100.0).round()), *a)).collect();
        out.insert("mse".into(), r.mse);
        Ok(out)
    }

    #[getter]
    fn sparsity(&self) -> f64 {
        self.inner.sparsity
    }

    #[getter]
    fn active_neurons(&self) -> usize {
        self.inner.active_neurons()
    }

    fn __repr__(&self) -> String {
        format!("Net(sparsity={}, active_neurons={})", self.inner.sparsity, self.inner.active_neurons())
    }
}

#[pyclass(module = "degsched", frozen)]
struct Case {
    inner: sched::Case,
}

#[pymethods]
impl Case {
    /// A bundled case by name; see `fixtures()`.
    #[staticmethod]
    fn fixture(name: &str) -> PyResult<Self> {
        Ok(Case { inner: degsched::fixtures::load(name).map_err(err)? })
    }

    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        Ok(Case { inner: sched::Case::load(&path).map_err(err)? })
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(Case { inner: sched::Case::from_json(text).map_err(err)? })
    }

    /// A copy of a network case with its storage removed.
    fn without_bess(&self) -> PyResult<Self> {
        match &self.inner {
            sched::Case::Network(c) => Ok(Case { inner: sched::Case::Network(c.without_bess()) }),
            sched::Case::Microgrid(_) => Err(PyValueError::new_err("only network cases can drop their storage")),
        }
    }

    #[getter]
    fn name(&self) -> String {
        self.inner.name().to_string()
    }

    #[getter]
    fn kind(&self) -> &'static str {
        match self.inner {
            sched::Case::Network(_) => "network",
            sched::Case::Microgrid(_) => "microgrid",
        }
    }

    #[getter]
    fn hours(&self) -> usize {
        self.inner.hours()
    }

    #[getter]
    fn bess_count(&self) -> usize {
        self.inner.bess().len()
    }

    fn __repr__(&self) -> String {
        format!("Case(name={:?}, kind={:?}, hours={})", self.inner.name(), self.kind(), self.inner.hours())
    }
}

#[pyclass(module = "degsched", frozen)]
struct Schedule {
    case: sched::Case,
    net: Option<dnet::SparseNet>,
    summary: RunSummary,
    solution: sched::ScheduleSolution,
}

#[pymethods]
impl Schedule {
    #[getter]
    fn status(&self) -> String {
        self.summary.status.clone()
    }

    #[getter]
    fn objective(&self) -> Option<f64> {
        self.summary.objective
    }

    #[getter]
    fn wall_time(&self) -> f64 {
        self.summary.wall_time_s
    }

    #[getter]
    fn binaries(&self) -> usize {
        self.summary.binaries
    }

    #[getter]
    fn nn_binaries(&self) -> usize {
        self.summary.nn_binaries
    }

    #[getter]
    fn total_discharged(&self) -> f64 {
        self.solution.total_discharged()
    }

    /// Operation, degradation and pseudo-total cost, plus the replayed
    /// degradation cost and updated total when a `reference` net is given.
    #[pyo3(signature = (reference = None))]
    fn costs(&self, reference: Option<&Net>) -> PyResult<BTreeMap<&'static str, f64>> {
        let c = self.solution.costs;
        let mut out = BTreeMap::from([
            ("operation", c.operation),
            ("bd_cost", c.degradation),
            ("pseudo_total", c.pseudo_total),
            ("objective", c.objective),
        ]);
        if let Some(r) = reference {
            let og: f64 = sched::recompute_degradation(&r.inner, &self.case, &self.solution)
                .map_err(err)?
                .iter()
                .map(|d| d.cost)
                .sum();
            out.insert("og_bd_cost", og);
            out.insert("updated_total", c.operation + og);
        }
        Ok(out)
    }

    /// SOC trajectory of each battery, keyed by name.
    fn soc(&self) -> BTreeMap<String, Vec<f64>> {
        self.solution.bess.iter().map(|b| (b.name.clone(), b.soc.clone())).collect()
    }

    /// Violated checks as `(check, location, residual)`.
    fn violations(&self) -> Vec<(String, String, f64)> {
        sched::validate_solution(&self.case, &self.solution)
            .violations
            .into_iter()
            .map(|v| (v.check, v.at, v.residual))
            .collect()
    }

    fn dispatch_csv(&self) -> String {
        sched::dispatch_csv(&self.solution)
    }

    fn bess_csv(&self) -> String {
        sched::bess_csv(&self.case, &self.solution, self.net.as_ref())
    }

    fn __repr__(&self) -> String {
        format!(
            "Schedule(case={:?}, status={:?}, objective={})",
            self.summary.case,
            self.summary.status,
            self.summary.objective.map_or("None".into(), |o| o.to_string())
        )
    }
}

/// Solves the day-ahead schedule, embedding `net` as the degradation cost.
#[pyfunction]
#[pyo3(signature = (case, net = None, gap = solve::DEFAULT_MIP_GAP, time_limit = 600.0))]
fn schedule(case: &Case, net: Option<&Net>, gap: f64, time_limit: f64) -> PyResult<Schedule> {
    let opts = options(gap, time_limit)?;
    let net = net.map(|n| n.inner.clone());
    let s = sched::schedule(&case.inner, net.as_ref(), &opts).map_err(err)?;
    Ok(Schedule { case: case.inner.clone(), net, summary: s.summary(), solution: s.solution })
}

#[pyclass(module = "degsched", frozen)]
struct Lmp {
    inner: solve::LmpReport,
}

#[pymethods]
impl Lmp {
    #[getter]
    fn buses(&self) -> Vec<u32> {
        self.inner.buses.clone()
    }

    #[getter]
    fn hours(&self) -> usize {
        self.inner.hours()
    }

    /// Hourly prices at `bus`.
    fn prices(&self, bus: u32) -> PyResult<Vec<f64>> {
        (0..self.inner.hours())
            .map(|t| self.inner.price(bus, t))
            .collect::<Option<Vec<_>>>()
            .ok_or_else(|| PyValueError::new_err(format!("bus {bus} is not in the case")))
    }

    /// Largest minus smallest bus price at 0-based hour `t`.
    fn spread(&self, t: usize) -> f64 {
        self.inner.spread(t)
    }

    fn congested_hours(&self) -> Vec<usize> {
        (0..self.inner.hours()).filter(|&t| self.inner.is_congested(t)).collect()
    }

    fn csv(&self) -> String {
        self.inner.csv()
    }
}

/// Nodal prices of a solved network schedule, with commitments held fixed.
#[pyfunction]
#[pyo3(signature = (schedule, gap = solve::DEFAULT_MIP_GAP, time_limit = 600.0))]
fn lmp(schedule: &Schedule, gap: f64, time_limit: f64) -> PyResult<Lmp> {
    let sched::Case::Network(c) = &schedule.case else {
        return Err(PyValueError::new_err("prices need a network case"));
    };
    let opts = options(gap, time_limit)?;
    let inner = solve::compute_lmp(c, &schedule.solution, schedule.net.as_ref(), &opts).map_err(err)?;
    Ok(Lmp { inner })
}

#[pymodule]
#[pyo3(name = "degsched")]
fn degsched_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Dataset>()?;
    m.add_class::<Net>()?;
    m.add_class::<Case>()?;
    m.add_class::<Schedule>()?;
    m.add_class::<Lmp>()?;
    m.add_function(wrap_pyfunction!(cycle_degradation, m)?)?;
    m.add_function(wrap_pyfunction!(fixtures, m)?)?;
    m.add_function(wrap_pyfunction!(schedule, m)?)?;
    m.add_function(wrap_pyfunction!(lmp, m)?)?;
    Ok(())
}
