//! Python bindings. Preference vectors cross the boundary as lists of floats.

use beamalign::bounds::{self, HorizonContext, QuadratureSettings};
use beamalign::harness::{self, ExperimentConfig, FrameModel, SweepPointResult};
use beamalign::{policy, preference, rate, Nu, PolicySpec, PreferenceVector};
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

fn err(e: beamalign::Error) -> PyErr {
    let mut message = e.to_string();
    let mut source = std::error::Error::source(&e);
    while let Some(cause) = source {
        message.push_str(&format!(": {cause}"));
        source = cause.source();
    }
    PyValueError::new_err(message)
}

fn pv(m: Vec<f64>) -> PyResult<PreferenceVector> {
    PreferenceVector::new(m).map_err(err)
}

fn nu(v: f64) -> PyResult<Nu> {
    Nu::new(v).map_err(err)
}

fn ctx(horizon: usize, slot: usize, v: f64) -> PyResult<HorizonContext> {
    HorizonContext::new(horizon, slot, nu(v)?).map_err(err)
}

/// `nu = (1 + g L) / (1 + G L)` from gains and SNR in dB.
#[pyfunction]
fn compute_nu(main_lobe_db: f64, side_lobe_db: f64, snr_db: f64) -> PyResult<f64> {
    let model = beamalign::GainModel::from_db(main_lobe_db, side_lobe_db, snr_db).map_err(err)?;
    Ok(beamalign::compute_nu(&model).map_err(err)?.get())
}

#[pyfunction]
fn j_transform(y: f64, nu_value: f64) -> PyResult<f64> {
    Ok(preference::j_transform(y, nu(nu_value)?))
}

#[pyfunction]
fn update_preference(m: Vec<f64>, arm: usize, y: f64, nu_value: f64) -> PyResult<Vec<f64>> {
    let next = preference::update_preference(&pv(m)?, arm, y, nu(nu_value)?).map_err(err)?;
    Ok(next.into_vec())
}

#[pyfunction]
fn belief(m: Vec<f64>) -> PyResult<Vec<f64>> {
    Ok(pv(m)?.belief().into_vec())
}

#[pyfunction]
fn rank_arms(m: Vec<f64>) -> PyResult<Vec<usize>> {
    Ok(policy::rank_arms(&pv(m)?).ranked)
}

#[pyfunction]
fn select_second_best(m: Vec<f64>) -> PyResult<usize> {
    policy::select_second_best(&pv(m)?).map_err(err)
}

#[pyfunction]
fn select_first_best(m: Vec<f64>) -> PyResult<usize> {
    Ok(policy::select_first_best(&pv(m)?))
}

#[pyfunction]
fn h_nu(nu_value: f64) -> PyResult<f64> {
    Ok(bounds::h_nu(nu(nu_value)?))
}

#[pyfunction]
fn g_nu(nu_value: f64) -> PyResult<f64> {
    Ok(bounds::g_nu(nu(nu_value)?))
}

#[pyfunction]
fn xi(arm: usize, m: Vec<f64>, nu_value: f64) -> PyResult<f64> {
    bounds::xi(arm, &pv(m)?, nu(nu_value)?).map_err(err)
}

#[pyfunction]
#[pyo3(signature = (m, arm, horizon, slot, nu_value))]
fn q_lower_bound(
    m: Vec<f64>,
    arm: usize,
    horizon: usize,
    slot: usize,
    nu_value: f64,
) -> PyResult<f64> {
    bounds::q_lower_bound(&pv(m)?, arm, &ctx(horizon, slot, nu_value)?).map_err(err)
}

#[pyfunction]
#[pyo3(signature = (m, arm, horizon, slot, nu_value))]
fn q_upper_bound(
    m: Vec<f64>,
    arm: usize,
    horizon: usize,
    slot: usize,
    nu_value: f64,
) -> PyResult<f64> {
    bounds::q_upper_bound(&pv(m)?, arm, &ctx(horizon, slot, nu_value)?).map_err(err)
}

/// `(lower, upper)` bounds on the optimal value at slot `k`.
#[pyfunction]
fn value_bounds(m: Vec<f64>, horizon: usize, slot: usize, nu_value: f64) -> PyResult<(f64, f64)> {
    let pair = bounds::value_bounds(&pv(m)?, &ctx(horizon, slot, nu_value)?).map_err(err)?;
    Ok((pair.lower, pair.upper))
}

#[pyfunction]
#[allow(clippy::too_many_arguments)]
#[pyo3(signature = (m, arm, horizon, slot, nu_value, panel_nodes = 6, check_convergence = true))]
fn dp_exact_q(
    py: Python<'_>,
    m: Vec<f64>,
    arm: usize,
    horizon: usize,
    slot: usize,
    nu_value: f64,
    panel_nodes: usize,
    check_convergence: bool,
) -> PyResult<f64> {
    let m = pv(m)?;
    let ctx = ctx(horizon, slot, nu_value)?;
    let quad = QuadratureSettings {
        panel_nodes,
        check_convergence,
    };
    py.detach(|| bounds::dp_exact_q(&m, arm, &ctx, &quad))
        .map_err(err)
}

fn result_dict<'py>(py: Python<'py>, r: &SweepPointResult) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("policy", &r.policy)?;
    d.set_item("sweep_var", r.sweep_var.column_name())?;
    d.set_item("sweep_value", r.sweep_value)?;
    d.set_item("snr_db", r.snr_db)?;
    d.set_item("alignment_slots", r.alignment_slots)?;
    d.set_item("p_align", r.p_align)?;
    d.set_item("ci95", r.p_align_ci95)?;
    d.set_item("spectral_eff_bps_hz", r.spectral_efficiency)?;
    d.set_item("iterations", r.iterations)?;
    d.set_item("seed", r.seed)?;
    Ok(d)
}

/// A resolved experiment configuration.
#[pyclass(name = "Experiment")]
struct PyExperiment {
    inner: ExperimentConfig,
}

#[pymethods]
impl PyExperiment {
    #[staticmethod]
    fn preset(name: &str) -> PyResult<Self> {
        Ok(PyExperiment {
            inner: ExperimentConfig::preset(name).map_err(err)?,
        })
    }

    #[staticmethod]
    fn from_toml(text: &str) -> PyResult<Self> {
        Ok(PyExperiment {
            inner: ExperimentConfig::from_toml_str(text).map_err(err)?,
        })
    }

    fn to_toml(&self) -> PyResult<String> {
        self.inner.to_toml_string().map_err(err)
    }

    #[getter]
    fn iterations(&self) -> u64 {
        self.inner.iterations
    }

    #[setter]
    fn set_iterations(&mut self, n: u64) {
        self.inner.iterations = n;
    }

    #[getter]
    fn base_seed(&self) -> u64 {
        self.inner.base_seed
    }

    #[setter]
    fn set_base_seed(&mut self, seed: u64) {
        self.inner.base_seed = seed;
    }

    #[getter]
    fn policies(&self) -> Vec<String> {
        self.inner.policies.iter().map(|p| p.to_string()).collect()
    }

    #[setter]
    fn set_policies(&mut self, names: Vec<String>) -> PyResult<()> {
        self.inner.policies = names
            .iter()
            .map(|s| s.parse::<PolicySpec>())
            .collect::<beamalign::Result<_>>()
            .map_err(err)?;
        Ok(())
    }

    #[getter]
    fn snr_db(&self) -> Vec<f64> {
        self.inner.sweep.snr_db.clone()
    }

    #[setter]
    fn set_snr_db(&mut self, values: Vec<f64>) {
        self.inner.sweep.snr_db = values;
    }

    #[getter]
    fn alignment_slots(&self) -> Vec<usize> {
        self.inner.sweep.alignment_slots.clone()
    }

    #[setter]
    fn set_alignment_slots(&mut self, values: Vec<usize>) {
        self.inner.sweep.alignment_slots = values;
    }

    /// Runs every (policy, sweep point) pair; one dict per CSV row.
    #[pyo3(signature = (threads = None))]
    fn run_sweep<'py>(
        &self,
        py: Python<'py>,
        threads: Option<usize>,
    ) -> PyResult<Vec<Bound<'py, PyDict>>> {
        let config = self.inner.clone();
        let results = py
            .detach(|| match threads {
                Some(t) => harness::run_sweep_with_threads(&config, t),
                None => harness::run_sweep(&config),
            })
            .map_err(err)?;
        results.iter().map(|r| result_dict(py, r)).collect()
    }

    /// `(rate_bps, power_w, expected_rate_bps)` of the data phase.
    fn data_phase(&self) -> PyResult<(f64, f64, f64)> {
        let d = harness::sweep::data_phase(&self.inner).map_err(err)?;
        Ok((d.rate_bps, d.power_w, d.expected_rate_bps))
    }

    /// Non-outage probability at `rate_bps` and `power_w` for the configured link.
    fn non_outage_probability(&self, rate_bps: f64, power_w: f64) -> PyResult<f64> {
        let link = self.inner.link.budget().map_err(err)?;
        rate::non_outage_probability(
            rate_bps,
            power_w,
            &link,
            self.inner.gains.main_lobe_linear(),
        )
        .map_err(err)
    }

    /// One frame: dict with true_sector, scanned_arms, feedbacks, data_beam, aligned.
    fn run_frame<'py>(
        &self,
        py: Python<'py>,
        policy: &str,
        snr_db: f64,
        alignment_slots: usize,
        seed: u64,
    ) -> PyResult<Bound<'py, PyDict>> {
        let policy: PolicySpec = policy.parse().map_err(err)?;
        let prior = self.inner.prior.resolve(self.inner.num_arms).map_err(err)?;
        let nu = self.inner.gains.nu(snr_db).map_err(err)?;
        let model = FrameModel::new(prior, nu, alignment_slots).map_err(err)?;
        let out = harness::run_frame(&model, &policy, seed).map_err(err)?;
        let d = PyDict::new(py);
        d.set_item("true_sector", out.true_sector)?;
        d.set_item("scanned_arms", out.scanned_arms)?;
        d.set_item("feedbacks", out.feedbacks)?;
        d.set_item("data_beam", out.data_beam)?;
        d.set_item("aligned", out.aligned)?;
        Ok(d)
    }

    fn __repr__(&self) -> String {
        format!(
            "Experiment(num_arms={}, iterations={}, base_seed={}, policies={:?})",
            self.inner.num_arms,
            self.inner.iterations,
            self.inner.base_seed,
            self.policies()
        )
    }
}

#[pymodule]
fn beamalign_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(compute_nu, m)?)?;
    m.add_function(wrap_pyfunction!(j_transform, m)?)?;
    m.add_function(wrap_pyfunction!(update_preference, m)?)?;
    m.add_function(wrap_pyfunction!(belief, m)?)?;
    m.add_function(wrap_pyfunction!(rank_arms, m)?)?;
    m.add_function(wrap_pyfunction!(select_second_best, m)?)?;
    m.add_function(wrap_pyfunction!(select_first_best, m)?)?;
    m.add_function(wrap_pyfunction!(h_nu, m)?)?;
    m.add_function(wrap_pyfunction!(g_nu, m)?)?;
    m.add_function(wrap_pyfunction!(xi, m)?)?;
    m.add_function(wrap_pyfunction!(q_lower_bound, m)?)?;
    m.add_function(wrap_pyfunction!(q_upper_bound, m)?)?;
    m.add_function(wrap_pyfunction!(value_bounds, m)?)?;
    m.add_function(wrap_pyfunction!(dp_exact_q, m)?)?;
    m.add_class::<PyExperiment>()?;
    Ok(())
}
