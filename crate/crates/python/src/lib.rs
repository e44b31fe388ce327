//! Python bindings: games, exact analysis, distance, log-linear learning and
//! sweeps.

use pyo3::create_exception;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use coverage_poa_core as core;
use coverage_poa_core::experiments::{self, DistanceGrid, SweepSpec, TemperatureGrid};
use coverage_poa_core::instances::{game_from_str, game_to_string};

create_exception!(coverage_poa, TooLargeError, PyValueError);

fn to_py(e: core::Error) -> PyErr {
    match e {
        core::Error::TooLarge { .. } => TooLargeError::new_err(e.to_string()),
        e if e.is_validation() => PyValueError::new_err(e.to_string()),
        e => PyRuntimeError::new_err(e.to_string()),
    }
}

fn profile(choices: Vec<usize>) -> core::ActionProfile {
    core::ActionProfile::new(choices)
}

#[pyclass(name = "Game", frozen, module = "coverage_poa")]
pub struct PyGame {
    inner: core::Game,
}

#[pymethods]
impl PyGame {
    /// Build a game from resource values and per-agent action sets (resource
    /// indices).
    #[new]
    #[pyo3(signature = (values, action_sets, compromised, resource_ids=None, agent_ids=None))]
    fn new(
        values: Vec<f64>,
        action_sets: Vec<Vec<usize>>,
        compromised: Vec<bool>,
        resource_ids: Option<Vec<String>>,
        agent_ids: Option<Vec<String>>,
    ) -> PyResult<Self> {
        if compromised.len() != action_sets.len() {
            return Err(PyValueError::new_err(
                "compromised must have one flag per agent",
            ));
        }
        let rid =
            resource_ids.unwrap_or_else(|| (0..values.len()).map(|r| format!("r{r}")).collect());
        let aid =
            agent_ids.unwrap_or_else(|| (0..action_sets.len()).map(|i| format!("a{i}")).collect());
        if rid.len() != values.len() || aid.len() != action_sets.len() {
            return Err(PyValueError::new_err("id lists must match the game's size"));
        }
        let resources = rid
            .into_iter()
            .zip(values)
            .map(|(id, v)| core::Resource::new(id, v))
            .collect();
        let agents = aid
            .into_iter()
            .zip(action_sets)
            .zip(compromised)
            .map(|((id, actions), c)| core::Agent::new(id, actions, c))
            .collect();
        let inner = core::Game::new(resources, agents).map_err(to_py)?;
        Ok(PyGame { inner })
    }

    /// The tight worst-case instance.
    #[staticmethod]
    #[pyo3(signature = (k, distance, dummies=0, dummy_value=0.0))]
    fn worst_case(k: usize, distance: f64, dummies: usize, dummy_value: f64) -> PyResult<Self> {
        let params = core::WorstCaseParams {
            k,
            distance,
            dummy_count: dummies,
            dummy_value,
        };
        let inner = core::worst_case_instance(&params).map_err(to_py)?;
        Ok(PyGame { inner })
    }

    #[staticmethod]
    #[pyo3(signature = (agents, resources, compromised, density=0.5, seed=0))]
    fn random(
        agents: usize,
        resources: usize,
        compromised: usize,
        density: f64,
        seed: u64,
    ) -> PyResult<Self> {
        let params = core::RandomGameParams {
            agents,
            resources,
            compromised,
            density,
            seed,
        };
        let inner = core::random_instance(&params).map_err(to_py)?;
        Ok(PyGame { inner })
    }

    #[staticmethod]
    fn load(path: std::path::PathBuf) -> PyResult<Self> {
        let inner = core::load_game(path).map_err(to_py)?;
        Ok(PyGame { inner })
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        let inner = game_from_str(text).map_err(to_py)?;
        Ok(PyGame { inner })
    }

    fn to_json(&self) -> String {
        game_to_string(&self.inner)
    }

    fn save(&self, path: std::path::PathBuf) -> PyResult<()> {
        core::save_game(&self.inner, path).map_err(to_py)
    }

    #[getter]
    fn num_agents(&self) -> usize {
        self.inner.num_agents()
    }

    #[getter]
    fn num_resources(&self) -> usize {
        self.inner.num_resources()
    }

    #[getter]
    fn values(&self) -> Vec<f64> {
        self.inner.values()
    }

    #[getter]
    fn action_sets(&self) -> Vec<Vec<usize>> {
        self.inner
            .agents()
            .iter()
            .map(|a| a.actions.clone())
            .collect()
    }

    #[getter]
    fn compromised(&self) -> Vec<usize> {
        self.inner.compromised()
    }

    fn welfare(&self, choices: Vec<usize>) -> PyResult<f64> {
        self.inner.welfare(&profile(choices)).map_err(to_py)
    }

    fn utility(&self, agent: usize, choices: Vec<usize>) -> PyResult<f64> {
        self.inner.utility(agent, &profile(choices)).map_err(to_py)
    }

    fn is_nash(&self, choices: Vec<usize>) -> PyResult<bool> {
        core::is_nash(&self.inner, &profile(choices)).map_err(to_py)
    }

    fn max_welfare(&self) -> f64 {
        self.inner.max_welfare()
    }

    /// Exact equilibrium analysis by enumeration.
    #[pyo3(signature = (budget=core::equilibria::DEFAULT_BUDGET))]
    fn analyze(&self, py: Python<'_>, budget: u64) -> PyResult<Analysis> {
        let r = py
            .detach(|| core::equilibria::analyze_with_budget(&self.inner, budget))
            .map_err(to_py)?;
        Ok(Analysis {
            nash_profiles: r.nash_profiles.into_iter().map(|p| p.0).collect(),
            optimal_profiles: r.optimal_profiles.into_iter().map(|p| p.0).collect(),
            optimal_welfare: r.optimal_welfare,
            worst_ne_welfare: r.worst_ne_welfare,
            best_ne_welfare: r.best_ne_welfare,
            poa: r.poa,
            pos: r.pos,
        })
    }

    /// Minimum l1 value increase after which some optimum is an equilibrium.
    #[pyo3(signature = (budget=core::equilibria::DEFAULT_BUDGET))]
    fn distance(&self, py: Python<'_>, budget: u64) -> PyResult<Distance> {
        let d = py
            .detach(|| core::distance::compute_distance_with_budget(&self.inner, budget))
            .map_err(to_py)?;
        Ok(Distance {
            distance: d.distance,
            perturbation: d.perturbation.0,
            witness_profile: d.witness_profile.0,
        })
    }

    /// Average normalized welfare of one log-linear learning run.
    #[pyo3(signature = (temperature, steps=core::sim::DEFAULT_STEPS, seed=0, burn_in_fraction=0.0))]
    fn simulate(
        &self,
        py: Python<'_>,
        temperature: f64,
        steps: u64,
        seed: u64,
        burn_in_fraction: f64,
    ) -> PyResult<f64> {
        let config = core::SimConfig {
            burn_in_fraction,
            ..core::SimConfig::new(temperature, steps, seed)
        };
        py.detach(|| core::run_lll(&self.inner, &config))
            .map(|r| r.average_normalized_welfare)
            .map_err(to_py)
    }

    fn __repr__(&self) -> String {
        format!(
            "Game(agents={}, resources={}, compromised={})",
            self.inner.num_agents(),
            self.inner.num_resources(),
            self.inner.num_compromised()
        )
    }
}

#[pyclass(frozen, get_all, module = "coverage_poa")]
pub struct Analysis {
    nash_profiles: Vec<Vec<usize>>,
    optimal_profiles: Vec<Vec<usize>>,
    optimal_welfare: f64,
    worst_ne_welfare: f64,
    best_ne_welfare: f64,
    poa: f64,
    pos: f64,
}

#[pymethods]
impl Analysis {
    fn __repr__(&self) -> String {
        format!(
            "Analysis(ne={}, poa={:.6}, pos={:.6})",
            self.nash_profiles.len(),
            self.poa,
            self.pos
        )
    }
}

#[pyclass(frozen, get_all, module = "coverage_poa")]
pub struct Distance {
    distance: f64,
    perturbation: Vec<f64>,
    witness_profile: Vec<usize>,
}

#[pymethods]
impl Distance {
    fn __repr__(&self) -> String {
        format!(
            "Distance({:.6}, witness={:?})",
            self.distance, self.witness_profile
        )
    }
}

/// `min(1/2, 1/(k + 1 - D))`, and `1/2` when `k = 0`.
#[pyfunction]
fn theorem_bound(k: usize, distance: f64) -> PyResult<f64> {
    core::theorem_bound(k, distance).map_err(to_py)
}

#[allow(clippy::too_many_arguments)]
fn spec(
    base: SweepSpec,
    k: usize,
    distance: f64,
    dummies: usize,
    temp_min_exp: f64,
    temp_max_exp: f64,
    temp_points: usize,
    steps: u64,
    seed: u64,
    trials: usize,
    game: Option<&PyGame>,
) -> SweepSpec {
    SweepSpec {
        k,
        distance,
        dummy_count: dummies,
        game: game.map(|g| g.inner.clone()),
        temperatures: TemperatureGrid {
            min_exp: temp_min_exp,
            max_exp: temp_max_exp,
            points: temp_points,
        },
        distances: DistanceGrid::up_to(k),
        steps,
        seed,
        trials,
        ..base
    }
}

fn run(py: Python<'_>, spec: SweepSpec) -> PyResult<String> {
    py.detach(|| experiments::run_sweep(&spec).and_then(|r| r.to_csv_string()))
        .map_err(to_py)
}

/// Temperature sweep; returns the CSV text.
#[pyfunction]
#[pyo3(signature = (k=10, distance=1.0, dummies=3, temp_min_exp=-2.3, temp_max_exp=2.3,
    temp_points=47, steps=core::sim::DEFAULT_STEPS, seed=0, trials=1, game=None))]
#[allow(clippy::too_many_arguments)]
fn temperature_sweep(
    py: Python<'_>,
    k: usize,
    distance: f64,
    dummies: usize,
    temp_min_exp: f64,
    temp_max_exp: f64,
    temp_points: usize,
    steps: u64,
    seed: u64,
    trials: usize,
    game: Option<PyRef<'_, PyGame>>,
) -> PyResult<String> {
    let s = spec(
        SweepSpec::temperature_sweep(),
        k,
        distance,
        dummies,
        temp_min_exp,
        temp_max_exp,
        temp_points,
        steps,
        seed,
        trials,
        game.as_deref(),
    );
    run(py, s)
}

/// Temperature sweep at every distance `0, 0.5, ..., k - 1` (or `distances`);
/// returns the CSV text.
#[pyfunction]
#[pyo3(signature = (k=10, dummies=3, temp_min_exp=-2.3, temp_max_exp=2.3, temp_points=47,
    steps=core::sim::DEFAULT_STEPS, seed=0, trials=1, distances=None))]
#[allow(clippy::too_many_arguments)]
fn distance_sweep(
    py: Python<'_>,
    k: usize,
    dummies: usize,
    temp_min_exp: f64,
    temp_max_exp: f64,
    temp_points: usize,
    steps: u64,
    seed: u64,
    trials: usize,
    distances: Option<(f64, f64, f64)>,
) -> PyResult<String> {
    let mut s = spec(
        SweepSpec::distance_sweep(),
        k,
        0.0,
        dummies,
        temp_min_exp,
        temp_max_exp,
        temp_points,
        steps,
        seed,
        trials,
        None,
    );
    if let Some((min, max, step)) = distances {
        s.distances = DistanceGrid { min, max, step };
    }
    run(py, s)
}

/// One temperature at every distance `0, 0.5, ..., k - 1` (or `distances`);
/// returns the CSV text.
#[pyfunction]
#[pyo3(signature = (k=10, temperature=0.55, dummies=3, steps=core::sim::DEFAULT_STEPS,
    seed=0, trials=1, distances=None))]
#[allow(clippy::too_many_arguments)]
fn fixed_temperature_sweep(
    py: Python<'_>,
    k: usize,
    temperature: f64,
    dummies: usize,
    steps: u64,
    seed: u64,
    trials: usize,
    distances: Option<(f64, f64, f64)>,
) -> PyResult<String> {
    let mut s = spec(
        SweepSpec::fixed_temperature(),
        k,
        0.0,
        dummies,
        -2.3,
        2.3,
        47,
        steps,
        seed,
        trials,
        None,
    );
    s.fixed_temperature = temperature;
    if let Some((min, max, step)) = distances {
        s.distances = DistanceGrid { min, max, step };
    }
    run(py, s)
}

#[pymodule]
fn coverage_poa(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyGame>()?;
    m.add_class::<Analysis>()?;
    m.add_class::<Distance>()?;
    m.add_function(wrap_pyfunction!(theorem_bound, m)?)?;
    m.add_function(wrap_pyfunction!(temperature_sweep, m)?)?;
    m.add_function(wrap_pyfunction!(distance_sweep, m)?)?;
    m.add_function(wrap_pyfunction!(fixed_temperature_sweep, m)?)?;
    m.add("TooLargeError", m.py().get_type::<TooLargeError>())?;
    m.add("CSV_HEADER", experiments::CSV_HEADER)?;
    Ok(())
}
