//! WebAssembly bindings for the browser demo in `www/`. Everything crosses
//! the boundary as JSON strings.

use gpest::acquisition::{est_prob_exact, expected_improvement, standardized_gaps, ucb_lambda, AcquisitionKind};
use gpest::bandit::{select_next, RunConfig};
use gpest::benchmarks::{make_gp_objective, GpObjectiveSpec, Objective};
use gpest::gp::{fit_posterior, History, Prediction};
use gpest::max_value::{g_integrand, prior_anchor};
use gpest::normal::sf;
use serde_json::json;
use wasm_bindgen::prelude::*;

fn js_err(e: impl std::fmt::Display) -> JsValue {
    JsValue::from_str(&e.to_string())
}

fn parse_acquisition(name: &str) -> Result<AcquisitionKind, JsValue> {
    match name {
        "est" => Ok(AcquisitionKind::EstNumeric),
        "ucb" => Ok(AcquisitionKind::ucb()),
        "pi" => Ok(AcquisitionKind::pi()),
        "ei" => Ok(AcquisitionKind::ei()),
        other => Err(js_err(format!("unknown acquisition `{other}`"))),
    }
}

/// A sampled 1-D objective and the observations made on it so far.
#[wasm_bindgen]
pub struct Demo {
    objective: Objective,
    history: History,
    indices: Vec<usize>,
}

#[wasm_bindgen]
impl Demo {
    #[wasm_bindgen(constructor)]
    pub fn new(seed: u32, resolution: usize) -> Result<Demo, JsValue> {
        let spec = GpObjectiveSpec { resolution, ..GpObjectiveSpec::new(1) };
        let objective = make_gp_objective(1, seed as u64, &spec).map_err(js_err)?;
        Ok(Demo { objective, history: History::new(), indices: Vec::new() })
    }

    pub fn reset(&mut self) {
        self.history = History::new();
        self.indices.clear();
    }

    fn config(&self, acquisition: &str) -> Result<RunConfig, JsValue> {
        let kind = parse_acquisition(acquisition)?;
        Ok(RunConfig::new(self.objective.model.clone(), self.objective.grid.clone(), kind, self.indices.len() + 1))
    }

    fn prediction(&self) -> Result<Prediction, JsValue> {
        fit_posterior(&self.objective.model, &self.history)
            .and_then(|p| p.predict(&self.objective.grid))
            .map_err(js_err)
    }

    /// Posterior, the chosen acquisition's score over the grid and the
    /// point it would pick next.
    pub fn state(&self, acquisition: &str) -> Result<String, JsValue> {
        let config = self.config(acquisition)?;
        let p = self.prediction()?;
        let t = self.indices.len() + 1;
        let step = select_next(&config, &self.history, t).map_err(js_err)?;
        let best = self.history.best_value().unwrap_or_else(|| p.max_mean());
        let score: Vec<f64> = match &config.acquisition {
            AcquisitionKind::Ucb { delta } => {
                let lambda = ucb_lambda(t, p.len(), *delta);
                p.means.iter().zip(&p.stds).map(|(m, s)| m + lambda * s).collect()
            }
            AcquisitionKind::Pi { epsilon } => standardized_gaps(&p, best + epsilon).map(sf).collect(),
            AcquisitionKind::Ei { .. } => p.means.iter().zip(&p.stds).map(|(m, s)| expected_improvement(*m, *s, best)).collect(),
            // probability that each candidate holds the maximum
            _ => est_prob_exact(&p, step.selection.m_hat.unwrap_or(best)),
        };
        let xs: Vec<f64> = self.objective.grid.points().iter().map(|x| x[0]).collect();
        Ok(json!({
            "x": xs,
            "f": self.objective.values,
            "f_max": self.objective.f_max,
            "mean": p.means,
            "std": p.stds,
            "observed": self.indices,
            "score": score,
            "next": step.selection.index,
            "m_hat": step.selection.m_hat,
            "nu_t": step.selection.nu_t,
        })
        .to_string())
    }

    /// The integrand `g(w)` of the max-value estimate from the anchor up to
    /// well past the estimate.
    pub fn max_curve(&self) -> Result<String, JsValue> {
        let p = self.prediction()?;
        let step = select_next(&self.config("est")?, &self.history, self.indices.len() + 1).map_err(js_err)?;
        let estimate = step.estimate.ok_or_else(|| js_err("no estimate"))?;
        let m0 = self.history.best_value().unwrap_or_else(|| prior_anchor(&p));
        let top = estimate.value + 4.0 * p.stds.iter().copied().fold(0.0, f64::max);
        let n = 200;
        let w: Vec<f64> = (0..=n).map(|i| m0 + (top - m0) * i as f64 / n as f64).collect();
        let g: Vec<f64> = w.iter().map(|&w| g_integrand(&p.means, &p.stds, w, 0.0)).collect();
        Ok(json!({ "w": w, "g": g, "m0": m0, "m_hat": estimate.value, "f_max": self.objective.f_max }).to_string())
    }

    /// Observe the point the acquisition picks (noise free) and return the round.
    pub fn step(&mut self, acquisition: &str) -> Result<String, JsValue> {
        let config = self.config(acquisition)?;
        let t = self.indices.len() + 1;
        let index = select_next(&config, &self.history, t).map_err(js_err)?.selection.index;
        let x = self.objective.grid.point(index).to_vec();
        let y = self.objective.values[index];
        self.history.push(x.clone(), y).map_err(js_err)?;
        self.indices.push(index);
        let best = self.history.best_value().unwrap_or(y);
        Ok(json!({ "t": t, "index": index, "x": x[0], "y": y, "simple_regret": self.objective.f_max - best }).to_string())
    }
}
