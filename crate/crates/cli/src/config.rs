//! Experiment configuration: a TOML file with `[scenario]`, `[flow]` and
//! `[output]` sections plus a top-level `seed`. Every key is optional and
//! command-line flags override the file.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use hypwill::elastica;
use hypwill::flow::FlowConfig;
use hypwill::hyp2::{DiscreteCurve, HPoint};
use hypwill::scenarios;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::CliError;

pub const DEFAULT_SEED: u64 = 1;

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seed: Option<u64>,
    pub scenario: ScenarioConfig,
    pub flow: FlowConfig,
    pub output: OutputConfig,
}

/// Scenario selector and its parameters. Unused parameters are ignored.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    /// One of `catenary`, `geodesic`, `perturbed-geodesic`, `clifford-segment`,
    /// `clifford`, `fig8`, `singular`.
    pub name: String,
    pub eps: Option<f64>,
    pub a: Option<f64>,
    pub lambda: Option<f64>,
    /// Center abscissa for the Clifford circle family.
    pub x: Option<f64>,
    /// Cap-circle parameter of the singular datum.
    pub h: Option<f64>,
    pub n: Option<usize>,
    /// Amplitude of the seeded random perturbation (0 disables it).
    pub noise: f64,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioConfig { name: "catenary".into(), eps: None, a: None, lambda: None, x: None, h: None, n: None, noise: 0.0 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: PathBuf,
    /// Write every k-th recorded state as a curve CSV (0 writes none).
    pub snapshot_every: usize,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig { dir: PathBuf::from("hypwill-out"), snapshot_every: 0 }
    }
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::config(format!("cannot read {}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| CliError::config(format!("{}: {e}", path.display())))
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(DEFAULT_SEED)
    }
}

/// Summary of a built scenario curve.
#[derive(Debug, Clone, Serialize)]
pub struct ScenarioSummary {
    pub name: String,
    pub nodes: usize,
    pub closed: bool,
    pub elastic_energy: f64,
    pub hyperbolic_length: f64,
    pub min_height: f64,
    pub max_norm: f64,
    /// Closed-form energy where the scenario has one.
    pub exact_energy: Option<f64>,
}

pub fn build_scenario(sc: &ScenarioConfig, seed: u64) -> Result<(DiscreteCurve, Option<f64>), CliError> {
    let n = sc.n;
    let (curve, exact) = match sc.name.as_str() {
        "catenary" => {
            let (eps, a) = (sc.eps.unwrap_or(1.0), sc.a.unwrap_or(1.0));
            (scenarios::catenary(eps, a, n.unwrap_or(201))?, Some(scenarios::catenary_energy(eps, a)))
        }
        "geodesic" => (scenarios::vertical_geodesic(sc.x.unwrap_or(0.0), 1.0, std::f64::consts::E, n.unwrap_or(200))?, Some(0.0)),
        "perturbed-geodesic" => (scenarios::perturbed_geodesic(sc.eps.unwrap_or(0.3), n.unwrap_or(200))?, None),
        "clifford-segment" => {
            let c = scenarios::circle_arc(&scenarios::clifford_circle_shape(sc.x.unwrap_or(0.0)), -2.0, 1.0, n.unwrap_or(400))?;
            (c, None)
        }
        "clifford" => (scenarios::clifford_circle(sc.x.unwrap_or(0.0), n.unwrap_or(400))?, None),
        "fig8" => {
            let p = elastica::figure_eight_solve(sc.lambda.unwrap_or(0.1))?;
            (elastica::figure_eight_segment(&p, n.unwrap_or(801))?, Some(elastica::figure_eight_segment_energy(&p)))
        }
        "singular" => {
            let mut spec = scenarios::SingularDatumSpec::new(sc.lambda.unwrap_or(0.1), n.unwrap_or(301));
            if let Some(h) = sc.h {
                spec.h = h;
            }
            let d = scenarios::build_singular_datum(&spec)?;
            let e = d.energy();
            (d.curve, Some(e))
        }
        other => return Err(CliError::config(format!("unknown scenario '{other}'"))),
    };
    if sc.noise != 0.0 {
        return Ok((perturb(&curve, sc.noise, seed)?, None));
    }
    Ok((curve, exact))
}

/// Adds `noise·sin²(πτ)·Σ cₖ sin(kπτ)` to the abscissae (τ the normalized
/// parameter, cₖ seeded uniform in `[−1/k, 1/k]`). The double zero of sin²
/// at the ends keeps the clamped positions and tangents.
pub fn perturb(curve: &DiscreteCurve, noise: f64, seed: u64) -> Result<DiscreteCurve, CliError> {
    if curve.is_closed() {
        return Err(CliError::config("noise applies to open curves only"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let coef: Vec<f64> = (1..=4).map(|k| rng.gen_range(-1.0..1.0) / k as f64).collect();
    let t = curve.params();
    let (t0, t1) = (t[0], t[t.len() - 1]);
    let nodes = curve
        .nodes()
        .iter()
        .zip(t)
        .map(|(p, &s)| {
            let tau = (s - t0) / (t1 - t0);
            let bump = (PI * tau).sin().powi(2);
            let wave: f64 = coef.iter().enumerate().map(|(k, c)| c * ((k + 1) as f64 * PI * tau).sin()).sum();
            HPoint::new(p.x + noise * bump * wave, p.y)
        })
        .collect::<hypwill::Result<Vec<_>>>()?;
    Ok(curve.with_nodes(nodes)?)
}

pub fn summarize(name: &str, curve: &DiscreteCurve, exact: Option<f64>) -> Result<ScenarioSummary, CliError> {
    Ok(ScenarioSummary {
        name: name.to_string(),
        nodes: curve.len(),
        closed: curve.is_closed(),
        elastic_energy: hypwill::hyp2::elastic_energy(curve)?,
        hyperbolic_length: hypwill::hyp2::hyperbolic_length(curve)?,
        min_height: curve.min_height(),
        max_norm: curve.max_norm(),
        exact_energy: exact,
    })
}
