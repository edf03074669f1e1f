use std::fs;
use std::path::Path;

use nalgebra::DVector;
use serde::Deserialize;
use symred::problems::{
    build_heisenberg, build_rigid_body, build_snakeboard, build_snakeboard_broken,
    SnakeboardSymmetry,
};
use symred::reduction::{lift_costate, ReducedState};
use symred::{Costate, Problem};

use crate::CliError;

/// Run configuration. Every key is optional; problem-specific defaults fill the gaps.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub problem: Option<String>,
    pub r: Option<f64>,
    pub symmetry: Option<String>,
    pub inertia: Option<[f64; 3]>,
    /// One-based actuated axes of the rigid body.
    pub actuated: Option<Vec<usize>>,
    pub broken_action: Option<bool>,
    pub t0: Option<f64>,
    pub t1: Option<f64>,
    pub h: Option<f64>,
    pub x0: Option<Vec<f64>>,
    pub lambda0: Option<Vec<f64>>,
    /// Reduced initial data, lifted to a full costate when `lambda0` is absent.
    pub lambdabar0: Option<Vec<f64>>,
    pub mutilde0: Option<Vec<f64>>,
    pub x1: Option<Vec<f64>>,
    /// Full costate guess for shooting; the reduced guess is its reduction.
    pub guess: Option<Vec<f64>>,
    /// `full`, `reduced`, or `both`.
    pub mode: Option<String>,
    pub tolerance: Option<f64>,
    pub samples: Option<usize>,
    pub newton_tol: Option<f64>,
    pub max_iter: Option<usize>,
    pub fd_step: Option<f64>,
}

fn parse_override(raw: &str) -> Result<(String, toml::Value), CliError> {
    let (key, value) = raw
        .split_once('=')
        .ok_or_else(|| CliError::Config(format!("--set expects key=value, got {raw:?}")))?;
    let key = key.trim().to_string();
    let value = value.trim();
    let parsed = toml::from_str::<toml::Table>(&format!("v = {value}"))
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(value.to_string()));
    Ok((key, parsed))
}

/// Reads the optional config file, applies `--set` overrides and `--problem`,
/// and validates keys and types.
pub fn load(
    path: Option<&Path>,
    overrides: &[String],
    problem: Option<&str>,
) -> Result<RunConfig, CliError> {
    let mut table = match path {
        Some(p) => {
            let text = fs::read_to_string(p)
                .map_err(|e| CliError::Config(format!("cannot read {}: {e}", p.display())))?;
            text.parse::<toml::Table>()
                .map_err(|e| CliError::Config(format!("{}: {e}", p.display())))?
        }
        None => toml::Table::new(),
    };
    for raw in overrides {
        let (k, v) = parse_override(raw)?;
        table.insert(k, v);
    }
    if let Some(name) = problem {
        table.insert("problem".into(), toml::Value::String(name.into()));
    }
    let text = toml::to_string(&table).map_err(|e| CliError::Config(e.to_string()))?;
    toml::from_str(&text).map_err(|e| {
        let key = e.span().and_then(|span| {
            let line_start = text[..span.start].rfind('\n').map_or(0, |i| i + 1);
            let line = text[line_start..].lines().next().unwrap_or("");
            line.split_once('=').map(|(k, _)| k.trim().to_string())
        });
        match key {
            Some(k) if !e.message().contains(&format!("`{k}`")) => {
                CliError::Config(format!("key `{k}`: {}", e.message()))
            }
            _ => CliError::Config(e.message().to_string()),
        }
    })
}

impl RunConfig {
    pub fn problem_name(&self) -> &str {
        self.problem.as_deref().unwrap_or("snakeboard")
    }

    pub fn build_problem(&self) -> Result<Problem, CliError> {
        let name = self.problem_name();
        let broken = self.broken_action.unwrap_or(false);
        if broken && name != "snakeboard" && name != "snakeboard-broken" {
            return Err(CliError::Config(format!(
                "broken_action is only available for the snakeboard, not {name:?}"
            )));
        }
        let built = match name {
            "snakeboard" | "snakeboard-broken" => {
                let r = self.r.unwrap_or(1.0);
                if broken || name == "snakeboard-broken" {
                    build_snakeboard_broken(r)
                } else {
                    let sym: SnakeboardSymmetry = self
                        .symmetry
                        .as_deref()
                        .unwrap_or("R2xSO2")
                        .parse()
                        .map_err(|e: symred::Error| CliError::Config(format!("symmetry: {e}")))?;
                    build_snakeboard(r, sym)
                }
            }
            "rigid-body" => {
                let actuated = self.actuated.clone().unwrap_or_else(|| vec![1, 2, 3]);
                if actuated.iter().any(|&a| a == 0 || a > 3) {
                    return Err(CliError::Config(format!(
                        "actuated: axes are numbered 1..=3, got {actuated:?}"
                    )));
                }
                let zero_based: Vec<usize> = actuated.iter().map(|a| a - 1).collect();
                build_rigid_body(self.inertia.unwrap_or([1.0, 2.0, 3.0]), &zero_based)
            }
            "heisenberg" => build_heisenberg(),
            other => {
                return Err(CliError::Config(format!(
                    "problem: unknown problem {other:?} (see `symred list`)"
                )))
            }
        };
        built.map_err(|e| CliError::Config(format!("problem parameters: {e}")))
    }

    pub fn horizon(&self) -> Result<(f64, f64, f64), CliError> {
        let (t0, t1, h) = (
            self.t0.unwrap_or(0.0),
            self.t1.unwrap_or(1.0),
            self.h.unwrap_or(1e-3),
        );
        if t0.is_nan() || t1.is_nan() || t1 <= t0 {
            return Err(CliError::Config(format!(
                "t1: must exceed t0 ({t1} <= {t0})"
            )));
        }
        if h.is_nan() || h <= 0.0 {
            return Err(CliError::Config(format!(
                "h: step must be positive, got {h}"
            )));
        }
        Ok((t0, t1, h))
    }

    fn vector(key: &str, value: &[f64], len: usize) -> Result<DVector<f64>, CliError> {
        if value.len() != len {
            return Err(CliError::Config(format!(
                "{key}: expected {len} entries, got {}",
                value.len()
            )));
        }
        Ok(DVector::from_column_slice(value))
    }

    pub fn x0(&self, p: &Problem) -> Result<DVector<f64>, CliError> {
        match &self.x0 {
            Some(v) => Self::vector("x0", v, p.m()),
            None if p.name.starts_with("snakeboard") => {
                Ok(DVector::from_column_slice(&[0.0, 0.0, 0.3, 0.0, 0.8]))
            }
            None => Ok(DVector::zeros(p.m())),
        }
    }

    pub fn x1(&self, p: &Problem) -> Result<Option<DVector<f64>>, CliError> {
        self.x1
            .as_ref()
            .map(|v| Self::vector("x1", v, p.m()))
            .transpose()
    }

    fn default_lambda(p: &Problem) -> DVector<f64> {
        match p.name.as_str() {
            "rigid-body" => DVector::from_column_slice(&[1.0, 0.5, 0.25]),
            "heisenberg" => DVector::from_column_slice(&[1.0, 0.0, 1.0]),
            _ => DVector::from_column_slice(&[0.2, -0.1, 1.0, 0.5, 0.4]),
        }
    }

    /// Initial full costate from `lambda0`, from lifted reduced data, or the problem default.
    pub fn initial_state(&self, p: &Problem) -> Result<Costate, CliError> {
        let x0 = self.x0(p)?;
        if let Some(l) = &self.lambda0 {
            if self.lambdabar0.is_some() || self.mutilde0.is_some() {
                return Err(CliError::Config(
                    "lambda0: give either lambda0 or lambdabar0/mutilde0, not both".into(),
                ));
            }
            return Ok(Costate {
                x: x0,
                lambda: Self::vector("lambda0", l, p.m())?,
            });
        }
        if self.lambdabar0.is_some() || self.mutilde0.is_some() {
            let (xbar, g) = p.symmetry.action.split(&x0);
            let lb = Self::vector(
                "lambdabar0",
                self.lambdabar0.as_deref().unwrap_or(&vec![0.0; p.s()]),
                p.s(),
            )?;
            let mu = Self::vector(
                "mutilde0",
                self.mutilde0.as_deref().unwrap_or(&vec![0.0; p.k()]),
                p.k(),
            )?;
            let rs = ReducedState {
                xbar,
                lambdabar: lb,
                mutilde: mu,
                g,
            };
            return lift_costate(p, &rs).map_err(CliError::Numerical);
        }
        let lambda = Self::default_lambda(p);
        Ok(Costate { x: x0, lambda })
    }

    pub fn guess(&self, p: &Problem) -> Result<Option<DVector<f64>>, CliError> {
        self.guess
            .as_ref()
            .map(|v| Self::vector("guess", v, p.m()))
            .transpose()
    }

    pub fn mode(&self) -> Result<(bool, bool), CliError> {
        match self.mode.as_deref().unwrap_or("both") {
            "full" => Ok((true, false)),
            "reduced" => Ok((false, true)),
            "both" => Ok((true, true)),
            other => Err(CliError::Config(format!(
                "mode: expected full, reduced, or both, got {other:?}"
            ))),
        }
    }
}
