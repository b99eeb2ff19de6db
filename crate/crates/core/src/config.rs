//! Problem files (TOML) and their validation.

use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::grid::{GridFunction, InitialCondition};
use crate::hamiltonian::{registry, Convexity, HamEval, HamiltonianModel};
use crate::operator::OperatorConfig;
use crate::reference::FdConfig;

/// Either a registry name (with optional parameter) or expressions for H, ∂H/∂q, ∂H/∂p.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HamiltonianSpec {
    pub name: Option<String>,
    /// Bump amplitude for `nonconvex_bump`.
    pub a: Option<f64>,
    /// Value for `constant`.
    pub c: Option<f64>,
    pub expr: Option<String>,
    pub dq: Option<String>,
    pub dp: Option<String>,
    /// Declared growth constant (required with `expr`).
    #[serde(rename = "C")]
    pub constant_c: Option<f64>,
    pub convex_m: Option<f64>,
    pub concave_m: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialSpec {
    /// abs, neg_abs, cos, linear, constant
    pub name: Option<String>,
    pub a: Option<f64>,
    pub c: Option<f64>,
    /// Expression in q, with declared Lipschitz constant.
    pub expr: Option<String>,
    pub lip: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub domain: (f64, f64),
    pub h: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeSpec {
    #[serde(default)]
    pub s: f64,
    #[serde(rename = "T")]
    pub horizon: f64,
    /// Step lengths δ_N for iterated runs; the first one drives `iterated` mode.
    #[serde(default)]
    pub schedule: Vec<f64>,
    /// Output times (default: the horizon only).
    #[serde(default)]
    pub outputs: Vec<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FdSpec {
    pub h: Option<f64>,
    pub domain: Option<(f64, f64)>,
    pub cfl: Option<f64>,
    pub artificial_viscosity: Option<f64>,
}

impl FdSpec {
    pub fn config(&self) -> FdConfig {
        let d = FdConfig::default();
        FdConfig { cfl: self.cfl.unwrap_or(d.cfl), artificial_viscosity: self.artificial_viscosity }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemConfig {
    pub hamiltonian: HamiltonianSpec,
    pub initial: InitialSpec,
    pub grid: GridSpec,
    pub time: TimeSpec,
    #[serde(default)]
    pub operator: OperatorConfig,
    #[serde(default)]
    pub fd: FdSpec,
}

/// Initial data: a named profile or a parsed expression in q.
#[derive(Clone, Debug)]
pub enum InitialData {
    Named(InitialCondition),
    Expression { expr: Arc<Expr>, lip: f64 },
}

impl InitialData {
    pub fn eval(&self, q: f64) -> f64 {
        match self {
            Self::Named(ic) => ic.eval(q),
            Self::Expression { expr, .. } => expr.eval(0.0, q, 0.0),
        }
    }

    pub fn lip(&self) -> f64 {
        match self {
            Self::Named(ic) => ic.lip(),
            Self::Expression { lip, .. } => *lip,
        }
    }

    pub fn to_grid(&self, domain: (f64, f64), h: f64) -> Result<GridFunction> {
        GridFunction::from_fn(domain.0, domain.1, h, self.lip(), |q| self.eval(q))
    }
}

const INITIAL_NAMES: &[&str] = &["abs", "neg_abs", "cos", "linear", "constant"];

impl ProblemConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Structural checks plus sampling audits of the declared constants.
    pub fn validate(&self) -> Result<()> {
        let (a, b) = self.grid.domain;
        if !(b > a) || !(self.grid.h > 0.0) || self.grid.h > (b - a) / 4.0 {
            return Err(Error::Config(format!("grid: need domain a < b and 0 < h <= (b-a)/4 (domain={:?}, h={})", self.grid.domain, self.grid.h)));
        }
        if !(self.time.horizon >= self.time.s) {
            return Err(Error::Config("time: T must be >= s".into()));
        }
        if self.time.schedule.iter().any(|d| !(*d > 0.0)) {
            return Err(Error::Config("time: schedule steps must be positive".into()));
        }
        if self.time.outputs.iter().any(|t| !(*t > self.time.s && *t <= self.time.horizon)) {
            return Err(Error::Config("time: outputs must lie in (s, T]".into()));
        }
        self.operator.validate().map_err(|e| Error::Config(format!("operator: {e}")))?;
        let h = self.hamiltonian()?;
        let reach = (b - a).abs().max(a.abs()).max(b.abs());
        let init = self.initial()?;
        h.audit(2000, reach, 4.0 * (1.0 + init.lip()) + 4.0, 0x5eed)?;
        let g = GridFunction::from_fn(a, b, (b - a) / 4000.0, f64::INFINITY, |q| init.eval(q))?;
        let m = g.measured_lip();
        if m > init.lip() * (1.0 + 1e-6) + 1e-9 {
            return Err(Error::Config(format!("initial condition: sampled slope {m:.6} exceeds declared Lipschitz constant {}", init.lip())));
        }
        Ok(())
    }

    pub fn hamiltonian(&self) -> Result<HamiltonianModel> {
        let spec = &self.hamiltonian;
        match (&spec.name, &spec.expr) {
            (Some(name), None) => registry::by_name(name, spec.a.or(spec.c)),
            (None, Some(src)) => {
                let (Some(dq), Some(dp), Some(c)) = (&spec.dq, &spec.dp, spec.constant_c) else {
                    return Err(Error::Config("hamiltonian: expression models need `dq`, `dp` and `C`".into()));
                };
                let (f, fq, fp) = (Expr::parse(src)?, Expr::parse(dq)?, Expr::parse(dp)?);
                // H = H(p) exactly when ∂H/∂q is the literal 0 and nothing depends on (t, q).
                let integrable = matches!(fq, Expr::Num(v) if v == 0.0) && ![&f, &fp].iter().any(|e| e.uses("q") || e.uses("t"));
                let convexity = match (spec.convex_m, spec.concave_m) {
                    (Some(m), None) => Convexity::Convex(m),
                    (None, Some(m)) => Convexity::Concave(m),
                    (None, None) => Convexity::None,
                    _ => return Err(Error::Config("hamiltonian: declare at most one of convex_m, concave_m".into())),
                };
                let func = move |t: f64, q: f64, p: f64| HamEval::new(f.eval(t, q, p), fq.eval(t, q, p), fp.eval(t, q, p));
                Ok(HamiltonianModel::new(src.clone(), func, c)?.integrable(integrable).with_convexity(convexity))
            }
            _ => Err(Error::Config(format!(
                "hamiltonian: give exactly one of `name` (one of {}) or `expr`",
                registry::NAMES.join(", ")
            ))),
        }
    }

    pub fn initial(&self) -> Result<InitialData> {
        let spec = &self.initial;
        match (&spec.name, &spec.expr) {
            (Some(name), None) => {
                let ic = match name.as_str() {
                    "abs" => InitialCondition::Abs,
                    "neg_abs" => InitialCondition::NegAbs,
                    "cos" => InitialCondition::Cos,
                    "linear" => InitialCondition::Linear { a: spec.a.unwrap_or(1.0) },
                    "constant" => InitialCondition::Constant { c: spec.c.unwrap_or(0.0) },
                    other => {
                        return Err(Error::Config(format!("unknown initial condition '{other}'; available: {}", INITIAL_NAMES.join(", "))));
                    }
                };
                Ok(InitialData::Named(ic))
            }
            (None, Some(src)) => {
                let lip = spec.lip.ok_or_else(|| Error::Config("initial: expression data need a declared `lip`".into()))?;
                Ok(InitialData::Expression { expr: Arc::new(Expr::parse(src)?), lip })
            }
            _ => Err(Error::Config("initial: give exactly one of `name` or `expr`".into())),
        }
    }

    /// Output times, defaulting to [T].
    pub fn outputs(&self) -> Vec<f64> {
        if self.time.outputs.is_empty() {
            vec![self.time.horizon]
        } else {
            self.time.outputs.clone()
        }
    }
}

/// Reads and validates a problem file.
pub fn load_problem(path: impl AsRef<Path>) -> Result<ProblemConfig> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    ProblemConfig::parse(&text).map_err(|e| match e {
        Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
        other => other,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
[hamiltonian]
name = "quadratic"
[initial]
name = "abs"
[grid]
domain = [-1.0, 1.0]
h = 0.01
[time]
T = 0.2
"#;

    #[test]
    fn minimal_loads_with_defaults() {
        let cfg = ProblemConfig::parse(MINIMAL).unwrap();
        assert_eq!(cfg.operator, OperatorConfig::default());
        assert_eq!(cfg.outputs(), vec![0.2]);
        assert_eq!(cfg.hamiltonian().unwrap().name(), "quadratic");
    }

    #[test]
    fn understated_constant_is_rejected() {
        let text = MINIMAL.replace(
            "name = \"quadratic\"",
            "expr = \"p^2/2 + 2*cos(q)\"\ndq = \"-2*sin(q)\"\ndp = \"p\"\nC = 1.0",
        );
        let e = ProblemConfig::parse(&text).unwrap_err().to_string();
        assert!(e.contains("growth hypothesis") && e.contains("declared C") || e.contains("C(1+|p|)"), "{e}");
    }

    #[test]
    fn expression_model_loads() {
        let text = MINIMAL.replace(
            "name = \"quadratic\"",
            "expr = \"p^2/2 + cos(q)\"\ndq = \"-sin(q)\"\ndp = \"p\"\nC = 1.0\nconvex_m = 1.0",
        );
        let cfg = ProblemConfig::parse(&text).unwrap();
        let h = cfg.hamiltonian().unwrap();
        assert!(!h.is_integrable());
        assert_eq!(h.eval(0.0, 0.3, 2.0), crate::hamiltonian::registry::pendulum().eval(0.0, 0.3, 2.0));
        let text = MINIMAL.replace("name = \"quadratic\"", "expr = \"p^2/2\"\ndq = \"0\"\ndp = \"p\"\nC = 1.0");
        assert!(ProblemConfig::parse(&text).unwrap().hamiltonian().unwrap().is_integrable());
    }

    #[test]
    fn unknown_names_list_the_registry() {
        let e = ProblemConfig::parse(&MINIMAL.replace("quadratic", "duffing")).unwrap_err().to_string();
        assert!(e.contains("nonconvex_bump") && e.contains("pendulum"));
        let e = ProblemConfig::parse(&MINIMAL.replace("\"abs\"", "\"sqrt\"")).unwrap_err().to_string();
        assert!(e.contains("neg_abs"));
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let e = ProblemConfig::parse("[grid]\ndomain = [1.0,\nh = ").unwrap_err().to_string();
        assert!(e.contains("line"), "{e}");
    }

    #[test]
    fn declared_lipschitz_is_checked() {
        let text = MINIMAL.replace("name = \"abs\"", "expr = \"2*sin(q)\"\nlip = 1.0");
        let e = ProblemConfig::parse(&text).unwrap_err().to_string();
        assert!(e.contains("Lipschitz"), "{e}");
    }
}
