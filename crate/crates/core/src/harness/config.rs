use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::asymptotics::{DEFAULT_CYCLES, DEFAULT_GRID_POINTS, DEFAULT_STEP};
use crate::error::{Error, Result};
use crate::kv::{self, KeyValues};
use crate::model::{ModelParams, ResponseFunction, ResponseKind};

/// A response given on the command line: a built-in kind or `table:<path>`
/// naming a `u,h` CSV.
#[derive(Debug, Clone, PartialEq)]
pub enum ResponseSpec {
    Builtin(ResponseKind),
    Table(PathBuf),
}

impl ResponseSpec {
    /// Tables are rescaled to unit integral before validation.
    pub fn load(&self) -> Result<ResponseFunction> {
        match self {
            ResponseSpec::Builtin(kind) => ResponseFunction::from_kind(*kind),
            ResponseSpec::Table(path) => {
                let rows = crate::estimation::io::read_columns(path, &["u", "h"])?;
                let (u, h) = rows.into_iter().map(|r| (r[0], r[1])).unzip();
                ResponseFunction::table_normalized(u, h)
            }
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            ResponseSpec::Builtin(kind) => kind.as_str(),
            ResponseSpec::Table(_) => ResponseKind::Table.as_str(),
        }
    }
}

impl fmt::Display for ResponseSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ResponseSpec::Builtin(kind) => write!(f, "{kind}"),
            ResponseSpec::Table(path) => write!(f, "table:{}", path.display()),
        }
    }
}

impl FromStr for ResponseSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if let Some(path) = s.strip_prefix("table:") {
            if path.is_empty() {
                return Err(Error::Config("`table:` needs a file path".into()));
            }
            return Ok(ResponseSpec::Table(PathBuf::from(path)));
        }
        match s.parse()? {
            ResponseKind::Table => Err(Error::Config("use `table:<path>` for tabulated responses".into())),
            kind => Ok(ResponseSpec::Builtin(kind)),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub params: ModelParams,
    pub response: ResponseSpec,
    pub reps: usize,
    pub t_grid: usize,
    pub u_grid: usize,
    pub out: PathBuf,
    /// Worker threads; `None` uses the pool default.
    pub threads: Option<usize>,
    pub cycles: usize,
    pub step: f64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            params: ModelParams::ILLUSTRATION,
            response: ResponseSpec::Builtin(ResponseKind::Linear),
            reps: 2000,
            t_grid: DEFAULT_GRID_POINTS,
            u_grid: 200,
            out: PathBuf::from("out"),
            threads: None,
            cycles: DEFAULT_CYCLES,
            step: DEFAULT_STEP,
        }
    }
}

fn parsed<T: FromStr>(key: &str, raw: &str) -> Result<T>
where
    T::Err: fmt::Display,
{
    raw.parse().map_err(|e| Error::Config(format!("key `{key}` = `{raw}`: {e}")))
}

impl ExperimentConfig {
    /// Sets one key; unknown keys are an error.
    pub fn set(&mut self, key: &str, raw: &str) -> Result<()> {
        match key {
            "sigma" => self.params.sigma = parsed(key, raw)?,
            "mu" => self.params.mu = parsed(key, raw)?,
            "horizon" => self.params.horizon = parsed(key, raw)?,
            "bins" => self.params.bins = parsed(key, raw)?,
            "p0" => self.params.p0 = parsed(key, raw)?,
            "seed" => self.params.seed = parsed(key, raw)?,
            "response" => self.response = raw.parse()?,
            "reps" => self.reps = parsed(key, raw)?,
            "t_grid" => self.t_grid = parsed(key, raw)?,
            "u_grid" => self.u_grid = parsed(key, raw)?,
            "out" => self.out = PathBuf::from(raw),
            "threads" => self.threads = if raw.is_empty() || raw == "auto" { None } else { Some(parsed(key, raw)?) },
            "cycles" => self.cycles = parsed(key, raw)?,
            "step" => self.step = parsed(key, raw)?,
            other => return Err(Error::Config(format!("unknown key `{other}`"))),
        }
        Ok(())
    }

    pub fn apply(&mut self, values: &KeyValues) -> Result<()> {
        for (k, v) in values {
            self.set(k, v)?;
        }
        Ok(())
    }

    pub fn to_key_values(&self) -> KeyValues {
        let p = &self.params;
        let mut m = KeyValues::new();
        let mut put = |k: &str, v: String| {
            m.insert(k.to_string(), v);
        };
        put("sigma", p.sigma.to_string());
        put("mu", p.mu.to_string());
        put("horizon", p.horizon.to_string());
        put("bins", p.bins.to_string());
        put("p0", p.p0.to_string());
        put("seed", p.seed.to_string());
        put("response", self.response.to_string());
        put("reps", self.reps.to_string());
        put("t_grid", self.t_grid.to_string());
        put("u_grid", self.u_grid.to_string());
        put("out", self.out.display().to_string());
        put("threads", self.threads.map_or_else(|| "auto".to_string(), |t| t.to_string()));
        put("cycles", self.cycles.to_string());
        put("step", self.step.to_string());
        m
    }

    pub fn from_key_values(values: &KeyValues) -> Result<Self> {
        let mut c = Self::default();
        c.apply(values)?;
        c.validate()?;
        Ok(c)
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::from_key_values(&kv::read(path)?)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        kv::write(path, &self.to_key_values())
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        if self.reps == 0 {
            return Err(Error::Config("reps must be at least 1".into()));
        }
        if self.t_grid < 2 || self.u_grid < 2 {
            return Err(Error::Config("grids need at least 2 points".into()));
        }
        if self.threads == Some(0) {
            return Err(Error::Config("threads must be at least 1".into()));
        }
        if self.cycles == 0 || !(self.step > 0.0 && self.step.is_finite()) {
            return Err(Error::Config("cycles and step must be positive".into()));
        }
        Ok(())
    }
}
