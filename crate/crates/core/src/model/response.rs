use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Which family a [`ResponseFunction`] belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ResponseKind {
    /// h(u) = 2u
    Linear,
    /// h(u) = 4u³
    Cubic,
    /// h ≡ 1, i.e. a homogeneous Poisson order flow
    Constant,
    /// Piecewise-linear interpolation of tabulated values.
    Table,
}

impl ResponseKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ResponseKind::Linear => "linear",
            ResponseKind::Cubic => "cubic",
            ResponseKind::Constant => "constant",
            ResponseKind::Table => "table",
        }
    }
}

impl fmt::Display for ResponseKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ResponseKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "linear" => Ok(ResponseKind::Linear),
            "cubic" => Ok(ResponseKind::Cubic),
            "constant" => Ok(ResponseKind::Constant),
            "table" => Ok(ResponseKind::Table),
            other => Err(Error::Config(format!("unknown response kind `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
struct Table {
    u: Vec<f64>,
    h: Vec<f64>,
}

/// The order-flow response function h on [0, 1).
///
/// Construction checks the identifiability condition ∫₀¹ h = 1 numerically
/// and validates the thinning bound `sup_value` on a 10⁴-point grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ResponseFunction {
    kind: ResponseKind,
    sup_value: f64,
    table: Option<Table>,
    strictly_increasing: bool,
}

const UNIT_INTEGRAL_TOL: f64 = 1e-9;
const VALIDATION_GRID: usize = 10_000;

impl ResponseFunction {
    pub fn linear() -> Self {
        Self::closed_form(ResponseKind::Linear)
    }

    pub fn cubic() -> Self {
        Self::closed_form(ResponseKind::Cubic)
    }

    pub fn constant() -> Self {
        Self::closed_form(ResponseKind::Constant)
    }

    fn closed_form(kind: ResponseKind) -> Self {
        let sup_value = match kind {
            ResponseKind::Linear => 2.0,
            ResponseKind::Cubic => 4.0,
            _ => 1.0,
        };
        let h = ResponseFunction { kind, sup_value, table: None, strictly_increasing: kind != ResponseKind::Constant };
        debug_assert!(h.validate().is_ok());
        h
    }

    pub fn from_kind(kind: ResponseKind) -> Result<Self> {
        match kind {
            ResponseKind::Linear => Ok(Self::linear()),
            ResponseKind::Cubic => Ok(Self::cubic()),
            ResponseKind::Constant => Ok(Self::constant()),
            ResponseKind::Table => {
                Err(Error::InvalidResponse("a table response needs its nodes; use ResponseFunction::table".into()))
            }
        }
    }

    /// Piecewise-linear response through `(u[i], h[i])`.
    ///
    /// Nodes must start at 0, end at 1 and be strictly ascending; values must be
    /// non-negative and non-decreasing, and the trapezoid integral (exact for a
    /// piecewise-linear function) must equal 1 within 1e-9. The thinning bound is
    /// the grid maximum inflated by 1%.
    pub fn table(u: Vec<f64>, h: Vec<f64>) -> Result<Self> {
        if u.len() < 2 || u.len() != h.len() {
            return Err(Error::InvalidResponse("a table needs at least two (u, h) nodes of equal length".into()));
        }
        if u[0] != 0.0 || *u.last().unwrap() != 1.0 {
            return Err(Error::InvalidResponse("table nodes must span exactly [0, 1]".into()));
        }
        if u.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidResponse("table nodes must be strictly ascending".into()));
        }
        if h.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::InvalidResponse("table values must be finite and non-negative".into()));
        }
        if h.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::InvalidResponse("table values must be non-decreasing".into()));
        }
        let integral = crate::quadrature::trapezoid(&u, &h);
        if (integral - 1.0).abs() > UNIT_INTEGRAL_TOL {
            return Err(Error::InvalidResponse(format!("table integrates to {integral}, expected 1")));
        }
        let strictly_increasing = h.windows(2).all(|w| w[1] > w[0]);
        let grid_max = (0..VALIDATION_GRID)
            .map(|i| interpolate_table(&u, &h, i as f64 / VALIDATION_GRID as f64))
            .fold(*h.last().unwrap(), f64::max);
        let f = ResponseFunction {
            kind: ResponseKind::Table,
            sup_value: grid_max * 1.01,
            table: Some(Table { u, h }),
            strictly_increasing,
        };
        f.validate()?;
        Ok(f)
    }

    /// Like [`ResponseFunction::table`] but rescales the values to unit integral first.
    pub fn table_normalized(u: Vec<f64>, mut h: Vec<f64>) -> Result<Self> {
        if u.len() == h.len() && u.len() >= 2 {
            let integral = crate::quadrature::trapezoid(&u, &h);
            if integral > 0.0 && integral.is_finite() {
                h.iter_mut().for_each(|v| *v /= integral);
            }
        }
        Self::table(u, h)
    }

    pub fn kind(&self) -> ResponseKind {
        self.kind
    }

    /// Upper bound of h on [0, 1) used for thinning; h(1⁻) for the closed forms.
    pub fn sup_value(&self) -> f64 {
        self.sup_value
    }

    /// h(1⁻), the right end of the range of h.
    pub fn left_limit_at_one(&self) -> f64 {
        match &self.table {
            Some(t) => *t.h.last().unwrap(),
            None => self.sup_value,
        }
    }

    pub fn eval(&self, u: f64) -> f64 {
        match self.kind {
            ResponseKind::Linear => 2.0 * u,
            ResponseKind::Cubic => 4.0 * u * u * u,
            ResponseKind::Constant => 1.0,
            ResponseKind::Table => {
                let t = self.table.as_ref().unwrap();
                interpolate_table(&t.u, &t.h, u)
            }
        }
    }

    pub fn deriv(&self, u: f64) -> f64 {
        match self.kind {
            ResponseKind::Linear => 2.0,
            ResponseKind::Cubic => 12.0 * u * u,
            ResponseKind::Constant => 0.0,
            ResponseKind::Table => {
                let t = self.table.as_ref().unwrap();
                let i = t.u.partition_point(|&x| x <= u).clamp(1, t.u.len() - 1) - 1;
                (t.h[i + 1] - t.h[i]) / (t.u[i + 1] - t.u[i])
            }
        }
    }

    /// h⁻¹(t) = Lebesgue measure of {u ∈ [0,1) : h(u) ≤ t}.
    pub fn inverse(&self, t: f64) -> f64 {
        match self.kind {
            ResponseKind::Linear => (t / 2.0).clamp(0.0, 1.0),
            ResponseKind::Cubic => (t.max(0.0) / 4.0).cbrt().min(1.0),
            ResponseKind::Constant => {
                if t >= 1.0 {
                    1.0
                } else {
                    0.0
                }
            }
            ResponseKind::Table => {
                let tab = self.table.as_ref().unwrap();
                if t < tab.h[0] {
                    return 0.0;
                }
                if t >= *tab.h.last().unwrap() {
                    return 1.0;
                }
                // last node with h <= t, then solve on the following segment
                let i = tab.h.partition_point(|&v| v <= t) - 1;
                let (u0, u1, h0, h1) = (tab.u[i], tab.u[i + 1], tab.h[i], tab.h[i + 1]);
                if h1 == h0 {
                    u1
                } else {
                    u0 + (t - h0) / (h1 - h0) * (u1 - u0)
                }
            }
        }
    }

    /// Whether h′ is bounded away from zero on [0, 1). The cubic response has
    /// h′(0) = 0 and the constant response h′ ≡ 0; both are still accepted.
    pub fn satisfies_derivative_bound(&self) -> bool {
        match self.kind {
            ResponseKind::Linear => true,
            ResponseKind::Cubic | ResponseKind::Constant => false,
            ResponseKind::Table => self.strictly_increasing,
        }
    }

    pub fn is_constant(&self) -> bool {
        self.kind == ResponseKind::Constant
    }

    fn validate(&self) -> Result<()> {
        let integral = self.unit_integral();
        if (integral - 1.0).abs() > UNIT_INTEGRAL_TOL {
            return Err(Error::InvalidResponse(format!("∫h = {integral}, expected 1")));
        }
        for i in 0..VALIDATION_GRID {
            let u = i as f64 / VALIDATION_GRID as f64;
            let v = self.eval(u);
            if !(v >= 0.0) || v > self.sup_value {
                return Err(Error::InvalidResponse(format!("h({u}) = {v} is outside [0, {}]", self.sup_value)));
            }
        }
        Ok(())
    }

    /// Numerical ∫₀¹ h, exact for polynomials up to degree 39.
    pub fn unit_integral(&self) -> f64 {
        let gl = crate::quadrature::GaussLegendre::new(20);
        match &self.table {
            Some(t) => gl.integrate_pieces(0.0, 1.0, &t.u, |u| self.eval(u)),
            None => gl.integrate(0.0, 1.0, |u| self.eval(u)),
        }
    }
}

fn interpolate_table(u: &[f64], h: &[f64], at: f64) -> f64 {
    crate::quadrature::interpolate(u, h, at)
}
