//! Generalized equations `0 ∈ f(x) + F(x)`: the smooth part with its first
//! two derivatives, the coordinate-wise set-valued part, and the built-in
//! benchmark instances.

mod builtin;
mod maps;
mod setvalued;

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::numerics::{euclidean_norm, PrecisionContext, Scalar, Vector};

pub use builtin::{builtin, builtin_with_params, BUILTIN_NAMES};
pub use maps::{ClosureMap, ExpPair, ShiftedSinh, SmoothMap};
pub use setvalued::{BranchKind, SetValuedMap};

/// A distance that may be infinite because a set-valued component is empty.
#[derive(Clone, Debug, PartialEq)]
pub enum Residual {
    Finite(Scalar),
    Infinite,
}

impl Residual {
    pub fn is_infinite(&self) -> bool {
        matches!(self, Residual::Infinite)
    }

    pub fn finite(&self) -> Option<&Scalar> {
        match self {
            Residual::Finite(s) => Some(s),
            Residual::Infinite => None,
        }
    }

    pub fn is_within(&self, tol: &Scalar) -> bool {
        match self {
            Residual::Finite(s) => s <= tol,
            Residual::Infinite => false,
        }
    }

    pub fn to_sci_string(&self, decimals: usize) -> String {
        match self {
            Residual::Finite(s) => s.to_sci_string(decimals),
            Residual::Infinite => "inf".into(),
        }
    }
}

impl fmt::Display for Residual {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Residual::Finite(s) => s.fmt(f),
            Residual::Infinite => f.write_str("inf"),
        }
    }
}

impl Serialize for Residual {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Residual {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        if s == "inf" {
            return Ok(Residual::Infinite);
        }
        Scalar::parse_self_describing(&s)
            .map(Residual::Finite)
            .map_err(serde::de::Error::custom)
    }
}

/// One generalized equation together with the metadata the benchmarks need.
#[derive(Clone)]
pub struct ProblemInstance {
    pub name: String,
    pub f: Arc<dyn SmoothMap>,
    pub set_map: SetValuedMap,
    pub exact_solution: Option<Vector>,
    pub params: Vec<(String, Scalar)>,
    /// Start point used for tabulated runs and on-demand reference solutions.
    pub default_start: Option<Vector>,
    pub ctx: PrecisionContext,
    overrides: Vec<(String, String)>,
}

impl fmt::Debug for ProblemInstance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ProblemInstance")
            .field("name", &self.name)
            .field("set_map", &self.set_map)
            .field("params", &self.params)
            .field("digits", &self.ctx.digits())
            .finish()
    }
}

impl ProblemInstance {
    /// A user-defined problem. Derivatives must be supplied analytically by `f`.
    pub fn new(
        name: impl Into<String>,
        f: Arc<dyn SmoothMap>,
        set_map: SetValuedMap,
        ctx: PrecisionContext,
    ) -> Result<Self> {
        if f.dim_in() != set_map.dim() || f.dim_out() != set_map.dim() {
            return Err(Error::DimensionMismatch {
                expected: set_map.dim(),
                found: f.dim_out(),
            });
        }
        Ok(ProblemInstance {
            name: name.into(),
            f,
            set_map,
            exact_solution: None,
            params: Vec::new(),
            default_start: None,
            ctx,
            overrides: Vec::new(),
        })
    }

    pub fn with_exact_solution(mut self, x: Vector) -> Self {
        self.exact_solution = Some(x);
        self
    }

    pub fn with_default_start(mut self, x: Vector) -> Self {
        self.default_start = Some(x);
        self
    }

    pub fn dim(&self) -> usize {
        self.set_map.dim()
    }

    pub fn param(&self, name: &str) -> Option<&Scalar> {
        self.params.iter().find(|(n, _)| n == name).map(|(_, v)| v)
    }

    /// Rebuilds a built-in instance at another precision. User-defined
    /// problems cannot be rebuilt and yield `None`.
    pub fn at_precision(&self, ctx: PrecisionContext) -> Option<ProblemInstance> {
        if !BUILTIN_NAMES.contains(&self.name.as_str()) {
            return None;
        }
        let overrides: Vec<(&str, &str)> = self.overrides.iter().map(|(k, v)| (k.as_str(), v.as_str())).collect();
        builtin_with_params(&self.name, ctx, &overrides).ok()
    }

    /// `dist(0, f(x) + F(x))`.
    pub fn residual_distance(&self, x: &Vector) -> Result<Residual> {
        if x.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: x.dim(),
            });
        }
        let fx = self.f.eval(x);
        let mut dists = Vec::with_capacity(x.dim());
        for (i, kind) in self.set_map.coords().iter().enumerate() {
            match kind.distance(&fx[i], &x[i]) {
                Some(d) => dists.push(d),
                None => return Ok(Residual::Infinite),
            }
        }
        Ok(Residual::Finite(euclidean_norm(&Vector::new(dists))))
    }
}
