use std::sync::Arc;

use super::maps::{ExpPair, ShiftedSinh};
use super::setvalued::{BranchKind, SetValuedMap};
use super::ProblemInstance;
use crate::error::{Error, Result};
use crate::numerics::{PrecisionContext, Scalar, Vector};

pub const BUILTIN_NAMES: [&str; 4] = ["ex1i", "ex1ii", "ex2i", "ex2ii"];

/// Built-in benchmark instance with its registered parameters.
pub fn builtin(name: &str, ctx: PrecisionContext) -> Result<ProblemInstance> {
    builtin_with_params(name, ctx, &[])
}

/// Built-in instance with parameter overrides given as decimal strings
/// (`p`, `q1`, `q2` for the two-variable problems).
pub fn builtin_with_params(name: &str, ctx: PrecisionContext, overrides: &[(&str, &str)]) -> Result<ProblemInstance> {
    let c = &ctx;
    let mut inst = match name {
        "ex1i" | "ex1ii" => {
            if let Some((k, _)) = overrides.first() {
                return Err(Error::UnknownParameter(k.to_string()));
            }
            let (shift, kind, solution, start) = if name == "ex1i" {
                let shift = -c.ratio(3, 8);
                let xbar = c.ratio(3, 8).asinh();
                (shift, BranchKind::F1, xbar, c.int(6))
            } else {
                (c.int(10), BranchKind::F2, -c.int(9).asinh(), c.int(-10))
            };
            let f = ShiftedSinh { shift };
            ProblemInstance::new(name, Arc::new(f), SetValuedMap::new(vec![kind]), ctx)?
                .with_exact_solution(Vector::new(vec![solution]))
                .with_default_start(Vector::new(vec![start]))
        }
        "ex2i" | "ex2ii" => {
            let (p, q1, q2) = if name == "ex2i" {
                ("3", "0.1", "0.2")
            } else {
                ("0", "2.3", "1")
            };
            let mut vals = [("p", c.parse(p)?), ("q1", c.parse(q1)?), ("q2", c.parse(q2)?)];
            for (key, value) in overrides {
                let slot = vals
                    .iter_mut()
                    .find(|(k, _)| k == key)
                    .ok_or_else(|| Error::UnknownParameter(key.to_string()))?;
                slot.1 = c.parse(value)?;
            }
            let [(_, p), (_, q1), (_, q2)] = vals;
            if !q1.is_positive() || !q2.is_positive() {
                return Err(Error::InvalidArgument("q1 and q2 must be positive".into()));
            }
            let set_map = if name == "ex2i" {
                SetValuedMap::zero(2)
            } else {
                SetValuedMap::new(vec![BranchKind::F2, BranchKind::F2])
            };
            let f = ExpPair {
                p: p.clone(),
                q1: q1.clone(),
                q2: q2.clone(),
            };
            let mut inst = ProblemInstance::new(name, Arc::new(f), set_map, ctx)?
                .with_default_start(Vector::new(vec![c.int(1), c.int(-1)]));
            if name == "ex2i" {
                inst = inst.with_exact_solution(ex2_zero_map_solution(c, &p, &q1, &q2));
            }
            inst.params = vec![("p".into(), p), ("q1".into(), q1), ("q2".into(), q2)];
            inst
        }
        _ => return Err(Error::UnknownProblem(name.to_string())),
    };
    inst.overrides = overrides.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect();
    Ok(inst)
}

/// `(½ log(q1 q2) + p, ½ log(q2 / q1))`.
fn ex2_zero_map_solution(c: &PrecisionContext, p: &Scalar, q1: &Scalar, q2: &Scalar) -> Vector {
    let half = c.ratio(1, 2);
    Vector::new(vec![&half * (q1 * q2).ln() + p, &half * (q2 / q1).ln()])
}
