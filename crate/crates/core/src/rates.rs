//! Error sequences against a reference solution and the empirical
//! order/constant estimators
//!
//! `r_{k+2} = (ln e_{k+2} - ln e_{k+1}) / (ln e_{k+1} - ln e_k)`,
//! `L_{k+2} = e_{k+2} / e_{k+1}^{r_{k+2}}`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{euclidean_norm, PrecisionContext, Scalar, Vector};
use crate::problems::ProblemInstance;
use crate::solver::{run, IterationTrace, Method, SolveConfig};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateEstimate {
    pub k: usize,
    pub e_norm: Scalar,
    pub r: Option<Scalar>,
    #[serde(rename = "L")]
    pub l: Option<Scalar>,
}

/// `‖x_k - xbar‖` for every record of the trace.
pub fn error_sequence(trace: &IterationTrace, xbar: &Vector) -> Result<Vec<Scalar>> {
    trace
        .records
        .iter()
        .map(|rec| {
            if rec.x.dim() != xbar.dim() {
                return Err(Error::DimensionMismatch {
                    expected: rec.x.dim(),
                    found: xbar.dim(),
                });
            }
            Ok(euclidean_norm(&rec.x.sub(xbar)))
        })
        .collect()
}

/// Order and constant estimates. Errors below `10^(20 - digits)` count as
/// zero, and any entry depending on a zero error carries no estimate.
pub fn estimate_rates(errors: &[Scalar], ctx: &PrecisionContext) -> Vec<RateEstimate> {
    let floor = ctx.pow10(20 - ctx.digits() as i32);
    let usable: Vec<Option<Scalar>> = errors
        .iter()
        .map(|e| (e.is_finite() && *e > floor).then(|| e.ln()))
        .collect();
    errors
        .iter()
        .enumerate()
        .map(|(k, e)| {
            let mut est = RateEstimate {
                k,
                e_norm: e.clone(),
                r: None,
                l: None,
            };
            if k >= 2 {
                if let (Some(l0), Some(l1), Some(l2)) = (&usable[k - 2], &usable[k - 1], &usable[k]) {
                    let denom = l1 - l0;
                    if !denom.is_zero() {
                        let r = (l2 - l1) / denom;
                        // L = e_k / e_{k-1}^r evaluated in logs
                        let l = (l2 - &r * l1).exp();
                        est.r = Some(r);
                        est.l = Some(l);
                    }
                }
            }
            est
        })
        .collect()
}

/// The registered exact solution, or a high-precision Halley solve from the
/// registered start at twice the digits and tolerance `10^(-1.5·digits)`.
pub fn reference_solution(problem: &ProblemInstance, cfg: &SolveConfig) -> Result<Vector> {
    if let Some(x) = &problem.exact_solution {
        return Ok(x.clone());
    }
    let start = problem
        .default_start
        .clone()
        .ok_or_else(|| Error::InvalidArgument(format!("{} has no registered start", problem.name)))?;
    let digits = cfg.digits.max(problem.ctx.digits()) * 2;
    let hi_ctx = PrecisionContext::new(digits)?;
    let hi_problem = problem.at_precision(hi_ctx).unwrap_or_else(|| problem.clone());
    let hi_cfg = SolveConfig {
        method: Method::Halley,
        tol: hi_ctx.pow10(-((cfg.digits as i32) * 3 / 2)),
        max_iter: cfg.max_iter,
        digits,
    };
    let trace = run(&hi_problem, &start, &hi_cfg)?;
    if !trace.converged() {
        return Err(Error::SolverFailure(format!(
            "reference solve for {} ended with {:?}",
            problem.name, trace.status
        )));
    }
    Ok(trace.final_iterate().clone())
}

/// Table rows `k, x_k components, e_k, r_k, L_k` with the given layout:
/// iterates to 6 decimals, `e_k` as `d.dde±XX`, `r_k`/`L_k` to 6 decimals and
/// `-` where undefined.
pub fn rate_table_csv(trace: &IterationTrace, estimates: &[RateEstimate]) -> String {
    let n = trace.records.first().map_or(0, |r| r.x.dim());
    let mut out = format!(
        "# problem={} method={} digits={} tol={} max_iter={}\n",
        trace.problem,
        trace.config.method,
        trace.config.digits,
        trace.config.tol.to_sci_string(2),
        trace.config.max_iter
    );
    let mut header = vec!["k".to_string()];
    if n == 1 {
        header.push("x_k".into());
    } else {
        header.extend((1..=n).map(|i| format!("x_k^{i}")));
    }
    header.extend(["e_k", "r_k", "L_k"].map(String::from));
    out.push_str(&header.join(","));
    out.push('\n');
    for (rec, est) in trace.records.iter().zip(estimates) {
        let mut row = vec![rec.k.to_string()];
        row.extend(rec.x.iter().map(|v| v.to_fixed_string(6)));
        row.push(est.e_norm.to_sci_string(2));
        row.push(est.r.as_ref().map_or("-".into(), |v| v.to_fixed_string(6)));
        row.push(est.l.as_ref().map_or("-".into(), |v| v.to_fixed_string(6)));
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}
