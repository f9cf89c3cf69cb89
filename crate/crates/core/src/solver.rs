//! Josephy–Newton and Josephy–Halley outer iterations.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{euclidean_norm, PrecisionContext, Scalar, Vector};
use crate::problems::{ProblemInstance, Residual, SmoothMap};
use crate::subproblem::{halley_operator, newton_operator, solve_inclusion};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Method {
    Newton,
    Halley,
}

impl Method {
    /// Subproblem solves consumed by one outer iteration.
    pub fn solves_per_iteration(self) -> usize {
        match self {
            Method::Newton => 1,
            Method::Halley => 2,
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Newton => "newton",
            Method::Halley => "halley",
        })
    }
}

impl FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "newton" => Ok(Method::Newton),
            "halley" => Ok(Method::Halley),
            _ => Err(Error::InvalidArgument(format!("unknown method {s:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveConfig {
    pub method: Method,
    pub tol: Scalar,
    pub max_iter: usize,
    pub digits: u32,
}

impl SolveConfig {
    pub const DEFAULT_MAX_ITER: usize = 200;
    pub const DEFAULT_TOL_EXP: i32 = -300;

    /// 400 digits, tolerance `1e-300`, 200 iterations.
    pub fn standard(method: Method) -> Self {
        Self::with_digits(method, PrecisionContext::DEFAULT_DIGITS)
    }

    pub fn with_digits(method: Method, digits: u32) -> Self {
        let ctx = PrecisionContext::new(digits).unwrap_or_default();
        SolveConfig {
            method,
            tol: ctx.pow10(Self::DEFAULT_TOL_EXP),
            max_iter: Self::DEFAULT_MAX_ITER,
            digits: ctx.digits(),
        }
    }

    pub fn validate(&self) -> Result<PrecisionContext> {
        if !self.tol.is_positive() {
            return Err(Error::InvalidArgument("tol must be positive".into()));
        }
        if self.max_iter == 0 {
            return Err(Error::InvalidArgument("max_iter must be at least 1".into()));
        }
        PrecisionContext::new(self.digits)
    }

    pub fn context(&self) -> PrecisionContext {
        PrecisionContext::new(self.digits).unwrap_or_default()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IterateRecord {
    pub k: usize,
    pub x: Vector,
    /// Predictor `u_k`; Halley only and absent at `k = 0`.
    pub u: Option<Vector>,
    pub residual: Residual,
    pub step_norm: Option<Scalar>,
    pub subproblem_solves: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Status {
    Converged,
    MaxIter,
    SubproblemFailure,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IterationTrace {
    pub problem: String,
    pub config: SolveConfig,
    pub records: Vec<IterateRecord>,
    pub status: Status,
    pub total_subproblem_solves: usize,
    /// Seconds.
    pub wall_time: f64,
}

impl IterationTrace {
    pub fn converged(&self) -> bool {
        self.status == Status::Converged
    }

    /// Index of the last recorded iterate.
    pub fn iterations(&self) -> usize {
        self.records.last().map_or(0, |r| r.k)
    }

    pub fn final_iterate(&self) -> &Vector {
        &self.records.last().expect("trace has at least x0").x
    }

    pub fn final_residual(&self) -> &Residual {
        &self.records.last().expect("trace has at least x0").residual
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("trace serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::Parse(e.to_string()))
    }

    /// Columns `k, x_1..x_n, u_1..u_n, residual, step_norm`.
    pub fn to_csv(&self) -> String {
        let n = self.records.first().map_or(0, |r| r.x.dim());
        let mut header = vec!["k".to_string()];
        header.extend((1..=n).map(|i| format!("x{i}")));
        header.extend((1..=n).map(|i| format!("u{i}")));
        header.push("residual".into());
        header.push("step_norm".into());
        let mut out = format!(
            "# problem={} method={} digits={} tol={} max_iter={} status={:?}\n",
            self.problem,
            self.config.method,
            self.config.digits,
            self.config.tol.to_sci_string(2),
            self.config.max_iter,
            self.status
        );
        out.push_str(&header.join(","));
        out.push('\n');
        for r in &self.records {
            let mut row = vec![r.k.to_string()];
            row.extend(r.x.iter().map(ToString::to_string));
            match &r.u {
                Some(u) => row.extend(u.iter().map(ToString::to_string)),
                None => row.extend((0..n).map(|_| "-".to_string())),
            }
            row.push(r.residual.to_string());
            row.push(r.step_norm.as_ref().map_or("-".into(), ToString::to_string));
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }
}

/// Runs the configured method from `x0`.
///
/// The problem should be built at `cfg.digits`; `x0` is rounded to it.
pub fn run(problem: &ProblemInstance, x0: &Vector, cfg: &SolveConfig) -> Result<IterationTrace> {
    let ctx = cfg.validate()?;
    if x0.dim() != problem.dim() {
        return Err(Error::DimensionMismatch {
            expected: problem.dim(),
            found: x0.dim(),
        });
    }
    let start = Instant::now();
    let mut x = x0.rounded(&ctx);
    let mut records = vec![IterateRecord {
        k: 0,
        residual: problem.residual_distance(&x)?,
        x: x.clone(),
        u: None,
        step_norm: None,
        subproblem_solves: 0,
    }];
    let mut total_solves = 0;
    let status = loop {
        let last = records.last().expect("nonempty");
        if last.residual.is_within(&cfg.tol) {
            break Status::Converged;
        }
        if last.k >= cfg.max_iter {
            break Status::MaxIter;
        }
        let mut solves = 1;
        let predictor = match solve_inclusion(&newton_operator(problem, &x)) {
            Ok(s) => s.x,
            Err(_) => break Status::SubproblemFailure,
        };
        let (next, u) = match cfg.method {
            Method::Newton => (predictor, None),
            Method::Halley => {
                solves += 1;
                match solve_inclusion(&halley_operator(problem, &x, &predictor)) {
                    Ok(s) => (s.x, Some(predictor)),
                    Err(_) => break Status::SubproblemFailure,
                }
            }
        };
        let residual = problem.residual_distance(&next)?;
        let step = euclidean_norm(&next.sub(&x));
        // a failed solve ends the run without completing an iteration
        total_solves += solves;
        records.push(IterateRecord {
            k: last.k + 1,
            x: next.clone(),
            u,
            residual,
            step_norm: Some(step),
            subproblem_solves: solves,
        });
        x = next;
    };
    Ok(IterationTrace {
        problem: problem.name.clone(),
        config: cfg.clone(),
        records,
        status,
        total_subproblem_solves: total_solves,
        wall_time: start.elapsed().as_secs_f64(),
    })
}

/// One classical Halley step on a scalar map:
/// `u = x - f/f'`, `x_next = x - f/(f' + ½ f''·(u - x))`.
pub fn classical_halley_step(f: &dyn SmoothMap, x_k: &Scalar) -> Result<(Scalar, Scalar)> {
    if f.dim_in() != 1 || f.dim_out() != 1 {
        return Err(Error::DimensionMismatch {
            expected: 1,
            found: f.dim_in(),
        });
    }
    let point = Vector::new(vec![x_k.clone()]);
    let fx = f.eval(&point)[0].clone();
    let dfx = f.jacobian(&point)[(0, 0)].clone();
    if dfx.is_zero() {
        return Err(Error::ZeroDerivative);
    }
    let u = x_k - &fx / &dfx;
    let h = Vector::new(vec![&u - x_k]);
    let curvature = f.second_directional(&point, &h)[(0, 0)].clone();
    let half = Scalar::from_float(rug::Float::with_val(x_k.prec(), 0.5));
    let denom = dfx + curvature * half;
    if denom.is_zero() {
        return Err(Error::ZeroDerivative);
    }
    let x_next = x_k - fx / denom;
    Ok((u, x_next))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::{builtin, ClosureMap, SetValuedMap};
    use std::sync::Arc;

    #[test]
    fn classical_step_on_quadratic() {
        let c = PrecisionContext::new(60).unwrap();
        let (one, two) = (c.one(), c.int(2));
        let f = ClosureMap::scalar(move |x| x * x - &one, |x| x + x, move |_| two.clone());
        let (u, x) = classical_halley_step(&f, &c.int(2)).unwrap();
        assert_eq!(u, c.parse("1.25").unwrap());
        // 2 - 3/3.25 = 1.0769230769...
        let expected = c.int(2) - c.int(3) / c.parse("3.25").unwrap();
        assert_eq!(x, expected);
        assert!(x.to_sig_string(8).starts_with("1.0769231"));
    }

    #[test]
    fn classical_step_exact_on_affine() {
        let c = PrecisionContext::new(60).unwrap();
        let f = ClosureMap::affine_1d(c.one(), c.int(-5));
        for start in [-3, 0, 17] {
            let (u, x) = classical_halley_step(&f, &c.int(start)).unwrap();
            assert_eq!(u, c.int(5));
            assert_eq!(x, c.int(5));
        }
    }

    #[test]
    fn classical_step_zero_derivative() {
        let c = PrecisionContext::new(60).unwrap();
        let f = ClosureMap::affine_1d(c.zero(), c.one());
        assert_eq!(classical_halley_step(&f, &c.one()), Err(Error::ZeroDerivative));
    }

    #[test]
    fn converged_at_start_from_exact_solution() {
        let c = PrecisionContext::new(400).unwrap();
        for name in ["ex1i", "ex1ii", "ex2i"] {
            let p = builtin(name, c).unwrap();
            let x0 = p.exact_solution.clone().unwrap();
            let t = run(&p, &x0, &SolveConfig::standard(Method::Halley)).unwrap();
            assert_eq!(t.status, Status::Converged);
            assert_eq!(t.iterations(), 0);
            assert_eq!(t.total_subproblem_solves, 0);
        }
    }

    #[test]
    fn config_validation() {
        let c = PrecisionContext::new(50).unwrap();
        let p = builtin("ex1i", c).unwrap();
        let x0 = Vector::new(vec![c.one()]);
        let mut cfg = SolveConfig::with_digits(Method::Newton, 50);
        cfg.max_iter = 0;
        assert!(run(&p, &x0, &cfg).is_err());
        let mut cfg = SolveConfig::with_digits(Method::Newton, 50);
        cfg.tol = c.zero();
        assert!(run(&p, &x0, &cfg).is_err());
        let cfg = SolveConfig::with_digits(Method::Newton, 50);
        assert!(matches!(
            run(&p, &Vector::new(vec![c.one(), c.one()]), &cfg),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn max_iter_status_and_cost_accounting() {
        let c = PrecisionContext::new(100).unwrap();
        let p = builtin("ex1ii", c).unwrap();
        let x0 = p.default_start.clone().unwrap();
        for method in [Method::Newton, Method::Halley] {
            let mut cfg = SolveConfig::with_digits(method, 100);
            cfg.max_iter = 3;
            let t = run(&p, &x0, &cfg).unwrap();
            assert_eq!(t.status, Status::MaxIter);
            assert_eq!(t.records.len(), 4);
            assert_eq!(t.total_subproblem_solves, 3 * method.solves_per_iteration());
            assert!(t.records.iter().enumerate().all(|(i, r)| r.k == i));
            assert!(t.records[1..]
                .iter()
                .all(|r| r.subproblem_solves == method.solves_per_iteration()));
            assert_eq!(t.records[1].u.is_some(), method == Method::Halley);
        }
    }

    #[test]
    fn infeasible_subproblem_is_reported() {
        let c = PrecisionContext::new(50).unwrap();
        // f(x) = 3 with F1: no x satisfies 0 ∈ 3 + F1(x)
        let f = ClosureMap::affine_1d(c.zero(), c.int(3));
        let p = ProblemInstance::new(
            "const",
            Arc::new(f),
            SetValuedMap::new(vec![crate::problems::BranchKind::F1]),
            c,
        )
        .unwrap();
        let t = run(
            &p,
            &Vector::new(vec![c.one()]),
            &SolveConfig::with_digits(Method::Newton, 50),
        )
        .unwrap();
        assert_eq!(t.status, Status::SubproblemFailure);
        assert_eq!(t.records.len(), 1);
        // only completed iterations are charged
        assert_eq!(t.total_subproblem_solves, 0);
    }

    #[test]
    fn infinite_initial_residual_keeps_iterating() {
        let c = PrecisionContext::new(50).unwrap();
        let p = builtin("ex1i", c).unwrap();
        let t = run(
            &p,
            &Vector::new(vec![c.int(-1)]),
            &SolveConfig::with_digits(Method::Halley, 50),
        )
        .unwrap();
        assert!(t.records[0].residual.is_infinite());
        assert!(t.records.len() > 1);
    }

    #[test]
    fn trace_csv_layout() {
        let c = PrecisionContext::new(30).unwrap();
        let p = builtin("ex2i", c).unwrap();
        let mut cfg = SolveConfig::with_digits(Method::Halley, 30);
        cfg.tol = c.pow10(-20);
        let t = run(&p, &p.default_start.clone().unwrap(), &cfg).unwrap();
        let csv = t.to_csv();
        let mut lines = csv.lines();
        assert!(lines
            .next()
            .unwrap()
            .starts_with("# problem=ex2i method=halley digits=30"));
        assert_eq!(lines.next().unwrap(), "k,x1,x2,u1,u2,residual,step_norm");
        let row0: Vec<&str> = lines.next().unwrap().split(',').collect();
        assert_eq!(row0[0], "0");
        assert_eq!(row0[3], "-");
        assert_eq!(row0[6], "-");
        assert_eq!(csv.lines().count(), t.records.len() + 2);
    }

    #[test]
    fn json_round_trip_is_byte_identical() {
        let c = PrecisionContext::new(40).unwrap();
        let p = builtin("ex1i", c).unwrap();
        let mut cfg = SolveConfig::with_digits(Method::Halley, 40);
        cfg.tol = c.pow10(-30);
        let t = run(&p, &Vector::new(vec![c.int(6)]), &cfg).unwrap();
        let json = t.to_json();
        let back = IterationTrace::from_json(&json).unwrap();
        assert_eq!(back.to_json(), json);
    }
}
