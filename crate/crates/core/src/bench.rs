//! Benchmark harness: tabulated runs with rate estimates, Newton-vs-Halley
//! cell classification, uniform start-point grids and error series.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{PrecisionContext, Scalar, Vector};
use crate::problems::{builtin, ProblemInstance};
use crate::rates::{error_sequence, estimate_rates, rate_table_csv, reference_solution, RateEstimate};
use crate::solver::{run, IterationTrace, Method, SolveConfig, Status};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Table {
    Table1,
    Table2,
    Table3,
}

impl Table {
    pub fn problem_name(self) -> &'static str {
        match self {
            Table::Table1 => "ex1i",
            Table::Table2 => "ex1ii",
            Table::Table3 => "ex2i",
        }
    }

    pub fn start(self, ctx: &PrecisionContext) -> Vector {
        match self {
            Table::Table1 => Vector::new(vec![ctx.int(6)]),
            Table::Table2 => Vector::new(vec![ctx.int(-10)]),
            Table::Table3 => Vector::new(vec![ctx.int(1), ctx.int(-1)]),
        }
    }
}

impl FromStr for Table {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "table1" => Ok(Table::Table1),
            "table2" => Ok(Table::Table2),
            "table3" => Ok(Table::Table3),
            _ => Err(Error::InvalidArgument(format!("unknown table {s:?}"))),
        }
    }
}

#[derive(Clone, Debug)]
pub struct TableReport {
    pub trace: IterationTrace,
    pub errors: Vec<Scalar>,
    pub estimates: Vec<RateEstimate>,
}

impl TableReport {
    pub fn to_csv(&self) -> String {
        rate_table_csv(&self.trace, &self.estimates)
    }
}

/// Trace joined with its error sequence and rate estimates.
pub fn rate_report(problem: &ProblemInstance, x0: &Vector, cfg: &SolveConfig) -> Result<TableReport> {
    let trace = run(problem, x0, cfg)?;
    let xbar = reference_solution(problem, cfg)?.rounded(&cfg.context());
    let errors = error_sequence(&trace, &xbar)?;
    let estimates = estimate_rates(&errors, &cfg.context());
    Ok(TableReport {
        trace,
        errors,
        estimates,
    })
}

/// Halley run from the tabulated start; `cfg.method` is ignored.
pub fn reproduce_table(table: Table, cfg: &SolveConfig) -> Result<TableReport> {
    let cfg = SolveConfig {
        method: Method::Halley,
        ..cfg.clone()
    };
    let ctx = cfg.validate()?;
    let problem = builtin(table.problem_name(), ctx)?;
    let report = rate_report(&problem, &table.start(&ctx), &cfg)?;
    if report.trace.status == Status::SubproblemFailure {
        return Err(Error::SolverFailure(format!("{table:?}: subproblem failure")));
    }
    Ok(report)
}

/// Newton/Halley outcome class of one start point.
///
/// * 0: both converge, Newton cost ≤ Halley cost
/// * 1: both converge, Halley cost < Newton cost
/// * 2: Halley converges, Newton does not
/// * 3: Halley does not converge
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(into = "u8", try_from = "u8")]
pub enum Case {
    NewtonCheaper = 0,
    HalleyCheaper = 1,
    OnlyHalley = 2,
    HalleyFails = 3,
}

impl From<Case> for u8 {
    fn from(c: Case) -> u8 {
        c as u8
    }
}

impl TryFrom<u8> for Case {
    type Error = String;
    fn try_from(v: u8) -> std::result::Result<Self, String> {
        Case::ALL
            .get(v as usize)
            .copied()
            .ok_or_else(|| format!("case {v} out of range"))
    }
}

impl Case {
    pub const ALL: [Case; 4] = [
        Case::NewtonCheaper,
        Case::HalleyCheaper,
        Case::OnlyHalley,
        Case::HalleyFails,
    ];

    pub fn classify(newton: &IterationTrace, halley: &IterationTrace) -> Case {
        match (newton.converged(), halley.converged()) {
            (_, false) => Case::HalleyFails,
            (false, true) => Case::OnlyHalley,
            (true, true) if halley.total_subproblem_solves < newton.total_subproblem_solves => Case::HalleyCheaper,
            (true, true) => Case::NewtonCheaper,
        }
    }
}

impl fmt::Display for Case {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", *self as u8)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GridCellResult {
    pub x0: Vector,
    pub case: Case,
    pub newton_iters: usize,
    pub halley_iters: usize,
    pub newton_status: Status,
    pub halley_status: Status,
    pub newton_cost: usize,
    pub halley_cost: usize,
    pub newton_time: f64,
    pub halley_time: f64,
}

/// Runs both methods from `x0` under `cfg` (its method field is ignored).
pub fn classify_cell(problem: &ProblemInstance, x0: &Vector, cfg: &SolveConfig) -> Result<GridCellResult> {
    let newton = run(
        problem,
        x0,
        &SolveConfig {
            method: Method::Newton,
            ..cfg.clone()
        },
    )?;
    let halley = run(
        problem,
        x0,
        &SolveConfig {
            method: Method::Halley,
            ..cfg.clone()
        },
    )?;
    Ok(GridCellResult {
        x0: x0.clone(),
        case: Case::classify(&newton, &halley),
        newton_iters: newton.iterations(),
        halley_iters: halley.iterations(),
        newton_status: newton.status,
        halley_status: halley.status,
        newton_cost: newton.total_subproblem_solves,
        halley_cost: halley.total_subproblem_solves,
        newton_time: newton.wall_time,
        halley_time: halley.wall_time,
    })
}

#[derive(Clone, Debug)]
pub struct GridSpec {
    pub problem: String,
    pub x_range: (Scalar, Scalar),
    pub y_range: (Scalar, Scalar),
    pub n_per_axis: usize,
    pub cfg: SolveConfig,
}

impl GridSpec {
    pub const DEFAULT_N: usize = 41;

    /// `[-4, 4]²` with the default resolution.
    pub fn new(problem: &str, cfg: SolveConfig) -> Self {
        let ctx = cfg.context();
        GridSpec {
            problem: problem.to_string(),
            x_range: (ctx.int(-4), ctx.int(4)),
            y_range: (ctx.int(-4), ctx.int(4)),
            n_per_axis: Self::DEFAULT_N,
            cfg,
        }
    }

    /// Reduced-precision profile: 120 digits, tolerance `1e-100`.
    pub fn desk_profile(problem: &str, n_per_axis: usize) -> Self {
        let mut cfg = SolveConfig::with_digits(Method::Halley, 120);
        cfg.tol = cfg.context().pow10(-100);
        GridSpec {
            n_per_axis,
            ..GridSpec::new(problem, cfg)
        }
    }

    fn validate(&self) -> Result<()> {
        if self.n_per_axis < 2 {
            return Err(Error::InvalidArgument("grid needs at least 2 points per axis".into()));
        }
        if self.x_range.0 >= self.x_range.1 || self.y_range.0 >= self.y_range.1 {
            return Err(Error::InvalidArgument("grid ranges must be nondegenerate".into()));
        }
        Ok(())
    }

    fn axis(&self, (lo, hi): &(Scalar, Scalar), ctx: &PrecisionContext) -> Vec<Scalar> {
        let last = self.n_per_axis - 1;
        (0..self.n_per_axis)
            .map(|i| match i {
                0 => ctx.round(lo),
                i if i == last => ctx.round(hi),
                i => lo + (hi - lo) * ctx.int(i as i64) / ctx.int(last as i64),
            })
            .collect()
    }

    /// Lattice points, row-major from the lower-left corner.
    pub fn lattice(&self) -> Vec<Vector> {
        let ctx = self.cfg.context();
        let xs = self.axis(&self.x_range, &ctx);
        let ys = self.axis(&self.y_range, &ctx);
        ys.iter()
            .flat_map(|y| xs.iter().map(move |x| Vector::new(vec![x.clone(), y.clone()])))
            .collect()
    }
}

#[derive(Clone, Debug)]
pub struct GridReport {
    pub spec: GridSpec,
    pub cells: Vec<GridCellResult>,
}

#[derive(Serialize)]
struct GridSummary<'a> {
    case_counts: BTreeMap<String, usize>,
    grid_spec: GridSpecJson<'a>,
    config: &'a SolveConfig,
}

#[derive(Serialize)]
struct GridSpecJson<'a> {
    problem: &'a str,
    x_range: [&'a Scalar; 2],
    y_range: [&'a Scalar; 2],
    n_per_axis: usize,
}

impl GridReport {
    pub fn case_counts(&self) -> [usize; 4] {
        let mut counts = [0; 4];
        for cell in &self.cells {
            counts[cell.case as usize] += 1;
        }
        counts
    }

    fn header_comment(&self) -> String {
        let cfg = &self.spec.cfg;
        format!(
            "# problem={} digits={} tol={} max_iter={}\n",
            self.spec.problem,
            cfg.digits,
            cfg.tol.to_sci_string(2),
            cfg.max_iter
        )
    }

    /// Per-cell CSV. Timing columns make the output machine dependent.
    pub fn to_csv(&self, with_timing: bool) -> String {
        let mut out = self.header_comment();
        out.push_str("x0_1,x0_2,case,newton_iters,halley_iters,newton_cost,halley_cost");
        if with_timing {
            out.push_str(",newton_time,halley_time");
        }
        out.push('\n');
        for c in &self.cells {
            out.push_str(&format!(
                "{},{},{},{},{},{},{}",
                c.x0[0].to_sig_string(12),
                c.x0[1].to_sig_string(12),
                c.case,
                c.newton_iters,
                c.halley_iters,
                c.newton_cost,
                c.halley_cost
            ));
            if with_timing {
                out.push_str(&format!(",{:.6},{:.6}", c.newton_time, c.halley_time));
            }
            out.push('\n');
        }
        out
    }

    /// `{case_counts, grid_spec, config}`.
    pub fn summary_json(&self) -> String {
        let case_counts = Case::ALL
            .iter()
            .zip(self.case_counts())
            .map(|(c, n)| (c.to_string(), n))
            .collect();
        let summary = GridSummary {
            case_counts,
            grid_spec: GridSpecJson {
                problem: &self.spec.problem,
                x_range: [&self.spec.x_range.0, &self.spec.x_range.1],
                y_range: [&self.spec.y_range.0, &self.spec.y_range.1],
                n_per_axis: self.spec.n_per_axis,
            },
            config: &self.spec.cfg,
        };
        serde_json::to_string_pretty(&summary).expect("summary serializes")
    }
}

/// Classifies every lattice point of a 2-D built-in problem. Cells run in
/// parallel; results keep lattice order.
pub fn run_grid(spec: &GridSpec) -> Result<GridReport> {
    spec.validate()?;
    let ctx = spec.cfg.validate()?;
    let problem = builtin(&spec.problem, ctx)?;
    if problem.dim() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            found: problem.dim(),
        });
    }
    let cells = spec
        .lattice()
        .par_iter()
        .map(|x0| classify_cell(&problem, x0, &spec.cfg))
        .collect::<Result<Vec<_>>>()?;
    Ok(GridReport {
        spec: spec.clone(),
        cells,
    })
}

#[derive(Clone, Debug)]
pub struct ComparisonSeries {
    pub newton: Vec<(usize, Scalar)>,
    pub halley: Vec<(usize, Scalar)>,
}

impl ComparisonSeries {
    /// Long format: `method,k,e_k`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("method,k,e_k\n");
        for (name, series) in [("newton", &self.newton), ("halley", &self.halley)] {
            for (k, e) in series {
                out.push_str(&format!("{name},{k},{}\n", e.to_sci_string(6)));
            }
        }
        out
    }
}

/// `(k, e_k)` for both methods from the same start.
pub fn comparison_series(problem: &ProblemInstance, x0: &Vector, cfg: &SolveConfig) -> Result<ComparisonSeries> {
    let xbar = reference_solution(problem, cfg)?.rounded(&cfg.context());
    let series = |method| -> Result<Vec<(usize, Scalar)>> {
        let trace = run(problem, x0, &SolveConfig { method, ..cfg.clone() })?;
        if trace.status == Status::SubproblemFailure {
            return Err(Error::SolverFailure(format!("{method} run hit a subproblem failure")));
        }
        Ok(error_sequence(&trace, &xbar)?.into_iter().enumerate().collect())
    };
    Ok(ComparisonSeries {
        newton: series(Method::Newton)?,
        halley: series(Method::Halley)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lattice_includes_endpoints() {
        let mut spec = GridSpec::desk_profile("ex2i", 3);
        spec.cfg.max_iter = 5;
        let pts = spec.lattice();
        assert_eq!(pts.len(), 9);
        let as_ints: Vec<(f64, f64)> = pts.iter().map(|p| (p[0].to_f64(), p[1].to_f64())).collect();
        assert_eq!(as_ints[0], (-4.0, -4.0));
        assert_eq!(as_ints[1], (0.0, -4.0));
        assert_eq!(as_ints[4], (0.0, 0.0));
        assert_eq!(as_ints[8], (4.0, 4.0));
    }

    #[test]
    fn grid_spec_validation() {
        let mut spec = GridSpec::desk_profile("ex2i", 1);
        assert!(run_grid(&spec).is_err());
        spec.n_per_axis = 3;
        spec.x_range = (spec.x_range.1.clone(), spec.x_range.1.clone());
        assert!(run_grid(&spec).is_err());
        let spec = GridSpec::desk_profile("ex1i", 3);
        assert!(matches!(run_grid(&spec), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn classification_rules() {
        let ctx = PrecisionContext::new(60).unwrap();
        let p = builtin("ex2i", ctx).unwrap();
        let mut cfg = SolveConfig::with_digits(Method::Halley, 60);
        cfg.tol = ctx.pow10(-50);
        let x = p.exact_solution.clone().unwrap();
        let cell = classify_cell(&p, &x, &cfg).unwrap();
        assert_eq!(cell.case, Case::NewtonCheaper);
        assert_eq!((cell.newton_cost, cell.halley_cost), (0, 0));

        // a one-iteration cap: neither method converges from (1, -1)
        cfg.max_iter = 1;
        let cell = classify_cell(&p, &p.default_start.clone().unwrap(), &cfg).unwrap();
        assert_eq!(cell.case, Case::HalleyFails);
        assert_eq!(cell.newton_status, Status::MaxIter);
    }

    #[test]
    fn case_serialization() {
        assert_eq!(serde_json::to_string(&Case::OnlyHalley).unwrap(), "2");
        assert_eq!(serde_json::from_str::<Case>("1").unwrap(), Case::HalleyCheaper);
        assert!(serde_json::from_str::<Case>("7").is_err());
    }

    #[test]
    fn comparison_from_solution_is_single_points() {
        let ctx = PrecisionContext::new(60).unwrap();
        let p = builtin("ex2i", ctx).unwrap();
        let mut cfg = SolveConfig::with_digits(Method::Halley, 60);
        cfg.tol = ctx.pow10(-50);
        let s = comparison_series(&p, &p.exact_solution.clone().unwrap(), &cfg).unwrap();
        assert_eq!(s.newton.len(), 1);
        assert_eq!(s.halley.len(), 1);
        assert!(s.newton[0].1.is_zero() && s.halley[0].1.is_zero());
        assert!(s.to_csv().starts_with("method,k,e_k\nnewton,0,0.000000e+00\n"));
    }
}
