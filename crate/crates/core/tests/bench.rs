use genequ::bench::{classify_cell, comparison_series, reproduce_table, run_grid, Case, GridSpec, Table};
use genequ::prelude::*;

fn small_grid(problem: &str) -> GridSpec {
    let mut spec = GridSpec::desk_profile(problem, 3);
    spec.cfg.max_iter = 60;
    spec
}

#[test]
fn three_by_three_lattice_covers_the_square() {
    let pts = small_grid("ex2i").lattice();
    let got: Vec<(f64, f64)> = pts.iter().map(|p| (p[0].to_f64(), p[1].to_f64())).collect();
    let mut want = Vec::new();
    for y in [-4.0, 0.0, 4.0] {
        for x in [-4.0, 0.0, 4.0] {
            want.push((x, y));
        }
    }
    assert_eq!(got, want);
}

#[test]
fn small_grid_is_deterministic_and_partitions_cells() {
    for problem in ["ex2i", "ex2ii"] {
        let spec = small_grid(problem);
        let a = run_grid(&spec).unwrap();
        let b = run_grid(&spec).unwrap();
        assert_eq!(a.to_csv(false), b.to_csv(false));
        assert_eq!(a.summary_json(), b.summary_json());
        assert_eq!(a.case_counts().iter().sum::<usize>(), 9);
        for cell in &a.cells {
            let halley_ok = cell.halley_status == Status::Converged;
            let newton_ok = cell.newton_status == Status::Converged;
            let want = match (newton_ok, halley_ok) {
                (_, false) => Case::HalleyFails,
                (false, true) => Case::OnlyHalley,
                (true, true) if cell.halley_cost < cell.newton_cost => Case::HalleyCheaper,
                (true, true) => Case::NewtonCheaper,
            };
            assert_eq!(cell.case, want, "{problem} at {:?}", cell.x0);
            assert_eq!(cell.halley_cost, 2 * cell.halley_iters);
            assert_eq!(cell.newton_cost, cell.newton_iters);
        }
        let csv = a.to_csv(true);
        assert!(csv.starts_with(&format!("# problem={problem} digits=120 tol=1.00e-100 max_iter=60\n")));
        assert_eq!(csv.lines().count(), 11);
        let summary: serde_json::Value = serde_json::from_str(&a.summary_json()).unwrap();
        assert_eq!(summary["grid_spec"]["n_per_axis"], 3);
        assert!(summary.get("config").is_some());
    }
}

#[test]
fn tabulated_start_is_cheaper_for_newton_under_solve_count() {
    let ctx = PrecisionContext::new(400).unwrap();
    let p = builtin("ex2i", ctx).unwrap();
    let cell = classify_cell(&p, &Table::Table3.start(&ctx), &SolveConfig::standard(Method::Halley)).unwrap();
    assert_eq!(cell.halley_iters, 6);
    assert_eq!(cell.halley_cost, 12);
    assert!(cell.newton_cost <= cell.halley_cost);
    assert_eq!(cell.case, Case::NewtonCheaper);
}

#[test]
fn exact_start_ties_at_zero_cost() {
    let ctx = PrecisionContext::new(400).unwrap();
    let p = builtin("ex2i", ctx).unwrap();
    let xbar = p.exact_solution.clone().unwrap();
    let cell = classify_cell(&p, &xbar, &SolveConfig::standard(Method::Halley)).unwrap();
    assert_eq!((cell.newton_cost, cell.halley_cost), (0, 0));
    assert_eq!(cell.case, Case::NewtonCheaper);
}

#[test]
fn halley_series_stays_below_newton() {
    let ctx = PrecisionContext::new(400).unwrap();
    let p = builtin("ex2i", ctx).unwrap();
    let series = comparison_series(&p, &Table::Table3.start(&ctx), &SolveConfig::standard(Method::Halley)).unwrap();
    assert_eq!(series.halley.len(), 7);
    assert!(series.newton.len() > series.halley.len());
    for (k, e_h) in series.halley.iter().skip(2) {
        let e_n = &series.newton[*k].1;
        assert!(e_h <= e_n, "k={k}");
    }
    let csv = series.to_csv();
    assert!(csv.starts_with("method,k,e_k\nnewton,0,"));
    assert!(csv.contains("\nhalley,6,"));
}

#[test]
fn table_csv_rows_carry_the_printed_values() {
    let report = reproduce_table(Table::Table1, &SolveConfig::standard(Method::Halley)).unwrap();
    let csv = report.to_csv();
    let row = csv.lines().find(|l| l.starts_with("7,")).unwrap();
    assert!(row.contains("1.13e-97") && row.contains("3.000000"), "{row}");
    assert!(csv.lines().next().unwrap().starts_with('#'));
}

#[test]
fn case_labels_round_trip_through_json() {
    for case in Case::ALL {
        let text = serde_json::to_string(&case).unwrap();
        assert_eq!(text, (case as u8).to_string());
        assert_eq!(serde_json::from_str::<Case>(&text).unwrap(), case);
    }
    assert!(serde_json::from_str::<Case>("4").is_err());
}
