//! Structure and bookkeeping of the design-table report on a single cell.
//! The full-grid numbers are exercised by the acceptance suite and the CLI.

use shardsybil::experiments::table2_report_on_grid;

#[test]
fn single_cell_report_shape() {
    let report = table2_report_on_grid(2_000, 9, &[(2, 600)]);
    assert_eq!(report.rows.len(), 4);
    assert_eq!(report.trials, 2_000);

    let labels: Vec<&str> = report.rows.iter().map(|r| r.label.as_str()).collect();
    assert_eq!(
        labels,
        [
            "hash-power 25%",
            "hash-power 33%..53%",
            "hash-power 56%",
            "hash-power above 66%"
        ]
    );

    // Row 1 evaluates the constrained (c >= 600) cells and simulates GFT.
    let row1 = &report.rows[0];
    assert_eq!(row1.cells.len(), 1);
    assert_eq!(row1.cells[0].rho, 0.25);
    assert_eq!(row1.cells[0].nodes, 4801);
    assert_eq!(row1.cells[0].tau, 400);
    assert_eq!(row1.cells[0].sim_trials, Some(2_000));
    assert!(row1.cells[0].gft_sim_successes.is_some());

    // Row 2 evaluates both rho endpoints, analytics only.
    let row2 = &report.rows[1];
    assert_eq!(row2.cells.len(), 2);
    assert!(row2.cells.iter().all(|cell| cell.sim_trials.is_none()));

    // On the c=600 cell every quoted bound holds.
    for row in &report.rows {
        assert!(row.satisfied, "{} not satisfied on the 600-cell", row.label);
    }

    // The report serializes (CLI emits it as JSON).
    let json = serde_json::to_value(&report).unwrap();
    assert!(json["rows"][0]["cells"][0]["p_bcp"].is_number());
}
