//! The twelve acceptance criteria. Each test prints its result line, so
//! `cargo test --test acceptance -- --nocapture --test-threads 1` gives the table.

use coneharm::verify::run_criterion;

fn check(id: u8) {
    let r = run_criterion(id);
    println!("{r}");
    assert!(r.passed, "{r}");
}

macro_rules! criteria {
    ($($name:ident = $id:literal),* $(,)?) => {
        $(#[test] fn $name() { check($id) })*
    };
}

criteria! {
    criterion_01_generic_dimension_pattern = 1,
    criterion_02_non_generic_witness = 2,
    criterion_03_niven_solver_contract = 3,
    criterion_04_harmonicity = 4,
    criterion_05_branch_family = 5,
    criterion_06_endpoint_asymptotics = 6,
    criterion_07_derivative_at_one = 7,
    criterion_08_wkb_bounds = 8,
    criterion_09_pell_pipeline = 9,
    criterion_10_exclusion = 10,
    criterion_11_orthogonality = 11,
    criterion_12_perturbation_recursion = 12,
}
