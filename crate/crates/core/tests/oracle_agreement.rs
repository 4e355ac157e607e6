mod common;

use common::agreement::solvers_against_oracle;

#[test]
fn dc_and_convex_solver_match_oracle() {
    let t = solvers_against_oracle(99, 50);
    assert!(t.failures.is_empty(), "{:#?}", t.failures);
    assert_eq!(t.decided, 50);
}
