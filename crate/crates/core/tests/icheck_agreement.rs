mod common;

use common::agreement::brute_against_dual;

#[test]
fn brute_force_and_dual_agree() {
    let t = brute_against_dual(2024, 50);
    assert!(t.failures.is_empty(), "{:#?}", t.failures);
    assert!(t.decided >= 140, "{}", t.decided);
}
