mod common;

use common::{compare_runs, full_run};

#[test]
fn two_runs_are_byte_identical() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let compared = compare_runs(&full_run(a.path()), &full_run(b.path())).unwrap();
    assert!(compared >= 7, "only {compared} files compared");
}
