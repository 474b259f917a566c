use lagdelta::audit::{audit, AuditOptions};
use lagdelta::inequality::Variant;

#[test]
fn old_slack_dominates_improved_per_sample() {
    let s = audit(&AuditOptions::new(5, 200, 42)).unwrap();
    assert!(s.pass());
    let old = s.pair(Variant::Old, &[2]).unwrap();
    let imp = s.pair(Variant::Improved, &[2]).unwrap();
    for (i, (a, b)) in old.slacks.iter().zip(&imp.slacks).enumerate() {
        assert!(a >= b, "sample {i}: {a} < {b}");
    }
    assert!(old.min_relative_slack >= imp.min_relative_slack);
}

#[test]
fn n3_sweep_from_the_cli_example() {
    let s = audit(&AuditOptions::new(3, 1000, 42)).unwrap();
    for p in &s.pairs {
        assert!(p.min_relative_slack >= -1e-9, "{} {}: {}", p.variant, p.tuple, p.min_relative_slack);
    }
}
