use fracwave_web::{evolve, soliton, sweep};

#[test]
fn kdv_profile_and_diagnostics() {
    let v = soliton(2.0, 1.0, 1024, 40.0).unwrap();
    assert_eq!(v.len(), 1027);
    // x = 0 sits at index n/2
    assert!((v[512] - 3.0).abs() < 1e-8);
    assert!(v[1024] < 1e-8 && v[1025] < 1e-6 && v[1026] < 1e-6);
    assert!(soliton(0.2, 1.0, 1024, 40.0).is_err());
}

#[test]
fn frames_are_concatenated() {
    let v = evolve(1.0, 0.5, 64, 1.0, 4).unwrap();
    assert_eq!(v.len(), 5 * 64);
    assert!(evolve(1.0, 0.5, 60, 1.0, 4).is_err());
}

#[test]
fn burgers_breaks_and_kdv_does_not() {
    let v = sweep(&[0.0, 2.0], 256, 3.0).unwrap();
    assert!((0.9..1.2).contains(&v[0]));
    assert!(v[2].is_nan() && v[3] < 2.0);
}
