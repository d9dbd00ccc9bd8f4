use isoflag_wasm::{divergence_minima, limit_angles, mu_power_curve};

#[test]
fn angles_are_sorted_and_in_range() {
    let a = limit_angles(3f64.ln(), 3).unwrap();
    assert!(!a.is_empty());
    assert!(a.windows(2).all(|w| w[0] <= w[1]));
    assert!(a.iter().all(|&x| (0.0..std::f64::consts::PI).contains(&x)));
    // The attracting line of diag(3, 1/3) is the horizontal axis.
    assert!(a[0].abs() < 1e-12);
}

#[test]
fn minima_grow() {
    let m = divergence_minima(3f64.ln(), 5).unwrap();
    assert_eq!(m.len(), 5);
    assert!(m.windows(2).all(|w| w[1] > w[0]));
}

#[test]
fn curve_tends_to_lambda() {
    let c = mu_power_curve(3f64.ln(), "ab", 10).unwrap();
    let lambda = c[0];
    let last = *c.last().unwrap();
    assert!((last - lambda).abs() < 1e-2);
    assert!((c[1] - lambda).abs() > (last - lambda).abs());
}

#[test]
fn bad_inputs_are_reported() {
    assert!(limit_angles(-1.0, 3).is_err());
    assert!(divergence_minima(1.0, 0).is_err());
    assert!(mu_power_curve(1.0, "a?", 3).is_err());
}
