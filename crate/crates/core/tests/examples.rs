// Every example exposes `run_example`; run them here so they cannot rot.

macro_rules! example {
    ($name:ident) => {
        #[allow(dead_code)]
        mod $name {
            include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/", stringify!($name), ".rs"));
        }
    };
}

example!(prox_operator);
example!(robbins_monro_sgd);
example!(variance_reduced);
example!(fem_poisson);
example!(random_field);
example!(gradient_check);
example!(optimal_control);
example!(mesh_sweep);

#[test]
fn prox_operator_matches_brute_force() {
    assert!(prox_operator::run_example().unwrap() < 1e-6);
}

#[test]
fn sgd_gets_close() {
    assert!(robbins_monro_sgd::run_example().unwrap() < 0.1);
}

#[test]
fn variance_reduced_gets_close() {
    let (err, samples) = variance_reduced::run_example().unwrap();
    assert!(err < 0.1, "{err}");
    assert!(samples > 80);
}

#[test]
fn fem_errors_decrease_quadratically() {
    let e = fem_poisson::run_example().unwrap();
    for w in e.windows(2) {
        assert!((3.4..4.6).contains(&(w[0] / w[1])));
    }
}

#[test]
fn random_field_moments() {
    let (mean, var_ratio) = random_field::run_example().unwrap();
    assert!((mean - 0.5).abs() < 2e-3);
    assert!((var_ratio - 1.0).abs() < 0.05);
}

#[test]
fn gradient_check_passes_and_catches_fault() {
    let (good, bad) = gradient_check::run_example().unwrap();
    assert!(good < 1e-4);
    assert!(bad > 1e-2);
}

#[test]
fn optimal_control_on_coarse_mesh() {
    let s = optimal_control::run_example(10).unwrap();
    assert!(s.converged);
    assert!(s.max_abs_control <= 0.5);
}

#[test]
fn two_mesh_sweep() {
    let rows = mesh_sweep::run_example(&[8, 12]).unwrap();
    assert_eq!(rows.iter().map(|r| r.triangles).collect::<Vec<_>>(), vec![128, 288]);
}
