use fdw_core::forward::{ProblemSpec, Solver};
use fdw_core::inverse::{nonuniqueness_witness, WitnessOrder};
use fdw_core::ode_lab::{point_observation_recover, recover_scalar, solve_scalar, DEFAULT_MOMENTS};
use fdw_core::{Error, FractionalOrder, Piece, SourceProfile, SpatialField, SpectralOperator};

fn log_times(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| lo * (hi / lo).powf(i as f64 / (n - 1) as f64))
        .collect()
}

fn linear_mu() -> SourceProfile {
    SourceProfile::new(
        vec![Piece {
            start: 0.0,
            end: 1.0,
            coeffs: vec![1.0, -2.0],
        }],
        1.0,
    )
    .unwrap()
}

fn tail(
    alpha: FractionalOrder,
    lambda: f64,
    a: f64,
    b: f64,
    mu: &SourceProfile,
    times: &[f64],
) -> Vec<f64> {
    times
        .iter()
        .map(|&t| solve_scalar(alpha, lambda, a, b, mu, t).unwrap())
        .collect()
}

fn lab_times() -> Vec<f64> {
    log_times(8.0, 2048.0, 64)
}

#[test]
fn zero_samples_give_zero_estimates() {
    let times = lab_times();
    for alpha in [0.4, 0.5f64.sqrt(), 1.3, 2f64.sqrt()] {
        let order = FractionalOrder::new(alpha).unwrap();
        let r = recover_scalar(
            &times,
            &vec![0.0; times.len()],
            order,
            2.0,
            1.0,
            DEFAULT_MOMENTS,
        )
        .unwrap();
        assert_eq!(r.moments.len(), DEFAULT_MOMENTS + 1);
        assert!(r.a_hat.abs() < 1e-8 && r.b_hat.unwrap_or(0.0).abs() < 1e-8);
        assert!(r.moments.iter().all(|m| m.abs() < 1e-8));
    }
}

#[test]
fn scalar_round_trip() {
    let times = lab_times();
    for (alpha, b) in [
        (0.5f64.sqrt(), 0.0),
        (2f64.sqrt(), 0.7),
        (0.4, 0.0),
        (1.3, 0.7),
    ] {
        let order = FractionalOrder::new(alpha).unwrap();
        let y = tail(order, 2.0, 1.0, b, &linear_mu(), &times);
        let r = recover_scalar(&times, &y, order, 2.0, 1.0, DEFAULT_MOMENTS).unwrap();
        assert!((r.a_hat - 1.0).abs() < 1e-3, "{alpha}: a {}", r.a_hat);
        if alpha > 1.0 {
            assert!((r.b_hat.unwrap() - b).abs() < 1e-3);
        }
        // μ = 1 − 2s on (0, 1): μ_0 = 0, μ_1 = 1/6
        assert!(r.moments[0].abs() < 1e-3, "{alpha}: {:?}", r.moments);
        assert!(
            (r.moments[1] - 1.0 / 6.0).abs() < 1e-3,
            "{alpha}: {:?}",
            r.moments
        );
    }
}

#[test]
fn witness_data_is_rank_deficient_only_at_classical_order() {
    let times = lab_times();
    let w = nonuniqueness_witness(WitnessOrder::One, 1.0, 1.0).unwrap();
    let one = FractionalOrder::new(1.0).unwrap();
    let y = w.tail(one, &times).unwrap();
    assert!(matches!(
        recover_scalar(&times, &y, one, 1.0, 1.0, DEFAULT_MOMENTS),
        Err(Error::IllConditioned { .. })
    ));
    let frac = FractionalOrder::new(0.5f64.sqrt()).unwrap();
    let y = w.tail(frac, &times).unwrap();
    let r = recover_scalar(&times, &y, frac, 1.0, 1.0, DEFAULT_MOMENTS).unwrap();
    assert!(r.condition < 1e12);
    assert!((r.a_hat - w.a).abs() < 1e-3, "{r:?}");
    // λ = 1 converges slowly at t = 8, so the source moment is looser
    assert!((r.moments[0] - 1.0).abs() < 1e-2, "{r:?}");
}

#[test]
fn unfitted_moments_do_not_move_a() {
    let times = lab_times();
    let order = FractionalOrder::new(0.6).unwrap();
    let base = SourceProfile::constant(1.0, 0.0, 1.0, 1.0).unwrap();
    // shifted Legendre polynomial of degree 4: orthogonal to 1, s, s², s³
    let perturbed = SourceProfile::new(
        vec![Piece {
            start: 0.0,
            end: 1.0,
            coeffs: vec![2.0, -20.0, 90.0, -140.0, 70.0],
        }],
        1.0,
    )
    .unwrap();
    for m in 0..=3 {
        assert!((perturbed.moment(m) - base.moment(m)).abs() < 1e-12);
    }
    let r0 = recover_scalar(
        &times,
        &tail(order, 2.0, 1.0, 0.0, &base, &times),
        order,
        2.0,
        1.0,
        3,
    )
    .unwrap();
    let r1 = recover_scalar(
        &times,
        &tail(order, 2.0, 1.0, 0.0, &perturbed, &times),
        order,
        2.0,
        1.0,
        3,
    )
    .unwrap();
    assert!(
        (r0.a_hat - r1.a_hat).abs() < 1e-6,
        "{} vs {}",
        r0.a_hat,
        r1.a_hat
    );
}

fn point_spec(f: Vec<f64>) -> ProblemSpec {
    ProblemSpec::new(
        FractionalOrder::new(0.5f64.sqrt()).unwrap(),
        SpectralOperator::dirichlet_laplacian_1d(1.0, 2).unwrap(),
        SpatialField::zeros(2),
        None,
        SpatialField::new(f),
        SourceProfile::constant(1.0, 0.0, 1.0, 1.0).unwrap(),
    )
    .unwrap()
}

#[test]
fn point_observation_round_trip() {
    let times = lab_times();
    let spec = point_spec(vec![0.8, -0.6]);
    let x0 = 0.3;
    let solver = Solver::new(spec.clone());
    let y: Vec<f64> = times
        .iter()
        .map(|&t| spec.op.eval(&solver.solve(t).unwrap(), x0))
        .collect();
    let r = point_observation_recover(&spec, x0, &times, &y, DEFAULT_MOMENTS).unwrap();
    assert!((r.moments[0] - 1.0).abs() < 1e-3, "{:?}", r.moments);
    assert!((r.moments[1] + 0.5).abs() < 1e-3, "{:?}", r.moments);
    let zero =
        point_observation_recover(&spec, x0, &times, &vec![0.0; times.len()], DEFAULT_MOMENTS)
            .unwrap();
    assert!(zero.moments.iter().all(|m| m.abs() < 1e-8));
}

#[test]
fn point_at_a_node_is_degenerate() {
    let times = lab_times();
    let spec = point_spec(vec![0.0, 1.0]);
    assert!(matches!(
        point_observation_recover(&spec, 0.5, &times, &vec![0.0; times.len()], 3),
        Err(Error::DegeneratePoint { .. })
    ));
    let mut with_data = point_spec(vec![1.0, 0.0]);
    with_data.a = SpatialField::new(vec![1.0, 0.0]);
    assert!(matches!(
        point_observation_recover(&with_data, 0.3, &times, &vec![0.0; times.len()], 3),
        Err(Error::InvalidInput(_))
    ));
}
