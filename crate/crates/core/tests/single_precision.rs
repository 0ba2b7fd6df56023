use salt_core::sde::{simulate, SimConfig};

#[test]
fn taylor_green_decays_in_f32() {
    let cfg = SimConfig {
        resolution: 16,
        horizon: 0.2,
        xi_count: 2,
        xi_amplitude: 0.0,
        ..SimConfig::default()
    };
    let (_, traj) = simulate::<f32>(&cfg).unwrap();
    let rec = &traj.record;
    let last = rec.len() - 1;
    let exact = rec.n0[0] * (-2.0 * rec.times[last]).exp();
    assert!((rec.n0[last] - exact).abs() / exact < 1e-5, "{} vs {exact}", rec.n0[last]);
}
