use std::sync::Arc;

use ncstoch_core::matrix_alg::tr_prod;
use ncstoch_core::process_sim::{
    gue_increment, hbm_increment, kappa_estimate, simulate_hbm, Ensemble, RngStream, TimeGrid,
};
use ncstoch_core::stats::{zscore, Estimate};

fn two_sample_z(a: &[f64], b: &[f64]) -> f64 {
    let (ea, eb) = (Estimate::from_samples(a), Estimate::from_samples(b));
    zscore((ea.mean - eb.mean).abs(), ea.se.hypot(eb.se))
}

#[test]
fn basis_and_entrywise_generators_agree_in_law() {
    let (n, dt, samples) = (4, 0.7, 20_000u64);
    let mut stats: [(Vec<f64>, Vec<f64>); 4] = Default::default();
    for i in 0..samples {
        let s = RngStream::new(99, i);
        let a = hbm_increment(n, dt, &mut s.for_step(0));
        let b = gue_increment(n, dt, &mut s.for_step(1));
        for (m, which) in [(&a, 0), (&b, 1)] {
            let m2 = m * m;
            let feats = [tr_prod(m, m).re, tr_prod(&m2, &m2).re, m[(0, 0)].re.powi(2), m[(0, 1)].norm_sqr()];
            for (j, f) in feats.into_iter().enumerate() {
                if which == 0 {
                    stats[j].0.push(f)
                } else {
                    stats[j].1.push(f)
                }
            }
        }
    }
    for (j, (a, b)) in stats.iter().enumerate() {
        let z = two_sample_z(a, b);
        assert!(z <= 3.0, "feature {j}: z = {z}");
    }
}

#[test]
fn kappa_of_simulated_hbm_is_elapsed_time() {
    let ens = Ensemble::hbm(6, 1.0, 0.05, 400, 12).unwrap();
    let paths = ens.collect();
    for (s, t) in [(0.0, 1.0), (0.25, 0.5), (0.1, 0.95)] {
        let k = kappa_estimate(&paths, s, t).unwrap();
        assert!(zscore((k.mean - (t - s)).abs(), k.se) <= 3.0, "({s}, {t}): {k:?}");
    }
}

#[test]
fn increments_are_independent_across_steps() {
    let grid = Arc::new(TimeGrid::uniform(1.0, 0.5).unwrap());
    let (mut a, mut b) = (Vec::new(), Vec::new());
    for i in 0..4000 {
        let x = simulate_hbm(3, grid.clone(), &RngStream::new(5, i));
        let (d0, d1) = (x.increment(0), x.increment(1));
        a.push(tr_prod(&d0, &d1).re);
        b.push(0.0);
    }
    assert!(two_sample_z(&a, &b) <= 3.0);
}
