use lattice_core::carrier_solver::*;
use lattice_core::distributions::DistributionSpec;
use lattice_core::lattice_maps::{udkdv_map, LocalMap};
use lattice_core::{Error, RngStream};
use proptest::prelude::*;

const INF: f64 = f64::INFINITY;

fn bbs() -> LocalMap {
    LocalMap::UdKdV { j: 1.0, k: INF }
}

#[test]
fn bbs_sync_at_first_site() {
    let w = LatticeWindow::new(bbs(), 0, vec![0.0, 0.0, 1.0, 1.0, 0.0, 0.0]).unwrap();
    let c = solve_carrier_coupled(&w, (0.0, 0.9), 0.0).unwrap();
    assert_eq!(c.sync_index, Some(0));
    assert_eq!(c.values, vec![0.0, 0.0, 1.0, 2.0, 1.0, 0.0]);
    assert_eq!(c.residual, 0.0);
}

#[test]
fn small_pair_forces_sync_when_j_exceeds_k() {
    let m = LocalMap::UdKdV { j: 3.0, k: 1.0 };
    let w = LatticeWindow::new(m, 10, vec![2.5, 2.0, 0.4, 0.5, 1.7, 2.2]).unwrap();
    let c = solve_carrier_coupled(&w, (0.0, 50.0), 0.0).unwrap();
    assert!(c.sync_index.unwrap() <= 13);
    assert_eq!(c.get(13), Some(0.5));
}

#[test]
fn dkdv_contraction_syncs_quickly() {
    let m = LocalMap::DKdV { alpha: 1.0, beta: 0.0 };
    let w = LatticeWindow::new(m, 0, vec![0.5; 60]).unwrap();
    let c = solve_carrier_coupled(&w, (0.1, 2.0), 1e-10).unwrap();
    assert!(c.sync_index.unwrap() < 30);
    assert!(c.residual <= 1e-10);
}

#[test]
fn unsupported_dkdv_regime() {
    let m = LocalMap::DKdV { alpha: 1.0, beta: 2.0 };
    let w = LatticeWindow::new(m, 0, vec![0.5; 10]).unwrap();
    assert!(matches!(solve_carrier_coupled(&w, (0.1, 2.0), 1e-10), Err(Error::UnsupportedRegime(_))));
    let swap = LocalMap::DKdV { alpha: 2.0, beta: 2.0 };
    let w = LatticeWindow::new(swap, 0, vec![0.5; 10]).unwrap();
    assert!(solve_carrier_coupled(&w, (0.1, 2.0), 1e-10).is_ok());
}

#[test]
fn never_synchronizing_window_is_reported() {
    let w = LatticeWindow::new(bbs(), 0, vec![1.0; 20]).unwrap();
    assert!(matches!(solve_carrier_coupled(&w, (0.0, 5.0), 0.0), Err(Error::NotSynchronized { .. })));
}

#[test]
fn continued_fraction_fixed_points() {
    let golden = (5f64.sqrt() - 1.0) / 2.0;
    let m = LocalMap::DKdV { alpha: 0.0, beta: 1.0 };
    let w = LatticeWindow::new(m, 0, vec![1.0; 200]).unwrap();
    let c = solve_carrier_contfrac(&w, 60, 1e-10).unwrap();
    assert!(c.values.iter().all(|u| (u - golden).abs() < 1e-10));
    let m = LocalMap::DKdV { alpha: 0.0, beta: 4.0 };
    let w = LatticeWindow::new(m, 0, vec![0.5; 200]).unwrap();
    let c = solve_carrier_contfrac(&w, 60, 1e-10).unwrap();
    assert!(c.values.iter().all(|u| (u - golden / 2.0).abs() < 1e-10));
    assert!(matches!(solve_carrier_contfrac(&w, 3, 1e-14), Err(Error::NotConverged { .. })));
}

#[test]
fn continued_fraction_agrees_with_coupling() {
    let m = LocalMap::DKdV { alpha: 0.0, beta: 1.0 };
    let mut rng = RngStream::new(3);
    let mu = DistributionSpec::gig(1.0, 1.0, 1.0).build().unwrap();
    let w = LatticeWindow::sample(m, &mu, None, 0, 400, &mut rng).unwrap();
    let a = solve_carrier_contfrac(&w, 80, 1e-10).unwrap();
    let b = solve_carrier_coupled(&w, (1e-9, 1e9), 1e-12).unwrap();
    let from = a.offset.max(b.offset);
    for n in from..w.end() {
        assert!((a.get(n).unwrap() - b.get(n).unwrap()).abs() < 1e-9);
    }
}

#[test]
fn udtoda_closed_form_examples() {
    let w = LatticeWindow::from_pairs(LocalMap::UdToda, 0, &[(1.0, 2.0); 8]).unwrap();
    assert!(solve_carrier_udtoda(&w).unwrap().values.iter().all(|&u| u == 1.0));
    let w = LatticeWindow::from_pairs(LocalMap::UdToda, 0, &[(3.0, 1.0)]).unwrap();
    assert_eq!(solve_carrier_udtoda(&w).unwrap().values, vec![3.0]);
    let w = LatticeWindow::from_pairs(LocalMap::UdToda, 0, &[(1.0, 2.0), (4.0, 1.0)]).unwrap();
    assert_eq!(solve_carrier_udtoda(&w).unwrap().get(1), Some(4.0));
}

#[test]
fn udtoda_step_on_mean_window() {
    let w = LatticeWindow::from_pairs(LocalMap::UdToda, 0, &[(1.0, 2.0); 8]).unwrap();
    let c = solve_carrier_udtoda(&w).unwrap();
    let next = evolve_one_step(&w, &c).unwrap();
    assert!(next.firsts().iter().all(|&q| q == 1.0));
    assert_eq!(next.len(), 7);
}

#[test]
fn bbs_one_step_moves_block() {
    let w = LatticeWindow::new(bbs(), 0, vec![0.0, 1.0, 1.0, 0.0, 0.0, 0.0]).unwrap();
    let c = solve_carrier_with_boundary(&w, 0.0).unwrap();
    let next = evolve_one_step(&w, &c).unwrap();
    let mut full = vec![0.0];
    full.extend(next.values);
    assert_eq!(full, vec![0.0, 0.0, 0.0, 1.0, 1.0, 0.0]);
}

#[test]
fn swap_map_shifts_right() {
    let m = LocalMap::UdKdV { j: 2.0, k: 2.0 };
    let x = vec![0.25, 1.5, 0.75, 1.0, 0.5];
    let w = LatticeWindow::new(m, 0, x.clone()).unwrap();
    let c = solve_carrier_with_boundary(&w, 0.0).unwrap();
    let next = evolve_one_step(&w, &c).unwrap();
    assert_eq!(next.values, x[..4].to_vec());
}

#[test]
fn soliton_travels_two_sites_per_step() {
    let mut x = vec![0.0; 20];
    x[2] = 1.0;
    x[3] = 1.0;
    let w = LatticeWindow::new(bbs(), 0, x).unwrap();
    let f = evolve_multi(&w, 3, 4).unwrap();
    assert_eq!(f.rows.len(), 4);
    for (t, row) in f.rows.iter().enumerate() {
        let balls: Vec<i64> = (row.offset..row.end()).filter(|&n| row.x(n) == 1.0).collect();
        assert_eq!(balls, vec![2 + 2 * t as i64, 3 + 2 * t as i64]);
    }
    assert_eq!(f.local_residual().unwrap(), 0.0);
    let zero = evolve_multi(&w, 0, 4).unwrap();
    assert_eq!(zero.rows, vec![w]);
}

#[test]
fn random_field_has_exact_local_relation() {
    let m = LocalMap::UdKdV { j: 1.0, k: 2.0 };
    let mut rng = RngStream::new(11);
    let x: Vec<f64> = (0..1000).map(|_| (rng.open01() * 8.0).floor() / 8.0).collect();
    let w = LatticeWindow::new(m, 0, x).unwrap();
    let f = evolve_multi(&w, 10, 200).unwrap();
    assert_eq!(f.local_residual().unwrap(), 0.0);
    let csv = f.to_csv().unwrap();
    assert!(csv.starts_with("t,n,x,u\n"));
}

#[test]
fn udtoda_closed_form_equals_coupling() {
    let mut rng = RngStream::new(5);
    let pairs: Vec<(f64, f64)> = (0..300)
        .map(|_| ((rng.open01() * 16.0).floor() / 4.0, (rng.open01() * 20.0).floor() / 4.0))
        .collect();
    let w = LatticeWindow::from_pairs(LocalMap::UdToda, 0, &pairs).unwrap();
    let closed = solve_carrier_udtoda(&w).unwrap();
    let low = solve_carrier_with_boundary(&w, pairs[0].0).unwrap();
    assert_eq!(closed.values, low.values);
    let coupled = solve_carrier_coupled(&w, (0.0, 100.0), 0.0).unwrap();
    for n in coupled.offset..w.end() {
        assert_eq!(coupled.get(n), closed.get(n));
    }
}

#[test]
fn reconstruction_with_swap_is_immediate() {
    let m = LocalMap::UdKdV { j: 1.0, k: 1.0 };
    let col = vec![0.3; 10];
    let r = reconstruct_from_carrier(&col, &m, (0.0, 5.0), 0.0).unwrap();
    assert_eq!(r.sync_index, Some(1));
    assert!(r.values.iter().all(|&x| x == 0.3));
}

#[test]
fn reconstruction_matches_simulated_column() {
    let m = LocalMap::UdKdV { j: 1.0, k: INF };
    let mu = DistributionSpec::st_exp(2.0, 0.0, 1.0).build().unwrap();
    let mut rng = RngStream::new(21);
    let nu = DistributionSpec::s_exp(2.0, 0.0).build().unwrap();
    let w = LatticeWindow::sample(m, &mu, None, 0, 12000, &mut rng).unwrap();
    let f = evolve_multi_with(&w, 100, 200, default_seeds(&m, Some(&nu)), 0.0).unwrap();
    let n0 = f.rows.last().unwrap().offset + 1;
    let col: Vec<f64> = f.carriers.iter().map(|c| c.get(n0 - 1).unwrap()).collect();
    let truth: Vec<f64> = f.rows.iter().map(|r| r.x(n0)).collect();
    let r = reconstruct_from_carrier(&col, &m, (0.0, 1.0), 0.0).unwrap();
    for t in r.offset..r.end() {
        assert_eq!(r.get(t).unwrap(), truth[t as usize]);
    }
    assert!(r.residual < 1e-12);
}

#[test]
fn measurability_under_right_perturbation() {
    let m = LocalMap::UdKdV { j: 1.0, k: 2.0 };
    let mut rng = RngStream::new(8);
    let x: Vec<f64> = (0..400).map(|_| rng.open01()).collect();
    let w = LatticeWindow::new(m, 0, x.clone()).unwrap();
    let a = solve_carrier_coupled(&w, (0.0, 2.0), 0.0).unwrap();
    let mut y = x;
    for v in y.iter_mut().skip(300) {
        *v = 0.9;
    }
    let w2 = LatticeWindow::new(m, 0, y).unwrap();
    let b = solve_carrier_coupled(&w2, (0.0, 2.0), 0.0).unwrap();
    for n in a.offset..300 {
        assert_eq!(a.get(n), b.get(n));
    }
}

fn inverse_round_trip(w: &LatticeWindow) {
    let seeds = default_seeds(&w.model, None);
    let tol = default_tol(&w.model);
    let c = solve_carrier_coupled(w, seeds, tol).unwrap();
    let y = evolve_one_step(w, &c).unwrap();
    let r = y.reflect().unwrap();
    let c2 = solve_carrier_coupled(&r, seeds, tol).unwrap();
    let back = evolve_one_step(&r, &c2).unwrap().reflect().unwrap();
    assert!(back.len() > w.len() / 2);
    for i in 0..back.values.len() {
        let n = back.offset;
        let idx = i as i64 + if back.kind == lattice_core::lattice_maps::LatticeKind::TypeII { 2 * (n - w.offset) } else { n - w.offset };
        let orig = w.values[idx as usize];
        assert!((back.values[i] - orig).abs() <= 1e-9 * (1.0 + orig.abs()), "{} vs {}", back.values[i], orig);
    }
}

#[test]
fn time_reversal_inverts_type_one() {
    let mut rng = RngStream::new(31);
    let mu = DistributionSpec::st_exp(2.0, 0.0, 1.0).build().unwrap();
    let w = LatticeWindow::sample(LocalMap::UdKdV { j: 1.0, k: 3.0 }, &mu, None, 0, 500, &mut rng).unwrap();
    inverse_round_trip(&w);
    let g = DistributionSpec::gig(1.0, 0.5, 1.0).build().unwrap();
    let w = LatticeWindow::sample(LocalMap::DKdV { alpha: 0.5, beta: 0.0 }, &g, None, 0, 500, &mut rng).unwrap();
    inverse_round_trip(&w);
}

#[test]
fn time_reversal_inverts_type_two() {
    let mut rng = RngStream::new(32);
    let e = DistributionSpec::s_exp(1.0, 0.0).build().unwrap();
    let q = DistributionSpec::s_exp(2.0, 0.0).build().unwrap();
    let w = LatticeWindow::sample(LocalMap::UdToda, &e, Some(&q), 0, 500, &mut rng).unwrap();
    inverse_round_trip(&w);
    let e = DistributionSpec::gamma(1.0, 1.0).build().unwrap();
    let q = DistributionSpec::gamma(2.0, 1.0).build().unwrap();
    let w = LatticeWindow::sample(LocalMap::DToda, &e, Some(&q), 0, 500, &mut rng).unwrap();
    inverse_round_trip(&w);
}

proptest! {
    #[test]
    fn seed_independence(seed in 0u64..1000, lo in 0.0f64..0.3, hi in 2.0f64..6.0) {
        let m = LocalMap::UdKdV { j: 1.0, k: 2.0 };
        let mut rng = RngStream::new(seed);
        let x: Vec<f64> = (0..300).map(|_| (rng.open01() * 8.0).floor() / 8.0).collect();
        let w = LatticeWindow::new(m, 0, x).unwrap();
        let a = solve_carrier_coupled(&w, (0.0, 8.0), 0.0).unwrap();
        let b = solve_carrier_coupled(&w, (lo, hi), 0.0).unwrap();
        for n in a.offset.max(b.offset)..w.end() {
            prop_assert_eq!(a.get(n), b.get(n));
        }
        prop_assert_eq!(a.residual, 0.0);
    }

    #[test]
    fn synchronizing_pair_bounds_sync_index(seed in 0u64..1000) {
        let m = LocalMap::UdKdV { j: 3.0, k: 1.0 };
        let mut rng = RngStream::new(seed);
        let x: Vec<f64> = (0..100).map(|_| rng.open01() * 3.0).collect();
        let w = LatticeWindow::new(m, 0, x.clone()).unwrap();
        if let Some(n) = (0..99).find(|&n| x[n] + x[n + 1] <= 1.0 || x[n] + x[n + 1] >= 5.0) {
            let c = solve_carrier_coupled(&w, (0.0, 1e3), 0.0).unwrap();
            prop_assert!(c.sync_index.unwrap() <= n as i64 + 1);
        }
    }

    #[test]
    fn bbs_step_conserves_balls(bits in proptest::collection::vec(0u8..2, 40)) {
        let mut x: Vec<f64> = bits.iter().map(|&b| b as f64).collect();
        x.extend(vec![0.0; 60]);
        let w = LatticeWindow::new(bbs(), 0, x.clone()).unwrap();
        let c = solve_carrier_with_boundary(&w, 0.0).unwrap();
        let next = evolve_one_step(&w, &c).unwrap();
        let before: f64 = x.iter().sum();
        let after: f64 = next.values.iter().sum::<f64>() + udkdv_map(1.0, INF, x[0], 0.0).0;
        prop_assert_eq!(before, after);
    }
}
