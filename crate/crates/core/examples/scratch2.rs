use starkbh::analysis::*;
use starkbh::basis::{staggered_initial_state, BasisIndex};
use starkbh::hamiltonian::{build_hamiltonian, ModelParams};
use starkbh::observables::occupancy_profile;
use starkbh::propagator::{evolve, EvolveOptions};

fn mean_multi(p: &ModelParams, horizon: f64) -> f64 {
    let basis = BasisIndex::new(p.sites, p.particles).unwrap();
    let k = basis.rank(&staggered_initial_state(p.sites, p.particles).unwrap()).unwrap();
    let mut v = vec![num_complex::Complex64::new(0.0, 0.0); basis.dimension()];
    v[k] = num_complex::Complex64::new(1.0, 0.0);
    let h = build_hamiltonian(p, &basis).unwrap();
    let ts: Vec<f64> = (0..=((horizon / 0.5) as usize)).map(|i| 0.5 * i as f64).collect();
    let states = evolve(&h, &v, &ts, &EvolveOptions::default()).unwrap();
    let tot: f64 = states.iter().zip(&ts).map(|(s, &t)| occupancy_profile(s, &basis, t).unwrap().total_multi).sum();
    tot / ts.len() as f64
}

fn main() {
    // criterion 8: L=11 N=3 h=4, U=h and U=2h vs U=10
    let base = ModelParams { j: 1.0, u: 4.0, h: 4.0, sites: 11, particles: 3 };
    let m1 = mean_multi(&base, 200.0);
    let m2 = mean_multi(&ModelParams { u: 8.0, ..base }, 200.0);
    let moff = mean_multi(&ModelParams { u: 10.0, ..base }, 200.0);
    println!("c8: U=h {:.4}  U=2h {:.4}  U=10 {:.4}  ratios {:.2} {:.2}", m1, m2, moff, m1/moff, m2/moff);

    // criterion 1: time exponent for worst combos
    let settings = SweepSettings::default();
    for (u, hh) in [(0.0, 0.1), (20.0, 0.1), (5.0, 1.0), (20.0, 5.0), (0.0, 5.0)] {
        let p = ModelParams { j: 1.0, u, h: hh, sites: 11, particles: 2 };
        let series = run_qfi_series(&p, &settings).unwrap();
        let pts: Vec<(f64, f64)> = series.iter().filter(|s| s.t >= 100.0 && s.qfi > 0.0).map(|s| (s.t, s.qfi)).collect();
        let fit = fit_power_law(&pts).unwrap();
        println!("c1: U={u} h={hh}: exponent {:.4} r2 {:.5}", fit.exponent, fit.r_squared);
    }
}
