use starkbh::analysis::*;
use starkbh::hamiltonian::ModelParams;
use std::time::Instant;

fn main() {
    let mode = std::env::args().nth(1).unwrap_or_default();
    let settings = SweepSettings::default();
    match mode.as_str() {
        "hc" => {
            // critical point scan: U=0, N=2, L=11, log-spaced h grid
            let base = ModelParams { j: 1.0, u: 0.0, h: 1.0, sites: 11, particles: 2 };
            let grid: Vec<f64> = (0..28)
                .map(|k| 0.05 * (5.0f64 / 0.05).powf(k as f64 / 27.0))
                .collect();
            let t0 = Instant::now();
            let cp = critical_point(&base, &grid, &settings).unwrap();
            println!("scan took {:?}", t0.elapsed());
            for (h, est) in &cp.scan {
                println!("h={h:8.4}  plateau={:12.6e}  spread={:10.3e} flat={}", est.value, est.spread, est.flat);
            }
            println!("h_c = {:.4}, plateau {:.6e}, interior {}", cp.h_c, cp.plateau_at_peak, cp.interior);
        }
        "beta" => {
            let hc: f64 = std::env::args().nth(2).unwrap().parse().unwrap();
            let sizes = [7usize, 9, 11, 13, 15, 17, 19];
            for h in [hc, 5.0, 0.1] {
                let base = ModelParams { j: 1.0, u: 0.0, h, sites: 11, particles: 2 };
                let t0 = Instant::now();
                let out = size_scaling(&base, &sizes, &settings).unwrap();
                println!("h={h:6.3}: beta = {:.4} (r2={:.5}) in {:?}", out.fit.exponent, out.fit.r_squared, t0.elapsed());
                for (x, y) in &out.fit.points { println!("   L={x:4.0} plateau={y:.6e}"); }
            }
        }
        "alpha" => {
            let hc: f64 = std::env::args().nth(2).unwrap().parse().unwrap();
            let ns = [1usize, 2, 3, 4, 5];
            for h in [hc, 5.0, 0.1] {
                let base = ModelParams { j: 1.0, u: 0.0, h, sites: 11, particles: 2 };
                let t0 = Instant::now();
                let out = particle_scaling(&base, &ns, &settings).unwrap();
                println!("h={h:6.3}: alpha = {:.4} (r2={:.5}) in {:?}", out.fit.exponent, out.fit.r_squared, t0.elapsed());
                for (x, y) in &out.fit.points { println!("   N={x:4.0} plateau={y:.6e}"); }
            }
        }
        "hexp" => {
            let base = ModelParams { j: 1.0, u: 0.0, h: 5.0, sites: 11, particles: 2 };
            let grid: Vec<f64> = (0..8).map(|k| 3.0 + k as f64).collect();
            let out = localized_h_scaling(&base, &grid, &settings).unwrap();
            println!("h exponent = {:.4} (r2={:.5})", out.fit.exponent, out.fit.r_squared);
            for (x, y) in &out.fit.points { println!("   h={x:4.1} plateau={y:.6e}"); }
        }
        "ar" => {
            // A_r at the table config: which h? try h in 3..5, m=4, N=2..4
            let t0 = Instant::now();
            for h in [3.0, 4.0, 5.0] {
                for n in [2usize, 3, 4] {
                    let base = ModelParams { j: 1.0, u: 0.0, h, sites: 11, particles: n };
                    let res = run_plateau(&ModelParams { u: 4.0 * h, ..base }, &settings).unwrap();
                    let off = run_plateau(&base, &settings).unwrap();
                    println!("h={h} N={n}: A_r(m=4) = {:.4}  (res {:.4e} off {:.4e}, flat {}/{})",
                        res.value / off.value, res.value, off.value, res.flat, off.flat);
                }
            }
            println!("took {:?}", t0.elapsed());
        }
        "timing" => {
            // one resonance-scan cell at the acceptance size
            let base = ModelParams { j: 1.0, u: 10.0, h: 3.5, sites: 11, particles: 4 };
            let t0 = Instant::now();
            let p = run_plateau(&base, &settings).unwrap();
            println!("D=1001 dense cell: {:?}, plateau {:.5e}", t0.elapsed(), p.value);
            let base5 = ModelParams { j: 1.0, u: 0.0, h: 5.0, sites: 11, particles: 5 };
            let t0 = Instant::now();
            let p = run_plateau(&base5, &settings).unwrap();
            println!("D=3003 krylov cell (h=5): {:?}, plateau {:.5e}", t0.elapsed(), p.value);
        }
        _ => eprintln!("modes: hc beta alpha hexp ar timing"),
    }
}
