use std::time::Instant;

use expmc::{generate, split, tc_estimate, GenSpec, PathParams, Splitting};

fn main() {
    for n in [100, 1000, 100_000] {
        let m = split(&generate(&GenSpec::small_world(n, 1, 0.4, 1)).unwrap()).unwrap();
        for (dt, samples) in [(1e-3, 100_000u64), (0.03125, 1_000_000)] {
            let p = PathParams::from_dt(1.0, dt, samples, Splitting::Strang, 7).unwrap();
            let t = Instant::now();
            let e = tc_estimate(&m, &p).unwrap();
            let secs = t.elapsed().as_secs_f64();
            println!(
                "n={n} dt={dt} M={samples}: tc/n={:.6} se={:.2e} jumps/path={:.3} {:.3}s ({:.2} ns/step)",
                e.value / n as f64,
                e.std_error / n as f64,
                e.jumps_per_path(),
                secs,
                secs * 1e9 / (samples as f64 * p.n_steps as f64)
            );
        }
    }
}
