//! Prints mean per-block rates of the reference scenario.
//!
//! cargo run --release --example rate_stats -- [trials]

use gridsec::config::default_scenario;
use gridsec::outage::simulate_trial;

fn main() {
    let trials: u64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(2000);
    let cfg = default_scenario();
    let mut sums = [0.0f64; 4];
    let mut n = 0usize;
    for t in 0..trials {
        for b in simulate_trial(&cfg, t).expect("valid scenario") {
            sums[0] += b.r_ab[0];
            sums[1] += b.r_ae[0];
            sums[2] += b.r_bg[0];
            sums[3] += b.r_be[0];
            n += 1;
        }
    }
    let [ab, ae, bg, be] = sums.map(|s| s / n as f64);
    println!("blocks {n}");
    println!("hop 1: legit {ab:.3}  eavesdropper {ae:.3}");
    println!("hop 2: legit {bg:.3}  eavesdropper {be:.3}");
}
