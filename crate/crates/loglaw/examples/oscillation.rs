//! Oscillation modulus of the uniform empirical process and the law it
//! satisfies: `osc_n(h_n) / sqrt(2 h_n log(1/h_n)) -> 1` along valid
//! bandwidth schedules.

use loglaw::density::Density;
use loglaw::process::{oscillation_modulus, oscillation_modulus_reference};

fn main() {
    // a two-point sample worked by hand: the best window captures both
    // points, value sqrt(2) * (2/2 - 0.1)
    let pts = [0.2, 0.3];
    let h = 0.15;
    let fast = oscillation_modulus(&pts, h);
    let slow = oscillation_modulus_reference(&pts, h);
    println!("fixed points {pts:?}, h = {h}");
    println!("  oscillation modulus  {fast}");
    println!("  quadratic reference  {slow}  (bit-identical: {})", fast == slow);

    // the law at increasing n with h = n^{-1/2}
    let density = Density::uniform_box(vec![0.0], vec![1.0]).unwrap();
    println!("\nn, h, osc_n(h)/sqrt(2 h log(1/h)) for one seeded path:");
    for n in [10_000usize, 100_000, 1_000_000] {
        let h = (n as f64).powf(-0.5);
        let sample = density.sample(n, 7);
        let ratio = oscillation_modulus(&sample.points, h) / (2.0 * h * (1.0 / h).ln()).sqrt();
        println!("  {n:>9}  {h:.6}  {ratio:.4}");
    }
}
