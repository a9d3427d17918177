//! The local empirical process at a point over a finite function net, in
//! its raw and normalized versions.

use loglaw::density::{expectation_h, Density, Sample};
use loglaw::functions::interval_net;
use loglaw::process::{local_empirical, IndexedSample, Normalization};

fn main() {
    // the worked two-point case: one point in the window, one far away
    let density = Density::uniform_box(vec![0.0], vec![1.0]).unwrap();
    let sample = Sample::from_points(1, vec![0.55, 0.9]).unwrap();
    let idx = IndexedSample::new(&sample);
    let net = interval_net(&[0.25, 0.5, 1.0]).unwrap();
    let (z, h) = ([0.5], 0.2);

    println!("net of {} interval indicators, z = {:?}, h = {h}", net.len(), z);
    for g in &net.members {
        let e = expectation_h(&density, g, h, &z).unwrap();
        println!("  centering E g(h^-1(z - Z)) = {e:.6} for {g:?}");
    }
    for mode in [Normalization::Raw, Normalization::Log, Normalization::LogDensity] {
        let eval = local_empirical(&idx, &z, h, &net, &density, mode).unwrap();
        println!("  {mode:?}: psi = {:?}", eval.psi);
    }

    // a seeded run at realistic scale
    let n = 100_000;
    let h = (n as f64).powf(-0.5);
    let sample = density.sample(n, 3);
    let idx = IndexedSample::new(&sample);
    let eval =
        local_empirical(&idx, &z, h, &net, &density, Normalization::LogDensity).unwrap();
    println!("\nn = {n}, h = {h:.5}: density-normalized psi = {:?}", eval.psi);
}
