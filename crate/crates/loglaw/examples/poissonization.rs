//! The Poissonized companion process and its diagnostics: covariance
//! convergence toward the Gram matrix, Gaussian marginal comparison, and the
//! large-deviation tail rate.

use loglaw::density::Density;
use loglaw::functions::{interval_net, FunctionNet, Kernel1d};
use loglaw::functions::FunctionDescriptor;
use loglaw::poisson::{
    covariance_check, gaussian_compare, ldp_tail_rate, PoissonSampler,
};
use loglaw::process::BandwidthSchedule;

fn main() {
    let density = Density::uniform_box(vec![0.0], vec![1.0]).unwrap();
    let net = interval_net(&[0.5, 1.0]).unwrap();

    // a few replications of the Poissonized process
    let sampler = PoissonSampler::new(&density, 200, &[0.5], 0.1, &net).unwrap();
    println!("Poissonized process at z = 0.5, rate 200, h = 0.1:");
    for rep in 0..4 {
        let eval = sampler.draw(1, rep);
        println!("  rep {rep}: eta = {:>3}, psi = {:?}", eval.eta, eval.psi);
    }

    // covariance convergence: 2 log(1/h) cov(Pi) approaches the Gram matrix
    let rep = covariance_check(&density, 5000, &[0.5], 0.02, &net, 10_000, 5).unwrap();
    println!(
        "\ncovariance check (n = 5000, h = 0.02, 10k reps): max |dev| = {:.4} (stderr {:.4})",
        rep.max_abs_deviation, rep.stderr_at_max
    );

    // marginals approach the matched Gaussian
    let sched = BandwidthSchedule::Power { alpha: 0.5 };
    let rows = gaussian_compare(&density, &[400, 4000], &[0.5], &sched, &net, 4000, 9).unwrap();
    println!("\ntwo-sample KS distance to the exact-covariance Gaussian:");
    for r in &rows {
        println!(
            "  n = {:>5}: ks per member = {:?} (99% null {:.4})",
            r.n, r.ks, r.ks_crit_99
        );
    }

    // tail rate against the closed-form large-deviation rate
    let kernel_net =
        FunctionNet::from_members("k", vec![FunctionDescriptor::kernel(Kernel1d::Uniform, 1).unwrap()], None)
            .unwrap();
    let rows =
        ldp_tail_rate(&density, &[100, 1000, 10_000], &[0.5], &sched, &kernel_net, 1.0, 20_000, 3)
            .unwrap();
    println!("\nlarge-deviation tail rate (lambda = 1, limit -1/2):");
    for r in &rows {
        println!(
            "  n = {:>6}: eps_n log P = {:?} ({} hits)",
            r.n, r.eps_log_p, r.hits
        );
    }
}
