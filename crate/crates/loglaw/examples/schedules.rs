//! Bandwidth schedule validation: the three conditions a sequence `h_n`
//! must satisfy, shown on one valid and two defective schedules.

use loglaw::process::{log_spaced_ns, validate_schedule, BandwidthSchedule};

fn show(name: &str, schedule: &BandwidthSchedule, ns: &[u64]) {
    let rep = validate_schedule(schedule, ns).unwrap();
    println!(
        "{name}: decreasing-h/increasing-nh {}, nh/log divergence {}, log-ratio growth {}",
        if rep.h1_pass { "pass" } else { "FAIL" },
        if rep.h2_pass { "pass" } else { "FAIL" },
        if rep.h3_pass { "pass" } else { "FAIL" },
    );
    println!(
        "  nh/log(1/h) from {:.2} to {:.2} (threshold {})",
        rep.seq_nh_over_log.first().unwrap(),
        rep.seq_nh_over_log.last().unwrap(),
        rep.h2_threshold
    );
}

fn main() {
    let ns = log_spaced_ns(100, 1_000_000, 24);

    show("h = n^{-1/2}", &BandwidthSchedule::Power { alpha: 0.5 }, &ns);

    // h = 1/log n shrinks too slowly: the log-ratio condition stays flat
    let pairs: Vec<(u64, f64)> = ns.iter().map(|&n| (n, 1.0 / (n as f64).ln())).collect();
    show("h = 1/log n", &BandwidthSchedule::Table { pairs }, &ns);

    // an increasing table violates monotonicity outright
    let pairs: Vec<(u64, f64)> = ns
        .iter()
        .enumerate()
        .map(|(i, &n)| (n, 0.01 * (1.0 + i as f64 / 10.0)))
        .collect();
    show("increasing h", &BandwidthSchedule::Table { pairs }, &ns);
}
