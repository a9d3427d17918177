//! The unit ball induced by a net's Gram matrix: rate function through two
//! algebraic routes, sup-norm distance to the ball, and the witness point.

use loglaw::functions::interval_net;
use loglaw::limit::{in_epsilon_ball, strassen_rate_1d, LimitBallModel};

fn main() {
    let ts = [0.25, 0.5, 1.0];
    let net = interval_net(&ts).unwrap();
    let model = LimitBallModel::from_net(&net).unwrap();
    println!("interval net at {ts:?}; gram = {:?}", net.gram().unwrap());
    println!("eigenvalues {:?}, rank {}", model.eigenvalues(), model.rank());

    for psi in [[0.25, 0.5, 1.0], [0.0, 0.0, 1.0], [0.3, 0.1, -0.4]] {
        let pinv = model.rate(&psi);
        let closed = strassen_rate_1d(&ts, &psi).unwrap();
        println!("\npsi = {psi:?}");
        println!("  rate via pseudoinverse  {pinv:.6}");
        println!("  rate via closed form    {closed:.6}");
        let p = model.dist_to_unit_ball(&psi).unwrap();
        println!(
            "  distance to unit ball   {:.6}  (bracket [{:.6}, {:.6}], {} iterations)",
            p.dist, p.lower, p.upper, p.iterations
        );
        println!("  witness                 {:?}", p.witness);
        println!(
            "  witness within 1e-3?    {}",
            in_epsilon_ball(&psi, &p.witness, p.dist + 1e-3)
        );
    }

    // the disk example: distance has the closed form 1 - (1/2)/sqrt(2)
    let disk = LimitBallModel::new(&[0.25, 0.0, 0.0, 0.25], 2).unwrap();
    let p = disk.dist_to_unit_ball(&[1.0, 1.0]).unwrap();
    println!(
        "\ndisk of radius 1/2, psi = (1, 1): dist = {:.6} (exact {:.6})",
        p.dist,
        1.0 - 0.5 / 2.0f64.sqrt()
    );
}
