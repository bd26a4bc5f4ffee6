//! Compares the iterative labeler with exhaustive search on a small
//! hand-made signal.

use spine_rectify::optimize::{brute_force_solve, solve, EnergyConfig, Problem, SolveConfig, DEFAULT_BUDGET};
use spine_rectify::rectify::Signal1D;

fn bump(len: usize, center: f64, amp: f64) -> Signal1D {
    Signal1D::new((0..len).map(|i| amp * (-(i as f64 - center).powi(2) / 8.0).exp()).collect(), 1.0)
}

fn main() {
    let len = 50;
    let mut channels = vec![Signal1D::zeros(len, 1.0); 6];
    // labels 2, 3, 4 at 12, 24, 37; label 3 also fires weakly at 37
    channels[1] = bump(len, 12.0, 40.0);
    channels[2] = bump(len, 24.0, 36.0).add(&bump(len, 37.0, 16.0));
    channels[3] = bump(len, 37.0, 32.0);
    let q_hat = channels.iter().fold(Signal1D::zeros(len, 1.0), |acc, c| acc.add(c));

    let cfg = EnergyConfig::uniform(6);
    let problem = Problem::new(&channels, &cfg).unwrap();
    let iterative = solve(&problem, &q_hat, &SolveConfig::default()).unwrap();
    let exact = brute_force_solve(&problem, 4, 1.0, DEFAULT_BUDGET).unwrap();
    println!("iterative: v_l {} k {:?} E {:.4}", iterative.best.v_l, iterative.best.k, iterative.best.energy);
    println!("exhaustive: v_l {} k {:?} E {:.4}", exact.v_l, exact.k, exact.energy);
}
