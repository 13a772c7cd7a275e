//! Agreement between human and judged persuasion ratings: Pearson's r with a
//! two-sided p-value, and Cohen's kappa on the raw levels.
//!
//! ```bash
//! cargo run --example correlation
//! ```

use interview_sim::analysis::{cohen_kappa, pearson};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let human = [1u8, 2, 2, 3, 4, 5, 3, 4, 1, 5, 2, 3];
    let judged = [1u8, 3, 2, 3, 3, 4, 3, 5, 2, 5, 2, 2];
    let x: Vec<f64> = human.iter().map(|&v| v.into()).collect();
    let y: Vec<f64> = judged.iter().map(|&v| v.into()).collect();

    let c = pearson(&x, &y)?;
    println!("n = {}, r = {:.3}, p = {:.4}", c.n, c.r, c.p);
    println!("kappa = {:.3}", cohen_kappa(&human, &judged)?);

    // Zero variance has no defined correlation.
    println!("{}", pearson(&[3.0; 4], &[1.0, 2.0, 3.0, 4.0]).unwrap_err());
    Ok(())
}
