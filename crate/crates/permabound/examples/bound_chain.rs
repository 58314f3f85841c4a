//! Build a random doubly stochastic matrix and walk the whole bound chain:
//!
//! ```sh
//! cargo run --release -p permabound --example bound_chain
//! ```

use permabound::bethe::maximize_bethe;
use permabound::bounds::{log_complement_product, log_f, log_lms, log_sd, schrijver_tilde};
use permabound::curves::log_vdw;
use permabound::exact::permanent_ryser;
use permabound::Matrix;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> permabound::Result<()> {
    let n = 7;
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let raw = Matrix::from_rows(
        (0..n)
            .map(|_| (0..n).map(|_| 0.05 + rng.random::<f64>()).collect())
            .collect(),
    )?;
    let (p, _) = raw.sinkhorn_scale(1e-11, 50_000)?;

    let per = permanent_ryser(&p)?.ln();
    let bethe = maximize_bethe(&p, 1e-8, 2000)?;
    let f = log_f(&p)?;

    println!("random doubly stochastic, n = {n}");
    println!("  ln per            = {per:.6}");
    println!(
        "  ln bethe maximum  = {:.6}  (gap {:.2e}, {} iterations)",
        bethe.value, bethe.duality_gap, bethe.iterations
    );
    println!("  ln F              = {f:.6}");
    println!("  ln LMS            = {:.6}", log_lms(&p)?);
    println!("  ln SD             = {:.6}", log_sd(&p)?);
    println!("  ln vdw(n)         = {:.6}", log_vdw(n)?);
    assert!(per >= bethe.value && bethe.value >= f);
    assert!(per >= log_vdw(n)?);

    // Schrijver's inequality on the same matrix.
    let tilde = schrijver_tilde(&p)?;
    let lhs = permanent_ryser(&tilde)?.ln();
    let rhs = log_complement_product(&p)?;
    println!("  schrijver: ln per(A∘(1-A)) = {lhs:.6} >= {rhs:.6}");
    assert!(lhs >= rhs);
    Ok(())
}
