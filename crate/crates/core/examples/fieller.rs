//! Fieller limits against the plain normal interval as the world sample
//! shrinks, down to the point where the limits become infinite.
//!
//! cargo run --example fieller

use fieldnorm::intervals::{fieller_ci, normal_ci, SampleMoments};

fn main() -> anyhow::Result<()> {
    let group = SampleMoments::new(0.9, 0.8, 500)?;
    println!("{:>8} {:>8} {:>22} {:>22}", "world n", "h", "normal / world mean", "fieller");
    for n in [100_000, 5000, 500, 50, 10, 4] {
        // world log-mean 0.75 with sd 1.6
        let world = SampleMoments::new(0.75, 1.6, n)?;
        let normal = normal_ci(&group, 0.05)?;
        let (nl, nu) = normal.limits().unwrap();
        let f = fieller_ci(&group, &world, 0.05)?;
        let shown = match f.limits() {
            Some((l, u)) => format!("({l:.3}, {u:.3})"),
            None => "infinite".into(),
        };
        println!(
            "{n:>8} {:>8.4} {:>22} {shown:>22}",
            f.h.unwrap(),
            format!("({:.3}, {:.3})", nl / 0.75, nu / 0.75)
        );
    }
    Ok(())
}
