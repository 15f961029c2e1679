//! Print the relative volume function of the Eguchi-Hanson chart.
//!
//! Usage: cargo run --example psi_table [samples]

fn main() {
    let samples: usize = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(512);
    let eh = tale::metric::eguchi_hanson(1.0).unwrap();
    let deck = tale::groups::FiniteRotationGroup::cyclic_so4(2, 1, 1).unwrap();
    let chart = tale::metric::quotient_annulus(&eh, deck).unwrap();
    let p = [2.5, 0.0, 0.0, 0.0];
    let radii: Vec<f64> = (0..8)
        .map(|k| 0.25 * (200.0f64 / 0.25).powf(k as f64 / 7.0))
        .collect();
    let table =
        tale::volume::psi_table(&chart, &p, &radii, samples, &tale::metric::OdeOptions::bulk())
            .unwrap();
    println!("{:>10} {:>8} {:>8}", "r", "psi", "stderr");
    for i in 0..table.radii.len() {
        println!(
            "{:>10.3} {:>8.4} {:>8.4}",
            table.radii[i], table.psi[i], table.stderr[i]
        );
    }
}
