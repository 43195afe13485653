use alphamod::covering::*;

fn main() {
    for d in [1usize, 2] {
        for alpha in [0.0, 1.0 / 3.0, 0.5, 2.0 / 3.0] {
            let r = 2.0 * (d as f64).sqrt();
            let a = build_ball_covering(d, alpha, r, 50.0).unwrap();
            let b = build_ball_covering(d, alpha, r, 100.0).unwrap();
            println!(
                "d={} alpha={:.3} r={:.3}: n0 {} -> {}, K {} -> {}, patches {} -> {}, spread {:.2} -> {:.2}",
                d, alpha, r,
                a.certificate().n0, b.certificate().n0,
                a.certificate().k_ratio, b.certificate().k_ratio,
                a.patches().len(), b.patches().len(),
                a.certificate().mu_spread, b.certificate().mu_spread,
            );
        }
    }
}
