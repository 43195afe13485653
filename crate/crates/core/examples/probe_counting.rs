use alphamod::covering::*;

fn main() {
    for (a1, a2) in [(0.0, 1.0), (0.0, 0.5), (0.5, 1.0)] {
        for t in [200.0, 400.0] {
            let cov1 = if a1 < 1.0 {
                build_ball_covering_default(1, a1, t).unwrap()
            } else {
                build_dyadic_covering(1, t).unwrap()
            };
            let cov2 = if a2 < 1.0 {
                build_ball_covering_default(1, a2, t).unwrap()
            } else {
                build_dyadic_covering(1, t).unwrap()
            };
            let nm = neighbor_map(&cov1, &cov2).unwrap();
            let st = counting_stats(&cov1, &cov2, &nm);
            println!(
                "(a1={a1}, a2={a2}) T={t}: max|O| {} scaled {:.4} max|L| {} comp {:.3}",
                st.max_omega, st.max_omega_scaled, st.max_lambda, st.weight_comparability
            );
        }
    }
}
