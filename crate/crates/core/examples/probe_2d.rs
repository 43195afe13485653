use alphamod::brushlet::*;
use alphamod::signal::*;
use num_complex::Complex64;

fn main() {
    let g = GridSpec::new(2, 128, 8.0).unwrap();
    let frame = BrushletFrame::build(&g, 0.0, 4.0, 12.0, 8.0, Bell::new(0.25).unwrap()).unwrap();
    // single-mode signal at a known in-band frequency
    let mut f = SpectralSignal::zero(g);
    let m0 = (3.0 / g.dxi() + g.n as f64 / 2.0).round() as usize;
    let m1 = (1.5 / g.dxi() + g.n as f64 / 2.0).round() as usize;
    f.coeffs[m0 * g.n + m1] = Complex64::new(1.0, 0.0);
    let c = analyze(&f, &frame).unwrap();
    let back = synthesize(&c, &frame).unwrap();
    let back_spec = fft_forward(&back);
    let mut worst = (0.0, 0, 0);
    for i in 0..g.len() {
        let expect = f.coeffs[i];
        let got = back_spec.coeffs[i];
        let err = (expect - got).norm();
        if err > worst.0 {
            worst = (err, i / g.n, i % g.n);
        }
    }
    println!("single mode: worst spectral err {} at ({}, {}), target ({m0}, {m1})", worst.0, worst.1, worst.2);
    println!("value at target: {}", back_spec.coeffs[m0 * g.n + m1]);
    // how many cubes saw the mode, how many entries
    println!("entries: {}", c.entries.len());
}
