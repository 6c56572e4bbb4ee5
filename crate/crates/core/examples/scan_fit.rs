// Scratch scan of noisy gain recovery across seeds (development aid).

use gyre_patrol::fitting::{fit_gains, synth_samples};
use gyre_patrol::geometry::{
    stadium_boundary_points, ImplicitBoundary, PotentialFieldParams, ShapeNavParams,
};
use gyre_patrol::Vec2;

fn main() {
    let points = stadium_boundary_points(4.5, 3.0, 48).unwrap();
    let boundary = ImplicitBoundary::fit(&points, &[(Vec2::zero(), -1.0)]).unwrap();
    let nav = ShapeNavParams::covering(&boundary);
    let (kr, kt) = (0.3, 1.2);
    let truth = PotentialFieldParams::new(kr, kt).unwrap();

    let mut good = Vec::new();
    for seed in 0..400u64 {
        let samples = synth_samples(&boundary, &nav, &truth, 50, seed, 0.05).unwrap();
        let fit = fit_gains(&samples, &boundary, &nav).unwrap();
        let er = ((fit.radial_gain - kr) / kr).abs();
        let et = ((fit.angular_gain - kt) / kt).abs();
        if er < 0.05 && et < 0.05 {
            good.push((seed, er, et));
        }
    }
    println!("{} seeds with both errors < 5%:", good.len());
    for (seed, er, et) in good.iter().take(15) {
        println!("  seed {seed}: radial {er:.4} angular {et:.4}");
    }
}
