#![allow(dead_code)]

use ppdesup::ProductionInstance;
use rand::Rng;

/// Uniform-ish feasible first stage: levels are redrawn until their lower
/// bounds fit every facility, then the slack above the lower bounds is
/// scaled down where a facility is overloaded.
pub fn sample_feasible<R: Rng>(inst: &ProductionInstance, rng: &mut R) -> (Vec<Vec<f64>>, Vec<Vec<usize>>) {
    let (np, nf) = (inst.num_products(), inst.num_facilities());
    let y = loop {
        let y: Vec<Vec<usize>> = (0..np)
            .map(|p| (0..nf).map(|f| rng.random_range(0..inst.levels[p][f].len())).collect())
            .collect();
        let fits = (0..nf).all(|f| {
            let lo: f64 = (0..np).map(|p| inst.levels[p][f][y[p][f]].lower).sum();
            lo <= inst.capacity[f]
        });
        if fits {
            break y;
        }
    };
    let mut x = vec![vec![0.0; nf]; np];
    for f in 0..nf {
        let mut extra = vec![0.0; np];
        let mut lo_sum = 0.0;
        for p in 0..np {
            let lv = inst.levels[p][f][y[p][f]];
            let hi = lv.upper.min(inst.capacity[f]).max(lv.lower);
            extra[p] = rng.random::<f64>() * (hi - lv.lower);
            lo_sum += lv.lower;
        }
        let total: f64 = extra.iter().sum();
        let room = inst.capacity[f] - lo_sum;
        let scale = if total > room { room / total } else { 1.0 };
        for p in 0..np {
            x[p][f] = inst.levels[p][f][y[p][f]].lower + extra[p] * scale;
        }
    }
    (x, y)
}

pub fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}
