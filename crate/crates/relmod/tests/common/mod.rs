//! Seeded generators shared by the integration suites.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use relmod::model::{has_overall_effect, validate_model, ModelMatrix, Observed};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn labels(n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("c{i}")).collect()
}

/// Random valid 0-1 model matrix with up to `max_cells` cells.
pub fn random_model(rng: &mut ChaCha8Rng, max_cells: usize) -> ModelMatrix {
    loop {
        let cells = rng.gen_range(4..=max_cells);
        let rows = rng.gen_range(2..=(cells - 2).min(6));
        let entries: Vec<Vec<i64>> = (0..rows)
            .map(|_| (0..cells).map(|_| i64::from(rng.gen_bool(0.5))).collect())
            .collect();
        if let Ok(model) = validate_model(entries, labels(cells)) {
            return model;
        }
    }
}

/// Random valid model without the overall effect.
pub fn random_curved_model(rng: &mut ChaCha8Rng, max_cells: usize) -> ModelMatrix {
    loop {
        let model = random_model(rng, max_cells);
        if !has_overall_effect(&model) {
            return model;
        }
    }
}

/// Random valid model with the overall effect (literal ones row or not).
pub fn random_regular_model(rng: &mut ChaCha8Rng, max_cells: usize) -> ModelMatrix {
    loop {
        let model = random_model(rng, max_cells);
        if has_overall_effect(&model) {
            return model;
        }
        if let Ok(augmented) = relmod::transform::add_overall(&model) {
            return augmented;
        }
    }
}

/// Strictly positive observed counts.
pub fn positive_data(rng: &mut ChaCha8Rng, cells: usize) -> Observed {
    let counts: Vec<f64> = (0..cells).map(|_| rng.gen_range(0.1..1.0)).collect();
    Observed::new(counts).unwrap()
}

/// Observed counts with at least one structural zero.
pub fn sparse_data(rng: &mut ChaCha8Rng, cells: usize) -> Observed {
    loop {
        let support = rng.gen_range(1..cells);
        let mut counts = vec![0.0; cells];
        let mut chosen = 0;
        while chosen < support {
            let i = rng.gen_range(0..cells);
            if counts[i] == 0.0 {
                counts[i] = rng.gen_range(0.2..1.0);
                chosen += 1;
            }
        }
        if let Ok(data) = Observed::new(counts) {
            return data;
        }
    }
}
