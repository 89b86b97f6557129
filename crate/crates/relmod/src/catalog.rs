//! Bundled example models and data, shared by the test suite, the CLI docs
//! and downstream callers. The JSON files under `data/` are the single
//! source of truth; the constructors here parse them at first use.

use crate::io::model_from_str;
use crate::model::{validate_model, ModelMatrix, Observed};

macro_rules! bundled_model {
    ($fn_name:ident, $file:literal) => {
        pub fn $fn_name() -> ModelMatrix {
            model_from_str(
                include_str!(concat!("../data/models/", $file)),
                $file,
            )
            .expect("bundled model files are valid")
        }
    };
}

bundled_model!(example_2_1, "example2-1.json");
bundled_model!(removeoe_1, "removeoe-1.json");
bundled_model!(removeoe_2, "removeoe-2.json");
bundled_model!(crabs, "crabs.json");
bundled_model!(as3, "as3.json");
bundled_model!(as3_bar, "as3-bar.json");
bundled_model!(as3_homogenized, "as3-homogenized.json");
bundled_model!(csi, "csi.json");
bundled_model!(elp, "elp.json");
bundled_model!(elp_bar, "elp-bar.json");

fn bundled_counts(text: &str) -> Observed {
    #[derive(serde::Deserialize)]
    struct CountsFile {
        counts: Vec<f64>,
    }
    let file: CountsFile = serde_json::from_str(text).expect("bundled counts are valid");
    Observed::new(file.counts).expect("bundled counts are valid")
}

/// Point mass on the all-features cell of the three-attribute space.
pub fn e7_counts() -> Observed {
    bundled_counts(include_str!("../data/counts/e7.json"))
}

/// Point mass on the first cell of the three-attribute space.
pub fn e1_counts() -> Observed {
    bundled_counts(include_str!("../data/counts/e1.json"))
}

/// Frequencies matching the published loss-of-potential estimates.
pub fn elp_counts() -> Observed {
    bundled_counts(include_str!("../data/counts/elp-counts.json"))
}

/// Binary configurations of `t` features with at least one feature present:
/// weight-ascending, features in index order within each weight.
fn nonzero_configs(t: usize) -> Vec<Vec<u8>> {
    let mut configs: Vec<Vec<u8>> = (1u32..(1 << t))
        .map(|bits| (0..t).map(|f| ((bits >> f) & 1) as u8).collect())
        .collect();
    configs.sort_by_key(|c| {
        let weight: u32 = c.iter().map(|&b| b as u32).sum();
        (weight, c.iter().map(|&b| 1 - b).collect::<Vec<u8>>())
    });
    configs
}

fn config_label(config: &[u8]) -> String {
    config.iter().map(|b| char::from(b'0' + b)).collect()
}

/// Aitchison-Silvey independence of `t` binary features on the 2^t - 1
/// nonzero configurations.
pub fn as_independence(t: usize) -> ModelMatrix {
    assert!((2..=6).contains(&t), "supported for 2..=6 features");
    let configs = nonzero_configs(t);
    let labels: Vec<String> = configs.iter().map(|c| config_label(c)).collect();
    let entries: Vec<Vec<i64>> = (0..t)
        .map(|f| configs.iter().map(|c| c[f] as i64).collect())
        .collect();
    validate_model(entries, labels).expect("AS independence matrices are valid")
}

/// Mutual independence of `t` binary features on the full 2^t table, with
/// the all-zeros cell first: the homogenization target of `as_independence`.
pub fn mutual_independence(t: usize) -> ModelMatrix {
    assert!((2..=6).contains(&t), "supported for 2..=6 features");
    let mut configs = vec![vec![0u8; t]];
    configs.extend(nonzero_configs(t));
    let labels: Vec<String> = configs.iter().map(|c| config_label(c)).collect();
    let mut entries: Vec<Vec<i64>> = vec![vec![1i64; configs.len()]];
    entries.extend((0..t).map(|f| configs.iter().map(|c| c[f] as i64).collect::<Vec<i64>>()));
    validate_model(entries, labels).expect("mutual independence matrices are valid")
}

/// All bundled models by name, for the CLI and tests.
pub fn bundled_models() -> Vec<ModelMatrix> {
    vec![
        example_2_1(),
        removeoe_1(),
        removeoe_2(),
        crabs(),
        as3(),
        as3_bar(),
        as3_homogenized(),
        csi(),
        elp(),
        elp_bar(),
    ]
}

/// A strictly positive distribution on the AS-`t` sample space whose subset
/// sums all equal `coordinate`, built from weight-class mixing: handy for
/// constructing proportional-fiber instances.
pub fn as_symmetric_data(t: usize, coordinate: f64) -> Observed {
    let configs = nonzero_configs(t);
    // Weights per configuration weight class w:
    //   sum_w count_w(t) x_w = 1      (total mass)
    //   sum_w per_coord_w(t) x_w = c  (each subset sum)
    // with two free classes (singletons and the full configuration) and a
    // small fixed positive weight on everything in between.
    let eps = 0.01;
    let mut count = vec![0usize; t + 1];
    for c in &configs {
        let w: usize = c.iter().map(|&b| b as usize).sum();
        count[w] += 1;
    }
    // Each coordinate sees binomial(t-1, w-1) configurations of weight w.
    let per_coord = |w: usize| -> f64 {
        let mut v = 1.0;
        for k in 0..w.saturating_sub(1) {
            v = v * (t - 1 - k) as f64 / (k + 1) as f64;
        }
        if w == 0 {
            0.0
        } else {
            v
        }
    };
    let mut mass_mid = 0.0;
    let mut coord_mid = 0.0;
    for w in 2..t {
        mass_mid += count[w] as f64 * eps;
        coord_mid += per_coord(w) * eps;
    }
    // Solve for x_1 (singletons) and x_t (full cell):
    //   t x_1 + x_t = 1 - mass_mid
    //   x_1 + x_t = coordinate - coord_mid
    let x1 = ((1.0 - mass_mid) - (coordinate - coord_mid)) / (t as f64 - 1.0);
    let xt = (coordinate - coord_mid) - x1;
    assert!(
        x1 > 0.0 && xt > 0.0,
        "coordinate {coordinate} is out of range for t = {t}"
    );
    let counts: Vec<f64> = configs
        .iter()
        .map(|c| {
            let w: usize = c.iter().map(|&b| b as usize).sum();
            if w == 1 {
                x1
            } else if w == t {
                xt
            } else {
                eps
            }
        })
        .collect();
    Observed::new(counts).expect("constructed weights are positive")
}
