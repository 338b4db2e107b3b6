//! Seeded generator for the bundled churn-style demo dataset.
//!
//! Columns loosely follow a telecom churn extract: usage and billing figures
//! on very different scales (binned by the shipped config), small call
//! counts, household fields and a few categoricals. Churners differ from the
//! rest by a fraction of a standard deviation on about half of the columns,
//! so no single column separates the classes. Some cells are left blank to
//! exercise the fill policies.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, Normal, Poisson};

use crate::rng;

pub const DEMO_ROWS: usize = 2000;
pub const DEMO_MINORITY: usize = 200;
pub const DEMO_SEED: u64 = 20240611;

/// Run file for the CSV produced by [`generate`]: the data config plus
/// `[smote]` and `[evaluate]` tables.
pub const DEMO_CONFIG: &str = include_str!("../../data/demo_churn.toml");

/// The CSV shipped next to [`DEMO_CONFIG`].
pub const DEMO_CSV: &str = include_str!("../../data/demo_churn.csv");

/// A numeric column; churners' location moves by `shift · spread`. Log-normal
/// columns take `center` as the median and `spread` on the log scale. Values
/// are clamped at `floor` and printed with `decimals`.
struct Numeric {
    name: &'static str,
    center: f64,
    spread: f64,
    shift: f64,
    log: bool,
    floor: f64,
    decimals: usize,
}

const fn normal(name: &'static str, center: f64, spread: f64, shift: f64, floor: f64, decimals: usize) -> Numeric {
    Numeric {
        name,
        center,
        spread,
        shift,
        log: false,
        floor,
        decimals,
    }
}

const fn lognormal(name: &'static str, median: f64, spread: f64, shift: f64, decimals: usize) -> Numeric {
    Numeric {
        name,
        center: median,
        spread,
        shift,
        log: true,
        floor: 0.0,
        decimals,
    }
}

const NUMERIC: [Numeric; 9] = [
    lognormal("monthly_revenue", 50.0, 0.5, 0.3, 2),
    lognormal("monthly_minutes", 400.0, 0.8, -0.3, 0),
    normal("recurring_charge", 46.0, 22.0, -0.35, 0.0, 0),
    lognormal("overage_minutes", 15.0, 1.2, 0.4, 0),
    normal("percent_change_minutes", -10.0, 250.0, -0.3, -1500.0, 0),
    lognormal("unanswered_calls", 16.0, 1.0, 0.0, 0),
    lognormal("received_calls", 70.0, 1.0, -0.25, 1),
    lognormal("peak_calls", 60.0, 0.9, 0.0, 0),
    normal("equipment_days", 380.0, 250.0, 0.5, 0.0, 0),
];

/// Counts: Poisson with per-class means, or, when `zero` is positive, zero
/// with that probability and otherwise a rounded log-normal draw with the
/// given median (log spread 1.1). The second form gives the long right tails
/// typical of call logs.
struct Count {
    name: &'static str,
    stay: f64,
    churn: f64,
    zero: f64,
}

const fn count(name: &'static str, stay: f64, churn: f64, zero: f64) -> Count {
    Count {
        name,
        stay,
        churn,
        zero,
    }
}

const COUNTS: [Count; 8] = [
    count("roaming_calls", 2.0, 3.0, 0.7),
    count("dropped_calls", 4.0, 5.5, 0.1),
    count("blocked_calls", 2.0, 2.5, 0.35),
    count("care_calls", 1.6, 2.4, 0.0),
    count("three_way_calls", 0.3, 0.3, 0.0),
    count("months_in_service", 19.0, 16.0, 0.0),
    count("unique_subs", 1.4, 1.5, 0.0),
    count("handsets", 1.8, 1.5, 0.0),
];

/// Categorical columns: levels and the probability of each level for
/// non-churners and churners.
struct Categorical {
    name: &'static str,
    levels: &'static [&'static str],
    stay: &'static [f64],
    churn: &'static [f64],
}

const CATEGORICAL: [Categorical; 5] = [
    Categorical {
        name: "children",
        levels: &["No", "Yes"],
        stay: &[0.75, 0.25],
        churn: &[0.75, 0.25],
    },
    Categorical {
        name: "web_capable",
        levels: &["No", "Yes"],
        stay: &[0.08, 0.92],
        churn: &[0.14, 0.86],
    },
    Categorical {
        name: "credit_rating",
        levels: &[
            "1-Highest",
            "2-High",
            "3-Good",
            "4-Medium",
            "5-Low",
            "6-VeryLow",
            "7-Lowest",
        ],
        stay: &[0.16, 0.37, 0.17, 0.11, 0.09, 0.03, 0.07],
        churn: &[0.14, 0.30, 0.17, 0.12, 0.13, 0.04, 0.10],
    },
    Categorical {
        name: "prizm_code",
        levels: &["Other", "Rural", "Suburban", "Town"],
        stay: &[0.47, 0.05, 0.32, 0.16],
        churn: &[0.49, 0.05, 0.30, 0.16],
    },
    Categorical {
        name: "marital_status",
        levels: &["No", "Unknown", "Yes"],
        stay: &[0.19, 0.39, 0.42],
        churn: &[0.22, 0.39, 0.39],
    },
];

fn pick<R: Rng>(rng: &mut R, weights: &[f64]) -> usize {
    let mut u = rng.random::<f64>();
    for (i, w) in weights.iter().enumerate() {
        if u < *w {
            return i;
        }
        u -= w;
    }
    weights.len() - 1
}

/// CSV text with `rows` customers, `minority` of whom churn. Row order is a
/// seeded shuffle so churners are spread through the file.
pub fn generate(rows: usize, minority: usize, seed: u64) -> String {
    assert!(minority <= rows);
    let mut labels: Vec<bool> = (0..rows).map(|i| i < minority).collect();
    labels.shuffle(&mut rng::stream(seed, &[0]));

    let mut header = vec!["customer_id"];
    header.extend(NUMERIC.iter().map(|c| c.name));
    header.extend(COUNTS.iter().map(|c| c.name));
    header.extend(["income_group", "age"]);
    header.extend(CATEGORICAL.iter().map(|c| c.name));
    header.push("churn");
    let mut out = header.join(",");
    out.push('\n');

    for (i, &churn) in labels.iter().enumerate() {
        let mut rng = rng::stream(seed, &[1, i as u64]);
        let mut cells = vec![format!("C{:06}", 100_001 + i)];
        for c in &NUMERIC {
            let shift = if churn { c.shift * c.spread } else { 0.0 };
            let v = if c.log {
                Normal::new(c.center.ln() + shift, c.spread)
                    .expect("spread > 0")
                    .sample(&mut rng)
                    .exp()
            } else {
                Normal::new(c.center + shift, c.spread)
                    .expect("spread > 0")
                    .sample(&mut rng)
            }
            .max(c.floor);
            cells.push(format!("{v:.*}", c.decimals));
        }
        for c in &COUNTS {
            let center = if churn { c.churn } else { c.stay };
            let v: f64 = if c.zero == 0.0 {
                Poisson::new(center).expect("mean > 0").sample(&mut rng)
            } else if rng.random::<f64>() < c.zero {
                0.0
            } else {
                Normal::new(center.ln(), 1.1)
                    .expect("spread > 0")
                    .sample(&mut rng)
                    .exp()
                    .round()
            };
            cells.push(format!("{v}"));
        }
        cells.push(format!("{}", rng.random_range(0..10)));
        let age_mean: f64 = if churn { 37.0 } else { 41.0 };
        let age = Normal::new(age_mean, 13.0)
            .expect("sd > 0")
            .sample(&mut rng)
            .round()
            .clamp(18.0, 99.0);
        cells.push(if rng.random::<f64>() < 0.02 {
            String::new()
        } else {
            format!("{age}")
        });
        for c in &CATEGORICAL {
            let level = c.levels[pick(&mut rng, if churn { c.churn } else { c.stay })];
            let blank = c.name == "prizm_code" && rng.random::<f64>() < 0.015;
            cells.push(if blank { "NA".to_owned() } else { level.to_owned() });
        }
        cells.push(if churn { "Yes" } else { "No" }.to_owned());
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}
