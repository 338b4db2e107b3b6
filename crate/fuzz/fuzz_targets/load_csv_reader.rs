#![no_main]

use std::sync::OnceLock;

use libfuzzer_sys::fuzz_target;
use qsmote::data::demo::DEMO_CONFIG;
use qsmote::data::{load_csv_reader, write_processed_to, DataConfig, RUN_SECTIONS};

const MIXED: &str = r#"
version = 1
default_kind = "numeric-raw"

[[columns]]
name = "id"
kind = "id"

[[columns]]
name = "b"
kind = "numeric-binned"
bins = "quantile:3"
missing = "fill-mode"

[[columns]]
name = "c"
kind = "categorical"
missing = { fill = "z" }

[[columns]]
name = "e"
kind = "numeric-binned"
bins = [0.0, 1.0, 10.0]
missing = "drop-row"

[[columns]]
name = "t"
kind = "target"
"#;

fn configs() -> &'static [DataConfig] {
    static CONFIGS: OnceLock<Vec<DataConfig>> = OnceLock::new();
    CONFIGS.get_or_init(|| {
        vec![
            DataConfig::numeric_with_target("t"),
            DataConfig::from_toml_str(MIXED).unwrap(),
            DataConfig::from_run_toml_str(DEMO_CONFIG, &RUN_SECTIONS).unwrap().0,
        ]
    })
}

fuzz_target!(|data: &[u8]| {
    for config in configs() {
        let Ok(ds) = load_csv_reader(data, config) else {
            continue;
        };
        assert_eq!(ds.features.len(), ds.labels.len());
        assert_eq!(ds.row_ids.len(), ds.labels.len());
        assert!(ds.features.iter().all(|r| r.len() == ds.num_features()));
        assert!(ds.features.iter().flatten().all(|v| v.is_finite()));
        // processed output loads again under the same config
        let mut buf = Vec::new();
        write_processed_to(&ds, &mut buf).unwrap();
        let again = load_csv_reader(buf.as_slice(), config).unwrap();
        assert_eq!(again.len(), ds.len());
    }
});
