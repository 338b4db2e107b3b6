#![no_main]

use libfuzzer_sys::fuzz_target;
use qsmote::data::DataConfig;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(config) = DataConfig::from_toml_str(text) {
        let again = DataConfig::from_toml_str(&config.to_toml_string()).unwrap();
        assert_eq!(config, again);
    }
});
