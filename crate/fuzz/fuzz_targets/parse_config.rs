#![no_main]
use libfuzzer_sys::fuzz_target;
use quasineutral::io::parse_config;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(config) = parse_config(text) {
        // anything accepted must satisfy the config invariants
        assert!(config.validate().is_ok());
    }
});
