#![no_main]
use libfuzzer_sys::fuzz_target;
use quasineutral::experiments::SweepConfig;
use quasineutral::io::{apply_overrides, parse_override};

fuzz_target!(|data: &[u8]| {
    let text = String::from_utf8_lossy(data);
    let args: Vec<String> = text.split('\n').map(str::to_string).collect();
    for arg in &args {
        let _ = parse_override(arg);
    }
    if let Ok(config) = apply_overrides(SweepConfig::default(), &args) {
        assert!(config.validate().is_ok());
    }
});
