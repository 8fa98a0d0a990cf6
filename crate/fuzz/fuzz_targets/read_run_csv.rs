#![no_main]
use libfuzzer_sys::fuzz_target;
use quasineutral::io::{read_run_csv_from, run_csv_bytes};

fuzz_target!(|data: &[u8]| {
    let Ok(samples) = read_run_csv_from(data) else {
        return;
    };
    if samples.iter().all(|s| s.is_finite()) {
        let bytes = run_csv_bytes(&samples).expect("in-memory write");
        let again = read_run_csv_from(bytes.as_slice()).expect("own output parses");
        assert_eq!(again, samples);
    }
});
