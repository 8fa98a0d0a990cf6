#![no_main]
use libfuzzer_sys::fuzz_target;
use quasineutral::io::{rate_csv_bytes, read_rate_csv_from};

fuzz_target!(|data: &[u8]| {
    let Ok(fits) = read_rate_csv_from(data) else {
        return;
    };
    let bytes = rate_csv_bytes(&fits).expect("in-memory write");
    let again = read_rate_csv_from(bytes.as_slice()).expect("own output parses");
    assert_eq!(again.len(), fits.len());
});
