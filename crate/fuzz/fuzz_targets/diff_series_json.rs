#![no_main]
use dp_core::diffpoly::DiffSeries;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(s) = std::str::from_utf8(data) {
        if let Ok(d) = DiffSeries::from_json(s) {
            assert_eq!(DiffSeries::from_json(&d.to_json()).unwrap(), d);
        }
    }
});
