#![no_main]
use dp_core::RingElem;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(s) = std::str::from_utf8(data) {
        if let Ok(r) = RingElem::from_json(s) {
            assert_eq!(RingElem::from_json(&r.to_json()).unwrap(), r);
        }
    }
});
