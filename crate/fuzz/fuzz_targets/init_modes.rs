#![no_main]
use dp_spectral::parse_init_modes;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(s) = std::str::from_utf8(data) {
        let _ = parse_init_modes(s);
    }
});
