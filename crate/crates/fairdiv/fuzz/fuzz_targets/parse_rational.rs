#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(value) = fairdiv::parse_rational(text) {
        let canonical = fairdiv::format_rational(&value);
        assert_eq!(fairdiv::parse_rational(&canonical).unwrap(), value);
    }
});
