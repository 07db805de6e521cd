#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(profile) = fairdiv::parse_instance(text) {
        // Anything that parses must serialize and re-parse to the same
        // profile.
        let rewritten = fairdiv::write_instance(&profile).expect("parsed profiles serialize");
        let reparsed = fairdiv::parse_instance(&rewritten).expect("round trip parses");
        assert_eq!(reparsed, profile);
    }
});
