#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    // First byte selects the universe size; the rest is the file text.
    let Some((&first, rest)) = data.split_first() else { return };
    let m = (first % 65) as u32;
    let Ok(text) = std::str::from_utf8(rest) else { return };
    if let Ok(allocation) = fairdiv::parse_allocation(text, m) {
        let rewritten = fairdiv::allocation_json(&allocation).to_string();
        let reparsed = fairdiv::parse_allocation(&rewritten, m).expect("round trip parses");
        assert_eq!(reparsed.bundles(), allocation.bundles());
    }
});
