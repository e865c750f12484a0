#![no_main]

use hhg_qed::io::{format_electronic_data, parse_electronic_data};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(d) = parse_electronic_data(text) {
        let again = parse_electronic_data(&format_electronic_data(&d).expect("parsed records are valid")).expect("formatted data must parse");
        assert_eq!(again, d);
    }
});
