#![no_main]

use hhg_qed::io::{format_spectrum, parse_spectrum};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(s) = parse_spectrum(text) {
        let again = parse_spectrum(&format_spectrum(&s).expect("parsed records are valid")).expect("formatted spectrum must parse");
        assert_eq!(format_spectrum(&again).expect("parsed records are valid"), format_spectrum(&s).expect("parsed records are valid"));
    }
});
