#![no_main]

use hhg_qed::io::{format_trajectory, parse_trajectory};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(t) = parse_trajectory(text) {
        let again = parse_trajectory(&format_trajectory(&t).expect("parsed records are valid")).expect("formatted trajectory must parse");
        assert_eq!(format_trajectory(&again).expect("parsed records are valid"), format_trajectory(&t).expect("parsed records are valid"));
    }
});
