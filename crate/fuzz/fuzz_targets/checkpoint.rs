#![no_main]

use hhg_qed::grid::{read_checkpoint_bytes, write_checkpoint_bytes};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(c) = read_checkpoint_bytes(data) {
        if let Ok(state) = c.into_state() {
            let bytes = write_checkpoint_bytes(&state);
            let again = read_checkpoint_bytes(&bytes).expect("written checkpoint must read");
            assert_eq!(write_checkpoint_bytes(&again.into_state().unwrap()), bytes);
        }
    }
});
