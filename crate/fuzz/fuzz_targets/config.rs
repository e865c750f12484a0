#![no_main]

use hhg_qed::io::RunConfig;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(cfg) = RunConfig::parse(text, None) {
        // accepted configs echo to text that parses to the same settings
        let echo = cfg.echo();
        let again = RunConfig::parse(&echo, None).expect("echo must parse");
        assert_eq!(again.echo(), echo);
        let _ = cfg.expand_sweep();
    }
});
