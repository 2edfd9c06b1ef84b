#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(cfg) = invfilt::io::parse_config(text) {
            let again = invfilt::io::parse_config(&invfilt::io::config_to_json(&cfg)).expect("serialized config parses");
            assert_eq!(cfg, again);
        }
    }
});
