#![no_main]
use libfuzzer_sys::fuzz_target;

use weilform::fqm::parse::{parse_fqm_spec, resolve, NoFsLoader};

fuzz_target!(|data: &[u8]| {
    let Ok(input) = std::str::from_utf8(data) else {
        return;
    };
    // parsing must never panic; resolution is bounded by a small budget and
    // must only ever return structured errors
    if let Ok(expr) = parse_fqm_spec(input) {
        let _ = resolve(&expr, &NoFsLoader, 512);
    }
});
