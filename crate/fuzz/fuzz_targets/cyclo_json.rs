#![no_main]
use libfuzzer_sys::fuzz_target;

use weilform::cyclotomic::Cyc;

fuzz_target!(|data: &[u8]| {
    let Ok(input) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(x) = serde_json::from_str::<Cyc>(input) {
        // accepted values must round-trip
        let again: Cyc = serde_json::from_str(&serde_json::to_string(&x).unwrap()).unwrap();
        assert!(x.eq_value(&again));
    }
});
