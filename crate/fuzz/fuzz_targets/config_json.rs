#![no_main]
use libfuzzer_sys::fuzz_target;

use weilform::config::Budgets;

fuzz_target!(|data: &[u8]| {
    let Ok(input) = std::str::from_utf8(data) else {
        return;
    };
    let _ = Budgets::from_json(input);
});
