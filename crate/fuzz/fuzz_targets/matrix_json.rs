#![no_main]
use libfuzzer_sys::fuzz_target;

use weilform::fqm::discriminant_module;
use weilform::fqm::parse::matrix_from_json;

fuzz_target!(|data: &[u8]| {
    let Ok(input) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(f) = matrix_from_json(input) {
        if f.size() <= 6 && f.det_two_f().to_string().len() <= 6 {
            let _ = discriminant_module(&f);
        }
    }
});
