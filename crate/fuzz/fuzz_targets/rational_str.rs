#![no_main]
use libfuzzer_sys::fuzz_target;

use weilform::rational::Rational;

fuzz_target!(|data: &[u8]| {
    let Ok(input) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(r) = input.parse::<Rational>() {
        // canonical display must re-parse to the same value
        let again: Rational = r.to_string().parse().unwrap();
        assert_eq!(r, again);
    }
});
