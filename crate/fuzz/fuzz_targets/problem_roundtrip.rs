#![no_main]

use hardy_core::problem::Problem;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(problem) = Problem::from_json_str(text) else {
        return;
    };
    let again = Problem::from_json_str(&problem.to_json()).expect("serialized problem parses");
    assert_eq!(problem, again);
});
