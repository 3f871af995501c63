#![no_main]

use hardy_core::problem::Problem;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(problem) = Problem::from_json_str(text) {
        // Cross-field checks must reject, never panic.
        let small = problem.n.map_or(true, |n| n <= 1 << 12)
            && problem.truncation.map_or(true, |t| t.working_n() <= 1 << 12);
        if small {
            let _ = problem.resolve();
        }
    }
});
