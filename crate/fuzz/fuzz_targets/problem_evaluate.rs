#![no_main]

use hardy_core::operators::compute_b;
use hardy_core::problem::Problem;
use libfuzzer_sys::fuzz_target;

const MAX_N: usize = 256;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(problem) = Problem::from_json_str(text) else {
        return;
    };
    if problem.n.map_or(false, |n| n > MAX_N)
        || problem.truncation.map_or(false, |t| t.working_n() > MAX_N)
    {
        return;
    }
    let Ok(resolved) = problem.resolve() else {
        return;
    };
    let b = compute_b(&resolved.spec, &resolved.e);
    assert!(!(b.value < 0.0));
    if b.overflow {
        assert!(b.value.is_infinite());
    }
});
