#![no_main]
use finadapt::io::parse_scenarios;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(s) = std::str::from_utf8(data) {
        if let Ok(points) = parse_scenarios(s) {
            assert!(points.iter().flatten().all(|v| v.is_finite()));
        }
    }
});
