#![no_main]
use finadapt::io::{instance_to_json, parse_instance};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(s) = std::str::from_utf8(data) {
        if let Ok(inst) = parse_instance(s) {
            // anything accepted must survive a write/read cycle
            let again = parse_instance(&instance_to_json(&inst)).expect("re-parse of written instance");
            assert_eq!(again.c, inst.c);
            assert_eq!(again.d, inst.d);
            assert_eq!(again.num_rows(), inst.num_rows());
            assert_eq!(again.omega.num_vertices(), inst.omega.num_vertices());
        }
    }
});
