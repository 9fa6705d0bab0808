#![no_main]
use finadapt::corpus::get_instance;
use finadapt::io::{parse_solution, solution_to_json};
use finadapt::verify::verify_cover;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else { return };
    let Ok(file) = parse_solution(s) else { return };
    let _ = parse_solution(&solution_to_json(&file)).expect("re-parse of written solution");
    // shapes of P, R and the square cover 1-D/2-D and uncertain/deterministic matrices
    for name in ["P", "R", "square"] {
        let inst = get_instance(name).expect("corpus instance").instance;
        if let Ok(sol) = file.to_solution(&inst) {
            if sol.k() <= 3 {
                let _ = verify_cover(&inst, &sol, 1e-6);
            }
        }
    }
});
