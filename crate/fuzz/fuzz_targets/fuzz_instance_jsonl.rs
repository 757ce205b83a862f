#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(line) = std::str::from_utf8(data) {
        // must never panic on arbitrary dataset lines; validation errors are fine
        let _ = openxor::jsonl::parse_instance_line(line);
    }
});
