#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if data.is_empty() {
        return;
    }
    // first byte picks the expected length, the rest is the transcript text
    let n = data[0] as usize;
    if let Ok(text) = std::str::from_utf8(&data[1..]) {
        let _ = openxor::bridge::parse_response(text, n);
    }
});
