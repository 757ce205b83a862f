#![no_main]

use libfuzzer_sys::fuzz_target;
use openxor::bridge::{classify, Transcript, TranscriptSource};

fuzz_target!(|data: &[u8]| {
    if data.len() < 2 {
        return;
    }
    let n = data[0] as usize;
    let satisfiable = data[1] & 1 == 1;
    if let Ok(text) = std::str::from_utf8(&data[2..]) {
        let transcript = Transcript {
            instance_id: "fuzz".into(),
            text: text.to_string(),
            source: TranscriptSource::File,
            token_limit: None,
        };
        // classification is total: every input lands in exactly one class
        let _ = classify(&transcript, n, satisfiable);
    }
});
