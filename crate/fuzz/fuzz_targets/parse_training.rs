#![no_main]

use libfuzzer_sys::fuzz_target;
use treecut::disambig::{parse_training, write_training};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(triples) = parse_training(text) {
        for t in &triples {
            assert!(!t.head.is_empty());
        }
        let _ = write_training(&triples);
    }
});
