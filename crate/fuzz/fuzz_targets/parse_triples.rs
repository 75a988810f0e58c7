#![no_main]

use libfuzzer_sys::fuzz_target;
use treecut::cooccur::{parse_triples, slot_samples, write_triples};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(triples) = parse_triples(text) {
        for t in &triples {
            assert!(t.count.is_finite() && t.count >= 0.0);
        }
        let _ = slot_samples(&triples);
        let _ = write_triples(&triples);
    }
});
