#![no_main]

use libfuzzer_sys::fuzz_target;
use treecut::{count_cuts, parse_thesaurus};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(t) = parse_thesaurus(text) {
        // Anything accepted must survive a write/read cycle unchanged.
        let written = t.to_text();
        let again = parse_thesaurus(&written).expect("written thesaurus parses");
        assert_eq!(again.to_text(), written);
        let _ = count_cuts(&t, t.root());
    }
});
