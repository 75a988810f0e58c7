#![no_main]

use libfuzzer_sys::fuzz_target;
use treecut::disambig::{parse_pp_instances, write_pp_instances};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(instances) = parse_pp_instances(text) {
        let _ = write_pp_instances(&instances);
    }
});
