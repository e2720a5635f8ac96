#![no_main]
use libfuzzer_sys::fuzz_target;
use zdyn::dot::{export_dot, DotOptions};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(doc) = zdyn::document::parse(text) {
        let _ = export_dot(&doc, DotOptions { level: 2, depth: 3 });
    }
});
