#![no_main]
use libfuzzer_sys::fuzz_target;
use zdyn::document::{parse, serialize};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(doc) = parse(text) {
        let again = parse(&serialize(&doc)).expect("serialized documents parse");
        assert_eq!(again, doc, "round trip changed the document");
    }
});
