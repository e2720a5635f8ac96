#![no_main]
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Some((&n, rest)) = data.split_first() else { return };
    let Ok(text) = std::str::from_utf8(rest) else { return };
    // Lengths stay small so `...` extension cannot allocate without bound.
    let len = (n & 0x80 != 0).then_some(usize::from(n & 0x3f));
    let _ = zdyn::document::parse_int_list(text, len);
});
