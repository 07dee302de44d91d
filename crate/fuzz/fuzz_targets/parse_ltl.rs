#![no_main]

use libfuzzer_sys::fuzz_target;
use rabin_synth::ltl::{parse_ltl, to_fragment};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(f) = parse_ltl(text) else { return };
    let again = parse_ltl(&f.to_string()).expect("printed formula parses");
    assert_eq!(f, again);
    let _ = to_fragment(&f);
});
