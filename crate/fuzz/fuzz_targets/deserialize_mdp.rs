#![no_main]

use libfuzzer_sys::fuzz_target;
use rabin_synth::mdp::{deserialize_mdp, serialize_mdp, validate_mdp};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(m) = deserialize_mdp(text) else { return };
    let _ = validate_mdp(&m);
    let again = deserialize_mdp(&serialize_mdp(&m)).expect("serialized model parses");
    assert_eq!(m, again);
});
