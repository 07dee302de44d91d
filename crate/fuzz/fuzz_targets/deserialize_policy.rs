#![no_main]

use libfuzzer_sys::fuzz_target;
use rabin_synth::mdp::{deserialize_policy, serialize_policy};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(f) = deserialize_policy(text) else { return };
    let again = deserialize_policy(&serialize_policy(&f)).expect("serialized policy parses");
    assert_eq!(serialize_policy(&f), serialize_policy(&again));
});
