#![no_main]

use libfuzzer_sys::fuzz_target;
use rabin_synth::automata::{parse_hoa, to_hoa};
use rabin_synth::env::traffic::TRAFFIC_ATOMS;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    for names in [&["a", "b", "c"][..], &TRAFFIC_ATOMS[..]] {
        let atoms: Vec<String> = names.iter().map(|s| s.to_string()).collect();
        let Ok(dra) = parse_hoa(text, &atoms) else { continue };
        let again = parse_hoa(&to_hoa(&dra, "fuzz"), &atoms).expect("exported automaton parses");
        assert_eq!(dra, again);
    }
});
