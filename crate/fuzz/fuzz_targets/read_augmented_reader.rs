#![no_main]

use libfuzzer_sys::fuzz_target;
use qsmote::data::{read_augmented_reader, write_augmented_to};

fuzz_target!(|data: &[u8]| {
    for id in [None, Some("id")] {
        let Ok(table) = read_augmented_reader(data, "t", id) else {
            continue;
        };
        let mut buf = Vec::new();
        write_augmented_to(&table, &mut buf).unwrap();
        let again = read_augmented_reader(buf.as_slice(), "t", id).unwrap();
        assert_eq!(again, table);
    }
});
