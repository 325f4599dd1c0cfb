//! Wire-format properties for the behavior profile.

use std::collections::HashMap;

use proptest::prelude::*;

use replicheck_core::profile::{
    deserialize_profile, hash_call_path, serialize_profile, BehaviorProfile, CallRecord,
};
use replicheck_core::stats::TSquaredVector;

fn profile_strategy() -> impl Strategy<Value = BehaviorProfile> {
    let token = "[a-z0-9][a-z0-9_-]{0,11}";
    let path = "/[a-zA-Z0-9_./#-]{1,40}";
    let text = "[a-zA-Z0-9 ()<>,._-]{0,24}";
    (
        token,
        token,
        proptest::collection::btree_map(path, (text, text, any::<u32>(), 1..1_000_000_u64), 0..12),
        proptest::collection::vec(0.0..1.0e9_f64, 0..40),
        1..60_000_u64,
    )
        .prop_map(|(identifier, node_id, raw_calls, t2, interval_ms)| {
            let mut calls = HashMap::new();
            for (path, (callee, signature, line, count)) in raw_calls {
                let key = hash_call_path(&path).unwrap();
                calls.insert(
                    key,
                    CallRecord {
                        callee,
                        signature,
                        line,
                        path,
                        count,
                    },
                );
            }
            BehaviorProfile {
                identifier,
                node_id,
                calls,
                sample_count: t2.len(),
                t_squared: TSquaredVector::new(t2),
                interval_ms,
            }
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn deserializer_never_panics_on_arbitrary_bytes(bytes in proptest::collection::vec(any::<u8>(), 0..400)) {
        let _ = deserialize_profile(&bytes);
    }

    #[test]
    fn deserializer_never_panics_on_text_lines(text in "[ -~\n\t]{0,300}") {
        let _ = deserialize_profile(text.as_bytes());
    }

    #[test]
    fn round_trip_preserves_structure(profile in profile_strategy()) {
        let bytes = serialize_profile(&profile);
        let back = deserialize_profile(&bytes).unwrap();
        // discrete fields are exact; t² carries 12 significant digits
        prop_assert!(profile.approx_eq(&back, 1e-9));
    }

    #[test]
    fn equal_profiles_serialize_to_equal_bytes(profile in profile_strategy()) {
        let twin = profile.clone();
        prop_assert_eq!(serialize_profile(&profile), serialize_profile(&twin));
    }

    #[test]
    fn reserializing_a_parsed_profile_is_byte_stable(profile in profile_strategy()) {
        // the canonical form is a fixed point of parse ∘ serialize
        let bytes = serialize_profile(&profile);
        let back = deserialize_profile(&bytes).unwrap();
        prop_assert_eq!(bytes, serialize_profile(&back));
    }
}
