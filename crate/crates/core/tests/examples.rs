//! Every example under `examples/` runs to completion.

macro_rules! example {
    ($name:ident) => {
        mod $name {
            include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/", stringify!($name), ".rs"));
        }

        #[test]
        fn $name() {
            $name::run().expect(concat!(stringify!($name), " example failed"));
        }
    };
}

example!(poset);
example!(isomorphism);
example!(state_valuation);
example!(supports);
example!(support_matching_search);
example!(relation_survey);
example!(kochen_specker);
example!(operators);
