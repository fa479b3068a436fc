//! Bundled example games.

pub const FIG1: &str = include_str!("../fixtures/fig1.tg");
pub const EXAMPLE_ONE_LEMMA: &str = include_str!("../fixtures/example_one_lemma.tg");
pub const OPEN_COUNTEREX: &str = include_str!("../fixtures/open_counterex.tg");
pub const DEADLINE: &str = include_str!("../fixtures/deadline.tg");
pub const RELINQUISH_ONLY: &str = include_str!("../fixtures/relinquish_only.tg");

/// Every bundled game with its file stem.
pub const ALL: [(&str, &str); 5] = [
    ("fig1", FIG1),
    ("example_one_lemma", EXAMPLE_ONE_LEMMA),
    ("open_counterex", OPEN_COUNTEREX),
    ("deadline", DEADLINE),
    ("relinquish_only", RELINQUISH_ONLY),
];
