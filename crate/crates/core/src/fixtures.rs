//! The four-dimensional validation problem: a normal distribution with five
//! inequality constraints, two equality constraints, and a change of
//! coordinates that flattens the equality plane onto the first two axes.

use crate::io::{parse_problem, TransformFile};
use crate::oracles::ValidationTransform;
use crate::problem::ProblemSpec;

pub const PENTAGON_INEQUALITY_JSON: &str = include_str!("../fixtures/pentagon_inequality.json");
pub const PENTAGON_EQUALITY_JSON: &str = include_str!("../fixtures/pentagon_equality.json");
pub const PENTAGON_COMBINED_JSON: &str = include_str!("../fixtures/pentagon_combined.json");
pub const PENTAGON_TRANSFORM_JSON: &str = include_str!("../fixtures/pentagon_transform.json");

/// `(file name, contents)` for every pentagon fixture.
pub const PENTAGON_FILES: [(&str, &str); 4] = [
    ("pentagon_inequality.json", PENTAGON_INEQUALITY_JSON),
    ("pentagon_equality.json", PENTAGON_EQUALITY_JSON),
    ("pentagon_combined.json", PENTAGON_COMBINED_JSON),
    ("pentagon_transform.json", PENTAGON_TRANSFORM_JSON),
];

pub fn pentagon_inequality() -> ProblemSpec {
    parse_problem(PENTAGON_INEQUALITY_JSON).expect("fixture is valid")
}

pub fn pentagon_equality() -> ProblemSpec {
    parse_problem(PENTAGON_EQUALITY_JSON).expect("fixture is valid")
}

pub fn pentagon_combined() -> ProblemSpec {
    parse_problem(PENTAGON_COMBINED_JSON).expect("fixture is valid")
}

pub fn pentagon_transform() -> ValidationTransform {
    TransformFile::parse(PENTAGON_TRANSFORM_JSON)
        .and_then(|f| f.to_transform())
        .expect("fixture is valid")
}
