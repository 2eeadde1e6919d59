//! The JSON space file format.
//!
//! ```json
//! {"points": ["a", "b", "c"],
//!  "distances": [["a", "b", "1/2"], ["a", "c", "1"], ["b", "c", "1"]]}
//! ```
//!
//! Rationals travel as `"p/q"` or `"p"` strings, never as numbers, so no
//! value can silently round. Each unordered pair must appear exactly once;
//! duplicate pairs, unknown point references, float literals and missing
//! entries are all rejected.

use serde::{Deserialize, Serialize};

use crate::{parse_rational, Error, Rational, Space};

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSpace {
    points: Vec<String>,
    distances: Vec<(String, String, String)>,
}

/// Parses a space from its JSON text form and validates it.
pub fn parse_space(text: &str) -> Result<Space<Rational>, Error> {
    let raw: RawSpace = serde_json::from_str(text).map_err(|e| Error::Format(e.to_string()))?;
    let mut entries = Vec::with_capacity(raw.distances.len());
    for (a, b, v) in raw.distances {
        entries.push((a, b, parse_rational(&v)?));
    }
    Space::from_entries(&raw.points, &entries)
}

/// Serializes a space to its JSON text form, each unordered pair once, in
/// point order.
pub fn space_to_json(space: &Space<Rational>) -> String {
    let mut distances = Vec::new();
    for i in 0..space.len() {
        for j in i + 1..space.len() {
            distances.push((
                space.point_id(i).to_string(),
                space.point_id(j).to_string(),
                space.dist(i, j).to_string(),
            ));
        }
    }
    let raw = RawSpace { points: space.points().to_vec(), distances };
    serde_json::to_string_pretty(&raw).expect("plain strings always serialize")
}
