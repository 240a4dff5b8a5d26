//! JSON encodings of tables keyed by state.

use serde_json::{Map, Value};

use crate::engine::PositionalProfile;
use crate::error::{Error, Result};
use crate::game::State;
use crate::space::Indexer;

/// Map key for a state: `v1,...,vN,mover` or `terminal`.
pub fn state_key(s: &State) -> String {
    s.to_string()
}

/// Positional profile as a map from state key to chosen vertex.
pub fn profile_to_json(profile: &PositionalProfile) -> Value {
    let ix = profile.indexer();
    let map: Map<String, Value> = profile
        .entries()
        .map(|(i, v)| (state_key(&ix.state(i)), Value::from(v)))
        .collect();
    Value::Object(map)
}

/// Reads a profile written by [`profile_to_json`]. Entries need not cover
/// every state; missing ones surface as illegal actions at play time.
pub fn profile_from_json(indexer: Indexer, value: &Value) -> Result<PositionalProfile> {
    let bad = |message: String| Error::InvalidSpec {
        field: "profile",
        message,
    };
    let map = value
        .as_object()
        .ok_or_else(|| bad("expected an object mapping states to vertices".into()))?;
    let mut out = PositionalProfile::empty(indexer);
    for (k, v) in map {
        let s: State = k.parse()?;
        let i = indexer
            .index(&s)
            .filter(|&i| i != indexer.terminal())
            .ok_or_else(|| bad(format!("state {k} does not belong to this game")))?;
        let a = v
            .as_u64()
            .filter(|&a| a >= 1 && a as usize <= indexer.vertices())
            .ok_or_else(|| bad(format!("action for {k} must be a vertex, got {v}")))?;
        out.set(i, Some(a as usize));
    }
    Ok(out)
}
