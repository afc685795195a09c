//! JSON artifact files: a {"kind", "version", "payload"} envelope around the
//! serde form of each object.

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::group::{validate_filtration, Elem, Filtration, FiniteGroup};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Group,
    Filtration,
    Cubespace,
    Map,
    Action,
    Cocycle,
    Function,
    Relation,
    Translation,
    Certificate,
}

impl Kind {
    pub fn name(self) -> &'static str {
        match self {
            Kind::Group => "group",
            Kind::Filtration => "filtration",
            Kind::Cubespace => "cubespace",
            Kind::Map => "map",
            Kind::Action => "action",
            Kind::Cocycle => "cocycle",
            Kind::Function => "function",
            Kind::Relation => "relation",
            Kind::Translation => "translation",
            Kind::Certificate => "certificate",
        }
    }
}

/// Where a built artifact came from.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub construction: String,
    pub parameters: serde_json::Value,
    pub tool_version: String,
}

impl Provenance {
    pub fn new(construction: &str, parameters: serde_json::Value) -> Self {
        Provenance {
            construction: construction.to_string(),
            parameters,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Envelope {
    pub kind: Kind,
    pub version: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub provenance: Option<Provenance>,
    pub payload: serde_json::Value,
}

fn format_err(e: serde_json::Error) -> Error {
    Error::Format(e.to_string())
}

/// Pretty JSON with a trailing newline. Field order follows the types, so
/// equal values always give equal bytes.
pub fn encode<T: Serialize>(kind: Kind, value: &T, provenance: Option<Provenance>) -> Result<String> {
    let env = Envelope { kind, version: FORMAT_VERSION, provenance, payload: serde_json::to_value(value).map_err(format_err)? };
    let mut s = serde_json::to_string_pretty(&env).map_err(format_err)?;
    s.push('\n');
    Ok(s)
}

pub fn parse_envelope(text: &str) -> Result<Envelope> {
    let env: Envelope = serde_json::from_str(text).map_err(format_err)?;
    if env.version != FORMAT_VERSION {
        return Err(Error::Format(format!("unsupported format version {}", env.version)));
    }
    Ok(env)
}

pub fn decode_payload<T: DeserializeOwned>(env: &Envelope, kind: Kind) -> Result<T> {
    if env.kind != kind {
        return Err(Error::Format(format!("expected a {} file, found {}", kind.name(), env.kind.name())));
    }
    serde_json::from_value(env.payload.clone()).map_err(|e| Error::Format(format!("payload: {e}")))
}

pub fn decode<T: DeserializeOwned>(kind: Kind, text: &str) -> Result<T> {
    decode_payload(&parse_envelope(text)?, kind)
}

/// Filtration files carry the group and the chain G_0 ⊇ G_1 ⊇ … as
/// element lists, validated on load.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FiltrationFile {
    pub group: FiniteGroup,
    pub chain: Vec<Vec<Elem>>,
}

impl FiltrationFile {
    pub fn from_filtration(group: &FiniteGroup, f: &Filtration) -> Self {
        FiltrationFile { group: group.clone(), chain: f.levels().iter().map(|s| s.elements().to_vec()).collect() }
    }

    pub fn to_filtration(&self) -> Result<Filtration> {
        validate_filtration(&self.group, &self.chain)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructions::standard_nilspace;
    use crate::cubespace::FiniteCubespace;
    use crate::group::catalog::dihedral;
    use crate::group::{lower_central_series, FiniteAbelianGroup};

    #[test]
    fn cubespace_round_trip_is_bit_exact() {
        let x = standard_nilspace(&FiniteAbelianGroup::cyclic(3), 1, 2).unwrap();
        let text = encode(Kind::Cubespace, &x, Some(Provenance::new("ds", serde_json::json!({"degree": 1})))).unwrap();
        let back: FiniteCubespace = decode(Kind::Cubespace, &text).unwrap();
        assert_eq!(back, x);
        let env = parse_envelope(&text).unwrap();
        assert_eq!(encode(Kind::Cubespace, &back, env.provenance).unwrap(), text);
    }

    #[test]
    fn wrong_kind_and_version_are_rejected() {
        let g = dihedral(4);
        let text = encode(Kind::Group, &g, None).unwrap();
        assert!(matches!(decode::<FiniteCubespace>(Kind::Cubespace, &text), Err(Error::Format(_))));
        let bumped = text.replace("\"version\": 1", "\"version\": 7");
        assert!(matches!(parse_envelope(&bumped), Err(Error::Format(_))));
    }

    #[test]
    fn filtration_files_validate() {
        let g = dihedral(4);
        let f = lower_central_series(&g).unwrap();
        let file = FiltrationFile::from_filtration(&g, &f);
        let text = encode(Kind::Filtration, &file, None).unwrap();
        let back: FiltrationFile = decode(Kind::Filtration, &text).unwrap();
        assert_eq!(back.to_filtration().unwrap(), f);
        let mut broken = back.clone();
        broken.chain[1] = vec![0, 1];
        assert!(broken.to_filtration().is_err());
    }
}
