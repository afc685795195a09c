//! Pass/fail verdicts with replayable failure witnesses.

use serde::{Deserialize, Serialize};

use crate::cube::{Configuration, Corner, CubeMorphism, Face, PointId};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict", content = "witness", rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail(Witness),
}

impl Verdict {
    pub fn passed(&self) -> bool {
        matches!(self, Verdict::Pass)
    }

    pub fn witness(&self) -> Option<&Witness> {
        match self {
            Verdict::Pass => None,
            Verdict::Fail(w) => Some(w),
        }
    }

    pub fn from_option(w: Option<Witness>) -> Verdict {
        w.map_or(Verdict::Pass, Verdict::Fail)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Witness {
    /// `cube` is a cube but `cube ∘ morphism` is not.
    NotInvariant { cube: Configuration, morphism: CubeMorphism },
    /// A configuration that should be a cube but is not.
    MissingConfiguration { configuration: Configuration },
    /// A corner with no completion.
    UncompletableCorner { corner: Corner },
    /// Two distinct cubes with the same corner.
    NotUnique { first: Configuration, second: Configuration },
    /// [c1, c2] and [c2, c3] are cubes but [c1, c3] is not.
    Glueing { first: Configuration, second: Configuration, third: Configuration },
    /// A cube whose image under a map is not a cube.
    CubeNotPreserved { cube: Configuration },
    /// A corner of the source whose image completes in the target to
    /// `target`, with no completion of the corner mapping onto it.
    FibrationCorner { corner: Corner, target: Configuration },
    /// A cube `cube` with [f]_face.cube not a cube.
    NotTranslation { cube: Configuration, face: Face },
    /// Cocycle additivity fails for ([c1,c2], [c2,c3], [c1,c3]) along `axis`.
    Cocycle { axis: usize, first: Configuration, second: Configuration, third: Configuration },
    /// A point of the target outside the image of a map.
    NotSurjective { point: PointId },
    /// Two configurations violating a relation between them.
    ConfigurationPair { first: Configuration, second: Configuration, reason: String },
    /// Two points violating a pointwise property.
    Points { first: PointId, second: PointId, reason: String },
    /// A free-form failure that has no structured witness.
    Message { reason: String },
}
