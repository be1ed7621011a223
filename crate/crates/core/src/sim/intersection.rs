//! Static description of a single signalized intersection.
//!
//! Lanes are indexed approach-major: lane `i` belongs to approach
//! `approaches[i / lanes_per_approach]` and serves the turns in
//! `lane_turns[i % lanes_per_approach]`.

use serde::{Deserialize, Serialize};

use super::SimError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Approach {
    North,
    East,
    South,
    West,
}

impl Approach {
    pub fn opposite(self) -> Approach {
        match self {
            Approach::North => Approach::South,
            Approach::South => Approach::North,
            Approach::East => Approach::West,
            Approach::West => Approach::East,
        }
    }

    pub fn short(self) -> &'static str {
        match self {
            Approach::North => "N",
            Approach::East => "E",
            Approach::South => "S",
            Approach::West => "W",
        }
    }

    pub fn is_east_west(self) -> bool {
        matches!(self, Approach::East | Approach::West)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Turn {
    Left,
    Through,
    Right,
}

/// One (approach, turn) flow released by a phase.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Movement {
    pub approach: Approach,
    pub turn: Turn,
    /// Permissive movements must yield to opposing through/right traffic.
    #[serde(default)]
    pub permissive: bool,
}

impl Movement {
    pub const fn protected(approach: Approach, turn: Turn) -> Self {
        Movement { approach, turn, permissive: false }
    }

    pub const fn yielding(approach: Approach, turn: Turn) -> Self {
        Movement { approach, turn, permissive: true }
    }
}

/// Speed limit from the reference setup: 40 km/h.
pub const DEFAULT_SPEED_LIMIT: f64 = 40.0 / 3.6;
pub const DEFAULT_SENSOR_RANGE: f64 = 40.0;
pub const DEFAULT_LANE_LENGTH: f64 = 100.0;
pub const DEFAULT_BOX_LENGTH: f64 = 15.0;
pub const DEFAULT_MIN_GAP: f64 = 7.0;
/// Opposing vehicles closer than this to the stop line block a permissive left.
pub const DEFAULT_YIELD_DISTANCE: f64 = 20.0;

fn default_lane_length() -> f64 {
    DEFAULT_LANE_LENGTH
}
fn default_box_length() -> f64 {
    DEFAULT_BOX_LENGTH
}
fn default_min_gap() -> f64 {
    DEFAULT_MIN_GAP
}
fn default_yield_distance() -> f64 {
    DEFAULT_YIELD_DISTANCE
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntersectionSpec {
    pub approaches: Vec<Approach>,
    pub lanes_per_approach: usize,
    /// Turns served by each lane position, shared by every approach.
    pub lane_turns: Vec<Vec<Turn>>,
    /// One entry per action.
    pub movement_groups: Vec<Vec<Movement>>,
    /// Sensor range `d` in meters upstream of the stop line.
    pub sensor_range: f64,
    /// Speed limit `v` in meters per second.
    pub speed_limit: f64,
    #[serde(default = "default_lane_length")]
    pub lane_length: f64,
    #[serde(default = "default_box_length")]
    pub box_length: f64,
    #[serde(default = "default_min_gap")]
    pub min_gap: f64,
    #[serde(default = "default_yield_distance")]
    pub yield_distance: f64,
}

const ALL_APPROACHES: [Approach; 4] = [Approach::North, Approach::East, Approach::South, Approach::West];

impl IntersectionSpec {
    fn with_layout(lane_turns: Vec<Vec<Turn>>, movement_groups: Vec<Vec<Movement>>) -> Self {
        IntersectionSpec {
            approaches: ALL_APPROACHES.to_vec(),
            lanes_per_approach: lane_turns.len(),
            lane_turns,
            movement_groups,
            sensor_range: DEFAULT_SENSOR_RANGE,
            speed_limit: DEFAULT_SPEED_LIMIT,
            lane_length: DEFAULT_LANE_LENGTH,
            box_length: DEFAULT_BOX_LENGTH,
            min_gap: DEFAULT_MIN_GAP,
            yield_distance: DEFAULT_YIELD_DISTANCE,
        }
    }

    /// Two phases, no left turns: one lane per approach carrying through and right.
    pub fn case1() -> Self {
        use Approach::*;
        use Turn::*;
        let group = |a: Approach, b: Approach| {
            vec![
                Movement::protected(a, Through),
                Movement::protected(a, Right),
                Movement::protected(b, Through),
                Movement::protected(b, Right),
            ]
        };
        Self::with_layout(vec![vec![Through, Right]], vec![group(North, South), group(East, West)])
    }

    /// Two phases with permissive lefts that yield to opposing traffic.
    pub fn case2() -> Self {
        use Approach::*;
        use Turn::*;
        let group = |a: Approach, b: Approach| {
            vec![
                Movement::yielding(a, Left),
                Movement::protected(a, Through),
                Movement::protected(a, Right),
                Movement::yielding(b, Left),
                Movement::protected(b, Through),
                Movement::protected(b, Right),
            ]
        };
        Self::with_layout(
            vec![vec![Left, Through], vec![Through, Right]],
            vec![group(North, South), group(East, West)],
        )
    }

    /// Four phases: protected lefts on a dedicated lane per approach.
    pub fn case3() -> Self {
        use Approach::*;
        use Turn::*;
        let straight = |a: Approach, b: Approach| {
            vec![
                Movement::protected(a, Through),
                Movement::protected(a, Right),
                Movement::protected(b, Through),
                Movement::protected(b, Right),
            ]
        };
        let lefts = |a: Approach, b: Approach| vec![Movement::protected(a, Left), Movement::protected(b, Left)];
        Self::with_layout(
            vec![vec![Left], vec![Through, Right]],
            vec![straight(North, South), lefts(North, South), straight(East, West), lefts(East, West)],
        )
    }

    pub fn action_count(&self) -> usize {
        self.movement_groups.len()
    }

    pub fn lane_count(&self) -> usize {
        self.approaches.len() * self.lanes_per_approach
    }

    pub fn lane_approach(&self, lane: usize) -> Approach {
        self.approaches[lane / self.lanes_per_approach]
    }

    pub fn turns_of_lane(&self, lane: usize) -> &[Turn] {
        &self.lane_turns[lane % self.lanes_per_approach]
    }

    /// Bit `g` is set when movement group `g` releases (approach, turn).
    pub fn group_mask(&self, approach: Approach, turn: Turn) -> u64 {
        self.movement_groups
            .iter()
            .enumerate()
            .filter(|(_, group)| group.iter().any(|m| m.approach == approach && m.turn == turn))
            .fold(0, |mask, (g, _)| mask | (1u64 << g))
    }

    pub fn validate(&self) -> Result<(), SimError> {
        let invalid = |msg: String| Err(SimError::InvalidIntersection(msg));
        let actions = self.action_count();
        if actions < 2 {
            return invalid(format!("need at least 2 movement groups, got {actions}"));
        }
        if actions > 64 {
            return invalid(format!("at most 64 movement groups are supported, got {actions}"));
        }
        if self.approaches.is_empty() {
            return invalid("no approaches".into());
        }
        for (i, a) in self.approaches.iter().enumerate() {
            if self.approaches[..i].contains(a) {
                return invalid(format!("approach {a:?} listed twice"));
            }
        }
        if self.lanes_per_approach == 0 {
            return invalid("lanes_per_approach must be positive".into());
        }
        if self.lane_turns.len() != self.lanes_per_approach {
            return invalid(format!(
                "lane_turns has {} entries but lanes_per_approach is {}",
                self.lane_turns.len(),
                self.lanes_per_approach
            ));
        }
        if self.lane_turns.iter().any(|t| t.is_empty()) {
            return invalid("every lane must serve at least one turn".into());
        }
        if !(self.sensor_range > 0.0) {
            return invalid(format!("sensor_range must be > 0, got {}", self.sensor_range));
        }
        if !(self.speed_limit > 0.0) {
            return invalid(format!("speed_limit must be > 0, got {}", self.speed_limit));
        }
        if !(self.min_gap > 0.0) || !(self.lane_length > self.min_gap) {
            return invalid(format!(
                "lane_length ({}) must exceed min_gap ({}) > 0",
                self.lane_length, self.min_gap
            ));
        }
        if !(self.box_length >= 0.0) || !(self.yield_distance >= 0.0) {
            return invalid("box_length and yield_distance must be non-negative".into());
        }
        for lane in 0..self.lane_count() {
            let approach = self.lane_approach(lane);
            for &turn in self.turns_of_lane(lane) {
                if self.group_mask(approach, turn) == 0 {
                    return invalid(format!(
                        "lane {lane} ({approach:?} {turn:?}) is not released by any movement group"
                    ));
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn archetypes_are_valid() {
        for (spec, actions, lanes) in [
            (IntersectionSpec::case1(), 2, 4),
            (IntersectionSpec::case2(), 2, 8),
            (IntersectionSpec::case3(), 4, 8),
        ] {
            spec.validate().unwrap();
            assert_eq!(spec.action_count(), actions);
            assert_eq!(spec.lane_count(), lanes);
        }
    }

    #[test]
    fn uncovered_lane_is_rejected() {
        let mut spec = IntersectionSpec::case1();
        spec.movement_groups[1].retain(|m| m.approach != Approach::West);
        assert!(matches!(spec.validate(), Err(SimError::InvalidIntersection(_))));
    }

    #[test]
    fn single_group_is_rejected() {
        let mut spec = IntersectionSpec::case1();
        spec.movement_groups.truncate(1);
        assert!(spec.validate().is_err());
    }

    #[test]
    fn group_masks_case3() {
        let spec = IntersectionSpec::case3();
        assert_eq!(spec.group_mask(Approach::North, Turn::Left), 0b0010);
        assert_eq!(spec.group_mask(Approach::West, Turn::Through), 0b0100);
    }
}
