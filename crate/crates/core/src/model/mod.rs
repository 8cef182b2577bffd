//! Domain types for periodic timetabling instances and the evaluator for the
//! five periodic constraint families (running, dwell, headway, single track
//! and connection).
//!
//! All times are integer minutes. Event times of a [`Timetable`] are canonical,
//! i.e. they live in `[0, T)` where `T` is the period of the instance.

mod constraints;
mod timetable;
mod validate;

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use constraints::{
    derive_bounds, eval_constraint, evaluate, periodic_check, retain_effective, CompiledConstraint,
    CompiledConstraints, ConstraintKind, EvaluationReport, PeriodicConstraint, Verdict,
    Violation, ViolationCounts,
};
pub use timetable::{expand_periods, shift_timetable, ClockTime, DatedEvent, EventLayout, Timetable};
pub use validate::ValidationError;

/// Integer minutes. Used for both durations and times of day within a period.
pub type Minutes = i64;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct StationId(pub String);

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TrainId(pub String);

macro_rules! string_id {
    ($t:ty) => {
        impl fmt::Display for $t {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&self.0)
            }
        }

        impl From<&str> for $t {
            fn from(s: &str) -> Self {
                Self(s.to_owned())
            }
        }

        impl From<String> for $t {
            fn from(s: String) -> Self {
                Self(s)
            }
        }

        impl $t {
            pub fn as_str(&self) -> &str {
                &self.0
            }
        }
    };
}

string_id!(StationId);
string_id!(TrainId);

/// Inclusive integer window `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Window {
    pub lo: Minutes,
    pub hi: Minutes,
}

impl Window {
    pub const fn new(lo: Minutes, hi: Minutes) -> Self {
        Self { lo, hi }
    }

    pub const fn fixed(value: Minutes) -> Self {
        Self { lo: value, hi: value }
    }

    pub fn contains(&self, value: Minutes) -> bool {
        self.lo <= value && value <= self.hi
    }

    /// Number of integer values in the window (0 if inverted).
    pub fn len(&self) -> u64 {
        if self.hi < self.lo {
            0
        } else {
            (self.hi - self.lo) as u64 + 1
        }
    }

    pub fn is_empty(&self) -> bool {
        self.hi < self.lo
    }
}

/// A track section between two stations.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Segment {
    pub from: StationId,
    pub to: StationId,
    pub single_track: bool,
}

impl Segment {
    pub fn connects(&self, a: &StationId, b: &StationId) -> bool {
        (&self.from == a && &self.to == b) || (&self.from == b && &self.to == a)
    }
}

/// One leg of a train's route, with the dwell window at its arrival station
/// when the train continues from there.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trip {
    pub from: StationId,
    pub to: StationId,
    pub running: Window,
    /// `None` on the final trip of a route.
    pub dwell_after: Option<Window>,
}

impl Trip {
    pub fn new(from: &str, to: &str, running: Window, dwell_after: Option<Window>) -> Self {
        Self {
            from: from.into(),
            to: to.into(),
            running,
            dwell_after,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Train {
    pub id: TrainId,
    pub basic_headway: Minutes,
    pub route: Vec<Trip>,
}

impl Train {
    /// Stations visited in route order: the origin followed by every trip's destination.
    pub fn stations(&self) -> impl Iterator<Item = &StationId> + '_ {
        self.route
            .first()
            .map(|t| &t.from)
            .into_iter()
            .chain(self.route.iter().map(|t| &t.to))
    }

    pub fn origin(&self) -> Option<&StationId> {
        self.route.first().map(|t| &t.from)
    }

    pub fn trip_between(&self, from: &StationId, to: &StationId) -> Option<&Trip> {
        self.route.iter().find(|t| &t.from == from && &t.to == to)
    }

    /// True if the train arrives at `station` (any station but its origin).
    pub fn arrives_at(&self, station: &StationId) -> bool {
        self.route.iter().any(|t| &t.to == station)
    }

    /// True if the train departs from `station` (any station but its terminus).
    pub fn departs_from(&self, station: &StationId) -> bool {
        self.route.iter().any(|t| &t.from == station)
    }
}

/// A transfer from `feeder_train` arriving at `station` to `onward_train`
/// departing from it, within `window` minutes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConnectionSpec {
    pub feeder_train: TrainId,
    pub onward_train: TrainId,
    pub station: StationId,
    pub window: Window,
}

/// Penalty weight per violated constraint of each kind.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct WeightConfig {
    pub running: u64,
    pub dwell: u64,
    pub headway: u64,
    pub single_track: u64,
    pub connection: u64,
}

impl Default for WeightConfig {
    fn default() -> Self {
        Self {
            running: 1000,
            dwell: 1000,
            headway: 100,
            single_track: 100,
            connection: 1,
        }
    }
}

impl WeightConfig {
    pub fn get(&self, kind: ConstraintKind) -> u64 {
        match kind {
            ConstraintKind::Running => self.running,
            ConstraintKind::Dwell => self.dwell,
            ConstraintKind::Headway => self.headway,
            ConstraintKind::SingleTrack => self.single_track,
            ConstraintKind::Connection => self.connection,
        }
    }

    pub fn set(&mut self, kind: ConstraintKind, weight: u64) {
        match kind {
            ConstraintKind::Running => self.running = weight,
            ConstraintKind::Dwell => self.dwell = weight,
            ConstraintKind::Headway => self.headway = weight,
            ConstraintKind::SingleTrack => self.single_track = weight,
            ConstraintKind::Connection => self.connection = weight,
        }
    }

    pub fn as_array(&self) -> [u64; 5] {
        ConstraintKind::ALL.map(|k| self.get(k))
    }
}

/// A periodic timetabling problem.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    pub period: Minutes,
    pub stations: Vec<StationId>,
    pub segments: Vec<Segment>,
    pub trains: Vec<Train>,
    pub connections: Vec<ConnectionSpec>,
    pub weights: WeightConfig,
    /// Free-form provenance note (e.g. marks synthetic instances).
    pub note: Option<String>,
}

impl Instance {
    pub fn train(&self, id: &TrainId) -> Option<&Train> {
        self.trains.iter().find(|t| &t.id == id)
    }

    pub fn segment_between(&self, a: &StationId, b: &StationId) -> Option<&Segment> {
        self.segments.iter().find(|s| s.connects(a, b))
    }

    pub fn is_single_track(&self, a: &StationId, b: &StationId) -> bool {
        self.segment_between(a, b).is_some_and(|s| s.single_track)
    }

    pub fn trip_count(&self) -> usize {
        self.trains.iter().map(|t| t.route.len()).sum()
    }

    /// Checks every structural invariant of the instance.
    pub fn validate(&self) -> Result<(), ValidationError> {
        validate::validate(self)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EventKind {
    Arrival,
    Departure,
}

/// A departure or arrival of a train at a station within one period.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Event {
    pub kind: EventKind,
    pub train: TrainId,
    pub station: StationId,
}

impl Event {
    pub fn departure(train: &TrainId, station: &StationId) -> Self {
        Self {
            kind: EventKind::Departure,
            train: train.clone(),
            station: station.clone(),
        }
    }

    pub fn arrival(train: &TrainId, station: &StationId) -> Self {
        Self {
            kind: EventKind::Arrival,
            train: train.clone(),
            station: station.clone(),
        }
    }
}

impl fmt::Display for Event {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = match self.kind {
            EventKind::Arrival => "arr",
            EventKind::Departure => "dep",
        };
        write!(f, "{}({}, {})", tag, self.train, self.station)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("malformed instance: {0}")]
    MalformedInstance(String),
    #[error("{kind} constraint {earlier} -> {later} has lo {lo} > hi {hi}")]
    BoundInversion {
        kind: ConstraintKind,
        earlier: Event,
        later: Event,
        lo: Minutes,
        hi: Minutes,
    },
    #[error("event {0} is missing from the timetable")]
    MissingEvent(Event),
    #[error(transparent)]
    Validation(#[from] ValidationError),
}
