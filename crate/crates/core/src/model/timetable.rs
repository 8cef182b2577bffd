use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::ops::Range;
use std::str::FromStr;

use super::{Event, Instance, Minutes, ModelError};

/// Canonical event times of one period, `D(i, s)` and `A(i, s)` for every
/// scheduled event. Times are kept reduced into `[0, period)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Timetable {
    period: Minutes,
    times: BTreeMap<Event, Minutes>,
}

impl Timetable {
    pub fn new(period: Minutes) -> Self {
        assert!(period >= 1, "period must be positive");
        Self {
            period,
            times: BTreeMap::new(),
        }
    }

    /// Builds a timetable from times given in `layout` order.
    pub fn from_layout(layout: &EventLayout, times: &[Minutes], period: Minutes) -> Self {
        assert_eq!(layout.len(), times.len(), "layout/time length mismatch");
        let mut tt = Self::new(period);
        for (event, &t) in layout.events().iter().zip(times) {
            tt.insert(event.clone(), t);
        }
        tt
    }

    pub fn period(&self) -> Minutes {
        self.period
    }

    /// Inserts an event time, reducing it modulo the period.
    pub fn insert(&mut self, event: Event, time: Minutes) -> Option<Minutes> {
        self.times.insert(event, time.rem_euclid(self.period))
    }

    pub fn get(&self, event: &Event) -> Option<Minutes> {
        self.times.get(event).copied()
    }

    pub fn time(&self, event: &Event) -> Result<Minutes, ModelError> {
        self.get(event)
            .ok_or_else(|| ModelError::MissingEvent(event.clone()))
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Event, Minutes)> + '_ {
        self.times.iter().map(|(e, &t)| (e, t))
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Times in `layout` order; fails on the first event the timetable lacks.
    pub fn layout_times(&self, layout: &EventLayout) -> Result<Vec<Minutes>, ModelError> {
        layout.events().iter().map(|e| self.time(e)).collect()
    }
}

/// Every event of an instance in genotype order: per train, the departure at
/// the origin followed by alternating arrival/departure along the route and
/// ending with the arrival at the terminus. A train with `n` trips owns `2n`
/// consecutive positions, one per gene of its genotype section.
#[derive(Debug, Clone)]
pub struct EventLayout {
    events: Vec<Event>,
    index: HashMap<Event, usize>,
    sections: Vec<Range<usize>>,
}

impl EventLayout {
    pub fn new(instance: &Instance) -> Self {
        let mut events = Vec::with_capacity(2 * instance.trip_count());
        let mut sections = Vec::with_capacity(instance.trains.len());
        for train in &instance.trains {
            let start = events.len();
            let last = train.route.len().saturating_sub(1);
            for (k, trip) in train.route.iter().enumerate() {
                if k == 0 {
                    events.push(Event::departure(&train.id, &trip.from));
                }
                events.push(Event::arrival(&train.id, &trip.to));
                if k < last {
                    events.push(Event::departure(&train.id, &trip.to));
                }
            }
            sections.push(start..events.len());
        }
        let index = events
            .iter()
            .enumerate()
            .map(|(i, e)| (e.clone(), i))
            .collect();
        Self {
            events,
            index,
            sections,
        }
    }

    pub fn events(&self) -> &[Event] {
        &self.events
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    pub fn index_of(&self, event: &Event) -> Option<usize> {
        self.index.get(event).copied()
    }

    /// Position range of each train, in instance train order.
    pub fn sections(&self) -> &[Range<usize>] {
        &self.sections
    }
}

/// Moves every event by `delta` minutes around the period.
pub fn shift_timetable(tt: &Timetable, delta: Minutes) -> Timetable {
    let mut out = Timetable::new(tt.period);
    for (event, t) in tt.iter() {
        out.insert(event.clone(), t + delta);
    }
    out
}

/// One occurrence of a periodic event on an absolute time axis.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DatedEvent {
    pub event: Event,
    pub period_index: u32,
    /// Minutes since the start of the first period.
    pub absolute: Minutes,
}

impl DatedEvent {
    pub fn clock(&self, epoch: ClockTime) -> ClockTime {
        ClockTime(epoch.0 + self.absolute)
    }
}

/// Repeats the periodic pattern `k` times: each event occurs at
/// `time + p * T` for `p` in `0..k`. Sorted by absolute time, then by event.
pub fn expand_periods(tt: &Timetable, k: u32) -> Vec<DatedEvent> {
    let mut out: Vec<DatedEvent> = (0..k)
        .flat_map(|p| {
            tt.iter().map(move |(event, t)| DatedEvent {
                event: event.clone(),
                period_index: p,
                absolute: t + Minutes::from(p) * tt.period(),
            })
        })
        .collect();
    out.sort_by(|a, b| a.absolute.cmp(&b.absolute).then_with(|| a.event.cmp(&b.event)));
    out
}

/// Minutes since midnight, rendered as `H:MM` on a 24 hour clock.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct ClockTime(pub Minutes);

impl ClockTime {
    pub fn from_hm(hours: Minutes, minutes: Minutes) -> Self {
        Self(hours * 60 + minutes)
    }

    pub fn minutes(self) -> Minutes {
        self.0
    }
}

impl fmt::Display for ClockTime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let m = self.0.rem_euclid(24 * 60);
        write!(f, "{}:{:02}", m / 60, m % 60)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid clock time {0:?}, expected H:MM")]
pub struct ParseClockError(String);

impl FromStr for ClockTime {
    type Err = ParseClockError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || ParseClockError(s.to_owned());
        let (h, m) = s.trim().split_once(':').ok_or_else(err)?;
        let h: Minutes = h.parse().map_err(|_| err())?;
        let m: Minutes = m.parse().map_err(|_| err())?;
        if !(0..24).contains(&h) || !(0..60).contains(&m) {
            return Err(err());
        }
        Ok(Self::from_hm(h, m))
    }
}
