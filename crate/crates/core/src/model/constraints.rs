use std::fmt;
use std::ops::Index;

use log::warn;

use super::{Event, EventLayout, Instance, Minutes, ModelError, Timetable, WeightConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ConstraintKind {
    Running,
    Dwell,
    Headway,
    SingleTrack,
    Connection,
}

impl ConstraintKind {
    pub const ALL: [ConstraintKind; 5] = [
        ConstraintKind::Running,
        ConstraintKind::Dwell,
        ConstraintKind::Headway,
        ConstraintKind::SingleTrack,
        ConstraintKind::Connection,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    /// Running, dwell, headway and single-track constraints are hard;
    /// connections are soft.
    pub fn is_hard(self) -> bool {
        !matches!(self, ConstraintKind::Connection)
    }

    pub fn name(self) -> &'static str {
        match self {
            ConstraintKind::Running => "running",
            ConstraintKind::Dwell => "dwell",
            ConstraintKind::Headway => "headway",
            ConstraintKind::SingleTrack => "single-track",
            ConstraintKind::Connection => "connection",
        }
    }
}

impl fmt::Display for ConstraintKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// `lo <= time(later) - time(earlier) + q * T <= hi` for some integer `q`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PeriodicConstraint {
    pub kind: ConstraintKind,
    pub earlier: Event,
    pub later: Event,
    pub lo: Minutes,
    pub hi: Minutes,
}

impl fmt::Display for PeriodicConstraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}: {} - {} in [{}, {}]",
            self.kind, self.later, self.earlier, self.lo, self.hi
        )
    }
}

/// Outcome of checking one periodic constraint.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Verdict {
    pub satisfied: bool,
    /// Number of periods added to the raw difference; 1 when the pair wraps
    /// across the period boundary. Always 0 when unsatisfied.
    pub q: i64,
    /// The difference `y - x + q * T` when satisfied, otherwise the raw
    /// difference reduced into `[0, T)`.
    pub diff: Minutes,
}

/// Periodic window test on the modular difference: with `d = (y - x) mod T`
/// the constraint holds iff `(d - lo) mod T <= hi - lo`.
#[inline]
pub fn periodic_check(lo: Minutes, hi: Minutes, x: Minutes, y: Minutes, period: Minutes) -> Verdict {
    let raw = y - x;
    let d = raw.rem_euclid(period);
    let slack = (d - lo).rem_euclid(period);
    if slack <= hi - lo {
        let diff = lo + slack;
        Verdict {
            satisfied: true,
            q: (diff - raw) / period,
            diff,
        }
    } else {
        Verdict {
            satisfied: false,
            q: 0,
            diff: d,
        }
    }
}

pub fn eval_constraint(c: &PeriodicConstraint, tt: &Timetable) -> Result<Verdict, ModelError> {
    let x = tt.time(&c.earlier)?;
    let y = tt.time(&c.later)?;
    Ok(periodic_check(c.lo, c.hi, x, y, tt.period()))
}

/// Violation count per constraint kind.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct ViolationCounts(pub [usize; 5]);

impl ViolationCounts {
    pub fn get(&self, kind: ConstraintKind) -> usize {
        self.0[kind.index()]
    }

    pub fn add(&mut self, kind: ConstraintKind) {
        self.0[kind.index()] += 1;
    }

    pub fn hard(&self) -> usize {
        ConstraintKind::ALL
            .iter()
            .filter(|k| k.is_hard())
            .map(|&k| self.get(k))
            .sum()
    }

    pub fn soft(&self) -> usize {
        self.get(ConstraintKind::Connection)
    }

    pub fn total(&self) -> usize {
        self.0.iter().sum()
    }

    /// Dot product with the weight vector.
    pub fn weighted(&self, weights: &WeightConfig) -> u64 {
        self.0
            .iter()
            .zip(weights.as_array())
            .map(|(&v, w)| v as u64 * w)
            .sum()
    }
}

impl Index<ConstraintKind> for ViolationCounts {
    type Output = usize;

    fn index(&self, kind: ConstraintKind) -> &usize {
        &self.0[kind.index()]
    }
}

impl fmt::Display for ViolationCounts {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (n, k) in ConstraintKind::ALL.iter().enumerate() {
            if n > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{}={}", k, self.get(*k))?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub constraint: PeriodicConstraint,
    /// Measured difference reduced into `[0, T)`.
    pub diff: Minutes,
    pub q: i64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EvaluationReport {
    pub violations_by_type: ViolationCounts,
    pub weighted_fitness: u64,
    pub violated: Vec<Violation>,
}

impl EvaluationReport {
    /// No hard constraint is violated.
    pub fn is_feasible(&self) -> bool {
        self.violations_by_type.hard() == 0
    }

    /// Feasible and every connection is met.
    pub fn is_fully_feasible(&self) -> bool {
        self.violations_by_type.total() == 0
    }
}

impl fmt::Display for EvaluationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "violations: {}", self.violations_by_type)?;
        writeln!(f, "weighted fitness: {}", self.weighted_fitness)?;
        for v in &self.violated {
            writeln!(f, "  violated {} (measured {})", v.constraint, v.diff)?;
        }
        Ok(())
    }
}

/// Evaluates every constraint against the timetable. Each violated
/// constraint adds exactly one to the count of its kind.
pub fn evaluate(
    tt: &Timetable,
    constraints: &[PeriodicConstraint],
    weights: &WeightConfig,
) -> Result<EvaluationReport, ModelError> {
    let mut counts = ViolationCounts::default();
    let mut violated = Vec::new();
    for c in constraints {
        let v = eval_constraint(c, tt)?;
        if !v.satisfied {
            counts.add(c.kind);
            violated.push(Violation {
                constraint: c.clone(),
                diff: v.diff,
                q: v.q,
            });
        }
    }
    Ok(EvaluationReport {
        weighted_fitness: counts.weighted(weights),
        violations_by_type: counts,
        violated,
    })
}

/// Drops constraints whose window spans a whole period (`hi - lo >= T`);
/// those hold for every timetable.
pub fn retain_effective(constraints: &mut Vec<PeriodicConstraint>, period: Minutes) {
    constraints.retain(|c| {
        let keep = c.hi - c.lo < period;
        if !keep {
            warn!("dropping vacuous constraint {c} (window spans the period {period})");
        }
        keep
    });
}

/// Builds the full periodic constraint set of an instance.
///
/// Ordering is stable: by kind (running, dwell, headway, single track,
/// connection), then by train in instance order, then by route position.
///
/// Headway constraints are emitted for every ordered pair of distinct trains
/// that both run the same directed trip `s -> t`, on `D(i,s) - D(j,s)` with
/// `lo = |Lr(i) - Lr(j)| + h(i)` and `hi = T - h(j)`. Single-track
/// constraints are emitted for every ordered pair running a single-track
/// segment in opposite directions (`i: s -> t`, `j: t -> s`) on
/// `D(i,s) - A(j,s)` with `lo = 2 * min(Lr(i), Lr(j)) + h(i)` and
/// `hi = T - h(j)`.
pub fn derive_bounds(instance: &Instance) -> Result<Vec<PeriodicConstraint>, ModelError> {
    check_references(instance)?;
    let period = instance.period;
    let mut out = Vec::new();

    for train in &instance.trains {
        for trip in &train.route {
            out.push(PeriodicConstraint {
                kind: ConstraintKind::Running,
                earlier: Event::departure(&train.id, &trip.from),
                later: Event::arrival(&train.id, &trip.to),
                lo: trip.running.lo,
                hi: trip.running.hi,
            });
        }
    }

    for train in &instance.trains {
        for trip in &train.route {
            if let Some(dwell) = trip.dwell_after {
                out.push(PeriodicConstraint {
                    kind: ConstraintKind::Dwell,
                    earlier: Event::arrival(&train.id, &trip.to),
                    later: Event::departure(&train.id, &trip.to),
                    lo: dwell.lo,
                    hi: dwell.hi,
                });
            }
        }
    }

    for i in &instance.trains {
        for j in instance.trains.iter().filter(|j| j.id != i.id) {
            for trip_i in &i.route {
                let Some(trip_j) = j.trip_between(&trip_i.from, &trip_i.to) else {
                    continue;
                };
                out.push(PeriodicConstraint {
                    kind: ConstraintKind::Headway,
                    earlier: Event::departure(&j.id, &trip_i.from),
                    later: Event::departure(&i.id, &trip_i.from),
                    lo: (trip_i.running.lo - trip_j.running.lo).abs() + i.basic_headway,
                    hi: period - j.basic_headway,
                });
            }
        }
    }

    for i in &instance.trains {
        for j in instance.trains.iter().filter(|j| j.id != i.id) {
            for trip_i in &i.route {
                if !instance.is_single_track(&trip_i.from, &trip_i.to) {
                    continue;
                }
                let Some(trip_j) = j.trip_between(&trip_i.to, &trip_i.from) else {
                    continue;
                };
                let min_run = trip_i.running.lo.min(trip_j.running.lo);
                out.push(PeriodicConstraint {
                    kind: ConstraintKind::SingleTrack,
                    earlier: Event::arrival(&j.id, &trip_i.from),
                    later: Event::departure(&i.id, &trip_i.from),
                    lo: 2 * min_run + i.basic_headway,
                    hi: period - j.basic_headway,
                });
            }
        }
    }

    for c in &instance.connections {
        out.push(PeriodicConstraint {
            kind: ConstraintKind::Connection,
            earlier: Event::arrival(&c.feeder_train, &c.station),
            later: Event::departure(&c.onward_train, &c.station),
            lo: c.window.lo,
            hi: c.window.hi,
        });
    }

    if let Some(c) = out.iter().find(|c| c.lo > c.hi) {
        return Err(ModelError::BoundInversion {
            kind: c.kind,
            earlier: c.earlier.clone(),
            later: c.later.clone(),
            lo: c.lo,
            hi: c.hi,
        });
    }
    retain_effective(&mut out, period);
    Ok(out)
}

fn check_references(instance: &Instance) -> Result<(), ModelError> {
    let malformed = |msg: String| Err(ModelError::MalformedInstance(msg));
    for train in &instance.trains {
        for s in train.stations() {
            if !instance.stations.contains(s) {
                return malformed(format!("train {} visits unknown station {}", train.id, s));
            }
        }
    }
    for c in &instance.connections {
        match instance.train(&c.feeder_train) {
            Some(t) if t.arrives_at(&c.station) => {}
            Some(_) => {
                return malformed(format!(
                    "connection feeder {} never arrives at {}",
                    c.feeder_train, c.station
                ))
            }
            None => return malformed(format!("connection references missing train {}", c.feeder_train)),
        }
        match instance.train(&c.onward_train) {
            Some(t) if t.departs_from(&c.station) => {}
            Some(_) => {
                return malformed(format!(
                    "connection onward train {} never departs from {}",
                    c.onward_train, c.station
                ))
            }
            None => return malformed(format!("connection references missing train {}", c.onward_train)),
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CompiledConstraint {
    pub kind: ConstraintKind,
    pub earlier: usize,
    pub later: usize,
    pub lo: Minutes,
    pub hi: Minutes,
}

/// Constraints resolved to positions of an [`EventLayout`], for evaluating
/// flat time vectors without map lookups.
#[derive(Debug, Clone)]
pub struct CompiledConstraints {
    period: Minutes,
    items: Vec<CompiledConstraint>,
}

impl CompiledConstraints {
    pub fn compile(
        constraints: &[PeriodicConstraint],
        layout: &EventLayout,
        period: Minutes,
    ) -> Result<Self, ModelError> {
        let pos = |e: &Event| layout.index_of(e).ok_or_else(|| ModelError::MissingEvent(e.clone()));
        let items = constraints
            .iter()
            .map(|c| {
                Ok(CompiledConstraint {
                    kind: c.kind,
                    earlier: pos(&c.earlier)?,
                    later: pos(&c.later)?,
                    lo: c.lo,
                    hi: c.hi,
                })
            })
            .collect::<Result<_, ModelError>>()?;
        Ok(Self { period, items })
    }

    /// Keeps only the constraints whose kind passes `keep`.
    pub fn filtered(&self, keep: impl Fn(ConstraintKind) -> bool) -> Self {
        Self {
            period: self.period,
            items: self.items.iter().filter(|c| keep(c.kind)).copied().collect(),
        }
    }

    pub fn items(&self) -> &[CompiledConstraint] {
        &self.items
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn violations(&self, times: &[Minutes]) -> ViolationCounts {
        let mut counts = ViolationCounts::default();
        for c in &self.items {
            if !periodic_check(c.lo, c.hi, times[c.earlier], times[c.later], self.period).satisfied {
                counts.add(c.kind);
            }
        }
        counts
    }

    pub fn fitness(&self, times: &[Minutes], weights: &WeightConfig) -> u64 {
        self.violations(times).weighted(weights)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{StationId, TrainId, Train, Trip, Window, WeightConfig};

    fn ev(t: &str, s: &str) -> Event {
        Event::departure(&TrainId::from(t), &StationId::from(s))
    }

    fn check(lo: Minutes, hi: Minutes, x: Minutes, y: Minutes) -> Verdict {
        periodic_check(lo, hi, x, y, 60)
    }

    #[test]
    fn difference_exactly_at_lower_bound() {
        assert_eq!(
            check(3, 57, 0, 3),
            Verdict { satisfied: true, q: 0, diff: 3 }
        );
    }

    #[test]
    fn wrap_across_period_boundary() {
        assert_eq!(
            check(5, 15, 55, 5),
            Verdict { satisfied: true, q: 1, diff: 10 }
        );
    }

    #[test]
    fn outside_window() {
        let v = check(5, 15, 0, 20);
        assert!(!v.satisfied);
        assert_eq!((v.q, v.diff), (0, 20));
    }

    #[test]
    fn eval_reports_missing_event() {
        let c = PeriodicConstraint {
            kind: ConstraintKind::Connection,
            earlier: ev("a", "x"),
            later: ev("b", "x"),
            lo: 0,
            hi: 5,
        };
        let mut tt = Timetable::new(60);
        tt.insert(ev("a", "x"), 0);
        assert_eq!(
            eval_constraint(&c, &tt),
            Err(ModelError::MissingEvent(ev("b", "x")))
        );
    }

    #[test]
    fn fitness_is_weighted_sum() {
        let mut counts = ViolationCounts::default();
        counts.add(ConstraintKind::Headway);
        counts.add(ConstraintKind::Headway);
        for _ in 0..3 {
            counts.add(ConstraintKind::Connection);
        }
        assert_eq!(counts.weighted(&WeightConfig::default()), 203);
        assert_eq!(counts.hard(), 2);
        assert_eq!(counts.soft(), 3);
    }

    #[test]
    fn vacuous_constraints_are_dropped() {
        let mk = |lo, hi| PeriodicConstraint {
            kind: ConstraintKind::Headway,
            earlier: ev("a", "x"),
            later: ev("b", "x"),
            lo,
            hi,
        };
        let mut cs = vec![mk(0, 60), mk(3, 57), mk(-2, 58)];
        retain_effective(&mut cs, 60);
        assert_eq!(cs, vec![mk(3, 57)]);
    }

    fn two_train_corridor(h_i: Minutes, h_j: Minutes) -> Instance {
        let train = |id: &str, lr: Minutes, h: Minutes| Train {
            id: id.into(),
            basic_headway: h,
            route: vec![Trip::new("s", "t", Window::new(lr, lr + 2), None)],
        };
        Instance {
            period: 60,
            stations: vec!["s".into(), "t".into()],
            segments: vec![],
            trains: vec![train("i", 10, h_i), train("j", 12, h_j)],
            connections: vec![],
            weights: WeightConfig::default(),
            note: None,
        }
    }

    #[test]
    fn headway_bounds_follow_running_difference() {
        let cs = derive_bounds(&two_train_corridor(3, 4)).unwrap();
        let hw: Vec<_> = cs.iter().filter(|c| c.kind == ConstraintKind::Headway).collect();
        assert_eq!(hw.len(), 2);
        // i over j
        assert_eq!(hw[0].later.train.as_str(), "i");
        assert_eq!(hw[0].earlier.train.as_str(), "j");
        assert_eq!((hw[0].lo, hw[0].hi), (5, 56));
        // j over i
        assert_eq!((hw[1].lo, hw[1].hi), (6, 57));
        assert_eq!(cs.len(), 4);
    }

    #[test]
    fn bound_inversion_is_reported() {
        let err = derive_bounds(&two_train_corridor(30, 29)).unwrap_err();
        assert!(matches!(err, ModelError::BoundInversion { kind: ConstraintKind::Headway, .. }));
    }

    #[test]
    fn single_trip_instance_has_one_constraint() {
        let mut inst = two_train_corridor(3, 4);
        inst.trains.truncate(1);
        let cs = derive_bounds(&inst).unwrap();
        assert_eq!(cs.len(), 1);
        assert_eq!(cs[0].kind, ConstraintKind::Running);
        assert_eq!((cs[0].lo, cs[0].hi), (10, 12));
    }

    #[test]
    fn missing_station_is_malformed() {
        let mut inst = two_train_corridor(3, 4);
        inst.stations.pop();
        assert!(matches!(
            derive_bounds(&inst),
            Err(ModelError::MalformedInstance(_))
        ));
    }

    #[test]
    fn single_track_uses_minimum_running_time() {
        let mut inst = two_train_corridor(3, 4);
        inst.segments.push(crate::model::Segment {
            from: "s".into(),
            to: "t".into(),
            single_track: true,
        });
        inst.trains[1].route = vec![Trip::new("t", "s", Window::new(8, 9), None)];
        let cs = derive_bounds(&inst).unwrap();
        let st: Vec<_> = cs
            .iter()
            .filter(|c| c.kind == ConstraintKind::SingleTrack)
            .collect();
        assert_eq!(st.len(), 2);
        // i leaves s after j arrived at s
        assert_eq!(st[0].earlier, Event::arrival(&"j".into(), &"s".into()));
        assert_eq!(st[0].later, Event::departure(&"i".into(), &"s".into()));
        assert_eq!((st[0].lo, st[0].hi), (2 * 8 + 3, 56));
        assert_eq!(st[1].earlier, Event::arrival(&"i".into(), &"t".into()));
        assert_eq!((st[1].lo, st[1].hi), (2 * 8 + 4, 57));
        assert!(cs.iter().all(|c| c.kind != ConstraintKind::Headway));
    }
}
