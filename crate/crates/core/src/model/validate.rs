use std::collections::HashSet;

use thiserror::Error;

use super::{Instance, Minutes, StationId, TrainId};

/// A violated instance invariant. Every variant names the invariant and the
/// offending item.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ValidationError {
    #[error("period must be at least 2 minutes, got {0}")]
    PeriodTooSmall(Minutes),
    #[error("station {0} is listed more than once")]
    DuplicateStation(StationId),
    #[error("{context} references unknown station {station}")]
    UnknownStation { context: String, station: StationId },
    #[error("segment {0} -> {0} connects a station to itself")]
    SegmentLoop(StationId),
    #[error("more than one segment between {0} and {1}")]
    DuplicateSegment(StationId, StationId),
    #[error("instance has no trains")]
    NoTrains,
    #[error("train id {0} is not unique")]
    DuplicateTrain(TrainId),
    #[error("train {0} has no trips")]
    EmptyRoute(TrainId),
    #[error("train {train}: basic headway {value} must lie in [1, period)")]
    BasicHeadway { train: TrainId, value: Minutes },
    #[error("train {train}: trip {trip} does not start where trip {prev} ends", prev = trip - 1)]
    BrokenChain { train: TrainId, trip: usize },
    #[error("train {train}: trip {trip} runs from {station} to itself")]
    TripLoop {
        train: TrainId,
        trip: usize,
        station: StationId,
    },
    #[error("train {train} visits station {station} more than once")]
    RevisitedStation { train: TrainId, station: StationId },
    #[error("train {train}: trip {trip} ({from} -> {to}) running window [{lo}, {hi}] must satisfy 1 <= lo <= hi < period")]
    RunningWindow {
        train: TrainId,
        trip: usize,
        from: StationId,
        to: StationId,
        lo: Minutes,
        hi: Minutes,
    },
    #[error("train {train}: dwell window [{lo}, {hi}] at {station} must satisfy 0 <= lo <= hi < period")]
    DwellWindow {
        train: TrainId,
        station: StationId,
        lo: Minutes,
        hi: Minutes,
    },
    #[error("train {train}: trip {trip} needs a dwell window (intermediate stop)")]
    MissingDwell { train: TrainId, trip: usize },
    #[error("train {train}: the final trip must not carry a dwell window")]
    TerminalDwell { train: TrainId },
    #[error("connection at {station}: unknown train {train}")]
    UnknownTrain { station: StationId, train: TrainId },
    #[error("connection at {station}: feeder train {train} does not arrive there")]
    FeederDoesNotArrive { station: StationId, train: TrainId },
    #[error("connection at {station}: onward train {train} does not depart from there")]
    OnwardDoesNotDepart { station: StationId, train: TrainId },
    #[error("connection {feeder} -> {onward} at {station}: window [{lo}, {hi}] must satisfy 0 <= lo <= hi < period")]
    ConnectionWindow {
        feeder: TrainId,
        onward: TrainId,
        station: StationId,
        lo: Minutes,
        hi: Minutes,
    },
    #[error("headway and single-track weights must exceed the connection weight")]
    WeightOrder,
}

pub(super) fn validate(instance: &Instance) -> Result<(), ValidationError> {
    use ValidationError::*;

    let period = instance.period;
    if period < 2 {
        return Err(PeriodTooSmall(period));
    }

    let mut stations = HashSet::new();
    for s in &instance.stations {
        if !stations.insert(s) {
            return Err(DuplicateStation(s.clone()));
        }
    }
    let known = |context: &dyn Fn() -> String, s: &StationId| {
        if stations.contains(s) {
            Ok(())
        } else {
            Err(UnknownStation {
                context: context(),
                station: s.clone(),
            })
        }
    };

    let mut pairs = HashSet::new();
    for seg in &instance.segments {
        let ctx = || format!("segment {} -> {}", seg.from, seg.to);
        known(&ctx, &seg.from)?;
        known(&ctx, &seg.to)?;
        if seg.from == seg.to {
            return Err(SegmentLoop(seg.from.clone()));
        }
        let key = if seg.from < seg.to {
            (&seg.from, &seg.to)
        } else {
            (&seg.to, &seg.from)
        };
        if !pairs.insert(key) {
            return Err(DuplicateSegment(key.0.clone(), key.1.clone()));
        }
    }

    if instance.trains.is_empty() {
        return Err(NoTrains);
    }
    let mut ids = HashSet::new();
    for train in &instance.trains {
        if !ids.insert(&train.id) {
            return Err(DuplicateTrain(train.id.clone()));
        }
        if train.route.is_empty() {
            return Err(EmptyRoute(train.id.clone()));
        }
        if train.basic_headway < 1 || train.basic_headway >= period {
            return Err(BasicHeadway {
                train: train.id.clone(),
                value: train.basic_headway,
            });
        }
        let last = train.route.len() - 1;
        for (k, trip) in train.route.iter().enumerate() {
            let ctx = || format!("train {} trip {}", train.id, k);
            known(&ctx, &trip.from)?;
            known(&ctx, &trip.to)?;
            if trip.from == trip.to {
                return Err(TripLoop {
                    train: train.id.clone(),
                    trip: k,
                    station: trip.from.clone(),
                });
            }
            if k > 0 && train.route[k - 1].to != trip.from {
                return Err(BrokenChain {
                    train: train.id.clone(),
                    trip: k,
                });
            }
            let r = trip.running;
            if !(1 <= r.lo && r.lo <= r.hi && r.hi < period) {
                return Err(RunningWindow {
                    train: train.id.clone(),
                    trip: k,
                    from: trip.from.clone(),
                    to: trip.to.clone(),
                    lo: r.lo,
                    hi: r.hi,
                });
            }
            match (k == last, trip.dwell_after) {
                (true, Some(_)) => return Err(TerminalDwell { train: train.id.clone() }),
                (false, None) => {
                    return Err(MissingDwell {
                        train: train.id.clone(),
                        trip: k,
                    })
                }
                (false, Some(d)) if !(0 <= d.lo && d.lo <= d.hi && d.hi < period) => {
                    return Err(DwellWindow {
                        train: train.id.clone(),
                        station: trip.to.clone(),
                        lo: d.lo,
                        hi: d.hi,
                    })
                }
                _ => {}
            }
        }
        let mut seen = HashSet::new();
        for s in train.stations() {
            if !seen.insert(s) {
                return Err(RevisitedStation {
                    train: train.id.clone(),
                    station: s.clone(),
                });
            }
        }
    }

    for c in &instance.connections {
        let ctx = || format!("connection {} -> {}", c.feeder_train, c.onward_train);
        known(&ctx, &c.station)?;
        let feeder = instance.train(&c.feeder_train).ok_or_else(|| UnknownTrain {
            station: c.station.clone(),
            train: c.feeder_train.clone(),
        })?;
        let onward = instance.train(&c.onward_train).ok_or_else(|| UnknownTrain {
            station: c.station.clone(),
            train: c.onward_train.clone(),
        })?;
        if !feeder.arrives_at(&c.station) {
            return Err(FeederDoesNotArrive {
                station: c.station.clone(),
                train: c.feeder_train.clone(),
            });
        }
        if !onward.departs_from(&c.station) {
            return Err(OnwardDoesNotDepart {
                station: c.station.clone(),
                train: c.onward_train.clone(),
            });
        }
        // hi < period keeps every periodic window inside (-T, T), which the
        // independent checker's q in {-1, 0, 1} trial relies on.
        let w = c.window;
        if !(0 <= w.lo && w.lo <= w.hi && w.hi < period) {
            return Err(ConnectionWindow {
                feeder: c.feeder_train.clone(),
                onward: c.onward_train.clone(),
                station: c.station.clone(),
                lo: w.lo,
                hi: w.hi,
            });
        }
    }

    let w = instance.weights;
    if w.headway <= w.connection || w.single_track <= w.connection {
        return Err(WeightOrder);
    }
    Ok(())
}
