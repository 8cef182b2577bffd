//! Ground truth for small instances: exhaustive search over the genotype
//! lattice and a second constraint checker that shares no code path with
//! [`crate::model::evaluate`].

use std::collections::BTreeMap;

use rayon::prelude::*;
use thiserror::Error;

use crate::codec::{gene_bounds, CodecError, Decoder, Genotype};
use crate::model::{
    derive_bounds, CompiledConstraints, ConstraintKind, Event, EvaluationReport, Instance,
    Minutes, ModelError, PeriodicConstraint, Timetable, Violation, ViolationCounts,
};

pub const DEFAULT_SPACE_CAP: u128 = 100_000_000;

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("search space has {0} points, above the cap")]
    SpaceTooLarge(u128),
    #[error("stride must be at least 1")]
    InvalidStride,
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Codec(#[from] CodecError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExhaustiveResult {
    pub min_fitness: u64,
    /// Lexicographically smallest genotype reaching `min_fitness`.
    pub witness: Genotype,
    pub evaluations: u64,
}

/// Values `lo, lo + stride, ...` up to `hi`, always ending with `hi`.
fn lattice(lo: Minutes, hi: Minutes, stride: Minutes) -> Vec<Minutes> {
    let mut v: Vec<Minutes> = (lo..=hi).step_by(stride as usize).collect();
    if v.last() != Some(&hi) {
        v.push(hi);
    }
    v
}

/// Exact minimum of the full weighted objective over every in-bounds
/// genotype on the stride lattice.
pub fn exhaustive_min(
    instance: &Instance,
    stride: Minutes,
    cap: u128,
) -> Result<ExhaustiveResult, OracleError> {
    if stride < 1 {
        return Err(OracleError::InvalidStride);
    }
    let axes: Vec<Vec<Minutes>> = gene_bounds(instance)
        .windows()
        .iter()
        .map(|w| lattice(w.lo, w.hi, stride))
        .collect();
    let size = axes
        .iter()
        .fold(1u128, |acc, a| acc.saturating_mul(a.len() as u128));
    if size > cap {
        return Err(OracleError::SpaceTooLarge(size));
    }

    let constraints = derive_bounds(instance)?;
    let decoder = Decoder::new(instance);
    let compiled = CompiledConstraints::compile(&constraints, decoder.layout(), instance.period)?;
    let weights = instance.weights;

    // Partition by the leading gene; each part is enumerated in
    // lexicographic order, so the first strict improvement is the
    // lexicographically smallest witness of that part.
    let parts: Vec<(u64, Vec<Minutes>)> = axes[0]
        .par_iter()
        .map(|&lead| {
            let mut digits = vec![0usize; axes.len()];
            let mut genes: Vec<Minutes> = axes.iter().map(|a| a[0]).collect();
            genes[0] = lead;
            let mut times = Vec::with_capacity(genes.len());
            let mut best = (u64::MAX, Vec::new());
            loop {
                decoder.decode_times_into(&genes, &mut times);
                let f = compiled.fitness(&times, &weights);
                if f < best.0 {
                    best = (f, genes.clone());
                }
                // odometer over positions 1.., last position fastest
                let mut pos = axes.len();
                loop {
                    pos -= 1;
                    if pos == 0 {
                        return best;
                    }
                    digits[pos] += 1;
                    if digits[pos] < axes[pos].len() {
                        genes[pos] = axes[pos][digits[pos]];
                        break;
                    }
                    digits[pos] = 0;
                    genes[pos] = axes[pos][0];
                }
            }
        })
        .collect();

    let (min_fitness, witness) = parts
        .into_iter()
        .reduce(|a, b| if b.0 < a.0 { b } else { a })
        .expect("leading axis is nonempty");
    Ok(ExhaustiveResult {
        min_fitness,
        witness: Genotype(witness),
        evaluations: u64::try_from(size).expect("capped size fits in u64"),
    })
}

/// Tries `q` in `{-1, 0, 1}` directly.
///
/// This trial set is complete: event times lie in `[0, T)`, so the raw
/// difference lies in `(-T, T)`, and every window of a validated instance
/// satisfies `-T < lo <= hi < T`. A satisfying `raw + qT` then lies in
/// `(-T, T)` as well, which forces `|q| <= 1`.
fn window_holds(lo: Minutes, hi: Minutes, x: Minutes, y: Minutes, period: Minutes) -> Option<i64> {
    [0, 1, -1]
        .into_iter()
        .find(|&q| {
            let v = y - x + q * period;
            lo <= v && v <= hi
        })
}

struct Checker<'a> {
    tt: &'a Timetable,
    period: Minutes,
    counts: ViolationCounts,
    violated: Vec<Violation>,
}

impl Checker<'_> {
    fn check(&mut self, kind: ConstraintKind, x: Event, y: Event, lo: Minutes, hi: Minutes) -> Result<(), ModelError> {
        let tx = self.tt.get(&x).ok_or_else(|| ModelError::MissingEvent(x.clone()))?;
        let ty = self.tt.get(&y).ok_or_else(|| ModelError::MissingEvent(y.clone()))?;
        if window_holds(lo, hi, tx, ty, self.period).is_none() {
            self.counts.add(kind);
            self.violated.push(Violation {
                diff: (ty - tx).rem_euclid(self.period),
                q: 0,
                constraint: PeriodicConstraint {
                    kind,
                    earlier: x,
                    later: y,
                    lo,
                    hi,
                },
            });
        }
        Ok(())
    }
}

/// Recomputes every constraint verdict straight from the instance data.
pub fn check_independent(tt: &Timetable, instance: &Instance) -> Result<EvaluationReport, ModelError> {
    let period = instance.period;
    let mut ck = Checker {
        tt,
        period,
        counts: ViolationCounts::default(),
        violated: Vec::new(),
    };

    // Directed trip -> (train, minimum running time, basic headway).
    let mut by_trip: BTreeMap<(&str, &str), Vec<(usize, Minutes, Minutes)>> = BTreeMap::new();
    for (n, train) in instance.trains.iter().enumerate() {
        // Arrival and dwell window at the previous stop.
        let mut pending: Option<(Event, Option<crate::model::Window>)> = None;
        for trip in &train.route {
            let dep = Event::departure(&train.id, &trip.from);
            let arr = Event::arrival(&train.id, &trip.to);
            if let Some((a, dwell)) = pending.take() {
                let dwell = dwell.ok_or_else(|| {
                    ModelError::MalformedInstance(format!("train {} has no dwell window at {}", train.id, trip.from))
                })?;
                ck.check(ConstraintKind::Dwell, a, dep.clone(), dwell.lo, dwell.hi)?;
            }
            ck.check(ConstraintKind::Running, dep, arr.clone(), trip.running.lo, trip.running.hi)?;
            pending = Some((arr, trip.dwell_after));
            by_trip
                .entry((trip.from.as_str(), trip.to.as_str()))
                .or_default()
                .push((n, trip.running.lo, train.basic_headway));
        }
    }

    for (&(from, _), users) in &by_trip {
        for &(i, run_i, h_i) in users {
            for &(j, run_j, h_j) in users {
                if i == j {
                    continue;
                }
                let (ti, tj) = (&instance.trains[i].id, &instance.trains[j].id);
                let s = from.into();
                ck.check(
                    ConstraintKind::Headway,
                    Event::departure(tj, &s),
                    Event::departure(ti, &s),
                    (run_i - run_j).abs() + h_i,
                    period - h_j,
                )?;
            }
        }
    }

    for seg in instance.segments.iter().filter(|s| s.single_track) {
        for (s, t) in [(&seg.from, &seg.to), (&seg.to, &seg.from)] {
            let forward = by_trip.get(&(s.as_str(), t.as_str()));
            let backward = by_trip.get(&(t.as_str(), s.as_str()));
            let (Some(forward), Some(backward)) = (forward, backward) else {
                continue;
            };
            for &(i, run_i, h_i) in forward {
                for &(j, run_j, h_j) in backward {
                    let (ti, tj) = (&instance.trains[i].id, &instance.trains[j].id);
                    ck.check(
                        ConstraintKind::SingleTrack,
                        Event::arrival(tj, s),
                        Event::departure(ti, s),
                        2 * run_i.min(run_j) + h_i,
                        period - h_j,
                    )?;
                }
            }
        }
    }

    for c in &instance.connections {
        ck.check(
            ConstraintKind::Connection,
            Event::arrival(&c.feeder_train, &c.station),
            Event::departure(&c.onward_train, &c.station),
            c.window.lo,
            c.window.hi,
        )?;
    }

    let weighted_fitness = ConstraintKind::ALL
        .iter()
        .map(|&k| ck.counts.get(k) as u64 * instance.weights.get(k))
        .sum();
    Ok(EvaluationReport {
        violations_by_type: ck.counts,
        weighted_fitness,
        violated: ck.violated,
    })
}
