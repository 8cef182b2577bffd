//! Integer genotype of a timetable and its mapping to event times.
//!
//! The genotype is one integer vector split into consecutive per-train
//! sections. A section for a train with `n` trips has `2n` genes:
//!
//! ```text
//! [first_departure, running_1, dwell_1, running_2, dwell_2, ..., running_n]
//! ```
//!
//! Gene `k` of a section is the offset from event `k - 1` to event `k` of the
//! train (see [`EventLayout`]), so event times are prefix sums reduced modulo
//! the period. Running and dwell genes only take values inside their
//! constraint windows, so every decoded timetable meets all running and dwell
//! constraints.

use rand::Rng;
use thiserror::Error;

use crate::model::{EventLayout, Instance, Minutes, ModelError, Timetable, Window};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CodecError {
    #[error("gene {index} = {value} lies outside [{lo}, {hi}]")]
    OutOfBoundsGene {
        index: usize,
        value: Minutes,
        lo: Minutes,
        hi: Minutes,
    },
    #[error("genotype has {got} genes, expected {expected}")]
    LengthMismatch { expected: usize, got: usize },
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Genotype(pub Vec<Minutes>);

impl Genotype {
    pub fn genes(&self) -> &[Minutes] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Inclusive value range of every gene position.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GeneBounds(Vec<Window>);

impl GeneBounds {
    pub fn new(bounds: Vec<Window>) -> Self {
        Self(bounds)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn windows(&self) -> &[Window] {
        &self.0
    }

    pub fn get(&self, index: usize) -> Window {
        self.0[index]
    }

    pub fn check(&self, g: &Genotype) -> Result<(), CodecError> {
        if g.len() != self.len() {
            return Err(CodecError::LengthMismatch {
                expected: self.len(),
                got: g.len(),
            });
        }
        for (index, (&value, w)) in g.0.iter().zip(&self.0).enumerate() {
            if !w.contains(value) {
                return Err(CodecError::OutOfBoundsGene {
                    index,
                    value,
                    lo: w.lo,
                    hi: w.hi,
                });
            }
        }
        Ok(())
    }

    pub fn contains(&self, g: &Genotype) -> bool {
        self.check(g).is_ok()
    }

    /// Product of the range sizes (saturating).
    pub fn space_size(&self) -> u128 {
        self.0
            .iter()
            .fold(1u128, |acc, w| acc.saturating_mul(u128::from(w.len())))
    }
}

/// First departure in `[0, T-1]`, then the running and dwell windows of each
/// trip, train by train in instance order.
pub fn gene_bounds(instance: &Instance) -> GeneBounds {
    let mut bounds = Vec::with_capacity(2 * instance.trip_count());
    for train in &instance.trains {
        bounds.push(Window::new(0, instance.period - 1));
        for trip in &train.route {
            bounds.push(trip.running);
            if let Some(dwell) = trip.dwell_after {
                bounds.push(dwell);
            }
        }
    }
    GeneBounds(bounds)
}

/// Uniform sample of every gene over its bounds.
pub fn random_genotype<R: Rng + ?Sized>(bounds: &GeneBounds, rng: &mut R) -> Genotype {
    Genotype(
        bounds
            .windows()
            .iter()
            .map(|w| rng.gen_range(w.lo..=w.hi))
            .collect(),
    )
}

/// Layout and bounds of one instance, reused across many decodes.
#[derive(Debug, Clone)]
pub struct Decoder {
    layout: EventLayout,
    bounds: GeneBounds,
    period: Minutes,
}

impl Decoder {
    pub fn new(instance: &Instance) -> Self {
        let layout = EventLayout::new(instance);
        let bounds = gene_bounds(instance);
        debug_assert_eq!(layout.len(), bounds.len());
        Self {
            layout,
            bounds,
            period: instance.period,
        }
    }

    pub fn layout(&self) -> &EventLayout {
        &self.layout
    }

    pub fn bounds(&self) -> &GeneBounds {
        &self.bounds
    }

    pub fn period(&self) -> Minutes {
        self.period
    }

    /// Writes event times in layout order into `out`. Genes are not checked
    /// against their bounds.
    pub fn decode_times_into(&self, genes: &[Minutes], out: &mut Vec<Minutes>) {
        out.clear();
        out.resize(genes.len(), 0);
        for section in self.layout.sections() {
            let mut acc: Minutes = 0;
            for k in section.clone() {
                acc += genes[k];
                out[k] = acc.rem_euclid(self.period);
            }
        }
    }

    pub fn decode_times(&self, g: &Genotype) -> Result<Vec<Minutes>, CodecError> {
        self.bounds.check(g)?;
        let mut out = Vec::new();
        self.decode_times_into(&g.0, &mut out);
        Ok(out)
    }

    pub fn decode(&self, g: &Genotype) -> Result<Timetable, CodecError> {
        let times = self.decode_times(g)?;
        Ok(Timetable::from_layout(&self.layout, &times, self.period))
    }

    /// Recovers the genotype of a timetable: the first departure and the
    /// modular offsets between consecutive events of each train. Exact for
    /// any timetable produced by [`Decoder::decode`], since every gene lies
    /// in `[0, T)`.
    pub fn encode(&self, tt: &Timetable) -> Result<Genotype, CodecError> {
        let times = tt.layout_times(&self.layout)?;
        let mut genes = vec![0; times.len()];
        for section in self.layout.sections() {
            for k in section.clone() {
                genes[k] = if k == section.start {
                    times[k]
                } else {
                    (times[k] - times[k - 1]).rem_euclid(self.period)
                };
            }
        }
        let g = Genotype(genes);
        self.bounds.check(&g)?;
        Ok(g)
    }
}

pub fn decode(g: &Genotype, instance: &Instance) -> Result<Timetable, CodecError> {
    Decoder::new(instance).decode(g)
}
