//! JSON instance files and the bundled case-study instances.
//!
//! ```json
//! {
//!   "period": 60,
//!   "stations": ["A", "B"],
//!   "segments": [{ "from": "A", "to": "B", "single_track": true }],
//!   "trains": [{
//!     "id": "L1-up",
//!     "basic_headway": 3,
//!     "route": [{ "from": "A", "to": "B", "running_lo": 9, "running_hi": 11 }]
//!   }],
//!   "connections": [],
//!   "weights": { "w_running": 1000, "w_dwell": 1000, "w_headway": 100, "w_single": 100, "w_connection": 1 }
//! }
//! ```
//!
//! Unknown keys are rejected. `segments`, `connections`, `weights` and
//! `note` may be omitted.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{
    derive_bounds, ConnectionSpec, Event, EventKind, Instance, Minutes, ModelError, Segment,
    StationId, Timetable, Train, Trip, ValidationError, WeightConfig, Window,
};

#[derive(Debug, Error)]
pub enum LoadError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("invalid instance: {0}")]
    Validation(#[from] ValidationError),
    #[error("train {train}: trip {trip} gives only one of dwell_after_lo / dwell_after_hi")]
    IncompleteDwell { train: String, trip: usize },
}

impl From<serde_json::Error> for LoadError {
    fn from(e: serde_json::Error) -> Self {
        LoadError::Parse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InstanceFile {
    period: Minutes,
    stations: Vec<String>,
    #[serde(default)]
    segments: Vec<SegmentFile>,
    trains: Vec<TrainFile>,
    #[serde(default)]
    connections: Vec<ConnectionFile>,
    #[serde(default)]
    weights: WeightsFile,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    note: Option<String>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SegmentFile {
    from: String,
    to: String,
    #[serde(default)]
    single_track: bool,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TrainFile {
    id: String,
    basic_headway: Minutes,
    route: Vec<TripFile>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TripFile {
    from: String,
    to: String,
    running_lo: Minutes,
    running_hi: Minutes,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    dwell_after_lo: Option<Minutes>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    dwell_after_hi: Option<Minutes>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConnectionFile {
    feeder_train: String,
    onward_train: String,
    station: String,
    conn_lo: Minutes,
    conn_hi: Minutes,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct WeightsFile {
    w_running: u64,
    w_dwell: u64,
    w_headway: u64,
    w_single: u64,
    w_connection: u64,
}

impl Default for WeightsFile {
    fn default() -> Self {
        WeightConfig::default().into()
    }
}

impl From<WeightConfig> for WeightsFile {
    fn from(w: WeightConfig) -> Self {
        Self {
            w_running: w.running,
            w_dwell: w.dwell,
            w_headway: w.headway,
            w_single: w.single_track,
            w_connection: w.connection,
        }
    }
}

impl From<WeightsFile> for WeightConfig {
    fn from(w: WeightsFile) -> Self {
        Self {
            running: w.w_running,
            dwell: w.w_dwell,
            headway: w.w_headway,
            single_track: w.w_single,
            connection: w.w_connection,
        }
    }
}

impl InstanceFile {
    fn into_instance(self) -> Result<Instance, LoadError> {
        let mut trains = Vec::with_capacity(self.trains.len());
        for t in self.trains {
            let mut route = Vec::with_capacity(t.route.len());
            for (k, trip) in t.route.into_iter().enumerate() {
                let dwell_after = match (trip.dwell_after_lo, trip.dwell_after_hi) {
                    (Some(lo), Some(hi)) => Some(Window::new(lo, hi)),
                    (None, None) => None,
                    _ => {
                        return Err(LoadError::IncompleteDwell {
                            train: t.id.clone(),
                            trip: k,
                        })
                    }
                };
                route.push(Trip {
                    from: trip.from.into(),
                    to: trip.to.into(),
                    running: Window::new(trip.running_lo, trip.running_hi),
                    dwell_after,
                });
            }
            trains.push(Train {
                id: t.id.into(),
                basic_headway: t.basic_headway,
                route,
            });
        }
        Ok(Instance {
            period: self.period,
            stations: self.stations.into_iter().map(StationId::from).collect(),
            segments: self
                .segments
                .into_iter()
                .map(|s| Segment {
                    from: s.from.into(),
                    to: s.to.into(),
                    single_track: s.single_track,
                })
                .collect(),
            trains,
            connections: self
                .connections
                .into_iter()
                .map(|c| ConnectionSpec {
                    feeder_train: c.feeder_train.into(),
                    onward_train: c.onward_train.into(),
                    station: c.station.into(),
                    window: Window::new(c.conn_lo, c.conn_hi),
                })
                .collect(),
            weights: self.weights.into(),
            note: self.note,
        })
    }

    fn from_instance(inst: &Instance) -> Self {
        Self {
            period: inst.period,
            stations: inst.stations.iter().map(|s| s.0.clone()).collect(),
            segments: inst
                .segments
                .iter()
                .map(|s| SegmentFile {
                    from: s.from.0.clone(),
                    to: s.to.0.clone(),
                    single_track: s.single_track,
                })
                .collect(),
            trains: inst
                .trains
                .iter()
                .map(|t| TrainFile {
                    id: t.id.0.clone(),
                    basic_headway: t.basic_headway,
                    route: t
                        .route
                        .iter()
                        .map(|trip| TripFile {
                            from: trip.from.0.clone(),
                            to: trip.to.0.clone(),
                            running_lo: trip.running.lo,
                            running_hi: trip.running.hi,
                            dwell_after_lo: trip.dwell_after.map(|d| d.lo),
                            dwell_after_hi: trip.dwell_after.map(|d| d.hi),
                        })
                        .collect(),
                })
                .collect(),
            connections: inst
                .connections
                .iter()
                .map(|c| ConnectionFile {
                    feeder_train: c.feeder_train.0.clone(),
                    onward_train: c.onward_train.0.clone(),
                    station: c.station.0.clone(),
                    conn_lo: c.window.lo,
                    conn_hi: c.window.hi,
                })
                .collect(),
            weights: inst.weights.into(),
            note: inst.note.clone(),
        }
    }
}

/// Parses and validates an instance document.
pub fn from_json_str(text: &str) -> Result<Instance, LoadError> {
    let file: InstanceFile = serde_json::from_str(text)?;
    let instance = file.into_instance()?;
    instance.validate()?;
    Ok(instance)
}

/// Pretty-printed JSON with a fixed key order and element order as in the
/// instance.
pub fn to_json_string(instance: &Instance) -> String {
    let mut s = serde_json::to_string_pretty(&InstanceFile::from_instance(instance))
        .expect("instance serialization cannot fail");
    s.push('\n');
    s
}

pub fn load(path: impl AsRef<Path>) -> Result<Instance, LoadError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| LoadError::Io {
        path: path.to_owned(),
        source,
    })?;
    from_json_str(&text)
}

pub fn save(instance: &Instance, path: impl AsRef<Path>) -> std::io::Result<()> {
    fs::write(path, to_json_string(instance))
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TimetableFile {
    period: Minutes,
    events: Vec<EventFile>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EventFile {
    kind: EventKind,
    train: String,
    station: String,
    time: Minutes,
}

/// Timetable document: `{"period": 60, "events": [{"kind": "departure",
/// "train": "...", "station": "...", "time": 46}, ...]}`.
pub fn timetable_to_json(tt: &Timetable) -> String {
    let file = TimetableFile {
        period: tt.period(),
        events: tt
            .iter()
            .map(|(e, time)| EventFile {
                kind: e.kind,
                train: e.train.0.clone(),
                station: e.station.0.clone(),
                time,
            })
            .collect(),
    };
    let mut s = serde_json::to_string_pretty(&file).expect("timetable serialization cannot fail");
    s.push('\n');
    s
}

pub fn timetable_from_json(text: &str) -> Result<Timetable, LoadError> {
    let file: TimetableFile = serde_json::from_str(text)?;
    if file.period < 2 {
        return Err(ValidationError::PeriodTooSmall(file.period).into());
    }
    let mut tt = Timetable::new(file.period);
    for e in file.events {
        let event = Event {
            kind: e.kind,
            train: e.train.into(),
            station: e.station.into(),
        };
        tt.insert(event, e.time);
    }
    Ok(tt)
}

pub fn load_timetable(path: impl AsRef<Path>) -> Result<Timetable, LoadError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| LoadError::Io {
        path: path.to_owned(),
        source,
    })?;
    timetable_from_json(&text)
}

/// The bundled case-study-1 file, identical to [`build_cs1`].
pub const CS1_JSON: &str = include_str!("../data/cs1.json");
/// The bundled case-study-2-like file, identical to
/// `generate_cs2_like(CS2_SEED)`.
pub const CS2_JSON: &str = include_str!("../data/cs2.json");
pub const CS2_SEED: u64 = 2013;

fn trip(from: &str, to: &str, run: (Minutes, Minutes), dwell: Option<(Minutes, Minutes)>) -> Trip {
    Trip::new(
        from,
        to,
        Window::new(run.0, run.1),
        dwell.map(|(lo, hi)| Window::new(lo, hi)),
    )
}

/// Builds both directions of a line from its stops, the running window of
/// each leg and the dwell window at each intermediate stop.
fn line_pair(
    name: &str,
    headway: Minutes,
    stops: &[&str],
    running: &[(Minutes, Minutes)],
    dwell: &[(Minutes, Minutes)],
) -> [Train; 2] {
    assert_eq!(stops.len(), running.len() + 1);
    assert_eq!(dwell.len() + 2, stops.len());
    let build = |stops: Vec<&str>, running: Vec<(Minutes, Minutes)>, dwell: Vec<(Minutes, Minutes)>, dir: &str| {
        let route = (0..running.len())
            .map(|k| trip(stops[k], stops[k + 1], running[k], dwell.get(k).copied()))
            .collect();
        Train {
            id: format!("{name}-{dir}").into(),
            basic_headway: headway,
            route,
        }
    };
    let rev = |v: &[(Minutes, Minutes)]| v.iter().rev().copied().collect::<Vec<_>>();
    [
        build(stops.to_vec(), running.to_vec(), dwell.to_vec(), "a"),
        build(stops.iter().rev().copied().collect(), rev(running), rev(dwell), "b"),
    ]
}

/// Dutch intercity subnetwork: four lines run in both
/// directions (eight trains) over ten stations with a 60 minute period.
///
/// Census of the 65 constraints: 24 running, 16 dwell, 12 headway (lines
/// IC-A and IC-B share Utrecht - Geldermalsen - Den Bosch, IC-A and IC-C
/// share Amsterdam - Utrecht), 6 single track (Geldermalsen - Tiel - Elst
/// and Amersfoort - Zwolle) and 7 connections.
pub fn build_cs1() -> Instance {
    let stations = ["Asd", "Ut", "Gdm", "Ht", "Ehv", "Gd", "Amf", "Zl", "Tl", "Est"];
    let segment = |a: &str, b: &str, single_track: bool| Segment {
        from: a.into(),
        to: b.into(),
        single_track,
    };
    let segments = vec![
        segment("Asd", "Ut", false),
        segment("Ut", "Gdm", false),
        segment("Gdm", "Ht", false),
        segment("Ht", "Ehv", false),
        segment("Gd", "Ut", false),
        segment("Ut", "Amf", false),
        segment("Amf", "Zl", true),
        segment("Gdm", "Tl", true),
        segment("Tl", "Est", true),
    ];
    let [a_a, a_b] = line_pair(
        "ICA",
        3,
        &["Asd", "Ut", "Gdm", "Ht", "Ehv"],
        &[(26, 28), (18, 20), (11, 13), (20, 22)],
        &[(2, 4), (1, 3), (1, 3)],
    );
    let [b_a, b_b] = line_pair(
        "ICB",
        3,
        &["Gd", "Ut", "Gdm", "Ht"],
        &[(20, 22), (19, 21), (12, 14)],
        &[(2, 4), (1, 3)],
    );
    let [c_a, c_b] = line_pair(
        "ICC",
        3,
        &["Zl", "Amf", "Ut", "Asd"],
        &[(8, 10), (15, 17), (25, 27)],
        &[(1, 3), (2, 4)],
    );
    let [d_a, d_b] = line_pair("RD", 2, &["Gdm", "Tl", "Est"], &[(6, 8), (5, 7)], &[(1, 3)]);

    let conn = |feeder: &Train, onward: &Train, station: &str, lo: Minutes, hi: Minutes| ConnectionSpec {
        feeder_train: feeder.id.clone(),
        onward_train: onward.id.clone(),
        station: station.into(),
        window: Window::new(lo, hi),
    };
    let connections = vec![
        conn(&c_a, &a_a, "Ut", 3, 12),
        conn(&a_b, &c_b, "Ut", 3, 12),
        conn(&b_a, &c_b, "Ut", 2, 12),
        conn(&b_b, &c_b, "Ut", 2, 12),
        conn(&a_a, &d_a, "Gdm", 3, 14),
        conn(&d_b, &a_b, "Gdm", 3, 14),
        conn(&d_b, &b_b, "Gdm", 3, 14),
    ];

    Instance {
        period: 60,
        stations: stations.iter().map(|&s| s.into()).collect(),
        segments,
        trains: vec![a_a, a_b, b_a, b_b, c_a, c_b, d_a, d_b],
        connections,
        weights: WeightConfig::default(),
        note: Some(
            "4-line Dutch subnetwork (8 trains, 10 stations, 7 connections, 65 constraints)"
                .into(),
        ),
    }
}

pub const CS2_STATIONS: usize = 26;
pub const CS2_TRAINS: usize = 48;
pub const CS2_CONNECTIONS: usize = 14;
pub const CS2_CONSTRAINTS: usize = 452;

#[derive(Debug, Error)]
pub enum GenerationError {
    #[error("no instance with the target census found after {0} attempts")]
    GenerationInfeasible(usize),
    #[error(transparent)]
    Model(#[from] ModelError),
}

const SPOKES: usize = 5;
const SPOKE_DEPTH: usize = 5;
const MAX_LINES_PER_TRIP: usize = 4;
const MAX_ATTEMPTS: usize = 10_000;

fn spoke_station(spoke: usize, depth: usize) -> String {
    if depth == 0 {
        "HUB".to_owned()
    } else {
        format!("{}{}", (b'A' + spoke as u8) as char, depth)
    }
}

/// Synthetic regional network:
/// a hub with five radial branches of five stations each (26 stations), 24
/// lines run in both directions (48 trains), 14 connections and exactly 452
/// constraints. Lines either run out along one branch or cross the hub from
/// one branch to another. Single-track sections are placed on branch sections
/// served by one line only until the constraint total is met.
pub fn generate_cs2_like(seed: u64) -> Result<Instance, GenerationError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..MAX_ATTEMPTS {
        if let Some(inst) = try_generate(&mut rng)? {
            return Ok(inst);
        }
    }
    Err(GenerationError::GenerationInfeasible(MAX_ATTEMPTS))
}

fn try_generate(rng: &mut ChaCha8Rng) -> Result<Option<Instance>, GenerationError> {
    let period = 60;
    // Base running time per branch section (hub side first).
    let base: Vec<Vec<Minutes>> = (0..SPOKES)
        .map(|_| (0..SPOKE_DEPTH).map(|_| rng.gen_range(4..=9)).collect())
        .collect();

    let mut lines: Vec<Vec<String>> = Vec::new();
    let mut load: BTreeMap<(String, String), usize> = BTreeMap::new();
    let mut tries = 0;
    while lines.len() < 24 {
        tries += 1;
        if tries > 2_000 {
            return Ok(None);
        }
        let stops: Vec<String> = if rng.gen_bool(0.5) {
            let spoke = rng.gen_range(0..SPOKES);
            let from = rng.gen_range(0..SPOKE_DEPTH);
            let to = rng.gen_range(from + 1..=SPOKE_DEPTH);
            (from..=to).map(|d| spoke_station(spoke, d)).collect()
        } else {
            let a = rng.gen_range(0..SPOKES);
            let b = (a + rng.gen_range(1..SPOKES)) % SPOKES;
            let da = rng.gen_range(1..=SPOKE_DEPTH);
            let db = rng.gen_range(1..=SPOKE_DEPTH);
            (1..=da)
                .rev()
                .map(|d| spoke_station(a, d))
                .chain(std::iter::once(spoke_station(a, 0)))
                .chain((1..=db).map(|d| spoke_station(b, d)))
                .collect()
        };
        let legs: Vec<(String, String)> = stops
            .windows(2)
            .map(|w| if w[0] < w[1] { (w[0].clone(), w[1].clone()) } else { (w[1].clone(), w[0].clone()) })
            .collect();
        if legs.iter().any(|l| load.get(l).copied().unwrap_or(0) >= MAX_LINES_PER_TRIP) {
            continue;
        }
        for l in legs {
            *load.entry(l).or_default() += 1;
        }
        lines.push(stops);
    }

    let used: BTreeSet<&String> = lines.iter().flatten().collect();
    if used.len() != CS2_STATIONS {
        return Ok(None);
    }

    let section_base = |a: &str, b: &str| -> Minutes {
        let outer = match (a, b) {
            ("HUB", o) | (o, "HUB") => o,
            _ => a.max(b),
        };
        let spoke = (outer.as_bytes()[0] - b'A') as usize;
        let depth: usize = outer[1..].parse().expect("branch station index");
        base[spoke][depth - 1]
    };

    let mut trains = Vec::new();
    for (n, stops) in lines.iter().enumerate() {
        let headway = rng.gen_range(2..=3);
        let running: Vec<(Minutes, Minutes)> = stops
            .windows(2)
            .map(|w| {
                let lo = section_base(&w[0], &w[1]) + rng.gen_range(0..=1);
                (lo, lo + rng.gen_range(1..=3))
            })
            .collect();
        let dwell: Vec<(Minutes, Minutes)> = (0..stops.len() - 2)
            .map(|_| {
                let lo = rng.gen_range(1..=2);
                (lo, lo + rng.gen_range(1..=2))
            })
            .collect();
        let names: Vec<&str> = stops.iter().map(String::as_str).collect();
        trains.extend(line_pair(&format!("L{:02}", n + 1), headway, &names, &running, &dwell));
    }

    // Transfers: feeder arrives at a station the onward train (of another
    // line) departs from.
    let mut candidates = Vec::new();
    for f in &trains {
        for o in &trains {
            if f.id.0[..3] == o.id.0[..3] {
                continue;
            }
            for s in f.stations().skip(1) {
                if o.departs_from(s) {
                    candidates.push((f.id.clone(), o.id.clone(), s.clone()));
                }
            }
        }
    }
    if candidates.len() < CS2_CONNECTIONS {
        return Ok(None);
    }
    candidates.shuffle(rng);
    let mut connections: Vec<ConnectionSpec> = candidates[..CS2_CONNECTIONS]
        .iter()
        .map(|(f, o, s)| {
            let lo = rng.gen_range(2..=4);
            ConnectionSpec {
                feeder_train: f.clone(),
                onward_train: o.clone(),
                station: s.clone(),
                window: Window::new(lo, lo + rng.gen_range(5..=9)),
            }
        })
        .collect();
    connections.sort_by(|a, b| {
        (&a.feeder_train, &a.onward_train, &a.station).cmp(&(&b.feeder_train, &b.onward_train, &b.station))
    });

    let mut stations: Vec<StationId> = vec![spoke_station(0, 0).into()];
    let mut segments = Vec::new();
    for spoke in 0..SPOKES {
        for depth in 1..=SPOKE_DEPTH {
            stations.push(spoke_station(spoke, depth).into());
            segments.push(Segment {
                from: spoke_station(spoke, depth - 1).into(),
                to: spoke_station(spoke, depth).into(),
                single_track: false,
            });
        }
    }

    let mut instance = Instance {
        period,
        stations,
        segments,
        trains,
        connections,
        weights: WeightConfig::default(),
        note: Some(format!(
            "SYNTHETIC: regional hub-and-spoke network \
             ({CS2_STATIONS} stations, {CS2_TRAINS} trains, {CS2_CONNECTIONS} connections, \
             {CS2_CONSTRAINTS} constraints); not real line data"
        )),
    };
    let count = derive_bounds(&instance)?.len();
    if count > CS2_CONSTRAINTS || (CS2_CONSTRAINTS - count) % 2 != 0 {
        return Ok(None);
    }
    // A single-track section served by exactly one line adds two constraints.
    let needed = (CS2_CONSTRAINTS - count) / 2;
    let mut single_line: Vec<usize> = instance
        .segments
        .iter()
        .enumerate()
        .filter(|(_, s)| {
            let key = if s.from < s.to { (s.from.0.clone(), s.to.0.clone()) } else { (s.to.0.clone(), s.from.0.clone()) };
            load.get(&key) == Some(&1)
        })
        .map(|(i, _)| i)
        .collect();
    if single_line.len() < needed {
        return Ok(None);
    }
    single_line.shuffle(rng);
    for &i in &single_line[..needed] {
        instance.segments[i].single_track = true;
    }

    if instance.validate().is_err() || derive_bounds(&instance)?.len() != CS2_CONSTRAINTS {
        return Ok(None);
    }
    Ok(Some(instance))
}

fn small_instance(
    period: Minutes,
    stations: &[&str],
    single_track: &[(&str, &str)],
    trains: Vec<Train>,
    connections: Vec<ConnectionSpec>,
    note: &str,
) -> Instance {
    Instance {
        period,
        stations: stations.iter().map(|&s| s.into()).collect(),
        segments: single_track
            .iter()
            .map(|&(a, b)| Segment {
                from: a.into(),
                to: b.into(),
                single_track: true,
            })
            .collect(),
        trains,
        connections,
        weights: WeightConfig::default(),
        note: Some(note.to_owned()),
    }
}

fn train(id: &str, headway: Minutes, route: Vec<Trip>) -> Train {
    Train {
        id: id.into(),
        basic_headway: headway,
        route,
    }
}

fn connection(feeder: &str, onward: &str, station: &str, lo: Minutes, hi: Minutes) -> ConnectionSpec {
    ConnectionSpec {
        feeder_train: feeder.into(),
        onward_train: onward.into(),
        station: station.into(),
        window: Window::new(lo, hi),
    }
}

/// Two rigid trains whose transfer window can only be met by breaking the
/// headway between them, so the best timetable violates exactly one
/// connection. Genotype space: 60 * 60.
pub fn connection_conflict_micro() -> Instance {
    small_instance(
        60,
        &["R", "S", "T"],
        &[],
        vec![
            train(
                "i",
                2,
                vec![
                    trip("R", "S", (5, 5), Some((1, 1))),
                    trip("S", "T", (10, 10), None),
                ],
            ),
            train("j", 2, vec![trip("S", "T", (10, 10), None)]),
        ],
        vec![connection("i", "j", "S", 0, 1)],
        "micro: unsatisfiable transfer",
    )
}

/// Five small instances (at most three trains of at most two trips, at most
/// 10^6 genotypes at stride 1) covering every constraint kind.
pub fn micro_suite() -> Vec<Instance> {
    let shuttle = small_instance(
        30,
        &["X", "Y", "Z"],
        &[("X", "Y"), ("Y", "Z")],
        vec![
            train(
                "a",
                2,
                vec![trip("X", "Y", (4, 5), Some((1, 2))), trip("Y", "Z", (4, 6), None)],
            ),
            train(
                "b",
                2,
                vec![trip("Z", "Y", (4, 6), Some((1, 2))), trip("Y", "X", (4, 5), None)],
            ),
        ],
        vec![connection("a", "b", "Z", 1, 3)],
        "micro: single-track shuttle",
    );
    let corridor = small_instance(
        20,
        &["X", "Y", "Z"],
        &[],
        vec![
            train(
                "a",
                3,
                vec![trip("X", "Y", (3, 4), Some((1, 1))), trip("Y", "Z", (5, 6), None)],
            ),
            train("b", 3, vec![trip("X", "Y", (3, 5), None)]),
            train("c", 4, vec![trip("X", "Y", (4, 4), None)]),
        ],
        vec![connection("b", "a", "Y", 0, 2)],
        "micro: three-train corridor",
    );
    let saturated = small_instance(
        12,
        &["X", "Y", "Z"],
        &[],
        vec![
            train(
                "a",
                5,
                vec![trip("X", "Y", (2, 3), Some((0, 1))), trip("Y", "Z", (2, 3), None)],
            ),
            train("b", 4, vec![trip("X", "Y", (2, 3), None)]),
            train("c", 4, vec![trip("X", "Y", (2, 3), None)]),
        ],
        vec![],
        "micro: over-saturated headways",
    );
    let mixed = small_instance(
        24,
        &["P", "Q", "R"],
        &[("Q", "R")],
        vec![
            train(
                "a",
                2,
                vec![trip("P", "Q", (3, 4), Some((1, 1))), trip("Q", "R", (4, 5), None)],
            ),
            train(
                "b",
                2,
                vec![trip("R", "Q", (4, 5), Some((0, 1))), trip("Q", "P", (3, 3), None)],
            ),
            train("c", 3, vec![trip("P", "Q", (3, 3), None)]),
        ],
        vec![connection("c", "a", "Q", 1, 3), connection("b", "a", "Q", 2, 4)],
        "micro: mixed",
    );
    vec![connection_conflict_micro(), shuttle, corridor, saturated, mixed]
}

/// Instances with period 12 and six events each, small enough to enumerate
/// every timetable (12^6).
pub fn period12_micro() -> Vec<Instance> {
    let chain = small_instance(
        12,
        &["X", "Y", "Z"],
        &[],
        vec![
            train(
                "a",
                2,
                vec![trip("X", "Y", (2, 3), Some((1, 2))), trip("Y", "Z", (2, 4), None)],
            ),
            train("b", 2, vec![trip("Y", "Z", (2, 3), None)]),
        ],
        vec![connection("a", "b", "Y", 1, 3)],
        "micro: period-12 chain",
    );
    let single = small_instance(
        12,
        &["X", "Y"],
        &[("X", "Y")],
        vec![
            train("a", 1, vec![trip("X", "Y", (2, 3), None)]),
            train("b", 2, vec![trip("Y", "X", (2, 3), None)]),
            train("c", 1, vec![trip("X", "Y", (3, 4), None)]),
        ],
        vec![connection("b", "c", "X", 1, 4)],
        "micro: period-12 single track",
    );
    vec![chain, single]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ConstraintKind;

    fn census(inst: &Instance) -> [usize; 5] {
        let mut out = [0; 5];
        for c in derive_bounds(inst).unwrap() {
            out[c.kind.index()] += 1;
        }
        out
    }

    #[test]
    fn cs1_census() {
        let inst = build_cs1();
        inst.validate().unwrap();
        assert_eq!(census(&inst), [24, 16, 12, 6, 7]);
        assert_eq!(inst.trains.len(), 8);
        assert_eq!(inst.stations.len(), 10);
    }

    #[test]
    fn micro_instances_are_valid_and_small() {
        for inst in micro_suite().iter().chain(&period12_micro()) {
            inst.validate().unwrap();
            assert!(inst.trains.len() <= 3);
            assert!(inst.trains.iter().all(|t| t.route.len() <= 2));
            assert!(crate::codec::gene_bounds(inst).space_size() <= 1_000_000);
        }
        let kinds: std::collections::BTreeSet<_> = micro_suite()
            .iter()
            .flat_map(|i| derive_bounds(i).unwrap())
            .map(|c| c.kind)
            .collect();
        assert_eq!(kinds.len(), ConstraintKind::ALL.len());
    }

    #[test]
    fn period12_instances_have_six_events() {
        for inst in period12_micro() {
            assert_eq!(crate::model::EventLayout::new(&inst).len(), 6);
        }
    }
}
