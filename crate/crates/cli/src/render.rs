//! Plain-text timetable tables. Output depends only on the data, never on
//! the locale.

use std::collections::HashMap;

use periodic_timetable::model::{
    expand_periods, ClockTime, Event, EventKind, Instance, ModelError, Timetable, Trip,
};

/// Left-aligned columns separated by two spaces.
fn table(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut widths: Vec<usize> = header.iter().map(|h| h.len()).collect();
    for row in rows {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.len());
        }
    }
    let mut out = String::new();
    let header: Vec<String> = header.iter().map(|h| h.to_string()).collect();
    for row in std::iter::once(&header).chain(rows) {
        let line: Vec<String> = row
            .iter()
            .zip(&widths)
            .map(|(cell, &w)| format!("{cell:<w$}"))
            .collect();
        out.push_str(line.join("  ").trim_end());
        out.push('\n');
    }
    out
}

/// Per train, one line per station with arrival and departure minutes
/// within the period (`-` where the train starts or ends).
pub fn render_timetable(instance: &Instance, tt: &Timetable) -> Result<String, ModelError> {
    let mut out = String::new();
    for train in &instance.trains {
        let mut rows = Vec::new();
        for station in train.stations() {
            let arr = Event::arrival(&train.id, station);
            let dep = Event::departure(&train.id, station);
            let cell = |e: &Event, present: bool| -> Result<String, ModelError> {
                Ok(if present { tt.time(e)?.to_string() } else { "-".into() })
            };
            rows.push(vec![
                station.to_string(),
                cell(&arr, train.arrives_at(station))?,
                cell(&dep, train.departs_from(station))?,
            ]);
        }
        out.push_str(&format!("train {}\n", train.id));
        out.push_str(&table(&["station", "arrival", "departure"], &rows));
        out.push('\n');
    }
    Ok(out)
}

/// `k` consecutive periods starting at `epoch`, one row per trip and period
/// in departure order.
pub fn render_expansion(
    instance: &Instance,
    tt: &Timetable,
    k: u32,
    epoch: ClockTime,
) -> Result<String, ModelError> {
    let period = instance.period;
    let mut trips: HashMap<Event, (&str, &Trip, i64)> = HashMap::new();
    for train in &instance.trains {
        for trip in &train.route {
            let dep = Event::departure(&train.id, &trip.from);
            let arr = Event::arrival(&train.id, &trip.to);
            let running = (tt.time(&arr)? - tt.time(&dep)?).rem_euclid(period);
            trips.insert(dep, (train.id.as_str(), trip, running));
        }
    }
    let rows: Vec<Vec<String>> = expand_periods(tt, k)
        .into_iter()
        .filter(|d| d.event.kind == EventKind::Departure)
        .filter_map(|d| {
            let &(train, trip, running) = trips.get(&d.event)?;
            Some(vec![
                train.to_owned(),
                trip.from.to_string(),
                trip.to.to_string(),
                d.clock(epoch).to_string(),
                ClockTime(epoch.0 + d.absolute + running).to_string(),
            ])
        })
        .collect();
    Ok(table(&["Train", "From", "To", "Departure", "Arrival"], &rows))
}

#[cfg(test)]
mod tests {
    use super::*;
    use periodic_timetable::model::{Train, WeightConfig, Window};

    fn tgv() -> (Instance, Timetable) {
        let inst = Instance {
            period: 60,
            stations: vec!["Paris".into(), "Lyon".into()],
            segments: vec![],
            trains: vec![Train {
                id: "tgv".into(),
                basic_headway: 3,
                route: vec![Trip::new("Paris", "Lyon", Window::new(50, 60 - 1), None)],
            }],
            connections: vec![],
            weights: WeightConfig::default(),
            note: None,
        };
        let mut tt = Timetable::new(60);
        tt.insert(Event::departure(&"tgv".into(), &"Paris".into()), 46);
        tt.insert(Event::arrival(&"tgv".into(), &"Lyon".into()), 40);
        (inst, tt)
    }

    #[test]
    fn hourly_repetition() {
        let (inst, tt) = tgv();
        let text = render_expansion(&inst, &tt, 4, ClockTime::from_hm(8, 0)).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 5);
        assert_eq!(lines[0], "Train  From   To    Departure  Arrival");
        assert_eq!(lines[1], "tgv    Paris  Lyon  8:46       9:40");
        assert!(lines[4].contains("11:46") && lines[4].ends_with("12:40"));
    }

    #[test]
    fn single_period_has_one_row_per_trip() {
        let (inst, tt) = tgv();
        let text = render_expansion(&inst, &tt, 1, ClockTime::default()).unwrap();
        assert_eq!(text.lines().count(), 2);
    }

    #[test]
    fn missing_event_is_reported() {
        let (inst, _) = tgv();
        let mut tt = Timetable::new(60);
        tt.insert(Event::departure(&"tgv".into(), &"Paris".into()), 0);
        assert!(matches!(
            render_expansion(&inst, &tt, 1, ClockTime::default()),
            Err(ModelError::MissingEvent(_))
        ));
    }

    #[test]
    fn per_train_listing() {
        let (inst, tt) = tgv();
        let text = render_timetable(&inst, &tt).unwrap();
        assert_eq!(
            text,
            "train tgv\nstation  arrival  departure\nParis    -        46\nLyon     40       -\n\n"
        );
    }
}
