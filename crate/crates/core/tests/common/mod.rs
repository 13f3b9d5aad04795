#![allow(dead_code)]

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use hnilm::disagg::{co_disaggregate, split_halves, train_states, ApplianceModel, DisaggResult, TrainConfig};
use hnilm::metrics::{evaluate, MetricReport};
use hnilm::series::resample;
use hnilm::{MeterHierarchy, PowerSeries};

/// Exhaustive CO for one sample. Returns the winning tuple, its residual and
/// how many tuples share the smallest error.
pub fn co_oracle(models: &[ApplianceModel], a: f64) -> (Vec<usize>, f64, usize) {
    let mut tuples: Vec<Vec<usize>> = vec![vec![]];
    for m in models {
        tuples = tuples
            .into_iter()
            .flat_map(|t| {
                (0..m.num_states()).map(move |s| {
                    let mut t = t.clone();
                    t.push(s);
                    t
                })
            })
            .collect();
    }
    let total = |t: &[usize]| models.iter().zip(t).fold(0.0, |acc, (m, &s)| acc + m.power(s));
    let err = |t: &[usize]| (a - total(t)).abs();
    let min_err = tuples.iter().map(|t| err(t)).fold(f64::INFINITY, f64::min);
    let tied: Vec<&Vec<usize>> = tuples.iter().filter(|t| err(t) == min_err).collect();
    let min_total = tied.iter().map(|t| total(t)).fold(f64::INFINITY, f64::min);
    // `tuples` is in lexicographic order, so the first match is the smallest.
    let best = tied.iter().find(|t| total(t) == min_total).unwrap();
    (best.to_vec(), a - total(best), tied.len())
}

/// Number of ON/OFF changes in a chosen-state track.
pub fn state_transitions(states: &[Option<usize>]) -> usize {
    states
        .windows(2)
        .filter(|w| matches!((w[0], w[1]), (Some(a), Some(b)) if (a != 0) != (b != 0)))
        .count()
}

/// Number of ON/OFF changes in a power series.
pub fn power_transitions(s: &PowerSeries, on_threshold: f64) -> usize {
    s.values()
        .windows(2)
        .filter(|w| matches!((w[0], w[1]), (Some(a), Some(b)) if (a > on_threshold) != (b > on_threshold)))
        .count()
}

pub struct CoRun {
    pub models: Vec<ApplianceModel>,
    pub truth: BTreeMap<String, PowerSeries>,
    pub result: DisaggResult,
    pub report: MetricReport,
}

/// Resample to 60 s, train each appliance on the first half of its feed and
/// disaggregate the second half of `aggregate`.
pub fn co_protocol(h: &MeterHierarchy, aggregate: &str, appliances: &[&str]) -> CoRun {
    let feed = |id: &str| resample(h.series(id).unwrap(), 60).unwrap();
    let (_, test) = split_halves(&feed(aggregate));
    let mut models = Vec::new();
    let mut truth = BTreeMap::new();
    for id in appliances {
        let (train, held_out) = split_halves(&feed(id));
        models.push(train_states(id, &train, &TrainConfig::default()).unwrap().model);
        truth.insert(id.to_string(), held_out);
    }
    let result = co_disaggregate(&test, &models).unwrap();
    let report = evaluate(&truth, &result, 10.0).unwrap();
    CoRun {
        models,
        truth,
        result,
        report,
    }
}

/// Every file under `dir`, keyed by relative path.
pub fn read_tree(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    fn walk(root: &Path, dir: &Path, out: &mut BTreeMap<String, Vec<u8>>) {
        for entry in fs::read_dir(dir).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                walk(root, &path, out);
            } else {
                let rel = path.strip_prefix(root).unwrap().to_string_lossy().into_owned();
                out.insert(rel, fs::read(&path).unwrap());
            }
        }
    }
    let mut out = BTreeMap::new();
    walk(dir, dir, &mut out);
    out
}
