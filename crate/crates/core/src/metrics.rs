//! Per-appliance accuracy: F-score over ON/OFF classification and normalised
//! error in assigned power (NEP).

use std::collections::BTreeMap;
use std::io::Write;

use serde::Serialize;

use crate::disagg::{ApplianceTrack, DisaggResult};
use crate::error::{Error, Result};
use crate::series::{align, PowerSeries};

/// Default ON level in watts.
pub const DEFAULT_ON_THRESHOLD: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct Confusion {
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub tn: usize,
}

impl Confusion {
    /// Tallies paired ON flags; pairs with an unknown side are skipped.
    pub fn from_flags(pairs: impl IntoIterator<Item = (Option<bool>, Option<bool>)>) -> Self {
        let mut c = Confusion::default();
        for pair in pairs {
            match pair {
                (Some(true), Some(true)) => c.tp += 1,
                (Some(false), Some(true)) => c.fp += 1,
                (Some(true), Some(false)) => c.fn_ += 1,
                (Some(false), Some(false)) => c.tn += 1,
                _ => {}
            }
        }
        c
    }

    /// 0 when nothing was predicted ON.
    pub fn precision(&self) -> f64 {
        ratio(self.tp, self.tp + self.fp)
    }

    /// 0 when nothing was truly ON.
    pub fn recall(&self) -> f64 {
        ratio(self.tp, self.tp + self.fn_)
    }

    /// Harmonic mean of precision and recall; 0 when both are 0.
    pub fn f_score(&self) -> f64 {
        let (p, r) = (self.precision(), self.recall());
        if p + r == 0.0 {
            0.0
        } else {
            2.0 * p * r / (p + r)
        }
    }
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FScore {
    pub f: f64,
    pub precision: f64,
    pub recall: f64,
    pub counts: Confusion,
}

impl From<Confusion> for FScore {
    fn from(counts: Confusion) -> Self {
        Self {
            f: counts.f_score(),
            precision: counts.precision(),
            recall: counts.recall(),
            counts,
        }
    }
}

fn on_flags(s: &PowerSeries, on_threshold: f64) -> impl Iterator<Item = Option<bool>> + '_ {
    s.values().iter().map(move |v| v.map(|w| w > on_threshold))
}

/// F-score with a sample counted ON when its power exceeds `on_threshold`.
pub fn f_score(truth: &PowerSeries, predicted: &PowerSeries, on_threshold: f64) -> Result<FScore> {
    if !(on_threshold > 0.0) {
        return Err(Error::InvalidParameter("on_threshold must be positive".into()));
    }
    let (t, p) = align(truth, predicted)?;
    Ok(Confusion::from_flags(on_flags(&t, on_threshold).zip(on_flags(&p, on_threshold))).into())
}

/// Σ|predicted − truth| / Σ truth over samples present in both.
pub fn nep(truth: &PowerSeries, predicted: &PowerSeries) -> Result<f64> {
    let (t, p) = align(truth, predicted)?;
    let (err, total) = t
        .values()
        .iter()
        .zip(p.values())
        .filter_map(|(a, b)| Some((a.as_ref()?, b.as_ref()?)))
        .fold((0.0, 0.0), |(e, s), (a, b)| (e + (b - a).abs(), s + a));
    if total == 0.0 {
        return Err(Error::ZeroEnergy);
    }
    Ok(err / total)
}

/// How a predicted sample is judged ON.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OnRule {
    /// Predicted power above the threshold.
    Power(f64),
    /// Chosen state index other than 0. Truth still uses the power threshold.
    StateIndex(f64),
}

impl OnRule {
    fn truth_threshold(self) -> f64 {
        match self {
            OnRule::Power(t) | OnRule::StateIndex(t) => t,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ApplianceScore {
    pub appliance: String,
    pub f_score: f64,
    pub precision: f64,
    pub recall: f64,
    pub nep: f64,
    pub counts: Confusion,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricReport {
    pub appliances: Vec<ApplianceScore>,
}

impl MetricReport {
    pub fn get(&self, appliance: &str) -> Option<&ApplianceScore> {
        self.appliances.iter().find(|a| a.appliance == appliance)
    }

    /// `appliance,f_score,nep,tp,fp,fn,tn`
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let e = |e: csv::Error| Error::Io(std::io::Error::other(e));
        w.write_record(["appliance", "f_score", "nep", "tp", "fp", "fn", "tn"])
            .map_err(e)?;
        for a in &self.appliances {
            w.write_record([
                a.appliance.clone(),
                a.f_score.to_string(),
                a.nep.to_string(),
                a.counts.tp.to_string(),
                a.counts.fp.to_string(),
                a.counts.fn_.to_string(),
                a.counts.tn.to_string(),
            ])
            .map_err(e)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

fn score_track(truth: &PowerSeries, track: &ApplianceTrack, rule: OnRule) -> Result<ApplianceScore> {
    let fs = match rule {
        OnRule::Power(t) => f_score(truth, &track.predicted, t)?,
        OnRule::StateIndex(t) => {
            let flags = PowerSeries::new(
                track.predicted.start(),
                track.predicted.period(),
                track
                    .states
                    .iter()
                    .map(|s| s.map(|s| if s != 0 { 1.0 } else { 0.0 }))
                    .collect(),
            )?;
            let (tr, pr) = align(truth, &flags)?;
            Confusion::from_flags(
                on_flags(&tr, t).zip(pr.values().iter().map(|v| v.map(|x| x > 0.5))),
            )
            .into()
        }
    };
    Ok(ApplianceScore {
        appliance: track.name.clone(),
        f_score: fs.f,
        precision: fs.precision,
        recall: fs.recall,
        nep: nep(truth, &track.predicted)?,
        counts: fs.counts,
    })
}

/// Scores every appliance of a disaggregation result against ground truth.
pub fn evaluate(
    truth_set: &BTreeMap<String, PowerSeries>,
    result: &DisaggResult,
    on_threshold: f64,
) -> Result<MetricReport> {
    evaluate_with(truth_set, result, OnRule::Power(on_threshold))
}

pub fn evaluate_with(
    truth_set: &BTreeMap<String, PowerSeries>,
    result: &DisaggResult,
    rule: OnRule,
) -> Result<MetricReport> {
    if !(rule.truth_threshold() > 0.0) {
        return Err(Error::InvalidParameter("on_threshold must be positive".into()));
    }
    let appliances = result
        .appliances
        .iter()
        .map(|track| {
            let truth = truth_set
                .get(&track.name)
                .ok_or_else(|| Error::MissingTruth(track.name.clone()))?;
            score_track(truth, track, rule)
        })
        .collect::<Result<_>>()?;
    Ok(MetricReport { appliances })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::disagg::{co_disaggregate, ApplianceModel};

    fn s(v: &[f64]) -> PowerSeries {
        PowerSeries::from_watts(0, 30, v.to_vec()).unwrap()
    }

    #[test]
    fn perfect_prediction() {
        let x = s(&[0.0, 500.0, 500.0, 0.0]);
        let f = f_score(&x, &x, 10.0).unwrap();
        assert_eq!(f.f, 1.0);
        assert_eq!(nep(&x, &x).unwrap(), 0.0);
    }

    #[test]
    fn worked_f_score() {
        let truth = s(&[100.0, 100.0, 0.0, 0.0]);
        let pred = s(&[100.0, 0.0, 0.0, 0.0]);
        let f = f_score(&truth, &pred, 10.0).unwrap();
        assert_eq!(f.precision, 1.0);
        assert_eq!(f.recall, 0.5);
        assert_eq!(f.f, 2.0 / 3.0);
        assert_eq!(
            f.counts,
            Confusion {
                tp: 1,
                fp: 0,
                fn_: 1,
                tn: 2
            }
        );
    }

    #[test]
    fn all_off_scores_zero() {
        let x = s(&[0.0; 4]);
        assert_eq!(f_score(&x, &x, 10.0).unwrap().f, 0.0);
    }

    #[test]
    fn worked_nep() {
        assert_eq!(nep(&s(&[100.0, 100.0, 0.0]), &s(&[100.0, 0.0, 0.0])).unwrap(), 0.5);
        assert_eq!(nep(&s(&[10.0, 30.0]), &s(&[0.0, 0.0])).unwrap(), 1.0);
        assert!(matches!(nep(&s(&[0.0, 0.0]), &s(&[1.0, 1.0])), Err(Error::ZeroEnergy)));
    }

    #[test]
    fn missing_samples_excluded() {
        let truth = PowerSeries::new(0, 30, vec![Some(100.0), None, Some(100.0)]).unwrap();
        let pred = s(&[100.0, 900.0, 100.0]);
        assert_eq!(nep(&truth, &pred).unwrap(), 0.0);
        assert_eq!(f_score(&truth, &pred, 10.0).unwrap().counts.tp, 2);
    }

    #[test]
    fn misaligned_input() {
        let a = s(&[1.0, 2.0]);
        let b = PowerSeries::from_watts(600, 30, vec![1.0]).unwrap();
        assert!(matches!(nep(&a, &b), Err(Error::NoOverlap)));
    }

    #[test]
    fn evaluate_matches_scalar_ops() {
        let truth = s(&[0.0, 100.0, 100.0, 0.0, 40.0]);
        let model = ApplianceModel::two_state("a", 100.0).unwrap();
        let r = co_disaggregate(&truth, &[model]).unwrap();
        let mut set = BTreeMap::new();
        set.insert("a".to_string(), truth.clone());
        let rep = evaluate(&set, &r, 10.0).unwrap();
        let row = rep.get("a").unwrap();
        let pred = &r.appliances[0].predicted;
        assert_eq!(row.f_score, f_score(&truth, pred, 10.0).unwrap().f);
        assert_eq!(row.nep, nep(&truth, pred).unwrap());

        let by_state = evaluate_with(&set, &r, OnRule::StateIndex(10.0)).unwrap();
        assert_eq!(by_state.appliances[0].counts, row.counts);

        assert!(matches!(
            evaluate(&BTreeMap::new(), &r, 10.0),
            Err(Error::MissingTruth(n)) if n == "a"
        ));
    }

    #[test]
    fn report_csv() {
        let rep = MetricReport {
            appliances: vec![ApplianceScore {
                appliance: "ahu".into(),
                f_score: 0.5,
                precision: 1.0,
                recall: 1.0 / 3.0,
                nep: 1.25,
                counts: Confusion {
                    tp: 1,
                    fp: 0,
                    fn_: 2,
                    tn: 3,
                },
            }],
        };
        let mut buf = Vec::new();
        rep.write_csv(&mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "appliance,f_score,nep,tp,fp,fn,tn\nahu,0.5,1.25,1,0,2,3\n"
        );
        assert!(rep.to_json().contains("\"fn\": 2"));
    }
}
