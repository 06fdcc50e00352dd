//! Confusion counts, the weighted accuracy/error family, TCR, F-measure and ROC points.

use std::fmt;
use std::io::{self, Write};

use crate::corpus::Class;
use crate::error::{Error, Result};

/// Cost profiles for λ.
pub const LAMBDA_PRESETS: [f64; 3] = [1.0, 9.0, 999.0];

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ConfusionCounts {
    /// normal classified as normal
    pub n_nn: u64,
    /// normal classified as threat
    pub n_nt: u64,
    /// threat classified as normal
    pub n_tn: u64,
    /// threat classified as threat
    pub n_tt: u64,
}

impl ConfusionCounts {
    pub fn total(&self) -> u64 {
        self.n_nn + self.n_nt + self.n_tn + self.n_tt
    }

    pub fn record(&mut self, predicted: Class, gold: Class) {
        match (gold, predicted) {
            (Class::Normal, Class::Normal) => self.n_nn += 1,
            (Class::Normal, Class::Threat) => self.n_nt += 1,
            (Class::Threat, Class::Normal) => self.n_tn += 1,
            (Class::Threat, Class::Threat) => self.n_tt += 1,
        }
    }

    pub fn scaled(&self, factor: u64) -> ConfusionCounts {
        ConfusionCounts {
            n_nn: self.n_nn * factor,
            n_nt: self.n_nt * factor,
            n_tn: self.n_tn * factor,
            n_tt: self.n_tt * factor,
        }
    }
}

pub fn confusion(predictions: &[Class], gold: &[Class]) -> Result<ConfusionCounts> {
    if predictions.len() != gold.len() {
        return Err(Error::LengthMismatch {
            predictions: predictions.len(),
            gold: gold.len(),
        });
    }
    if gold.is_empty() {
        return Err(Error::EmptyConfusion);
    }
    let mut c = ConfusionCounts::default();
    for (&p, &g) in predictions.iter().zip(gold) {
        c.record(p, g);
    }
    Ok(c)
}

/// Every metric is `None` when its denominator is zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricsReport {
    pub lambda: f64,
    pub accuracy: Option<f64>,
    pub weighted_accuracy: Option<f64>,
    pub error_rate: Option<f64>,
    pub weighted_error: Option<f64>,
    pub fp_rate: Option<f64>,
    pub fn_rate: Option<f64>,
    pub recall: Option<f64>,
    pub precision: Option<f64>,
    pub f1: Option<f64>,
    /// `+inf` when no cost is incurred but threats exist.
    pub tcr: Option<f64>,
}

fn ratio(num: f64, den: f64) -> Option<f64> {
    (den != 0.0).then(|| num / den)
}

pub fn metrics(c: &ConfusionCounts, lambda: f64) -> Result<MetricsReport> {
    if lambda.is_nan() || lambda < 0.0 || lambda.is_infinite() {
        return Err(Error::InvalidParameter(format!("lambda must be finite and >= 0, got {lambda}")));
    }
    if c.total() == 0 {
        return Err(Error::EmptyConfusion);
    }
    let (nn, nt, tn, tt) = (c.n_nn as f64, c.n_nt as f64, c.n_tn as f64, c.n_tt as f64);
    let total = nn + nt + tn + tt;
    let weighted_total = lambda * (nn + nt) + tn + tt;

    let recall = ratio(tt, tn + tt);
    let precision = ratio(tt, nt + tt);
    let f1 = match (precision, recall) {
        (Some(p), Some(r)) if p + r == 0.0 => Some(0.0),
        (Some(p), Some(r)) => Some(2.0 * p * r / (p + r)),
        _ => None,
    };
    let cost = lambda * nt + tn;
    let tcr = if cost == 0.0 {
        (tn + tt > 0.0).then_some(f64::INFINITY)
    } else {
        Some((tn + tt) / cost)
    };

    Ok(MetricsReport {
        lambda,
        accuracy: ratio(nn + tt, total),
        weighted_accuracy: ratio(lambda * nn + tt, weighted_total),
        error_rate: ratio(nt + tn, total),
        weighted_error: ratio(lambda * nt + tn, weighted_total),
        fp_rate: ratio(nt, nn + nt),
        fn_rate: ratio(tn, tn + tt),
        recall,
        precision,
        f1,
        tcr,
    })
}

/// Column names of [`MetricsReport::csv_fields`].
pub const METRICS_CSV_COLUMNS: &str =
    "lambda,accuracy,weighted_accuracy,error_rate,weighted_error,fp_rate,fn_rate,recall,precision,f1,tcr";

impl MetricsReport {
    /// Comma-separated values in [`METRICS_CSV_COLUMNS`] order; undefined
    /// metrics are written as `undefined`, infinite TCR as `inf`.
    pub fn csv_fields(&self) -> String {
        let mut out = format_metric(Some(self.lambda));
        for v in [
            self.accuracy,
            self.weighted_accuracy,
            self.error_rate,
            self.weighted_error,
            self.fp_rate,
            self.fn_rate,
            self.recall,
            self.precision,
            self.f1,
            self.tcr,
        ] {
            out.push(',');
            out.push_str(&format_metric(v));
        }
        out
    }
}

pub fn format_metric(v: Option<f64>) -> String {
    match v {
        None => "undefined".to_string(),
        Some(x) if x.is_infinite() => "inf".to_string(),
        Some(x) => format!("{x}"),
    }
}

impl fmt::Display for MetricsReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows = [
            ("accuracy", self.accuracy),
            ("weighted_accuracy", self.weighted_accuracy),
            ("error_rate", self.error_rate),
            ("weighted_error", self.weighted_error),
            ("fp_rate", self.fp_rate),
            ("fn_rate", self.fn_rate),
            ("recall", self.recall),
            ("precision", self.precision),
            ("f1", self.f1),
            ("tcr", self.tcr),
        ];
        writeln!(f, "lambda\t{}", self.lambda)?;
        for (name, v) in rows {
            let shown = match v {
                Some(x) if x.is_finite() => format!("{x:.4}"),
                other => format_metric(other),
            };
            writeln!(f, "{name}\t{shown}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RocPoint {
    pub threshold: f64,
    pub fp_rate: f64,
    pub tp_rate: f64,
}

/// One point per threshold, sorted by threshold descending. A score counts
/// as Threat when it is strictly above the threshold.
pub fn roc_curve(scores: &[(f64, Class)], thresholds: &[f64]) -> Result<Vec<RocPoint>> {
    let positives = scores.iter().filter(|(_, c)| *c == Class::Threat).count();
    let negatives = scores.len() - positives;
    if positives == 0 || negatives == 0 {
        return Err(Error::SingleClassGold);
    }
    let mut sorted: Vec<f64> = thresholds.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));

    // walk thresholds downward over scores sorted descending
    let mut by_score: Vec<(f64, Class)> = scores.to_vec();
    by_score.sort_by(|a, b| b.0.total_cmp(&a.0));
    let (mut tp, mut fp, mut i) = (0usize, 0usize, 0usize);
    let mut out = Vec::with_capacity(sorted.len());
    for tau in sorted {
        while i < by_score.len() && by_score[i].0 > tau {
            match by_score[i].1 {
                Class::Threat => tp += 1,
                Class::Normal => fp += 1,
            }
            i += 1;
        }
        out.push(RocPoint {
            threshold: tau,
            fp_rate: fp as f64 / negatives as f64,
            tp_rate: tp as f64 / positives as f64,
        });
    }
    Ok(out)
}

/// Every distinct score plus one threshold above the maximum, so the curve
/// runs from (0, 0) to (1, 1).
pub fn roc_thresholds(scores: &[(f64, Class)]) -> Vec<f64> {
    let mut t: Vec<f64> = scores.iter().map(|(s, _)| *s).collect();
    t.sort_by(|a, b| b.total_cmp(a));
    t.dedup();
    let top = t.first().copied().unwrap_or(0.0);
    let mut out = vec![top + 1.0];
    out.extend(t.iter().copied());
    if let Some(&low) = t.last() {
        out.push(low - 1.0);
    }
    out
}

pub fn write_roc_csv<W: Write>(mut out: W, points: &[RocPoint]) -> io::Result<()> {
    writeln!(out, "threshold,fp_rate,tp_rate")?;
    for p in points {
        writeln!(out, "{},{},{}", p.threshold, p.fp_rate, p.tp_rate)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    const FIXTURE: ConfusionCounts = ConfusionCounts {
        n_nn: 90,
        n_nt: 10,
        n_tn: 5,
        n_tt: 45,
    };

    #[test]
    fn fixture_values() {
        let m = metrics(&FIXTURE, 1.0).unwrap();
        assert!((m.accuracy.unwrap() - 0.9).abs() < 1e-12);
        assert!((m.precision.unwrap() - 45.0 / 55.0).abs() < 1e-12);
        assert!((m.recall.unwrap() - 0.9).abs() < 1e-12);
        assert!((m.fp_rate.unwrap() - 0.1).abs() < 1e-12);
        assert!((m.fn_rate.unwrap() - 0.1).abs() < 1e-12);
        assert!((m.f1.unwrap() - 0.857_142_857_142_857).abs() < 1e-9);
        assert!((m.tcr.unwrap() - 50.0 / 15.0).abs() < 1e-12);
        assert_eq!(m.weighted_accuracy, m.accuracy);
        assert_eq!(m.weighted_error, m.error_rate);
    }

    #[test]
    fn undefined_and_infinite() {
        let perfect = ConfusionCounts {
            n_nn: 4,
            n_tt: 3,
            ..Default::default()
        };
        let m = metrics(&perfect, 9.0).unwrap();
        assert_eq!(m.error_rate, Some(0.0));
        assert_eq!(m.tcr, Some(f64::INFINITY));

        let no_threats = ConfusionCounts {
            n_nn: 4,
            ..Default::default()
        };
        let m = metrics(&no_threats, 1.0).unwrap();
        assert_eq!(m.recall, None);
        assert_eq!(m.precision, None);
        assert_eq!(m.f1, None);
        assert_eq!(m.tcr, None);
        assert_eq!(format_metric(m.recall), "undefined");

        let all_missed = ConfusionCounts {
            n_nt: 2,
            n_tn: 2,
            ..Default::default()
        };
        assert_eq!(metrics(&all_missed, 1.0).unwrap().f1, Some(0.0));
        assert!(metrics(&ConfusionCounts::default(), 1.0).is_err());
        assert!(metrics(&FIXTURE, -1.0).is_err());
    }

    #[test]
    fn confusion_tallies() {
        use Class::*;
        let c = confusion(&[Threat, Normal, Normal, Threat], &[Threat, Threat, Normal, Normal]).unwrap();
        assert_eq!(c, ConfusionCounts { n_nn: 1, n_nt: 1, n_tn: 1, n_tt: 1 });
        assert!(matches!(
            confusion(&[Threat], &[]),
            Err(Error::LengthMismatch { predictions: 1, gold: 0 })
        ));
        let all_normal = confusion(&[Normal; 3], &[Threat; 3]).unwrap();
        assert_eq!(all_normal, ConfusionCounts { n_tn: 3, ..Default::default() });
    }

    #[test]
    fn roc_endpoints() {
        use Class::*;
        let s = [(0.9, Threat), (0.4, Normal), (0.6, Threat), (0.1, Normal)];
        let pts = roc_curve(&s, &[0.0, 2.0, 0.5]).unwrap();
        assert_eq!(pts[0], RocPoint { threshold: 2.0, fp_rate: 0.0, tp_rate: 0.0 });
        assert_eq!(pts[1], RocPoint { threshold: 0.5, fp_rate: 0.0, tp_rate: 1.0 });
        assert_eq!(pts[2], RocPoint { threshold: 0.0, fp_rate: 1.0, tp_rate: 1.0 });
        assert!(roc_curve(&[(0.1, Threat)], &[0.0]).is_err());

        let t = roc_thresholds(&s);
        let pts = roc_curve(&s, &t).unwrap();
        assert_eq!((pts[0].fp_rate, pts[0].tp_rate), (0.0, 0.0));
        let last = pts.last().unwrap();
        assert_eq!((last.fp_rate, last.tp_rate), (1.0, 1.0));
    }

    #[test]
    fn csv_formats() {
        let m = metrics(&FIXTURE, 1.0).unwrap();
        assert_eq!(m.csv_fields().split(',').count(), METRICS_CSV_COLUMNS.split(',').count());
        let mut buf = Vec::new();
        write_roc_csv(&mut buf, &[RocPoint { threshold: 0.5, fp_rate: 0.0, tp_rate: 1.0 }]).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "threshold,fp_rate,tp_rate\n0.5,0,1\n");
    }
}
