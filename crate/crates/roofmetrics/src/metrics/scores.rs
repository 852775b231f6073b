use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::C2CResult;

/// Percentage of distances strictly under the threshold `d`.
///
/// Precision is computed over reconstruction→GT distances; boundary values
/// count as failures.
pub fn precision(recon_to_gt: &[f64], d: f64) -> Result<f64> {
    fraction_under(recon_to_gt, d)
}

/// Completeness: percentage of GT→reconstruction distances strictly under
/// `d`.
pub fn recall(gt_to_recon: &[f64], d: f64) -> Result<f64> {
    fraction_under(gt_to_recon, d)
}

fn fraction_under(distances: &[f64], d: f64) -> Result<f64> {
    if d < 0.0 {
        return Err(Error::InvalidParam(format!(
            "threshold must be non-negative, got {d}"
        )));
    }
    if distances.is_empty() {
        return Err(Error::EmptyCloud("no distances to score"));
    }
    let under = distances.iter().filter(|&&e| e < d).count();
    Ok(100.0 * under as f64 / distances.len() as f64)
}

/// Harmonic mean of precision and recall (percent); 0 when both are 0.
pub fn fscore(p: f64, r: f64) -> f64 {
    if p + r == 0.0 {
        0.0
    } else {
        2.0 * p * r / (p + r)
    }
}

/// Precision, recall, and F-score swept over ascending thresholds.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MetricCurve {
    /// Thresholds in meters, ascending.
    pub thresholds: Vec<f64>,
    pub precision_pct: Vec<f64>,
    pub recall_pct: Vec<f64>,
    pub fscore_pct: Vec<f64>,
}

pub fn metric_curve(result: &C2CResult, thresholds: &[f64]) -> Result<MetricCurve> {
    if thresholds.is_empty() {
        return Err(Error::InvalidParam("threshold list is empty".into()));
    }
    if thresholds.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParam("thresholds must be strictly ascending".into()));
    }
    let mut curve = MetricCurve {
        thresholds: thresholds.to_vec(),
        precision_pct: Vec::with_capacity(thresholds.len()),
        recall_pct: Vec::with_capacity(thresholds.len()),
        fscore_pct: Vec::with_capacity(thresholds.len()),
    };
    for &d in thresholds {
        let p = precision(&result.recon_to_gt.distances, d)?;
        let r = recall(&result.gt_to_recon.distances, d)?;
        curve.precision_pct.push(p);
        curve.recall_pct.push(r);
        curve.fscore_pct.push(fscore(p, r));
    }
    Ok(curve)
}

/// F-scores per (flight, section) with per-section ranks, mean F-score and
/// mean rank per flight.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FScoreTable {
    pub flights: Vec<String>,
    pub sections: Vec<String>,
    /// scores[section][flight], percent.
    pub scores: Vec<Vec<f64>>,
    /// ranks[section][flight]; 1 = best, ties share the average rank.
    pub ranks: Vec<Vec<f64>>,
    /// Arithmetic mean F-score per flight over sections.
    pub mean_fscore: Vec<f64>,
    /// Arithmetic mean rank per flight over sections.
    pub mean_rank: Vec<f64>,
}

/// Ranks flights within each section by descending F-score (ties averaged)
/// and aggregates per-flight means.
pub fn rank_table(
    flights: Vec<String>,
    sections: Vec<String>,
    scores: Vec<Vec<f64>>,
) -> Result<FScoreTable> {
    let n_flights = flights.len();
    if scores.len() != sections.len() {
        return Err(Error::InvalidParam(format!(
            "expected {} score rows, got {}",
            sections.len(),
            scores.len()
        )));
    }
    for (i, row) in scores.iter().enumerate() {
        if row.len() != n_flights {
            return Err(Error::InvalidParam(format!(
                "section '{}' has {} scores for {} flights",
                sections[i],
                row.len(),
                n_flights
            )));
        }
    }
    if n_flights == 0 || sections.is_empty() {
        return Err(Error::InvalidParam("rank table must be non-empty".into()));
    }

    let ranks: Vec<Vec<f64>> = scores.iter().map(|row| descending_ranks(row)).collect();
    let mean_fscore = (0..n_flights)
        .map(|f| scores.iter().map(|row| row[f]).sum::<f64>() / sections.len() as f64)
        .collect();
    let mean_rank = (0..n_flights)
        .map(|f| ranks.iter().map(|row| row[f]).sum::<f64>() / sections.len() as f64)
        .collect();

    Ok(FScoreTable {
        flights,
        sections,
        scores,
        ranks,
        mean_fscore,
        mean_rank,
    })
}

/// Competition-style ranks for descending values, ties averaged.
fn descending_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[b].total_cmp(&values[a]));

    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        // Positions i..=j share the average of ranks i+1..=j+1.
        let avg = (i + 1 + j + 1) as f64 / 2.0;
        for &idx in &order[i..=j] {
            ranks[idx] = avg;
        }
        i = j + 1;
    }
    ranks
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn precision_all_zero_distances() {
        assert_eq!(precision(&[0.0, 0.0, 0.0], 0.01).unwrap(), 100.0);
    }

    #[test]
    fn precision_counts_strictly() {
        let p = precision(&[0.01, 0.03, 0.05], 0.04).unwrap();
        assert!((p - 200.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn recall_boundary_is_a_failure() {
        assert_eq!(recall(&[0.05, 0.05], 0.05).unwrap(), 0.0);
    }

    #[test]
    fn empty_distances_error() {
        assert!(precision(&[], 0.01).is_err());
    }

    #[test]
    fn fscore_cases() {
        assert_eq!(fscore(90.0, 90.0), 90.0);
        assert!((fscore(50.0, 100.0) - 200.0 / 3.0).abs() < 1e-12);
        assert_eq!(fscore(0.0, 70.0), 0.0);
        assert_eq!(fscore(0.0, 0.0), 0.0);
    }

    #[test]
    fn fscore_between_min_and_max() {
        for (p, r) in [(10.0, 90.0), (33.0, 41.0), (100.0, 1.0)] {
            let f = fscore(p, r);
            assert!(f >= p.min(r) && f <= p.max(r));
        }
    }

    fn fake_result(rg: Vec<f64>, gr: Vec<f64>) -> C2CResult {
        use crate::metrics::{C2CDistances, ModelUsed};
        let wrap = |d: Vec<f64>| {
            let n = d.len();
            C2CDistances {
                distances: d,
                model_used: vec![ModelUsed::Quadric; n],
            }
        };
        C2CResult {
            recon_to_gt: wrap(rg),
            gt_to_recon: wrap(gr),
        }
    }

    #[test]
    fn curve_matches_direct_calls_and_is_monotone() {
        let result = fake_result(
            vec![0.001, 0.012, 0.025, 0.031, 0.044, 0.058],
            vec![0.002, 0.015, 0.02, 0.05],
        );
        let thresholds: Vec<f64> = (0..=12).map(|i| i as f64 * 0.005).collect();
        let curve = metric_curve(&result, &thresholds).unwrap();
        for (i, &d) in thresholds.iter().enumerate() {
            assert_eq!(curve.precision_pct[i], precision(&result.recon_to_gt.distances, d).unwrap());
            assert_eq!(curve.recall_pct[i], recall(&result.gt_to_recon.distances, d).unwrap());
        }
        for w in curve.precision_pct.windows(2) {
            assert!(w[1] >= w[0]);
        }
        for w in curve.recall_pct.windows(2) {
            assert!(w[1] >= w[0]);
        }
    }

    #[test]
    fn single_threshold_curve() {
        let result = fake_result(vec![0.01, 0.05], vec![0.02]);
        let curve = metric_curve(&result, &[0.04]).unwrap();
        assert_eq!(curve.precision_pct, vec![50.0]);
        assert_eq!(curve.recall_pct, vec![100.0]);
    }

    #[test]
    fn identical_scores_all_share_middle_rank() {
        let table = rank_table(
            vec!["a".into(), "b".into(), "c".into()],
            vec!["s1".into(), "s2".into()],
            vec![vec![80.0, 80.0, 80.0], vec![70.0, 70.0, 70.0]],
        )
        .unwrap();
        assert_eq!(table.mean_rank, vec![2.0, 2.0, 2.0]);
    }

    #[test]
    fn mean_fscore_is_arithmetic_mean() {
        let table = rank_table(
            vec!["a".into(), "b".into()],
            vec!["s1".into(), "s2".into()],
            vec![vec![80.0, 60.0], vec![40.0, 100.0]],
        )
        .unwrap();
        assert_eq!(table.mean_fscore, vec![60.0, 80.0]);
    }
}
