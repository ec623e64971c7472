//! Cross-route analytics: the TCO/GHG Pareto frontier and the cumulative
//! health-savings curve.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum AnalysisError {
    #[error("no routes to analyze")]
    Empty,
    #[error("route {route_id} has a non-finite ratio")]
    NonFiniteRatio { route_id: String },
    #[error("every route has zero health impact")]
    AllZeroImpacts,
    #[error("route {route_id} has a negative or non-finite health impact")]
    InvalidImpact { route_id: String },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RouteRatios {
    pub route_id: String,
    pub tco_ratio: f64,
    pub ghg_ratio: f64,
}

/// `a` dominates `b`: no worse in both ratios and better in one.
pub fn dominates(a: &RouteRatios, b: &RouteRatios) -> bool {
    a.tco_ratio <= b.tco_ratio
        && a.ghg_ratio <= b.ghg_ratio
        && (a.tco_ratio < b.tco_ratio || a.ghg_ratio < b.ghg_ratio)
}

/// Routes no other route dominates, ordered by ascending TCO ratio (then GHG
/// ratio, then id). Identical points are all kept.
pub fn pareto_frontier(points: &[RouteRatios]) -> Result<Vec<String>, AnalysisError> {
    if points.is_empty() {
        return Err(AnalysisError::Empty);
    }
    if let Some(p) = points.iter().find(|p| !p.tco_ratio.is_finite() || !p.ghg_ratio.is_finite()) {
        return Err(AnalysisError::NonFiniteRatio { route_id: p.route_id.clone() });
    }
    let mut order: Vec<&RouteRatios> = points.iter().collect();
    order.sort_by(|a, b| {
        a.tco_ratio
            .total_cmp(&b.tco_ratio)
            .then(a.ghg_ratio.total_cmp(&b.ghg_ratio))
            .then_with(|| a.route_id.cmp(&b.route_id))
    });

    // Best GHG among points with strictly smaller TCO.
    let mut best_before = f64::INFINITY;
    let mut out = Vec::new();
    let mut i = 0;
    while i < order.len() {
        let tco = order[i].tco_ratio;
        let group_min = order[i].ghg_ratio;
        let mut j = i;
        while j < order.len() && order[j].tco_ratio == tco {
            if order[j].ghg_ratio == group_min && group_min < best_before {
                out.push(order[j].route_id.clone());
            }
            j += 1;
        }
        best_before = best_before.min(group_min);
        i = j;
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HealthCurvePoint {
    pub rank: usize,
    pub route_id: String,
    pub cumulative_savings_pct: f64,
}

/// Routes by descending health impact with the running share of the total.
pub fn health_savings_curve(impacts: &BTreeMap<String, f64>) -> Result<Vec<HealthCurvePoint>, AnalysisError> {
    if impacts.is_empty() {
        return Err(AnalysisError::Empty);
    }
    if let Some((id, _)) = impacts.iter().find(|(_, v)| !(**v >= 0.0) || !v.is_finite()) {
        return Err(AnalysisError::InvalidImpact { route_id: id.clone() });
    }
    let total: f64 = impacts.values().sum();
    if !(total > 0.0) {
        return Err(AnalysisError::AllZeroImpacts);
    }
    let mut ranked: Vec<(&String, f64)> = impacts.iter().map(|(k, v)| (k, *v)).collect();
    ranked.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(b.0)));
    let n = ranked.len();
    let mut running = 0.0;
    Ok(ranked
        .into_iter()
        .enumerate()
        .map(|(i, (id, v))| {
            running += v;
            HealthCurvePoint {
                rank: i + 1,
                route_id: id.clone(),
                // Pin the last point so rounding cannot leave it short of 100.
                cumulative_savings_pct: if i + 1 == n { 100.0 } else { 100.0 * running / total },
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn pt(id: &str, t: f64, g: f64) -> RouteRatios {
        RouteRatios { route_id: id.into(), tco_ratio: t, ghg_ratio: g }
    }

    #[test]
    fn frontier_example() {
        let pts = [pt("a", 1.0, 0.5), pt("b", 0.9, 0.6), pt("c", 1.1, 0.7)];
        assert_eq!(pareto_frontier(&pts).unwrap(), vec!["b", "a"]);
    }

    #[test]
    fn frontier_trivial_cases() {
        assert_eq!(pareto_frontier(&[pt("x", 1.0, 1.0)]).unwrap(), vec!["x"]);
        assert_eq!(pareto_frontier(&[pt("x", 1.0, 1.0), pt("y", 1.0, 1.0)]).unwrap(), vec!["x", "y"]);
        assert_eq!(pareto_frontier(&[]), Err(AnalysisError::Empty));
        assert!(matches!(pareto_frontier(&[pt("n", f64::NAN, 1.0)]), Err(AnalysisError::NonFiniteRatio { .. })));
    }

    #[test]
    fn equal_tco_keeps_only_the_lowest_ghg() {
        let pts = [pt("a", 1.0, 0.5), pt("b", 1.0, 0.7), pt("c", 0.8, 0.9)];
        assert_eq!(pareto_frontier(&pts).unwrap(), vec!["c", "a"]);
    }

    #[test]
    fn health_curve_example() {
        let m: BTreeMap<String, f64> = [("A", 50.0), ("B", 30.0), ("C", 20.0)].map(|(k, v)| (k.to_string(), v)).into();
        let c = health_savings_curve(&m).unwrap();
        let got: Vec<(usize, &str, f64)> = c.iter().map(|p| (p.rank, p.route_id.as_str(), p.cumulative_savings_pct)).collect();
        assert_eq!(got, vec![(1, "A", 50.0), (2, "B", 80.0), (3, "C", 100.0)]);
    }

    #[test]
    fn health_curve_edges() {
        let one: BTreeMap<String, f64> = [("r".to_string(), 7.0)].into();
        assert_eq!(health_savings_curve(&one).unwrap()[0].cumulative_savings_pct, 100.0);
        let zero: BTreeMap<String, f64> = [("r".to_string(), 0.0), ("s".to_string(), 0.0)].into();
        assert_eq!(health_savings_curve(&zero), Err(AnalysisError::AllZeroImpacts));
        let ties: BTreeMap<String, f64> = [("b".to_string(), 1.0), ("a".to_string(), 1.0)].into();
        assert_eq!(health_savings_curve(&ties).unwrap()[0].route_id, "a");
    }

    fn brute_force(points: &[RouteRatios]) -> Vec<String> {
        let mut keep: Vec<&RouteRatios> =
            points.iter().filter(|p| !points.iter().any(|q| dominates(q, p))).collect();
        keep.sort_by(|a, b| {
            a.tco_ratio.total_cmp(&b.tco_ratio).then(a.ghg_ratio.total_cmp(&b.ghg_ratio)).then_with(|| a.route_id.cmp(&b.route_id))
        });
        keep.into_iter().map(|p| p.route_id.clone()).collect()
    }

    proptest! {
        #[test]
        fn frontier_matches_brute_force(raw in proptest::collection::vec((0u8..20, 0u8..20), 1..200)) {
            // Coarse grid so ties and duplicates are common.
            let pts: Vec<RouteRatios> = raw.iter().enumerate()
                .map(|(i, (t, g))| pt(&format!("r{i:03}"), *t as f64 / 10.0, *g as f64 / 10.0))
                .collect();
            let front = pareto_frontier(&pts).unwrap();
            prop_assert_eq!(&front, &brute_force(&pts));
            let on: std::collections::BTreeSet<&String> = front.iter().collect();
            for p in pts.iter().filter(|p| !on.contains(&p.route_id)) {
                prop_assert!(pts.iter().filter(|q| on.contains(&q.route_id)).any(|q| dominates(q, p)));
            }
        }

        #[test]
        fn curve_is_monotone_and_permutation_invariant(vals in proptest::collection::vec(0.0f64..1e6, 1..40)) {
            prop_assume!(vals.iter().any(|v| *v > 0.0));
            let m: BTreeMap<String, f64> = vals.iter().enumerate().map(|(i, v)| (format!("r{i:02}"), *v)).collect();
            let c = health_savings_curve(&m).unwrap();
            prop_assert!(c.windows(2).all(|w| w[1].cumulative_savings_pct >= w[0].cumulative_savings_pct));
            prop_assert_eq!(c.last().unwrap().cumulative_savings_pct, 100.0);
            let mut sorted = vals.clone();
            sorted.sort_by(|a, b| b.total_cmp(a));
            let relabeled: BTreeMap<String, f64> = sorted.iter().enumerate().map(|(i, v)| (format!("q{i:02}"), *v)).collect();
            let c2 = health_savings_curve(&relabeled).unwrap();
            for (a, b) in c.iter().zip(&c2) {
                prop_assert!((a.cumulative_savings_pct - b.cumulative_savings_pct).abs() < 1e-9);
            }
        }
    }
}
