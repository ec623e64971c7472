use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Normal;
use serde::{Deserialize, Serialize};

use super::SurrogateError;

/// One Monte-Carlo operating scenario.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSample {
    pub passengers: u32,
    pub ambient_temp_c: f64,
    pub grade_rad: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MixtureComponent {
    pub mean_c: f64,
    pub stddev_c: f64,
    pub weight: f64,
}

/// Sampling distributions for the three scenario variables.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScenarioDistributions {
    /// Passenger counts are uniform over `0..=passenger_max`.
    pub passenger_max: u32,
    /// Gaussian mixture over ambient temperature.
    pub temp_mixture: Vec<MixtureComponent>,
    /// Grades are drawn uniformly from this list.
    pub grade_source: Vec<f64>,
}

impl ScenarioDistributions {
    /// Equal-weight mixture with one component per monthly mean temperature
    /// and a common standard deviation.
    pub fn monthly(passenger_max: u32, monthly_means_c: &[f64], stddev_c: f64, grade_source: Vec<f64>) -> Self {
        let w = 1.0 / monthly_means_c.len() as f64;
        ScenarioDistributions {
            passenger_max,
            temp_mixture: monthly_means_c
                .iter()
                .map(|&mean_c| MixtureComponent { mean_c, stddev_c, weight: w })
                .collect(),
            grade_source,
        }
    }

    pub fn validate(&self) -> Result<(), SurrogateError> {
        if self.grade_source.is_empty() {
            return Err(SurrogateError::EmptyGradeSource);
        }
        if let Some(g) = self.grade_source.iter().find(|g| !g.is_finite()) {
            return Err(SurrogateError::InvalidDistribution(format!("grade {g} is not finite")));
        }
        if self.temp_mixture.is_empty() {
            return Err(SurrogateError::InvalidDistribution("temperature mixture is empty".into()));
        }
        for c in &self.temp_mixture {
            if !(c.stddev_c > 0.0) || !c.mean_c.is_finite() {
                return Err(SurrogateError::InvalidDistribution(format!(
                    "mixture component N({}, {}) needs a finite mean and positive stddev",
                    c.mean_c, c.stddev_c
                )));
            }
            if !(c.weight >= 0.0) {
                return Err(SurrogateError::InvalidDistribution(format!("negative mixture weight {}", c.weight)));
            }
        }
        let total: f64 = self.temp_mixture.iter().map(|c| c.weight).sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(SurrogateError::InvalidDistribution(format!("mixture weights sum to {total}, not 1")));
        }
        Ok(())
    }

    pub fn grade_range(&self) -> Option<(f64, f64)> {
        self.grade_source.iter().fold(None, |acc, &g| match acc {
            None => Some((g, g)),
            Some((lo, hi)) => Some((lo.min(g), hi.max(g))),
        })
    }
}

/// Draws `n` scenarios; identical `(dists, n, seed)` give identical output.
pub fn sample_scenarios(dists: &ScenarioDistributions, n: usize, seed: u64) -> Result<Vec<ScenarioSample>, SurrogateError> {
    dists.validate()?;
    if n == 0 {
        return Err(SurrogateError::NoSamples);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let weights = WeightedIndex::new(dists.temp_mixture.iter().map(|c| c.weight))
        .map_err(|e| SurrogateError::InvalidDistribution(e.to_string()))?;
    let normals: Vec<Normal<f64>> = dists
        .temp_mixture
        .iter()
        .map(|c| Normal::new(c.mean_c, c.stddev_c).expect("validated above"))
        .collect();

    Ok((0..n)
        .map(|_| {
            let passengers = rng.random_range(0..=dists.passenger_max);
            let component = weights.sample(&mut rng);
            let ambient_temp_c = normals[component].sample(&mut rng);
            let grade_rad = dists.grade_source[rng.random_range(0..dists.grade_source.len())];
            ScenarioSample { passengers, ambient_temp_c, grade_rad }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dists(passenger_max: u32) -> ScenarioDistributions {
        ScenarioDistributions {
            passenger_max,
            temp_mixture: vec![MixtureComponent { mean_c: 11.0, stddev_c: 5.0, weight: 1.0 }],
            grade_source: vec![-0.01, 0.0, 0.02],
        }
    }

    #[test]
    fn reproducible_for_a_seed() {
        let a = sample_scenarios(&dists(40), 20_000, 7).unwrap();
        let b = sample_scenarios(&dists(40), 20_000, 7).unwrap();
        assert_eq!(a.len(), 20_000);
        assert!(a.iter().zip(&b).all(|(x, y)| x.passengers == y.passengers
            && x.ambient_temp_c.to_bits() == y.ambient_temp_c.to_bits()
            && x.grade_rad.to_bits() == y.grade_rad.to_bits()));
        let c = sample_scenarios(&dists(40), 100, 8).unwrap();
        assert_ne!(&a[..100], &c[..]);
    }

    #[test]
    fn empty_bus_only() {
        let s = sample_scenarios(&dists(0), 500, 1).unwrap();
        assert!(s.iter().all(|x| x.passengers == 0));
    }

    #[test]
    fn single_component_mean_within_standard_error() {
        let n = 20_000;
        let s = sample_scenarios(&dists(40), n, 3).unwrap();
        let mean = s.iter().map(|x| x.ambient_temp_c).sum::<f64>() / n as f64;
        assert!((mean - 11.0).abs() < 3.0 * 5.0 / (n as f64).sqrt(), "{mean}");
    }

    #[test]
    fn passengers_cover_the_full_range_uniformly() {
        let s = sample_scenarios(&dists(40), 41_000, 5).unwrap();
        let mut counts = [0usize; 41];
        for x in &s {
            counts[x.passengers as usize] += 1;
        }
        // Expected 1000 each; 5 sigma is about 160.
        assert!(counts.iter().all(|&c| (840..=1160).contains(&c)), "{counts:?}");
    }

    #[test]
    fn grades_come_from_the_source() {
        let d = dists(40);
        let s = sample_scenarios(&d, 1000, 2).unwrap();
        assert!(s.iter().all(|x| d.grade_source.contains(&x.grade_rad)));
        for g in &d.grade_source {
            assert!(s.iter().any(|x| x.grade_rad == *g));
        }
    }

    #[test]
    fn invalid_distributions() {
        let mut d = dists(40);
        d.grade_source.clear();
        assert!(matches!(sample_scenarios(&d, 10, 0), Err(SurrogateError::EmptyGradeSource)));
        let mut d = dists(40);
        d.temp_mixture[0].weight = 0.5;
        assert!(matches!(sample_scenarios(&d, 10, 0), Err(SurrogateError::InvalidDistribution(_))));
        let mut d = dists(40);
        d.temp_mixture[0].stddev_c = 0.0;
        assert!(sample_scenarios(&d, 10, 0).is_err());
        assert!(matches!(sample_scenarios(&dists(4), 0, 0), Err(SurrogateError::NoSamples)));
    }

    #[test]
    fn monthly_mixture_weights_sum_to_one() {
        let d = ScenarioDistributions::monthly(40, &[1.0; 12], 3.0, vec![0.0]);
        d.validate().unwrap();
        assert_eq!(d.temp_mixture.len(), 12);
    }
}
