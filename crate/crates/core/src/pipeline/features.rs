use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::PipelineError;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FeatureCatalog {
    pub optimization_feature: Vec<String>,
    pub memory_access: Vec<String>,
    pub data_structure: Vec<String>,
    /// Inclusive `[min, max]`.
    pub kernel_count: (u32, u32),
}

impl Default for FeatureCatalog {
    fn default() -> Self {
        Self::from_toml(include_str!("../../data/catalog.toml")).expect("bundled catalog is valid")
    }
}

impl FeatureCatalog {
    pub fn from_toml(text: &str) -> Result<Self, PipelineError> {
        let catalog: Self = toml::from_str(text).map_err(|e| PipelineError::InvalidCatalog(e.to_string()))?;
        catalog.validate()?;
        Ok(catalog)
    }

    pub fn load(path: &Path) -> Result<Self, PipelineError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| PipelineError::InvalidCatalog(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn validate(&self) -> Result<(), PipelineError> {
        for (axis, entries) in [
            ("optimization_feature", &self.optimization_feature),
            ("memory_access", &self.memory_access),
            ("data_structure", &self.data_structure),
        ] {
            if entries.is_empty() {
                return Err(PipelineError::EmptyCatalog(axis.to_string()));
            }
        }
        let (lo, hi) = self.kernel_count;
        if lo == 0 || lo > hi {
            return Err(PipelineError::EmptyCatalog(format!("kernel_count [{lo}, {hi}]")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FeatureSelection {
    pub optimization_feature: String,
    pub memory_access: String,
    pub data_structure: String,
    pub kernel_count: u32,
    pub seed: u64,
}

impl FeatureSelection {
    /// Requirement lines appended to the REQS binding.
    pub fn render(&self) -> String {
        format!(
            "Additional requirements for this test case:\n\
             - SYCL optimization feature: {}\n\
             - Memory access technique: {}\n\
             - Data structure: {}\n\
             - Number of device kernels: {}",
            self.optimization_feature, self.memory_access, self.data_structure, self.kernel_count
        )
    }
}

/// One independent uniform draw per axis, in a fixed axis order.
pub fn sample_features(catalog: &FeatureCatalog, seed: u64) -> Result<FeatureSelection, PipelineError> {
    catalog.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pick = |axis: &[String]| axis[rng.gen_range(0..axis.len())].clone();
    let optimization_feature = pick(&catalog.optimization_feature);
    let memory_access = pick(&catalog.memory_access);
    let data_structure = pick(&catalog.data_structure);
    let kernel_count = rng.gen_range(catalog.kernel_count.0..=catalog.kernel_count.1);
    Ok(FeatureSelection {
        optimization_feature,
        memory_access,
        data_structure,
        kernel_count,
        seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeMap;

    #[test]
    fn default_catalog_loads() {
        let c = FeatureCatalog::default();
        assert_eq!(c.optimization_feature.len(), 6);
        assert_eq!(c.memory_access.len(), 4);
        assert_eq!(c.data_structure.len(), 4);
        assert_eq!(c.kernel_count, (1, 4));
    }

    #[test]
    fn single_entry_axes_are_forced() {
        let c = FeatureCatalog {
            optimization_feature: vec!["a".into()],
            memory_access: vec!["b".into()],
            data_structure: vec!["c".into()],
            kernel_count: (2, 2),
        };
        for seed in 0..20 {
            let s = sample_features(&c, seed).unwrap();
            assert_eq!((s.optimization_feature.as_str(), s.memory_access.as_str(), s.data_structure.as_str(), s.kernel_count), ("a", "b", "c", 2));
        }
    }

    #[test]
    fn same_seed_same_selection() {
        let c = FeatureCatalog::default();
        assert_eq!(sample_features(&c, 99).unwrap(), sample_features(&c, 99).unwrap());
    }

    #[test]
    fn empty_axis_is_rejected() {
        let mut c = FeatureCatalog::default();
        c.memory_access.clear();
        assert!(matches!(sample_features(&c, 1), Err(PipelineError::EmptyCatalog(a)) if a == "memory_access"));
        let mut c = FeatureCatalog::default();
        c.kernel_count = (3, 2);
        assert!(sample_features(&c, 1).is_err());
    }

    #[test]
    fn four_entry_axis_is_uniform() {
        // Binomial(10_000, 1/4): sd ≈ 43.3, so ±150 is about 3.5 sigma.
        let c = FeatureCatalog::default();
        let mut counts: BTreeMap<String, u32> = BTreeMap::new();
        let mut kernels = [0u32; 4];
        for seed in 0..10_000u64 {
            let s = sample_features(&c, crate::util::derive_seed(seed, &["freq"])).unwrap();
            *counts.entry(s.memory_access).or_default() += 1;
            kernels[(s.kernel_count - 1) as usize] += 1;
        }
        assert_eq!(counts.len(), 4);
        for n in counts.values().chain(kernels.iter()) {
            assert!((2350..=2650).contains(n), "{counts:?} {kernels:?}");
        }
    }
}
