//! A two-dimensional synthetic classification task with per-sector noise.
//!
//! Class `c` lives on a closed curve around the origin,
//! `r_c(φ) = radius + gap·c + wobble·sin(3φ + phase_c)`, and a datum at angle
//! `φ` is the curve point plus isotropic Gaussian noise whose scale depends on
//! the angular sector containing `φ`. Sectors with larger noise have higher
//! Bayes error, which makes them the hard buckets.

use std::f64::consts::{PI, TAU};

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::{Datum, Generator};
use crate::error::{Error, Result};
use crate::space::{Axis, BucketPartition, ParamPoint, ParameterSpace};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianTaskSpec {
    pub n_classes: usize,
    pub n_sectors: usize,
    pub radius: f64,
    pub gap: f64,
    /// Noise scale for each angular sector.
    pub noise: Vec<f64>,
    pub wobble: f64,
    pub geometry_seed: u64,
}

impl Default for GaussianTaskSpec {
    fn default() -> Self {
        GaussianTaskSpec {
            n_classes: 2,
            n_sectors: 8,
            radius: 1.0,
            gap: 1.0,
            noise: vec![0.1; 8],
            wobble: 0.0,
            geometry_seed: 0,
        }
    }
}

impl GaussianTaskSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n_classes < 2 {
            return Err(Error::contract("gaussian task needs at least two classes"));
        }
        if self.n_sectors == 0 {
            return Err(Error::contract("gaussian task needs at least one sector"));
        }
        if self.noise.len() != self.n_sectors {
            return Err(Error::contract(format!(
                "noise schedule has {} entries for {} sectors",
                self.noise.len(),
                self.n_sectors
            )));
        }
        if self.noise.iter().any(|s| !(s.is_finite() && *s >= 0.0)) {
            return Err(Error::contract("noise scales must be finite and non-negative"));
        }
        if ![self.radius, self.gap, self.wobble].iter().all(|v| v.is_finite()) {
            return Err(Error::contract("curve geometry must be finite"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct GaussianTask {
    spec: GaussianTaskSpec,
    partition: BucketPartition,
    phases: Vec<f64>,
}

impl GaussianTask {
    pub const CLASS_AXIS: usize = 0;
    pub const ANGLE_AXIS: usize = 1;

    pub fn new(spec: GaussianTaskSpec) -> Result<Self> {
        spec.validate()?;
        let space = ParameterSpace::new(vec![
            Axis::categorical("class", spec.n_classes)?,
            Axis::uniform_bins("angle", 0.0, TAU, spec.n_sectors)?,
        ])?;
        let mut geometry = ChaCha8Rng::seed_from_u64(spec.geometry_seed);
        let phases = (0..spec.n_classes)
            .map(|_| geometry.random_range(0.0..TAU))
            .collect();
        Ok(GaussianTask {
            partition: BucketPartition::new(space)?,
            spec,
            phases,
        })
    }

    pub fn spec(&self) -> &GaussianTaskSpec {
        &self.spec
    }

    pub fn curve_radius(&self, class: usize, angle: f64) -> f64 {
        self.spec.radius
            + self.spec.gap * class as f64
            + self.spec.wobble * (3.0 * angle + self.phases[class]).sin()
    }

    pub fn class_mean(&self, class: usize, angle: f64) -> [f64; 2] {
        let r = self.curve_radius(class, angle);
        [r * angle.cos(), r * angle.sin()]
    }

    pub fn sector_of(&self, angle: f64) -> usize {
        let a = angle.rem_euclid(TAU);
        ((a / TAU * self.spec.n_sectors as f64) as usize).min(self.spec.n_sectors - 1)
    }

    pub fn bucket(&self, class: usize, sector: usize) -> usize {
        class * self.spec.n_sectors + sector
    }

    /// Density of `x` under class `class` restricted to one sector (angle
    /// uniform within the sector), by midpoint quadrature over the angle.
    pub fn sector_density(&self, x: [f64; 2], class: usize, sector: usize, nodes: usize) -> f64 {
        let width = TAU / self.spec.n_sectors as f64;
        let start = width * sector as f64;
        let sigma = self.spec.noise[sector];
        let norm = 1.0 / (2.0 * PI * sigma * sigma);
        let mut acc = 0.0;
        for i in 0..nodes {
            let angle = start + width * (i as f64 + 0.5) / nodes as f64;
            let m = self.class_mean(class, angle);
            let d2 = (x[0] - m[0]).powi(2) + (x[1] - m[1]).powi(2);
            acc += (-0.5 * d2 / (sigma * sigma)).exp();
        }
        norm * acc / nodes as f64
    }

    /// Class-conditional density of `x` with the angle uniform over the circle.
    pub fn class_density(&self, x: [f64; 2], class: usize, nodes_per_sector: usize) -> f64 {
        let a = self.spec.n_sectors as f64;
        (0..self.spec.n_sectors)
            .map(|s| self.sector_density(x, class, s, nodes_per_sector))
            .sum::<f64>()
            / a
    }

    /// The Bayes-optimal decision for `x` under uniform class and angle priors.
    pub fn bayes_decision(&self, x: [f64; 2], nodes_per_sector: usize) -> usize {
        (0..self.spec.n_classes)
            .map(|c| (c, self.class_density(x, c, nodes_per_sector)))
            .fold((0, f64::NEG_INFINITY), |best, (c, p)| if p > best.1 { (c, p) } else { best })
            .0
    }
}

impl Generator for GaussianTask {
    fn partition(&self) -> &BucketPartition {
        &self.partition
    }

    fn n_classes(&self) -> usize {
        self.spec.n_classes
    }

    fn feature_dim(&self) -> usize {
        2
    }

    fn generate(&self, point: &ParamPoint, rng: &mut dyn RngCore) -> Result<Datum> {
        let bucket = self.partition.bucket_of(point)?;
        let class = point.category(Self::CLASS_AXIS).expect("checked by bucket_of");
        let angle = point.real(Self::ANGLE_AXIS).expect("checked by bucket_of");
        let sigma = self.spec.noise[self.sector_of(angle)];
        let m = self.class_mean(class, angle);
        let n0: f64 = StandardNormal.sample(rng);
        let n1: f64 = StandardNormal.sample(rng);
        Ok(Datum {
            features: vec![m[0] + sigma * n0, m[1] + sigma * n1],
            label: class,
            point: point.clone(),
            bucket,
        })
    }
}
