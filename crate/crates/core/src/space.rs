//! Parameter spaces and their bucket partitions.
//!
//! A [`ParameterSpace`] is an ordered list of axes. Categorical axes put each
//! value in its own bin; continuous axes are cut by explicit edges into
//! half-open bins `[e_i, e_{i+1})`, with the last bin closed at `hi`. A
//! [`BucketPartition`] flattens per-axis bin indices into one bucket id in
//! row-major order (the last axis varies fastest).

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AxisKind {
    Categorical { n_values: usize },
    Continuous { edges: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub name: String,
    pub kind: AxisKind,
}

impl Axis {
    pub fn categorical(name: impl Into<String>, n_values: usize) -> Result<Self> {
        let name = name.into();
        if n_values == 0 {
            return Err(Error::Domain {
                axis: name,
                message: "categorical axis needs at least one value".into(),
            });
        }
        Ok(Axis {
            name,
            kind: AxisKind::Categorical { n_values },
        })
    }

    /// A continuous axis over `[edges[0], edges[last]]`.
    pub fn continuous(name: impl Into<String>, edges: Vec<f64>) -> Result<Self> {
        let name = name.into();
        if edges.len() < 2 {
            return Err(Error::Domain {
                axis: name,
                message: "continuous axis needs at least two edges".into(),
            });
        }
        if edges.iter().any(|e| !e.is_finite()) {
            return Err(Error::Domain {
                axis: name,
                message: "edges must be finite".into(),
            });
        }
        if edges.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Domain {
                axis: name,
                message: "edges must be strictly increasing".into(),
            });
        }
        Ok(Axis {
            name,
            kind: AxisKind::Continuous { edges },
        })
    }

    /// `bins` equal-width bins over `[lo, hi]`.
    pub fn uniform_bins(name: impl Into<String>, lo: f64, hi: f64, bins: usize) -> Result<Self> {
        let name = name.into();
        if bins == 0 || !(lo < hi) {
            return Err(Error::Domain {
                axis: name,
                message: format!("cannot split [{lo}, {hi}] into {bins} bins"),
            });
        }
        let width = hi - lo;
        let mut edges: Vec<f64> = (0..bins)
            .map(|i| lo + width * i as f64 / bins as f64)
            .collect();
        edges.push(hi);
        Axis::continuous(name, edges)
    }

    pub fn bin_count(&self) -> usize {
        match &self.kind {
            AxisKind::Categorical { n_values } => *n_values,
            AxisKind::Continuous { edges } => edges.len() - 1,
        }
    }

    pub fn bin_of(&self, coord: Coord) -> Result<usize> {
        match (&self.kind, coord) {
            (AxisKind::Categorical { n_values }, Coord::Category(c)) => {
                if c < *n_values {
                    Ok(c)
                } else {
                    Err(self.domain_error(format!("category {c} not in [0, {n_values})")))
                }
            }
            (AxisKind::Continuous { edges }, Coord::Real(v)) => {
                let lo = edges[0];
                let hi = edges[edges.len() - 1];
                if !(lo..=hi).contains(&v) {
                    return Err(self.domain_error(format!("value {v} outside [{lo}, {hi}]")));
                }
                // number of edges <= v, minus one; v == hi lands in the last bin
                let bin = edges.partition_point(|e| *e <= v) - 1;
                Ok(bin.min(edges.len() - 2))
            }
            (AxisKind::Categorical { .. }, Coord::Real(v)) => {
                Err(self.domain_error(format!("expected a category, got real {v}")))
            }
            (AxisKind::Continuous { .. }, Coord::Category(c)) => {
                Err(self.domain_error(format!("expected a real, got category {c}")))
            }
        }
    }

    /// Fraction of the axis covered by `bin`.
    pub fn bin_fraction(&self, bin: usize) -> f64 {
        match &self.kind {
            AxisKind::Categorical { n_values } => 1.0 / *n_values as f64,
            AxisKind::Continuous { edges } => {
                let total = edges[edges.len() - 1] - edges[0];
                (edges[bin + 1] - edges[bin]) / total
            }
        }
    }

    fn domain_error(&self, message: String) -> Error {
        Error::Domain {
            axis: self.name.clone(),
            message,
        }
    }
}

/// Draws uniformly from `[lo, hi)`; a zero-width interval returns `lo`.
pub fn uniform_in_interval<R: Rng + ?Sized>(lo: f64, hi: f64, rng: &mut R) -> f64 {
    if hi <= lo {
        return lo;
    }
    let u: f64 = rng.random();
    let v = lo + (hi - lo) * u;
    if v >= hi {
        hi.next_down()
    } else {
        v
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Coord {
    Category(usize),
    Real(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamPoint {
    pub coords: Vec<Coord>,
}

impl ParamPoint {
    pub fn new(coords: Vec<Coord>) -> Self {
        ParamPoint { coords }
    }

    pub fn category(&self, axis: usize) -> Option<usize> {
        match self.coords.get(axis) {
            Some(Coord::Category(c)) => Some(*c),
            _ => None,
        }
    }

    pub fn real(&self, axis: usize) -> Option<f64> {
        match self.coords.get(axis) {
            Some(Coord::Real(v)) => Some(*v),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParameterSpace {
    axes: Vec<Axis>,
}

impl ParameterSpace {
    pub fn new(axes: Vec<Axis>) -> Result<Self> {
        if axes.is_empty() {
            return Err(Error::contract("parameter space needs at least one axis"));
        }
        Ok(ParameterSpace { axes })
    }

    pub fn axes(&self) -> &[Axis] {
        &self.axes
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BucketPartition {
    space: ParameterSpace,
    bins: Vec<usize>,
    strides: Vec<usize>,
    count: usize,
}

impl BucketPartition {
    pub fn new(space: ParameterSpace) -> Result<Self> {
        let bins: Vec<usize> = space.axes.iter().map(Axis::bin_count).collect();
        let mut strides = vec![1usize; bins.len()];
        let mut count = 1usize;
        for i in (0..bins.len()).rev() {
            strides[i] = count;
            count = count
                .checked_mul(bins[i])
                .ok_or_else(|| Error::contract("bucket count overflows usize"))?;
        }
        Ok(BucketPartition {
            space,
            bins,
            strides,
            count,
        })
    }

    pub fn space(&self) -> &ParameterSpace {
        &self.space
    }

    /// Number of buckets K.
    pub fn len(&self) -> usize {
        self.count
    }

    pub fn is_empty(&self) -> bool {
        self.count == 0
    }

    pub fn bins_per_axis(&self) -> &[usize] {
        &self.bins
    }

    pub fn bucket_of(&self, point: &ParamPoint) -> Result<usize> {
        let axes = &self.space.axes;
        if point.coords.len() != axes.len() {
            return Err(Error::contract(format!(
                "point has {} coordinates, space has {} axes",
                point.coords.len(),
                axes.len()
            )));
        }
        let mut k = 0;
        for ((axis, coord), stride) in axes.iter().zip(&point.coords).zip(&self.strides) {
            k += axis.bin_of(*coord)? * stride;
        }
        Ok(k)
    }

    pub fn bucket_from_bins(&self, bins: &[usize]) -> Result<usize> {
        if bins.len() != self.bins.len() {
            return Err(Error::contract("bin tuple arity does not match the space"));
        }
        let mut k = 0;
        for ((b, n), stride) in bins.iter().zip(&self.bins).zip(&self.strides) {
            if b >= n {
                return Err(Error::contract(format!("bin {b} out of range {n}")));
            }
            k += b * stride;
        }
        Ok(k)
    }

    pub fn bins_of(&self, k: usize) -> Result<Vec<usize>> {
        self.check_index(k)?;
        Ok(self
            .strides
            .iter()
            .zip(&self.bins)
            .map(|(stride, n)| (k / stride) % n)
            .collect())
    }

    pub fn check_index(&self, k: usize) -> Result<()> {
        if k < self.count {
            Ok(())
        } else {
            Err(Error::BucketIndex {
                index: k,
                count: self.count,
            })
        }
    }

    pub fn uniform_in_bucket<R: Rng + ?Sized>(&self, k: usize, rng: &mut R) -> Result<ParamPoint> {
        let bins = self.bins_of(k)?;
        let coords = self
            .space
            .axes
            .iter()
            .zip(bins)
            .map(|(axis, bin)| match &axis.kind {
                AxisKind::Categorical { .. } => Coord::Category(bin),
                AxisKind::Continuous { edges } => {
                    Coord::Real(uniform_in_interval(edges[bin], edges[bin + 1], rng))
                }
            })
            .collect();
        Ok(ParamPoint { coords })
    }

    /// Probability that a uniform draw over the whole space lands in each bucket.
    pub fn volume_prior(&self) -> Vec<f64> {
        let mut prior: Vec<f64> = (0..self.count)
            .map(|k| {
                self.space
                    .axes
                    .iter()
                    .zip(&self.strides)
                    .zip(&self.bins)
                    .map(|((axis, stride), n)| axis.bin_fraction((k / stride) % n))
                    .product()
            })
            .collect();
        let total: f64 = prior.iter().sum();
        prior.iter_mut().for_each(|p| *p /= total);
        prior
    }

    /// Text descriptor, e.g. `class:cat(10) x angle:cont(0,1.5,3)`.
    pub fn descriptor(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for BucketPartition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, axis) in self.space.axes.iter().enumerate() {
            if i > 0 {
                f.write_str(" x ")?;
            }
            match &axis.kind {
                AxisKind::Categorical { n_values } => write!(f, "{}:cat({n_values})", axis.name)?,
                AxisKind::Continuous { edges } => {
                    write!(f, "{}:cont(", axis.name)?;
                    for (j, e) in edges.iter().enumerate() {
                        if j > 0 {
                            f.write_str(",")?;
                        }
                        write!(f, "{e:?}")?;
                    }
                    f.write_str(")")?;
                }
            }
        }
        Ok(())
    }
}

impl FromStr for BucketPartition {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = |msg: String| Error::contract(format!("partition descriptor: {msg}"));
        let mut axes = Vec::new();
        for part in s.split(" x ") {
            let (name, rest) = part
                .trim()
                .split_once(':')
                .ok_or_else(|| bad(format!("missing `:` in `{part}`")))?;
            let inner = |prefix: &str| {
                rest.strip_prefix(prefix)
                    .and_then(|r| r.strip_suffix(')'))
                    .map(str::to_owned)
            };
            if let Some(n) = inner("cat(") {
                let n = n.parse().map_err(|_| bad(format!("bad category count `{n}`")))?;
                axes.push(Axis::categorical(name, n)?);
            } else if let Some(list) = inner("cont(") {
                let edges = list
                    .split(',')
                    .map(|e| e.trim().parse::<f64>())
                    .collect::<std::result::Result<Vec<_>, _>>()
                    .map_err(|_| bad(format!("bad edge list `{list}`")))?;
                axes.push(Axis::continuous(name, edges)?);
            } else {
                return Err(bad(format!("unknown axis kind in `{part}`")));
            }
        }
        BucketPartition::new(ParameterSpace::new(axes)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rotation_axis() -> Axis {
        Axis::continuous("rotation", vec![-15.0, -7.5, 0.0, 7.5, 15.0]).unwrap()
    }

    fn partition(axes: Vec<Axis>) -> BucketPartition {
        BucketPartition::new(ParameterSpace::new(axes).unwrap()).unwrap()
    }

    #[test]
    fn single_categorical_axis_is_identity() {
        let p = partition(vec![Axis::categorical("class", 10).unwrap()]);
        let point = ParamPoint::new(vec![Coord::Category(3)]);
        assert_eq!(p.bucket_of(&point).unwrap(), 3);
    }

    #[test]
    fn class_by_bin_flattening_is_row_major_and_bijective() {
        let p = partition(vec![
            Axis::categorical("class", 10).unwrap(),
            Axis::categorical("bin", 16).unwrap(),
        ]);
        assert_eq!(p.len(), 160);
        let point = ParamPoint::new(vec![Coord::Category(7), Coord::Category(4)]);
        assert_eq!(p.bucket_of(&point).unwrap(), 116);

        let mut seen = vec![false; 160];
        for c in 0..10 {
            for b in 0..16 {
                let k = p
                    .bucket_of(&ParamPoint::new(vec![Coord::Category(c), Coord::Category(b)]))
                    .unwrap();
                assert!(!seen[k], "bucket {k} hit twice");
                seen[k] = true;
                assert_eq!(p.bins_of(k).unwrap(), vec![c, b]);
            }
        }
        assert!(seen.iter().all(|s| *s));
    }

    #[test]
    fn last_continuous_bin_is_closed() {
        let axis = rotation_axis();
        assert_eq!(axis.bin_of(Coord::Real(7.5)).unwrap(), 3);
        assert_eq!(axis.bin_of(Coord::Real(15.0)).unwrap(), 3);
        assert_eq!(axis.bin_of(Coord::Real(-15.0)).unwrap(), 0);
        assert_eq!(axis.bin_of(Coord::Real(0.0)).unwrap(), 2);
        assert_eq!(axis.bin_of(Coord::Real(-0.0001)).unwrap(), 1);
    }

    #[test]
    fn out_of_domain_names_the_axis() {
        let p = partition(vec![rotation_axis()]);
        let err = p.bucket_of(&ParamPoint::new(vec![Coord::Real(15.5)])).unwrap_err();
        match err {
            Error::Domain { axis, .. } => assert_eq!(axis, "rotation"),
            other => panic!("unexpected {other:?}"),
        }
        assert!(p.bucket_of(&ParamPoint::new(vec![Coord::Real(f64::NAN)])).is_err());
        assert!(p.bucket_of(&ParamPoint::new(vec![Coord::Category(0)])).is_err());
    }

    #[test]
    fn invalid_axes_are_rejected() {
        assert!(Axis::categorical("c", 0).is_err());
        assert!(Axis::continuous("x", vec![0.0]).is_err());
        assert!(Axis::continuous("x", vec![0.0, 0.0]).is_err());
        assert!(Axis::continuous("x", vec![0.0, 2.0, 1.0]).is_err());
        assert!(ParameterSpace::new(vec![]).is_err());
    }

    #[test]
    fn zero_width_interval_returns_its_endpoint() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for _ in 0..10 {
            assert_eq!(uniform_in_interval(0.0, 0.0, &mut rng), 0.0);
        }
    }

    #[test]
    fn uniform_in_bucket_mean_within_three_standard_errors() {
        let p = partition(vec![rotation_axis()]);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let n = 100_000;
        let mut sum = 0.0;
        for _ in 0..n {
            let v = p.uniform_in_bucket(0, &mut rng).unwrap().real(0).unwrap();
            assert!((-15.0..-7.5).contains(&v));
            sum += v;
        }
        let mean = sum / n as f64;
        let se = 7.5 / (12.0 * n as f64).sqrt();
        assert!((mean + 11.25).abs() < 3.0 * se, "mean {mean}");
    }

    #[test]
    fn uniform_in_bucket_rejects_bad_index() {
        let p = partition(vec![rotation_axis()]);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(matches!(
            p.uniform_in_bucket(4, &mut rng),
            Err(Error::BucketIndex { index: 4, count: 4 })
        ));
    }

    #[test]
    fn round_trip_over_mixed_space() {
        let p = partition(vec![
            Axis::categorical("class", 3).unwrap(),
            Axis::continuous("x", vec![0.0, 1.0, 4.0]).unwrap(),
            rotation_axis(),
        ]);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..10_000 {
            let k = rng.random_range(0..p.len());
            let point = p.uniform_in_bucket(k, &mut rng).unwrap();
            assert_eq!(p.bucket_of(&point).unwrap(), k);
        }
    }

    #[test]
    fn volume_prior_examples() {
        let p = partition(vec![
            Axis::categorical("class", 10).unwrap(),
            Axis::categorical("bin", 16).unwrap(),
        ]);
        assert!(p.volume_prior().iter().all(|v| (v - 1.0 / 160.0).abs() < 1e-15));

        let p = partition(vec![rotation_axis()]);
        assert_eq!(p.volume_prior(), vec![0.25; 4]);

        let p = partition(vec![Axis::continuous("x", vec![0.0, 1.0, 4.0]).unwrap()]);
        let prior = p.volume_prior();
        assert!((prior[0] - 0.25).abs() < 1e-15 && (prior[1] - 0.75).abs() < 1e-15);
    }

    #[test]
    fn volume_prior_is_invariant_to_axis_order() {
        let a = Axis::continuous("x", vec![0.0, 1.0, 4.0]).unwrap();
        let b = Axis::categorical("c", 3).unwrap();
        let ab = partition(vec![a.clone(), b.clone()]);
        let ba = partition(vec![b, a]);
        let (pa, pb) = (ab.volume_prior(), ba.volume_prior());
        for k in 0..ab.len() {
            let bins = ab.bins_of(k).unwrap();
            let swapped = ba.bucket_from_bins(&[bins[1], bins[0]]).unwrap();
            assert!((pa[k] - pb[swapped]).abs() < 1e-15);
        }
    }

    #[test]
    fn descriptor_round_trips() {
        let p = partition(vec![
            Axis::categorical("class", 10).unwrap(),
            Axis::uniform_bins("angle", 0.0, std::f64::consts::TAU, 8).unwrap(),
        ]);
        let text = p.descriptor();
        let back: BucketPartition = text.parse().unwrap();
        assert_eq!(back, p);
        assert!("class:dog(3)".parse::<BucketPartition>().is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;
        use rand::Rng;

        fn edges() -> impl Strategy<Value = Vec<f64>> {
            (proptest::collection::vec(0.01f64..5.0, 1..6), -10.0f64..10.0).prop_map(
                |(widths, start)| {
                    let mut e = vec![start];
                    for w in widths {
                        let last = *e.last().unwrap();
                        e.push(last + w);
                    }
                    e
                },
            )
        }

        proptest! {
            #[test]
            fn every_point_maps_to_exactly_one_bucket(
                e1 in edges(), n_cat in 1usize..5, seed in any::<u64>()
            ) {
                let p = partition(vec![
                    Axis::continuous("a", e1.clone()).unwrap(),
                    Axis::categorical("c", n_cat).unwrap(),
                ]);
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let (lo, hi) = (e1[0], *e1.last().unwrap());
                for _ in 0..200 {
                    let v = lo + (hi - lo) * rng.random::<f64>();
                    let c = rng.random_range(0..n_cat);
                    let point = ParamPoint::new(vec![Coord::Real(v), Coord::Category(c)]);
                    let k = p.bucket_of(&point).unwrap();
                    let bins = p.bins_of(k).unwrap();
                    // the containing bin is the only one whose interval holds v
                    let holders: Vec<usize> = (0..e1.len() - 1)
                        .filter(|&i| {
                            let last = i == e1.len() - 2;
                            e1[i] <= v && (v < e1[i + 1] || (last && v <= e1[i + 1]))
                        })
                        .collect();
                    prop_assert_eq!(holders, vec![bins[0]]);
                    prop_assert_eq!(bins[1], c);
                }
                let total: f64 = p.volume_prior().iter().sum();
                prop_assert!((total - 1.0).abs() < 1e-12);
            }
        }
    }
}
