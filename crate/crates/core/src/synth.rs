//! Synthetic bundles with known correspondences.
//!
//! A bundle is a set of copies of a centerline. Each copy is shifted as a
//! whole by a Gaussian spread (its place in the bundle cross-section) and
//! every vertex then carries isotropic Gaussian jitter. A subject pair is a source bundle plus a
//! target tractography holding a perturbed, displaced copy of every source
//! streamline (its twin) and a number of unrelated distractor streamlines.

use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::FRAC_PI_2;

use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::geometry::{Point3, Streamline, Tractography};
use crate::graph::Mapping;
use crate::rng::{self, ChaCha8Rng};

/// Quarter circle of radius 40 mm in the x–z plane, 20 points.
pub fn default_centerline() -> Streamline {
    arc(40.0, 20)
}

fn arc(radius: f64, n: usize) -> Streamline {
    let points = (0..n)
        .map(|k| {
            let t = FRAC_PI_2 * k as f64 / (n - 1).max(1) as f64;
            Point3::new(radius * libm::cos(t), 0.0, radius * libm::sin(t))
        })
        .collect();
    Streamline::new(points).expect("arc points are finite")
}

#[derive(Debug, Clone, PartialEq)]
pub struct BundleSpec {
    pub centerline: Streamline,
    pub n_streamlines: usize,
    /// Standard deviation of the per-vertex jitter, mm.
    pub jitter_sigma: f64,
    /// Standard deviation of a per-streamline rigid shift spreading the
    /// copies across the bundle cross-section, mm.
    pub spread_sigma: f64,
    pub seed: u64,
    /// Translation applied to the whole bundle.
    pub offset: Point3,
}

impl Default for BundleSpec {
    fn default() -> Self {
        BundleSpec {
            centerline: default_centerline(),
            n_streamlines: 60,
            jitter_sigma: 1.0,
            spread_sigma: DEFAULT_SPREAD_SIGMA,
            seed: 42,
            offset: Point3::ORIGIN,
        }
    }
}

impl BundleSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n_streamlines == 0 {
            return Err(Error::InvalidParameter(
                "bundle needs at least one streamline".into(),
            ));
        }
        if !(self.jitter_sigma.is_finite() && self.jitter_sigma >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "jitter sigma must be >= 0, got {}",
                self.jitter_sigma
            )));
        }
        if !(self.spread_sigma.is_finite() && self.spread_sigma >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "spread sigma must be >= 0, got {}",
                self.spread_sigma
            )));
        }
        if !self.offset.is_finite() {
            return Err(Error::InvalidParameter(
                "bundle offset must be finite".into(),
            ));
        }
        Ok(())
    }
}

fn jitter(s: &Streamline, sigma: f64, shift: Point3, rng: &mut ChaCha8Rng) -> Result<Streamline> {
    if sigma == 0.0 {
        return s.map_points(|p| *p + shift);
    }
    let normal = Normal::new(0.0, sigma).map_err(|e| Error::InvalidParameter(format!("{e}")))?;
    s.map_points(|p| {
        let noise = Point3::new(normal.sample(rng), normal.sample(rng), normal.sample(rng));
        *p + noise + shift
    })
}

/// `n_streamlines` spread and jittered copies of the centerline, shifted by
/// `offset`.
pub fn generate_bundle(spec: &BundleSpec) -> Result<Tractography> {
    spec.validate()?;
    let mut rng = rng::seeded(spec.seed);
    let spread =
        Normal::new(0.0, spec.spread_sigma).map_err(|e| Error::InvalidParameter(format!("{e}")))?;
    let streamlines = (0..spec.n_streamlines)
        .map(|_| {
            let shift = if spec.spread_sigma > 0.0 {
                Point3::new(
                    spread.sample(&mut rng),
                    spread.sample(&mut rng),
                    spread.sample(&mut rng),
                )
            } else {
                Point3::ORIGIN
            };
            jitter(
                &spec.centerline,
                spec.jitter_sigma,
                spec.offset + shift,
                &mut rng,
            )
        })
        .collect::<Result<Vec<_>>>()?;
    Tractography::new(streamlines)
}

/// Source tract, target tractography and the twin correspondence.
#[derive(Debug, Clone, PartialEq)]
pub struct SubjectPair {
    pub source: Tractography,
    pub target: Tractography,
    /// Indices of the homologous tract inside `target`.
    pub target_tract: Vec<usize>,
    /// Source streamline `i` corresponds to `target` streamline
    /// `ground_truth.target(i)`.
    pub ground_truth: Mapping,
}

/// Streamlines per distractor bundle.
pub const DISTRACTOR_BUNDLE_SIZE: usize = 25;

/// Distance from the homologous bundle to the nearest distractor bundle, mm.
pub const DISTRACTOR_MIN_DISTANCE: f64 = 25.0;

/// Default per-streamline spread, mm.
pub const DEFAULT_SPREAD_SIGMA: f64 = 4.0;

/// Ratio of the twin re-jitter to the bundle jitter.
pub const TWIN_JITTER_RATIO: f64 = 0.25;

/// Builds a subject pair.
///
/// The source is `generate_bundle(spec)`. Each twin in the target is its
/// source streamline with fresh jitter of `TWIN_JITTER_RATIO · sigma`,
/// displaced by `displacement`. Distractors come in bundles of
/// [`DISTRACTOR_BUNDLE_SIZE`] jittered copies of the centerline placed at
/// least [`DISTRACTOR_MIN_DISTANCE`] mm away from the homologous bundle.
/// Twins and distractors are interleaved in a seeded random order, so target
/// indices carry no information.
pub fn generate_subject_pair(
    spec: &BundleSpec,
    distractors: usize,
    displacement: Point3,
) -> Result<SubjectPair> {
    if !displacement.is_finite() {
        return Err(Error::InvalidParameter(
            "displacement must be finite".into(),
        ));
    }
    let source = generate_bundle(spec)?;
    let n = spec.n_streamlines;
    let mut twin_rng = rng::seeded(rng::sub_seed(spec.seed, "twin"));
    let twin_sigma = spec.jitter_sigma * TWIN_JITTER_RATIO;
    let mut pool: Vec<(Option<usize>, Streamline)> = Vec::with_capacity(n + distractors);
    for (i, s) in source.streamlines().iter().enumerate() {
        pool.push((Some(i), jitter(s, twin_sigma, displacement, &mut twin_rng)?));
    }

    let mut placed = 0;
    let mut bundle = 0u64;
    while placed < distractors {
        let size = DISTRACTOR_BUNDLE_SIZE.min(distractors - placed);
        // bundles on a widening spiral around the homologous one
        let angle = 2.399_963_229_728_653 * bundle as f64;
        let radius = DISTRACTOR_MIN_DISTANCE + 5.0 * bundle as f64;
        let offset = displacement
            + spec.offset
            + Point3::new(radius * libm::cos(angle), radius * libm::sin(angle), 0.0);
        let extra = generate_bundle(&BundleSpec {
            centerline: spec.centerline.clone(),
            n_streamlines: size,
            jitter_sigma: spec.jitter_sigma,
            spread_sigma: spec.spread_sigma,
            seed: rng::sub_seed(spec.seed ^ bundle, "distractor"),
            offset,
        })?;
        pool.extend(extra.into_streamlines().into_iter().map(|s| (None, s)));
        placed += size;
        bundle += 1;
    }

    let mut order_rng = rng::seeded(rng::sub_seed(spec.seed, "order"));
    shuffle(&mut pool, &mut order_rng);

    let mut truth = alloc::vec![0; n];
    let mut target_tract = Vec::with_capacity(n);
    let mut streamlines = Vec::with_capacity(pool.len());
    for (j, (twin_of, s)) in pool.into_iter().enumerate() {
        if let Some(i) = twin_of {
            truth[i] = j;
            target_tract.push(j);
        }
        streamlines.push(s);
    }
    let m = streamlines.len();
    Ok(SubjectPair {
        source: source.with_name("source"),
        target: Tractography::new(streamlines)?.with_name("target"),
        target_tract,
        ground_truth: Mapping::new(truth, m)?,
    })
}

fn shuffle<T>(items: &mut [T], rng: &mut ChaCha8Rng) {
    for i in (1..items.len()).rev() {
        let j = rng::index(rng, i + 1);
        items.swap(i, j);
    }
}
