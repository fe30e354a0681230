//! Ground-truth cycle aging data.
//!
//! [`cycle_degradation`] is a fixed closed-form aging law over the five cycle
//! features. It stands in for laboratory or simulated aging tests so that
//! every training and accuracy number downstream is reproducible from a seed.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const FEATURE_COUNT: usize = 5;
pub const FEATURE_NAMES: [&str; FEATURE_COUNT] = ["soc_start", "dod", "temp_c", "c_rate", "soh"];
pub const CSV_HEADER: [&str; 6] = ["soc_start", "dod", "temp_c", "c_rate", "soh", "delta_soh"];

// Aging-law constants.
pub const AGING_SCALE: f64 = 2.5e-5;
pub const DOD_EXPONENT: f64 = 1.6;
pub const TEMP_COEFF: f64 = 0.06;
pub const CRATE_COEFF: f64 = 0.3;
pub const SOH_COEFF: f64 = 1.0;
pub const SOC_COEFF: f64 = 2.0;
pub const REFERENCE_TEMP_C: f64 = 25.0;

// Keeps the split stream independent of the sampling stream for the same seed.
const SPLIT_SALT: u64 = 0x9e37_79b9_7f4a_7c15;

/// One charge/discharge cycle as seen by the degradation model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CycleFeatures {
    pub soc_start: f64,
    pub dod: f64,
    pub temp_c: f64,
    pub c_rate: f64,
    pub soh: f64,
}

impl CycleFeatures {
    pub fn to_array(&self) -> [f64; FEATURE_COUNT] {
        [self.soc_start, self.dod, self.temp_c, self.c_rate, self.soh]
    }

    pub fn from_array(v: [f64; FEATURE_COUNT]) -> Self {
        CycleFeatures {
            soc_start: v[0],
            dod: v[1],
            temp_c: v[2],
            c_rate: v[3],
            soh: v[4],
        }
    }

    /// Checks the domain of a physical cycle.
    pub fn validate(&self) -> Result<()> {
        let v = self.to_array();
        if let Some(i) = v.iter().position(|x| !x.is_finite()) {
            return Err(Error::InputDomain(format!("{} is not finite", FEATURE_NAMES[i])));
        }
        if !(0.0..=1.0).contains(&self.soc_start) {
            return Err(Error::InputDomain(format!("soc_start {} not in [0, 1]", self.soc_start)));
        }
        if !(self.dod > 0.0 && self.dod <= 1.0) {
            return Err(Error::InputDomain(format!("dod {} not in (0, 1]", self.dod)));
        }
        if self.soc_start - self.dod < 0.0 {
            return Err(Error::InputDomain(format!(
                "cycle discharges below zero SOC (soc_start {} < dod {})",
                self.soc_start, self.dod
            )));
        }
        if self.c_rate <= 0.0 {
            return Err(Error::InputDomain(format!("c_rate {} must be positive", self.c_rate)));
        }
        if !(self.soh > 0.0 && self.soh <= 1.0) {
            return Err(Error::InputDomain(format!("soh {} not in (0, 1]", self.soh)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DegradationSample {
    pub features: CycleFeatures,
    pub delta_soh: f64,
}

/// SOH lost over one cycle.
///
/// `A · dod^p · e^{α(T−25)} · (1 + β·max(0, C−1)) · (1 + γ(1−SOH)) · (1 + δ(soc_mid − ½)²)`
/// with `soc_mid = soc_start − dod/2`.
pub fn cycle_degradation(f: &CycleFeatures) -> Result<f64> {
    f.validate()?;
    let soc_mid = f.soc_start - f.dod / 2.0;
    let value = AGING_SCALE
        * f.dod.powf(DOD_EXPONENT)
        * (TEMP_COEFF * (f.temp_c - REFERENCE_TEMP_C)).exp()
        * (1.0 + CRATE_COEFF * (f.c_rate - 1.0).max(0.0))
        * (1.0 + SOH_COEFF * (1.0 - f.soh))
        * (1.0 + SOC_COEFF * (soc_mid - 0.5).powi(2));
    Ok(value)
}

/// Closed interval used both for sampling ranges and affine normalization.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Span {
    pub lo: f64,
    pub hi: f64,
}

impl Span {
    pub const fn new(lo: f64, hi: f64) -> Self {
        Span { lo, hi }
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.lo && x <= self.hi
    }
}

/// Per-feature affine maps onto `[0, 1]` plus the target scale.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "NormalizationFile", try_from = "NormalizationFile")]
pub struct Normalization {
    pub features: [Span; FEATURE_COUNT],
    /// `delta_soh` range; `lo` is always 0 so a zero network predicts zero aging.
    pub target: Span,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NormalizationFile {
    soc_start: [f64; 2],
    dod: [f64; 2],
    temp_c: [f64; 2],
    c_rate: [f64; 2],
    soh: [f64; 2],
    delta_soh: [f64; 2],
}

impl From<Normalization> for NormalizationFile {
    fn from(n: Normalization) -> Self {
        let p = |s: Span| [s.lo, s.hi];
        NormalizationFile {
            soc_start: p(n.features[0]),
            dod: p(n.features[1]),
            temp_c: p(n.features[2]),
            c_rate: p(n.features[3]),
            soh: p(n.features[4]),
            delta_soh: p(n.target),
        }
    }
}

impl TryFrom<NormalizationFile> for Normalization {
    type Error = String;

    fn try_from(f: NormalizationFile) -> std::result::Result<Self, String> {
        let s = |p: [f64; 2]| Span::new(p[0], p[1]);
        let n = Normalization {
            features: [s(f.soc_start), s(f.dod), s(f.temp_c), s(f.c_rate), s(f.soh)],
            target: s(f.delta_soh),
        };
        n.check().map_err(|e| e.to_string())?;
        Ok(n)
    }
}

impl Normalization {
    pub fn new(features: [Span; FEATURE_COUNT], target: Span) -> Result<Self> {
        let n = Normalization { features, target };
        n.check()?;
        Ok(n)
    }

    fn check(&self) -> Result<()> {
        for (name, span) in FEATURE_NAMES
            .iter()
            .zip(self.features.iter())
            .chain(std::iter::once((&"delta_soh", &self.target)))
        {
            if !(span.lo.is_finite() && span.hi.is_finite() && span.hi > span.lo) {
                return Err(Error::Config(format!(
                    "normalization for `{name}` needs finite hi > lo, got [{}, {}]",
                    span.lo, span.hi
                )));
            }
        }
        Ok(())
    }

    /// Maps raw features onto `[0, 1]`. Out-of-range features are rejected, not clamped.
    pub fn normalize(&self, f: &CycleFeatures) -> Result<[f64; FEATURE_COUNT]> {
        let raw = f.to_array();
        let mut out = [0.0; FEATURE_COUNT];
        for i in 0..FEATURE_COUNT {
            let span = self.features[i];
            if !span.contains(raw[i]) {
                return Err(Error::Range {
                    feature: FEATURE_NAMES[i].to_string(),
                    value: raw[i],
                    lo: span.lo,
                    hi: span.hi,
                });
            }
            out[i] = (raw[i] - span.lo) / span.width();
        }
        Ok(out)
    }

    pub fn denormalize(&self, x: &[f64; FEATURE_COUNT]) -> CycleFeatures {
        let mut raw = [0.0; FEATURE_COUNT];
        for i in 0..FEATURE_COUNT {
            raw[i] = self.features[i].lo + x[i] * self.features[i].width();
        }
        CycleFeatures::from_array(raw)
    }

    pub fn normalize_target(&self, delta_soh: f64) -> f64 {
        (delta_soh - self.target.lo) / self.target.width()
    }

    pub fn denormalize_target(&self, y: f64) -> f64 {
        self.target.lo + y * self.target.width()
    }
}

/// Sampling box for [`generate_dataset`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplingPlan {
    pub samples: usize,
    pub soc_start: Span,
    pub dod: Span,
    pub temp_c: Span,
    pub c_rate: Span,
    pub soh: Span,
    /// Fraction of samples held out for testing.
    pub test_fraction: f64,
}

pub const MIN_SAMPLES: usize = 1000;

impl Default for SamplingPlan {
    fn default() -> Self {
        SamplingPlan {
            samples: 5000,
            soc_start: Span::new(0.0, 1.0),
            dod: Span::new(0.0, 1.0),
            temp_c: Span::new(0.0, 45.0),
            c_rate: Span::new(0.0, 2.0),
            soh: Span::new(0.8, 1.0),
            test_fraction: 0.2,
        }
    }
}

impl SamplingPlan {
    pub fn with_samples(samples: usize) -> Self {
        SamplingPlan {
            samples,
            ..Default::default()
        }
    }

    fn spans(&self) -> [Span; FEATURE_COUNT] {
        [self.soc_start, self.dod, self.temp_c, self.c_rate, self.soh]
    }

    fn validate(&self) -> Result<()> {
        if self.samples < MIN_SAMPLES {
            return Err(Error::Config(format!(
                "sample count {} below minimum {MIN_SAMPLES}",
                self.samples
            )));
        }
        if !(self.test_fraction > 0.0 && self.test_fraction < 1.0) {
            return Err(Error::Config(format!("test_fraction {} not in (0, 1)", self.test_fraction)));
        }
        for (name, span) in FEATURE_NAMES.iter().zip(self.spans()) {
            if !(span.lo.is_finite() && span.hi.is_finite()) || span.hi <= span.lo {
                return Err(Error::Config(format!(
                    "degenerate range for `{name}`: [{}, {}]",
                    span.lo, span.hi
                )));
            }
        }
        let unit = Span::new(0.0, 1.0);
        for (name, span) in [("soc_start", self.soc_start), ("dod", self.dod), ("soh", self.soh)] {
            if !(unit.contains(span.lo) && unit.contains(span.hi)) {
                return Err(Error::Config(format!("`{name}` range must lie in [0, 1]")));
            }
        }
        if self.c_rate.lo < 0.0 {
            return Err(Error::Config("`c_rate` range must be nonnegative".into()));
        }
        if self.soh.hi <= 0.0 {
            return Err(Error::Config("`soh` range must reach above 0".into()));
        }
        if self.soc_start.hi < self.dod.lo || self.soc_start.hi <= 0.0 {
            return Err(Error::Config(format!(
                "no feasible cycles: soc_start ≤ {} but dod ≥ {}",
                self.soc_start.hi, self.dod.lo
            )));
        }
        Ok(())
    }
}

/// Degradation samples plus their normalization and a seeded train/test split.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub samples: Vec<DegradationSample>,
    pub normalization: Normalization,
    pub train: Vec<usize>,
    pub test: Vec<usize>,
    pub seed: u64,
    pub test_fraction: f64,
}

/// Draws a seeded uniform design over the plan box, rejecting cycles that
/// would discharge below zero SOC.
///
/// Feature normalization spans the plan box rather than the realized min/max,
/// so every state inside the box (including an idle battery with zero depth of
/// discharge) is representable once the network is embedded in a schedule.
pub fn generate_dataset(plan: &SamplingPlan, seed: u64) -> Result<Dataset> {
    plan.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let spans = plan.spans();
    let draw = |rng: &mut ChaCha8Rng, s: Span| s.lo + s.width() * rng.gen::<f64>();

    let max_attempts = plan.samples.saturating_mul(10_000);
    let mut attempts = 0usize;
    let mut samples = Vec::with_capacity(plan.samples);
    while samples.len() < plan.samples {
        attempts += 1;
        if attempts > max_attempts {
            return Err(Error::Config(
                "feasible (soc_start, dod) region too small to sample".into(),
            ));
        }
        let mut raw = [0.0; FEATURE_COUNT];
        for (slot, span) in raw.iter_mut().zip(spans) {
            *slot = draw(&mut rng, span);
        }
        let features = CycleFeatures::from_array(raw);
        if features.validate().is_err() {
            continue;
        }
        let delta_soh = cycle_degradation(&features)?;
        samples.push(DegradationSample {
            features,
            delta_soh,
        });
    }

    let max_target = samples.iter().map(|s| s.delta_soh).fold(0.0, f64::max);
    let normalization = Normalization::new(spans, Span::new(0.0, max_target))?;
    Ok(Dataset::from_samples(samples, normalization, seed, plan.test_fraction))
}

impl Dataset {
    pub fn from_samples(
        samples: Vec<DegradationSample>,
        normalization: Normalization,
        seed: u64,
        test_fraction: f64,
    ) -> Self {
        let (train, test) = split_indices(samples.len(), seed, test_fraction);
        Dataset {
            samples,
            normalization,
            train,
            test,
            seed,
            test_fraction,
        }
    }

    pub fn train_samples(&self) -> Vec<DegradationSample> {
        self.train.iter().map(|&i| self.samples[i]).collect()
    }

    pub fn test_samples(&self) -> Vec<DegradationSample> {
        self.test.iter().map(|&i| self.samples[i]).collect()
    }

    /// CSV text with the fixed header and shortest round-trip float formatting.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(CSV_HEADER)?;
        for s in &self.samples {
            let f = s.features;
            w.write_record(
                [f.soc_start, f.dod, f.temp_c, f.c_rate, f.soh, s.delta_soh].map(|v| v.to_string()),
            )?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }

    /// Writes `path` (CSV) and its `.norm.json` sidecar.
    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_csv()?)?;
        let meta = DatasetMeta {
            normalization: self.normalization.clone(),
            seed: self.seed,
            test_fraction: self.test_fraction,
        };
        let mut f = fs::File::create(sidecar_path(path))?;
        serde_json::to_writer_pretty(&mut f, &meta).map_err(|e| Error::Io(e.into()))?;
        writeln!(f)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        let samples = parse_csv(&text)?;
        let side = sidecar_path(path);
        let meta_text = fs::read_to_string(&side)?;
        let meta: DatasetMeta =
            serde_json::from_str(&meta_text).map_err(|e| Error::from_json(e, "normalization"))?;
        if samples.is_empty() {
            return Err(Error::parse(1, "samples", "dataset has no rows"));
        }
        Ok(Dataset::from_samples(
            samples,
            meta.normalization,
            meta.seed,
            meta.test_fraction,
        ))
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DatasetMeta {
    normalization: Normalization,
    seed: u64,
    test_fraction: f64,
}

pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".norm.json");
    PathBuf::from(s)
}

fn parse_csv(text: &str) -> Result<Vec<DegradationSample>> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let header = r.headers()?.clone();
    if header.iter().ne(CSV_HEADER.iter().copied()) {
        return Err(Error::parse(1, "header", format!("expected {}", CSV_HEADER.join(","))));
    }
    let mut out = Vec::new();
    for (row, rec) in r.records().enumerate() {
        let line = row + 2;
        let rec = rec?;
        if rec.len() != CSV_HEADER.len() {
            return Err(Error::parse(line, "row", format!("expected 6 fields, got {}", rec.len())));
        }
        let mut v = [0.0; 6];
        for (i, field) in rec.iter().enumerate() {
            v[i] = field
                .trim()
                .parse()
                .map_err(|_| Error::parse(line, CSV_HEADER[i], format!("not a number: `{field}`")))?;
        }
        out.push(DegradationSample {
            features: CycleFeatures::from_array([v[0], v[1], v[2], v[3], v[4]]),
            delta_soh: v[5],
        });
    }
    Ok(out)
}

fn split_indices(n: usize, seed: u64, test_fraction: f64) -> (Vec<usize>, Vec<usize>) {
    let mut idx: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ SPLIT_SALT);
    idx.shuffle(&mut rng);
    let n_test = ((n as f64) * test_fraction).round() as usize;
    let n_test = n_test.min(n.saturating_sub(1));
    let test = idx[..n_test].to_vec();
    let train = idx[n_test..].to_vec();
    (train, test)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn cycle(soc_start: f64, dod: f64, temp_c: f64, c_rate: f64, soh: f64) -> CycleFeatures {
        CycleFeatures {
            soc_start,
            dod,
            temp_c,
            c_rate,
            soh,
        }
    }

    #[test]
    fn reference_cycle_is_the_scale_constant() {
        let d = cycle_degradation(&cycle(1.0, 1.0, 25.0, 1.0, 1.0)).unwrap();
        assert_eq!(d, 2.5e-5);
    }

    #[test]
    fn shallow_cycle_matches_frozen_value() {
        // 2.5e-5 * 0.4^1.6 * (1 + 2 * 0.3^2), evaluated offline in double precision.
        let d = cycle_degradation(&cycle(0.4, 0.4, 25.0, 0.4, 1.0)).unwrap();
        assert!((d - 6.809543555882047e-06).abs() < 1e-18, "{d}");
    }

    #[test]
    fn zero_dod_is_rejected() {
        let err = cycle_degradation(&cycle(0.5, 0.0, 25.0, 1.0, 1.0)).unwrap_err();
        assert!(matches!(err, Error::InputDomain(_)));
    }

    #[test]
    fn discharge_below_zero_is_rejected() {
        assert!(cycle_degradation(&cycle(0.2, 0.3, 25.0, 1.0, 1.0)).is_err());
    }

    #[test]
    fn generation_is_deterministic() {
        let plan = SamplingPlan::with_samples(5000);
        let a = generate_dataset(&plan, 42).unwrap();
        let b = generate_dataset(&plan, 42).unwrap();
        assert_eq!(a.to_csv().unwrap(), b.to_csv().unwrap());
        assert_eq!(a.train, b.train);
        let c = generate_dataset(&plan, 43).unwrap();
        assert_ne!(a.to_csv().unwrap(), c.to_csv().unwrap());
    }

    #[test]
    fn infeasible_box_is_a_config_error() {
        let plan = SamplingPlan {
            soc_start: Span::new(0.0, 0.3),
            dod: Span::new(0.5, 1.0),
            ..SamplingPlan::with_samples(2000)
        };
        assert!(matches!(generate_dataset(&plan, 1), Err(Error::Config(_))));
    }

    #[test]
    fn degenerate_range_and_small_plans_are_rejected() {
        let plan = SamplingPlan {
            temp_c: Span::new(25.0, 25.0),
            ..Default::default()
        };
        assert!(matches!(generate_dataset(&plan, 1), Err(Error::Config(_))));
        assert!(matches!(
            generate_dataset(&SamplingPlan::with_samples(999), 1),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn every_sample_matches_the_closed_form() {
        let ds = generate_dataset(&SamplingPlan::with_samples(2000), 7).unwrap();
        assert_eq!(ds.samples.len(), 2000);
        for s in &ds.samples {
            let f = s.features;
            // Re-evaluate the aging law term by term.
            let mid = f.soc_start - f.dod / 2.0;
            let expect = 2.5e-5
                * f.dod.powf(1.6)
                * (0.06 * (f.temp_c - 25.0)).exp()
                * (1.0 + 0.3 * (f.c_rate - 1.0).max(0.0))
                * (1.0 + (1.0 - f.soh))
                * (1.0 + 2.0 * (mid - 0.5) * (mid - 0.5));
            assert!((s.delta_soh - expect).abs() <= 1e-15 * expect.max(1e-300));
            assert!(s.delta_soh >= 0.0 && s.delta_soh < 1.0);
            assert!(f.soc_start - f.dod >= 0.0);
            assert!((0.0..=45.0).contains(&f.temp_c) && f.c_rate > 0.0 && f.c_rate <= 2.0);
            assert!((0.8..=1.0).contains(&f.soh));
        }
    }

    #[test]
    fn split_is_a_disjoint_cover() {
        let ds = generate_dataset(&SamplingPlan::with_samples(1000), 3).unwrap();
        let mut all: Vec<usize> = ds.train.iter().chain(ds.test.iter()).copied().collect();
        all.sort_unstable();
        assert_eq!(all, (0..1000).collect::<Vec<_>>());
        assert_eq!(ds.test.len(), 200);
    }

    #[test]
    fn normalization_endpoints() {
        let ds = generate_dataset(&SamplingPlan::with_samples(1000), 3).unwrap();
        let n = &ds.normalization;
        let lo = CycleFeatures::from_array(n.features.map(|s| s.lo));
        let hi = CycleFeatures::from_array(n.features.map(|s| s.hi));
        let mid = CycleFeatures::from_array(n.features.map(|s| 0.5 * (s.lo + s.hi)));
        assert_eq!(n.normalize(&lo).unwrap(), [0.0; 5]);
        assert_eq!(n.normalize(&hi).unwrap(), [1.0; 5]);
        for x in n.normalize(&mid).unwrap() {
            assert!((x - 0.5).abs() < 1e-15);
        }
    }

    #[test]
    fn out_of_range_feature_names_itself() {
        let ds = generate_dataset(&SamplingPlan::with_samples(1000), 3).unwrap();
        let f = cycle(0.5, 0.2, 50.0, 1.0, 0.9);
        match ds.normalization.normalize(&f) {
            Err(Error::Range { feature, .. }) => assert_eq!(feature, "temp_c"),
            other => panic!("expected range error, got {other:?}"),
        }
    }

    #[test]
    fn save_load_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("data.csv");
        let ds = generate_dataset(&SamplingPlan::with_samples(1000), 11).unwrap();
        ds.save(&path).unwrap();
        let back = Dataset::load(&path).unwrap();
        assert_eq!(back, ds);
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("soc_start,dod,temp_c,c_rate,soh,delta_soh\n"));
        assert_eq!(text.lines().count(), 1001);
    }

    #[test]
    fn malformed_csv_reports_line_and_field() {
        let err = parse_csv("soc_start,dod,temp_c,c_rate,soh,delta_soh\n0.5,0.2,25,1,0.9,1e-6\n0.5,x,25,1,0.9,1e-6\n")
            .unwrap_err();
        match err {
            Error::Parse { line, field, .. } => {
                assert_eq!(line, 3);
                assert_eq!(field, "dod");
            }
            other => panic!("{other:?}"),
        }
    }

    fn feasible_cycle() -> impl Strategy<Value = CycleFeatures> {
        (0.01f64..1.0, 0.0f64..1.0, 0.0f64..45.0, 0.01f64..2.0, 0.8f64..1.0).prop_map(
            |(soc, frac, t, c, soh)| cycle(soc, (soc * frac).max(1e-4).min(soc), t, c, soh),
        )
    }

    proptest! {
        #[test]
        fn aging_is_monotone_in_dod_temp_and_fast_crate(f in feasible_cycle(), bump in 0.0f64..0.5) {
            let base = cycle_degradation(&f).unwrap();
            let deeper = CycleFeatures { dod: (f.dod + bump).min(f.soc_start), ..f };
            prop_assert!(cycle_degradation(&deeper).unwrap() >= base);
            let hotter = CycleFeatures { temp_c: f.temp_c + bump * 10.0, ..f };
            prop_assert!(cycle_degradation(&hotter).unwrap() >= base);
            if f.c_rate >= 1.0 {
                let faster = CycleFeatures { c_rate: f.c_rate + bump, ..f };
                prop_assert!(cycle_degradation(&faster).unwrap() >= base);
            }
        }

        #[test]
        fn normalization_round_trip(x in prop::array::uniform5(0.0f64..=1.0)) {
            let n = Normalization::new(SamplingPlan::default().spans(), Span::new(0.0, 1e-4)).unwrap();
            let f = n.denormalize(&x);
            let back = n.denormalize(&n.normalize(&f).unwrap());
            for (a, b) in f.to_array().iter().zip(back.to_array()) {
                prop_assert!((a - b).abs() <= 1e-12);
            }
        }
    }
}
