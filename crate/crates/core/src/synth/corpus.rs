//! Reproducible corpora of degraded synthetic text images.
//!
//! Sample `i` draws everything from its own xoshiro256++ stream seeded with
//! `mix(seed) ^ i` (seed expansion via SplitMix64), so samples can be
//! generated in any order or in parallel with identical bytes.

use std::fs;
use std::path::{Path, PathBuf};

use rand_core::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::degrade::unit_f64;
use super::{box_blur3, degrade, render, DegradationSpec, GlyphSpec, GroundTruth, SynthError};
use crate::raster::{self, BoundingBox, GrayImage};

pub const PRNG_ID: &str =
    "xoshiro256++ (splitmix64 seed expansion; sample seed = splitmix64_mix(seed) XOR index)";

const ALPHABET: &[u8] = b"ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789";

/// Closed interval `[min, max]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Range<T> {
    pub min: T,
    pub max: T,
}

impl<T: Copy> Range<T> {
    pub fn new(min: T, max: T) -> Self {
        Range { min, max }
    }

    pub fn fixed(v: T) -> Self {
        Range { min: v, max: v }
    }
}

impl Range<u32> {
    fn draw(&self, rng: &mut Xoshiro256PlusPlus) -> u32 {
        let span = (self.max - self.min) as u64 + 1;
        self.min + (rng.next_u64() % span) as u32
    }
}

impl Range<u8> {
    fn draw(&self, rng: &mut Xoshiro256PlusPlus) -> u8 {
        Range::new(self.min as u32, self.max as u32).draw(rng) as u8
    }
}

impl Range<f64> {
    fn draw(&self, rng: &mut Xoshiro256PlusPlus) -> f64 {
        self.min + (self.max - self.min) * unit_f64(rng)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorpusRanges {
    pub text_len: Range<u32>,
    pub scale: Range<u32>,
    pub fill: Range<u8>,
    pub background: Range<u8>,
    pub margin: u32,
    pub gaussian_sigma: Range<f64>,
    pub moire_amplitude: Range<f64>,
    pub moire_period: Range<f64>,
    pub moire_angle: Range<f64>,
    pub gradient_span: Range<f64>,
    /// Soften glyph edges with a 3x3 box blur before degrading.
    pub antialias: bool,
}

impl Default for CorpusRanges {
    fn default() -> Self {
        CorpusRanges {
            text_len: Range::new(16, 24),
            scale: Range::new(2, 4),
            fill: Range::new(180, 255),
            background: Range::new(0, 120),
            margin: 8,
            gaussian_sigma: Range::fixed(8.0),
            moire_amplitude: Range::fixed(20.0),
            moire_period: Range::new(4.0, 16.0),
            moire_angle: Range::new(0.0, 180.0),
            gradient_span: Range::fixed(0.0),
            antialias: false,
        }
    }
}

impl CorpusRanges {
    /// Every combination in range must be renderable and a valid degradation.
    pub fn validate(&self) -> Result<(), SynthError> {
        let bad = |m: String| Err(SynthError::InvalidRanges(m));
        macro_rules! ordered {
            ($($f:ident),*) => {$(
                // written negated so NaN bounds are rejected too
                #[allow(clippy::neg_cmp_op_on_partial_ord)]
                if !(self.$f.min <= self.$f.max) {
                    return bad(format!("{}: min exceeds max", stringify!($f)));
                }
            )*};
        }
        ordered!(
            text_len,
            scale,
            fill,
            background,
            gaussian_sigma,
            moire_amplitude,
            moire_period,
            moire_angle,
            gradient_span
        );
        if self.text_len.min == 0 {
            return bad("text_len must be at least 1".into());
        }
        if self.scale.min == 0 {
            return bad("scale must be at least 1".into());
        }
        let (f, b) = (self.fill, self.background);
        let min_gap = f.min.saturating_sub(b.max).max(b.min.saturating_sub(f.max));
        if min_gap < super::MIN_CONTRAST {
            return bad(format!(
                "fill {}..{} and background {}..{} must stay {} levels apart",
                f.min,
                f.max,
                b.min,
                b.max,
                super::MIN_CONTRAST
            ));
        }
        for corner in [
            (
                self.gaussian_sigma.min,
                self.moire_amplitude.min,
                self.gradient_span.min,
            ),
            (
                self.gaussian_sigma.max,
                self.moire_amplitude.max,
                self.gradient_span.max,
            ),
        ] {
            let spec = DegradationSpec {
                gaussian_sigma: corner.0,
                moire_amplitude: corner.1,
                moire_period: self.moire_period.min,
                moire_angle: self.moire_angle.min,
                gradient_span: corner.2,
                seed: 0,
            };
            spec.validate()
                .or_else(|e| bad(e.to_string().replace("invalid degradation: ", "")))?;
        }
        if self.moire_amplitude.max > 0.0 && self.moire_period.min <= 1.0 {
            return bad("moire_period must be > 1".into());
        }
        Ok(())
    }
}

/// One generated sample before it is written out.
#[derive(Clone, Debug, PartialEq)]
pub struct Sample {
    pub image: GrayImage,
    pub truth: GroundTruth,
    pub background: u8,
    pub degradation: DegradationSpec,
}

/// SplitMix64 output function. Whitening the corpus seed keeps nearby seeds
/// from producing permutations of the same samples under the XOR.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Draws sample `index` of the corpus defined by `ranges` and `seed`.
pub fn generate_sample(index: u64, ranges: &CorpusRanges, seed: u64) -> Result<Sample, SynthError> {
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(mix(seed) ^ index);
    let len = ranges.text_len.draw(&mut rng);
    let text: String = (0..len)
        .map(|_| ALPHABET[(rng.next_u64() % ALPHABET.len() as u64) as usize] as char)
        .collect();
    let scale = ranges.scale.draw(&mut rng);
    let fill = ranges.fill.draw(&mut rng);
    let background = ranges.background.draw(&mut rng);
    let degradation = DegradationSpec {
        gaussian_sigma: ranges.gaussian_sigma.draw(&mut rng),
        moire_amplitude: ranges.moire_amplitude.draw(&mut rng),
        moire_period: ranges.moire_period.draw(&mut rng),
        moire_angle: ranges.moire_angle.draw(&mut rng),
        gradient_span: ranges.gradient_span.draw(&mut rng),
        seed: rng.next_u64(),
    };
    let (clean, truth) = render(&GlyphSpec {
        text,
        scale,
        fill,
        background,
        margin: ranges.margin,
    })?;
    let clean = if ranges.antialias {
        box_blur3(&clean)
    } else {
        clean
    };
    let image = degrade(&clean, &degradation)?;
    Ok(Sample {
        image,
        truth,
        background,
        degradation,
    })
}

/// Ground truth as stored next to each image.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TruthFile {
    pub transcript: String,
    pub fill: u8,
    pub boxes: Vec<BoundingBox>,
    /// Relative to the corpus directory.
    pub mask_path: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ManifestSample {
    pub image: String,
    pub truth: String,
    pub mask: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorpusManifest {
    pub seed: u64,
    pub prng: String,
    pub count: u64,
    pub ranges: CorpusRanges,
    pub samples: Vec<ManifestSample>,
}

pub const MANIFEST_NAME: &str = "manifest.json";

/// A sample as found on disk.
#[derive(Clone, Debug, PartialEq)]
pub struct CorpusEntry {
    pub name: String,
    pub image_path: PathBuf,
    pub truth: TruthFile,
    pub mask_path: PathBuf,
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> SynthError + '_ {
    move |source| SynthError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), SynthError> {
    let mut text = serde_json::to_string_pretty(value).expect("plain data serializes");
    text.push('\n');
    fs::write(path, text).map_err(io_err(path))
}

/// Generates `n` samples into `out_dir` (created if missing): per sample a PNG
/// image, a PGM glyph mask and a truth JSON, plus `manifest.json`.
pub fn make_corpus(
    n: u64,
    ranges: &CorpusRanges,
    seed: u64,
    out_dir: impl AsRef<Path>,
) -> Result<Vec<CorpusEntry>, SynthError> {
    if n == 0 {
        return Err(SynthError::EmptyCorpus);
    }
    ranges.validate()?;
    let out_dir = out_dir.as_ref();
    fs::create_dir_all(out_dir).map_err(io_err(out_dir))?;

    let entries = (0..n)
        .into_par_iter()
        .map(|i| -> Result<(CorpusEntry, ManifestSample), SynthError> {
            let sample = generate_sample(i, ranges, seed)?;
            let name = format!("sample_{i:04}");
            let files = ManifestSample {
                image: format!("{name}.png"),
                truth: format!("{name}.json"),
                mask: format!("{name}_mask.pgm"),
            };
            let image_path = out_dir.join(&files.image);
            let mask_path = out_dir.join(&files.mask);
            raster::save_gray(&sample.image, &image_path)?;
            raster::save_gray(&sample.truth.glyph_mask.to_image(), &mask_path)?;
            let truth = TruthFile {
                transcript: sample.truth.transcript.clone(),
                fill: sample.truth.fill,
                boxes: sample.truth.boxes.clone(),
                mask_path: files.mask.clone(),
            };
            write_json(&out_dir.join(&files.truth), &truth)?;
            Ok((
                CorpusEntry {
                    name,
                    image_path,
                    truth,
                    mask_path,
                },
                files,
            ))
        })
        .collect::<Result<Vec<_>, _>>()?;

    let (entries, samples): (Vec<_>, Vec<_>) = entries.into_iter().unzip();
    write_json(
        &out_dir.join(MANIFEST_NAME),
        &CorpusManifest {
            seed,
            prng: PRNG_ID.to_string(),
            count: n,
            ranges: ranges.clone(),
            samples,
        },
    )?;
    Ok(entries)
}

/// Reads a corpus written by [`make_corpus`], in manifest order.
pub fn load_corpus(
    dir: impl AsRef<Path>,
) -> Result<(CorpusManifest, Vec<CorpusEntry>), SynthError> {
    let dir = dir.as_ref();
    let read_json = |path: &Path| -> Result<serde_json::Value, SynthError> {
        let text = fs::read_to_string(path).map_err(io_err(path))?;
        serde_json::from_str(&text).map_err(|e| SynthError::Corrupt {
            path: path.to_path_buf(),
            message: e.to_string(),
        })
    };
    let manifest_path = dir.join(MANIFEST_NAME);
    let manifest: CorpusManifest =
        serde_json::from_value(read_json(&manifest_path)?).map_err(|e| SynthError::Corrupt {
            path: manifest_path.clone(),
            message: e.to_string(),
        })?;
    let mut entries = Vec::with_capacity(manifest.samples.len());
    for s in &manifest.samples {
        let truth_path = dir.join(&s.truth);
        let truth: TruthFile =
            serde_json::from_value(read_json(&truth_path)?).map_err(|e| SynthError::Corrupt {
                path: truth_path.clone(),
                message: e.to_string(),
            })?;
        let name = Path::new(&s.image)
            .file_stem()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_else(|| s.image.clone());
        entries.push(CorpusEntry {
            name,
            image_path: dir.join(&s.image),
            mask_path: dir.join(&truth.mask_path),
            truth,
        });
    }
    Ok((manifest, entries))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranges_validation() {
        assert!(CorpusRanges::default().validate().is_ok());
        let overlap = CorpusRanges {
            fill: Range::new(100, 150),
            background: Range::new(90, 130),
            ..Default::default()
        };
        assert!(matches!(
            overlap.validate(),
            Err(SynthError::InvalidRanges(_))
        ));
        let dark_text = CorpusRanges {
            fill: Range::new(0, 60),
            background: Range::new(200, 255),
            ..Default::default()
        };
        assert!(dark_text.validate().is_ok());
        let inverted = CorpusRanges {
            scale: Range::new(3, 2),
            ..Default::default()
        };
        assert!(inverted.validate().is_err());
        let loud = CorpusRanges {
            moire_amplitude: Range::new(0.0, 80.0),
            ..Default::default()
        };
        assert!(loud.validate().is_err());
        let nan = CorpusRanges {
            gaussian_sigma: Range::new(f64::NAN, 1.0),
            ..Default::default()
        };
        assert!(nan.validate().is_err());
    }

    #[test]
    fn sample_is_deterministic_and_seed_dependent() {
        let r = CorpusRanges::default();
        let a = generate_sample(3, &r, 42).unwrap();
        assert_eq!(a, generate_sample(3, &r, 42).unwrap());
        assert_ne!(a.image, generate_sample(3, &r, 43).unwrap().image);
        assert!((180..=255).contains(&a.truth.fill));
        assert!(a.background <= 120);
    }

    #[test]
    fn seed_mix_is_splitmix64() {
        // first SplitMix64 output for state 0
        assert_eq!(mix(0), 0xe220_a839_7b1d_cdaf);
    }

    #[test]
    fn nearby_seeds_do_not_share_samples() {
        let r = CorpusRanges::default();
        let first: Vec<_> = (0..8)
            .map(|i| generate_sample(i, &r, 1).unwrap().image)
            .collect();
        for i in 0..8 {
            let other = generate_sample(i, &r, 2).unwrap().image;
            assert!(!first.contains(&other));
        }
    }
}
