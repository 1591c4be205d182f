//! Seeded random-genome datasets labelled by the oracle.
//!
//! File layout: one UTF-8 header line `METACODE-DATASET <json>\n`, then
//! `n_samples` fixed-width records. Each record is the genome as 8 big-endian
//! bytes (the same digit order as its hex form) followed by 122 little-endian
//! `f64`: `re, im` interleaved by frequency.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use num_complex::Complex64;
use rand::{RngCore, SeedableRng};
use rand_xoshiro::Xoshiro256StarStar;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::oracle::{grid_freq, Oracle, SpectralResponse, FREQ_START_HZ, FREQ_STEP_HZ, N_FREQ};
use crate::pattern::Genome;
use crate::{with_jobs, Error, Result};

pub const FORMAT_VERSION: u32 = 1;
const MAGIC: &str = "METACODE-DATASET";
const RECORD_BYTES: usize = 8 + 2 * N_FREQ * 8;
/// Default desk-scale dataset size.
pub const DEFAULT_SAMPLES: usize = 11_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetHeader {
    pub version: u32,
    pub n_samples: usize,
    pub seed: u64,
    pub fingerprint: String,
    pub freq_start_hz: f64,
    pub freq_step_hz: f64,
    pub n_freq: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub genome: Genome,
    pub response: SpectralResponse,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub header: DatasetHeader,
    pub samples: Vec<Sample>,
}

/// Independent xoshiro256** stream for sample `index`.
///
/// Each index gets its own generator, so the genome drawn for a given index
/// does not depend on how the work is partitioned.
pub fn sample_stream(seed: u64, index: u64) -> Xoshiro256StarStar {
    let mut root = Xoshiro256StarStar::seed_from_u64(seed);
    let base = root.next_u64();
    Xoshiro256StarStar::seed_from_u64(base ^ index.wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

pub fn genome_for_index(seed: u64, index: u64) -> Genome {
    Genome::from_bits(sample_stream(seed, index).next_u64())
}

/// Draws `n` uniform genomes and labels them with `oracle`.
pub fn generate(n: usize, seed: u64, oracle: &Oracle, jobs: Option<usize>) -> Result<Dataset> {
    if n == 0 {
        return Err(Error::InvalidArgument("dataset size must be at least 1".into()));
    }
    let samples = with_jobs(jobs, || {
        (0..n)
            .into_par_iter()
            .map(|i| {
                let genome = genome_for_index(seed, i as u64);
                oracle
                    .genome_response(genome)
                    .map(|response| Sample { genome, response })
            })
            .collect::<Result<Vec<_>>>()
    })??;
    Ok(Dataset {
        header: DatasetHeader {
            version: FORMAT_VERSION,
            n_samples: n,
            seed,
            fingerprint: oracle.fingerprint(),
            freq_start_hz: FREQ_START_HZ,
            freq_step_hz: FREQ_STEP_HZ,
            n_freq: N_FREQ,
        },
        samples,
    })
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn write_to<W: Write>(&self, mut w: W) -> Result<()> {
        let header = serde_json::to_string(&self.header)?;
        writeln!(w, "{MAGIC} {header}")?;
        let mut buf = Vec::with_capacity(RECORD_BYTES);
        for s in &self.samples {
            buf.clear();
            buf.extend_from_slice(&s.genome.bits().to_be_bytes());
            for z in s.response.values() {
                buf.extend_from_slice(&z.re.to_le_bytes());
                buf.extend_from_slice(&z.im.to_le_bytes());
            }
            w.write_all(&buf)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        let mut out = Vec::with_capacity(128 + self.len() * RECORD_BYTES);
        self.write_to(&mut out)?;
        Ok(out)
    }

    /// Writes to a new file; an existing file is never overwritten.
    pub fn save(&self, path: &Path) -> Result<()> {
        let f = File::options().write(true).create_new(true).open(path).map_err(|e| {
            if e.kind() == std::io::ErrorKind::AlreadyExists {
                Error::ArtifactExists(path.to_path_buf())
            } else {
                Error::Io(e)
            }
        })?;
        self.write_to(BufWriter::new(f))
    }

    /// Parses a dataset. With `expected_fingerprint`, files produced under
    /// different oracle constants are rejected.
    pub fn read_from<R: Read>(r: R, expected_fingerprint: Option<&str>) -> Result<Self> {
        let mut r = BufReader::new(r);
        let mut line = String::new();
        r.read_line(&mut line)?;
        let json = line
            .trim_end_matches('\n')
            .strip_prefix(MAGIC)
            .and_then(|s| s.strip_prefix(' '))
            .ok_or_else(|| Error::format("dataset header", "missing magic"))?;
        let header: DatasetHeader = serde_json::from_str(json)?;
        if header.version != FORMAT_VERSION {
            return Err(Error::format(
                "dataset header",
                format!("unsupported version {}", header.version),
            ));
        }
        if header.n_freq != N_FREQ
            || header.freq_start_hz != FREQ_START_HZ
            || header.freq_step_hz != FREQ_STEP_HZ
        {
            return Err(Error::format("dataset header", "frequency grid mismatch"));
        }
        if let Some(expected) = expected_fingerprint {
            if header.fingerprint != expected {
                return Err(Error::FingerprintMismatch {
                    expected: expected.to_string(),
                    found: header.fingerprint,
                });
            }
        }
        let mut samples = Vec::with_capacity(header.n_samples);
        let mut rec = vec![0u8; RECORD_BYTES];
        let f64_at = |rec: &[u8], k: usize| {
            let off = 8 + 8 * k;
            f64::from_le_bytes(rec[off..off + 8].try_into().expect("8 bytes"))
        };
        for i in 0..header.n_samples {
            r.read_exact(&mut rec).map_err(|e| {
                Error::format("dataset records", format!("record {i}: {e}"))
            })?;
            let genome = Genome::from_bits(u64::from_be_bytes(rec[..8].try_into().expect("8 bytes")));
            let s22 = (0..N_FREQ)
                .map(|k| Complex64::new(f64_at(&rec, 2 * k), f64_at(&rec, 2 * k + 1)))
                .collect();
            samples.push(Sample {
                genome,
                response: SpectralResponse::new(s22)?,
            });
        }
        let mut trailing = [0u8; 1];
        if r.read(&mut trailing)? != 0 {
            return Err(Error::format("dataset records", "trailing bytes after last record"));
        }
        Ok(Dataset { header, samples })
    }

    pub fn load(path: &Path, expected_fingerprint: Option<&str>) -> Result<Self> {
        if !path.exists() {
            return Err(Error::MissingArtifact(path.to_path_buf()));
        }
        Self::read_from(File::open(path)?, expected_fingerprint)
    }
}

/// Train/validation split by index at the 10:1 ratio.
pub fn split(samples: &[Sample]) -> Result<(&[Sample], &[Sample])> {
    let n = samples.len();
    if n < 11 {
        return Err(Error::DatasetTooSmall { needed: 11, found: n });
    }
    Ok(samples.split_at(n * 10 / 11))
}

/// Per-frequency moments, fill-fraction histogram and magnitude range.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DatasetStats {
    pub n_samples: usize,
    pub mean_re: Vec<f64>,
    pub std_re: Vec<f64>,
    pub mean_im: Vec<f64>,
    pub std_im: Vec<f64>,
    /// Counts indexed by genome popcount (fill fraction = index / 64).
    pub fill_histogram: Vec<usize>,
    pub fill_mean: f64,
    pub fill_std: f64,
    pub min_magnitude: f64,
    pub max_magnitude: f64,
}

/// Population statistics; `std` divides by `n`.
pub fn stats(samples: &[Sample]) -> DatasetStats {
    let n = samples.len().max(1) as f64;
    let mut mean_re = vec![0.0; N_FREQ];
    let mut mean_im = vec![0.0; N_FREQ];
    let mut fill_histogram = vec![0usize; 65];
    let mut min_magnitude = f64::INFINITY;
    let mut max_magnitude = 0.0f64;
    for s in samples {
        fill_histogram[s.genome.popcount() as usize] += 1;
        for (k, z) in s.response.values().iter().enumerate() {
            mean_re[k] += z.re;
            mean_im[k] += z.im;
            let m = z.norm();
            min_magnitude = min_magnitude.min(m);
            max_magnitude = max_magnitude.max(m);
        }
    }
    mean_re.iter_mut().chain(mean_im.iter_mut()).for_each(|m| *m /= n);
    let mut std_re = vec![0.0; N_FREQ];
    let mut std_im = vec![0.0; N_FREQ];
    for s in samples {
        for (k, z) in s.response.values().iter().enumerate() {
            std_re[k] += (z.re - mean_re[k]).powi(2);
            std_im[k] += (z.im - mean_im[k]).powi(2);
        }
    }
    std_re.iter_mut().chain(std_im.iter_mut()).for_each(|v| *v = (*v / n).sqrt());

    let fills: Vec<f64> = samples.iter().map(|s| s.genome.popcount() as f64 / 64.0).collect();
    let fill_mean = fills.iter().sum::<f64>() / n;
    let fill_std = (fills.iter().map(|f| (f - fill_mean).powi(2)).sum::<f64>() / n).sqrt();

    DatasetStats {
        n_samples: samples.len(),
        mean_re,
        std_re,
        mean_im,
        std_im,
        fill_histogram,
        fill_mean,
        fill_std,
        min_magnitude: if samples.is_empty() { 0.0 } else { min_magnitude },
        max_magnitude,
    }
}

impl DatasetStats {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("freq_hz,mean_re,std_re,mean_im,std_im\n");
        for k in 0..N_FREQ {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                grid_freq(k),
                self.mean_re[k],
                self.std_re[k],
                self.mean_im[k],
                self.std_im[k]
            ));
        }
        out
    }

    pub fn summary(&self) -> String {
        let mode = self
            .fill_histogram
            .iter()
            .enumerate()
            .max_by_key(|(i, c)| (**c, std::cmp::Reverse(*i)))
            .map(|(i, _)| i)
            .unwrap_or(0);
        format!(
            "samples: {}\n|S22| range: [{:.6}, {:.6}]\nfill fraction: mean {:.4}, std {:.4}, mode {}/64\n",
            self.n_samples, self.min_magnitude, self.max_magnitude, self.fill_mean, self.fill_std, mode
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_sample_reproducible() {
        let o = Oracle::default();
        let a = generate(1, 0, &o, Some(1)).unwrap();
        let b = generate(1, 0, &o, Some(1)).unwrap();
        assert_eq!(a.len(), 1);
        let bytes = a.to_bytes().unwrap();
        assert_eq!(bytes, b.to_bytes().unwrap());
        let header_len = bytes.iter().position(|b| *b == b'\n').unwrap() + 1;
        assert_eq!(bytes.len() - header_len, RECORD_BYTES);
    }

    #[test]
    fn split_sizes() {
        let o = Oracle::default();
        for (n, train) in [(11usize, 10usize), (110, 100)] {
            let d = generate(n, 3, &o, None).unwrap();
            let (t, v) = split(&d.samples).unwrap();
            assert_eq!((t.len(), v.len()), (train, n - train));
        }
        let d = generate(10, 3, &o, None).unwrap();
        assert!(matches!(split(&d.samples), Err(Error::DatasetTooSmall { .. })));
    }

    #[test]
    fn split_large_ratio() {
        // Sizes only; avoid labelling 11k samples here.
        let fake: Vec<Sample> = (0..11_000)
            .map(|i| Sample {
                genome: Genome::from_bits(i),
                response: SpectralResponse::new(vec![Complex64::new(0.0, 0.0); N_FREQ]).unwrap(),
            })
            .collect();
        let (t, v) = split(&fake).unwrap();
        assert_eq!((t.len(), v.len()), (10_000, 1_000));
    }

    #[test]
    fn stats_of_single_zero_genome() {
        let o = Oracle::default();
        let s = Sample {
            genome: Genome::ZEROS,
            response: o.genome_response(Genome::ZEROS).unwrap(),
        };
        let st = stats(&[s]);
        assert!(st.std_re.iter().chain(&st.std_im).all(|v| *v == 0.0));
        assert_eq!(st.fill_histogram[0], 1);
        assert!(st.max_magnitude < 1.0);
        assert_eq!(st.to_csv().lines().count(), N_FREQ + 1);
    }

    #[test]
    fn rejects_wrong_magic_and_truncation() {
        let d = generate(3, 1, &Oracle::default(), None).unwrap();
        let bytes = d.to_bytes().unwrap();
        assert!(Dataset::read_from(&bytes[..bytes.len() - 1], None).is_err());
        let mut extra = bytes.clone();
        extra.push(0);
        assert!(Dataset::read_from(&extra[..], None).is_err());
        assert!(Dataset::read_from(&b"NOPE {}\n"[..], None).is_err());
    }

    #[test]
    fn stream_is_index_local() {
        assert_eq!(genome_for_index(5, 17), genome_for_index(5, 17));
        assert_ne!(genome_for_index(5, 17), genome_for_index(5, 18));
        assert_ne!(genome_for_index(5, 17), genome_for_index(6, 17));
    }
}
