//! Deterministic lossless circuit oracle: pixel grid to switch-port `S22`.
//!
//! The oracle is an equivalent circuit, not an electromagnetic solver. A
//! handful of geometric features of the pixel grid set the element values of
//! two series-LC shunt branches; together with a shorted substrate stub, the
//! free-space radiation conductance `1/eta` and the fixed lead/gap series
//! element they form the one-port seen from the switch location:
//!
//! ```text
//!   port 2 ──[ jwL_lead + 1/(jwC_gap) ]──┬──────┬──────┬──────┐
//!                                        Y1     Y2   Y_stub  1/eta
//!                                        └──────┴──────┴──────┘
//! ```
//!
//! Since `1/eta` is the only resistive element, `|S22| < 1` holds for every
//! grid and frequency.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::netcalc::FREE_SPACE_ETA;
use crate::pattern::{expand_genome, GeometryMeta, Genome, PixelGrid, GRID};
use crate::{Error, Result, SPEED_OF_LIGHT};

/// Number of points on the fixed frequency grid.
pub const N_FREQ: usize = 61;
pub const FREQ_START_HZ: f64 = 2.8e9;
pub const FREQ_STEP_HZ: f64 = 0.1e9;

/// Branch reactances below this (ohms) are treated as an exact pole.
const POLE_EPS: f64 = 1e-12;

/// Frequency of grid point `i` (2.8 GHz + i * 0.1 GHz), in Hz.
pub fn grid_freq(i: usize) -> f64 {
    (28 + i) as f64 * 1e8
}

pub fn grid_freqs() -> Vec<f64> {
    (0..N_FREQ).map(grid_freq).collect()
}

/// Index of the grid point within 1 Hz of `freq_hz`.
pub fn grid_index(freq_hz: f64) -> Option<usize> {
    let k = ((freq_hz - FREQ_START_HZ) / FREQ_STEP_HZ).round();
    if !(0.0..N_FREQ as f64).contains(&k) {
        return None;
    }
    let i = k as usize;
    ((grid_freq(i) - freq_hz).abs() <= 1.0).then_some(i)
}

/// Geometric descriptors of a pixel grid, each in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    /// Metal fill fraction.
    pub rho: f64,
    /// Mean longest vertical metal run per column, over 16.
    pub v_conn: f64,
    /// Horizontally adjacent unlike pairs over 240.
    pub e_h: f64,
    /// Vertically adjacent unlike pairs over 240.
    pub e_v: f64,
    /// Fill of the central 8×8 block.
    pub rho_center: f64,
    /// `|rho_center - rho_border|`.
    pub q_cb: f64,
}

pub fn extract_features(grid: &PixelGrid) -> FeatureVector {
    let cells = &grid.cells;
    let mut metal = 0usize;
    let mut center = 0usize;
    let mut eh = 0usize;
    let mut ev = 0usize;
    let mut run_sum = 0usize;
    for r in 0..GRID {
        for c in 0..GRID {
            let v = cells[r][c];
            if v {
                metal += 1;
                if (4..12).contains(&r) && (4..12).contains(&c) {
                    center += 1;
                }
            }
            if c + 1 < GRID && v != cells[r][c + 1] {
                eh += 1;
            }
            if r + 1 < GRID && v != cells[r + 1][c] {
                ev += 1;
            }
        }
    }
    for c in 0..GRID {
        let (mut cur, mut best) = (0usize, 0usize);
        for row in cells.iter() {
            cur = if row[c] { cur + 1 } else { 0 };
            best = best.max(cur);
        }
        run_sum += best;
    }
    let pairs = (GRID * (GRID - 1)) as f64;
    let rho_center = center as f64 / 64.0;
    let rho_border = (metal - center) as f64 / 192.0;
    FeatureVector {
        rho: metal as f64 / (GRID * GRID) as f64,
        v_conn: run_sum as f64 / (GRID * GRID) as f64,
        e_h: eh as f64 / pairs,
        e_v: ev as f64 / pairs,
        rho_center,
        q_cb: (rho_center - rho_border).abs(),
    }
}

/// Element values of the equivalent circuit (henries, farads).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OracleConstants {
    pub l_lead: f64,
    pub c_gap0: f64,
    pub c_gap1: f64,
    pub c_a: f64,
    pub c_b: f64,
    pub c_c: f64,
    pub l_a: f64,
    pub l_b: f64,
    pub l2_0: f64,
    pub c2_0: f64,
}

impl Default for OracleConstants {
    fn default() -> Self {
        OracleConstants {
            l_lead: 0.3e-9,
            c_gap0: 0.12e-12,
            c_gap1: 0.15e-12,
            c_a: 20e-15,
            c_b: 180e-15,
            c_c: 120e-15,
            l_a: 0.8e-9,
            l_b: 1.6e-9,
            l2_0: 0.5e-9,
            c2_0: 60e-15,
        }
    }
}

impl OracleConstants {
    fn values(&self) -> [f64; 10] {
        [
            self.l_lead,
            self.c_gap0,
            self.c_gap1,
            self.c_a,
            self.c_b,
            self.c_c,
            self.l_a,
            self.l_b,
            self.l2_0,
            self.c2_0,
        ]
    }

    pub fn validate(&self) -> Result<()> {
        if self.values().iter().all(|v| *v > 0.0 && v.is_finite()) {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!(
                "oracle constants must be positive: {self:?}"
            )))
        }
    }
}

/// 61 complex `S22` samples on the fixed 2.8–8.8 GHz grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralResponse {
    s22: Vec<Complex64>,
}

impl SpectralResponse {
    pub fn new(s22: Vec<Complex64>) -> Result<Self> {
        if s22.len() != N_FREQ {
            return Err(Error::InvalidArgument(format!(
                "spectral response needs {N_FREQ} points, got {}",
                s22.len()
            )));
        }
        Ok(SpectralResponse { s22 })
    }

    /// From the network layout: 61 real parts followed by 61 imaginary parts.
    pub fn from_split(values: &[f64]) -> Result<Self> {
        if values.len() != 2 * N_FREQ {
            return Err(Error::InvalidArgument(format!(
                "expected {} values, got {}",
                2 * N_FREQ,
                values.len()
            )));
        }
        Self::new(
            (0..N_FREQ)
                .map(|i| Complex64::new(values[i], values[N_FREQ + i]))
                .collect(),
        )
    }

    /// 61 real parts followed by 61 imaginary parts.
    pub fn to_split(&self) -> Vec<f64> {
        self.s22
            .iter()
            .map(|z| z.re)
            .chain(self.s22.iter().map(|z| z.im))
            .collect()
    }

    pub fn values(&self) -> &[Complex64] {
        &self.s22
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.s22
    }

    pub fn at(&self, i: usize) -> Complex64 {
        self.s22[i]
    }

    /// Linear interpolation between grid points; clamps outside the band.
    pub fn interpolate(&self, freq_hz: f64) -> Complex64 {
        if let Some(i) = grid_index(freq_hz) {
            return self.s22[i];
        }
        let x = ((freq_hz - FREQ_START_HZ) / FREQ_STEP_HZ).clamp(0.0, (N_FREQ - 1) as f64);
        let i = (x.floor() as usize).min(N_FREQ - 2);
        let t = x - i as f64;
        self.s22[i] * (1.0 - t) + self.s22[i + 1] * t
    }

    pub fn max_magnitude(&self) -> f64 {
        self.s22.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Largest step `|s22[i+1] - s22[i]|` along the grid.
    pub fn max_step(&self) -> f64 {
        self.s22
            .windows(2)
            .map(|w| (w[1] - w[0]).norm())
            .fold(0.0, f64::max)
    }
}

/// Anything that maps genomes to spectra: the oracle or a trained surrogate.
pub trait ResponseModel: Sync {
    fn predict_batch(&self, genomes: &[Genome]) -> Result<Vec<SpectralResponse>>;

    fn predict(&self, genome: Genome) -> Result<SpectralResponse> {
        Ok(self.predict_batch(&[genome])?.remove(0))
    }
}

fn series_lc_reactance(w: f64, l: f64, c: f64) -> f64 {
    w * l - 1.0 / (w * c)
}

/// `S22` at one frequency from precomputed features.
pub fn oracle_s22_features(
    fv: &FeatureVector,
    freq_hz: f64,
    consts: &OracleConstants,
    geom: &GeometryMeta,
) -> Result<Complex64> {
    if !(freq_hz > 0.0) || !freq_hz.is_finite() {
        return Err(Error::NonPositiveFrequency(freq_hz));
    }
    let k = consts;
    let c_gap = k.c_gap0 + k.c_gap1 * (1.0 - fv.rho_center);
    let l1 = k.l_a + k.l_b * (1.0 - fv.v_conn);
    let c1 = k.c_a + k.c_b * fv.rho + k.c_c * fv.e_h;
    let l2 = k.l2_0 * (1.0 + fv.q_cb);
    let c2 = k.c2_0 * (1.0 + fv.e_v);
    let sqrt_er = geom.eps_r.sqrt();
    let z_line = FREE_SPACE_ETA / sqrt_er;

    let mut f = freq_hz;
    loop {
        let w = 2.0 * PI * f;
        let x1 = series_lc_reactance(w, l1, c1);
        let x2 = series_lc_reactance(w, l2, c2);
        let x_stub = z_line * (2.0 * PI * f * sqrt_er * geom.substrate_height / SPEED_OF_LIGHT).tan();
        if x1.abs() < POLE_EPS || x2.abs() < POLE_EPS || x_stub.abs() < POLE_EPS {
            // Exact branch resonance: nudge deterministically off the pole.
            f += 1.0;
            continue;
        }
        // 1/(jX) = -j/X
        let b = -1.0 / x1 - 1.0 / x2 - 1.0 / x_stub;
        let y = Complex64::new(1.0 / FREE_SPACE_ETA, b);
        let z_series = Complex64::new(0.0, series_lc_reactance(w, k.l_lead, c_gap));
        let z_in = z_series + 1.0 / y;
        return Ok((z_in - FREE_SPACE_ETA) / (z_in + FREE_SPACE_ETA));
    }
}

pub fn oracle_s22(
    grid: &PixelGrid,
    freq_hz: f64,
    consts: &OracleConstants,
    geom: &GeometryMeta,
) -> Result<Complex64> {
    oracle_s22_features(&extract_features(grid), freq_hz, consts, geom)
}

pub fn oracle_response(
    grid: &PixelGrid,
    consts: &OracleConstants,
    geom: &GeometryMeta,
) -> Result<SpectralResponse> {
    let fv = extract_features(grid);
    let s22 = (0..N_FREQ)
        .map(|i| oracle_s22_features(&fv, grid_freq(i), consts, geom))
        .collect::<Result<Vec<_>>>()?;
    SpectralResponse::new(s22)
}

/// The oracle bound to a fixed set of constants and geometry.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Oracle {
    pub constants: OracleConstants,
    pub geometry: GeometryMeta,
}

impl Oracle {
    pub fn new(constants: OracleConstants, geometry: GeometryMeta) -> Result<Self> {
        constants.validate()?;
        geometry.validate()?;
        Ok(Oracle {
            constants,
            geometry,
        })
    }

    pub fn s22(&self, grid: &PixelGrid, freq_hz: f64) -> Result<Complex64> {
        oracle_s22(grid, freq_hz, &self.constants, &self.geometry)
    }

    pub fn response(&self, grid: &PixelGrid) -> Result<SpectralResponse> {
        oracle_response(grid, &self.constants, &self.geometry)
    }

    pub fn genome_response(&self, genome: Genome) -> Result<SpectralResponse> {
        self.response(&expand_genome(genome))
    }

    /// SHA-256 over every parameter that influences the output.
    pub fn fingerprint(&self) -> String {
        let g = &self.geometry;
        let mut h = Sha256::new();
        h.update(b"metacode-oracle-v1");
        for v in self.constants.values() {
            h.update(v.to_le_bytes());
        }
        for v in [g.eps_r, g.substrate_height] {
            h.update(v.to_le_bytes());
        }
        h.update((N_FREQ as u64).to_le_bytes());
        h.update(FREQ_START_HZ.to_le_bytes());
        h.update(FREQ_STEP_HZ.to_le_bytes());
        hex::encode(h.finalize())
    }
}

impl ResponseModel for Oracle {
    fn predict_batch(&self, genomes: &[Genome]) -> Result<Vec<SpectralResponse>> {
        genomes
            .par_iter()
            .map(|g| self.genome_response(*g))
            .collect()
    }
}
