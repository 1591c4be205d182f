//! 1-bit coding reflectarray: phase compensation, quantisation and
//! direct-summation far field.
//!
//! Elements sit on a centred `nx × ny` lattice in the `z = 0` plane. Row `m`
//! runs along `y` and column `n` along `x`, both from the negative side.

use std::f64::consts::{PI, TAU};
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::inverse::DesignReport;
use crate::oracle::grid_freq;
use crate::{Complex64, Error, Result, SPEED_OF_LIGHT};

/// Level assigned to zero power in dB outputs.
const DB_FLOOR: f64 = -300.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Feed {
    /// `cos^q_f` point source on the array axis at height `z` (metres),
    /// pointing at the array centre.
    Point { z: f64 },
    /// Uniform, in-phase illumination of every element.
    PlaneWave,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ArrayConfig {
    pub nx: usize,
    pub ny: usize,
    pub spacing: f64,
    pub feed: Feed,
    pub q_f: f64,
    /// Element pattern exponent; the element factor `cos^q_e(theta)` pulls
    /// steered peaks towards broadside.
    pub q_e: f64,
}

impl Default for ArrayConfig {
    fn default() -> Self {
        ArrayConfig {
            nx: 16,
            ny: 16,
            spacing: 25.8e-3,
            feed: Feed::Point { z: 0.31 },
            q_f: 6.0,
            q_e: 0.0,
        }
    }
}

impl ArrayConfig {
    pub fn validate(&self) -> Result<()> {
        let feed_ok = match self.feed {
            Feed::Point { z } => z > 0.0 && z.is_finite(),
            Feed::PlaneWave => true,
        };
        if self.nx == 0 || self.ny == 0 || !(self.spacing > 0.0) || !feed_ok || !(self.q_f >= 0.0) || !(self.q_e >= 0.0)
        {
            return Err(Error::InvalidArgument(format!("invalid array config: {self:?}")));
        }
        Ok(())
    }

    /// `(x, y)` of element `(m, n)`.
    pub fn position(&self, m: usize, n: usize) -> (f64, f64) {
        let x = (n as f64 - (self.nx as f64 - 1.0) / 2.0) * self.spacing;
        let y = (m as f64 - (self.ny as f64 - 1.0) / 2.0) * self.spacing;
        (x, y)
    }

    /// Feed-to-element distance, or `None` for plane-wave illumination.
    fn feed_distance(&self, x: f64, y: f64) -> Option<f64> {
        match self.feed {
            Feed::Point { z } => Some((x * x + y * y + z * z).sqrt()),
            Feed::PlaneWave => None,
        }
    }

    /// Complex feed illumination of element `(m, n)`.
    fn illumination(&self, m: usize, n: usize, k: f64) -> Complex64 {
        let (x, y) = self.position(m, n);
        match (self.feed, self.feed_distance(x, y)) {
            (Feed::Point { z }, Some(d)) => {
                let amp = (z / d).powf(self.q_f) / d;
                Complex64::from_polar(amp, -k * d)
            }
            _ => Complex64::new(1.0, 0.0),
        }
    }
}

fn wavenumber(freq_hz: f64) -> Result<f64> {
    if !(freq_hz > 0.0 && freq_hz.is_finite()) {
        return Err(Error::NonPositiveFrequency(freq_hz));
    }
    Ok(TAU * freq_hz / SPEED_OF_LIGHT)
}

/// Beam direction in degrees.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SteerTarget {
    pub theta0: f64,
    pub phi0: f64,
}

impl SteerTarget {
    pub fn new(theta0: f64, phi0: f64) -> Result<Self> {
        if !(0.0..90.0).contains(&theta0) || !(0.0..360.0).contains(&phi0) {
            return Err(Error::InvalidArgument(format!(
                "steer ({theta0}, {phi0}) outside theta [0, 90), phi [0, 360)"
            )));
        }
        Ok(SteerTarget { theta0, phi0 })
    }

    fn direction(&self) -> (f64, f64) {
        let (t, p) = (self.theta0.to_radians(), self.phi0.to_radians());
        (t.sin() * p.cos(), t.sin() * p.sin())
    }
}

impl FromStr for SteerTarget {
    type Err = Error;

    /// `theta:phi` in degrees.
    fn from_str(s: &str) -> Result<Self> {
        let (a, b) = s
            .split_once(':')
            .ok_or_else(|| Error::InvalidArgument(format!("steer must be theta:phi, got {s:?}")))?;
        let parse = |v: &str| {
            v.trim()
                .parse::<f64>()
                .map_err(|_| Error::InvalidArgument(format!("bad steer angle {v:?}")))
        };
        SteerTarget::new(parse(a)?, parse(b)?)
    }
}

/// Per-element phases in radians, `[row][col]`.
pub type PhaseMap = Vec<Vec<f64>>;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CodingMatrix {
    /// `[row][col]`, `true` is code 1.
    pub bits: Vec<Vec<bool>>,
}

impl CodingMatrix {
    pub fn uniform(cfg: &ArrayConfig, bit: bool) -> Self {
        CodingMatrix {
            bits: vec![vec![bit; cfg.nx]; cfg.ny],
        }
    }

    pub fn check_dims(&self, cfg: &ArrayConfig) -> Result<()> {
        if self.bits.len() != cfg.ny || self.bits.iter().any(|r| r.len() != cfg.nx) {
            return Err(Error::InvalidArgument(format!(
                "coding matrix does not match the {}x{} array",
                cfg.ny, cfg.nx
            )));
        }
        Ok(())
    }

    pub fn ones(&self) -> usize {
        self.bits.iter().flatten().filter(|b| **b).count()
    }

    /// Plain PBM, code 1 drawn black.
    pub fn render_pbm(&self) -> String {
        let rows = self.bits.len();
        let cols = self.bits.first().map_or(0, Vec::len);
        let mut out = format!("P1\n{cols} {rows}\n");
        for r in &self.bits {
            let line: Vec<&str> = r.iter().map(|b| if *b { "1" } else { "0" }).collect();
            out.push_str(&line.join(" "));
            out.push('\n');
        }
        out
    }
}

/// Phase that re-radiates the feed wave towards `steer`, wrapped to `[0, 2π)`:
/// `φ = k·d − k·(r·û0) + φ_ref`, where the first term cancels the feed path
/// delay `e^{-jkd}`.
pub fn ideal_phase(cfg: &ArrayConfig, steer: &SteerTarget, freq_hz: f64, ref_phase: f64) -> Result<PhaseMap> {
    cfg.validate()?;
    let k = wavenumber(freq_hz)?;
    let (ux, uy) = steer.direction();
    Ok((0..cfg.ny)
        .map(|m| {
            (0..cfg.nx)
                .map(|n| {
                    let (x, y) = cfg.position(m, n);
                    let feed = cfg.feed_distance(x, y).map_or(0.0, |d| k * d);
                    wrap_2pi(feed - k * (x * ux + y * uy) + ref_phase)
                })
                .collect()
        })
        .collect())
}

fn wrap_2pi(a: f64) -> f64 {
    let w = a.rem_euclid(TAU);
    if w >= TAU {
        0.0
    } else {
        w
    }
}

/// Code 0 for `[0, π)`, code 1 for `[π, 2π)`.
pub fn quantize_1bit(phases: &PhaseMap) -> CodingMatrix {
    CodingMatrix {
        bits: phases
            .iter()
            .map(|r| r.iter().map(|p| *p >= PI).collect())
            .collect(),
    }
}

/// Element reflection coefficients.
#[derive(Debug, Clone, Copy)]
pub enum Excitation<'a> {
    Coded {
        codes: &'a CodingMatrix,
        gamma0: Complex64,
        gamma1: Complex64,
    },
    /// Unit-amplitude reflection with the given phases (no quantisation).
    Continuous(&'a PhaseMap),
}

fn element_weights(cfg: &ArrayConfig, exc: &Excitation, k: f64) -> Result<Vec<(f64, f64, Complex64)>> {
    let gamma = |m: usize, n: usize| -> Complex64 {
        match exc {
            Excitation::Coded { codes, gamma0, gamma1 } => {
                if codes.bits[m][n] {
                    *gamma1
                } else {
                    *gamma0
                }
            }
            Excitation::Continuous(p) => Complex64::from_polar(1.0, p[m][n]),
        }
    };
    match exc {
        Excitation::Coded { codes, gamma0, gamma1 } => {
            codes.check_dims(cfg)?;
            for g in [gamma0, gamma1] {
                if !(g.norm() <= 1.0 + 1e-12) {
                    return Err(Error::ReflectionMagnitude(g.norm()));
                }
            }
        }
        Excitation::Continuous(p) => {
            if p.len() != cfg.ny || p.iter().any(|r| r.len() != cfg.nx) {
                return Err(Error::InvalidArgument("phase map does not match the array".into()));
            }
        }
    }
    let mut out = Vec::with_capacity(cfg.nx * cfg.ny);
    for m in 0..cfg.ny {
        for n in 0..cfg.nx {
            let (x, y) = cfg.position(m, n);
            out.push((x, y, cfg.illumination(m, n, k) * gamma(m, n)));
        }
    }
    Ok(out)
}

/// Unnormalised `|E|²` at each `(theta, phi)` direction in degrees. Negative
/// `theta` is the continuation of the cut through broadside.
pub fn far_field_power(
    cfg: &ArrayConfig,
    exc: &Excitation,
    freq_hz: f64,
    dirs: &[(f64, f64)],
) -> Result<Vec<f64>> {
    cfg.validate()?;
    let k = wavenumber(freq_hz)?;
    let w = element_weights(cfg, exc, k)?;
    Ok(dirs
        .par_iter()
        .map(|&(t, p)| {
            let (t, p) = (t.to_radians(), p.to_radians());
            let (ux, uy) = (t.sin() * p.cos(), t.sin() * p.sin());
            let sum: Complex64 = w
                .iter()
                .map(|(x, y, a)| a * Complex64::from_polar(1.0, k * (x * ux + y * uy)))
                .sum();
            let elem = t.cos().abs().powf(cfg.q_e);
            (sum * elem).norm_sqr()
        })
        .collect())
}

/// Power in dB relative to the largest entry.
pub fn normalize_db(power: &[f64]) -> Vec<f64> {
    let peak = power.iter().copied().fold(0.0, f64::max);
    power
        .iter()
        .map(|p| if *p > 0.0 && peak > 0.0 { (10.0 * (p / peak).log10()).max(DB_FLOOR) } else { DB_FLOOR })
        .collect()
}

/// Normalised pattern in dB at the given directions.
pub fn far_field(cfg: &ArrayConfig, exc: &Excitation, freq_hz: f64, dirs: &[(f64, f64)]) -> Result<Vec<f64>> {
    Ok(normalize_db(&far_field_power(cfg, exc, freq_hz, dirs)?))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PatternCut {
    pub phi_deg: f64,
    pub theta_deg: Vec<f64>,
    pub db: Vec<f64>,
}

impl PatternCut {
    pub fn peak_index(&self) -> usize {
        (0..self.db.len())
            .max_by(|a, b| self.db[*a].total_cmp(&self.db[*b]).then(b.cmp(a)))
            .unwrap_or(0)
    }

    pub fn peak_theta(&self) -> f64 {
        self.theta_deg[self.peak_index()]
    }

    /// Highest of the two lobes adjacent to the main beam, in dB.
    pub fn first_sidelobe_db(&self) -> Option<f64> {
        let p = &self.db;
        let i0 = self.peak_index();
        let side = |step: isize| -> Option<f64> {
            let at = |i: isize| (i >= 0 && (i as usize) < p.len()).then(|| p[i as usize]);
            let mut i = i0 as isize;
            // down the main lobe to the first null
            while let (Some(a), Some(b)) = (at(i), at(i + step)) {
                if b > a {
                    break;
                }
                i += step;
            }
            // up to the next local maximum
            let mut best = None;
            while let (Some(a), Some(b)) = (at(i), at(i + step)) {
                if b < a {
                    best = Some(a);
                    break;
                }
                i += step;
            }
            best
        };
        match (side(-1), side(1)) {
            (Some(a), Some(b)) => Some(a.max(b)),
            (a, b) => a.or(b),
        }
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("theta_deg,db\n");
        for (t, d) in self.theta_deg.iter().zip(&self.db) {
            out.push_str(&format!("{t},{d}\n"));
        }
        out
    }
}

/// `theta ∈ [-90, 90]` in `step_deg` increments in the plane `phi_deg`,
/// normalised to the cut's own peak.
pub fn principal_cut(
    cfg: &ArrayConfig,
    exc: &Excitation,
    freq_hz: f64,
    phi_deg: f64,
    step_deg: f64,
) -> Result<PatternCut> {
    if !(step_deg > 0.0) {
        return Err(Error::InvalidArgument(format!("angular step must be positive: {step_deg}")));
    }
    let n = (180.0 / step_deg).round() as usize;
    let theta: Vec<f64> = (0..=n).map(|i| -90.0 + i as f64 * step_deg).collect();
    let dirs: Vec<(f64, f64)> = theta.iter().map(|t| (*t, phi_deg)).collect();
    Ok(PatternCut {
        phi_deg,
        db: far_field(cfg, exc, freq_hz, &dirs)?,
        theta_deg: theta,
    })
}

/// `theta ∈ [0, 90]` × `phi ∈ [0, 360)` pattern, normalised to its peak.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Hemisphere {
    pub step_deg: f64,
    pub n_theta: usize,
    pub n_phi: usize,
    /// `[theta][phi]` row-major.
    pub db: Vec<f64>,
}

pub fn hemisphere(cfg: &ArrayConfig, exc: &Excitation, freq_hz: f64, step_deg: f64) -> Result<Hemisphere> {
    if !(step_deg > 0.0) {
        return Err(Error::InvalidArgument(format!("angular step must be positive: {step_deg}")));
    }
    let n_theta = (90.0 / step_deg).floor() as usize + 1;
    let n_phi = (360.0 / step_deg).round() as usize;
    let dirs: Vec<(f64, f64)> = (0..n_theta)
        .flat_map(|i| (0..n_phi).map(move |j| (i as f64 * step_deg, j as f64 * step_deg)))
        .collect();
    Ok(Hemisphere {
        step_deg,
        n_theta,
        n_phi,
        db: far_field(cfg, exc, freq_hz, &dirs)?,
    })
}

impl Hemisphere {
    /// Plain PGM, rows `theta`, columns `phi`, `[floor_db, 0]` mapped to `[0, 255]`.
    pub fn to_pgm(&self, floor_db: f64) -> String {
        let mut out = format!("P2\n{} {}\n255\n", self.n_phi, self.n_theta);
        for row in self.db.chunks(self.n_phi) {
            let line: Vec<String> = row
                .iter()
                .map(|d| {
                    let t = ((d - floor_db) / -floor_db).clamp(0.0, 1.0);
                    ((t * 255.0).round() as u8).to_string()
                })
                .collect();
            out.push_str(&line.join(" "));
            out.push('\n');
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerSweep {
    pub freqs_hz: Vec<f64>,
    /// Power towards the steer direction relative to the sweep maximum.
    pub power_db: Vec<f64>,
    /// Interpolated 3-dB edges around the design frequency.
    pub band_hz: Option<(f64, f64)>,
}

impl PowerSweep {
    pub fn band_percent(&self) -> Option<f64> {
        self.band_hz.map(|(a, b)| 200.0 * (b - a) / (a + b))
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("freq_hz,peak_db\n");
        for (f, p) in self.freqs_hz.iter().zip(&self.power_db) {
            out.push_str(&format!("{f},{p}\n"));
        }
        out
    }
}

/// Crossing of `level` between samples `(f0, p0)` and `(f1, p1)`.
fn crossing(f0: f64, p0: f64, f1: f64, p1: f64, level: f64) -> f64 {
    if p1 == p0 {
        return f0;
    }
    f0 + (level - p0) / (p1 - p0) * (f1 - f0)
}

/// Power towards `steer` at each frequency with `codes` held fixed. `gammas`
/// are the per-frequency state reflections.
pub fn spectral_power_sweep(
    cfg: &ArrayConfig,
    codes: &CodingMatrix,
    freqs_hz: &[f64],
    gammas: &[(Complex64, Complex64)],
    steer: &SteerTarget,
    design_freq_hz: f64,
) -> Result<PowerSweep> {
    if freqs_hz.is_empty() || freqs_hz.len() != gammas.len() {
        return Err(Error::InvalidArgument("sweep needs one gamma pair per frequency".into()));
    }
    let dir = [(steer.theta0, steer.phi0)];
    let power: Vec<f64> = freqs_hz
        .iter()
        .zip(gammas)
        .map(|(f, (g0, g1))| {
            let exc = Excitation::Coded {
                codes,
                gamma0: *g0,
                gamma1: *g1,
            };
            Ok(far_field_power(cfg, &exc, *f, &dir)?[0])
        })
        .collect::<Result<_>>()?;
    let db = normalize_db(&power);
    let i0 = (0..freqs_hz.len())
        .min_by(|a, b| {
            (freqs_hz[*a] - design_freq_hz)
                .abs()
                .total_cmp(&(freqs_hz[*b] - design_freq_hz).abs())
        })
        .expect("non-empty sweep");
    let level = -3.0;
    let band_hz = (db[i0] >= level).then(|| {
        let mut lo = i0;
        while lo > 0 && db[lo - 1] >= level {
            lo -= 1;
        }
        let mut hi = i0;
        while hi + 1 < db.len() && db[hi + 1] >= level {
            hi += 1;
        }
        let f_lo = if lo > 0 {
            crossing(freqs_hz[lo - 1], db[lo - 1], freqs_hz[lo], db[lo], level)
        } else {
            freqs_hz[lo]
        };
        let f_hi = if hi + 1 < db.len() {
            crossing(freqs_hz[hi], db[hi], freqs_hz[hi + 1], db[hi + 1], level)
        } else {
            freqs_hz[hi]
        };
        (f_lo, f_hi)
    });
    Ok(PowerSweep {
        freqs_hz: freqs_hz.to_vec(),
        power_db: db,
        band_hz,
    })
}

/// Sweep over the full frequency grid using a validated design's state
/// reflections, with codes synthesised at `design_freq_hz`.
pub fn sweep_design(
    cfg: &ArrayConfig,
    report: &DesignReport,
    steer: &SteerTarget,
    design_freq_hz: f64,
    ref_phase: f64,
) -> Result<(CodingMatrix, PowerSweep)> {
    let codes = quantize_1bit(&ideal_phase(cfg, steer, design_freq_hz, ref_phase)?);
    let freqs: Vec<f64> = (0..report.gamma0.len()).map(grid_freq).collect();
    let gammas: Vec<(Complex64, Complex64)> = report
        .gamma0
        .iter()
        .copied()
        .zip(report.gamma1.iter().copied())
        .collect();
    let sweep = spectral_power_sweep(cfg, &codes, &freqs, &gammas, steer, design_freq_hz)?;
    Ok((codes, sweep))
}

#[cfg(test)]
mod tests {
    use super::*;

    const F0: f64 = 5.8e9;

    fn plane() -> ArrayConfig {
        ArrayConfig {
            feed: Feed::PlaneWave,
            ..ArrayConfig::default()
        }
    }

    fn pm() -> (Complex64, Complex64) {
        (Complex64::new(1.0, 0.0), Complex64::new(-1.0, 0.0))
    }

    #[test]
    fn boresight_phases_fourfold_symmetric() {
        let cfg = ArrayConfig::default();
        let p = ideal_phase(&cfg, &SteerTarget::new(0.0, 0.0).unwrap(), F0, 0.0).unwrap();
        for m in 0..16 {
            for n in 0..16 {
                assert_eq!(p[m][n], p[15 - m][n]);
                assert_eq!(p[m][n], p[m][15 - n]);
                assert_eq!(p[m][n], p[n][m]);
            }
        }
    }

    #[test]
    fn plane_wave_boresight_phases_equal() {
        let p = ideal_phase(&plane(), &SteerTarget::new(0.0, 0.0).unwrap(), F0, 0.7).unwrap();
        assert!(p.iter().flatten().all(|v| *v == 0.7));
    }

    #[test]
    fn steer_gradient_per_column() {
        // Compare the steered and boresight maps so the feed term cancels.
        let cfg = ArrayConfig::default();
        let a = ideal_phase(&cfg, &SteerTarget::new(30.0, 0.0).unwrap(), F0, 0.0).unwrap();
        let b = ideal_phase(&cfg, &SteerTarget::new(0.0, 0.0).unwrap(), F0, 0.0).unwrap();
        let k = TAU * F0 / SPEED_OF_LIGHT;
        let expect = -k * 0.5 * cfg.spacing;
        for m in 0..16 {
            for n in 0..15 {
                let d = (a[m][n + 1] - b[m][n + 1]) - (a[m][n] - b[m][n]);
                let d = crate::netcalc::wrap_pi(d);
                assert!((d - crate::netcalc::wrap_pi(expect)).abs() < 1e-9);
            }
        }
        // Half-wavelength spacing gives exactly -π/2 per column.
        let lambda = SPEED_OF_LIGHT / F0;
        let half = ArrayConfig {
            spacing: lambda / 2.0,
            ..plane()
        };
        let p = ideal_phase(&half, &SteerTarget::new(30.0, 0.0).unwrap(), F0, 0.0).unwrap();
        let d = crate::netcalc::wrap_pi(p[0][1] - p[0][0]);
        assert!((d + PI / 2.0).abs() < 1e-9, "{d}");
    }

    #[test]
    fn quantisation_rule() {
        let z = vec![vec![0.0; 4]; 2];
        assert_eq!(quantize_1bit(&z).ones(), 0);
        let p = vec![vec![PI - 1e-12, PI, 1.5 * PI, TAU - 1e-9]];
        assert_eq!(quantize_1bit(&p).bits[0], vec![false, true, true, true]);
        let ramp: PhaseMap = vec![(0..8).map(|i| i as f64 * 0.5).collect()];
        let c = quantize_1bit(&ramp);
        let first = c.bits[0].iter().position(|b| *b).unwrap();
        assert_eq!(first, 7);
        assert!(ramp[0][6] < PI && ramp[0][7] >= PI);
    }

    #[test]
    fn uniform_aperture_sidelobe() {
        let cfg = plane();
        let p = ideal_phase(&cfg, &SteerTarget::new(0.0, 0.0).unwrap(), F0, 0.0).unwrap();
        let cut = principal_cut(&cfg, &Excitation::Continuous(&p), F0, 0.0, 0.25).unwrap();
        assert_eq!(cut.peak_theta(), 0.0);
        let sl = cut.first_sidelobe_db().unwrap();
        assert!((sl + 13.2).abs() < 0.3, "{sl}");
        assert!(cut.db.iter().all(|d| *d <= 0.0));
    }

    #[test]
    fn all_code_zero_plane_wave_is_array_factor() {
        let cfg = plane();
        let codes = CodingMatrix::uniform(&cfg, false);
        let (g0, g1) = pm();
        let exc = Excitation::Coded { codes: &codes, gamma0: g0, gamma1: g1 };
        let k = TAU * F0 / SPEED_OF_LIGHT;
        for t in [-40.0f64, -3.0, 0.0, 7.5, 61.0] {
            let got = far_field_power(&cfg, &exc, F0, &[(t, 0.0)]).unwrap()[0];
            let psi = k * cfg.spacing * t.to_radians().sin();
            let af = if psi.abs() < 1e-12 { 16.0 } else { (8.0 * psi).sin() / (psi / 2.0).sin() };
            let expect = (16.0 * af).powi(2);
            assert!((got - expect).abs() <= 1e-9 * expect.max(1.0), "{t}: {got} vs {expect}");
        }
    }

    #[test]
    fn one_bit_boresight_and_steering() {
        let cfg = ArrayConfig::default();
        let (g0, g1) = pm();
        for (t0, tol) in [(0.0, 1.0), (30.0, 1.5), (60.0, 1.5)] {
            let steer = SteerTarget::new(t0, 0.0).unwrap();
            let codes = quantize_1bit(&ideal_phase(&cfg, &steer, F0, 0.0).unwrap());
            let exc = Excitation::Coded { codes: &codes, gamma0: g0, gamma1: g1 };
            let cut = principal_cut(&cfg, &exc, F0, 0.0, 0.25).unwrap();
            assert!((cut.peak_theta() - t0).abs() <= tol, "{t0}: {}", cut.peak_theta());
        }
    }

    #[test]
    fn quantisation_loss_band() {
        let cfg = ArrayConfig::default();
        let steer = SteerTarget::new(0.0, 0.0).unwrap();
        let p = ideal_phase(&cfg, &steer, F0, 0.0).unwrap();
        let codes = quantize_1bit(&p);
        let (g0, g1) = pm();
        let cont = far_field_power(&cfg, &Excitation::Continuous(&p), F0, &[(0.0, 0.0)]).unwrap()[0];
        let exc = Excitation::Coded { codes: &codes, gamma0: g0, gamma1: g1 };
        let q = far_field_power(&cfg, &exc, F0, &[(0.0, 0.0)]).unwrap()[0];
        let loss = 10.0 * (cont / q).log10();
        assert!((2.0..=5.0).contains(&loss), "{loss}");
    }

    #[test]
    fn degenerate_states_no_beam() {
        let cfg = ArrayConfig::default();
        let steer = SteerTarget::new(0.0, 0.0).unwrap();
        let codes = quantize_1bit(&ideal_phase(&cfg, &steer, F0, 0.0).unwrap());
        let (g0, g1) = pm();
        let good = far_field_power(&cfg, &Excitation::Coded { codes: &codes, gamma0: g0, gamma1: g1 }, F0, &[(0.0, 0.0)])
            .unwrap()[0];
        let same = Complex64::new(-0.9, 0.0);
        let dirs: Vec<(f64, f64)> = (0..=720).map(|i| (-90.0 + i as f64 * 0.25, 0.0)).collect();
        let flat = far_field_power(&cfg, &Excitation::Coded { codes: &codes, gamma0: same, gamma1: same }, F0, &dirs)
            .unwrap();
        let flat_peak = flat.iter().copied().fold(0.0, f64::max);
        assert!(10.0 * (good / flat_peak).log10() >= 10.0);
    }

    #[test]
    fn steering_reciprocity() {
        let cfg = ArrayConfig::default();
        let a = ideal_phase(&cfg, &SteerTarget::new(25.0, 30.0).unwrap(), F0, 0.0).unwrap();
        let b = ideal_phase(&cfg, &SteerTarget::new(25.0, 210.0).unwrap(), F0, 0.0).unwrap();
        for m in 0..16 {
            for n in 0..16 {
                let d = crate::netcalc::wrap_pi(a[m][n] - b[15 - m][15 - n]);
                assert!(d.abs() < 1e-9);
            }
        }
        let dirs: Vec<(f64, f64)> = (0..=72).map(|i| (-90.0 + 2.5 * i as f64, 30.0)).collect();
        let mirrored: Vec<(f64, f64)> = dirs.iter().map(|(t, p)| (-t, *p)).collect();
        let pa = far_field(&cfg, &Excitation::Continuous(&a), F0, &dirs).unwrap();
        let pb = far_field(&cfg, &Excitation::Continuous(&b), F0, &mirrored).unwrap();
        for (x, y) in pa.iter().zip(&pb) {
            assert!((x - y).abs() < 1e-6 || (*x < -200.0 && *y < -200.0), "{x} {y}");
        }
    }

    #[test]
    fn grid_refinement_stable() {
        let cfg = ArrayConfig::default();
        let steer = SteerTarget::new(30.0, 0.0).unwrap();
        let codes = quantize_1bit(&ideal_phase(&cfg, &steer, F0, 0.0).unwrap());
        let (g0, g1) = pm();
        let exc = Excitation::Coded { codes: &codes, gamma0: g0, gamma1: g1 };
        let coarse = principal_cut(&cfg, &exc, F0, 0.0, 0.5).unwrap();
        let fine = principal_cut(&cfg, &exc, F0, 0.0, 0.25).unwrap();
        assert!((coarse.peak_theta() - fine.peak_theta()).abs() < 0.25 + 1e-9);
    }

    #[test]
    fn flat_sweep_contains_design_frequency() {
        let cfg = ArrayConfig::default();
        let steer = SteerTarget::new(0.0, 0.0).unwrap();
        let codes = quantize_1bit(&ideal_phase(&cfg, &steer, F0, 0.0).unwrap());
        let freqs: Vec<f64> = (0..61).map(grid_freq).collect();
        let gammas = vec![pm(); 61];
        let s = spectral_power_sweep(&cfg, &codes, &freqs, &gammas, &steer, F0).unwrap();
        let (lo, hi) = s.band_hz.unwrap();
        assert!(lo <= F0 && F0 <= hi);
        assert!(s.band_percent().unwrap() > 0.0);
        assert_eq!(s.to_csv().lines().count(), 62);
    }

    #[test]
    fn rejects_invalid_input() {
        assert!(SteerTarget::new(90.0, 0.0).is_err());
        assert!(SteerTarget::new(10.0, 360.0).is_err());
        assert!("30".parse::<SteerTarget>().is_err());
        assert_eq!("30:0".parse::<SteerTarget>().unwrap(), SteerTarget::new(30.0, 0.0).unwrap());
        let cfg = ArrayConfig { feed: Feed::Point { z: 0.0 }, ..ArrayConfig::default() };
        assert!(cfg.validate().is_err());
        let codes = CodingMatrix::uniform(&ArrayConfig::default(), false);
        let exc = Excitation::Coded {
            codes: &codes,
            gamma0: Complex64::new(1.2, 0.0),
            gamma1: Complex64::new(-1.0, 0.0),
        };
        assert!(far_field_power(&ArrayConfig::default(), &exc, F0, &[(0.0, 0.0)]).is_err());
        let small = ArrayConfig { nx: 4, ..ArrayConfig::default() };
        assert!(codes.check_dims(&small).is_err());
    }

    #[test]
    fn pgm_and_pbm_headers() {
        let cfg = ArrayConfig { nx: 4, ny: 3, ..ArrayConfig::default() };
        let codes = CodingMatrix::uniform(&cfg, true);
        assert!(codes.render_pbm().starts_with("P1\n4 3\n"));
        let p = ideal_phase(&cfg, &SteerTarget::new(0.0, 0.0).unwrap(), F0, 0.0).unwrap();
        let h = hemisphere(&cfg, &Excitation::Continuous(&p), F0, 10.0).unwrap();
        assert_eq!((h.n_theta, h.n_phi), (10, 36));
        let pgm = h.to_pgm(-40.0);
        assert!(pgm.starts_with("P2\n36 10\n255\n"));
        assert_eq!(pgm.lines().count(), 3 + 10);
    }
}
