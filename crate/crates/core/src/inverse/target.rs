use serde::{Deserialize, Serialize};

use crate::netcalc::{solve_target_s22, SwitchModel};
use crate::oracle::{grid_freq, grid_index, SpectralResponse, FREQ_START_HZ, N_FREQ};
use crate::{Complex64, Error, Result};

const FIT_EPS: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PointKind {
    InBand,
    Anchor,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TargetPoint {
    pub freq_hz: f64,
    pub re: f64,
    pub im: f64,
    pub weight: f64,
    pub kind: PointKind,
}

impl TargetPoint {
    pub fn value(&self) -> Complex64 {
        Complex64::new(self.re, self.im)
    }
}

/// A required `S22` value at a frequency.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Anchor {
    pub freq_hz: f64,
    pub re: f64,
    pub im: f64,
}

impl std::str::FromStr for Anchor {
    type Err = Error;

    /// `freq:re:im`, frequency in Hz.
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        let bad = || Error::InvalidArgument(format!("anchor must be freq:re:im, got {s:?}"));
        if parts.len() != 3 {
            return Err(bad());
        }
        let v: Vec<f64> = parts
            .iter()
            .map(|p| p.trim().parse::<f64>().map_err(|_| bad()))
            .collect::<Result<_>>()?;
        Ok(Anchor {
            freq_hz: v[0],
            re: v[1],
            im: v[2],
        })
    }
}

/// Weighted `S22` requirements. Points may sit between grid frequencies, in
/// which case the response is linearly interpolated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawTarget")]
pub struct TargetSpec {
    points: Vec<TargetPoint>,
}

#[derive(Deserialize)]
struct RawTarget {
    points: Vec<TargetPoint>,
}

impl TryFrom<RawTarget> for TargetSpec {
    type Error = Error;

    fn try_from(raw: RawTarget) -> Result<Self> {
        TargetSpec::new(raw.points)
    }
}

impl TargetSpec {
    pub fn new(points: Vec<TargetPoint>) -> Result<Self> {
        let lo = FREQ_START_HZ - 1.0;
        let hi = grid_freq(N_FREQ - 1) + 1.0;
        for p in &points {
            if !(lo..=hi).contains(&p.freq_hz) {
                return Err(Error::InvalidArgument(format!(
                    "target frequency {} Hz outside the 2.8-8.8 GHz grid",
                    p.freq_hz
                )));
            }
            if !(p.re.abs() <= 1.0 && p.im.abs() <= 1.0) {
                return Err(Error::InvalidArgument(format!(
                    "target value ({}, {}) outside [-1, 1]",
                    p.re, p.im
                )));
            }
            if !(p.weight >= 0.0 && p.weight.is_finite()) {
                return Err(Error::InvalidArgument(format!("bad weight {}", p.weight)));
            }
        }
        if !points.iter().any(|p| p.weight > 0.0) {
            return Err(Error::EmptyTarget);
        }
        Ok(TargetSpec { points })
    }

    pub fn points(&self) -> &[TargetPoint] {
        &self.points
    }

    pub fn in_band(&self) -> impl Iterator<Item = &TargetPoint> {
        self.points.iter().filter(|p| p.kind == PointKind::InBand)
    }

    /// The point at grid index `i`, if any.
    pub fn at_grid(&self, i: usize) -> Option<&TargetPoint> {
        self.points.iter().find(|p| grid_index(p.freq_hz) == Some(i))
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("freq_hz,re,im,weight,kind\n");
        for p in &self.points {
            let kind = match p.kind {
                PointKind::InBand => "in_band",
                PointKind::Anchor => "anchor",
            };
            out.push_str(&format!("{},{},{},{},{}\n", p.freq_hz, p.re, p.im, p.weight, kind));
        }
        out
    }
}

/// Solves the ideal-coding condition at every grid frequency in `band` and
/// appends the `anchors` with weight `w_out`.
pub fn build_target(
    band: Option<(f64, f64)>,
    switch: &SwitchModel,
    anchors: &[Anchor],
    w_out: f64,
) -> Result<TargetSpec> {
    switch.validate()?;
    let mut points = Vec::new();
    if let Some((lo, hi)) = band {
        if !(lo <= hi) {
            return Err(Error::InvalidArgument(format!("band start {lo} above end {hi}")));
        }
        if lo < FREQ_START_HZ - 1.0 || hi > grid_freq(N_FREQ - 1) + 1.0 {
            return Err(Error::InvalidArgument(format!(
                "band {lo}-{hi} Hz outside the 2.8-8.8 GHz grid"
            )));
        }
        for i in 0..N_FREQ {
            let f = grid_freq(i);
            if f < lo - 1.0 || f > hi + 1.0 {
                continue;
            }
            let (gl0, gl1) = switch.load_reflections(f)?;
            let s = solve_target_s22(gl0, gl1)?.s22();
            points.push(TargetPoint {
                freq_hz: f,
                re: s.re,
                im: s.im,
                weight: 1.0,
                kind: PointKind::InBand,
            });
        }
    }
    for a in anchors {
        points.push(TargetPoint {
            freq_hz: a.freq_hz,
            re: a.re,
            im: a.im,
            weight: w_out,
            kind: PointKind::Anchor,
        });
    }
    if points.is_empty() {
        return Err(Error::EmptyTarget);
    }
    TargetSpec::new(points)
}

/// Weighted mean over nonzero-weight points of `(|dRe| + |dIm|) / 2`.
pub fn target_mae(predicted: &SpectralResponse, target: &TargetSpec) -> f64 {
    let mut num = 0.0;
    let mut den = 0.0;
    for p in target.points.iter().filter(|p| p.weight > 0.0) {
        let d = predicted.interpolate(p.freq_hz) - p.value();
        num += p.weight * (d.re.abs() + d.im.abs()) / 2.0;
        den += p.weight;
    }
    num / den
}

pub fn fitness(predicted: &SpectralResponse, target: &TargetSpec) -> f64 {
    1.0 / (target_mae(predicted, target) + FIT_EPS)
}
