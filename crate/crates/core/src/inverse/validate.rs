use serde::{Deserialize, Serialize};

use super::ga::GenerationStats;
use super::target::TargetSpec;
use crate::netcalc::{coding_metrics, gamma1_reduced, CodingMetrics, SwitchModel};
use crate::oracle::{grid_freq, grid_index, Oracle, SpectralResponse, N_FREQ};
use crate::pattern::Genome;
use crate::{Complex64, Result};

/// Phase tolerance around 180 degrees for the operating band.
pub const BAND_PHASE_TOL_DEG: f64 = 45.0;
/// Maximum reflection loss of either state inside the operating band.
pub const BAND_MAX_LOSS_DB: f64 = 1.5;
/// Per-frequency `|predicted - oracle|` above which a point is flagged.
pub const DISAGREEMENT_THRESHOLD: f64 = 0.1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignReport {
    pub genome: Genome,
    pub oracle: SpectralResponse,
    pub predicted: Option<SpectralResponse>,
    pub target: Option<TargetSpec>,
    pub gamma0: Vec<Complex64>,
    pub gamma1: Vec<Complex64>,
    pub metrics: Vec<CodingMetrics>,
    /// Grid points meeting the phase and loss rule.
    pub passing: Vec<bool>,
    /// Inclusive grid index range of the longest passing run.
    pub operating_band: Option<(usize, usize)>,
    pub disagreement: Vec<bool>,
    pub fitness_history: Vec<GenerationStats>,
}

/// Inclusive `(start, end)` index ranges of consecutive `true` entries.
pub fn contiguous_runs(flags: &[bool]) -> Vec<(usize, usize)> {
    let mut runs = Vec::new();
    let mut start = None;
    for (i, &f) in flags.iter().enumerate() {
        match (f, start) {
            (true, None) => start = Some(i),
            (false, Some(s)) => {
                runs.push((s, i - 1));
                start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = start {
        runs.push((s, flags.len() - 1));
    }
    runs
}

/// Re-loads both switch states on the oracle response of `genome`.
pub fn validate_design(
    genome: Genome,
    switch: &SwitchModel,
    oracle: &Oracle,
    predicted: Option<SpectralResponse>,
    target: Option<TargetSpec>,
) -> Result<DesignReport> {
    switch.validate()?;
    let response = oracle.genome_response(genome)?;
    let mut gamma0 = Vec::with_capacity(N_FREQ);
    let mut gamma1 = Vec::with_capacity(N_FREQ);
    let mut metrics = Vec::with_capacity(N_FREQ);
    for (i, s) in response.values().iter().enumerate() {
        let (gl0, gl1) = switch.load_reflections(grid_freq(i))?;
        let g0 = gamma1_reduced(s.norm(), s.arg(), gl0)?;
        let g1 = gamma1_reduced(s.norm(), s.arg(), gl1)?;
        metrics.push(coding_metrics(g0, g1)?);
        gamma0.push(g0);
        gamma1.push(g1);
    }
    let passing: Vec<bool> = metrics
        .iter()
        .map(|m| m.meets(BAND_PHASE_TOL_DEG, BAND_MAX_LOSS_DB))
        .collect();
    let operating_band = contiguous_runs(&passing)
        .into_iter()
        .fold(None, |best: Option<(usize, usize)>, r| match best {
            Some(b) if b.1 - b.0 >= r.1 - r.0 => Some(b),
            _ => Some(r),
        });
    let disagreement = match &predicted {
        Some(p) => p
            .values()
            .iter()
            .zip(response.values())
            .map(|(a, b)| (a - b).norm() > DISAGREEMENT_THRESHOLD)
            .collect(),
        None => vec![false; N_FREQ],
    };
    Ok(DesignReport {
        genome,
        oracle: response,
        predicted,
        target,
        gamma0,
        gamma1,
        metrics,
        passing,
        operating_band,
        disagreement,
        fitness_history: Vec::new(),
    })
}

impl DesignReport {
    /// Number of grid points in the operating band.
    pub fn band_len(&self) -> usize {
        self.operating_band.map_or(0, |(a, b)| b - a + 1)
    }

    pub fn band_hz(&self) -> Option<(f64, f64)> {
        self.operating_band.map(|(a, b)| (grid_freq(a), grid_freq(b)))
    }

    /// Fractional bandwidth of the operating band relative to its centre, in percent.
    pub fn band_percent(&self) -> Option<f64> {
        self.band_hz().map(|(a, b)| 200.0 * (b - a) / (a + b))
    }

    /// MAE of `(|dRe| + |dIm|) / 2` between prediction and oracle over the
    /// in-band target points.
    pub fn prediction_mae(&self) -> Option<f64> {
        let p = self.predicted.as_ref()?;
        let t = self.target.as_ref()?;
        let idx: Vec<usize> = t.in_band().filter_map(|pt| grid_index(pt.freq_hz)).collect();
        if idx.is_empty() {
            return None;
        }
        let sum: f64 = idx
            .iter()
            .map(|&i| {
                let d = p.at(i) - self.oracle.at(i);
                (d.re.abs() + d.im.abs()) / 2.0
            })
            .sum();
        Some(sum / idx.len() as f64)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "freq_hz,target_re,target_im,pred_re,pred_im,oracle_re,oracle_im,\
             gamma0_re,gamma0_im,gamma1_re,gamma1_im,loss0_db,loss1_db,phase_diff_deg,passing,disagree\n",
        );
        let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        for i in 0..N_FREQ {
            let t = self.target.as_ref().and_then(|t| t.at_grid(i));
            let p = self.predicted.as_ref().map(|p| p.at(i));
            let o = self.oracle.at(i);
            let m = &self.metrics[i];
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
                grid_freq(i),
                opt(t.map(|t| t.re)),
                opt(t.map(|t| t.im)),
                opt(p.map(|p| p.re)),
                opt(p.map(|p| p.im)),
                o.re,
                o.im,
                self.gamma0[i].re,
                self.gamma0[i].im,
                self.gamma1[i].re,
                self.gamma1[i].im,
                m.loss0_db,
                m.loss1_db,
                m.phase_diff_deg,
                u8::from(self.passing[i]),
                u8::from(self.disagreement[i]),
            ));
        }
        out
    }

    pub fn summary(&self) -> String {
        let mut s = format!("genome {}\n", self.genome);
        match (self.band_hz(), self.band_percent()) {
            (Some((a, b)), Some(pct)) => s.push_str(&format!(
                "operating band {:.2}-{:.2} GHz ({} grid points, {:.1}%)\n",
                a / 1e9,
                b / 1e9,
                self.band_len(),
                pct
            )),
            _ => s.push_str("operating band none\n"),
        }
        let runs = contiguous_runs(&self.passing);
        if runs.len() > 1 {
            let list: Vec<String> = runs
                .iter()
                .map(|(a, b)| format!("{:.1}-{:.1}", grid_freq(*a) / 1e9, grid_freq(*b) / 1e9))
                .collect();
            s.push_str(&format!("passing runs (GHz) {}\n", list.join(", ")));
        }
        if let Some(i) = grid_index(5.8e9) {
            let m = &self.metrics[i];
            s.push_str(&format!(
                "at 5.8 GHz: phase diff {:.1} deg, loss {:.2} / {:.2} dB\n",
                m.phase_diff_deg, m.loss0_db, m.loss1_db
            ));
        }
        if self.predicted.is_some() {
            let n = self.disagreement.iter().filter(|d| **d).count();
            s.push_str(&format!("prediction disagrees (>{DISAGREEMENT_THRESHOLD}) at {n} grid points\n"));
            if let Some(mae) = self.prediction_mae() {
                s.push_str(&format!("in-band prediction MAE {mae:.4}\n"));
            }
        }
        if let (Some(first), Some(last)) = (self.fitness_history.first(), self.fitness_history.last()) {
            s.push_str(&format!(
                "fitness {:.3} (initial median {:.3}, {} generations)\n",
                last.best,
                first.median,
                self.fitness_history.len() - 1
            ));
        }
        s
    }
}
