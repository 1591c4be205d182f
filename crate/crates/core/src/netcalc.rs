//! Two-port decoupling of a reconfigurable meta-atom.
//!
//! The meta-atom is a reciprocal two-port: port 1 faces free space, port 2 is
//! the switch location. For a lossless structure the free-space reflection
//! depends on the structure only through `S22`, so both coding states follow
//! from a single static response.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Free-space wave impedance used as the switch-port reference, ohms.
pub const FREE_SPACE_ETA: f64 = 377.0;

/// Denominators below this magnitude are treated as a network resonance.
const SINGULAR_EPS: f64 = 1e-12;

/// Residual below which a root of the coding equation is accepted.
const ROOT_ACCEPT: f64 = 1e-6;

/// Wraps an angle into `(-pi, pi]`.
pub fn wrap_pi(angle: f64) -> f64 {
    let r = angle.rem_euclid(2.0 * PI);
    if r > PI {
        r - 2.0 * PI
    } else {
        r
    }
}

/// Series R-L-C branch. `c = None` means no series capacitor (DC path).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rlc {
    pub r: f64,
    pub l: f64,
    #[serde(default)]
    pub c: Option<f64>,
}

impl Rlc {
    pub fn validate(&self) -> Result<()> {
        let c_ok = self.c.is_none_or(|c| c > 0.0 && c.is_finite());
        if self.r >= 0.0 && self.l >= 0.0 && self.r.is_finite() && self.l.is_finite() && c_ok {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!(
                "RLC branch needs R >= 0, L >= 0, C > 0: {self:?}"
            )))
        }
    }

    pub fn impedance(&self, freq_hz: f64) -> Result<Complex64> {
        if !(freq_hz > 0.0) {
            return Err(Error::NonPositiveFrequency(freq_hz));
        }
        let w = 2.0 * PI * freq_hz;
        let mut x = w * self.l;
        if let Some(c) = self.c {
            x -= 1.0 / (w * c);
        }
        Ok(Complex64::new(self.r, x))
    }
}

/// Coding state of the switch.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SwitchState {
    Zero,
    One,
}

impl SwitchState {
    pub fn from_bit(bit: bool) -> Self {
        if bit {
            SwitchState::One
        } else {
            SwitchState::Zero
        }
    }
}

/// Two-state lumped switch, each state a series RLC.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SwitchModel {
    pub state0: Rlc,
    pub state1: Rlc,
}

impl SwitchModel {
    /// SMP1340-class PIN diode: code 0 is the OFF state, code 1 the ON state.
    pub fn pin_diode() -> Self {
        SwitchModel {
            state0: Rlc {
                r: 10.0,
                l: 450e-12,
                c: Some(126e-15),
            },
            state1: Rlc {
                r: 1.0,
                l: 450e-12,
                c: None,
            },
        }
    }

    pub fn branch(&self, state: SwitchState) -> &Rlc {
        match state {
            SwitchState::Zero => &self.state0,
            SwitchState::One => &self.state1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.state0.validate()?;
        self.state1.validate()
    }

    /// Load reflection coefficients `(GammaL0, GammaL1)` at `freq_hz`.
    pub fn load_reflections(&self, freq_hz: f64) -> Result<(Complex64, Complex64)> {
        Ok((
            reflection_of_load(switch_impedance(self, SwitchState::Zero, freq_hz)?)?,
            reflection_of_load(switch_impedance(self, SwitchState::One, freq_hz)?)?,
        ))
    }
}

impl Default for SwitchModel {
    fn default() -> Self {
        Self::pin_diode()
    }
}

/// `Z = R + jwL + 1/(jwC)` for the selected switch state.
pub fn switch_impedance(model: &SwitchModel, state: SwitchState, freq_hz: f64) -> Result<Complex64> {
    model.branch(state).impedance(freq_hz)
}

/// `GammaL = (ZL - eta) / (ZL + eta)`.
pub fn reflection_of_load(zl: Complex64) -> Result<Complex64> {
    let den = zl + FREE_SPACE_ETA;
    if den.norm() == 0.0 {
        return Err(Error::SingularLoad(zl));
    }
    Ok((zl - FREE_SPACE_ETA) / den)
}

/// Inverse of [`reflection_of_load`]: `ZL = eta (1 + Gamma) / (1 - Gamma)`.
pub fn load_of_reflection(gamma: Complex64) -> Result<Complex64> {
    let den = Complex64::new(1.0, 0.0) - gamma;
    if den.norm() == 0.0 {
        return Err(Error::SingularReflection(gamma));
    }
    Ok(FREE_SPACE_ETA * (1.0 + gamma) / den)
}

/// Reciprocal two-port scattering matrix; `s21 == s12` is implied.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoPortS {
    pub s11: Complex64,
    pub s12: Complex64,
    pub s22: Complex64,
}

impl TwoPortS {
    /// Largest entry of `|S^H S - I|`.
    pub fn unitarity_error(&self) -> f64 {
        let s = [[self.s11, self.s12], [self.s12, self.s22]];
        let mut worst = 0.0f64;
        for i in 0..2 {
            for j in 0..2 {
                let mut acc = Complex64::new(0.0, 0.0);
                for row in s {
                    acc += row[i].conj() * row[j];
                }
                if i == j {
                    acc -= 1.0;
                }
                worst = worst.max(acc.norm());
            }
        }
        worst
    }
}

/// Free-space reflection of the loaded two-port:
/// `Gamma1 = S11 + S12^2 GammaL / (1 - S22 GammaL)`.
pub fn gamma1_full(s: &TwoPortS, gl: Complex64) -> Result<Complex64> {
    let den = 1.0 - s.s22 * gl;
    if den.norm() <= SINGULAR_EPS {
        return Err(Error::ResonanceSingularity(den.norm()));
    }
    Ok(s.s11 + s.s12 * s.s12 * gl / den)
}

/// Amplitude/phase description of a lossless reciprocal two-port.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitaryParams {
    a22: f64,
    theta11: f64,
    theta22: f64,
}

impl UnitaryParams {
    pub fn new(a22: f64, theta11: f64, theta22: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&a22) {
            return Err(Error::AmplitudeOutOfRange(a22));
        }
        Ok(UnitaryParams {
            a22,
            theta11: wrap_pi(theta11),
            theta22: wrap_pi(theta22),
        })
    }

    pub fn a22(&self) -> f64 {
        self.a22
    }

    pub fn theta11(&self) -> f64 {
        self.theta11
    }

    pub fn theta22(&self) -> f64 {
        self.theta22
    }
}

/// Builds the unitary S-matrix with `|S11| = |S22| = a22`.
///
/// Orthogonality of the columns fixes `2 theta12 = theta11 + theta22 + pi`;
/// the `+pi` branch is used.
pub fn unitary_from_params(p: &UnitaryParams) -> TwoPortS {
    let theta12 = 0.5 * (p.theta11 + p.theta22 + PI);
    let t = (1.0 - p.a22 * p.a22).max(0.0).sqrt();
    TwoPortS {
        s11: Complex64::from_polar(p.a22, p.theta11),
        s12: Complex64::from_polar(t, theta12),
        s22: Complex64::from_polar(p.a22, p.theta22),
    }
}

/// Free-space reflection of a lossless structure with the global
/// `e^{j theta11}` factor dropped:
/// `Gamma1 = (A22 - e^{j theta22} GammaL) / (1 - A22 e^{j theta22} GammaL)`.
pub fn gamma1_reduced(a22: f64, theta22: f64, gl: Complex64) -> Result<Complex64> {
    let zg = Complex64::from_polar(1.0, theta22) * gl;
    let den = 1.0 - a22 * zg;
    if den.norm() <= SINGULAR_EPS {
        return Err(Error::ResonanceSingularity(den.norm()));
    }
    Ok((a22 - zg) / den)
}

/// One root of the ideal-coding equation `Gamma1(GammaL0) = -Gamma1(GammaL1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TargetRoot {
    pub a22: f64,
    pub theta22: f64,
    pub residual: f64,
}

impl TargetRoot {
    pub fn s22(&self) -> Complex64 {
        Complex64::from_polar(self.a22, self.theta22)
    }
}

/// Result of [`solve_target_s22`]: the chosen (smallest `A22`) root plus every
/// distinct root with residual below `1e-6`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TargetSolution {
    pub a22: f64,
    pub theta22: f64,
    pub residual: f64,
    pub roots: Vec<TargetRoot>,
}

impl TargetSolution {
    pub fn s22(&self) -> Complex64 {
        Complex64::from_polar(self.a22, self.theta22)
    }
}

fn coding_residual(a22: f64, theta22: f64, gl0: Complex64, gl1: Complex64) -> Complex64 {
    let z = Complex64::from_polar(1.0, theta22);
    let f = |g: Complex64| (a22 - z * g) / (1.0 - a22 * z * g);
    f(gl0) + f(gl1)
}

/// Residual and its partial derivatives with respect to `a22` and `theta22`.
fn residual_and_jacobian(
    a22: f64,
    theta22: f64,
    gl0: Complex64,
    gl1: Complex64,
) -> (Complex64, Complex64, Complex64) {
    let z = Complex64::from_polar(1.0, theta22);
    let j = Complex64::i();
    let mut r = Complex64::new(0.0, 0.0);
    let mut dx = Complex64::new(0.0, 0.0);
    let mut dt = Complex64::new(0.0, 0.0);
    for g in [gl0, gl1] {
        let den = 1.0 - a22 * z * g;
        let den2 = den * den;
        r += (a22 - z * g) / den;
        dx += (1.0 - z * z * g * g) / den2;
        // d/dz times dz/dtheta = j z
        dt += g * (a22 * a22 - 1.0) / den2 * j * z;
    }
    (r, dx, dt)
}

/// Damped Gauss-Newton (Levenberg-Marquardt) on the two real unknowns.
fn refine_root(mut x: f64, mut t: f64, gl0: Complex64, gl1: Complex64) -> TargetRoot {
    let mut lambda = 1e-3;
    let (mut r, mut dx, mut dt) = residual_and_jacobian(x, t, gl0, gl1);
    let mut cost = r.norm_sqr();
    for _ in 0..200 {
        if cost < 1e-30 {
            break;
        }
        // J = [[dx.re, dt.re], [dx.im, dt.im]]
        let a11 = dx.norm_sqr();
        let a22 = dt.norm_sqr();
        let a12 = dx.re * dt.re + dx.im * dt.im;
        let g1 = dx.re * r.re + dx.im * r.im;
        let g2 = dt.re * r.re + dt.im * r.im;
        let mut accepted = false;
        for _ in 0..40 {
            let m11 = a11 * (1.0 + lambda) + 1e-300;
            let m22 = a22 * (1.0 + lambda) + 1e-300;
            let det = m11 * m22 - a12 * a12;
            if det == 0.0 || !det.is_finite() {
                lambda *= 4.0;
                continue;
            }
            let sx = -(m22 * g1 - a12 * g2) / det;
            let st = -(m11 * g2 - a12 * g1) / det;
            let (mut nx, mut nt) = (x + sx, t + st);
            if nx < 0.0 {
                // -x e^{jt} == x e^{j(t + pi)}
                nx = -nx;
                nt += PI;
            }
            nx = nx.min(1.0);
            nt = wrap_pi(nt);
            let (nr, ndx, ndt) = residual_and_jacobian(nx, nt, gl0, gl1);
            let ncost = nr.norm_sqr();
            if ncost.is_finite() && ncost < cost {
                x = nx;
                t = nt;
                r = nr;
                dx = ndx;
                dt = ndt;
                cost = ncost;
                lambda = (lambda / 3.0).max(1e-15);
                accepted = true;
                break;
            }
            lambda *= 4.0;
        }
        if !accepted {
            break;
        }
    }
    TargetRoot {
        a22: x,
        theta22: t,
        residual: cost.sqrt(),
    }
}

/// Solves `Gamma1(GammaL1) = -Gamma1(GammaL0)` for the switch-port response
/// `S22 = A22 e^{j theta22}` that yields ideal 1-bit coding.
///
/// A 200 x 360 grid over `(A22, theta22)` locates candidate minima of the
/// residual, each of which is polished by a damped Newton iteration. The root
/// with the smallest `A22` is returned; all distinct roots are kept in
/// [`TargetSolution::roots`]. When `A22` is zero the phase is meaningless and
/// is reported as 0.
pub fn solve_target_s22(gl0: Complex64, gl1: Complex64) -> Result<TargetSolution> {
    let contrast = (gl0 - gl1).norm();
    if contrast <= 1e-9 {
        return Err(Error::NoContrast(contrast));
    }

    const NA: usize = 200;
    const NT: usize = 360;
    let amp = |i: usize| i as f64 / (NA - 1) as f64;
    let ang = |j: usize| -PI + (j + 1) as f64 * 2.0 * PI / NT as f64;
    let mut grid = vec![0.0f64; NA * NT];
    for i in 0..NA {
        for j in 0..NT {
            let r = coding_residual(amp(i), ang(j), gl0, gl1).norm();
            grid[i * NT + j] = if r.is_finite() { r } else { f64::INFINITY };
        }
    }

    let mut seeds: Vec<(f64, usize, usize)> = Vec::new();
    for i in 0..NA {
        for j in 0..NT {
            let v = grid[i * NT + j];
            if !v.is_finite() {
                continue;
            }
            let mut is_min = true;
            'nb: for di in [-1i64, 0, 1] {
                let ii = i as i64 + di;
                if ii < 0 || ii >= NA as i64 {
                    continue;
                }
                for dj in [-1i64, 0, 1] {
                    if di == 0 && dj == 0 {
                        continue;
                    }
                    let jj = (j as i64 + dj).rem_euclid(NT as i64) as usize;
                    if grid[ii as usize * NT + jj] < v {
                        is_min = false;
                        break 'nb;
                    }
                }
            }
            if is_min {
                seeds.push((v, i, j));
            }
        }
    }
    seeds.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    seeds.truncate(24);

    let mut roots: Vec<TargetRoot> = Vec::new();
    let mut best: Option<TargetRoot> = None;
    for &(_, i, j) in &seeds {
        let mut root = refine_root(amp(i), ang(j), gl0, gl1);
        if root.a22 < 1e-12 {
            root.a22 = 0.0;
            root.theta22 = 0.0;
            root.residual = coding_residual(0.0, 0.0, gl0, gl1).norm();
        }
        if best.is_none_or(|b| root.residual < b.residual) {
            best = Some(root);
        }
        if root.residual < ROOT_ACCEPT && !roots.iter().any(|q| (q.s22() - root.s22()).norm() < 1e-6) {
            roots.push(root);
        }
    }
    roots.sort_by(|a, b| a.a22.total_cmp(&b.a22));

    match roots.first() {
        Some(chosen) => Ok(TargetSolution {
            a22: chosen.a22,
            theta22: chosen.theta22,
            residual: chosen.residual,
            roots: roots.clone(),
        }),
        None => {
            let b = best.unwrap_or(TargetRoot {
                a22: 0.0,
                theta22: 0.0,
                residual: f64::INFINITY,
            });
            Err(Error::NoSolution(Box::new(TargetSolution {
                a22: b.a22,
                theta22: b.theta22,
                residual: b.residual,
                roots: Vec::new(),
            })))
        }
    }
}

/// Reflection loss of both states and their phase difference.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CodingMetrics {
    pub loss0_db: f64,
    pub loss1_db: f64,
    /// `arg(Gamma0) - arg(Gamma1)` wrapped into `[0, 360)`.
    pub phase_diff_deg: f64,
}

impl CodingMetrics {
    /// Both losses within `max_loss_db` and the phase difference within
    /// `180 +/- tol_deg`.
    pub fn meets(&self, tol_deg: f64, max_loss_db: f64) -> bool {
        (self.phase_diff_deg - 180.0).abs() <= tol_deg
            && self.loss0_db <= max_loss_db
            && self.loss1_db <= max_loss_db
    }
}

pub fn coding_metrics(g0: Complex64, g1: Complex64) -> Result<CodingMetrics> {
    let loss = |g: Complex64| {
        let m = g.norm();
        if m > 0.0 && m.is_finite() {
            Ok(-20.0 * m.log10())
        } else {
            Err(Error::ReflectionMagnitude(m))
        }
    };
    let mut dphi = (g0.arg() - g1.arg()).to_degrees().rem_euclid(360.0);
    if dphi >= 360.0 {
        dphi = 0.0;
    }
    Ok(CodingMetrics {
        loss0_db: loss(g0)?,
        loss1_db: loss(g1)?,
        phase_diff_deg: dphi,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    // Values below were evaluated at 40 significant digits.
    const W_L_450P_5G8: f64 = 16.399_113_651_738_72;
    const OFF_X_5G8: f64 = -201.382_691_345_381_33;

    #[test]
    fn switch_impedance_pin_states() {
        let m = SwitchModel::pin_diode();
        let on = switch_impedance(&m, SwitchState::One, 5.8e9).unwrap();
        assert!((on - c(1.0, W_L_450P_5G8)).norm() < 1e-11);
        let off = switch_impedance(&m, SwitchState::Zero, 5.8e9).unwrap();
        assert!((off - c(10.0, OFF_X_5G8)).norm() < 1e-10);
    }

    #[test]
    fn resistor_only_branch() {
        let r = Rlc { r: 5.0, l: 0.0, c: None };
        for f in [1.0, 3e9, 8.8e9] {
            assert_eq!(r.impedance(f).unwrap(), c(5.0, 0.0));
        }
    }

    #[test]
    fn non_positive_frequency_rejected() {
        let m = SwitchModel::pin_diode();
        assert!(matches!(
            switch_impedance(&m, SwitchState::One, 0.0),
            Err(Error::NonPositiveFrequency(_))
        ));
        assert!(switch_impedance(&m, SwitchState::One, -1.0).is_err());
        assert!(switch_impedance(&m, SwitchState::One, f64::NAN).is_err());
    }

    #[test]
    fn load_reflection_examples() {
        assert_eq!(reflection_of_load(c(0.0, 0.0)).unwrap(), c(-1.0, 0.0));
        assert_eq!(reflection_of_load(c(377.0, 0.0)).unwrap(), c(0.0, 0.0));
        let g = reflection_of_load(c(1.0, W_L_450P_5G8)).unwrap();
        let expect = c(-0.990_961_680_988_767_5, 0.086_375_679_584_104_68);
        assert!((g - expect).norm() < 1e-14);
        assert!((g.norm() - 0.9947).abs() < 1e-4);
        assert!((g.arg().to_degrees() - 175.0).abs() < 0.05);
        assert!(matches!(
            reflection_of_load(c(-377.0, 0.0)),
            Err(Error::SingularLoad(_))
        ));
    }

    #[test]
    fn gamma1_full_trivial_cases() {
        let g = c(0.3, -0.4);
        let s = TwoPortS {
            s11: c(0.2, 0.1),
            s12: c(0.0, 0.0),
            s22: c(0.5, 0.5),
        };
        assert_eq!(gamma1_full(&s, g).unwrap(), s.s11);
        let s = TwoPortS {
            s11: c(0.2, 0.1),
            s12: c(0.7, 0.1),
            s22: c(0.5, 0.5),
        };
        assert_eq!(gamma1_full(&s, c(0.0, 0.0)).unwrap(), s.s11);
        let through = TwoPortS {
            s11: c(0.0, 0.0),
            s12: c(1.0, 0.0),
            s22: c(0.0, 0.0),
        };
        assert_eq!(gamma1_full(&through, g).unwrap(), g);
    }

    #[test]
    fn gamma1_full_resonance() {
        let s = TwoPortS {
            s11: c(0.0, 0.0),
            s12: c(0.0, 0.0),
            s22: c(1.0, 0.0),
        };
        assert!(matches!(
            gamma1_full(&s, c(1.0, 0.0)),
            Err(Error::ResonanceSingularity(_))
        ));
    }

    #[test]
    fn unitary_examples() {
        let s = unitary_from_params(&UnitaryParams::new(1.0, 0.0, 0.0).unwrap());
        assert_eq!(s.s11, c(1.0, 0.0));
        assert_eq!(s.s22, c(1.0, 0.0));
        assert_eq!(s.s12.norm(), 0.0);

        let s = unitary_from_params(&UnitaryParams::new(0.0, 0.0, 0.0).unwrap());
        assert_eq!(s.s11.norm(), 0.0);
        assert_eq!(s.s22.norm(), 0.0);
        assert!((s.s12.norm() - 1.0).abs() < 1e-15);

        let s = unitary_from_params(&UnitaryParams::new(0.6, 0.3, -1.1).unwrap());
        assert!(s.unitarity_error() < 1e-12);

        assert!(UnitaryParams::new(1.2, 0.0, 0.0).is_err());
        assert!(UnitaryParams::new(-0.1, 0.0, 0.0).is_err());
    }

    #[test]
    fn angles_normalised() {
        let p = UnitaryParams::new(0.5, 3.0 * PI, -PI).unwrap();
        assert!((p.theta11() - PI).abs() < 1e-12);
        assert!((p.theta22() - PI).abs() < 1e-12);
        assert_eq!(wrap_pi(0.0), 0.0);
        assert!((wrap_pi(-PI / 2.0) + PI / 2.0).abs() < 1e-15);
    }

    #[test]
    fn reduced_transparent_structure_negates_load() {
        let g = c(0.3, 0.6);
        assert_eq!(gamma1_reduced(0.0, 0.0, g).unwrap(), -g);
    }

    #[test]
    fn reduced_design_target_gives_opposite_states() {
        let (gl0, gl1) = SwitchModel::pin_diode().load_reflections(5.8e9).unwrap();
        let s = c(-0.72, 0.01);
        let g0 = gamma1_reduced(s.norm(), s.arg(), gl0).unwrap();
        let g1 = gamma1_reduced(s.norm(), s.arg(), gl1).unwrap();
        assert!((g0 + g1).norm() < 1e-2);
    }

    #[test]
    fn solve_pin_diode_target() {
        let (gl0, gl1) = SwitchModel::pin_diode().load_reflections(5.8e9).unwrap();
        let sol = solve_target_s22(gl0, gl1).unwrap();
        let s = sol.s22();
        assert!((-0.73..=-0.71).contains(&s.re), "{s}");
        assert!((0.0..=0.02).contains(&s.im), "{s}");
        assert!(sol.residual < 1e-9);
        assert!((sol.a22 - 0.72).abs() < 0.01);
        assert!((sol.theta22.to_degrees() - 179.2).abs() < 0.5);
    }

    #[test]
    fn solve_opposite_ideal_loads() {
        let sol = solve_target_s22(c(1.0, 0.0), c(-1.0, 0.0)).unwrap();
        assert_eq!(sol.a22, 0.0);
        assert_eq!(sol.theta22, 0.0);
    }

    #[test]
    fn solve_antisymmetric_loads() {
        for g in [c(0.5, 0.2), c(-0.1, 0.9), c(0.0, -0.3)] {
            let sol = solve_target_s22(g, -g).unwrap();
            assert_eq!(sol.a22, 0.0, "g = {g}");
        }
    }

    #[test]
    fn solve_no_contrast() {
        let g = c(0.3, 0.3);
        assert!(matches!(solve_target_s22(g, g), Err(Error::NoContrast(_))));
    }

    #[test]
    fn coding_metric_examples() {
        let m = coding_metrics(c(1.0, 0.0), c(-1.0, 0.0)).unwrap();
        assert_eq!((m.loss0_db, m.loss1_db), (0.0, 0.0));
        assert!((m.phase_diff_deg - 180.0).abs() < 1e-12);

        let m = coding_metrics(c(0.9, 0.0), c(-0.9, 0.0)).unwrap();
        assert!((m.loss0_db - 0.915_149_811_213_503_5).abs() < 1e-12);
        assert!((m.loss1_db - m.loss0_db).abs() < 1e-15);
        assert!((m.phase_diff_deg - 180.0).abs() < 1e-12);

        let m = coding_metrics(c(0.0, 1.0), c(1.0, 0.0)).unwrap();
        assert!((m.phase_diff_deg - 90.0).abs() < 1e-12);
        assert_eq!(m.loss0_db, 0.0);

        assert!(coding_metrics(c(0.0, 0.0), c(1.0, 0.0)).is_err());
    }
}
