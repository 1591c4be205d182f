use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use super::{ArrayArgs, Cli, Command, DesignArgs, Evaluator, GenArgs, TargetArgs, TrainArgs, ValidateArgs};
use crate::arraysim::{
    far_field_power, hemisphere, ideal_phase, principal_cut, quantize_1bit, sweep_design, Excitation,
};
use crate::config::RunConfig;
use crate::dataset::{self, Dataset};
use crate::inverse::{build_target, ga_run, validate_design, DesignReport, TargetSpec};
use crate::manifest::{self, sha256_hex, Manifest};
use crate::oracle::{grid_index, ResponseModel};
use crate::surrogate::{init_model, train, SurrogateModel};
use crate::{Complex64, Error, Result};

pub(super) struct Context {
    cfg: RunConfig,
    config_path: Option<PathBuf>,
    out_dir: PathBuf,
    args: Vec<String>,
}

impl Context {
    pub(super) fn new(cli: &Cli, args: &[String]) -> Result<Self> {
        let cfg = match &cli.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        let out_dir = cli.out.clone().unwrap_or_else(|| PathBuf::from(&cfg.out_dir));
        Ok(Context {
            cfg,
            config_path: cli.config.clone(),
            out_dir,
            args: args.to_vec(),
        })
    }

    pub(super) fn dispatch(&self, cmd: &Command, out: &mut (dyn Write + Send)) -> Result<()> {
        std::fs::create_dir_all(&self.out_dir)?;
        match cmd {
            Command::Target(a) => self.target(a, out),
            Command::Gen(a) => self.gen(a, out),
            Command::Train(a) => self.train(a, out),
            Command::Design(a) => self.design(a, out),
            Command::Validate(a) => self.validate(a, out),
            Command::Array(a) => self.array(a, out),
        }
    }

    fn manifest(&self, command: &str, cfg: &RunConfig) -> Result<Manifest> {
        let m = Manifest::new(command, self.args.clone(), &cfg.to_json());
        match &self.config_path {
            Some(p) => m.input(p),
            None => Ok(m),
        }
    }

    fn path(&self, name: &str) -> PathBuf {
        self.out_dir.join(name)
    }

    /// `p` as given if it exists, else under the output directory. A missing
    /// file is reported by the name the user gave.
    fn input(&self, p: &Path) -> Result<PathBuf> {
        if p.exists() {
            return Ok(p.to_path_buf());
        }
        let under = self.out_dir.join(p);
        if p.is_relative() && under.exists() {
            return Ok(under);
        }
        Err(Error::MissingArtifact(p.to_path_buf()))
    }

    fn write(&self, name: &str, bytes: &[u8], m: &Manifest) -> Result<PathBuf> {
        let p = self.path(name);
        manifest::write_artifact(&p, bytes, m)?;
        Ok(p)
    }

    fn target(&self, a: &TargetArgs, out: &mut (dyn Write + Send)) -> Result<()> {
        let band = a.band.or(a.freq.map(|f| (f, f)));
        let w_out = a.w_out.unwrap_or(self.cfg.anchor_weight);
        let t = build_target(band, &self.cfg.switch, &a.anchors, w_out)?;
        writeln!(out, "freq_hz re im weight kind")?;
        for p in t.points() {
            let kind = match p.kind {
                crate::inverse::PointKind::InBand => "in_band",
                crate::inverse::PointKind::Anchor => "anchor",
            };
            writeln!(out, "{:e} {:.4} {:.4} {} {kind}", p.freq_hz, p.re, p.im, p.weight)?;
        }
        let m = self.manifest("target", &self.cfg)?;
        let path = self.write(&a.name, serde_json::to_string_pretty(&t)?.as_bytes(), &m)?;
        writeln!(out, "wrote {}", path.display())?;
        Ok(())
    }

    fn gen(&self, a: &GenArgs, out: &mut (dyn Write + Send)) -> Result<()> {
        let n = a.n.unwrap_or(self.cfg.n_samples);
        let seed = a.seed.unwrap_or(self.cfg.seeds.dataset);
        let oracle = self.cfg.oracle()?;
        let start = Instant::now();
        let d = dataset::generate(n, seed, &oracle, None)?;
        let bytes = d.to_bytes()?;
        let mut cfg = self.cfg.clone();
        cfg.seeds.dataset = seed;
        cfg.n_samples = n;
        let m = self.manifest("gen", &cfg)?.seed("dataset", seed);
        let path = self.write(&a.name, &bytes, &m)?;
        let stats = dataset::stats(&d.samples);
        let stats_name = format!("{}.stats.csv", a.name);
        self.write(&stats_name, stats.to_csv().as_bytes(), &m.clone().input(&path)?)?;
        writeln!(out, "wrote {} ({n} samples, {:.1}s)", path.display(), start.elapsed().as_secs_f64())?;
        writeln!(out, "sha256 {}", sha256_hex(&bytes))?;
        write!(out, "{}", stats.summary())?;
        Ok(())
    }

    fn train(&self, a: &TrainArgs, out: &mut (dyn Write + Send)) -> Result<()> {
        let data_path = self.input(&a.dataset)?;
        let oracle = self.cfg.oracle()?;
        let fp = oracle.fingerprint();
        let d = Dataset::load(&data_path, Some(&fp))?;
        let (tr, va) = dataset::split(&d.samples)?;
        let mut cfg = self.cfg.clone();
        if let Some(e) = a.epochs {
            cfg.train.max_epochs = e;
        }
        if let Some(s) = a.seed {
            cfg.train.seed = s;
        }
        if let Some(s) = a.init_seed {
            cfg.seeds.init = s;
        }
        let start = Instant::now();
        let model = init_model(&cfg.arch, cfg.seeds.init)?;
        let (mut model, hist) = train(model, tr, va, &cfg.train)?;
        model.meta.dataset_fingerprint = Some(d.header.fingerprint.clone());
        let m = self
            .manifest("train", &cfg)?
            .seed("init", cfg.seeds.init)
            .seed("train", cfg.train.seed)
            .input(&data_path)?;
        let path = self.write(&a.name, &model.to_bytes(), &m)?;
        self.write(&format!("{}.history.csv", a.name), hist.to_csv().as_bytes(), &m)?;
        writeln!(
            out,
            "wrote {} ({} epochs, best val MAE {:.5} at epoch {}, {:?}, {:.1}s)",
            path.display(),
            hist.records.len() - 1,
            hist.best_val_mae,
            hist.best_epoch,
            hist.stop,
            start.elapsed().as_secs_f64()
        )?;
        Ok(())
    }

    fn load_target(&self, p: &Path) -> Result<(PathBuf, TargetSpec)> {
        let path = self.input(p)?;
        let t = serde_json::from_str(&std::fs::read_to_string(&path)?)?;
        Ok((path, t))
    }

    fn load_model(&self, p: &Path) -> Result<(PathBuf, SurrogateModel)> {
        let path = self.input(p)?;
        let m = SurrogateModel::load(&path)?;
        Ok((path, m))
    }

    fn write_report(&self, name: &str, report: &DesignReport, m: &Manifest, out: &mut (dyn Write + Send)) -> Result<()> {
        let json = self.write(&format!("{name}.json"), serde_json::to_string_pretty(report)?.as_bytes(), m)?;
        self.write(&format!("{name}.csv"), report.to_csv().as_bytes(), m)?;
        let grid = crate::pattern::expand_genome(report.genome);
        self.write(&format!("{name}.pbm"), grid.render_pbm().as_bytes(), m)?;
        self.write(&format!("{name}.txt"), report.summary().as_bytes(), m)?;
        write!(out, "{}", report.summary())?;
        writeln!(out, "wrote {}", json.display())?;
        Ok(())
    }

    fn design(&self, a: &DesignArgs, out: &mut (dyn Write + Send)) -> Result<()> {
        let (target_path, target) = self.load_target(&a.target)?;
        let mut cfg = self.cfg.clone();
        if let Some(s) = a.seed {
            cfg.ga.seed = s;
        }
        if let Some(p) = a.population {
            cfg.ga.population = p;
        }
        if let Some(g) = a.generations {
            cfg.ga.generations = g;
        }
        let oracle = cfg.oracle()?;
        let mut m = self.manifest("design", &cfg)?.seed("ga", cfg.ga.seed).input(&target_path)?;
        let surrogate = match a.evaluator {
            Evaluator::Oracle => None,
            Evaluator::Surrogate => {
                let (p, model) = self.load_model(&a.model)?;
                m = m.input(&p)?;
                Some(model)
            }
        };
        let evaluator: &dyn ResponseModel = match &surrogate {
            Some(s) => s,
            None => &oracle,
        };
        let start = Instant::now();
        let result = ga_run(&cfg.ga, evaluator, &target, &[])?;
        let predicted = match &surrogate {
            Some(s) => Some(s.predict(result.best)?),
            None => None,
        };
        let mut report = validate_design(result.best, &cfg.switch, &oracle, predicted, Some(target))?;
        report.fitness_history = result.history.clone();
        writeln!(
            out,
            "best {} fitness {:.4} (initial median {:.4}, {:.1}s)",
            result.best,
            result.best_fitness,
            result.baseline_median(),
            start.elapsed().as_secs_f64()
        )?;
        self.write(&format!("{}.history.csv", a.name), result.history_csv().as_bytes(), &m)?;
        self.write_report(&a.name, &report, &m, out)
    }

    fn validate(&self, a: &ValidateArgs, out: &mut (dyn Write + Send)) -> Result<()> {
        let oracle = self.cfg.oracle()?;
        let mut m = self.manifest("validate", &self.cfg)?;
        let target = match &a.target {
            Some(p) => {
                let (path, t) = self.load_target(p)?;
                m = m.input(&path)?;
                Some(t)
            }
            None => None,
        };
        let predicted = match &a.model {
            Some(p) => {
                let (path, model) = self.load_model(p)?;
                m = m.input(&path)?;
                Some(model.predict(a.genome)?)
            }
            None => None,
        };
        let report = validate_design(a.genome, &self.cfg.switch, &oracle, predicted, target)?;
        self.write_report(&a.name, &report, &m, out)
    }

    fn array(&self, a: &ArrayArgs, out: &mut (dyn Write + Send)) -> Result<()> {
        let cfg = &self.cfg;
        let freq = a.freq.unwrap_or(cfg.design_freq_hz);
        let ref_phase = a.ref_phase.unwrap_or(cfg.ref_phase);
        let mut m = self.manifest("array", cfg)?;
        let report: Option<DesignReport> = match &a.design {
            Some(p) => {
                let path = self.input(p)?;
                m = m.input(&path)?;
                Some(serde_json::from_str(&std::fs::read_to_string(&path)?)?)
            }
            None => None,
        };
        let (g0, g1) = match &report {
            Some(r) => {
                let i = grid_index(freq).ok_or_else(|| {
                    Error::InvalidArgument(format!("{freq} Hz is not a grid frequency of the design"))
                })?;
                (r.gamma0[i], r.gamma1[i])
            }
            None => (Complex64::new(1.0, 0.0), Complex64::new(-1.0, 0.0)),
        };
        let phases = ideal_phase(&cfg.array, &a.steer, cfg.design_freq_hz, ref_phase)?;
        let codes = quantize_1bit(&phases);
        let exc = if a.continuous {
            Excitation::Continuous(&phases)
        } else {
            Excitation::Coded {
                codes: &codes,
                gamma0: g0,
                gamma1: g1,
            }
        };
        self.write(&format!("{}.codes.pbm", a.name), codes.render_pbm().as_bytes(), &m)?;
        for phi in [a.steer.phi0, (a.steer.phi0 + 90.0) % 360.0] {
            let cut = principal_cut(&cfg.array, &exc, freq, phi, a.step)?;
            let name = format!("{}.cut_phi{}.csv", a.name, phi);
            self.write(&name, cut.to_csv().as_bytes(), &m)?;
            let sl = cut
                .first_sidelobe_db()
                .map_or("none".to_string(), |v| format!("{v:.2} dB"));
            writeln!(out, "phi {phi}: peak at theta {} deg, first sidelobe {sl}", cut.peak_theta())?;
        }
        let boresight = far_field_power(&cfg.array, &exc, freq, &[(a.steer.theta0, a.steer.phi0)])?[0];
        writeln!(out, "power towards steer {:.3} dB (unnormalised)", 10.0 * boresight.log10())?;
        if a.hemisphere {
            let h = hemisphere(&cfg.array, &exc, freq, 1.0)?;
            self.write(&format!("{}.hemisphere.pgm", a.name), h.to_pgm(-40.0).as_bytes(), &m)?;
        }
        if let Some(r) = &report {
            let (_, sweep) = sweep_design(&cfg.array, r, &a.steer, cfg.design_freq_hz, ref_phase)?;
            self.write(&format!("{}.sweep.csv", a.name), sweep.to_csv().as_bytes(), &m)?;
            match (sweep.band_hz, sweep.band_percent()) {
                (Some((lo, hi)), Some(pct)) => writeln!(
                    out,
                    "3-dB power band {:.3}-{:.3} GHz ({pct:.1}%)",
                    lo / 1e9,
                    hi / 1e9
                )?,
                _ => writeln!(out, "3-dB power band none")?,
            }
        }
        writeln!(out, "wrote {}", self.path(&format!("{}.codes.pbm", a.name)).display())?;
        Ok(())
    }
}
