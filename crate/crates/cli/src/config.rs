//! Run configuration: one TOML file, overridden by command-line flags.
//!
//! ```toml
//! manifest = "data/manifest.csv"   # relative to this file
//! output = "out"
//! pipeline = "block-ensemble"      # texture-nb | src | block-ensemble
//! seed = 7
//! positive-class = 0
//!
//! [ensemble]
//! block-width = 16
//! block-height = 16
//! decision = "bbll-s"
//!
//! [src]
//! keep = ["1/4", "1/20"]
//!
//! [selection]
//! method = "cfs-best-first"
//! ```
//!
//! Sections `ensemble`, `src`, `texture`, `selection`, `synth` and `loocv`
//! take the keys of the corresponding library configs.

use std::fs;
use std::path::{Path, PathBuf};

use bbsrc::ensemble::EnsembleConfig;
use bbsrc::featsel::SelectionConfig;
use bbsrc::imgio::{parse_fraction, KeepFraction, Undersampling};
use bbsrc::sparse::SolverConfig;
use bbsrc::synth::SynthConfig;
use bbsrc::texture::TextureConfig;
use bbsrc::{Error, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Pipeline {
    TextureNb,
    Src,
    #[default]
    BlockEnsemble,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
pub struct SrcSection {
    pub solver: SolverConfig,
    /// Undersampling fractions; crossval produces one report per entry.
    pub keep: Vec<String>,
    pub mode: Undersampling,
}

impl Default for SrcSection {
    fn default() -> Self {
        Self {
            solver: SolverConfig::default(),
            keep: vec!["1/4".into(), "1/20".into()],
            mode: Undersampling::default(),
        }
    }
}

impl SrcSection {
    pub fn fractions(&self) -> Result<Vec<KeepFraction>> {
        if self.keep.is_empty() {
            return Err(Error::InvalidArgument("src.keep lists no fractions".into()));
        }
        self.keep.iter().map(|k| parse_fraction(k)).collect()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
pub struct LoocvSection {
    pub allow_single_class_folds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
pub struct RunConfig {
    pub manifest: Option<PathBuf>,
    pub output: PathBuf,
    pub pipeline: Pipeline,
    /// Seeds the GA and the synthetic generator.
    pub seed: u64,
    pub positive_class: usize,
    pub ensemble: EnsembleConfig,
    pub src: SrcSection,
    pub texture: TextureConfig,
    pub selection: SelectionConfig,
    pub synth: SynthConfig,
    pub loocv: LoocvSection,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            manifest: None,
            output: PathBuf::from("out"),
            pipeline: Pipeline::default(),
            seed: 7,
            positive_class: 0,
            ensemble: EnsembleConfig::default(),
            src: SrcSection::default(),
            texture: TextureConfig::default(),
            selection: SelectionConfig::default(),
            synth: SynthConfig::default(),
            loocv: LoocvSection::default(),
        }
    }
}

impl RunConfig {
    /// Reads a config file; relative paths inside it resolve against its directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::InvalidArgument(format!("{}: {e}", path.display())))?;
        let mut cfg: RunConfig =
            toml::from_str(&text).map_err(|e| Error::InvalidArgument(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new(""));
        if let Some(m) = &cfg.manifest {
            cfg.manifest = Some(base.join(m));
        }
        cfg.output = base.join(&cfg.output);
        Ok(cfg)
    }

    /// Propagates the shared seed and positive class into the sections.
    pub fn finalize(&mut self) {
        self.selection.ga.seed = self.seed;
        self.synth.seed = self.seed;
        self.ensemble.positive_class = self.positive_class;
    }

    pub fn validate(&self) -> Result<()> {
        self.ensemble.validate()?;
        self.src.solver.validate()?;
        self.src.fractions()?;
        self.selection.validate()?;
        if let Some(m) = &self.manifest {
            if !m.is_file() {
                return Err(Error::InvalidArgument(format!(
                    "manifest {} does not exist",
                    m.display()
                )));
            }
        }
        Ok(())
    }

    pub fn manifest(&self) -> Result<&Path> {
        self.manifest
            .as_deref()
            .ok_or_else(|| Error::InvalidArgument("no manifest given (use --manifest or the config file)".into()))
    }

    /// Writes the effective configuration as `config.toml` into `dir`.
    pub fn write_to(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir).map_err(|e| io(dir, e))?;
        let text = toml::to_string(self).map_err(|e| Error::Parse(format!("config: {e}")))?;
        let path = dir.join("config.toml");
        fs::write(&path, text).map_err(|e| io(&path, e))
    }
}

pub fn io(path: &Path, source: std::io::Error) -> Error {
    Error::Io {
        path: path.to_path_buf(),
        source,
    }
}
