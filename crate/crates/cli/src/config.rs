//! `key=value` pipeline configuration. Command-line flags override file values.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use policykit::corpus::SplitMode;

/// Environment variable naming the default config file.
pub const CONFIG_ENV: &str = "POLICYKIT_CONFIG";

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub corpus_dir: Option<PathBuf>,
    pub taxonomy: Option<PathBuf>,
    pub keywords: Option<PathBuf>,
    pub embeddings: Option<PathBuf>,
    pub block_model: Option<PathBuf>,
    pub model_dir: PathBuf,
    pub report_dir: PathBuf,
    pub r_h: f64,
    pub min_policy_chars: usize,
    pub split_mode: SplitMode,
    pub seed: u64,
    pub seeds: Vec<u64>,
    pub n_test: usize,
    pub test_fraction: f64,
    pub types: Vec<u8>,
    pub modes: Vec<SplitMode>,
    pub min_pos: usize,
    pub min_support: u64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            corpus_dir: None,
            taxonomy: None,
            keywords: None,
            embeddings: None,
            block_model: None,
            model_dir: PathBuf::from("models"),
            report_dir: PathBuf::from("reports"),
            r_h: 0.55,
            min_policy_chars: 200,
            split_mode: SplitMode::Document,
            seed: 1,
            seeds: vec![1],
            n_test: 30,
            test_fraction: 0.2,
            types: vec![1],
            modes: vec![SplitMode::Document],
            min_pos: 20,
            min_support: 5,
        }
    }
}

pub fn parse_list<T>(s: &str, item: impl Fn(&str) -> Option<T>, what: &str) -> Result<Vec<T>> {
    let out: Option<Vec<T>> = s.split(',').map(str::trim).filter(|x| !x.is_empty()).map(&item).collect();
    match out {
        Some(v) if !v.is_empty() => Ok(v),
        _ => bail!("invalid {what} list {s:?}"),
    }
}

pub fn parse_mode(s: &str) -> Result<SplitMode> {
    SplitMode::parse(s.trim()).with_context(|| format!("unknown split mode {s:?} (expected segment or document)"))
}

pub fn parse_types(s: &str) -> Result<Vec<u8>> {
    let v = parse_list(s, |x| x.parse::<u8>().ok().filter(|t| (1..=12).contains(t)), "type")?;
    Ok(v)
}

pub fn parse_modes(s: &str) -> Result<Vec<SplitMode>> {
    parse_list(s, |x| SplitMode::parse(x), "mode")
}

pub fn parse_seeds(s: &str) -> Result<Vec<u64>> {
    parse_list(s, |x| x.parse().ok(), "seed")
}

fn num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T> {
    v.parse().map_err(|_| anyhow::anyhow!("{key}: cannot parse {v:?}"))
}

impl PipelineConfig {
    /// Applies one `key=value` pair.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let v = value.trim();
        let path = || Some(PathBuf::from(v));
        match key {
            "corpus_dir" => self.corpus_dir = path(),
            "taxonomy" => self.taxonomy = path(),
            "keywords" => self.keywords = path(),
            "embeddings" => self.embeddings = path(),
            "block_model" => self.block_model = path(),
            "model_dir" => self.model_dir = PathBuf::from(v),
            "report_dir" => self.report_dir = PathBuf::from(v),
            "r_h" => self.r_h = num(key, v)?,
            "min_policy_chars" => self.min_policy_chars = num(key, v)?,
            "split_mode" => self.split_mode = parse_mode(v)?,
            "seed" => self.seed = num(key, v)?,
            "seeds" => self.seeds = parse_seeds(v)?,
            "n_test" => self.n_test = num(key, v)?,
            "test_fraction" => self.test_fraction = num(key, v)?,
            "types" => self.types = parse_types(v)?,
            "modes" => self.modes = parse_modes(v)?,
            "min_pos" => self.min_pos = num(key, v)?,
            "min_support" => self.min_support = num(key, v)?,
            _ => bail!("unknown config key {key:?}"),
        }
        Ok(())
    }

    /// Reads `key=value` lines; `#` starts a comment. Relative paths are
    /// taken relative to the file's directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        let mut cfg = Self::default();
        for (i, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .with_context(|| format!("{}:{}: expected key=value", path.display(), i + 1))?;
            cfg.set(k.trim(), v).with_context(|| format!("{}:{}", path.display(), i + 1))?;
        }
        if let Some(base) = path.parent() {
            cfg.rebase(base);
        }
        Ok(cfg)
    }

    fn rebase(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        for p in [&mut self.corpus_dir, &mut self.taxonomy, &mut self.keywords, &mut self.embeddings, &mut self.block_model]
            .into_iter()
            .flatten()
        {
            fix(p);
        }
        fix(&mut self.model_dir);
        fix(&mut self.report_dir);
    }

    /// The resolved configuration as `key=value` text, loadable by [`load`](Self::load).
    pub fn to_text(&self) -> String {
        let opt = |p: &Option<PathBuf>| p.as_ref().map(|p| p.display().to_string()).unwrap_or_default();
        let join = |v: Vec<String>| v.join(",");
        let mut lines = vec![
            ("corpus_dir", opt(&self.corpus_dir)),
            ("taxonomy", opt(&self.taxonomy)),
            ("keywords", opt(&self.keywords)),
            ("embeddings", opt(&self.embeddings)),
            ("block_model", opt(&self.block_model)),
            ("model_dir", self.model_dir.display().to_string()),
            ("report_dir", self.report_dir.display().to_string()),
            ("r_h", self.r_h.to_string()),
            ("min_policy_chars", self.min_policy_chars.to_string()),
            ("split_mode", self.split_mode.to_string()),
            ("seed", self.seed.to_string()),
            ("seeds", join(self.seeds.iter().map(u64::to_string).collect())),
            ("n_test", self.n_test.to_string()),
            ("test_fraction", self.test_fraction.to_string()),
            ("types", join(self.types.iter().map(u8::to_string).collect())),
            ("modes", join(self.modes.iter().map(SplitMode::to_string).collect())),
            ("min_pos", self.min_pos.to_string()),
            ("min_support", self.min_support.to_string()),
        ];
        lines.retain(|(_, v)| !v.is_empty());
        lines.into_iter().map(|(k, v)| format!("{k}={v}\n")).collect()
    }

    /// Fails naming the first referenced input that does not exist.
    pub fn check_inputs(&self) -> Result<()> {
        let named = [
            ("corpus_dir", &self.corpus_dir),
            ("taxonomy", &self.taxonomy),
            ("keywords", &self.keywords),
            ("embeddings", &self.embeddings),
            ("block_model", &self.block_model),
        ];
        for (key, p) in named {
            if let Some(p) = p {
                if !p.exists() {
                    bail!("{key} not found: {}", p.display());
                }
            }
        }
        if !(self.r_h > 0.0 && self.r_h < 1.0) {
            bail!("r_h must lie in (0, 1), got {}", self.r_h);
        }
        if !(self.test_fraction > 0.0 && self.test_fraction < 1.0) {
            bail!("test_fraction must lie in (0, 1), got {}", self.test_fraction);
        }
        Ok(())
    }

    pub fn corpus_dir(&self) -> Result<&Path> {
        self.corpus_dir.as_deref().context("no corpus directory: set corpus_dir or pass --corpus")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn file_values_and_rebasing() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.cfg");
        std::fs::write(&path, "# experiment\ncorpus_dir = corpus\ntypes=1, 2,11\nmodes=segment,document\nseed=7 # trailing\n")
            .unwrap();
        let cfg = PipelineConfig::load(&path).unwrap();
        assert_eq!(cfg.corpus_dir, Some(dir.path().join("corpus")));
        assert_eq!(cfg.types, [1, 2, 11]);
        assert_eq!(cfg.modes, [SplitMode::Segment, SplitMode::Document]);
        assert_eq!(cfg.seed, 7);
        assert_eq!(cfg.model_dir, dir.path().join("models"));
    }

    #[test]
    fn bad_lines_are_located() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.cfg");
        std::fs::write(&path, "seed=1\ncolour=blue\n").unwrap();
        let err = format!("{:#}", PipelineConfig::load(&path).unwrap_err());
        assert!(err.contains("bad.cfg:2") && err.contains("unknown config key \"colour\""), "{err}");
        assert!(parse_types("1,13").is_err());
        assert!(parse_modes("segment,pooled").is_err());
    }

    #[test]
    fn text_round_trip() {
        let mut cfg = PipelineConfig::default();
        cfg.set("types", "1,2").unwrap();
        cfg.set("embeddings", "/tmp/e.txt").unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.cfg");
        std::fs::write(&path, cfg.to_text()).unwrap();
        let mut back = PipelineConfig::load(&path).unwrap();
        back.model_dir = cfg.model_dir.clone();
        back.report_dir = cfg.report_dir.clone();
        assert_eq!(back, cfg);
    }
}
