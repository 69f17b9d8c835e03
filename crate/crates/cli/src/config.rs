//! Configuration file loading and flag resolution.
//!
//! Precedence per field: command-line flag, then config file, then built-in
//! default. Relative paths inside a config file resolve against the file's
//! own directory, so a project config works from any working directory.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use kprofile::profile::{ValidityPolicy, Window};

use crate::{Cli, Failure};

pub const DEFAULT_TAXONOMY_VERSION: &str = "1.0.0";

/// Fully resolved settings for one invocation.
#[derive(Debug)]
pub struct Settings {
    pub taxonomy_version: String,
    pub taxonomy_dir: PathBuf,
    pub reference: Option<PathBuf>,
    pub output_dir: PathBuf,
    pub depth: u32,
    pub policy: ValidityPolicy,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    taxonomy_version: Option<String>,
    taxonomy_dir: Option<PathBuf>,
    reference: Option<PathBuf>,
    output_dir: Option<PathBuf>,
    depth: Option<u32>,
    #[serde(default)]
    validity: ValiditySection,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ValiditySection {
    cer_days: Option<u32>,
    tra_days: Option<u32>,
    exp_days: Option<u32>,
}

pub fn resolve(cli: &Cli) -> Result<Settings, Failure> {
    let located = locate(cli);
    let file = match &located {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?;
            toml::from_str::<ConfigFile>(&text)
                .map_err(|e| Failure::Validation(format!("{}: {e}", path.display())))?
        }
        None => ConfigFile::default(),
    };
    let base = located
        .as_deref()
        .and_then(Path::parent)
        .filter(|p| !p.as_os_str().is_empty())
        .unwrap_or(Path::new("."))
        .to_path_buf();
    let label = located
        .as_deref()
        .map(|p| p.display().to_string())
        .unwrap_or_else(|| "configuration".to_string());

    let taxonomy_dir = match (&cli.taxonomy_dir, file.taxonomy_dir) {
        (Some(flag), _) => flag.clone(),
        (None, Some(dir)) => {
            let dir = against(&base, dir);
            if !dir.is_dir() {
                return Err(Failure::Validation(format!(
                    "{label}: taxonomy directory `{}` does not exist",
                    dir.display()
                )));
            }
            dir
        }
        (None, None) => PathBuf::from("data/taxonomy"),
    };

    let reference = match (&cli.reference, file.reference) {
        (Some(flag), _) => Some(flag.clone()),
        (None, Some(path)) => {
            let path = against(&base, path);
            if !path.is_file() {
                return Err(Failure::Validation(format!(
                    "{label}: mapping reference `{}` does not exist",
                    path.display()
                )));
            }
            Some(path)
        }
        (None, None) => None,
    };

    let output_dir = cli
        .output_dir
        .clone()
        .or_else(|| file.output_dir.map(|d| against(&base, d)))
        .unwrap_or_else(|| PathBuf::from("out"));

    let depth = file.depth.unwrap_or(2);
    if depth == 0 {
        return Err(Failure::Validation(format!(
            "{label}: depth must be at least 1"
        )));
    }

    let mut policy = ValidityPolicy::default();
    override_window(&label, "cer_days", file.validity.cer_days, &mut policy.cer)?;
    override_window(&label, "tra_days", file.validity.tra_days, &mut policy.tra)?;
    override_window(&label, "exp_days", file.validity.exp_days, &mut policy.exp)?;

    Ok(Settings {
        taxonomy_version: cli
            .taxonomy_version
            .clone()
            .or(file.taxonomy_version)
            .unwrap_or_else(|| DEFAULT_TAXONOMY_VERSION.to_string()),
        taxonomy_dir,
        reference,
        output_dir,
        depth,
        policy,
    })
}

fn locate(cli: &Cli) -> Option<PathBuf> {
    cli.config.clone().or_else(|| {
        let default = PathBuf::from("kprofile.toml");
        default.is_file().then_some(default)
    })
}

fn against(base: &Path, path: PathBuf) -> PathBuf {
    if path.is_absolute() {
        path
    } else {
        base.join(path)
    }
}

fn override_window(
    label: &str,
    name: &str,
    days: Option<u32>,
    slot: &mut Window,
) -> Result<(), Failure> {
    if let Some(d) = days {
        if d == 0 {
            return Err(Failure::Validation(format!(
                "{label}: validity.{name} must be positive"
            )));
        }
        *slot = Window::Days(d);
    }
    Ok(())
}
