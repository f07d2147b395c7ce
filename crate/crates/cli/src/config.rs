//! Flat `key = value` config files, merged under the command-line flags.

use std::collections::BTreeSet;
use std::ffi::OsString;

use anyhow::{bail, Context, Result};
use clap::{ArgAction, Command};

/// Pulls `--config <path>` out of `args`.
pub fn take_config_path(args: &mut Vec<OsString>) -> Result<Option<String>> {
    let mut path = None;
    let mut i = 0;
    while i < args.len() {
        let a = args[i].to_string_lossy().into_owned();
        if a == "--config" {
            let Some(v) = args.get(i + 1) else {
                bail!("--config needs a path");
            };
            path = Some(v.to_string_lossy().into_owned());
            args.drain(i..i + 2);
        } else if let Some(v) = a.strip_prefix("--config=") {
            path = Some(v.to_string());
            args.remove(i);
        } else {
            i += 1;
        }
    }
    Ok(path)
}

/// Parses `text` into flags for `sub`. Blank lines and `#` comments are
/// skipped; `_` in keys is read as `-`. Keys that `sub` does not accept are
/// errors.
pub fn config_flags(text: &str, sub: &Command) -> Result<Vec<OsString>> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .with_context(|| format!("config line {}: expected key=value", i + 1))?;
        let key = k.trim().replace('_', "-");
        let value = v.trim();
        let arg = sub
            .get_arguments()
            .find(|a| a.get_long() == Some(key.as_str()))
            .with_context(|| {
                format!(
                    "config line {}: unknown key `{key}` for `{}`",
                    i + 1,
                    sub.get_name()
                )
            })?;
        if !seen.insert(key.clone()) {
            bail!("config line {}: duplicate key `{key}`", i + 1);
        }
        if matches!(arg.get_action(), ArgAction::SetTrue) {
            match value {
                "true" | "1" | "yes" => out.push(format!("--{key}").into()),
                "false" | "0" | "no" => {}
                _ => bail!("config line {}: `{key}` expects true or false", i + 1),
            }
        } else {
            out.push(format!("--{key}").into());
            out.push(value.into());
        }
    }
    Ok(out)
}

/// Inserts the config flags right after the subcommand name, so flags given
/// on the command line come later and win.
pub fn merge(args: Vec<OsString>, root: &Command, text: &str) -> Result<Vec<OsString>> {
    let pos = args
        .iter()
        .position(|a| root.find_subcommand(a).is_some())
        .context("--config needs a subcommand")?;
    let sub = root.find_subcommand(&args[pos]).expect("found above");
    let flags = config_flags(text, sub)?;
    let mut merged = args[..=pos].to_vec();
    merged.extend(flags);
    merged.extend_from_slice(&args[pos + 1..]);
    Ok(merged)
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::Arg;

    fn cmd() -> Command {
        Command::new("t").subcommand(
            Command::new("run")
                .arg(Arg::new("pe").long("pe"))
                .arg(Arg::new("tau-m").long("tau-m"))
                .arg(Arg::new("quick").long("quick").action(ArgAction::SetTrue)),
        )
    }

    #[test]
    fn merges_before_user_flags() {
        let args: Vec<OsString> = ["t", "run", "--pe", "0.2"].iter().map(Into::into).collect();
        let m = merge(args, &cmd(), "# c\npe = 0.1\ntau_m=0.5\nquick = true\n").unwrap();
        let m: Vec<String> = m.iter().map(|s| s.to_string_lossy().into_owned()).collect();
        assert_eq!(
            m,
            ["t", "run", "--pe", "0.1", "--tau-m", "0.5", "--quick", "--pe", "0.2"]
        );
    }

    #[test]
    fn rejects_unknown_keys() {
        let sub = cmd().find_subcommand("run").unwrap().clone();
        let e = config_flags("colour = red\n", &sub).unwrap_err();
        assert!(e.to_string().contains("unknown key `colour`"));
        assert!(config_flags("pe 3\n", &sub).is_err());
    }

    #[test]
    fn extracts_the_path() {
        let mut args: Vec<OsString> = ["t", "run", "--config=a.cfg", "--pe", "1"]
            .iter()
            .map(Into::into)
            .collect();
        assert_eq!(take_config_path(&mut args).unwrap().as_deref(), Some("a.cfg"));
        assert_eq!(args.len(), 4);
    }
}
