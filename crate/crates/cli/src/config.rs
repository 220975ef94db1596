//! `--config FILE` support: `key=value` lines are turned into flags and
//! appended to the subcommand's arguments unless the flag was given already.

use std::fs;

use clap::{ArgAction, CommandFactory};

use crate::args::Cli;
use crate::{CliError, CliResult};

fn config_path(argv: &[String]) -> CliResult<Option<String>> {
    for (i, a) in argv.iter().enumerate() {
        if a == "--config" {
            return argv
                .get(i + 1)
                .cloned()
                .map(Some)
                .ok_or_else(|| CliError::Usage("--config needs a file".into()));
        }
        if let Some(v) = a.strip_prefix("--config=") {
            return Ok(Some(v.to_string()));
        }
    }
    Ok(None)
}

fn given(argv: &[String], long: &str) -> bool {
    let flag = format!("--{long}");
    let with_value = format!("--{long}=");
    argv.iter().any(|a| *a == flag || a.starts_with(&with_value))
}

pub fn merge_config(argv: Vec<String>) -> CliResult<Vec<String>> {
    let Some(path) = config_path(&argv)? else {
        return Ok(argv);
    };
    let text = fs::read_to_string(&path)?;

    let mut root = Cli::command();
    root.build();
    // Walk subcommand names to find the leaf command and where its arguments start.
    let mut cmd = &root;
    let mut insert_at = argv.len();
    for (i, tok) in argv.iter().enumerate().skip(1) {
        if let Some(sub) = cmd.find_subcommand(tok) {
            cmd = sub;
            insert_at = i + 1;
        }
    }
    if std::ptr::eq(cmd, &root) {
        return Ok(argv);
    }

    let mut extra = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("{path}:{}: expected key=value", lineno + 1)))?;
        let key = key.trim().replace('_', "-");
        let value = value.trim();
        if key == "config" {
            continue;
        }
        let Some(arg) = cmd.get_arguments().find(|a| a.get_long() == Some(key.as_str())) else {
            continue;
        };
        if given(&argv, &key) {
            continue;
        }
        match arg.get_action() {
            ArgAction::SetTrue => match value {
                "true" | "1" | "yes" => extra.push(format!("--{key}")),
                "false" | "0" | "no" => {}
                other => {
                    return Err(CliError::Usage(format!(
                        "{path}:{}: {key} expects true or false, got {other:?}",
                        lineno + 1
                    )))
                }
            },
            _ => {
                extra.push(format!("--{key}"));
                extra.push(value.to_string());
            }
        }
    }
    let mut merged = argv;
    merged.splice(insert_at..insert_at, extra);
    Ok(merged)
}
