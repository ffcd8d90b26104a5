//! `--config FILE`: `key = value` lines merged beneath the command-line
//! flags. A key names a long flag without its dashes (`lambda1`, `t-max`;
//! underscores are accepted for dashes). Flags given on the command line win.

use std::fs;

/// Flags that take no value; in a config file they are written `envelope = true`.
const SWITCHES: &[&str] = &["envelope", "approx", "log"];

pub fn expand(args: Vec<String>) -> Result<Vec<String>, String> {
    let mut rest = Vec::with_capacity(args.len());
    let mut path = None;
    let mut iter = args.into_iter();
    while let Some(arg) = iter.next() {
        if arg == "--config" {
            path = Some(iter.next().ok_or("--config needs a file path")?);
        } else if let Some(p) = arg.strip_prefix("--config=") {
            path = Some(p.to_string());
        } else {
            rest.push(arg);
        }
    }
    let Some(path) = path else {
        return Ok(rest);
    };
    let text = fs::read_to_string(&path).map_err(|e| format!("cannot read config file {path}: {e}"))?;
    let given: Vec<String> = rest
        .iter()
        .filter_map(|a| a.strip_prefix("--"))
        .map(|a| a.split('=').next().unwrap_or(a).to_string())
        .collect();
    let mut extra = Vec::new();
    for (key, value) in parse(&text).map_err(|e| format!("{path}: {e}"))? {
        if given.contains(&key) {
            continue;
        }
        if SWITCHES.contains(&key.as_str()) {
            match value.as_str() {
                "true" | "yes" | "1" => extra.push(format!("--{key}")),
                "false" | "no" | "0" => {}
                other => return Err(format!("{path}: `{key}` expects true or false, got `{other}`")),
            }
        } else {
            extra.push(format!("--{key}"));
            extra.push(value);
        }
    }
    rest.extend(extra);
    Ok(rest)
}

fn parse(text: &str) -> Result<Vec<(String, String)>, String> {
    let mut out: Vec<(String, String)> = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| format!("line {}: expected `key = value`", n + 1))?;
        let key = key.trim().trim_start_matches("--").replace('_', "-");
        if key.is_empty() {
            return Err(format!("line {}: empty key", n + 1));
        }
        let value = value.trim().trim_matches('"').to_string();
        // later lines override earlier ones
        out.retain(|(k, _)| *k != key);
        out.push((key, value));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn strings(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn parses_pairs_and_comments() {
        let pairs = parse("# run\nspins = 50\nlambda_1=5\n\nenvelope = true\nspins = 60\n").unwrap();
        assert_eq!(
            pairs,
            vec![
                ("lambda-1".into(), "5".into()),
                ("envelope".into(), "true".into()),
                ("spins".into(), "60".into()),
            ]
        );
        assert!(parse("spins 50").is_err());
    }

    #[test]
    fn flags_win_over_file() {
        let dir = std::env::temp_dir().join(format!("decosim-config-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let file = dir.join("run.conf");
        std::fs::write(&file, "spins = 20\nlambda1 = 3\nenvelope = true\napprox = false\n").unwrap();
        let args = strings(&["decosim", "ising", "--spins", "8", "--config", file.to_str().unwrap()]);
        let out = expand(args).unwrap();
        assert_eq!(
            out,
            strings(&["decosim", "ising", "--spins", "8", "--lambda1", "3", "--envelope"])
        );
        std::fs::remove_dir_all(&dir).unwrap();
    }

    #[test]
    fn without_config_args_pass_through() {
        let args = strings(&["decosim", "ising", "--spins=8"]);
        assert_eq!(expand(args.clone()).unwrap(), args);
    }
}
