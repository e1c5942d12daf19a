//! On-disk formats.
//!
//! A spectrum file is a header `ostrovsky-spectrum v1 N=<N>` followed by
//! `N` rows `n,re,im`, `n = 1..N` ascending, 17 significant digits.
//! A trajectory directory holds `config.json` and one spectrum file per
//! recorded time, named `t=<decimal>.csv`. Ensembles use one such
//! directory per member.

use std::fs;
use std::path::{Path, PathBuf};

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::integrator::{SimConfig, Trajectory};
use crate::scalar::Real;
use crate::spectral::SpectralState;

pub const SPECTRUM_MAGIC: &str = "ostrovsky-spectrum v1";

/// Scientific notation with 17 significant digits.
pub fn format_real(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn format_spectrum<T: Real>(modes: &[Complex<T>]) -> String {
    let mut out = format!("{SPECTRUM_MAGIC} N={}\n", modes.len());
    for (i, a) in modes.iter().enumerate() {
        out.push_str(&format!(
            "{},{},{}\n",
            i + 1,
            format_real(a.re.as_f64()),
            format_real(a.im.as_f64())
        ));
    }
    out
}

/// Parses a spectrum; `path` only labels errors. `N = 0` is accepted here
/// (raw spectra for the norm routines); [`SpectralState`] needs `N ≥ 1`.
pub fn parse_spectrum<T: Real>(text: &str, path: &str) -> Result<Vec<Complex<T>>> {
    let err = |line: usize, message: String| Error::Parse {
        path: path.to_string(),
        line,
        message,
    };
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (_, header) = lines.next().ok_or_else(|| err(1, "empty file".into()))?;
    let cutoff: usize = header
        .trim()
        .strip_prefix(SPECTRUM_MAGIC)
        .and_then(|rest| rest.trim().strip_prefix("N="))
        .ok_or_else(|| err(1, format!("expected header '{SPECTRUM_MAGIC} N=<N>'")))?
        .parse()
        .map_err(|e| err(1, format!("bad cutoff: {e}")))?;
    let mut modes = Vec::with_capacity(cutoff);
    for (idx, line) in lines {
        let lineno = idx + 1;
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != 3 {
            return Err(err(lineno, format!("expected 'n,re,im', got {} fields", fields.len())));
        }
        let n: usize = fields[0]
            .parse()
            .map_err(|e| err(lineno, format!("bad mode index: {e}")))?;
        if n != modes.len() + 1 {
            return Err(err(lineno, format!("expected mode {}, got {n}", modes.len() + 1)));
        }
        let value = |s: &str| -> Result<T> {
            let v: f64 = s.parse().map_err(|e| err(lineno, format!("bad number '{s}': {e}")))?;
            if !v.is_finite() {
                return Err(err(lineno, format!("non-finite amplitude '{s}'")));
            }
            Ok(T::lit(v))
        };
        let re = value(fields[1])?;
        let im = value(fields[2])?;
        modes.push(Complex::new(re, im));
    }
    if modes.len() != cutoff {
        return Err(err(
            text.lines().count(),
            format!("header declares N={cutoff} but {} rows follow", modes.len()),
        ));
    }
    Ok(modes)
}

pub fn write_spectrum<T: Real>(path: &Path, state: &SpectralState<T>) -> Result<()> {
    fs::write(path, format_spectrum(state.modes()))?;
    Ok(())
}

pub fn read_modes<T: Real>(path: &Path) -> Result<Vec<Complex<T>>> {
    let text = fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_spectrum(&text, &path.display().to_string())
}

pub fn read_spectrum<T: Real>(path: &Path) -> Result<SpectralState<T>> {
    SpectralState::from_modes(read_modes(path)?)
}

/// `t=<decimal>.csv`, using the shortest decimal that round-trips.
pub fn snapshot_name(t: f64) -> String {
    format!("t={t}.csv")
}

fn parse_snapshot_name(name: &str) -> Option<f64> {
    name.strip_prefix("t=")?.strip_suffix(".csv")?.parse().ok()
}

/// `config.json` with sorted keys.
pub fn config_json(config: &SimConfig) -> String {
    // serde_json::Value maps are ordered by key
    let value = serde_json::to_value(config).expect("config serialises");
    serde_json::to_string_pretty(&value).expect("value serialises") + "\n"
}

pub fn write_trajectory<T: Real>(dir: &Path, traj: &Trajectory<T>) -> Result<()> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join("config.json"), config_json(&traj.config))?;
    for (t, state) in traj.times.iter().zip(&traj.snapshots) {
        write_spectrum(&dir.join(snapshot_name(t.as_f64())), state)?;
    }
    Ok(())
}

pub fn read_trajectory<T: Real>(dir: &Path) -> Result<Trajectory<T>> {
    let config_path = dir.join("config.json");
    let text = fs::read_to_string(&config_path)
        .map_err(|e| Error::Io(format!("{}: {e}", config_path.display())))?;
    let config: SimConfig = serde_json::from_str(&text).map_err(|e| Error::Parse {
        path: config_path.display().to_string(),
        line: e.line(),
        message: e.to_string(),
    })?;
    let mut entries: Vec<(f64, PathBuf)> = fs::read_dir(dir)?
        .filter_map(|e| e.ok())
        .filter_map(|e| {
            let name = e.file_name().to_string_lossy().into_owned();
            parse_snapshot_name(&name).map(|t| (t, e.path()))
        })
        .collect();
    entries.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut times = Vec::with_capacity(entries.len());
    let mut snapshots = Vec::with_capacity(entries.len());
    for (t, path) in entries {
        times.push(T::lit(t));
        snapshots.push(read_spectrum(&path)?);
    }
    Ok(Trajectory {
        config,
        times,
        snapshots,
    })
}

/// Directory of member `index` inside an ensemble directory.
pub fn member_dir(root: &Path, index: usize) -> PathBuf {
    root.join(format!("member-{index:06}"))
}

pub fn write_ensemble<T: Real>(root: &Path, members: &[Trajectory<T>]) -> Result<()> {
    for (i, traj) in members.iter().enumerate() {
        write_trajectory(&member_dir(root, i), traj)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spectrum_round_trip_is_exact() {
        let modes = vec![
            Complex::new(0.1f64, -1.0 / 3.0),
            Complex::new(1e-300, 12345.678901234567),
            Complex::new(-0.0, std::f64::consts::PI),
        ];
        let text = format_spectrum(&modes);
        assert!(text.starts_with("ostrovsky-spectrum v1 N=3\n1,"));
        let back: Vec<Complex<f64>> = parse_spectrum(&text, "mem").unwrap();
        for (a, b) in modes.iter().zip(&back) {
            assert_eq!(a.re.to_bits() == b.re.to_bits() || a.re == b.re, true);
            assert_eq!(a.im.to_bits(), b.im.to_bits());
        }
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let bad = "ostrovsky-spectrum v1 N=2\n1,0,0\n3,0,0\n";
        match parse_spectrum::<f64>(bad, "x.csv") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
        let short = "ostrovsky-spectrum v1 N=2\n1,0,0\n";
        assert!(parse_spectrum::<f64>(short, "x").is_err());
        assert!(parse_spectrum::<f64>("garbage\n", "x").is_err());
        assert!(parse_spectrum::<f64>("ostrovsky-spectrum v1 N=1\n1,nan,0\n", "x").is_err());
    }

    #[test]
    fn config_keys_are_sorted() {
        let mut cfg = SimConfig::new(8, 1e-3, 1.0);
        cfg.seed = 7;
        let json = config_json(&cfg);
        let keys: Vec<usize> = ["\"N\"", "\"T\"", "\"dt\"", "\"scheme\"", "\"seed\"", "\"stride\""]
            .iter()
            .map(|k| json.find(k).unwrap())
            .collect();
        assert!(keys.windows(2).all(|w| w[0] < w[1]), "{json}");
        assert!(!json.contains("nonlinearity"));
        let back: SimConfig = serde_json::from_str(&json).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn snapshot_names_round_trip() {
        for t in [0.0, 0.1, 1.0 / 3.0, 12.5] {
            assert_eq!(parse_snapshot_name(&snapshot_name(t)), Some(t));
        }
    }
}
