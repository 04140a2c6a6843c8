//! On-disk formats: count tables as CSV, density matrices as JSON.

use std::fs;
use std::io::Write;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::counts::{CountMode, CountTable};
use super::{settings_plan, Axis};
use crate::error::{Error, Result};
use crate::qcore::DensityMatrix;

/// Writes a count table:
///
/// ```text
/// # shots=500 mode=multinomial seed=42
/// setting,outcome,count
/// XXXX,0000,31
/// ...
/// ```
///
/// Setting strings run over {X,Y,Z} with qubit 1 first; outcome strings are
/// bits with qubit 1 first. Sampled tables hold integer counts; exact
/// expectation tables may hold fractional values.
pub fn write_counts_csv<P: AsRef<Path>>(table: &CountTable, path: P) -> Result<()> {
    let plan = table.plan();
    let mut out = String::new();
    out.push_str(&format!(
        "# shots={} mode={} seed={}\n",
        table.shots(),
        table.mode().label(),
        table.seed()
    ));
    out.push_str("setting,outcome,count\n");
    for s in 0..plan.num_settings() {
        let label = plan.setting_label(s);
        for o in 0..plan.outcomes_per_setting() {
            out.push_str(&format!(
                "{label},{},{}\n",
                plan.outcome_label(o),
                table.count(s, o)
            ));
        }
    }
    let mut file = fs::File::create(path)?;
    file.write_all(out.as_bytes())?;
    Ok(())
}

/// Reads a count table written by [`write_counts_csv`].
pub fn read_counts_csv<P: AsRef<Path>>(path: P) -> Result<CountTable> {
    let text = fs::read_to_string(path)?;
    let mut lines = text.lines();
    let meta = lines
        .next()
        .ok_or_else(|| Error::Format("empty counts file".into()))?;
    let meta = meta
        .strip_prefix('#')
        .ok_or_else(|| Error::Format("missing '# shots=... mode=... seed=...' line".into()))?
        .trim();
    let mut shots = None;
    let mut mode = None;
    let mut seed = None;
    for token in meta.split_whitespace() {
        let (key, value) = token
            .split_once('=')
            .ok_or_else(|| Error::Format(format!("malformed metadata token '{token}'")))?;
        match key {
            "shots" => {
                shots = Some(
                    value
                        .parse::<u64>()
                        .map_err(|e| Error::Format(format!("bad shots value '{value}': {e}")))?,
                )
            }
            "mode" => mode = Some(CountMode::from_label(value)?),
            "seed" => {
                seed = Some(
                    value
                        .parse::<u64>()
                        .map_err(|e| Error::Format(format!("bad seed value '{value}': {e}")))?,
                )
            }
            other => return Err(Error::Format(format!("unknown metadata key '{other}'"))),
        }
    }
    let shots = shots.ok_or_else(|| Error::Format("metadata missing shots".into()))?;
    let mode = mode.ok_or_else(|| Error::Format("metadata missing mode".into()))?;
    let seed = seed.ok_or_else(|| Error::Format("metadata missing seed".into()))?;

    let header = lines
        .next()
        .ok_or_else(|| Error::Format("missing header line".into()))?;
    if header.trim() != "setting,outcome,count" {
        return Err(Error::Format(format!("unexpected header '{header}'")));
    }

    let mut rows = Vec::new();
    for line in lines {
        if line.trim().is_empty() {
            continue;
        }
        let mut fields = line.split(',');
        let (setting, outcome, count) = match (fields.next(), fields.next(), fields.next()) {
            (Some(s), Some(o), Some(c)) if fields.next().is_none() => (s, o, c),
            _ => return Err(Error::Format(format!("malformed row '{line}'"))),
        };
        rows.push((setting.to_string(), outcome.to_string(), count.to_string()));
    }
    let n = rows
        .first()
        .ok_or_else(|| Error::Format("no count rows".into()))?
        .0
        .len();
    let plan = settings_plan(n)?;
    let mut counts = vec![f64::NAN; plan.num_projectors()];
    for (setting, outcome, count) in rows {
        if setting.len() != n || outcome.len() != n {
            return Err(Error::Format(format!(
                "inconsistent label lengths in row {setting},{outcome}"
            )));
        }
        let mut s_idx = 0usize;
        for ch in setting.chars() {
            let digit = match Axis::from_letter(ch)? {
                Axis::X => 0,
                Axis::Y => 1,
                Axis::Z => 2,
            };
            s_idx = s_idx * 3 + digit;
        }
        let mut o_idx = 0usize;
        for ch in outcome.chars() {
            o_idx = o_idx * 2
                + match ch {
                    '0' => 0,
                    '1' => 1,
                    other => return Err(Error::Format(format!("bad outcome bit '{other}'"))),
                };
        }
        let value = count
            .parse::<f64>()
            .map_err(|e| Error::Format(format!("bad count '{count}': {e}")))?;
        let slot = plan.projector_index(s_idx, o_idx);
        if !counts[slot].is_nan() {
            return Err(Error::Format(format!(
                "duplicate row for {setting},{outcome}"
            )));
        }
        counts[slot] = value;
    }
    if counts.iter().any(|c| c.is_nan()) {
        return Err(Error::Format("incomplete count table".into()));
    }
    CountTable::from_parts(plan, shots, mode, seed, counts)
}

#[derive(Serialize, Deserialize)]
struct DensityMatrixFile {
    n: usize,
    re: Vec<Vec<f64>>,
    im: Vec<Vec<f64>>,
}

/// Writes a density matrix as row-major JSON:
/// `{"n": 4, "re": [[...]], "im": [[...]]}`.
pub fn write_density_json<P: AsRef<Path>>(rho: &DensityMatrix, path: P) -> Result<()> {
    let dim = rho.dim();
    let row = |r: usize, pick: fn(Complex64) -> f64| -> Vec<f64> {
        (0..dim).map(|c| pick(rho.get(r, c))).collect()
    };
    let file = DensityMatrixFile {
        n: rho.num_qubits(),
        re: (0..dim).map(|r| row(r, |z| z.re)).collect(),
        im: (0..dim).map(|r| row(r, |z| z.im)).collect(),
    };
    let json = serde_json::to_string_pretty(&file)
        .map_err(|e| Error::Format(format!("serialization failed: {e}")))?;
    fs::write(path, json + "\n")?;
    Ok(())
}

/// Reads a density matrix written by [`write_density_json`], validating the
/// physicality invariants.
pub fn read_density_json<P: AsRef<Path>>(path: P) -> Result<DensityMatrix> {
    let text = fs::read_to_string(path)?;
    let file: DensityMatrixFile =
        serde_json::from_str(&text).map_err(|e| Error::Format(format!("bad JSON: {e}")))?;
    let dim = 1usize << file.n;
    if file.re.len() != dim || file.im.len() != dim {
        return Err(Error::Format(format!(
            "expected {dim} rows for n = {}",
            file.n
        )));
    }
    let mut elems = Vec::with_capacity(dim * dim);
    for (re_row, im_row) in file.re.iter().zip(&file.im) {
        if re_row.len() != dim || im_row.len() != dim {
            return Err(Error::Format("ragged matrix rows".into()));
        }
        for (re, im) in re_row.iter().zip(im_row) {
            elems.push(Complex64::new(*re, *im));
        }
    }
    DensityMatrix::from_elements(file.n, elems)
        .map_err(|e| Error::Format(format!("not a valid density matrix: {e}")))
}
