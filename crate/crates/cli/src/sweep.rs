//! The sweep subcommand: one record per (d, N, s) cell, CSV or JSON,
//! deterministic cell seeds, and resumable output.

use std::collections::HashMap;
use std::fs;

use framepack::kernels::{KernelFamily, KernelSpec};
use framepack::optimizer::{multistart, split_seed, Parametrization};

use crate::records::{SweepRecord, SWEEP_HEADER};
use crate::{run_record, settings, CmdResult, Format, SweepArgs};

struct Cell {
    tag: String,
    kernel: KernelSpec,
}

fn parse_n_range(text: &str) -> Result<(usize, usize), String> {
    let (lo, hi) = text
        .split_once(':')
        .ok_or_else(|| format!("--n-range must be A:B, got '{text}'"))?;
    let lo: usize = lo
        .trim()
        .parse()
        .map_err(|_| format!("bad N range start '{lo}'"))?;
    let hi: usize = hi
        .trim()
        .parse()
        .map_err(|_| format!("bad N range end '{hi}'"))?;
    if lo < 2 || lo > hi {
        return Err(format!("--n-range needs 2 <= A <= B, got {lo}:{hi}"));
    }
    Ok((lo, hi))
}

fn parse_s_list(text: &str) -> Result<Vec<Cell>, String> {
    let mut cells = Vec::new();
    for token in text.split(',') {
        let token = token.trim();
        if token.is_empty() {
            continue;
        }
        if token.eq_ignore_ascii_case("fp") {
            cells.push(Cell {
                tag: "fp".to_string(),
                kernel: KernelSpec::frame_potential(),
            });
        } else {
            let s: f64 = token
                .parse()
                .map_err(|_| format!("bad kernel tag '{token}' in --s-list"))?;
            cells.push(Cell {
                tag: s.to_string(),
                kernel: KernelSpec::projective_riesz(s),
            });
        }
    }
    if cells.is_empty() {
        return Err("--s-list is empty".into());
    }
    Ok(cells)
}

/// Per-cell seed from the master seed and the cell coordinates only, so
/// resuming a partial sweep reproduces exactly the rows a fresh run would.
fn cell_seed(master: u64, d: usize, n: usize, kernel: &KernelSpec) -> u64 {
    let s_bits = match kernel.family {
        KernelFamily::FramePotential => u64::MAX,
        _ => kernel.s.to_bits(),
    };
    split_seed(split_seed(split_seed(master, d as u64), n as u64), s_bits)
}

pub(crate) fn cmd_sweep(args: SweepArgs) -> CmdResult {
    if args.format == Format::Text {
        return Err("sweep supports --format csv or json".into());
    }
    if args.skip_existing && (args.out.is_none() || args.format != Format::Csv) {
        return Err("--skip-existing needs --out and --format csv".into());
    }
    let (n_lo, n_hi) = parse_n_range(&args.n_range)?;
    let cells = parse_s_list(&args.s_list)?;

    // Rows already present in the output file, keyed by (n, s tag).
    let mut existing: HashMap<(usize, String), String> = HashMap::new();
    if args.skip_existing {
        let path = args.out.as_ref().unwrap();
        if path.exists() {
            let text = fs::read_to_string(path).map_err(|e| e.to_string())?;
            let mut lines = text.lines();
            match lines.next() {
                Some(header) if header == SWEEP_HEADER => {}
                Some(other) => {
                    return Err(format!(
                        "{}: unexpected header '{other}'",
                        path.display()
                    ))
                }
                None => {}
            }
            for line in lines {
                if line.trim().is_empty() {
                    continue;
                }
                let mut fields = line.split(',');
                let d_field = fields.next().unwrap_or_default();
                let n_field = fields.next().unwrap_or_default();
                let s_field = fields.next().unwrap_or_default();
                if d_field != args.d.to_string() {
                    continue;
                }
                if let Ok(n) = n_field.parse::<usize>() {
                    existing.insert((n, s_field.to_string()), line.to_string());
                }
            }
        }
    }

    let mut csv_rows: Vec<String> = Vec::new();
    let mut json_records: Vec<SweepRecord> = Vec::new();
    for n in n_lo..=n_hi {
        for cell in &cells {
            if let Some(line) = existing.get(&(n, cell.tag.clone())) {
                csv_rows.push(line.clone());
                continue;
            }
            let seed = cell_seed(args.seed, args.d, n, &cell.kernel);
            let opts = settings(
                seed,
                args.restarts,
                args.tol,
                args.max_iters,
                Parametrization::Tangent,
            );
            let run = multistart(&cell.kernel, args.d, n, &opts).map_err(|e| e.to_string())?;
            let s_value = match cell.kernel.family {
                KernelFamily::ProjectiveRiesz => Some(cell.kernel.s),
                _ => None,
            };
            let record = run_record(
                &run,
                args.d,
                n,
                &cell.tag,
                s_value,
                args.restarts,
                seed,
            )?;
            csv_rows.push(record.to_csv_row());
            json_records.push(record);
        }
    }

    let output = match args.format {
        Format::Csv => {
            let mut text = String::from(SWEEP_HEADER);
            text.push('\n');
            for row in &csv_rows {
                text.push_str(row);
                text.push('\n');
            }
            text
        }
        Format::Json => {
            let mut text =
                serde_json::to_string_pretty(&json_records).map_err(|e| e.to_string())?;
            text.push('\n');
            text
        }
        Format::Text => unreachable!(),
    };
    match &args.out {
        Some(path) => fs::write(path, output).map_err(|e| e.to_string())?,
        None => print!("{output}"),
    }
    Ok(0)
}
