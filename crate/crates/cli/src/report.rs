use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use crate::experiment::{CellRuns, ComparisonReport};

/// Formats `v` as a positional decimal with exactly ten significant digits.
pub fn format_sig10(v: f64) -> String {
    if !v.is_finite() {
        return v.to_string();
    }
    let sci = format!("{v:.9e}");
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("exponent");
    let (sign, mantissa) = match mantissa.strip_prefix('-') {
        Some(m) => ("-", m),
        None => ("", mantissa),
    };
    let digits: String = mantissa.chars().filter(|c| *c != '.').collect();
    let body = if exp >= 9 {
        format!("{digits}{}", "0".repeat((exp - 9) as usize))
    } else if exp >= 0 {
        let (int, frac) = digits.split_at(exp as usize + 1);
        format!("{int}.{frac}")
    } else {
        format!("0.{}{digits}", "0".repeat((-exp - 1) as usize))
    };
    format!("{sign}{body}")
}

fn opt(v: Option<f64>) -> String {
    v.map(format_sig10).unwrap_or_default()
}

fn write_file(
    dir: &Path,
    name: &str,
    contents: &str,
    written: &mut Vec<PathBuf>,
) -> io::Result<()> {
    let path = dir.join(name);
    fs::write(&path, contents)?;
    written.push(path);
    Ok(())
}

/// Writes `summary.csv`, `significance.csv`, `finals_<function>.csv`,
/// `convergence_<function>_<method>.csv` and `report.json` into `dir`,
/// creating it if needed. Returns the paths written.
pub fn emit_reports(
    report: &ComparisonReport,
    cells: &[CellRuns],
    dir: &Path,
) -> io::Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut written = Vec::new();

    let mut summary = String::from("function,method,mean,median,std,min,max\n");
    for cell in &report.cells {
        if let Some(s) = &cell.summary {
            let _ = writeln!(
                summary,
                "{},{},{},{},{},{},{}",
                cell.function,
                cell.method,
                format_sig10(s.mean),
                format_sig10(s.median),
                format_sig10(s.std_dev),
                format_sig10(s.min),
                format_sig10(s.max)
            );
        }
    }
    write_file(dir, "summary.csv", &summary, &mut written)?;

    let mut significance = String::from("function,t_stat,p_t,W,p_wilcoxon\n");
    for t in &report.tests {
        let _ = writeln!(
            significance,
            "{},{},{},{},{}",
            t.function,
            opt(t.t_test.as_ref().map(|r| r.statistic)),
            opt(t.t_test.as_ref().map(|r| r.p_value)),
            opt(t.wilcoxon.as_ref().map(|r| r.statistic)),
            opt(t.wilcoxon.as_ref().map(|r| r.p_value)),
        );
    }
    write_file(dir, "significance.csv", &significance, &mut written)?;

    let mut functions: Vec<&str> = Vec::new();
    for c in cells {
        if !functions.contains(&c.function.as_str()) {
            functions.push(&c.function);
        }
    }
    for function in functions {
        let group: Vec<&CellRuns> = cells.iter().filter(|c| c.function == function).collect();
        let mut finals = group
            .iter()
            .map(|c| c.method.label())
            .collect::<Vec<_>>()
            .join(",");
        finals.push('\n');
        let columns: Vec<Vec<Option<f64>>> = group.iter().map(|c| c.finals()).collect();
        let rows = columns.iter().map(Vec::len).max().unwrap_or(0);
        for i in 0..rows {
            let line: Vec<String> = columns
                .iter()
                .map(|col| opt(col.get(i).copied().flatten()))
                .collect();
            finals.push_str(&line.join(","));
            finals.push('\n');
        }
        write_file(
            dir,
            &format!("finals_{function}.csv"),
            &finals,
            &mut written,
        )?;

        for cell in &group {
            let curves: Vec<(u64, &[f64])> = cell
                .runs
                .iter()
                .filter_map(|r| r.as_ref().ok().map(|r| (r.seed, r.best_curve.as_slice())))
                .collect();
            let mut out = curves
                .iter()
                .map(|(s, _)| format!("seed_{s}"))
                .collect::<Vec<_>>()
                .join(",");
            out.push('\n');
            let len = curves.iter().map(|(_, c)| c.len()).max().unwrap_or(0);
            for i in 0..len {
                let line: Vec<String> =
                    curves.iter().map(|(_, c)| opt(c.get(i).copied())).collect();
                out.push_str(&line.join(","));
                out.push('\n');
            }
            write_file(
                dir,
                &format!("convergence_{function}_{}.csv", cell.method),
                &out,
                &mut written,
            )?;
        }
    }

    let mut json = serde_json::to_string_pretty(report).map_err(io::Error::other)?;
    json.push('\n');
    write_file(dir, "report.json", &json, &mut written)?;
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ten_significant_digits() {
        assert_eq!(format_sig10(0.0), "0.000000000");
        assert_eq!(format_sig10(1.0), "1.000000000");
        assert_eq!(format_sig10(-6.020740055766), "-6.020740056");
        assert_eq!(format_sig10(0.397887357729738), "0.3978873577");
        assert_eq!(format_sig10(0.00031), "0.0003100000000");
        assert_eq!(format_sig10(15.829731945974108), "15.82973195");
        assert_eq!(format_sig10(123456789012.0), "123456789000");
        assert_eq!(format_sig10(9.99999999999), "10.00000000");
        for v in [1e-7, -3.5e5, 2.0f64.sqrt(), 1e15] {
            let back: f64 = format_sig10(v).parse().unwrap();
            assert!((back - v).abs() <= 5e-10 * v.abs());
        }
    }
}
