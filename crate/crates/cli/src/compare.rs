use std::fmt::Write as _;
use std::path::Path;

use crate::run::Summary;
use crate::CliError;

pub fn load_summaries(paths: &[impl AsRef<Path>]) -> Result<Vec<Summary>, CliError> {
    if paths.len() < 2 {
        return Err(CliError::Config("compare needs at least two summaries".into()));
    }
    paths
        .iter()
        .map(|p| {
            let p = p.as_ref();
            let text = std::fs::read_to_string(p).map_err(|e| CliError::Config(format!("{}: {e}", p.display())))?;
            serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", p.display())))
        })
        .collect()
}

const HEADER: [&str; 7] = ["name", "algorithm", "m", "sigma", "final_error", "psnr", "mean_sweep_ms"];

fn cells(s: &Summary) -> [String; 7] {
    let opt = |v: Option<f64>, p: usize| v.map_or("-".to_owned(), |x| format!("{x:.p$e}"));
    [
        s.name.clone(),
        s.algorithm.to_string(),
        s.sketch_size.to_string(),
        s.sigma.to_string(),
        opt(s.final_error, 3),
        s.psnr.map_or("-".to_owned(), |x| format!("{x:.2}")),
        format!("{:.3}", s.mean_sweep_ms),
    ]
}

pub fn table(rows: &[Summary]) -> String {
    let body: Vec<[String; 7]> = rows.iter().map(cells).collect();
    let mut widths = HEADER.map(str::len);
    for row in &body {
        for (w, c) in widths.iter_mut().zip(row) {
            *w = (*w).max(c.len());
        }
    }
    let mut out = String::new();
    let line = |out: &mut String, row: &[String]| {
        let parts: Vec<String> = row.iter().zip(&widths).map(|(c, w)| format!("{c:>w$}")).collect();
        writeln!(out, "{}", parts.join("  ")).expect("writing to a String");
    };
    line(&mut out, &HEADER.map(String::from));
    for row in &body {
        line(&mut out, row);
    }
    out
}

pub fn csv(rows: &[Summary]) -> String {
    let mut out = HEADER.join(",") + "\n";
    for s in rows {
        let opt = |v: Option<f64>| v.map(|x| format!("{x:e}")).unwrap_or_default();
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            s.name,
            s.algorithm,
            s.sketch_size,
            s.sigma,
            opt(s.final_error),
            opt(s.psnr),
            s.mean_sweep_ms
        )
        .expect("writing to a String");
    }
    out
}
