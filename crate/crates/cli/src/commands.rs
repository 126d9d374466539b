//! The verify, sample, and metrics commands.

use std::path::Path;

use mixgan_core::game::load_generators;
use mixgan_core::metrics::{
    assign_modes, export_csv, histogram_js, read_csv, separation_report, Binning, CsvTable,
};
use mixgan_core::rng;
use mixgan_core::tensor::Tensor;
use mixgan_core::verify;

use crate::CliError;

/// Runs the identity and gradient suite; exit 0 iff every check passes.
pub fn cmd_verify(seed: u64) -> Result<(), CliError> {
    let results = verify::run_all(seed);
    let mut all_pass = true;
    for check in &results {
        println!("{}", check.summary_line());
        all_pass &= check.pass;
    }
    if all_pass {
        println!("all {} checks passed", results.len());
        Ok(())
    } else {
        Err(CliError::VerificationFailed)
    }
}

/// Emits `n` samples from one generator (1-based index) or the
/// equi-probable mixture (with a provenance column) of a checkpoint.
pub fn cmd_sample(
    checkpoint: &Path,
    n: usize,
    selector: &str,
    seed: u64,
    out_path: &Path,
) -> Result<(), CliError> {
    let bundle = load_generators(checkpoint).map_err(|e| CliError::Usage(e.to_string()))?;
    let k = bundle.k();
    let sample_seed = rng::derive_seed(seed, "sample");
    let coord_header: Vec<String> = (0..bundle.data_dim).map(|d| format!("x{d}")).collect();

    let table = if selector == "mixture" {
        let (batch, provenance) = bundle
            .sample_mixture(n, sample_seed)
            .map_err(|e| CliError::Usage(e.to_string()))?;
        let mut header = coord_header;
        header.push("generator".to_string());
        let mut table = CsvTable::new(header);
        for (i, &origin) in provenance.iter().enumerate().take(n) {
            let mut row = batch.row(i).to_vec();
            row.push((origin + 1) as f64);
            table.push(row);
        }
        table
    } else {
        let index: usize = selector.parse().map_err(|_| {
            CliError::Usage(format!(
                "--generator must be an index in 1..={k} or \"mixture\", got {selector:?}"
            ))
        })?;
        if index == 0 || index > k {
            return Err(CliError::Usage(format!(
                "generator index {index} out of range 1..={k}"
            )));
        }
        let mut table = CsvTable::new(coord_header);
        if n > 0 {
            let samples = bundle
                .sample_generator(index - 1, n, sample_seed)
                .map_err(|e| CliError::Usage(e.to_string()))?;
            for i in 0..n {
                table.push(samples.row(i).to_vec());
            }
        }
        table
    };
    export_csv(&table, out_path).map_err(|e| CliError::Usage(e.to_string()))?;
    println!("wrote {} samples to {}", table.rows.len(), out_path.display());
    Ok(())
}

/// Loads the coordinate columns (`x0`, `x1`, ...) of a samples file.
fn load_sample_matrix(path: &Path) -> Result<Tensor, CliError> {
    let table = read_csv(path).map_err(|e| CliError::Usage(e.to_string()))?;
    let coord_idx: Vec<usize> = table
        .header
        .iter()
        .enumerate()
        .filter(|(_, h)| h.starts_with('x'))
        .map(|(i, _)| i)
        .collect();
    if coord_idx.is_empty() {
        return Err(CliError::Usage(format!(
            "{} has no coordinate columns (x0, x1, ...)",
            path.display()
        )));
    }
    let values: Vec<f64> = table
        .rows
        .iter()
        .flat_map(|row| coord_idx.iter().map(|&i| row[i]).collect::<Vec<_>>())
        .collect();
    Tensor::new(vec![table.rows.len(), coord_idx.len()], values)
        .map_err(|e| CliError::Usage(e.to_string()))
}

/// Scores two sample files against a set of mode centers and writes a
/// separation report plus an empirical JS estimate.
#[allow(clippy::too_many_arguments)]
pub fn cmd_metrics(
    samples_a: &Path,
    samples_b: &Path,
    centers: &[Vec<f64>],
    radius: f64,
    bins: usize,
    range: (f64, f64),
    out_path: &Path,
) -> Result<(), CliError> {
    let a = load_sample_matrix(samples_a)?;
    let b = load_sample_matrix(samples_b)?;
    let dim = a.shape()[1];
    if b.shape()[1] != dim {
        return Err(CliError::Usage(format!(
            "sample dimension mismatch: {} vs {}",
            dim,
            b.shape()[1]
        )));
    }
    let hist_a = assign_modes(&a, centers, radius).map_err(|e| CliError::Usage(e.to_string()))?;
    let hist_b = assign_modes(&b, centers, radius).map_err(|e| CliError::Usage(e.to_string()))?;
    let report =
        separation_report(&hist_a, &hist_b).map_err(|e| CliError::Usage(e.to_string()))?;
    let binning = Binning::new(vec![range.0; dim], vec![range.1; dim], vec![bins; dim]);
    let js = histogram_js(&a, &b, &binning).map_err(|e| CliError::Usage(e.to_string()))?;

    let mut table = CsvTable::new(
        [
            "dominant_g1",
            "dominant_g2",
            "purity_g1",
            "purity_g2",
            "overlap",
            "histogram_js",
            "success",
        ]
        .iter()
        .map(|s| s.to_string())
        .collect(),
    );
    table.push(vec![
        report.dominant[0] as f64,
        report.dominant[1] as f64,
        report.purity[0],
        report.purity[1],
        report.overlap,
        js,
        if report.success { 1.0 } else { 0.0 },
    ]);
    export_csv(&table, out_path).map_err(|e| CliError::Usage(e.to_string()))?;
    println!(
        "purity=({:.4},{:.4}) overlap={:.4} js={:.4} success={}",
        report.purity[0], report.purity[1], report.overlap, js, report.success
    );
    Ok(())
}

/// Parses "x1,y1;x2,y2;..." into mode centers.
pub fn parse_centers(spec: &str) -> Result<Vec<Vec<f64>>, CliError> {
    let centers: Result<Vec<Vec<f64>>, _> = spec
        .split(';')
        .map(|point| {
            point
                .split(',')
                .map(|v| v.trim().parse::<f64>())
                .collect::<Result<Vec<f64>, _>>()
        })
        .collect();
    let centers = centers
        .map_err(|e| CliError::Usage(format!("invalid --centers {spec:?}: {e}")))?;
    if centers.is_empty() || centers.iter().any(|c| c.len() != centers[0].len()) {
        return Err(CliError::Usage(format!(
            "--centers {spec:?} must list points of equal dimension"
        )));
    }
    Ok(centers)
}
