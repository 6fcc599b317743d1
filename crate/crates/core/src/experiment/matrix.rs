use std::fs::File;
use std::io::BufWriter;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{io_err, ExpError, Result};
use crate::harness::{Method, TransferResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MatrixKind {
    Accuracy,
    VsBaseline,
    HeadVsFinetune,
}

/// Source-major square matrix: `cells[i][j]` is source `labels[i]`,
/// target `labels[j]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultMatrix {
    pub kind: MatrixKind,
    pub method: Option<Method>,
    pub labels: Vec<String>,
    pub cells: Vec<Vec<f64>>,
}

const CORNER: &str = "source\\target";

fn seeds_of(rows: &[TransferResult], seeds: &[u64]) -> Vec<u64> {
    if !seeds.is_empty() {
        return seeds.to_vec();
    }
    let mut s: Vec<u64> = rows.iter().map(|r| r.seed).collect();
    s.sort_unstable();
    s.dedup();
    s
}

/// Mean top-1 over `seeds`; `None` if any seed lacks the row.
fn mean_top1(rows: &[TransferResult], src: &str, tgt: &str, method: Method, seeds: &[u64]) -> Option<f64> {
    if seeds.is_empty() {
        return None;
    }
    let mut total = 0.0;
    for &seed in seeds {
        let r = rows
            .iter()
            .find(|r| r.source_id == src && r.target_id == tgt && r.method == method && r.seed == seed)?;
        total += r.top1;
    }
    Some(total / seeds.len() as f64)
}

/// Transfer cells exclude same-domain pairs; the source model itself fills
/// the diagonal.
fn transfer_top1(rows: &[TransferResult], src: &str, tgt: &str, method: Method, seeds: &[u64]) -> Option<f64> {
    let m = if src == tgt && method.is_transfer() { Method::Pretrain } else { method };
    mean_top1(rows, src, tgt, m, seeds)
}

fn build(
    labels: &[String],
    mut cell: impl FnMut(&str, &str) -> std::result::Result<f64, Vec<String>>,
) -> Result<Vec<Vec<f64>>> {
    let mut missing = Vec::new();
    let mut cells = vec![vec![0.0; labels.len()]; labels.len()];
    for (i, s) in labels.iter().enumerate() {
        for (j, t) in labels.iter().enumerate() {
            match cell(s, t) {
                Ok(v) => cells[i][j] = v,
                Err(m) => missing.extend(m),
            }
        }
    }
    if missing.is_empty() {
        Ok(cells)
    } else {
        missing.dedup();
        Err(ExpError::Incomplete(missing))
    }
}

fn need(v: Option<f64>, src: &str, tgt: &str, method: Method) -> std::result::Result<f64, Vec<String>> {
    v.ok_or_else(|| vec![format!("({src},{tgt}) {method}")])
}

/// Mean post-transfer top-1 of `method` for every source/target pair.
pub fn matrix_accuracy(
    rows: &[TransferResult],
    labels: &[String],
    method: Method,
    seeds: &[u64],
) -> Result<ResultMatrix> {
    let seeds = seeds_of(rows, seeds);
    let cells = build(labels, |s, t| need(transfer_top1(rows, s, t, method, &seeds), s, t, method))?;
    Ok(ResultMatrix { kind: MatrixKind::Accuracy, method: Some(method), labels: labels.to_vec(), cells })
}

/// `top1(method, src, tgt) - top1(baseline, tgt)`.
pub fn matrix_vs_baseline(
    rows: &[TransferResult],
    labels: &[String],
    method: Method,
    seeds: &[u64],
) -> Result<ResultMatrix> {
    let seeds = seeds_of(rows, seeds);
    let cells = build(labels, |s, t| {
        let a = need(transfer_top1(rows, s, t, method, &seeds), s, t, method);
        let b = need(mean_top1(rows, t, t, Method::Baseline, &seeds), t, t, Method::Baseline);
        match (a, b) {
            (Ok(a), Ok(b)) => Ok(a - b),
            (a, b) => Err(a.err().into_iter().chain(b.err()).flatten().collect()),
        }
    })?;
    Ok(ResultMatrix { kind: MatrixKind::VsBaseline, method: Some(method), labels: labels.to_vec(), cells })
}

/// `top1(fine_tune) - top1(head_retrain)`: positive where fine-tuning wins.
pub fn matrix_method_diff(rows: &[TransferResult], labels: &[String], seeds: &[u64]) -> Result<ResultMatrix> {
    let ft = matrix_accuracy(rows, labels, Method::FineTune, seeds)?;
    let hr = matrix_accuracy(rows, labels, Method::HeadRetrain, seeds)?;
    let cells = ft
        .cells
        .iter()
        .zip(&hr.cells)
        .map(|(a, b)| a.iter().zip(b).map(|(x, y)| x - y).collect())
        .collect();
    Ok(ResultMatrix { kind: MatrixKind::HeadVsFinetune, method: None, labels: labels.to_vec(), cells })
}

/// Header row and first column carry the labels; values use the shortest
/// representation that parses back exactly.
pub fn write_csv(m: &ResultMatrix, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let csv_err = |source| ExpError::Csv { path: path.to_path_buf(), source };
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    let mut header = vec![CORNER.to_string()];
    header.extend(m.labels.iter().cloned());
    w.write_record(&header).map_err(csv_err)?;
    for (label, row) in m.labels.iter().zip(&m.cells) {
        let mut rec = vec![label.clone()];
        rec.extend(row.iter().map(|v| format!("{v}")));
        w.write_record(&rec).map_err(csv_err)?;
    }
    w.flush().map_err(io_err(path))
}

/// Reads a matrix written by [`write_csv`] as `(labels, cells)`.
pub fn read_csv(path: impl AsRef<Path>) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    let path = path.as_ref();
    let csv_err = |source| ExpError::Csv { path: path.to_path_buf(), source };
    let mut r = csv::ReaderBuilder::new().has_headers(true).from_path(path).map_err(csv_err)?;
    let header = r.headers().map_err(csv_err)?.clone();
    let labels: Vec<String> = header.iter().skip(1).map(str::to_string).collect();
    let mut cells = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec.map_err(csv_err)?;
        if rec.get(0) != labels.get(i).map(String::as_str) {
            return Err(ExpError::Matrix(format!("row {i} label does not match the header")));
        }
        let row = rec
            .iter()
            .skip(1)
            .map(|v| v.parse::<f64>().map_err(|e| ExpError::Matrix(format!("{v}: {e}"))))
            .collect::<Result<Vec<f64>>>()?;
        cells.push(row);
    }
    if cells.len() != labels.len() {
        return Err(ExpError::Matrix("matrix is not square".into()));
    }
    Ok((labels, cells))
}

const VIRIDIS: [[f64; 3]; 5] = [
    [68.0, 1.0, 84.0],
    [59.0, 82.0, 139.0],
    [33.0, 145.0, 140.0],
    [94.0, 201.0, 98.0],
    [253.0, 231.0, 37.0],
];

fn colour(v: f64, lo: f64, hi: f64) -> [u8; 3] {
    let t = if hi > lo { ((v - lo) / (hi - lo)).clamp(0.0, 1.0) } else { 0.5 };
    let x = t * (VIRIDIS.len() - 1) as f64;
    let i = (x.floor() as usize).min(VIRIDIS.len() - 2);
    let f = x - i as f64;
    let mut out = [0u8; 3];
    for c in 0..3 {
        out[c] = (VIRIDIS[i][c] + f * (VIRIDIS[i + 1][c] - VIRIDIS[i][c])).round() as u8;
    }
    out
}

/// Rasterizes the matrix row-major, one `cell_px` square per cell. Values
/// outside `[vmin, vmax]` saturate the colour map.
pub fn render_heatmap(m: &ResultMatrix, path: impl AsRef<Path>, vmin: f64, vmax: f64, cell_px: u32) -> Result<()> {
    let path = path.as_ref();
    let n = m.labels.len() as u32;
    let px = cell_px.max(1);
    let side = (n * px).max(1);
    let mut data = vec![0u8; (side * side * 3) as usize];
    for (i, row) in m.cells.iter().enumerate() {
        for (j, &v) in row.iter().enumerate() {
            let rgb = colour(v, vmin, vmax);
            for y in 0..px {
                for x in 0..px {
                    let o = (((i as u32 * px + y) * side + j as u32 * px + x) * 3) as usize;
                    data[o..o + 3].copy_from_slice(&rgb);
                }
            }
        }
    }
    let file = File::create(path).map_err(io_err(path))?;
    let png_err = |source| ExpError::Png { path: path.to_path_buf(), source };
    let mut enc = png::Encoder::new(BufWriter::new(file), side, side);
    enc.set_color(png::ColorType::Rgb);
    enc.set_depth(png::BitDepth::Eight);
    let mut w = enc.write_header().map_err(png_err)?;
    w.write_image_data(&data).map_err(png_err)?;
    w.finish().map_err(png_err)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(src: &str, tgt: &str, method: Method, seed: u64, top1: f64) -> TransferResult {
        TransferResult {
            source_id: src.into(),
            target_id: tgt.into(),
            method,
            seed,
            cell_seed: 0,
            top1,
            epochs_run: 1,
            best_epoch: 0,
            best_val_loss: 1.0,
            checkpoint_path: None,
        }
    }

    fn grid() -> (Vec<TransferResult>, Vec<String>) {
        let labels: Vec<String> = ["a", "b", "c"].iter().map(|s| s.to_string()).collect();
        let mut rows = Vec::new();
        for (i, s) in labels.iter().enumerate() {
            rows.push(row(s, s, Method::Pretrain, 0, 0.9 - 0.1 * i as f64));
            rows.push(row(s, s, Method::Baseline, 0, 0.5 + 0.01 * i as f64));
            for (j, t) in labels.iter().enumerate() {
                if i != j {
                    rows.push(row(s, t, Method::HeadRetrain, 0, 0.6 + 0.01 * (3 * i + j) as f64));
                    rows.push(row(s, t, Method::FineTune, 0, 0.62 + 0.01 * (3 * i + j) as f64));
                }
            }
        }
        (rows, labels)
    }

    #[test]
    fn accuracy_values_come_straight_from_rows() {
        let (rows, labels) = grid();
        let m = matrix_accuracy(&rows, &labels, Method::HeadRetrain, &[]).unwrap();
        assert_eq!(m.cells[0][0], 0.9);
        assert_eq!(m.cells[1][2], 0.6 + 0.01 * 5.0);
        let d = matrix_vs_baseline(&rows, &labels, Method::HeadRetrain, &[]).unwrap();
        assert_eq!(d.cells[1][2], m.cells[1][2] - (0.5 + 0.01 * 2.0));
    }

    #[test]
    fn missing_cell_is_named() {
        let (mut rows, labels) = grid();
        rows.retain(|r| !(r.source_id == "a" && r.target_id == "c" && r.method == Method::FineTune));
        match matrix_accuracy(&rows, &labels, Method::FineTune, &[]) {
            Err(ExpError::Incomplete(m)) => assert_eq!(m, vec!["(a,c) fine_tune".to_string()]),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn method_diff_sign() {
        let (rows, labels) = grid();
        let m = matrix_method_diff(&rows, &labels, &[]).unwrap();
        assert!((m.cells[0][1] - 0.02).abs() < 1e-12);
        assert_eq!(m.cells[2][2], 0.0);
    }

    #[test]
    fn csv_round_trip_and_png() {
        let (rows, labels) = grid();
        let m = matrix_accuracy(&rows, &labels, Method::HeadRetrain, &[]).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("m.csv");
        write_csv(&m, &p).unwrap();
        let (l, c) = read_csv(&p).unwrap();
        assert_eq!((l, c), (m.labels.clone(), m.cells.clone()));
        assert_eq!(std::fs::read_to_string(&p).unwrap().lines().count(), 4);
        render_heatmap(&m, dir.path().join("m.png"), 0.5, 0.9, 4).unwrap();
    }

    #[test]
    fn colour_map_clamps() {
        assert_eq!(colour(-3.0, 0.0, 1.0), colour(0.0, 0.0, 1.0));
        assert_eq!(colour(7.0, 0.0, 1.0), [253, 231, 37]);
    }
}
