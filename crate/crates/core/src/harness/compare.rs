use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use super::Profile;
use crate::error::{Error, Result};

/// Differences of one field in one snapshot. Relative norms divide by the norm of the second run.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldDiff {
    pub snapshot: String,
    pub field: String,
    pub l1: f64,
    pub l2: f64,
    pub sup: f64,
    pub rel_l1: f64,
    pub rel_l2: f64,
    pub rel_sup: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct CompareReport {
    pub rows: Vec<FieldDiff>,
}

impl CompareReport {
    pub fn get(&self, snapshot: &str, field: &str) -> Option<&FieldDiff> {
        self.rows
            .iter()
            .find(|r| r.snapshot == snapshot && r.field == field)
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record([
            "snapshot", "field", "l1", "l2", "sup", "rel_l1", "rel_l2", "rel_sup",
        ])?;
        for r in &self.rows {
            w.write_record([
                r.snapshot.clone(),
                r.field.clone(),
                format!("{:e}", r.l1),
                format!("{:e}", r.l2),
                format!("{:e}", r.sup),
                format!("{:e}", r.rel_l1),
                format!("{:e}", r.rel_l2),
                format!("{:e}", r.rel_sup),
            ])?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }
}

impl fmt::Display for CompareReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "{:<10} {:<8} {:>12} {:>12} {:>12} {:>10} {:>10} {:>10}",
            "snapshot", "field", "L1", "L2", "sup", "rel L1", "rel L2", "rel sup"
        )?;
        for r in &self.rows {
            writeln!(
                f,
                "{:<10} {:<8} {:>12.4e} {:>12.4e} {:>12.4e} {:>10.3e} {:>10.3e} {:>10.3e}",
                r.snapshot, r.field, r.l1, r.l2, r.sup, r.rel_l1, r.rel_l2, r.rel_sup
            )?;
        }
        Ok(())
    }
}

fn ratio(a: f64, b: f64) -> f64 {
    if b > 0.0 {
        a / b
    } else if a == 0.0 {
        0.0
    } else {
        f64::INFINITY
    }
}

fn diff(snapshot: &str, field: &str, a: &[f64], b: &[f64], dx: f64) -> FieldDiff {
    let d: Vec<f64> = a.iter().zip(b).map(|(a, b)| (a - b).abs()).collect();
    let l1 = d.iter().sum::<f64>() * dx;
    let l2 = (d.iter().map(|x| x * x).sum::<f64>() * dx).sqrt();
    let sup = d.iter().cloned().fold(0.0, f64::max);
    let n1 = b.iter().map(|x| x.abs()).sum::<f64>() * dx;
    let n2 = (b.iter().map(|x| x * x).sum::<f64>() * dx).sqrt();
    let ns = b.iter().map(|x| x.abs()).fold(0.0, f64::max);
    FieldDiff {
        snapshot: snapshot.to_owned(),
        field: field.to_owned(),
        l1,
        l2,
        sup,
        rel_l1: ratio(l1, n1),
        rel_l2: ratio(l2, n2),
        rel_sup: ratio(sup, ns),
    }
}

fn check_grid(a: &[f64], b: &[f64], what: &str) -> Result<()> {
    if a.len() != b.len() {
        return Err(Error::Mismatch(format!(
            "{what}: {} cells against {}",
            a.len(),
            b.len()
        )));
    }
    let scale = a.iter().chain(b).map(|x| x.abs()).fold(1.0, f64::max);
    if a.iter().zip(b).any(|(x, y)| (x - y).abs() > 1e-9 * scale) {
        return Err(Error::Mismatch(format!("{what}: cell centers differ")));
    }
    Ok(())
}

/// Field-by-field norms of `a - b` for profiles on the same grid at the same time.
pub fn compare_profiles(label: &str, a: &Profile, b: &Profile) -> Result<Vec<FieldDiff>> {
    check_grid(&a.x, &b.x, label)?;
    if (a.t - b.t).abs() > 1e-9 * a.t.abs().max(1.0) {
        return Err(Error::Mismatch(format!(
            "{label}: snapshot times {} and {}",
            a.t, b.t
        )));
    }
    let dx = if a.x.len() > 1 { a.x[1] - a.x[0] } else { 1.0 };
    let (fa, fb) = (a.fields(), b.fields());
    if fa.len() != fb.len() {
        return Err(Error::Mismatch(format!(
            "{label}: different profile columns"
        )));
    }
    Ok(fa
        .iter()
        .zip(&fb)
        .map(|((name, va), (_, vb))| diff(label, name, va, vb, dx))
        .collect())
}

fn read_profile(path: &Path, t: f64) -> Result<Profile> {
    let mut r = csv::Reader::from_path(path)?;
    let header: Vec<String> = r.headers()?.iter().map(str::to_owned).collect();
    let base = ["x", "rho", "u1", "u2", "T"];
    let with_e = header.len() == 6 && header[5] == "E_field";
    if header.len() < 5 || header[..5] != base || !(header.len() == 5 || with_e) {
        return Err(Error::Mismatch(format!(
            "{}: unexpected header {header:?}",
            path.display()
        )));
    }
    let mut cols = vec![Vec::new(); header.len()];
    for rec in r.records() {
        let rec = rec?;
        for (k, v) in rec.iter().enumerate() {
            let x: f64 = v
                .trim()
                .parse()
                .map_err(|_| Error::Io(format!("{}: cannot parse `{v}`", path.display())))?;
            cols[k].push(x);
        }
    }
    let mut it = cols.into_iter();
    let mut next = || it.next().unwrap_or_default();
    Ok(Profile {
        t,
        x: next(),
        rho: next(),
        u1: next(),
        u2: next(),
        temp: next(),
        e_field: with_e.then(next),
    })
}

fn snapshots(dir: &Path) -> Result<BTreeMap<String, (f64, std::path::PathBuf)>> {
    let mut out = BTreeMap::new();
    let entries =
        std::fs::read_dir(dir).map_err(|e| Error::Io(format!("{}: {e}", dir.display())))?;
    for entry in entries {
        let path = entry?.path();
        let name = path
            .file_name()
            .and_then(|n| n.to_str())
            .unwrap_or_default();
        if let Some(label) = name
            .strip_prefix("profiles_")
            .and_then(|n| n.strip_suffix(".csv"))
        {
            if let Ok(t) = label.parse::<f64>() {
                out.insert(label.to_owned(), (t, path.clone()));
            }
        }
    }
    Ok(out)
}

/// Compare every snapshot of two run directories.
pub fn compare_dirs(a: &Path, b: &Path) -> Result<CompareReport> {
    let (sa, sb) = (snapshots(a)?, snapshots(b)?);
    if sa.is_empty() {
        return Err(Error::Mismatch(format!(
            "{} holds no profile snapshots",
            a.display()
        )));
    }
    if sa.keys().ne(sb.keys()) {
        let ka: Vec<_> = sa.keys().collect();
        let kb: Vec<_> = sb.keys().collect();
        return Err(Error::Mismatch(format!(
            "snapshot times differ: {ka:?} against {kb:?}"
        )));
    }
    let mut report = CompareReport::default();
    let mut labels: Vec<_> = sa.iter().collect();
    labels.sort_by(|x, y| x.1 .0.total_cmp(&y.1 .0));
    for (label, (t, pa)) in labels {
        let pb = &sb[label].1;
        let (x, y) = (read_profile(pa, *t)?, read_profile(pb, *t)?);
        report.rows.extend(compare_profiles(label, &x, &y)?);
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn profile(shift: f64) -> Profile {
        let x: Vec<f64> = (0..10).map(|i| 0.05 + 0.1 * i as f64).collect();
        Profile {
            t: 0.2,
            rho: x.iter().map(|x| 1.0 + x + shift).collect(),
            u1: vec![0.0; 10],
            u2: vec![0.0; 10],
            temp: vec![1.0; 10],
            e_field: None,
            x,
        }
    }

    #[test]
    fn identical_profiles_give_zero() {
        let rows = compare_profiles("0.2", &profile(0.0), &profile(0.0)).unwrap();
        assert!(rows
            .iter()
            .all(|r| r.l1 == 0.0 && r.sup == 0.0 && r.rel_l2 == 0.0));
    }

    #[test]
    fn constant_shift() {
        let rows = compare_profiles("0.2", &profile(0.01), &profile(0.0)).unwrap();
        let rho = &rows[0];
        assert!((rho.sup - 0.01).abs() < 1e-12);
        assert!((rho.l1 - 0.01).abs() < 1e-12);
        assert_eq!(rows[3].sup, 0.0);
    }

    #[test]
    fn grid_mismatch() {
        let mut b = profile(0.0);
        b.x[3] += 0.01;
        assert!(matches!(
            compare_profiles("0.2", &profile(0.0), &b),
            Err(Error::Mismatch(_))
        ));
    }
}
