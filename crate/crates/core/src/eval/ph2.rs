//! Converter from the PH2 distribution layout to a manifest CSV.
//!
//! Expects `PH2_dataset.txt` somewhere under the root, a `||`-delimited
//! table with `Name`, `Clinical Diagnosis` (0 common nevus, 1 atypical
//! nevus, 2 melanoma) and `Colors` (space-separated codes 1 to 6) columns,
//! and per-lesion folders holding `<name>.bmp` and `<name>_lesion.bmp`.

use std::collections::HashMap;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::eval::manifest::ManifestRow;
use crate::features::ColorClass;

pub const PH2_TABLE: &str = "PH2_dataset.txt";

/// File name to path for every file under `root`, first in sorted order wins.
fn index_files(root: &Path) -> Result<HashMap<String, PathBuf>> {
    let mut out = HashMap::new();
    for entry in walkdir::WalkDir::new(root).sort_by_file_name() {
        let entry = entry.map_err(|e| match e.io_error().map(|io| io.kind()) {
            Some(kind) => Error::io(e.path().unwrap_or(root), std::io::Error::from(kind)),
            None => Error::Manifest { path: root.to_path_buf(), message: e.to_string() },
        })?;
        if entry.file_type().is_file() {
            if let Some(name) = entry.file_name().to_str() {
                out.entry(name.to_string()).or_insert_with(|| entry.path().to_path_buf());
            }
        }
    }
    Ok(out)
}

fn color_code(code: &str) -> Option<ColorClass> {
    Some(match code {
        "1" => ColorClass::White,
        "2" => ColorClass::Red,
        "3" => ColorClass::LightBrown,
        "4" => ColorClass::DarkBrown,
        "5" => ColorClass::BlueGray,
        "6" => ColorClass::Black,
        _ => return None,
    })
}

fn diagnosis(code: &str) -> Option<&'static str> {
    Some(match code {
        "0" => "common_nevus",
        "1" => "atypical_nevus",
        "2" => "melanoma",
        _ => return None,
    })
}

fn cells(line: &str) -> Vec<&str> {
    line.trim().trim_start_matches("||").trim_end_matches("||").split("||").map(str::trim).collect()
}

/// One manifest row per table entry, paths relative to `manifest_dir`.
pub fn ph2_manifest_rows(root: &Path, manifest_dir: &Path) -> Result<Vec<ManifestRow>> {
    let files = index_files(root)?;
    let table_path = files.get(PH2_TABLE).ok_or_else(|| Error::NotFound(root.join(PH2_TABLE)))?.clone();
    let text = std::fs::read_to_string(&table_path).map_err(|e| Error::io(&table_path, e))?;
    let bad = |message: String| Error::Manifest { path: table_path.clone(), message };

    let mut lines = text.lines().enumerate();
    let header = lines
        .by_ref()
        .find(|(_, l)| l.contains("||") && l.contains("Name") && l.contains("Clinical Diagnosis"))
        .map(|(_, l)| cells(l))
        .ok_or_else(|| bad("no header with `Name` and `Clinical Diagnosis`".into()))?;
    let col = |name: &str| header.iter().position(|h| h.eq_ignore_ascii_case(name));
    let (name_col, diag_col) = (col("Name").expect("checked"), col("Clinical Diagnosis").expect("checked"));
    let colors_col = col("Colors");

    let rel = |p: &Path| pathdiff(p, manifest_dir);
    let mut rows = Vec::new();
    for (lineno, line) in lines {
        if !line.trim_start().starts_with("||") {
            continue;
        }
        let c = cells(line);
        let name = c.get(name_col).copied().unwrap_or("");
        if !(name.starts_with("IMD") && name[3..].chars().all(|ch| ch.is_ascii_digit()) && name.len() > 3) {
            continue;
        }
        let at = |m: String| bad(format!("line {}: {m}", lineno + 1));
        let label = c
            .get(diag_col)
            .and_then(|d| diagnosis(d))
            .ok_or_else(|| at(format!("{name}: unknown clinical diagnosis `{}`", c.get(diag_col).unwrap_or(&""))))?;
        let colors = match colors_col.and_then(|k| c.get(k)) {
            Some(s) => s
                .split_whitespace()
                .map(|t| color_code(t).ok_or_else(|| at(format!("{name}: unknown colour code `{t}`"))))
                .collect::<Result<Vec<_>>>()?,
            None => vec![],
        };
        let image = files.get(&format!("{name}.bmp")).ok_or_else(|| at(format!("{name}.bmp not found under the root")))?;
        let mask = files.get(&format!("{name}_lesion.bmp")).map(|p| rel(p));
        rows.push(ManifestRow::new(rel(image), label.to_string(), mask, &colors));
    }
    if rows.is_empty() {
        return Err(bad("no image rows".into()));
    }
    Ok(rows)
}

/// `p` relative to `base` when it lies beneath it, otherwise absolute.
fn pathdiff(p: &Path, base: &Path) -> String {
    let abs = |q: &Path| std::fs::canonicalize(q).unwrap_or_else(|_| q.to_path_buf());
    let (p, base) = (abs(p), abs(base));
    p.strip_prefix(&base).map(Path::to_path_buf).unwrap_or(p).display().to_string()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eval::manifest::{load_manifest, write_manifest};
    use crate::imaging::{save_png, RgbImage};
    use crate::learn::Label;

    #[test]
    fn converts_a_miniature_layout() {
        let dir = tempfile::tempdir().unwrap();
        let root = dir.path().join("PH2Dataset");
        let table = "\
|| Name || Histological Diagnosis || Clinical Diagnosis || Asymmetry || Colors ||
|| IMD002 ||  || 1 || 0 || 3 4 ||
|| IMD058 || Melanoma || 2 || 2 || 1 4 5 6 ||
Legend
|| Colors: 1 white ||
";
        std::fs::create_dir_all(&root).unwrap();
        std::fs::write(root.join(PH2_TABLE), table).unwrap();
        for n in ["IMD002", "IMD058"] {
            let d = root.join("PH2 Dataset images").join(n);
            std::fs::create_dir_all(d.join(format!("{n}_Dermoscopic_Image"))).unwrap();
            std::fs::create_dir_all(d.join(format!("{n}_lesion"))).unwrap();
            let img = RgbImage::filled(12, 12, [100, 80, 60]);
            save_png(&img, d.join(format!("{n}_Dermoscopic_Image/{n}.bmp"))).unwrap();
            save_png(&img, d.join(format!("{n}_lesion/{n}_lesion.bmp"))).unwrap();
        }
        let rows = ph2_manifest_rows(&root, dir.path()).unwrap();
        assert_eq!(rows.len(), 2);
        assert_eq!(rows[0].label, "atypical_nevus");
        assert_eq!(rows[1].colors, "white;dark_brown;blue_gray;black");
        let out = dir.path().join("ph2.csv");
        write_manifest(&out, &rows).unwrap();
        let m = load_manifest(&out).unwrap();
        assert_eq!(m.labels(), vec![Label::Benign, Label::Melanoma]);
        assert!(m.entries.iter().all(|e| e.mask.is_some()));
    }

    #[test]
    fn missing_table_is_reported() {
        let dir = tempfile::tempdir().unwrap();
        assert!(matches!(ph2_manifest_rows(dir.path(), dir.path()), Err(Error::NotFound(_))));
    }
}
