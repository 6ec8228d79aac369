use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::ColorClass;
use crate::imaging::{load_image, RgbImage};
use crate::learn::Label;
use crate::segmentation::BinaryMask;

/// One labelled image. Paths are resolved against the manifest's directory.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub image: PathBuf,
    pub label: Label,
    /// The label cell as written, e.g. `atypical_nevus`.
    pub diagnosis: String,
    pub mask: Option<PathBuf>,
    pub colors: Option<Vec<ColorClass>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub path: PathBuf,
    pub entries: Vec<ManifestEntry>,
}

impl DatasetManifest {
    pub fn labels(&self) -> Vec<Label> {
        self.entries.iter().map(|e| e.label).collect()
    }

    pub fn count(&self, label: Label) -> usize {
        self.entries.iter().filter(|e| e.label == label).count()
    }

    /// Errors unless both classes are present.
    pub fn require_both_classes(&self) -> Result<()> {
        if self.count(Label::Melanoma) == 0 || self.count(Label::Benign) == 0 {
            return Err(Error::Manifest {
                path: self.path.clone(),
                message: format!(
                    "training needs both classes, found {} melanoma and {} benign",
                    self.count(Label::Melanoma),
                    self.count(Label::Benign)
                ),
            });
        }
        Ok(())
    }
}

fn parse_color(name: &str) -> Option<ColorClass> {
    let n = name.trim().to_ascii_lowercase().replace(['-', ' '], "_");
    ColorClass::ALL.into_iter().find(|c| c.name() == n)
}

/// Reads a CSV with header `image,label[,mask][,colors]`; colours are
/// separated by `;`. Row numbers in errors count data rows from 1.
pub fn load_manifest(path: impl AsRef<Path>) -> Result<DatasetManifest> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let err = |message: String| Error::Manifest { path: path.to_path_buf(), message };
    let base = path.parent().unwrap_or(Path::new("."));
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
    let headers = reader.headers().map_err(|e| err(e.to_string()))?.clone();
    let col = |name: &str| headers.iter().position(|h| h.eq_ignore_ascii_case(name));
    let (image_col, label_col) = match (col("image"), col("label")) {
        (Some(i), Some(l)) => (i, l),
        _ => return Err(err("header must contain `image` and `label`".into())),
    };
    let (mask_col, colors_col) = (col("mask"), col("colors"));

    let mut entries = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let row = i + 1;
        let record = record.map_err(|e| err(format!("row {row}: {e}")))?;
        let cell = |c: Option<usize>| c.and_then(|c| record.get(c)).filter(|s| !s.is_empty());
        let resolve = |rel: &str, what: &str| -> Result<PathBuf> {
            let p = base.join(rel);
            if p.is_file() {
                Ok(p)
            } else {
                Err(err(format!("row {row}: {what} `{}` not found", p.display())))
            }
        };
        let image = resolve(cell(Some(image_col)).ok_or_else(|| err(format!("row {row}: empty image path")))?, "image")?;
        let diagnosis = cell(Some(label_col)).unwrap_or("").to_string();
        let label = diagnosis.parse::<Label>().map_err(|_| err(format!("row {row}: unknown label `{diagnosis}`")))?;
        let mask = cell(mask_col).map(|m| resolve(m, "mask")).transpose()?;
        let colors = cell(colors_col)
            .map(|s| {
                s.split(';')
                    .filter(|t| !t.trim().is_empty())
                    .map(|t| parse_color(t).ok_or_else(|| err(format!("row {row}: unknown colour `{}`", t.trim()))))
                    .collect::<Result<Vec<_>>>()
            })
            .transpose()?;
        entries.push(ManifestEntry { image, label, diagnosis, mask, colors });
    }
    if entries.is_empty() {
        return Err(err("no entries".into()));
    }
    Ok(DatasetManifest { path: path.to_path_buf(), entries })
}

/// A manifest row before path resolution, as written to disk.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestRow {
    pub image: String,
    pub label: String,
    pub mask: String,
    pub colors: String,
}

impl ManifestRow {
    pub fn new(image: String, label: String, mask: Option<String>, colors: &[ColorClass]) -> Self {
        let colors = colors.iter().map(|c| c.name()).collect::<Vec<_>>().join(";");
        Self { image, label, mask: mask.unwrap_or_default(), colors }
    }
}

pub fn write_manifest(path: impl AsRef<Path>, rows: &[ManifestRow]) -> Result<()> {
    let path = path.as_ref();
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::Manifest { path: path.to_path_buf(), message: e.to_string() })?;
    for r in rows {
        w.serialize(r).map_err(|e| Error::Manifest { path: path.to_path_buf(), message: e.to_string() })?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Ground-truth mask from an image: any channel above mid-gray is lesion.
pub fn mask_from_image(img: &RgbImage) -> BinaryMask {
    BinaryMask::from_fn(img.width(), img.height(), |x, y| img.get(x, y).iter().any(|&v| v > 127))
}

pub fn load_mask(path: impl AsRef<Path>) -> Result<BinaryMask> {
    load_image(path).map(|img| mask_from_image(&img))
}
