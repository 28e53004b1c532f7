use std::fs;
use std::path::{Path, PathBuf};

use gmface_core::ImageGrid;

use crate::error::{Error, Result};
use crate::pgm::read_image;

/// Loads every `.pgm` file of a directory, sorted by file name. All images
/// must share the first image's dimensions.
pub fn load_dataset(dir: impl AsRef<Path>) -> Result<Vec<ImageGrid>> {
    let dir = dir.as_ref();
    let mut files: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| {
            p.is_file()
                && p.extension()
                    .is_some_and(|ext| ext.eq_ignore_ascii_case("pgm"))
        })
        .collect();
    files.sort_by(|a, b| a.file_name().cmp(&b.file_name()));
    if files.is_empty() {
        return Err(Error::EmptyDataset(dir.to_path_buf()));
    }

    let mut images: Vec<ImageGrid> = Vec::with_capacity(files.len());
    for path in &files {
        let img = read_image(path)?;
        if let Some(first) = images.first() {
            if img.dims() != first.dims() {
                return Err(Error::MixedDimensions {
                    file: path.display().to_string(),
                    expected_h: first.height(),
                    expected_w: first.width(),
                    found_h: img.height(),
                    found_w: img.width(),
                });
            }
        }
        images.push(img);
    }
    Ok(images)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pgm::write_image;

    fn grid(h: usize, w: usize, v: f64) -> ImageGrid {
        ImageGrid::filled(h, w, v).unwrap()
    }

    #[test]
    fn loads_in_name_order() {
        let dir = tempfile::tempdir().unwrap();
        // created out of order on purpose
        write_image(&grid(3, 4, 1.0), dir.path().join("c.pgm"), 255).unwrap();
        write_image(&grid(3, 4, 0.0), dir.path().join("a.pgm"), 255).unwrap();
        write_image(&grid(3, 4, 0.6), dir.path().join("b.PGM"), 255).unwrap();
        fs::write(dir.path().join("notes.txt"), "ignored").unwrap();
        let imgs = load_dataset(dir.path()).unwrap();
        let firsts: Vec<f64> = imgs.iter().map(|g| g.pixels()[0]).collect();
        assert_eq!(firsts, vec![0.0, 153.0 / 255.0, 1.0]);
    }

    #[test]
    fn mismatched_image_is_named() {
        let dir = tempfile::tempdir().unwrap();
        write_image(&grid(3, 4, 0.0), dir.path().join("a.pgm"), 255).unwrap();
        write_image(&grid(4, 4, 0.0), dir.path().join("odd.pgm"), 255).unwrap();
        let err = load_dataset(dir.path()).unwrap_err();
        assert!(matches!(err, Error::MixedDimensions { .. }));
        assert!(err.to_string().contains("odd.pgm"), "{err}");
    }

    #[test]
    fn empty_directory_is_an_error() {
        let dir = tempfile::tempdir().unwrap();
        assert!(matches!(
            load_dataset(dir.path()),
            Err(Error::EmptyDataset(_))
        ));
    }
}
