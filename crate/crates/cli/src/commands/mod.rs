pub mod barriers;
pub mod evolve;
pub mod section;
pub mod verify;
pub mod wave;

use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use pme_tube::scalar::relative_sup_distance;
use pme_tube::Profile;

use crate::exit::Invalid;
use crate::manifest;

/// Creates the output directory and marks it as ours. A directory carrying
/// the mark (or a manifest) is cleared first; any other non-empty directory
/// is refused rather than mixed into the new manifest.
pub fn prepare_out(out: &Path) -> Result<()> {
    if out.exists() {
        let mut entries =
            fs::read_dir(out).with_context(|| format!("listing {}", out.display()))?;
        if entries.next().is_some() {
            if !out.join(manifest::MARKER).is_file() && !out.join(manifest::FILE).is_file() {
                return Err(Invalid(format!(
                    "output directory {} is not empty and was not written by this tool",
                    out.display()
                ))
                .into());
            }
            fs::remove_dir_all(out).with_context(|| format!("clearing {}", out.display()))?;
        }
    }
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    fs::write(out.join(manifest::MARKER), "")
        .with_context(|| format!("marking {}", out.display()))?;
    Ok(())
}

/// Relative sup distance over interior nodes, where both profiles are positive.
pub fn interior_distance(a: &Profile, b: &Profile) -> f64 {
    let n = a.phi.len();
    relative_sup_distance(&a.phi[1..n - 1], &b.phi[1..n - 1])
}
