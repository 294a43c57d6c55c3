use std::fmt::Write as _;

use super::{ComponentClass, EigenDecomposition};
use crate::ingest::SectorTable;

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn preamble(manifest: Option<&str>, header: &str) -> String {
    let mut out = String::new();
    if let Some(d) = manifest {
        let _ = writeln!(out, "# manifest {d}");
    }
    out.push_str(header);
    out.push('\n');
    out
}

/// `component,eigenvalue,dispersion,tag,dominant_sector`, components
/// numbered from 1.
pub fn eigenvalues_to_csv(classes: &[ComponentClass], manifest: Option<&str>) -> String {
    let mut out = preamble(manifest, "component,eigenvalue,dispersion,tag,dominant_sector");
    for c in classes {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            c.index + 1,
            c.eigenvalue,
            c.dispersion,
            c.tag,
            csv_field(c.dominant_sector.as_deref().unwrap_or(""))
        );
    }
    out
}

/// One row per (component, asset): `component,ticker,re,im,magnitude,phase,sector,subsector`.
/// Coefficients of every component, or of the leading `top` ones.
pub fn eigenvectors_to_csv(
    decomp: &EigenDecomposition,
    sectors: &SectorTable,
    top: Option<usize>,
    manifest: Option<&str>,
) -> String {
    let mut out = preamble(manifest, "component,ticker,re,im,magnitude,phase,sector,subsector");
    let vectors = decomp.vectors();
    for (i, v) in vectors.iter().take(top.unwrap_or(vectors.len())).enumerate() {
        for (asset, z) in decomp.assets().iter().zip(v) {
            let info = sectors.get(asset);
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{}",
                i + 1,
                csv_field(asset),
                z.re,
                z.im,
                z.norm(),
                z.arg(),
                csv_field(info.map_or("", |s| s.sector.as_str())),
                csv_field(info.map_or("", |s| s.subsector.as_str())),
            );
        }
    }
    out
}
