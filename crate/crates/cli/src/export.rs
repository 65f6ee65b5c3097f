//! Plain-text file formats: fitted meshes and sparse matrices.

use std::io::{self, Write};

use fitfem_core::fitting::FittedMesh;
use fitfem_core::linalg::SymmetricSparse;

/// Writes a fitted mesh as sectioned plain text, one record per line:
///
/// ```text
/// $vertices   index x y boundary-flag
/// $elements   index v0 v1 v2 subdomain-tag
/// $patches    macro-index p1 p2 p3 p4 p5 p6 c1 c2 c3 c4
/// $configs    patch-index kind r s t        (cut patches only)
/// ```
pub fn write_fitted_mesh<W: Write>(w: &mut W, fitted: &FittedMesh) -> io::Result<()> {
    let mesh = &fitted.mesh;
    writeln!(w, "$vertices")?;
    for (i, v) in mesh.vertices.iter().enumerate() {
        writeln!(w, "{} {} {} {}", i, v.x, v.y, u8::from(mesh.boundary[i]))?;
    }
    writeln!(w, "$elements")?;
    for (e, el) in mesh.elements.iter().enumerate() {
        writeln!(
            w,
            "{} {} {} {} {}",
            e,
            el[0],
            el[1],
            el[2],
            fitted.tags[e].tag()
        )?;
    }
    writeln!(w, "$patches")?;
    for (p, patch) in mesh.patches.iter().enumerate() {
        writeln!(
            w,
            "{} {} {} {} {} {} {} {} {} {} {}",
            p,
            patch.corners[0],
            patch.corners[1],
            patch.corners[2],
            patch.midpoints[0],
            patch.midpoints[1],
            patch.midpoints[2],
            patch.children[0],
            patch.children[1],
            patch.children[2],
            patch.children[3],
        )?;
    }
    writeln!(w, "$configs")?;
    for (p, fit) in fitted.fits.iter().enumerate() {
        if let Some(fit) = fit {
            writeln!(
                w,
                "{} {} {} {} {}",
                p,
                fit.config.kind.as_str(),
                fit.config.r,
                fit.config.s,
                fit.config.t,
            )?;
        }
    }
    Ok(())
}

/// Coordinate-format matrix dump: one `row col value` triple per line with
/// 17 significant digits.
pub fn write_matrix<W: Write>(w: &mut W, a: &SymmetricSparse) -> io::Result<()> {
    for i in 0..a.n() {
        for (j, v) in a.row(i) {
            writeln!(w, "{} {} {:.16e}", i, j, v)?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use fitfem_core::fitting::fit_mesh;
    use fitfem_core::interface::{LevelSetInterface, DEFAULT_SNAP_TOL};
    use fitfem_core::mesh::build_macro_mesh;

    #[test]
    fn mesh_export_sections_and_counts() {
        let mesh = build_macro_mesh(2).unwrap().refine().unwrap();
        let phi = LevelSetInterface::circle(0.0, 0.0, 0.5);
        let fitted = fit_mesh(&mesh, &phi, DEFAULT_SNAP_TOL).unwrap();
        let mut buf = Vec::new();
        write_fitted_mesh(&mut buf, &fitted).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();

        let section = |name: &str| lines.iter().position(|&l| l == name).unwrap();
        let (v, e, p, c) = (
            section("$vertices"),
            section("$elements"),
            section("$patches"),
            section("$configs"),
        );
        assert!(v < e && e < p && p < c);
        assert_eq!(e - v - 1, 25);
        assert_eq!(p - e - 1, 32);
        assert_eq!(c - p - 1, 8);
        assert_eq!(lines.len() - c - 1, fitted.cut_patch_count());

        // Element records carry a subdomain tag of 1 or 2.
        for line in &lines[e + 1..p] {
            let tag: u8 = line.split_whitespace().last().unwrap().parse().unwrap();
            assert!(tag == 1 || tag == 2);
        }
    }

    #[test]
    fn matrix_export_round_trips_values() {
        let a = SymmetricSparse::from_triplets(
            2,
            &[(0, 0, 4.0), (0, 1, 1.0 / 3.0), (1, 0, 1.0 / 3.0), (1, 1, 3.0)],
        );
        let mut buf = Vec::new();
        write_matrix(&mut buf, &a).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut entries = 0;
        for line in text.lines() {
            let parts: Vec<&str> = line.split_whitespace().collect();
            assert_eq!(parts.len(), 3);
            let val: f64 = parts[2].parse().unwrap();
            if parts[0] == "0" && parts[1] == "1" {
                // 17 significant digits reproduce the f64 exactly.
                assert_eq!(val, 1.0 / 3.0);
            }
            entries += 1;
        }
        assert_eq!(entries, 4);
    }
}
