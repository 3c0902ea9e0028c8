//! CSV and SVG emission.

use std::io::{self, Write};

use crate::measures::DiscreteMeasure;
use crate::scalar::Real;
use crate::substitution::{PatchLevel, SubstitutionSystem};

/// Writes one row per atom: `kind,k,x,y,weight_num,weight_den,weight_real`.
/// UTF-8, LF line endings, reals with 17 significant digits.
pub fn export_csv<R: Real>(mu: &DiscreteMeasure<R>, out: &mut dyn Write) -> io::Result<()> {
    writeln!(out, "kind,k,x,y,weight_num,weight_den,weight_real")?;
    for atom in &mu.atoms {
        writeln!(
            out,
            "{},{},{:.16e},{:.16e},{},{},{:.16e}",
            mu.kind,
            mu.level,
            atom.position.x,
            atom.position.y,
            atom.numerator,
            mu.denominator,
            atom.numerator as f64 / mu.denominator as f64,
        )?;
    }
    Ok(())
}

const TILE_FILLS: [&str; 8] = [
    "#8ecae6", "#ffb703", "#90be6d", "#f28482", "#cdb4db", "#f9c74f", "#a3b18a", "#bde0fe",
];
const ATOM_FILLS: [&str; 3] = ["#d62828", "#1d3557", "#2a9d8f"];

fn escape(text: &str) -> String {
    text.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

/// Renders a level as SVG: one polygon per tile (fill keyed by prototile),
/// plus one circle per atom of each measure, radius proportional to the
/// square root of the weight. The view box is the bounding box of the
/// prototile union with a 5% margin.
pub fn render_svg<R: Real>(
    sys: &SubstitutionSystem<R>,
    level: &PatchLevel<R>,
    measures: &[&DiscreteMeasure<R>],
    out: &mut dyn Write,
) -> io::Result<()> {
    let f = |v: R| v.to_f64().expect("finite coordinate");
    let mut min_x = f64::INFINITY;
    let mut min_y = f64::INFINITY;
    let mut max_x = f64::NEG_INFINITY;
    let mut max_y = f64::NEG_INFINITY;
    for p in sys.prototiles() {
        let (lo, hi) = p.shape.bounding_box();
        min_x = min_x.min(f(lo.x));
        min_y = min_y.min(f(lo.y));
        max_x = max_x.max(f(hi.x));
        max_y = max_y.max(f(hi.y));
    }
    let width = max_x - min_x;
    let height = max_y - min_y;
    let margin = 0.05 * width.max(height);
    let view = (
        min_x - margin,
        min_y - margin,
        width + 2.0 * margin,
        height + 2.0 * margin,
    );
    // SVG y grows downward; mirror inside the box so the plane reads upright.
    let flip = move |y: f64| max_y + min_y - y;
    let size = view.2.max(view.3);
    let stroke = 0.0015 * size;

    writeln!(out, "<?xml version=\"1.0\" encoding=\"UTF-8\"?>")?;
    writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"{:.6} {:.6} {:.6} {:.6}\">",
        view.0, view.1, view.2, view.3
    )?;
    writeln!(out, "<g stroke=\"#333333\" stroke-width=\"{stroke:.6}\">")?;
    for tile in &level.tiles {
        let poly = tile.polygon(sys);
        let points: Vec<String> = poly
            .vertices()
            .iter()
            .map(|v| format!("{:.6},{:.6}", f(v.x), flip(f(v.y))))
            .collect();
        writeln!(
            out,
            "<polygon fill=\"{}\" data-prototile=\"{}\" points=\"{}\"/>",
            TILE_FILLS[tile.ptype % TILE_FILLS.len()],
            escape(&sys.prototiles()[tile.ptype].label),
            points.join(" ")
        )?;
    }
    writeln!(out, "</g>")?;
    for (mi, mu) in measures.iter().enumerate() {
        let max_num = mu.max_numerator().max(1);
        let r_max = 0.015 * size;
        writeln!(
            out,
            "<g fill=\"{}\" fill-opacity=\"0.85\" data-measure=\"{}\">",
            ATOM_FILLS[mi % ATOM_FILLS.len()],
            mu.kind
        )?;
        for atom in &mu.atoms {
            let r = r_max * (atom.numerator as f64 / max_num as f64).sqrt();
            writeln!(
                out,
                "<circle cx=\"{:.6}\" cy=\"{:.6}\" r=\"{:.6}\"/>",
                f(atom.position.x),
                flip(f(atom.position.y)),
                r
            )?;
        }
        writeln!(out, "</g>")?;
    }
    writeln!(out, "</svg>")?;
    Ok(())
}
