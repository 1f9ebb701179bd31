//! Orthographic front-view stick figures as SVG.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use super::{fk_positions, MotionClip, MotionError};

#[derive(Debug, Clone, PartialEq)]
pub struct RenderOptions {
    pub width: u32,
    pub height: u32,
    /// World-space x range mapped onto the canvas width.
    pub x_range: (f64, f64),
    /// World-space y range mapped onto the canvas height, y up.
    pub y_range: (f64, f64),
    pub stroke_width: f64,
}

impl Default for RenderOptions {
    fn default() -> Self {
        RenderOptions {
            width: 512,
            height: 512,
            x_range: (-1.5, 1.5),
            y_range: (-1.25, 1.75),
            stroke_width: 4.0,
        }
    }
}

impl RenderOptions {
    fn project(&self, x: f64, y: f64) -> (f64, f64) {
        let (x0, x1) = self.x_range;
        let (y0, y1) = self.y_range;
        let px = (x - x0) / (x1 - x0) * self.width as f64;
        let py = (y1 - y) / (y1 - y0) * self.height as f64;
        (px, py)
    }
}

/// One frame as an SVG document. The viewer faces the body, so the body's
/// left (+x) appears on the right of the canvas.
pub fn render_svg(clip: &MotionClip, frame: usize, opts: &RenderOptions) -> String {
    let positions = fk_positions(&clip.slice(frame, frame + 1));
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#,
        w = opts.width,
        h = opts.height
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let (gx0, gy) = opts.project(opts.x_range.0, 0.0);
    let (gx1, _) = opts.project(opts.x_range.1, 0.0);
    let _ = writeln!(
        out,
        r##"<line x1="{gx0:.2}" y1="{gy:.2}" x2="{gx1:.2}" y2="{gy:.2}" stroke="#bbbbbb" stroke-width="1"/>"##
    );
    let _ = writeln!(
        out,
        r#"<g stroke="black" stroke-width="{}" stroke-linecap="round">"#,
        opts.stroke_width
    );
    for (k, joint) in clip.skeleton().joints().iter().enumerate() {
        if let Some(p) = joint.parent {
            let (x1, y1) = opts.project(positions[[0, p, 0]], positions[[0, p, 1]]);
            let (x2, y2) = opts.project(positions[[0, k, 0]], positions[[0, k, 1]]);
            let _ = writeln!(out, r#"<line x1="{x1:.2}" y1="{y1:.2}" x2="{x2:.2}" y2="{y2:.2}"/>"#);
        }
    }
    out.push_str("</g>\n</svg>\n");
    out
}

/// Writes `frame_00000.svg`, `frame_00010.svg`, ... for every `stride`-th
/// frame. Returns the written paths in frame order.
pub fn render_frames(
    clip: &MotionClip,
    out_dir: impl AsRef<Path>,
    stride: usize,
    opts: &RenderOptions,
) -> Result<Vec<PathBuf>, MotionError> {
    if stride == 0 {
        return Err(MotionError::InvalidClip("render stride must be at least 1".into()));
    }
    let dir = out_dir.as_ref();
    std::fs::create_dir_all(dir).map_err(|e| MotionError::io(dir, e))?;
    let mut written = Vec::new();
    for frame in (0..clip.n_frames()).step_by(stride) {
        let path = dir.join(format!("frame_{frame:05}.svg"));
        std::fs::write(&path, render_svg(clip, frame, opts)).map_err(|e| MotionError::io(&path, e))?;
        written.push(path);
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::motion::Skeleton;

    #[test]
    fn stride_ten_on_600_frames() {
        let clip = MotionClip::rest(Skeleton::default_body(), 600, 60.0, [0.0, 0.95, 0.0]).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let files = render_frames(&clip, dir.path(), 10, &RenderOptions::default()).unwrap();
        assert_eq!(files.len(), 60);
        assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 60);
        assert!(files[59].ends_with("frame_00590.svg"));
        let svg = std::fs::read_to_string(&files[0]).unwrap();
        assert!(svg.starts_with("<svg"));
        assert_eq!(svg.matches("<line").count(), 1 + 23);
    }

    #[test]
    fn zero_stride_is_rejected() {
        let clip = MotionClip::rest(Skeleton::default_body(), 2, 60.0, [0.0; 3]).unwrap();
        let dir = tempfile::tempdir().unwrap();
        assert!(render_frames(&clip, dir.path(), 0, &RenderOptions::default()).is_err());
    }

    #[test]
    fn projection_maps_corners() {
        let o = RenderOptions::default();
        assert_eq!(o.project(-1.5, 1.75), (0.0, 0.0));
        assert_eq!(o.project(1.5, -1.25), (512.0, 512.0));
    }
}
