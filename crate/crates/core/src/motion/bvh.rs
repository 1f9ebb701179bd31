//! BVH export and a tolerant reader.
//!
//! Exports use one `Zrotation Xrotation Yrotation` channel triple per joint
//! (degrees, intrinsic order) plus root positions. Joints are written in
//! depth-first order; leaves get a zero-length `End Site`.

use std::fmt::Write as _;
use std::path::Path;

use nalgebra::{Matrix3, Rotation3, Unit, Vector3};

use super::{matrix_to_rot6, rot6_to_matrix, Joint, MotionClip, MotionError, Skeleton};

const MAX_DEPTH: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BvhChannel {
    Xposition,
    Yposition,
    Zposition,
    Xrotation,
    Yrotation,
    Zrotation,
}

impl BvhChannel {
    fn parse(token: &str) -> Option<Self> {
        Some(match token {
            "Xposition" => BvhChannel::Xposition,
            "Yposition" => BvhChannel::Yposition,
            "Zposition" => BvhChannel::Zposition,
            "Xrotation" => BvhChannel::Xrotation,
            "Yrotation" => BvhChannel::Yrotation,
            "Zrotation" => BvhChannel::Zrotation,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BvhJoint {
    pub name: String,
    pub parent: Option<usize>,
    pub offset: [f64; 3],
    pub channels: Vec<BvhChannel>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BvhDocument {
    /// Depth-first order, as written in the file.
    pub joints: Vec<BvhJoint>,
    pub frame_time: f64,
    /// One row of channel values per frame.
    pub frames: Vec<Vec<f64>>,
}

/// `R = Rz(z) Rx(x) Ry(y)`; returns `(z, x, y)` in degrees.
fn matrix_to_zxy(m: &Matrix3<f64>) -> [f64; 3] {
    let sx = m[(2, 1)].clamp(-1.0, 1.0);
    let x = sx.asin();
    let (z, y) = if sx.abs() < 1.0 - 1e-12 {
        ((-m[(0, 1)]).atan2(m[(1, 1)]), (-m[(2, 0)]).atan2(m[(2, 2)]))
    } else {
        (m[(1, 0)].atan2(m[(0, 0)]), 0.0)
    };
    [z.to_degrees(), x.to_degrees(), y.to_degrees()]
}

fn axis_rotation(channel: BvhChannel, degrees: f64) -> Matrix3<f64> {
    let axis = match channel {
        BvhChannel::Xrotation => Vector3::x(),
        BvhChannel::Yrotation => Vector3::y(),
        BvhChannel::Zrotation => Vector3::z(),
        _ => return Matrix3::identity(),
    };
    *Rotation3::from_axis_angle(&Unit::new_unchecked(axis), degrees.to_radians()).matrix()
}

fn depth_first(skeleton: &Skeleton) -> Vec<usize> {
    let mut order = Vec::with_capacity(skeleton.len());
    let mut stack = vec![0];
    while let Some(j) = stack.pop() {
        order.push(j);
        let mut kids: Vec<usize> = skeleton.children(j).collect();
        kids.reverse();
        stack.extend(kids);
    }
    order
}

pub fn write_bvh(clip: &MotionClip) -> String {
    let skeleton = clip.skeleton();
    let order = depth_first(skeleton);
    let mut out = String::from("HIERARCHY\n");

    fn write_joint(out: &mut String, skeleton: &Skeleton, j: usize, depth: usize) {
        let pad = "\t".repeat(depth);
        let joint = &skeleton.joints()[j];
        let kind = if joint.parent.is_none() { "ROOT" } else { "JOINT" };
        let [x, y, z] = joint.offset;
        let _ = writeln!(out, "{pad}{kind} {}\n{pad}{{", joint.name);
        let _ = writeln!(out, "{pad}\tOFFSET {x:.6} {y:.6} {z:.6}");
        if joint.parent.is_none() {
            let _ = writeln!(out, "{pad}\tCHANNELS 6 Xposition Yposition Zposition Zrotation Xrotation Yrotation");
        } else {
            let _ = writeln!(out, "{pad}\tCHANNELS 3 Zrotation Xrotation Yrotation");
        }
        let kids: Vec<usize> = skeleton.children(j).collect();
        if kids.is_empty() {
            let _ = writeln!(out, "{pad}\tEnd Site\n{pad}\t{{\n{pad}\t\tOFFSET 0.000000 0.000000 0.000000\n{pad}\t}}");
        }
        for k in kids {
            write_joint(out, skeleton, k, depth + 1);
        }
        let _ = writeln!(out, "{pad}}}");
    }
    write_joint(&mut out, skeleton, 0, 0);

    let _ = writeln!(out, "MOTION\nFrames: {}\nFrame Time: {:.8}", clip.n_frames(), 1.0 / clip.fps());
    for f in 0..clip.n_frames() {
        let t = clip.root_translation()[f];
        let mut fields: Vec<String> = t.iter().map(|v| format!("{v:.6}")).collect();
        for &j in &order {
            let m = rot6_to_matrix(clip.rotation(f, j)).expect("clip rotations are validated");
            fields.extend(matrix_to_zxy(&m).iter().map(|v| format!("{v:.6}")));
        }
        out.push_str(&fields.join(" "));
        out.push('\n');
    }
    out
}

pub fn export_bvh(clip: &MotionClip, path: impl AsRef<Path>) -> Result<(), MotionError> {
    let path = path.as_ref();
    std::fs::write(path, write_bvh(clip)).map_err(|e| MotionError::io(path, e))
}

struct Tokens<'a> {
    inner: std::iter::Peekable<std::str::SplitWhitespace<'a>>,
}

impl<'a> Tokens<'a> {
    fn next(&mut self, what: &str) -> Result<&'a str, MotionError> {
        self.inner
            .next()
            .ok_or_else(|| MotionError::Bvh(format!("unexpected end of file, expected {what}")))
    }

    fn expect(&mut self, keyword: &str) -> Result<(), MotionError> {
        match self.next(keyword)? {
            t if t == keyword => Ok(()),
            t => Err(MotionError::Bvh(format!("expected {keyword:?}, found {t:?}"))),
        }
    }

    fn number(&mut self, what: &str) -> Result<f64, MotionError> {
        let t = self.next(what)?;
        t.parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .ok_or_else(|| MotionError::Bvh(format!("expected a number for {what}, found {t:?}")))
    }
}

pub fn parse_bvh(text: &str) -> Result<BvhDocument, MotionError> {
    let mut tok = Tokens {
        inner: text.split_whitespace().peekable(),
    };
    tok.expect("HIERARCHY")?;
    tok.expect("ROOT")?;

    let mut joints: Vec<BvhJoint> = Vec::new();
    // Open braces: Some(joint index) for joints, None for End Site blocks.
    let mut stack: Vec<Option<usize>> = Vec::new();
    let mut pending: Option<(String, Option<usize>)> = Some((tok.next("root name")?.to_string(), None));

    loop {
        if let Some((name, parent)) = pending.take() {
            tok.expect("{")?;
            tok.expect("OFFSET")?;
            let offset = [tok.number("offset")?, tok.number("offset")?, tok.number("offset")?];
            tok.expect("CHANNELS")?;
            let count = tok.number("channel count")?;
            if !(0.0..=6.0).contains(&count) || count.fract() != 0.0 {
                return Err(MotionError::Bvh(format!("bad channel count {count}")));
            }
            let mut channels = Vec::with_capacity(count as usize);
            for _ in 0..count as usize {
                let t = tok.next("channel")?;
                channels.push(BvhChannel::parse(t).ok_or_else(|| MotionError::Bvh(format!("unknown channel {t:?}")))?);
            }
            joints.push(BvhJoint {
                name,
                parent,
                offset,
                channels,
            });
            stack.push(Some(joints.len() - 1));
            if stack.len() > MAX_DEPTH {
                return Err(MotionError::Bvh("hierarchy nests too deeply".into()));
            }
        }
        if stack.is_empty() {
            break;
        }
        match tok.next("JOINT, End Site or }")? {
            "JOINT" => {
                let parent = stack.iter().rev().find_map(|s| *s);
                if stack.last() != Some(&parent) {
                    return Err(MotionError::Bvh("JOINT inside End Site".into()));
                }
                pending = Some((tok.next("joint name")?.to_string(), parent));
            }
            "End" => {
                tok.expect("Site")?;
                tok.expect("{")?;
                tok.expect("OFFSET")?;
                for _ in 0..3 {
                    tok.number("end site offset")?;
                }
                stack.push(None);
            }
            "}" => {
                stack.pop();
            }
            t => return Err(MotionError::Bvh(format!("unexpected token {t:?}"))),
        }
    }

    tok.expect("MOTION")?;
    tok.expect("Frames:")?;
    let n = tok.number("frame count")?;
    if n < 0.0 || n.fract() != 0.0 {
        return Err(MotionError::Bvh(format!("bad frame count {n}")));
    }
    tok.expect("Frame")?;
    tok.expect("Time:")?;
    let frame_time = tok.number("frame time")?;
    if frame_time <= 0.0 {
        return Err(MotionError::Bvh("frame time must be positive".into()));
    }
    let width: usize = joints.iter().map(|j| j.channels.len()).sum();
    let mut frames = Vec::new();
    for f in 0..n as u64 {
        let mut row = Vec::with_capacity(width);
        for _ in 0..width {
            row.push(tok.number(&format!("frame {f}"))?);
        }
        frames.push(row);
    }
    Ok(BvhDocument {
        joints,
        frame_time,
        frames,
    })
}

impl BvhDocument {
    /// Converts back to a clip, composing each joint's rotation channels in
    /// file order. Joint order becomes the file's depth-first order.
    pub fn to_clip(&self) -> Result<MotionClip, MotionError> {
        let joints: Vec<Joint> = self
            .joints
            .iter()
            .map(|j| Joint {
                name: j.name.clone(),
                parent: j.parent,
                offset: j.offset,
            })
            .collect();
        let skeleton = Skeleton::new(joints)?;
        let mut root = Vec::with_capacity(self.frames.len());
        let mut rotations = Vec::with_capacity(self.frames.len() * skeleton.len());
        for row in &self.frames {
            let mut cursor = row.iter();
            let mut translation = [0.0; 3];
            for (k, joint) in self.joints.iter().enumerate() {
                let mut m = Matrix3::identity();
                for &ch in &joint.channels {
                    let v = *cursor.next().expect("row width matches channels");
                    match ch {
                        BvhChannel::Xposition if k == 0 => translation[0] = v,
                        BvhChannel::Yposition if k == 0 => translation[1] = v,
                        BvhChannel::Zposition if k == 0 => translation[2] = v,
                        BvhChannel::Xposition | BvhChannel::Yposition | BvhChannel::Zposition => {}
                        rot => m *= axis_rotation(rot, v),
                    }
                }
                rotations.push(matrix_to_rot6(&m));
            }
            root.push(translation);
        }
        MotionClip::new(1.0 / self.frame_time, skeleton, root, rotations)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::motion::{fk_positions, Skeleton};

    fn wavy_clip(frames: usize) -> MotionClip {
        let s = Skeleton::default_body();
        let j = s.len();
        let mut rots = Vec::new();
        let mut roots = Vec::new();
        for f in 0..frames {
            let t = f as f64 / 60.0;
            roots.push([0.1 * t, 0.9 + 0.05 * (3.0 * t).sin(), 0.0]);
            for k in 0..j {
                let axis = Unit::new_normalize(Vector3::new(1.0, k as f64 * 0.3, 0.5));
                let r = Rotation3::from_axis_angle(&axis, 0.4 * (t + k as f64).sin());
                rots.push(matrix_to_rot6(r.matrix()));
            }
        }
        MotionClip::new(60.0, s, roots, rots).unwrap()
    }

    #[test]
    fn euler_zxy_recomposes() {
        for (z, x, y) in [(10.0, 20.0, 30.0), (-170.0, 89.0, 45.0), (0.0, -30.0, 179.0)] {
            let m = axis_rotation(BvhChannel::Zrotation, z)
                * axis_rotation(BvhChannel::Xrotation, x)
                * axis_rotation(BvhChannel::Yrotation, y);
            let [z2, x2, y2] = matrix_to_zxy(&m);
            let m2 = axis_rotation(BvhChannel::Zrotation, z2)
                * axis_rotation(BvhChannel::Xrotation, x2)
                * axis_rotation(BvhChannel::Yrotation, y2);
            assert!((m - m2).abs().max() < 1e-9);
        }
    }

    #[test]
    fn export_parses_back() {
        let clip = wavy_clip(12);
        let text = write_bvh(&clip);
        let doc = parse_bvh(&text).unwrap();
        assert_eq!(doc.joints.len(), clip.skeleton().len());
        assert_eq!(doc.frames.len(), clip.n_frames());
        assert!((doc.frame_time - 1.0 / 60.0).abs() < 1e-8);

        // joint order differs (depth-first), but world positions agree by name
        let back = doc.to_clip().unwrap();
        let (a, b) = (fk_positions(&clip), fk_positions(&back));
        for (k, joint) in clip.skeleton().joints().iter().enumerate() {
            let kb = back.skeleton().index_of(&joint.name).unwrap();
            for f in 0..clip.n_frames() {
                for c in 0..3 {
                    assert!((a[[f, k, c]] - b[[f, kb, c]]).abs() < 1e-4, "{} frame {f}", joint.name);
                }
            }
        }
    }

    #[test]
    fn reader_rejects_garbage() {
        assert!(parse_bvh("").is_err());
        assert!(parse_bvh("HIERARCHY ROOT a { OFFSET 0 0 0 CHANNELS 7").is_err());
        assert!(parse_bvh("HIERARCHY ROOT a { OFFSET 0 0 0 CHANNELS 0 } MOTION Frames: 2 Frame Time: 0.1").is_ok());
        assert!(parse_bvh("HIERARCHY ROOT a { OFFSET 0 0 0 CHANNELS 1 Xposition } MOTION Frames: 2 Frame Time: 0.1 1").is_err());
        assert!(parse_bvh("HIERARCHY ROOT a { OFFSET 0 0 0 CHANNELS 0 End Site { OFFSET 0 0 0 JOINT b").is_err());
        let deep = format!("HIERARCHY ROOT a {}", "{ OFFSET 0 0 0 CHANNELS 0 JOINT b ".repeat(400));
        assert!(parse_bvh(&deep).is_err());
    }
}
