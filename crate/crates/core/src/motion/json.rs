//! Clip JSON.
//!
//! ```json
//! {
//!   "fps": 60,
//!   "skeleton": [{"name": "pelvis", "parent": null, "offset": [0, 0, 0]}, ...],
//!   "root_translation": [[x, y, z], ...],
//!   "joint_rotations": [[[r0, r1, r2, r3, r4, r5], ...per joint], ...per frame]
//! }
//! ```
//!
//! `parent` is a joint index. Numbers are written as shortest round-trip
//! decimals, so a save/load cycle is lossless.

use std::path::Path;

use serde_json::{json, Value};

use super::{Joint, MotionClip, MotionError, Rot6, Skeleton, Vec3};

fn schema(pointer: impl Into<String>, message: impl Into<String>) -> MotionError {
    MotionError::Schema {
        pointer: pointer.into(),
        message: message.into(),
    }
}

fn field<'a>(obj: &'a serde_json::Map<String, Value>, parent: &str, key: &str) -> Result<&'a Value, MotionError> {
    obj.get(key)
        .ok_or_else(|| schema(format!("{parent}/{key}"), "missing field"))
}

fn number(v: &Value, pointer: &str) -> Result<f64, MotionError> {
    v.as_f64()
        .filter(|x| x.is_finite())
        .ok_or_else(|| schema(pointer, "expected a finite number"))
}

fn array<'a>(v: &'a Value, pointer: &str) -> Result<&'a Vec<Value>, MotionError> {
    v.as_array().ok_or_else(|| schema(pointer, "expected an array"))
}

fn fixed<const N: usize>(v: &Value, pointer: &str) -> Result<[f64; N], MotionError> {
    let items = array(v, pointer)?;
    if items.len() != N {
        return Err(schema(pointer, format!("expected {N} numbers, found {}", items.len())));
    }
    let mut out = [0.0; N];
    for (i, (o, item)) in out.iter_mut().zip(items).enumerate() {
        *o = number(item, &format!("{pointer}/{i}"))?;
    }
    Ok(out)
}

pub fn clip_from_json(text: &str) -> Result<MotionClip, MotionError> {
    let root: Value = serde_json::from_str(text).map_err(|e| schema("", e.to_string()))?;
    let obj = root.as_object().ok_or_else(|| schema("", "expected an object"))?;

    let fps = number(field(obj, "", "fps")?, "/fps")?;
    if fps <= 0.0 {
        return Err(schema("/fps", "must be positive"));
    }

    let mut joints = Vec::new();
    for (i, j) in array(field(obj, "", "skeleton")?, "/skeleton")?.iter().enumerate() {
        let p = format!("/skeleton/{i}");
        let jo = j.as_object().ok_or_else(|| schema(&p, "expected an object"))?;
        let name = field(jo, &p, "name")?
            .as_str()
            .ok_or_else(|| schema(format!("{p}/name"), "expected a string"))?;
        let parent = match field(jo, &p, "parent")? {
            Value::Null => None,
            v => Some(
                v.as_u64()
                    .ok_or_else(|| schema(format!("{p}/parent"), "expected null or a joint index"))?
                    as usize,
            ),
        };
        let offset: Vec3 = fixed(field(jo, &p, "offset")?, &format!("{p}/offset"))?;
        joints.push(Joint {
            name: name.to_string(),
            parent,
            offset,
        });
    }
    let skeleton = Skeleton::new(joints).map_err(|e| schema("/skeleton", e.to_string()))?;
    let n_joints = skeleton.len();

    let roots = array(field(obj, "", "root_translation")?, "/root_translation")?;
    let mut root_translation = Vec::with_capacity(roots.len());
    for (f, t) in roots.iter().enumerate() {
        root_translation.push(fixed::<3>(t, &format!("/root_translation/{f}"))?);
    }

    let frames = array(field(obj, "", "joint_rotations")?, "/joint_rotations")?;
    if frames.len() != root_translation.len() {
        return Err(schema(
            "/joint_rotations",
            format!("{} frames but root_translation has {}", frames.len(), root_translation.len()),
        ));
    }
    let mut rotations = Vec::with_capacity(frames.len() * n_joints);
    for (f, frame) in frames.iter().enumerate() {
        let p = format!("/joint_rotations/{f}");
        let per_joint = array(frame, &p)?;
        if per_joint.len() != n_joints {
            return Err(schema(&p, format!("expected {n_joints} joints, found {}", per_joint.len())));
        }
        for (k, r) in per_joint.iter().enumerate() {
            let jp = format!("{p}/{k}");
            let r: Rot6 = fixed(r, &jp)?;
            if super::rot6_to_matrix(&r).is_none() {
                return Err(schema(jp, "degenerate 6D rotation"));
            }
            rotations.push(r);
        }
    }
    MotionClip::new(fps, skeleton, root_translation, rotations).map_err(|e| schema("", e.to_string()))
}

pub fn clip_to_json(clip: &MotionClip) -> String {
    let skeleton: Vec<Value> = clip
        .skeleton()
        .joints()
        .iter()
        .map(|j| json!({"name": j.name, "parent": j.parent, "offset": j.offset}))
        .collect();
    let n_joints = clip.skeleton().len();
    let rotations: Vec<Vec<&[f64]>> = clip
        .joint_rotations()
        .chunks(n_joints.max(1))
        .map(|frame| frame.iter().map(|r| r.as_slice()).collect())
        .collect();
    let value = json!({
        "fps": clip.fps(),
        "skeleton": skeleton,
        "root_translation": clip.root_translation(),
        "joint_rotations": rotations,
    });
    serde_json::to_string(&value).expect("clip serializes")
}

pub fn load_clip(path: impl AsRef<Path>) -> Result<MotionClip, MotionError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| MotionError::io(path, e))?;
    clip_from_json(&text)
}

pub fn save_clip(clip: &MotionClip, path: impl AsRef<Path>) -> Result<(), MotionError> {
    let path = path.as_ref();
    std::fs::write(path, clip_to_json(clip)).map_err(|e| MotionError::io(path, e))
}
