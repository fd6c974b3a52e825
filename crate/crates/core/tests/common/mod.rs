#![allow(dead_code)]

use std::collections::BTreeMap;
use std::path::PathBuf;

use agreeset::ingest::{DroppedCounts, ImageInfo};
use agreeset::{
    AgreementCluster, BoundingBox, ClusterId, Detection, DetectionId, GroundTruthObject, GtId,
    RawDataset, Signature,
};
use rand::Rng;

pub fn desk_folder() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data/desk")
}

pub fn model_names(n: usize) -> Vec<String> {
    (0..n)
        .map(|i| format!("m{}", (b'A' + i as u8) as char))
        .collect()
}

fn integer_box<R: Rng>(rng: &mut R, cx: i32, cy: i32, spread: i32) -> BoundingBox {
    let w = rng.gen_range(4..16);
    let h = rng.gen_range(4..16);
    let x = cx + rng.gen_range(-spread..=spread);
    let y = cy + rng.gen_range(-spread..=spread);
    BoundingBox::new(x as f64, y as f64, w as f64, h as f64).unwrap()
}

/// Random single-class dataset with integer boxes scattered around a few
/// object centres per image, so cross-model overlaps (and exact IOU ties)
/// are common. Confidences are multiples of 0.05.
pub fn random_dataset<R: Rng>(
    rng: &mut R,
    n_models: usize,
    n_detections: usize,
    n_images: usize,
) -> RawDataset {
    let models = model_names(n_models);
    let images: BTreeMap<String, ImageInfo> = (0..n_images)
        .map(|i| {
            (
                format!("img{i}"),
                ImageInfo {
                    file: format!("img{i}.png"),
                    width: 64,
                    height: 64,
                },
            )
        })
        .collect();
    let centres: Vec<Vec<(i32, i32)>> = (0..n_images)
        .map(|_| {
            (0..rng.gen_range(1..4))
                .map(|_| (rng.gen_range(0..40), rng.gen_range(0..40)))
                .collect()
        })
        .collect();

    let mut detections = Vec::with_capacity(n_detections);
    for i in 0..n_detections {
        let img = rng.gen_range(0..n_images);
        let &(cx, cy) = &centres[img][rng.gen_range(0..centres[img].len())];
        detections.push(Detection {
            detection_id: DetectionId(i as u32),
            model_id: models[rng.gen_range(0..n_models)].clone(),
            image_id: format!("img{img}"),
            bbox: integer_box(rng, cx, cy, 3),
            class_label: "obj".into(),
            confidence: rng.gen_range(0..=20) as f64 / 20.0,
        });
    }
    let mut ground_truth = Vec::new();
    for (img, cs) in centres.iter().enumerate() {
        for &(cx, cy) in cs {
            if rng.gen_bool(0.8) {
                ground_truth.push(GroundTruthObject {
                    gt_id: GtId(ground_truth.len() as u32),
                    image_id: format!("img{img}"),
                    bbox: integer_box(rng, cx, cy, 2),
                    class_label: "obj".into(),
                });
            }
        }
    }
    RawDataset {
        object_class: "obj".into(),
        models,
        images,
        detections,
        ground_truth,
        dropped: DroppedCounts::default(),
    }
}

/// IOU by coordinate compression: split the plane at every box edge and
/// add up the cells covered by both boxes and by either.
pub fn oracle_iou(a: &BoundingBox, b: &BoundingBox) -> f64 {
    let mut xs = [a.x, a.x + a.w, b.x, b.x + b.w];
    let mut ys = [a.y, a.y + a.h, b.y, b.y + b.h];
    xs.sort_by(f64::total_cmp);
    ys.sort_by(f64::total_cmp);
    let inside = |r: &BoundingBox, px: f64, py: f64| {
        px > r.x && px < r.x + r.w && py > r.y && py < r.y + r.h
    };
    let (mut both, mut either) = (0.0, 0.0);
    for i in 0..3 {
        for j in 0..3 {
            let cell = (xs[i + 1] - xs[i]) * (ys[j + 1] - ys[j]);
            if cell <= 0.0 {
                continue;
            }
            let (px, py) = ((xs[i] + xs[i + 1]) / 2.0, (ys[j] + ys[j + 1]) / 2.0);
            let (ia, ib) = (inside(a, px, py), inside(b, px, py));
            if ia && ib {
                both += cell;
            }
            if ia || ib {
                either += cell;
            }
        }
    }
    if either == 0.0 {
        0.0
    } else {
        both / either
    }
}

/// Reference clustering: enumerate every surviving cross-model pair, sort,
/// and merge explicit member lists under the one-detection-per-model rule.
pub fn naive_clusters(
    models: &[String],
    surviving: &[&Detection],
    set_iou: f64,
) -> Vec<AgreementCluster> {
    let midx = |d: &Detection| models.iter().position(|m| *m == d.model_id).unwrap();
    let mut pairs = Vec::new();
    for i in 0..surviving.len() {
        for j in 0..surviving.len() {
            let (x, y) = (surviving[i], surviving[j]);
            if x.image_id != y.image_id || x.model_id == y.model_id {
                continue;
            }
            if (midx(x), x.detection_id) >= (midx(y), y.detection_id) {
                continue;
            }
            let v = oracle_iou(&x.bbox, &y.bbox);
            if v >= set_iou {
                pairs.push((v, midx(x), x.detection_id, midx(y), y.detection_id, i, j));
            }
        }
    }
    pairs.sort_by(|p, q| {
        q.0.total_cmp(&p.0)
            .then(p.1.cmp(&q.1))
            .then(p.2.cmp(&q.2))
            .then(p.3.cmp(&q.3))
            .then(p.4.cmp(&q.4))
    });

    let mut owner: Vec<usize> = (0..surviving.len()).collect();
    let mut members: Vec<Vec<usize>> = (0..surviving.len()).map(|i| vec![i]).collect();
    for (_, _, _, _, _, i, j) in pairs {
        let (ci, cj) = (owner[i], owner[j]);
        if ci == cj {
            continue;
        }
        let clash = members[ci].iter().any(|&p| {
            members[cj]
                .iter()
                .any(|&q| surviving[p].model_id == surviving[q].model_id)
        });
        if clash {
            continue;
        }
        let moved = std::mem::take(&mut members[cj]);
        for &k in &moved {
            owner[k] = ci;
        }
        members[ci].extend(moved);
    }

    let mut groups: Vec<Vec<usize>> = members.into_iter().filter(|m| !m.is_empty()).collect();
    for g in &mut groups {
        g.sort_by_key(|&k| (midx(surviving[k]), surviving[k].detection_id));
    }
    groups.sort_by_key(|g| g.iter().map(|&k| surviving[k].detection_id).min().unwrap());
    groups
        .into_iter()
        .enumerate()
        .map(|(n, g)| {
            let present: Vec<&str> = g.iter().map(|&k| surviving[k].model_id.as_str()).collect();
            AgreementCluster {
                cluster_id: ClusterId(n as u32),
                image_id: surviving[g[0]].image_id.clone(),
                members: g.iter().map(|&k| surviving[k].detection_id).collect(),
                signature: Signature::new(&present, models),
            }
        })
        .collect()
}

/// Every surviving detection in exactly one cluster, no model twice, one
/// image per cluster. Returns a description of the first violation.
pub fn check_partition(
    surviving: &[&Detection],
    clusters: &[AgreementCluster],
) -> Result<(), String> {
    let by_id: BTreeMap<DetectionId, &Detection> =
        surviving.iter().map(|d| (d.detection_id, *d)).collect();
    let mut seen = BTreeMap::new();
    for c in clusters {
        if c.members.is_empty() {
            return Err(format!("{} empty", c.cluster_id));
        }
        let mut models = Vec::new();
        for id in &c.members {
            let Some(d) = by_id.get(id) else {
                return Err(format!("{} holds non-surviving {id}", c.cluster_id));
            };
            if seen.insert(*id, c.cluster_id).is_some() {
                return Err(format!("{id} in two clusters"));
            }
            if d.image_id != c.image_id {
                return Err(format!("{} spans images", c.cluster_id));
            }
            models.push(d.model_id.as_str());
        }
        let n = models.len();
        models.sort();
        models.dedup();
        if models.len() != n {
            return Err(format!("{} has two detections of one model", c.cluster_id));
        }
    }
    if seen.len() != surviving.len() {
        return Err(format!(
            "{} of {} detections clustered",
            seen.len(),
            surviving.len()
        ));
    }
    Ok(())
}
