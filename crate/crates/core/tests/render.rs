use cog_core::attr::Shape;
use cog_core::batch::{generate_range, Execution};
use cog_core::catalog::Catalog;
use cog_core::generate::{EpisodeGenerator, GenerationConfig};
use cog_core::render::{box_origin, glyph, glyph_box, rasterize_frame, rgb, Image, Mask, BACKGROUND};
use cog_core::scene::{Frame, SceneObject};

/// The object's box as `(x0, y0, size)`.
fn bbox(o: &SceneObject, canvas: u32) -> (i64, i64, i64) {
    let (x0, y0) = box_origin(o.loc.x, o.loc.y, canvas);
    (x0, y0, glyph_box(canvas) as i64)
}

fn overlaps(a: (i64, i64, i64), b: (i64, i64, i64)) -> bool {
    a.0 < b.0 + b.2 && b.0 < a.0 + a.2 && a.1 < b.1 + b.2 && b.1 < a.1 + a.2
}

/// Pixels of the box that carry `o`'s color, as a mask.
fn observed(img: &Image, o: &SceneObject, canvas: u32) -> Option<Vec<bool>> {
    let (x0, y0, n) = bbox(o, canvas);
    if x0 < 0 || y0 < 0 || x0 + n > canvas as i64 || y0 + n > canvas as i64 {
        return None;
    }
    let c = rgb(o.color);
    let mut bits = Vec::with_capacity((n * n) as usize);
    for y in 0..n {
        for x in 0..n {
            bits.push(img.get((x0 + x) as u32, (y0 + y) as u32) == c);
        }
    }
    Some(bits)
}

fn bits(mask: &Mask) -> Vec<bool> {
    let n = mask.size;
    (0..n * n).map(|i| mask.get(i % n, i / n)).collect()
}

#[test]
fn isolated_objects_can_be_read_back_from_pixels() {
    let canvas = 112;
    let masks: Vec<Vec<bool>> = Shape::ALL.iter().map(|&s| bits(&glyph(s, glyph_box(canvas)))).collect();
    let g = EpisodeGenerator::new(Catalog::builtin(), GenerationConfig::hard(21)).unwrap();
    let mut checked = 0;
    for task in ["ExistColorGo", "AndCompareShape", "GetShapeSpace", "GoShapeOf"] {
        for ep in generate_range(&g, task, 0..50, Execution::default()).unwrap() {
            for frame in &ep.frames {
                let img = rasterize_frame(frame, canvas);
                for (i, o) in frame.objects.iter().enumerate() {
                    let isolated = frame
                        .objects
                        .iter()
                        .enumerate()
                        .all(|(j, p)| i == j || !overlaps(bbox(o, canvas), bbox(p, canvas)));
                    if !isolated {
                        continue;
                    }
                    let Some(seen) = observed(&img, o, canvas) else {
                        continue;
                    };
                    let matches: Vec<Shape> = Shape::ALL
                        .iter()
                        .zip(&masks)
                        .filter(|(_, m)| **m == seen)
                        .map(|(s, _)| *s)
                        .collect();
                    assert_eq!(matches, [o.shape], "{} frame {}: {o:?}", ep.id(), frame.index);
                    checked += 1;
                }
            }
        }
    }
    assert!(checked > 1000, "only {checked} isolated objects");
}

#[test]
fn covered_pixels_belong_to_the_topmost_object() {
    let canvas = 112;
    let g = EpisodeGenerator::new(Catalog::builtin(), GenerationConfig::hard(22)).unwrap();
    for ep in generate_range(&g, "ExistGo", 0..20, Execution::default()).unwrap() {
        for frame in &ep.frames {
            let img = rasterize_frame(frame, canvas);
            for y in 0..canvas {
                for x in 0..canvas {
                    let top = topmost(frame, x as i64, y as i64, canvas);
                    let want = top.map_or(BACKGROUND, |o| rgb(o.color));
                    assert_eq!(img.get(x, y), want, "{} ({x},{y})", ep.id());
                }
            }
        }
    }
}

fn topmost(frame: &Frame, x: i64, y: i64, canvas: u32) -> Option<&SceneObject> {
    frame.objects.iter().rev().find(|o| {
        let (x0, y0, n) = bbox(o, canvas);
        let (dx, dy) = (x - x0, y - y0);
        (0..n).contains(&dx) && (0..n).contains(&dy) && glyph(o.shape, n as usize).get(dx as usize, dy as usize)
    })
}
