//! Object placement on the canvas.

use rand::Rng;

use crate::attr::{Location, SpatialRange};
use crate::rng::uniform;
use crate::scene::Frame;

/// Objects are centered inside `[lo, hi]^2` so glyphs stay on the canvas.
pub const PLACEMENT_BOUNDS: (f64, f64) = (0.08, 0.92);
/// Smallest allowed distance between object centers, in canvas fractions.
pub const MIN_SEPARATION: f64 = 0.18;
pub const PLACEMENT_TRIES: usize = 100;

/// Axis-aligned sampling region `(x_min, x_max, y_min, y_max)`.
pub(crate) type Region = (f64, f64, f64, f64);

pub(crate) fn full_region() -> Region {
    let (lo, hi) = PLACEMENT_BOUNDS;
    (lo, hi, lo, hi)
}

pub(crate) fn region_of(space: Option<&SpatialRange>) -> Region {
    let (lo, hi) = PLACEMENT_BOUNDS;
    space.map_or_else(full_region, |r| r.clip(lo, hi))
}

/// `true` if `loc` keeps its distance from every object in `frame` and from
/// every reserved location.
pub(crate) fn is_free(frame: &Frame, reserved: &[Location], loc: &Location) -> bool {
    frame.min_distance(loc) >= MIN_SEPARATION && reserved.iter().all(|r| r.distance(loc) >= MIN_SEPARATION)
}

/// Uniform location in `region` that is free in `frame` and satisfies
/// `accept`; `None` after [`PLACEMENT_TRIES`] attempts.
pub(crate) fn sample_free<R: Rng + ?Sized>(
    rng: &mut R,
    frame: &Frame,
    reserved: &[Location],
    region: Region,
    accept: impl Fn(&Location) -> bool,
) -> Option<Location> {
    let (x0, x1, y0, y1) = region;
    if x0 >= x1 || y0 >= y1 {
        return None;
    }
    (0..PLACEMENT_TRIES).find_map(|_| {
        let loc = Location::new(uniform(rng, x0, x1), uniform(rng, y0, y1));
        (accept(&loc) && is_free(frame, reserved, &loc)).then_some(loc)
    })
}
