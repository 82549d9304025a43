//! Orientation classification of a one-ulp neighbourhood, written as PPM.

use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use crate::filters::{DyadicStage, FilterOutcome, IntervalFilter, SemiStaticFilter, Stage};
use crate::fpn::Sign;
use crate::predicates::Builtin;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MapMode {
    Naive,
    SemiStatic,
    Interval,
    Exact,
}

impl MapMode {
    pub const ALL: [MapMode; 4] = [
        MapMode::Naive,
        MapMode::SemiStatic,
        MapMode::Interval,
        MapMode::Exact,
    ];

    pub fn name(self) -> &'static str {
        match self {
            MapMode::Naive => "naive",
            MapMode::SemiStatic => "semistatic",
            MapMode::Interval => "interval",
            MapMode::Exact => "exact",
        }
    }
}

impl FromStr for MapMode {
    type Err = String;

    fn from_str(s: &str) -> Result<MapMode, String> {
        MapMode::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| format!("unknown mode `{s}` (expected naive, semistatic, interval or exact)"))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PrecisionMapSpec {
    pub a: [f64; 2],
    pub b: [f64; 2],
    pub center: [f64; 2],
    pub width: usize,
    pub height: usize,
    pub mode: MapMode,
}

impl Default for PrecisionMapSpec {
    fn default() -> PrecisionMapSpec {
        PrecisionMapSpec {
            a: [20.1, 20.1],
            b: [18.9, 18.9],
            center: [3.5, 3.5],
            width: 1350,
            height: 675,
            mode: MapMode::Exact,
        }
    }
}

/// Per-pixel outcome of `orient2d(a, b, c)`, row-major from the top-left.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PrecisionMap {
    pub width: usize,
    pub height: usize,
    pub pixels: Vec<FilterOutcome>,
}

/// `x` moved by `steps` adjacent floats.
fn step_ulps(x: f64, steps: i64) -> f64 {
    let mut v = x;
    for _ in 0..steps.unsigned_abs() {
        v = if steps > 0 { v.next_up() } else { v.next_down() };
    }
    v
}

/// Pixel `(i, j)` is the center moved `i - width/2` floats right and
/// `height/2 - j` floats up, so `(width/2, height/2)` is the center itself.
pub fn render(spec: &PrecisionMapSpec) -> PrecisionMap {
    assert!(spec.width >= 1 && spec.height >= 1, "empty image");
    let e = Builtin::Orient2d.expr();
    let classify: Box<dyn Fn(&[f64]) -> FilterOutcome> = match spec.mode {
        MapMode::Naive => Box::new(move |x| match Sign::of_f64(e.eval_naive(x)) {
            Some(s) => FilterOutcome::Certain(s),
            None => FilterOutcome::Uncertain,
        }),
        MapMode::SemiStatic => {
            let f = SemiStaticFilter::new(&e, true).expect("orient2d derives");
            Box::new(move |x| f.apply(x))
        }
        MapMode::Interval => {
            let f = IntervalFilter::new(&e);
            Box::new(move |x| f.apply(x))
        }
        MapMode::Exact => {
            let f = DyadicStage::new(&e);
            Box::new(move |x| f.apply(x))
        }
    };
    let half_w = (spec.width / 2) as i64;
    let half_h = (spec.height / 2) as i64;
    let mut xs = Vec::with_capacity(spec.width);
    let mut x = step_ulps(spec.center[0], -half_w);
    for _ in 0..spec.width {
        xs.push(x);
        x = x.next_up();
    }
    let mut pixels = Vec::with_capacity(spec.width * spec.height);
    let mut y = step_ulps(spec.center[1], half_h);
    for _ in 0..spec.height {
        for &x in &xs {
            pixels.push(classify(&[spec.a[0], spec.a[1], spec.b[0], spec.b[1], x, y]));
        }
        y = y.next_down();
    }
    PrecisionMap {
        width: spec.width,
        height: spec.height,
        pixels,
    }
}

/// Red for +1, green for 0, blue for -1, yellow for uncertain.
pub fn color(o: FilterOutcome) -> [u8; 3] {
    match o {
        FilterOutcome::Certain(Sign::Positive) => [255, 0, 0],
        FilterOutcome::Certain(Sign::Zero) => [0, 255, 0],
        FilterOutcome::Certain(Sign::Negative) => [0, 0, 255],
        FilterOutcome::Uncertain => [255, 255, 0],
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct MapCounts {
    pub positive: usize,
    pub zero: usize,
    pub negative: usize,
    pub uncertain: usize,
}

impl PrecisionMap {
    pub fn at(&self, i: usize, j: usize) -> FilterOutcome {
        self.pixels[j * self.width + i]
    }

    pub fn counts(&self) -> MapCounts {
        let mut c = MapCounts::default();
        for p in &self.pixels {
            match p {
                FilterOutcome::Certain(Sign::Positive) => c.positive += 1,
                FilterOutcome::Certain(Sign::Zero) => c.zero += 1,
                FilterOutcome::Certain(Sign::Negative) => c.negative += 1,
                FilterOutcome::Uncertain => c.uncertain += 1,
            }
        }
        c
    }

    /// Certain pixels whose sign differs from `reference`.
    pub fn wrong_pixels(&self, reference: &PrecisionMap) -> usize {
        assert_eq!(self.pixels.len(), reference.pixels.len(), "sizes differ");
        self.pixels
            .iter()
            .zip(&reference.pixels)
            .filter(|(p, r)| p.is_certain() && p != r)
            .count()
    }

    /// Binary PPM, maxval 255.
    pub fn to_ppm(&self) -> Vec<u8> {
        let mut out = format!("P6\n{} {}\n255\n", self.width, self.height).into_bytes();
        out.reserve(3 * self.pixels.len());
        for &p in &self.pixels {
            out.extend_from_slice(&color(p));
        }
        out
    }

    pub fn write_ppm(&self, path: &Path) -> std::io::Result<()> {
        let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
        f.write_all(&self.to_ppm())?;
        f.flush()
    }
}
