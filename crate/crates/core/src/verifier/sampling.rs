//! Deterministic sample sets: jittered strata over boxes and segments, and an
//! order-preserving parallel map.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::PlanePoint;

/// Axis-aligned rectangle `[x_min, x_max] × [y_min, y_max]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SampleBox {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
}

impl SampleBox {
    pub fn new(x_min: f64, x_max: f64, y_min: f64, y_max: f64) -> Result<Self> {
        let b = SampleBox {
            x_min,
            x_max,
            y_min,
            y_max,
        };
        b.validate()?;
        Ok(b)
    }

    pub fn square(half: f64) -> Self {
        SampleBox {
            x_min: -half,
            x_max: half,
            y_min: -half,
            y_max: half,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = [self.x_min, self.x_max, self.y_min, self.y_max]
            .iter()
            .all(|v| v.is_finite())
            && self.x_min < self.x_max
            && self.y_min < self.y_max;
        if ok {
            Ok(())
        } else {
            Err(Error::Config(format!(
                "box [{}, {}] x [{}, {}] must be finite and nonempty",
                self.x_min, self.x_max, self.y_min, self.y_max
            )))
        }
    }

    pub fn contains(&self, p: PlanePoint) -> bool {
        (self.x_min..=self.x_max).contains(&p.x) && (self.y_min..=self.y_max).contains(&p.y)
    }

    /// Lattice of `n × n` cell centres.
    pub fn lattice(&self, n: usize) -> impl Iterator<Item = PlanePoint> + '_ {
        let dx = (self.x_max - self.x_min) / n as f64;
        let dy = (self.y_max - self.y_min) / n as f64;
        (0..n * n).map(move |k| {
            let (i, j) = (k % n, k / n);
            PlanePoint::new(
                self.x_min + (i as f64 + 0.5) * dx,
                self.y_min + (j as f64 + 0.5) * dy,
            )
        })
    }
}

pub(crate) fn rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}

/// One jittered point per cell of a `k × k` grid, `k = ⌈√n⌉`, truncated to `n`
/// points after a seeded shuffle of the cell order so that truncation stays
/// spread over the box.
pub fn stratified(b: &SampleBox, n: usize, seed: u64, stream: u64) -> Vec<PlanePoint> {
    let k = (n as f64).sqrt().ceil().max(1.0) as usize;
    let mut r = rng(seed, stream);
    let dx = (b.x_max - b.x_min) / k as f64;
    let dy = (b.y_max - b.y_min) / k as f64;
    let mut pts: Vec<PlanePoint> = (0..k * k)
        .map(|c| {
            let (i, j) = (c % k, c / k);
            PlanePoint::new(
                b.x_min + (i as f64 + r.gen::<f64>()) * dx,
                b.y_min + (j as f64 + r.gen::<f64>()) * dy,
            )
        })
        .collect();
    if pts.len() > n {
        for i in (1..pts.len()).rev() {
            let j = r.gen_range(0..=i);
            pts.swap(i, j);
        }
        pts.truncate(n);
    }
    pts
}

/// `n` jittered parameters in `[a, b]`, one per equal sub-interval.
pub fn stratified_1d(a: f64, b: f64, n: usize, seed: u64, stream: u64) -> Vec<f64> {
    let mut r = rng(seed, stream);
    let h = (b - a) / n as f64;
    (0..n).map(|i| a + (i as f64 + r.gen::<f64>()) * h).collect()
}

/// Order-preserving map over `items`, split across the available cores.
pub fn par_map<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync,
{
    let workers = std::thread::available_parallelism()
        .map(|n| n.get())
        .unwrap_or(1)
        .min(items.len().max(1));
    if workers <= 1 {
        return items.iter().map(&f).collect();
    }
    let chunk = items.len().div_ceil(workers);
    std::thread::scope(|s| {
        let handles: Vec<_> = items
            .chunks(chunk)
            .map(|c| {
                let f = &f;
                s.spawn(move || c.iter().map(f).collect::<Vec<R>>())
            })
            .collect();
        handles
            .into_iter()
            .flat_map(|h| h.join().expect("worker panicked"))
            .collect()
    })
}
