//! Browser demo: three small computations exported through wasm-bindgen
//! for `www/index.html`. Everything here also runs natively.

use wasm_bindgen::prelude::*;

use fraclab::barriers::{make_barrier, BarrierTag, DEFAULT_SPHERE_POINT};
use fraclab::extension::{default_ygrid, solve_extension, TopBoundary};
use fraclab::spectral::heat_kernel;
use fraclab::{FractionalParams, ScalarField, TorusGrid};

/// Row-major samples with `height` rows of `width` values, row 0 at `y = 0`.
/// Points outside the plotted region hold NaN.
#[wasm_bindgen]
#[derive(Debug, Clone)]
pub struct Heatmap {
    width: usize,
    height: usize,
    y_max: f64,
    values: Vec<f64>,
}

#[wasm_bindgen]
impl Heatmap {
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    /// Height of the top row.
    pub fn y_max(&self) -> f64 {
        self.y_max
    }

    pub fn values(&self) -> Vec<f64> {
        self.values.clone()
    }
}

fn params(s: f64) -> Result<FractionalParams, String> {
    FractionalParams::new(s, 1).map_err(|e| e.to_string())
}

/// `h(t, x)` for `|x| ≤ 8` as interleaved `x, h` pairs.
#[wasm_bindgen]
pub fn heat_kernel_curve(s: f64, t: f64) -> Result<Vec<f64>, String> {
    let p = params(s)?;
    let grid = TorusGrid::new(1, 1 << 14, 64.0).map_err(|e| e.to_string())?;
    let h = heat_kernel(&p, &grid, t).map_err(|e| e.to_string())?;
    Ok((0..grid.n()).filter(|&i| grid.coord(i).abs() <= 8.0).flat_map(|i| [grid.coord(i), h.values()[i]]).collect())
}

/// The extension of `cos(k x)` on a 64-point torus over `rows` graded
/// levels, resampled to uniform heights up to `Y = 2π / k`.
#[wasm_bindgen]
pub fn extension_heatmap(s: f64, k: u32, rows: usize) -> Result<Heatmap, String> {
    if !(1..=31).contains(&k) || !(8..=512).contains(&rows) {
        return Err("need 1 <= k <= 31 and 8 <= rows <= 512".into());
    }
    let p = params(s)?;
    let grid = TorusGrid::periodic_1d(64).map_err(|e| e.to_string())?;
    let kf = k as f64;
    let f = ScalarField::from_fn(grid, |x| (kf * x[0]).cos());
    let ygrid = default_ygrid(&grid, &p, 4 * rows, TopBoundary::ModeDecay).map_err(|e| e.to_string())?;
    let sol = solve_extension(&f, &p, &ygrid, TopBoundary::ModeDecay).map_err(|e| e.to_string())?;
    let nodes = ygrid.nodes();
    let y_max = std::f64::consts::TAU / kf;
    let mut values = Vec::with_capacity(rows * grid.n());
    for r in 0..rows {
        let y = y_max * r as f64 / (rows - 1) as f64;
        // Linear interpolation between the bracketing graded levels.
        let j = nodes.partition_point(|&v| v <= y).clamp(1, nodes.len() - 1);
        let w = (y - nodes[j - 1]) / (nodes[j] - nodes[j - 1]);
        let (lo, hi) = (sol.field.level(j - 1), sol.field.level(j));
        values.extend(lo.iter().zip(hi).map(|(a, b)| a + w * (b - a)));
    }
    Ok(Heatmap { width: grid.n(), height: rows, y_max, values })
}

/// `div(y^a ∇B)` of a barrier on `[-1, 1] × (0, 1]` with `res` columns;
/// the map is negative wherever the barrier is a supersolution.
#[wasm_bindgen]
pub fn barrier_operator_map(tag: &str, s: f64, alpha: f64, res: usize) -> Result<Heatmap, String> {
    if !(8..=256).contains(&res) {
        return Err("need 8 <= res <= 256".into());
    }
    let p = params(s)?;
    let tag: BarrierTag = tag.parse().map_err(|e: fraclab::Error| e.to_string())?;
    let center = match tag {
        BarrierTag::SphereBoundary => DEFAULT_SPHERE_POINT,
        _ => [0.0; 3],
    };
    let spec = make_barrier(tag, &p, alpha, center, 1.0 / 16.0).map_err(|e| e.to_string())?;
    let height = res / 2;
    let mut values = Vec::with_capacity(res * height);
    for r in 0..height {
        let y = (r as f64 + 0.5) / height as f64;
        for c in 0..res {
            let x = -1.0 + 2.0 * (c as f64 + 0.5) / res as f64;
            let pt = [x, 0.0, y];
            values.push(if spec.in_region(pt) { spec.operator(pt) } else { f64::NAN });
        }
    }
    Ok(Heatmap { width: res, height, y_max: 1.0, values })
}
