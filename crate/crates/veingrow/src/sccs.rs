//! Reference dataflow of the surroundings cross-correlation sensitive
//! module: four one-pixel translations of the feature map, per-pixel
//! normalized direction sensitivities, weighting, and concatenation after
//! the untouched original feature.
//!
//! The sensitivity predictor is an injected linear map, not a learned
//! module, which keeps the dataflow training-free and testable.

use std::io::{self, BufRead, Write};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SccsError {
    #[error("shape mismatch: {0}")]
    ShapeError(String),
    #[error("invalid feature grid: {0}")]
    InvalidGrid(&'static str),
    #[error("malformed grid file: {0}")]
    Parse(String),
}

/// An H x W x C feature map, row-major with channels innermost.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureGrid {
    height: usize,
    width: usize,
    channels: usize,
    values: Vec<f64>,
}

impl FeatureGrid {
    pub fn zeros(height: usize, width: usize, channels: usize) -> Result<Self, SccsError> {
        if height == 0 || width == 0 || channels == 0 {
            return Err(SccsError::InvalidGrid("all dimensions must be at least 1"));
        }
        Ok(FeatureGrid {
            height,
            width,
            channels,
            values: vec![0.0; height * width * channels],
        })
    }

    pub fn from_values(
        height: usize,
        width: usize,
        channels: usize,
        values: Vec<f64>,
    ) -> Result<Self, SccsError> {
        let mut grid = Self::zeros(height, width, channels)?;
        if values.len() != grid.values.len() {
            return Err(SccsError::ShapeError(format!(
                "expected {} values, got {}",
                grid.values.len(),
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(SccsError::InvalidGrid("non-finite value"));
        }
        grid.values = values;
        Ok(grid)
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    fn idx(&self, x: usize, y: usize, c: usize) -> usize {
        (y * self.width + x) * self.channels + c
    }

    pub fn get(&self, x: usize, y: usize, c: usize) -> f64 {
        self.values[self.idx(x, y, c)]
    }

    pub fn set(&mut self, x: usize, y: usize, c: usize, v: f64) {
        let i = self.idx(x, y, c);
        self.values[i] = v;
    }
}

/// Translation direction of the feature contents; the vacated border fills
/// with zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Left,
    Top,
    Right,
    Bottom,
}

pub const DIRECTIONS: [Direction; 4] =
    [Direction::Left, Direction::Top, Direction::Right, Direction::Bottom];

/// Shift the contents one pixel: `Right` moves the value at (x, y) to
/// (x+1, y), dropping whatever crosses the border.
pub fn translate(f: &FeatureGrid, direction: Direction) -> FeatureGrid {
    let (dx, dy): (isize, isize) = match direction {
        Direction::Left => (-1, 0),
        Direction::Top => (0, -1),
        Direction::Right => (1, 0),
        Direction::Bottom => (0, 1),
    };
    let mut out = FeatureGrid::zeros(f.height, f.width, f.channels).unwrap();
    for y in 0..f.height {
        let sy = y as isize - dy;
        if sy < 0 || sy >= f.height as isize {
            continue;
        }
        for x in 0..f.width {
            let sx = x as isize - dx;
            if sx < 0 || sx >= f.width as isize {
                continue;
            }
            for c in 0..f.channels {
                out.set(x, y, c, f.get(sx as usize, sy as usize, c));
            }
        }
    }
    out
}

/// The four raw direction-sensitivity maps and their per-pixel normalized
/// competition. Normalized maps are nonnegative and sum to 1 at every pixel.
#[derive(Debug, Clone, PartialEq)]
pub struct SensitivityStack {
    height: usize,
    width: usize,
    raw: [Vec<f64>; 4],
    normalized: [Vec<f64>; 4],
}

impl SensitivityStack {
    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn raw(&self, i: usize) -> &[f64] {
        &self.raw[i]
    }

    pub fn normalized(&self, i: usize) -> &[f64] {
        &self.normalized[i]
    }
}

/// Normalize the four logit maps into per-pixel direction weights:
/// `A'_i = exp(A_i) / sum_j exp(A_j)`, computed with max subtraction so
/// large logits cannot overflow.
pub fn normalize_sensitivity(
    height: usize,
    width: usize,
    raw: [Vec<f64>; 4],
) -> Result<SensitivityStack, SccsError> {
    let len = height * width;
    if raw.iter().any(|m| m.len() != len) {
        return Err(SccsError::ShapeError(format!(
            "sensitivity maps must have {len} entries"
        )));
    }
    let mut normalized = [
        vec![0.0; len],
        vec![0.0; len],
        vec![0.0; len],
        vec![0.0; len],
    ];
    for p in 0..len {
        let m = raw.iter().map(|m| m[p]).fold(f64::NEG_INFINITY, f64::max);
        let exps: [f64; 4] = std::array::from_fn(|i| (raw[i][p] - m).exp());
        let sum: f64 = exps.iter().sum();
        for i in 0..4 {
            normalized[i][p] = exps[i] / sum;
        }
    }
    Ok(SensitivityStack {
        height,
        width,
        raw,
        normalized,
    })
}

/// A fixed linear map from the C input channels to the four direction
/// logits.
#[derive(Debug, Clone, PartialEq)]
pub struct SensitivityPredictor {
    weights: [Vec<f64>; 4],
}

impl SensitivityPredictor {
    pub fn new(weights: [Vec<f64>; 4]) -> Self {
        SensitivityPredictor { weights }
    }

    pub fn predict(&self, f: &FeatureGrid) -> Result<[Vec<f64>; 4], SccsError> {
        if self.weights.iter().any(|w| w.len() != f.channels) {
            return Err(SccsError::ShapeError(format!(
                "predictor expects weight rows of length {}",
                f.channels
            )));
        }
        let len = f.height * f.width;
        let mut maps = [
            vec![0.0; len],
            vec![0.0; len],
            vec![0.0; len],
            vec![0.0; len],
        ];
        for y in 0..f.height {
            for x in 0..f.width {
                let p = y * f.width + x;
                for i in 0..4 {
                    let mut acc = 0.0;
                    for c in 0..f.channels {
                        acc += self.weights[i][c] * f.get(x, y, c);
                    }
                    maps[i][p] = acc;
                }
            }
        }
        Ok(maps)
    }
}

/// Apply frozen direction weights: output channels are
/// `[f, A'_1 * T_left, A'_2 * T_top, A'_3 * T_right, A'_4 * T_bottom]`,
/// so the untouched original feature always leads.
pub fn apply_sensitivity(
    f: &FeatureGrid,
    stack: &SensitivityStack,
) -> Result<FeatureGrid, SccsError> {
    if stack.height != f.height || stack.width != f.width {
        return Err(SccsError::ShapeError(
            "sensitivity stack does not match feature grid".into(),
        ));
    }
    let c = f.channels;
    let mut out = FeatureGrid::zeros(f.height, f.width, 5 * c)?;
    for y in 0..f.height {
        for x in 0..f.width {
            for ch in 0..c {
                out.set(x, y, ch, f.get(x, y, ch));
            }
        }
    }
    for (i, dir) in DIRECTIONS.iter().enumerate() {
        let shifted = translate(f, *dir);
        for y in 0..f.height {
            for x in 0..f.width {
                let w = stack.normalized[i][y * f.width + x];
                for ch in 0..c {
                    out.set(x, y, (i + 1) * c + ch, w * shifted.get(x, y, ch));
                }
            }
        }
    }
    Ok(out)
}

/// The full dataflow: predict direction logits, normalize them, and weight
/// the four translations. Output is H x W x 5C.
pub fn sccs_forward(
    f: &FeatureGrid,
    predictor: &SensitivityPredictor,
) -> Result<FeatureGrid, SccsError> {
    let raw = predictor.predict(f)?;
    let stack = normalize_sensitivity(f.height, f.width, raw)?;
    apply_sensitivity(f, &stack)
}

/// Write a grid as CSV: a `H,W,C` header line, then one line per pixel in
/// row-major order with its C values at nine significant digits.
pub fn write_grid_csv<W: Write>(f: &FeatureGrid, out: &mut W) -> io::Result<()> {
    writeln!(out, "{},{},{}", f.height, f.width, f.channels)?;
    for y in 0..f.height {
        for x in 0..f.width {
            let line = (0..f.channels)
                .map(|c| format!("{:.9e}", f.get(x, y, c)))
                .collect::<Vec<_>>()
                .join(",");
            writeln!(out, "{line}")?;
        }
    }
    Ok(())
}

pub fn read_grid_csv<R: BufRead>(input: R) -> Result<FeatureGrid, SccsError> {
    let mut lines = input.lines();
    let header = lines
        .next()
        .ok_or_else(|| SccsError::Parse("empty file".into()))?
        .map_err(|e| SccsError::Parse(e.to_string()))?;
    let dims: Vec<usize> = header
        .split(',')
        .map(|s| s.trim().parse())
        .collect::<Result<_, _>>()
        .map_err(|e| SccsError::Parse(format!("bad header: {e}")))?;
    let [height, width, channels] = dims[..] else {
        return Err(SccsError::Parse("header must be H,W,C".into()));
    };
    let mut values = Vec::with_capacity(height * width * channels);
    for line in lines {
        let line = line.map_err(|e| SccsError::Parse(e.to_string()))?;
        if line.trim().is_empty() {
            continue;
        }
        for field in line.split(',') {
            values.push(
                field
                    .trim()
                    .parse::<f64>()
                    .map_err(|e| SccsError::Parse(format!("bad value {field:?}: {e}")))?,
            );
        }
    }
    FeatureGrid::from_values(height, width, channels, values)
}
