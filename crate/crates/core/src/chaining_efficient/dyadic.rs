/// The depth-`m` cube containing a point, one cell index per axis.
///
/// Cells are half-open `[k 2^-m, (k+1) 2^-m)` except the last, which is
/// closed, so `x = 1/2` belongs to the upper half.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct DyadicIndex {
    depth: u32,
    cells: Vec<u64>,
}

fn axis_cell(x: f64, depth: u32) -> u64 {
    let n = 1u64 << depth;
    let c = (x.clamp(0.0, 1.0) * n as f64).floor() as u64;
    c.min(n - 1)
}

impl DyadicIndex {
    pub fn of(x: &[f64], depth: u32) -> Self {
        Self { depth, cells: x.iter().map(|&v| axis_cell(v, depth)).collect() }
    }

    pub fn from_flat(flat: u64, depth: u32, dimension: usize) -> Self {
        let mask = (1u64 << depth) - 1;
        let cells = (0..dimension).map(|i| (flat >> (depth as usize * i)) & mask).collect();
        Self { depth, cells }
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    pub fn cells(&self) -> &[u64] {
        &self.cells
    }

    /// `sum_i cell_i 2^(depth * i)`.
    pub fn flat(&self) -> u64 {
        self.cells
            .iter()
            .enumerate()
            .fold(0, |acc, (i, &c)| acc | (c << (self.depth as usize * i)))
    }

    pub fn parent(&self) -> Self {
        Self { depth: self.depth - 1, cells: self.cells.iter().map(|c| c >> 1).collect() }
    }

    /// Which of the `2^d` children of the parent this cube is.
    pub fn sigma(&self) -> usize {
        self.cells.iter().enumerate().map(|(i, c)| ((c & 1) as usize) << i).sum()
    }

    pub fn center(&self) -> Vec<f64> {
        let w = 0.5f64.powi(self.depth as i32);
        self.cells.iter().map(|&c| (c as f64 + 0.5) * w).collect()
    }
}

/// Coefficients `c_m(cube) ∈ {-1, 0, 1}` of
/// `f_M(x) = 1/2 + sum_m 2^-m c_m(cube of x at depth m)`.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveletCoefficients {
    dimension: usize,
    depth: u32,
    /// `levels[m - 1][flat cube index at depth m]`.
    levels: Vec<Vec<i8>>,
}

const FIT_ORDER: [i8; 3] = [0, -1, 1];

impl WaveletCoefficients {
    pub fn zeros(dimension: usize, depth: u32) -> Self {
        let levels = (1..=depth).map(|m| vec![0; 1usize << (dimension * m as usize)]).collect();
        Self { dimension, depth, levels }
    }

    /// Greedy fit at cube centers, coarse to fine.
    pub fn fit(f: impl Fn(&[f64]) -> f64, dimension: usize, depth: u32) -> Self {
        let mut out = Self::zeros(dimension, depth);
        let mut prev = vec![0.5];
        for m in 1..=depth {
            let scale = 0.5f64.powi(m as i32);
            let count = 1usize << (dimension * m as usize);
            let mut next = vec![0.0; count];
            for flat in 0..count {
                let cube = DyadicIndex::from_flat(flat as u64, m, dimension);
                let base = prev[cube.parent().flat() as usize];
                let target = f(&cube.center());
                let mut best = (0i8, f64::INFINITY);
                for &c in &FIT_ORDER {
                    let err = (base + c as f64 * scale - target).abs();
                    if err < best.1 {
                        best = (c, err);
                    }
                }
                out.levels[m as usize - 1][flat] = best.0;
                next[flat] = base + best.0 as f64 * scale;
            }
            prev = next;
        }
        out
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    pub fn get(&self, m: u32, flat: u64) -> i8 {
        self.levels[m as usize - 1][flat as usize]
    }

    pub fn set(&mut self, m: u32, flat: u64, c: i8) {
        assert!((-1..=1).contains(&c), "coefficient must be -1, 0 or 1");
        self.levels[m as usize - 1][flat as usize] = c;
    }

    /// Coefficients met along the dyadic path of `x`, depth 1 first.
    pub fn path(&self, x: &[f64]) -> Vec<i8> {
        (1..=self.depth).map(|m| self.get(m, DyadicIndex::of(x, m).flat())).collect()
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.path(x)
            .iter()
            .enumerate()
            .map(|(j, &c)| c as f64 * 0.5f64.powi(j as i32 + 1))
            .sum::<f64>()
            + 0.5
    }
}
