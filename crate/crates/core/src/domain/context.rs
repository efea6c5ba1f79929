/// A point of the context space `[0,1]^d` under the sup norm.
#[derive(Debug, Clone, PartialEq)]
pub struct Context(pub Vec<f64>);

impl Context {
    pub fn new(coords: Vec<f64>) -> Self {
        Self(coords)
    }

    pub fn dimension(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn dist(&self, other: &Context) -> f64 {
        sup_dist(&self.0, &other.0)
    }
}

pub(crate) fn sup_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}
