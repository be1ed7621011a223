//! Array-backed binary sum tree over a power-of-two number of leaves.
//!
//! Node `1` is the root, node `i` has children `2i` and `2i + 1`, and the
//! leaves occupy `capacity..2 * capacity`. Parents are recomputed from both
//! children on every update, so partial sums never accumulate drift.

#[derive(Clone, Debug)]
pub struct SumTree {
    capacity: usize,
    nodes: Vec<f64>,
}

impl SumTree {
    /// `capacity` must be a power of two.
    pub fn new(capacity: usize) -> Self {
        assert!(capacity.is_power_of_two(), "sum tree capacity must be a power of two");
        SumTree { capacity, nodes: vec![0.0; 2 * capacity] }
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn total(&self) -> f64 {
        self.nodes[1]
    }

    pub fn leaf(&self, index: usize) -> f64 {
        self.nodes[self.capacity + index]
    }

    pub fn set(&mut self, index: usize, value: f64) {
        debug_assert!(value >= 0.0 && value.is_finite());
        let mut node = self.capacity + index;
        self.nodes[node] = value;
        while node > 1 {
            node /= 2;
            self.nodes[node] = self.nodes[2 * node] + self.nodes[2 * node + 1];
        }
    }

    /// Leaf whose cumulative range contains `mass`, for `0 <= mass < total`.
    /// Never returns a zero-valued leaf while the total is positive.
    pub fn find(&self, mut mass: f64) -> usize {
        let mut node = 1;
        while node < self.capacity {
            let left = 2 * node;
            let right = left + 1;
            let go_left = (mass < self.nodes[left] && self.nodes[left] > 0.0) || self.nodes[right] <= 0.0;
            if go_left {
                node = left;
            } else {
                mass -= self.nodes[left];
                node = right;
            }
        }
        node - self.capacity
    }
}
