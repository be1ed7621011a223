use super::NetError;

/// Evenly spaced return atoms `z_i = v_min + i * (v_max - v_min) / (n - 1)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Support {
    v_min: f64,
    v_max: f64,
    atoms: Vec<f64>,
    delta: f64,
}

impl Support {
    pub fn new(v_min: f64, v_max: f64, n_atoms: usize) -> Result<Self, NetError> {
        if !(v_min < v_max) || !v_min.is_finite() || !v_max.is_finite() {
            return Err(NetError::InvalidSupport(format!("need v_min < v_max, got [{v_min}, {v_max}]")));
        }
        if n_atoms < 2 {
            return Err(NetError::InvalidSupport(format!("need at least 2 atoms, got {n_atoms}")));
        }
        let span = v_max - v_min;
        let last = (n_atoms - 1) as f64;
        let delta = span / last;
        let atoms = (0..n_atoms).map(|i| v_min + span * i as f64 / last).collect();
        Ok(Support { v_min, v_max, atoms, delta })
    }

    pub fn v_min(&self) -> f64 {
        self.v_min
    }

    pub fn v_max(&self) -> f64 {
        self.v_max
    }

    pub fn atoms(&self) -> &[f64] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// Expected value of a distribution over the atoms.
    pub fn expectation(&self, probs: &[f64]) -> f64 {
        self.atoms.iter().zip(probs).map(|(z, p)| z * p).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_support() {
        let s = Support::new(-4.0, 4.0, 41).unwrap();
        assert_eq!(s.atoms()[0], -4.0);
        assert_eq!(s.atoms()[20], 0.0);
        assert_eq!(s.atoms()[40], 4.0);
        assert!((s.delta() - 0.2).abs() < 1e-15);
        assert!(s.atoms().windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn invalid_supports() {
        assert!(Support::new(4.0, -4.0, 41).is_err());
        assert!(Support::new(0.0, 0.0, 41).is_err());
        assert!(Support::new(-1.0, 1.0, 1).is_err());
    }

    #[test]
    fn expectations() {
        let s = Support::new(-4.0, 4.0, 41).unwrap();
        let uniform = vec![1.0 / 41.0; 41];
        assert!(s.expectation(&uniform).abs() < 1e-12);
        let mut top = vec![0.0; 41];
        top[40] = 1.0;
        assert_eq!(s.expectation(&top), 4.0);
        let mut split = vec![0.0; 41];
        split[0] = 0.5;
        split[40] = 0.5;
        assert_eq!(s.expectation(&split), 0.0);
    }
}
