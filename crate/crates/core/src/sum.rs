//! Compensated summation.

/// Neumaier running sum. The result does not depend on the magnitude ordering
/// of the terms beyond rounding of the final value.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn merge(&mut self, other: &CompensatedSum) {
        self.add(other.sum);
        self.add(other.carry);
    }

    pub fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

impl core::iter::FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = CompensatedSum::new();
        for x in iter {
            acc.add(x);
        }
        acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_small_terms_next_to_large_ones() {
        let terms = [1.0, 1e100, 1.0, -1e100];
        let acc: CompensatedSum = terms.iter().copied().collect();
        assert_eq!(acc.value(), 2.0);
    }

    #[test]
    fn merge_is_order_insensitive() {
        let xs: alloc::vec::Vec<f64> = (0..1000).map(|i| 1.0 / (1.0 + i as f64)).collect();
        let whole: CompensatedSum = xs.iter().copied().collect();
        let mut left: CompensatedSum = xs[..400].iter().copied().collect();
        let right: CompensatedSum = xs[400..].iter().copied().collect();
        let mut rev = right;
        rev.merge(&left);
        left.merge(&right);
        assert!((left.value() - whole.value()).abs() < 1e-14);
        assert!((rev.value() - whole.value()).abs() < 1e-14);
    }
}
