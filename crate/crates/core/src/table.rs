//! Dense log-domain tables over sorted variable scopes.
//!
//! Tables are stored row-major over the scope with the last variable varying
//! fastest, the same layout used by the model file format.

/// `log(sum(exp(values)))`, returning `-inf` for an empty or all-`-inf` slice.
pub fn log_sum_exp(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    if max == f64::INFINITY {
        return f64::INFINITY;
    }
    max + values.iter().map(|v| (v - max).exp()).sum::<f64>().ln()
}

/// Shifts `values` so that `exp(values)` sums to one; returns the removed log normalizer.
pub fn log_normalize(values: &mut [f64]) -> f64 {
    let z = log_sum_exp(values);
    for v in values.iter_mut() {
        *v -= z;
    }
    z
}

/// Number of joint states; `None` on overflow.
pub fn table_size(cards: &[usize]) -> Option<usize> {
    cards.iter().try_fold(1usize, |acc, &c| acc.checked_mul(c))
}

pub fn strides(cards: &[usize]) -> Vec<usize> {
    let mut strides = vec![1; cards.len()];
    for k in (0..cards.len().saturating_sub(1)).rev() {
        strides[k] = strides[k + 1] * cards[k + 1];
    }
    strides
}

/// Decodes a flat index into per-position states.
pub fn decode(mut index: usize, cards: &[usize], out: &mut [usize]) {
    for k in (0..cards.len()).rev() {
        out[k] = index % cards[k];
        index /= cards[k];
    }
}

/// For every joint state of `sup_vars`, the flat index of its restriction to `sub_vars`.
///
/// Both scopes must be sorted and `sub_vars` a subset of `sup_vars`.
pub fn projection(sup_vars: &[usize], sup_cards: &[usize], sub_vars: &[usize]) -> Vec<usize> {
    let sub_cards: Vec<usize> = sub_vars
        .iter()
        .map(|v| {
            let pos = sup_vars.binary_search(v).expect("sub scope must be contained in sup scope");
            sup_cards[pos]
        })
        .collect();
    let sub_strides = strides(&sub_cards);
    // stride contribution of each sup position to the sub index
    let mut weight = vec![0usize; sup_vars.len()];
    for (k, v) in sub_vars.iter().enumerate() {
        let pos = sup_vars.binary_search(v).unwrap();
        weight[pos] = sub_strides[k];
    }
    let size = table_size(sup_cards).expect("table size overflow");
    let mut out = Vec::with_capacity(size);
    let mut states = vec![0usize; sup_vars.len()];
    let mut sub_index = 0usize;
    for _ in 0..size {
        out.push(sub_index);
        // odometer increment, last position fastest
        for k in (0..states.len()).rev() {
            states[k] += 1;
            sub_index += weight[k];
            if states[k] < sup_cards[k] {
                break;
            }
            sub_index -= weight[k] * states[k];
            states[k] = 0;
        }
    }
    out
}

/// Sums `log_values` (over the sup scope) down to a sub scope via a projection map.
pub fn marginalize_log(log_values: &[f64], proj: &[usize], sub_size: usize) -> Vec<f64> {
    let mut max = vec![f64::NEG_INFINITY; sub_size];
    for (v, &p) in log_values.iter().zip(proj) {
        if *v > max[p] {
            max[p] = *v;
        }
    }
    let mut acc = vec![0.0; sub_size];
    for (v, &p) in log_values.iter().zip(proj) {
        if max[p] > f64::NEG_INFINITY {
            acc[p] += (v - max[p]).exp();
        }
    }
    acc.iter()
        .zip(&max)
        .map(|(a, m)| if *m == f64::NEG_INFINITY { *m } else { m + a.ln() })
        .collect()
}

/// A log-domain table over a sorted scope.
#[derive(Debug, Clone, PartialEq)]
pub struct LogTable {
    pub vars: Vec<usize>,
    pub cards: Vec<usize>,
    pub values: Vec<f64>,
}

impl LogTable {
    pub fn scalar(value: f64) -> Self {
        LogTable {
            vars: Vec::new(),
            cards: Vec::new(),
            values: vec![value],
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Pointwise product (sum of logs) over the union scope.
    pub fn product(&self, other: &LogTable) -> LogTable {
        let mut vars: Vec<usize> = self.vars.iter().chain(&other.vars).copied().collect();
        vars.sort_unstable();
        vars.dedup();
        let cards: Vec<usize> = vars
            .iter()
            .map(|v| match self.vars.binary_search(v) {
                Ok(p) => self.cards[p],
                Err(_) => other.cards[other.vars.binary_search(v).unwrap()],
            })
            .collect();
        let left = projection(&vars, &cards, &self.vars);
        let right = projection(&vars, &cards, &other.vars);
        let values = left
            .iter()
            .zip(&right)
            .map(|(&l, &r)| self.values[l] + other.values[r])
            .collect();
        LogTable { vars, cards, values }
    }

    /// Sums out one variable; returns the table unchanged if it is absent.
    pub fn sum_out(&self, var: usize) -> LogTable {
        let Ok(pos) = self.vars.binary_search(&var) else {
            return self.clone();
        };
        let mut vars = self.vars.clone();
        let mut cards = self.cards.clone();
        vars.remove(pos);
        cards.remove(pos);
        let proj = projection(&self.vars, &self.cards, &vars);
        let size = table_size(&cards).unwrap();
        let values = marginalize_log(&self.values, &proj, size);
        LogTable { vars, cards, values }
    }
}
