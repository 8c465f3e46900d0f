use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

/// Monomial bookkeeping for jets in `dim` variables truncated at `max_order`.
///
/// Monomials are stored in graded lexicographic order: all monomials of
/// degree `k` precede those of degree `k + 1`, so truncating a coefficient
/// vector to degree `r` is a prefix cut. Within a degree, exponents are
/// ordered lexicographically with the first variable most significant and
/// higher powers first.
#[derive(Debug)]
pub(crate) struct Basis {
    pub dim: usize,
    pub max_order: usize,
    pub exponents: Vec<Vec<u8>>,
    pub degree: Vec<usize>,
    /// `offsets[k]` is the number of monomials of degree `< k`.
    offsets: Vec<usize>,
    index: HashMap<Vec<u8>, usize>,
    /// `products[i][j]` for `j < count(max_order - degree[i])`.
    products: Vec<Vec<u32>>,
    /// `raise[axis][i]`: index of `x_axis · m_i`, when still within `max_order`.
    raise: Vec<Vec<Option<u32>>>,
    /// `restrict[axis][i]`: index in the `dim - 1` basis of `m_i` with the
    /// axis dropped, when `m_i` does not involve that axis.
    restrict: Vec<Vec<Option<u32>>>,
    pub lower: Option<Arc<Basis>>,
}

fn exponents_of_degree(dim: usize, degree: usize, prefix: &mut Vec<u8>, out: &mut Vec<Vec<u8>>) {
    if prefix.len() + 1 == dim {
        prefix.push(degree as u8);
        out.push(prefix.clone());
        prefix.pop();
        return;
    }
    for first in (0..=degree).rev() {
        prefix.push(first as u8);
        exponents_of_degree(dim, degree - first, prefix, out);
        prefix.pop();
    }
}

impl Basis {
    fn build(dim: usize, max_order: usize) -> Basis {
        assert!(dim >= 1, "jets need at least one variable");
        assert!(max_order < 64, "jet order too large");
        let mut exponents = Vec::new();
        let mut offsets = vec![0];
        for k in 0..=max_order {
            exponents_of_degree(dim, k, &mut Vec::with_capacity(dim), &mut exponents);
            offsets.push(exponents.len());
        }
        let degree: Vec<usize> = exponents
            .iter()
            .map(|e| e.iter().map(|&x| x as usize).sum())
            .collect();
        let index: HashMap<Vec<u8>, usize> = exponents
            .iter()
            .enumerate()
            .map(|(i, e)| (e.clone(), i))
            .collect();

        let count = |k: usize| offsets[k + 1];
        let products = exponents
            .iter()
            .zip(&degree)
            .map(|(ei, &di)| {
                (0..count(max_order - di))
                    .map(|j| {
                        let prod: Vec<u8> =
                            ei.iter().zip(&exponents[j]).map(|(a, b)| a + b).collect();
                        index[&prod] as u32
                    })
                    .collect()
            })
            .collect();

        let raise = (0..dim)
            .map(|axis| {
                exponents
                    .iter()
                    .zip(&degree)
                    .map(|(e, &deg)| {
                        (deg < max_order).then(|| {
                            let mut up = e.clone();
                            up[axis] += 1;
                            index[&up] as u32
                        })
                    })
                    .collect()
            })
            .collect();

        let lower = (dim > 1).then(|| Basis::get(dim - 1, max_order));
        let restrict = match &lower {
            Some(low) => (0..dim)
                .map(|axis| {
                    exponents
                        .iter()
                        .map(|e| {
                            (e[axis] == 0).then(|| {
                                let mut cut = e.clone();
                                cut.remove(axis);
                                low.index[&cut] as u32
                            })
                        })
                        .collect()
                })
                .collect(),
            None => Vec::new(),
        };

        Basis {
            dim,
            max_order,
            exponents,
            degree,
            offsets,
            index,
            products,
            raise,
            restrict,
            lower,
        }
    }

    /// Shared basis for the given shape; bases are cached for the process lifetime.
    pub fn get(dim: usize, max_order: usize) -> Arc<Basis> {
        static CACHE: OnceLock<Mutex<HashMap<(usize, usize), Arc<Basis>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        if let Some(b) = cache.lock().expect("basis cache poisoned").get(&(dim, max_order)) {
            return b.clone();
        }
        // Built outside the lock: construction recurses into lower dimensions.
        let built = Arc::new(Basis::build(dim, max_order));
        cache
            .lock()
            .expect("basis cache poisoned")
            .entry((dim, max_order))
            .or_insert(built)
            .clone()
    }

    /// Number of monomials of degree `<= order`.
    #[inline]
    pub fn count(&self, order: usize) -> usize {
        self.offsets[order + 1]
    }

    #[inline]
    pub fn product(&self, i: usize, j: usize) -> usize {
        self.products[i][j] as usize
    }

    #[inline]
    pub fn raised(&self, axis: usize, i: usize) -> Option<usize> {
        self.raise[axis][i].map(|x| x as usize)
    }

    #[inline]
    pub fn restricted(&self, axis: usize, i: usize) -> Option<usize> {
        self.restrict[axis][i].map(|x| x as usize)
    }

    pub fn index_of(&self, exponents: &[u8]) -> Option<usize> {
        self.index.get(exponents).copied()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn graded_lex_layout() {
        let b = Basis::get(2, 2);
        let e: Vec<Vec<u8>> = b.exponents.clone();
        assert_eq!(
            e,
            vec![
                vec![0, 0],
                vec![1, 0],
                vec![0, 1],
                vec![2, 0],
                vec![1, 1],
                vec![0, 2]
            ]
        );
        assert_eq!(b.count(0), 1);
        assert_eq!(b.count(1), 3);
        assert_eq!(b.count(2), 6);
    }

    #[test]
    fn monomial_count_matches_binomial() {
        // C(d + K, K)
        let b = Basis::get(4, 5);
        assert_eq!(b.count(5), 126);
        let b = Basis::get(6, 4);
        assert_eq!(b.count(4), 210);
    }
}
