//! Enumeration of the leading-order candidate terms for the `m`-th conformal
//! fundamental form.
//!
//! A candidate is a monomial
//! `(g^{-1})^{a1} ∇̄^{a2} II^{a3} n̂^{a4} (:∇_n̂:)^{a5} R^{a6}` with
//! non-negative exponents. It must have the conformal weight `3 − m` of the
//! form and two free tangential indices:
//!
//! ```text
//! −2a1 + a3 + a4 − a5 + 2a6 = 3 − m
//! −2a1 + a2 + 2a3 + a4 + 4a6 = 2
//! ```
//!
//! Transverse order `m − 1` forces `a5 = m − 3` and `a6 = 1`, and `n̂` can
//! contract into a curvature tensor at most twice, so `a4 ≤ 2`.

/// `Σ coeffs[i]·a[i] = rhs`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinearConstraint {
    pub coeffs: Vec<i64>,
    pub rhs: i64,
}

impl LinearConstraint {
    pub fn new(coeffs: Vec<i64>, rhs: i64) -> Self {
        LinearConstraint { coeffs, rhs }
    }

    pub fn holds(&self, a: &[u32]) -> bool {
        self.coeffs.iter().zip(a).map(|(c, &x)| c * x as i64).sum::<i64>() == self.rhs
    }
}

/// All non-negative integer vectors with `a[i] ≤ bounds[i]` that satisfy
/// every constraint, in lexicographic order.
pub fn solve_bounded(constraints: &[LinearConstraint], bounds: &[u32]) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    let mut cur = vec![0u32; bounds.len()];
    loop {
        if constraints.iter().all(|c| c.holds(&cur)) {
            out.push(cur.clone());
        }
        let mut i = bounds.len();
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if cur[i] < bounds[i] {
                cur[i] += 1;
                break;
            }
            cur[i] = 0;
        }
    }
}

pub const FACTOR_NAMES: [&str; 6] = ["g^-1", "nabla_bar", "II", "n", ":nabla_n:", "R"];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CandidateSolution {
    /// `(a1, …, a6)`.
    pub exponents: [u32; 6],
    pub description: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CandidateSet {
    pub m: u32,
    /// Solutions under the leading-order side conditions.
    pub solutions: Vec<CandidateSolution>,
    /// Solutions found when `a6 ≥ 2` and `a5 ≥ m − 3` are allowed, within
    /// the search bounds. These are flagged for inspection; none are expected.
    pub flagged: Vec<CandidateSolution>,
}

fn describe(a: [u32; 6], m: u32) -> String {
    let d = m.saturating_sub(3);
    let nabla = if d == 0 { String::new() } else { format!(":nabla_n^{d}:") };
    match a {
        [1, 0, 0, 0, _, 1] => format!("{nabla}Ric_ab"),
        [2, 0, 0, 2, _, 1] => format!("n^c n^d {nabla}R_cabd"),
        _ => FACTOR_NAMES
            .iter()
            .zip(a)
            .filter(|(_, e)| *e > 0)
            .map(|(n, e)| if e == 1 { n.to_string() } else { format!("({n})^{e}") })
            .collect::<Vec<_>>()
            .join(" "),
    }
}

/// Weight and index-count constraints for the `m`-th form.
pub fn form_constraints(m: u32) -> [LinearConstraint; 2] {
    [
        LinearConstraint::new(vec![-2, 0, 1, 1, -1, 2], 3 - m as i64),
        LinearConstraint::new(vec![-2, 1, 2, 1, 0, 4], 2),
    ]
}

fn pin(index: usize, value: u32) -> LinearConstraint {
    let mut coeffs = vec![0; 6];
    coeffs[index] = 1;
    LinearConstraint::new(coeffs, value as i64)
}

/// Candidate terms for the `m`-th form, `m ≥ 3`. `bound` caps every
/// exponent in the relaxed search that fills `flagged`.
pub fn enumerate_form_candidates(m: u32, bound: u32) -> CandidateSet {
    assert!(m >= 3, "candidate enumeration starts at m = 3");
    let [weight, indices] = form_constraints(m);
    let mut bounds = [bound; 6];
    bounds[3] = 2;

    let mut strict = vec![weight.clone(), indices.clone(), pin(4, m - 3), pin(5, 1)];
    let mut upper = bounds;
    upper[4] = upper[4].max(m - 3);
    let to_solution = |v: Vec<u32>| {
        let a: [u32; 6] = v.try_into().expect("six exponents");
        CandidateSolution {
            exponents: a,
            description: describe(a, m),
        }
    };
    let solutions: Vec<_> = solve_bounded(&strict, &upper).into_iter().map(to_solution).collect();

    strict.truncate(2);
    let flagged = solve_bounded(&strict, &upper)
        .into_iter()
        .filter(|a| a[4] >= m - 3 && a[5] >= 1 && !(a[4] == m - 3 && a[5] == 1))
        .map(to_solution)
        .collect();
    CandidateSet { m, solutions, flagged }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_solutions_for_each_m() {
        for m in 3..=8 {
            let set = enumerate_form_candidates(m, 8);
            let exps: Vec<[u32; 6]> = set.solutions.iter().map(|s| s.exponents).collect();
            assert_eq!(exps, vec![[1, 0, 0, 0, m - 3, 1], [2, 0, 0, 2, m - 3, 1]], "m={m}");
            assert!(set.flagged.is_empty(), "m={m}: {:?}", set.flagged);
        }
        let set = enumerate_form_candidates(5, 6);
        assert_eq!(set.solutions[0].description, ":nabla_n^2:Ric_ab");
        assert_eq!(set.solutions[1].description, "n^c n^d :nabla_n^2:R_cabd");
        assert_eq!(enumerate_form_candidates(3, 4).solutions[0].description, "Ric_ab");
    }

    #[test]
    fn solver_finds_every_solution_of_a_known_system() {
        // x + y = 3, x − y = 1 has the unique solution (2, 1); dropping the
        // second equation leaves four points in the box
        let eqs = [LinearConstraint::new(vec![1, 1], 3), LinearConstraint::new(vec![1, -1], 1)];
        assert_eq!(solve_bounded(&eqs, &[5, 5]), vec![vec![2, 1]]);
        assert_eq!(solve_bounded(&eqs[..1], &[5, 5]).len(), 4);
        assert!(solve_bounded(&eqs, &[1, 5]).is_empty());
    }

    #[test]
    fn lifting_the_normal_cap_gives_infinitely_many() {
        // without a4 ≤ 2 the family (a1, 0, 0, 2a1 − 2, m − 3, 1) grows with the bound
        let m = 4;
        let [w, i] = form_constraints(m);
        let cons = vec![w, i, pin(4, m - 3), pin(5, 1)];
        let small = solve_bounded(&cons, &[4, 4, 4, 8, 4, 4]).len();
        let large = solve_bounded(&cons, &[8, 8, 8, 16, 8, 8]).len();
        assert!(large > small && small > 2);
    }
}
