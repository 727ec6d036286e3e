use std::collections::VecDeque;

use num_traits::{Signed, Zero};

use super::{require_metric_fits, require_same_points, FiniteMeasure, MetricSpec, DISTANCE_SUPPORT_CAP};
use crate::error::{Error, Result};
use crate::num::Rational;

/// An optimal coupling: `(i, j, mass)` over point indices, with dual
/// potentials `(i, u_i)` on the support of `μ` and `(j, v_j)` on that of `ν`
/// satisfying `u_i + v_j ≤ d(i, j)` and `Σ μ u + Σ ν v = cost`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TransportPlan {
    pub cost: Rational,
    pub moves: Vec<(usize, usize, Rational)>,
    pub supply_potentials: Vec<(usize, Rational)>,
    pub demand_potentials: Vec<(usize, Rational)>,
}

/// Wasserstein distance `min_π Σ π(x,y) d(x,y)` over couplings of `μ` and `ν`.
pub fn wasserstein(mu: &FiniteMeasure, nu: &FiniteMeasure, metric: &MetricSpec) -> Result<Rational> {
    Ok(optimal_transport(mu, nu, metric)?.cost)
}

/// Solves the transport problem exactly by the transportation simplex on
/// rationals: a north-west corner start, potentials on the basis tree, and
/// Bland's rule for both entering and leaving cells so degenerate pivots
/// cannot cycle.
pub fn optimal_transport(mu: &FiniteMeasure, nu: &FiniteMeasure, metric: &MetricSpec) -> Result<TransportPlan> {
    require_same_points(mu, nu)?;
    require_metric_fits(metric, mu)?;
    mu.require_probability()?;
    nu.require_probability()?;
    let rows = mu.support();
    let cols = nu.support();
    for s in [&rows, &cols] {
        if s.len() > DISTANCE_SUPPORT_CAP {
            return Err(Error::SupportTooLarge { size: s.len(), cap: DISTANCE_SUPPORT_CAP });
        }
    }
    let supply: Vec<Rational> = rows.iter().map(|&i| mu.masses()[i].clone()).collect();
    let demand: Vec<Rational> = cols.iter().map(|&j| nu.masses()[j].clone()).collect();
    let cost: Vec<Vec<Rational>> = rows.iter().map(|&i| cols.iter().map(|&j| metric.d(i, j).clone()).collect()).collect();
    let solved = Transport::new(supply, demand, cost).solve();
    let moves = solved
        .basis
        .iter()
        .filter(|c| c.flow.is_positive())
        .map(|c| (rows[c.i], cols[c.j], c.flow.clone()))
        .collect();
    let (u, v) = solved.potentials();
    Ok(TransportPlan {
        cost: solved.cost(),
        moves,
        supply_potentials: rows.iter().copied().zip(u).collect(),
        demand_potentials: cols.iter().copied().zip(v).collect(),
    })
}

#[derive(Clone, Debug)]
struct Cell {
    i: usize,
    j: usize,
    flow: Rational,
}

struct Transport {
    cost: Vec<Vec<Rational>>,
    m: usize,
    n: usize,
    basis: Vec<Cell>,
}

impl Transport {
    /// North-west corner rule: exactly `m + n − 1` basic cells forming a
    /// spanning tree, some possibly at zero flow.
    fn new(supply: Vec<Rational>, demand: Vec<Rational>, cost: Vec<Vec<Rational>>) -> Self {
        let (m, n) = (supply.len(), demand.len());
        let mut a = supply;
        let mut b = demand;
        let mut basis = Vec::with_capacity(m + n - 1);
        let (mut i, mut j) = (0, 0);
        loop {
            let q = (&a[i]).min(&b[j]).clone();
            a[i] -= &q;
            b[j] -= &q;
            basis.push(Cell { i, j, flow: q });
            if i == m - 1 && j == n - 1 {
                break;
            }
            if (a[i].is_zero() && i < m - 1) || j == n - 1 {
                i += 1;
            } else {
                j += 1;
            }
        }
        Self { cost, m, n, basis }
    }

    fn cost(&self) -> Rational {
        self.basis.iter().map(|c| &c.flow * &self.cost[c.i][c.j]).sum()
    }

    /// Row potentials `u` and column potentials `v` with `u_i + v_j = c_ij`
    /// on every basic cell.
    fn potentials(&self) -> (Vec<Rational>, Vec<Rational>) {
        let mut u: Vec<Option<Rational>> = vec![None; self.m];
        let mut v: Vec<Option<Rational>> = vec![None; self.n];
        u[0] = Some(Rational::zero());
        let mut changed = true;
        while changed {
            changed = false;
            for c in &self.basis {
                match (&u[c.i], &v[c.j]) {
                    (Some(ui), None) => {
                        v[c.j] = Some(&self.cost[c.i][c.j] - ui);
                        changed = true;
                    }
                    (None, Some(vj)) => {
                        u[c.i] = Some(&self.cost[c.i][c.j] - vj);
                        changed = true;
                    }
                    _ => {}
                }
            }
        }
        let unwrap = |x: Vec<Option<Rational>>| x.into_iter().map(|p| p.expect("basis spans")).collect();
        (unwrap(u), unwrap(v))
    }

    /// Basis cells on the tree path from row `i` to column `j`, in order.
    fn tree_path(&self, i: usize, j: usize) -> Vec<usize> {
        // nodes: rows 0..m, columns m..m+n
        let nodes = self.m + self.n;
        let mut adj: Vec<Vec<(usize, usize)>> = vec![Vec::new(); nodes];
        for (k, c) in self.basis.iter().enumerate() {
            adj[c.i].push((self.m + c.j, k));
            adj[self.m + c.j].push((c.i, k));
        }
        let mut via: Vec<Option<(usize, usize)>> = vec![None; nodes];
        let mut seen = vec![false; nodes];
        let mut queue = VecDeque::from([i]);
        seen[i] = true;
        while let Some(x) = queue.pop_front() {
            for &(y, k) in &adj[x] {
                if !seen[y] {
                    seen[y] = true;
                    via[y] = Some((x, k));
                    queue.push_back(y);
                }
            }
        }
        let mut path = Vec::new();
        let mut node = self.m + j;
        while node != i {
            let (prev, k) = via[node].expect("basis spans");
            path.push(k);
            node = prev;
        }
        path.reverse();
        path
    }

    fn solve(mut self) -> Self {
        loop {
            let (u, v) = self.potentials();
            let entering = (0..self.m)
                .flat_map(|i| (0..self.n).map(move |j| (i, j)))
                .find(|&(i, j)| (&self.cost[i][j] - &u[i] - &v[j]).is_negative());
            let Some((ei, ej)) = entering else { return self };
            // the path leaves row ei first, so its odd positions lose flow
            let path = self.tree_path(ei, ej);
            let losing: Vec<usize> = path.iter().step_by(2).copied().collect();
            let theta = losing.iter().map(|&k| self.basis[k].flow.clone()).min().expect("cycle is nonempty");
            let leaving = *losing
                .iter()
                .filter(|&&k| self.basis[k].flow == theta)
                .min_by_key(|&&k| (self.basis[k].i, self.basis[k].j))
                .unwrap();
            for (pos, &k) in path.iter().enumerate() {
                if pos % 2 == 0 {
                    self.basis[k].flow -= &theta;
                } else {
                    self.basis[k].flow += &theta;
                }
            }
            self.basis[leaving] = Cell { i: ei, j: ej, flow: theta };
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::prokhorov;
    use crate::num::{int, ratio};
    use proptest::prelude::*;

    /// Minimum cost over every basic feasible solution: each choice of
    /// `m + n − 1` cells whose marginal equations have a unique solution, kept
    /// when that solution is nonnegative.
    fn oracle(a: &[Rational], b: &[Rational], c: &[Vec<Rational>]) -> Rational {
        let (m, n) = (a.len(), b.len());
        let cells: Vec<(usize, usize)> = (0..m).flat_map(|i| (0..n).map(move |j| (i, j))).collect();
        let k = m + n - 1;
        let mut best: Option<Rational> = None;
        let mut choose = (0..k).collect::<Vec<_>>();
        loop {
            if let Some(x) = solve_basis(a, b, &choose.iter().map(|&t| cells[t]).collect::<Vec<_>>()) {
                if x.iter().all(|v| !v.is_negative()) {
                    let cost: Rational = choose.iter().zip(&x).map(|(&t, v)| v * &c[cells[t].0][cells[t].1]).sum();
                    if best.as_ref().map_or(true, |b| cost < *b) {
                        best = Some(cost);
                    }
                }
            }
            // next k-combination of cells
            let mut p = k;
            loop {
                if p == 0 {
                    return best.unwrap();
                }
                p -= 1;
                if choose[p] != p + cells.len() - k {
                    break;
                }
            }
            choose[p] += 1;
            for q in p + 1..k {
                choose[q] = choose[q - 1] + 1;
            }
        }
    }

    /// Gaussian elimination on the `m + n` marginal equations restricted to
    /// `basis`; `None` unless the solution is unique.
    fn solve_basis(a: &[Rational], b: &[Rational], basis: &[(usize, usize)]) -> Option<Vec<Rational>> {
        let (m, n, k) = (a.len(), b.len(), basis.len());
        let mut rows: Vec<Vec<Rational>> = Vec::new();
        for i in 0..m {
            let mut r: Vec<Rational> = basis.iter().map(|&(bi, _)| if bi == i { int(1) } else { int(0) }).collect();
            r.push(a[i].clone());
            rows.push(r);
        }
        for j in 0..n {
            let mut r: Vec<Rational> = basis.iter().map(|&(_, bj)| if bj == j { int(1) } else { int(0) }).collect();
            r.push(b[j].clone());
            rows.push(r);
        }
        let mut rank = 0;
        for col in 0..k {
            let pivot = (rank..rows.len()).find(|&r| !rows[r][col].is_zero())?;
            rows.swap(rank, pivot);
            let lead = rows[rank][col].clone();
            for v in rows[rank].iter_mut() {
                *v /= &lead;
            }
            for r in 0..rows.len() {
                if r != rank && !rows[r][col].is_zero() {
                    let f = rows[r][col].clone();
                    for t in 0..=k {
                        let delta = &f * &rows[rank][t];
                        rows[r][t] -= delta;
                    }
                }
            }
            rank += 1;
        }
        if rows[rank..].iter().any(|r| !r[k].is_zero()) {
            return None;
        }
        Some((0..k).map(|c| rows[c][k].clone()).collect())
    }

    fn dirac(n: usize, at: usize) -> FiniteMeasure {
        FiniteMeasure::from_masses((0..n).map(|i| if i == at { int(1) } else { int(0) }).collect()).unwrap()
    }

    #[test]
    fn simple_values() {
        let m = MetricSpec::new(vec![
            vec![int(0), ratio(1, 2), int(1)],
            vec![ratio(1, 2), int(0), ratio(1, 2)],
            vec![int(1), ratio(1, 2), int(0)],
        ])
        .unwrap();
        let p = FiniteMeasure::from_masses(vec![ratio(1, 3), ratio(1, 3), ratio(1, 3)]).unwrap();
        assert_eq!(wasserstein(&p, &p, &m).unwrap(), int(0));
        assert_eq!(wasserstein(&dirac(3, 0), &dirac(3, 2), &m).unwrap(), int(1));
        assert_eq!(wasserstein(&dirac(3, 0), &p, &m).unwrap(), ratio(1, 2));
        let plan = optimal_transport(&dirac(3, 0), &p, &m).unwrap();
        let moved: Rational = plan.moves.iter().map(|(_, _, f)| f.clone()).sum();
        assert_eq!(moved, int(1));
        let dual: Rational = plan.supply_potentials.iter().map(|(i, u)| u * &dirac(3, 0).masses()[*i]).sum::<Rational>()
            + plan.demand_potentials.iter().map(|(j, v)| v * &p.masses()[*j]).sum::<Rational>();
        assert_eq!(dual, plan.cost);
    }

    #[test]
    fn rejects_oversized_support() {
        let n = DISTANCE_SUPPORT_CAP + 1;
        let u = FiniteMeasure::from_masses(vec![ratio(1, n as i64); n]).unwrap();
        assert!(matches!(wasserstein(&u, &u, &MetricSpec::discrete(n)), Err(Error::SupportTooLarge { .. })));
    }

    fn arb_pair(max: usize) -> impl Strategy<Value = (MetricSpec, FiniteMeasure, FiniteMeasure, FiniteMeasure)> {
        (2usize..=max).prop_flat_map(|n| {
            (
                proptest::collection::vec(0i64..12, n),
                proptest::collection::vec(proptest::collection::vec(0i64..5, n), 3),
            )
                .prop_filter_map("valid instance", move |(pos, raw)| {
                    let distinct: std::collections::BTreeSet<_> = pos.iter().collect();
                    if distinct.len() < n {
                        return None;
                    }
                    // points on a line
                    let d = (0..n).map(|i| (0..n).map(|j| ratio((pos[i] - pos[j]).abs(), 12)).collect()).collect();
                    let mut ms = raw.into_iter().map(|w| {
                        let total: i64 = w.iter().sum();
                        (total > 0).then(|| FiniteMeasure::from_masses(w.iter().map(|&x| ratio(x, total)).collect()).unwrap())
                    });
                    Some((MetricSpec::new(d).unwrap(), ms.next()??, ms.next()??, ms.next()??))
                })
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]
        #[test]
        fn matches_vertex_enumeration((m, p, q, _) in arb_pair(4)) {
            let n = p.len();
            let a = p.masses().to_vec();
            let b = q.masses().to_vec();
            let c: Vec<Vec<Rational>> = (0..n).map(|i| (0..n).map(|j| m.d(i, j).clone()).collect()).collect();
            prop_assert_eq!(wasserstein(&p, &q, &m).unwrap(), oracle(&a, &b, &c));
        }

        #[test]
        fn metric_and_prokhorov_equivalence((m, p, q, r) in arb_pair(6)) {
            let w = wasserstein(&p, &q, &m).unwrap();
            prop_assert_eq!(&w, &wasserstein(&q, &p, &m).unwrap());
            prop_assert!(w <= &wasserstein(&p, &r, &m).unwrap() + &wasserstein(&r, &q, &m).unwrap());
            prop_assert_eq!(w.is_zero(), p == q);
            let rho = prokhorov(&p, &q, &m).unwrap();
            let big_m = m.diameter();
            prop_assert!(w <= (big_m + int(1)) * &rho);
            prop_assert!(&rho * &rho <= w);
        }
    }
}
