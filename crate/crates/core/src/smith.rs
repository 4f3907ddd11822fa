//! Smith normal form of integer matrices.

/// Invariant factors d₁ | d₂ | … of an integer matrix (nonzero ones only).
pub fn invariant_factors(m: &[Vec<i64>]) -> Vec<i64> {
    let rows = m.len();
    let cols = m.first().map_or(0, Vec::len);
    let mut a: Vec<Vec<i128>> = m.iter().map(|r| r.iter().map(|&x| x as i128).collect()).collect();
    let mut out = Vec::new();
    let mut t = 0;
    while t < rows.min(cols) {
        // pick the smallest nonzero entry in the remaining block as pivot
        let mut best: Option<(usize, usize)> = None;
        for i in t..rows {
            for j in t..cols {
                if a[i][j] != 0 && best.map_or(true, |(bi, bj)| a[i][j].abs() < a[bi][bj].abs()) {
                    best = Some((i, j));
                }
            }
        }
        let Some((pi, pj)) = best else { break };
        a.swap(t, pi);
        for row in a.iter_mut() {
            row.swap(t, pj);
        }
        loop {
            let p = a[t][t];
            let mut dirty = false;
            for i in t + 1..rows {
                let q = a[i][t] / p;
                if q != 0 {
                    for j in t..cols {
                        a[i][j] -= q * a[t][j];
                    }
                }
                if a[i][t] != 0 {
                    dirty = true;
                }
            }
            for j in t + 1..cols {
                let q = a[t][j] / p;
                if q != 0 {
                    for row in a.iter_mut().skip(t) {
                        row[j] -= q * row[t];
                    }
                }
                if a[t][j] != 0 {
                    dirty = true;
                }
            }
            if !dirty {
                // pivot must divide the rest of the block
                let bad = (t + 1..rows)
                    .flat_map(|i| (t + 1..cols).map(move |j| (i, j)))
                    .find(|&(i, j)| a[i][j] % p != 0);
                match bad {
                    None => break,
                    Some((i, _)) => {
                        for j in t..cols {
                            a[t][j] += a[i][j];
                        }
                        continue;
                    }
                }
            }
            // move the smallest nonzero entry of row/column t to the pivot
            let mut best = (t, t);
            for i in t..rows {
                if a[i][t] != 0 && (a[best.0][best.1] == 0 || a[i][t].abs() < a[best.0][best.1].abs()) {
                    best = (i, t);
                }
            }
            for j in t..cols {
                if a[t][j] != 0 && a[t][j].abs() < a[best.0][best.1].abs() {
                    best = (t, j);
                }
            }
            a.swap(t, best.0);
            for row in a.iter_mut() {
                row.swap(t, best.1);
            }
        }
        out.push(a[t][t].abs() as i64);
        t += 1;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn cartan_a2() {
        assert_eq!(invariant_factors(&[vec![2, -1], vec![-1, 2]]), vec![1, 3]);
    }

    #[test]
    fn textbook_example() {
        let m = vec![vec![2, 4, 4], vec![-6, 6, 12], vec![10, -4, -16]];
        assert_eq!(invariant_factors(&m), vec![2, 6, 12]);
    }

    #[test]
    fn rank_deficient() {
        assert_eq!(invariant_factors(&[vec![1, 2], vec![2, 4]]), vec![1]);
        assert!(invariant_factors(&[vec![0, 0]]).is_empty());
    }

    proptest! {
        #[test]
        fn divisibility_and_determinant(v in proptest::collection::vec(-9i64..10, 9)) {
            let m: Vec<Vec<i64>> = v.chunks(3).map(<[i64]>::to_vec).collect();
            let d = invariant_factors(&m);
            for w in d.windows(2) {
                prop_assert_eq!(w[1] % w[0], 0);
            }
            let det = crate::exact::int_det(&m).abs();
            if det != 0 {
                prop_assert_eq!(d.iter().product::<i64>(), det);
            } else {
                prop_assert!(d.len() < 3);
            }
        }
    }
}
