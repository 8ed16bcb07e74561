use std::cmp::Ordering;
use std::collections::BTreeMap;

use ordered_float::OrderedFloat;

/// `a` Pareto-dominates `b` (minimisation): no worse anywhere, strictly
/// better somewhere.
pub fn dominates(a: &[f64], b: &[f64]) -> bool {
    let mut strictly = false;
    for (x, y) in a.iter().zip(b) {
        if x > y {
            return false;
        }
        if x < y {
            strictly = true;
        }
    }
    strictly
}

fn lex(a: &[f64], b: &[f64]) -> Ordering {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.total_cmp(y))
        .find(|o| o.is_ne())
        .unwrap_or(Ordering::Equal)
}

/// Keeps exactly the points no other point dominates; duplicates collapse
/// to one. Output is sorted lexicographically.
pub fn filter_nondominated(points: &[Vec<f64>]) -> Vec<Vec<f64>> {
    if points.is_empty() {
        return Vec::new();
    }
    let mut sorted: Vec<&Vec<f64>> = points.iter().collect();
    sorted.sort_by(|a, b| lex(a, b));
    sorted.dedup_by(|a, b| lex(a, b).is_eq());

    match sorted[0].len() {
        1 => vec![sorted[0].clone()],
        2 => {
            let mut out = Vec::new();
            let mut best = f64::INFINITY;
            for p in sorted {
                if p[1] < best {
                    best = p[1];
                    out.push(p.clone());
                }
            }
            out
        }
        3 => {
            // Staircase over (f2, f3): f3 strictly decreases as f2 grows, so
            // the predecessor of f2 carries the minimum f3 seen at or left of it.
            let mut stairs: BTreeMap<OrderedFloat<f64>, f64> = BTreeMap::new();
            let mut out = Vec::new();
            for p in sorted {
                let key = OrderedFloat(p[1]);
                if let Some((_, &f3)) = stairs.range(..=key).next_back() {
                    if f3 <= p[2] {
                        continue;
                    }
                }
                let covered: Vec<OrderedFloat<f64>> = stairs
                    .range(key..)
                    .take_while(|(_, &f3)| f3 >= p[2])
                    .map(|(k, _)| *k)
                    .collect();
                for k in covered {
                    stairs.remove(&k);
                }
                stairs.insert(key, p[2]);
                out.push(p.clone());
            }
            out
        }
        _ => {
            let keep: Vec<bool> = sorted
                .iter()
                .map(|p| !sorted.iter().any(|q| dominates(q, p)))
                .collect();
            sorted
                .into_iter()
                .zip(keep)
                .filter(|(_, k)| *k)
                .map(|(p, _)| p.clone())
                .collect()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn removes_dominated_corner() {
        let pts = vec![vec![0.0, 1.0], vec![1.0, 0.0], vec![1.0, 1.0]];
        assert_eq!(filter_nondominated(&pts), vec![vec![0.0, 1.0], vec![1.0, 0.0]]);
    }

    #[test]
    fn duplicates_collapse() {
        let pts = vec![vec![0.5, 0.5, 0.5]; 7];
        assert_eq!(filter_nondominated(&pts), vec![vec![0.5, 0.5, 0.5]]);
        let pts = vec![vec![0.5, 0.5]; 3];
        assert_eq!(filter_nondominated(&pts).len(), 1);
    }

    #[test]
    fn three_d_ties_on_second_axis() {
        let pts = vec![
            vec![0.0, 1.0, 2.0],
            vec![1.0, 1.0, 1.0],
            vec![2.0, 1.0, 1.0],
            vec![2.0, 0.5, 3.0],
        ];
        let out = filter_nondominated(&pts);
        assert_eq!(
            out,
            vec![vec![0.0, 1.0, 2.0], vec![1.0, 1.0, 1.0], vec![2.0, 0.5, 3.0]]
        );
    }

    #[test]
    fn dominance_relation() {
        assert!(dominates(&[0.0, 1.0], &[0.0, 2.0]));
        assert!(!dominates(&[0.0, 1.0], &[0.0, 1.0]));
        assert!(!dominates(&[0.0, 3.0], &[1.0, 2.0]));
    }
}
