//! Tiny permutation enumeration used by the antisymmetrized integrands.

/// All permutations of {0, .., n-1} with their signatures. n stays <= 4
/// throughout the crate, so the literal enumeration is cheap.
pub(crate) fn permutations_with_sign(n: usize) -> Vec<(Vec<usize>, f64)> {
    let mut out = Vec::new();
    let mut current = Vec::with_capacity(n);
    let mut used = vec![false; n];
    build(n, &mut current, &mut used, &mut out);
    out
}

fn build(n: usize, current: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<(Vec<usize>, f64)>) {
    if current.len() == n {
        out.push((current.clone(), sign_by_inversions(current)));
        return;
    }
    for i in 0..n {
        if !used[i] {
            used[i] = true;
            current.push(i);
            build(n, current, used, out);
            current.pop();
            used[i] = false;
        }
    }
}

fn sign_by_inversions(p: &[usize]) -> f64 {
    let mut s = 1.0;
    for i in 0..p.len() {
        for j in i + 1..p.len() {
            if p[i] > p[j] {
                s = -s;
            }
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_and_signs() {
        for n in 1..=4 {
            let perms = permutations_with_sign(n);
            assert_eq!(perms.len(), (1..=n).product::<usize>());
            let mut seen = std::collections::HashSet::new();
            let mut total = 0.0;
            for (p, s) in &perms {
                assert!(seen.insert(p.clone()), "duplicate permutation");
                total += s;
            }
            if n > 1 {
                assert_eq!(total, 0.0);
            }
        }
        // spot checks
        let perms = permutations_with_sign(3);
        assert!(perms.contains(&(vec![0, 1, 2], 1.0)));
        assert!(perms.contains(&(vec![1, 0, 2], -1.0)));
        assert!(perms.contains(&(vec![2, 0, 1], 1.0)));
    }
}
