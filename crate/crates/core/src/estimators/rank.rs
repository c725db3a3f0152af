use crate::perm::Permutation;

/// Indices that sort `v` ascending; ties keep their original order.
pub fn argsort(v: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..v.len()).collect();
    idx.sort_by(|&i, &j| v[i].total_cmp(&v[j]).then(i.cmp(&j)));
    idx
}

/// The permutation `Π` for which `Π b` has the same ordering as `y`: the
/// `k`-th smallest entry of `b` is placed where the `k`-th smallest entry of
/// `y` sits. This minimizes `||y - Π b||²` over all permutations.
pub fn rank_match(y: &[f64], b: &[f64]) -> Permutation {
    assert_eq!(y.len(), b.len(), "rank matching needs equal lengths");
    let oy = argsort(y);
    let ob = argsort(b);
    let mut map = vec![0; y.len()];
    for (&iy, &ib) in oy.iter().zip(&ob) {
        map[iy] = ib;
    }
    Permutation::from_map_unchecked(map)
}
