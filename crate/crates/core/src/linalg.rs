//! Integer row reduction and Smith normal form over Z/n.

/// Echelon basis of the Z-row-span of `rows`, with pivots taken from the
/// highest column down. Each returned row has a positive leading entry in a
/// column no other returned row leads in. Any abelian group has the same
/// solution set for the returned rows as for the input.
pub fn integer_echelon_high(rows: &[Vec<i64>], ncols: usize) -> Vec<Vec<i64>> {
    let mut work: Vec<Vec<i128>> = rows
        .iter()
        .map(|r| r.iter().map(|&x| x as i128).collect())
        .filter(|r: &Vec<i128>| r.iter().any(|&x| x != 0))
        .collect();
    let mut out = Vec::new();
    for col in (0..ncols).rev() {
        loop {
            // smallest nonzero |entry| in this column among rows that lead here
            let mut best: Option<usize> = None;
            for (i, r) in work.iter().enumerate() {
                if r[col] != 0 && best.is_none_or(|b| r[col].abs() < work[b][col].abs()) {
                    best = Some(i);
                }
            }
            let Some(b) = best else { break };
            let pivot = work[b][col];
            let mut done = true;
            for i in 0..work.len() {
                if i != b && work[i][col] != 0 {
                    let q = work[i][col].div_euclid(pivot);
                    for k in 0..ncols {
                        work[i][k] -= q * work[b][k];
                    }
                    if work[i][col] != 0 {
                        done = false;
                    }
                }
            }
            if done {
                let mut row = work.swap_remove(b);
                if row[col] < 0 {
                    row.iter_mut().for_each(|x| *x = -*x);
                }
                out.push(row.into_iter().map(|x| x as i64).collect());
                work.retain(|r| r.iter().any(|&x| x != 0));
                break;
            }
        }
    }
    out
}

fn egcd(a: i128, b: i128) -> (i128, i128, i128) {
    if b == 0 {
        if a < 0 {
            (-a, -1, 0)
        } else {
            (a, 1, 0)
        }
    } else {
        let (g, x, y) = egcd(b, a.rem_euclid(b));
        (g, y, x - a.div_euclid(b) * y)
    }
}

/// Bezout coefficients that leave `a` in place when it already divides
/// `b`, so elimination cannot cycle between equal pivots.
fn bezout(a: i128, b: i128) -> (i128, i128, i128) {
    if a > 0 && b % a == 0 {
        (a, 1, 0)
    } else {
        egcd(a, b)
    }
}

pub fn gcd(a: i128, b: i128) -> i128 {
    egcd(a, b).0
}

/// D = U·M·V over Z/n with D diagonal. Row operations are applied to `rhs`
/// as well, and `V` is tracked so solutions of D·y = U·rhs give x = V·y.
pub struct Smith {
    pub modulus: i128,
    pub diag: Vec<i128>,
    /// columns × columns, row-major
    pub v: Vec<Vec<i128>>,
    pub rhs: Vec<i128>,
    /// Row operations, recorded when requested.
    pub u: Option<Vec<Vec<i128>>>,
}

/// Diagonalizes `m` (rows × cols) modulo `n` with unimodular integer row
/// and column operations.
pub fn smith_mod(m: &[Vec<i128>], cols: usize, n: i128, rhs: &[i128], track_u: bool) -> Smith {
    let rows = m.len();
    let mut a: Vec<Vec<i128>> = m.iter().map(|r| r.iter().map(|&x| x.rem_euclid(n)).collect()).collect();
    let mut b: Vec<i128> = rhs.iter().map(|&x| x.rem_euclid(n)).collect();
    let mut v: Vec<Vec<i128>> = (0..cols).map(|i| (0..cols).map(|j| (i == j) as i128).collect()).collect();
    let mut u: Option<Vec<Vec<i128>>> =
        track_u.then(|| (0..rows).map(|i| (0..rows).map(|j| (i == j) as i128).collect()).collect());
    let md = |x: i128| x.rem_euclid(n);
    let rank_limit = rows.min(cols);
    let mut diag = Vec::new();
    for t in 0..rank_limit {
        // pick any nonzero entry in the remaining block
        let mut pos = None;
        'find: for i in t..rows {
            for j in t..cols {
                if a[i][j] != 0 {
                    pos = Some((i, j));
                    break 'find;
                }
            }
        }
        let Some((pi, pj)) = pos else { break };
        a.swap(t, pi);
        b.swap(t, pi);
        if let Some(u) = u.as_mut() {
            u.swap(t, pi);
        }
        for r in a.iter_mut() {
            r.swap(t, pj);
        }
        for r in v.iter_mut() {
            r.swap(t, pj);
        }
        loop {
            let mut changed = false;
            // clear column t below the pivot with 2×2 Bezout row operations
            for i in t + 1..rows {
                if a[i][t] == 0 {
                    continue;
                }
                let (g, x, y) = bezout(a[t][t], a[i][t]);
                let (p, q) = (a[t][t] / g, a[i][t] / g);
                for k in 0..cols {
                    let (rt, ri) = (a[t][k], a[i][k]);
                    a[t][k] = md(x * rt + y * ri);
                    a[i][k] = md(-q * rt + p * ri);
                }
                let (rt, ri) = (b[t], b[i]);
                b[t] = md(x * rt + y * ri);
                b[i] = md(-q * rt + p * ri);
                if let Some(u) = u.as_mut() {
                    for k in 0..rows {
                        let (rt, ri) = (u[t][k], u[i][k]);
                        u[t][k] = md(x * rt + y * ri);
                        u[i][k] = md(-q * rt + p * ri);
                    }
                }
                changed = true;
            }
            // clear row t right of the pivot with column operations
            for j in t + 1..cols {
                if a[t][j] == 0 {
                    continue;
                }
                let (g, x, y) = bezout(a[t][t], a[t][j]);
                let (p, q) = (a[t][t] / g, a[t][j] / g);
                for k in 0..rows {
                    let (ct, cj) = (a[k][t], a[k][j]);
                    a[k][t] = md(x * ct + y * cj);
                    a[k][j] = md(-q * ct + p * cj);
                }
                for k in 0..cols {
                    let (ct, cj) = (v[k][t], v[k][j]);
                    v[k][t] = md(x * ct + y * cj);
                    v[k][j] = md(-q * ct + p * cj);
                }
                changed = true;
            }
            if !changed {
                break;
            }
        }
        if a[t][t] == 0 {
            break;
        }
        diag.push(a[t][t]);
    }
    Smith { modulus: n, diag, v, rhs: b, u }
}
