//! Reference computations that share no code with the library.
#![allow(dead_code)]

/// Stationary occupancy distribution of a multi-class loss system, by
/// enumerating the continuous-time Markov chain and solving `pi Q = 0`.
/// Departure rates are 1, so `loads[k]` is the class-k arrival rate.
pub fn ctmc_occupancy(sizes: &[usize], capacity: usize, loads: &[f64]) -> Vec<f64> {
    let states = enumerate_states(sizes, capacity);
    let n = states.len();
    let index = |s: &[usize]| states.iter().position(|t| t == s);

    // Transposed generator A = Q^T so that A x = 0, with the last equation
    // replaced by the normalization.
    let mut a = vec![vec![0.0; n]; n];
    for (i, s) in states.iter().enumerate() {
        let used: usize = s.iter().zip(sizes).map(|(c, w)| c * w).sum();
        for k in 0..sizes.len() {
            if used + sizes[k] <= capacity {
                let mut t = s.clone();
                t[k] += 1;
                let j = index(&t).unwrap();
                a[j][i] += loads[k];
                a[i][i] -= loads[k];
            }
            if s[k] > 0 {
                let mut t = s.clone();
                t[k] -= 1;
                let j = index(&t).unwrap();
                a[j][i] += s[k] as f64;
                a[i][i] -= s[k] as f64;
            }
        }
    }
    let mut rhs = vec![0.0; n];
    a[n - 1] = vec![1.0; n];
    rhs[n - 1] = 1.0;
    let x = solve(a, rhs);

    let mut q = vec![0.0; capacity + 1];
    for (s, p) in states.iter().zip(x) {
        let used: usize = s.iter().zip(sizes).map(|(c, w)| c * w).sum();
        q[used] += p;
    }
    q
}

fn enumerate_states(sizes: &[usize], capacity: usize) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    for &w in sizes {
        let mut next = Vec::new();
        for s in &out {
            let used: usize = s.iter().zip(sizes).map(|(c, w)| c * w).sum();
            for c in 0..=(capacity - used) / w {
                let mut t = s.clone();
                t.push(c);
                next.push(t);
            }
        }
        out = next;
    }
    out
}

/// Gaussian elimination with partial pivoting.
fn solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for col in 0..n {
        let pivot = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs())).unwrap();
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            if f != 0.0 {
                let (top, bottom) = a.split_at_mut(row);
                for (x, y) in bottom[0][col..].iter_mut().zip(&top[col][col..]) {
                    *x -= f * y;
                }
                b[row] -= f * b[col];
            }
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let s: f64 = (row + 1..n).map(|k| a[row][k] * x[k]).sum();
        x[row] = (b[row] - s) / a[row][row];
    }
    x
}

/// Erlang-B loss probability for `servers` circuits offered `load` Erlangs.
pub fn erlang_b(servers: usize, load: f64) -> f64 {
    (1..=servers).fold(1.0, |b, m| load * b / (m as f64 + load * b))
}
