//! Iteration of maps on finite sets.

/// Preperiod and period of `x` under `f`.
pub fn orbit_shape(f: &[usize], x: usize) -> (usize, usize) {
    let mut seen = vec![usize::MAX; f.len()];
    let mut cur = x;
    let mut step = 0;
    while seen[cur] == usize::MAX {
        seen[cur] = step;
        cur = f[cur];
        step += 1;
    }
    (seen[cur], step - seen[cur])
}

pub fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

pub fn lcm(a: usize, b: usize) -> usize {
    a / gcd(a, b) * b
}

/// Smallest `K ≥ 1` such that `f^K` maps every point to a fixed point of `f^K`,
/// simultaneously for all maps.
pub fn straightening_exponent(maps: &[&[usize]]) -> usize {
    let mut period = 1;
    let mut pre = 0;
    for f in maps {
        for x in 0..f.len() {
            let (p, c) = orbit_shape(f, x);
            period = lcm(period, c);
            pre = pre.max(p);
        }
    }
    let mut k = period;
    while k < pre {
        k += period;
    }
    k
}

/// `f^k(x)`.
pub fn iterate(f: &[usize], x: usize, k: usize) -> usize {
    (0..k).fold(x, |y, _| f[y])
}

/// Symbols whose iterated images grow without bound, for a map sending
/// symbols to nonempty words.
///
/// Image lengths never decrease, so a symbol grows iff the letter sets on the
/// periodic part of its set-orbit contain a symbol with an image of length ≥ 2.
pub fn growing_symbols(images: &[Vec<usize>]) -> Vec<bool> {
    let n = images.len();
    let step = |set: &Vec<bool>| {
        let mut out = vec![false; n];
        for (a, &inside) in set.iter().enumerate() {
            if inside {
                for &b in &images[a] {
                    out[b] = true;
                }
            }
        }
        out
    };
    (0..n)
        .map(|a| {
            let mut start = vec![false; n];
            start[a] = true;
            let mut history = vec![start];
            loop {
                let next = step(history.last().unwrap());
                if let Some(pos) = history.iter().position(|s| *s == next) {
                    return history[pos..]
                        .iter()
                        .any(|s| s.iter().enumerate().any(|(c, &b)| b && images[c].len() >= 2));
                }
                history.push(next);
            }
        })
        .collect()
}
