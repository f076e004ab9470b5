//! Order-preserving map over independent work items, on a thread pool when
//! the `parallel` feature is enabled.

/// Applies `f` to every item and returns the results in input order.
///
/// `threads` caps the worker count; `None` uses the default pool.
#[cfg(feature = "parallel")]
pub fn par_map<T, R, F>(items: Vec<T>, threads: Option<usize>, f: F) -> Vec<R>
where
    T: Send,
    R: Send,
    F: Fn(T) -> R + Sync + Send,
{
    use rayon::prelude::*;

    let run = || items.into_par_iter().map(&f).collect();
    match threads {
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(run),
            Err(_) => run(),
        },
        None => run(),
    }
}

#[cfg(not(feature = "parallel"))]
pub fn par_map<T, R, F>(items: Vec<T>, _threads: Option<usize>, f: F) -> Vec<R>
where
    F: Fn(T) -> R,
{
    items.into_iter().map(f).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn keeps_input_order() {
        let out = par_map((0..1000).collect(), Some(4), |x: u64| x * x);
        assert_eq!(out, (0..1000).map(|x| x * x).collect::<Vec<_>>());
        assert_eq!(par_map(vec![3, 1], Some(1), |x: i32| -x), vec![-3, -1]);
    }
}
