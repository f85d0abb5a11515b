/// Generalized advantage estimation over one batch.
///
/// `next_values[t]` is `V(s_{t+1})`; for a time-limit cut it is the value of the
/// final observation. `terminals[t]` drops that bootstrap, `episode_ends[t]`
/// stops the backward recursion. The step after the last index is treated as
/// having zero advantage.
///
/// Returns `(advantages, returns)` with `returns = advantages + values`.
pub fn compute_gae(
    rewards: &[f64],
    values: &[f64],
    next_values: &[f64],
    terminals: &[bool],
    episode_ends: &[bool],
    gamma: f64,
    lambda: f64,
) -> (Vec<f64>, Vec<f64>) {
    let n = rewards.len();
    assert!(
        values.len() == n && next_values.len() == n && terminals.len() == n && episode_ends.len() == n,
        "gae inputs differ in length"
    );
    let mut adv = vec![0.0; n];
    let mut next_adv = 0.0;
    for t in (0..n).rev() {
        let bootstrap = if terminals[t] { 0.0 } else { gamma * next_values[t] };
        let delta = rewards[t] + bootstrap - values[t];
        let carry = if episode_ends[t] { 0.0 } else { gamma * lambda * next_adv };
        adv[t] = delta + carry;
        next_adv = adv[t];
    }
    let returns = adv.iter().zip(values).map(|(a, v)| a + v).collect();
    (adv, returns)
}

/// The textbook form: `values` has one extra trailing bootstrap entry and a
/// `done` flag both masks the bootstrap and cuts the recursion.
pub fn compute_gae_from_dones(
    rewards: &[f64],
    values: &[f64],
    dones: &[bool],
    gamma: f64,
    lambda: f64,
) -> (Vec<f64>, Vec<f64>) {
    let n = rewards.len();
    assert_eq!(values.len(), n + 1, "values need a trailing bootstrap entry");
    compute_gae(rewards, &values[..n], &values[1..], dones, dones, gamma, lambda)
}
