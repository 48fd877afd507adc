use dpe_core::agents::{comm_schedule, MessageDecoder, Swap};
use dpe_core::harness::{run_initialization, run_seed, Algorithm, Config};
use dpe_core::ArmMeans;

fn instance(algo: Algorithm, horizon: u64) -> Config {
    Config::new(vec![0.9, 0.8, 0.7, 0.6, 0.5, 0.4], 3, horizon, algo).unwrap()
}

#[test]
fn initialization_over_many_seeds() {
    let means = ArmMeans::new(vec![0.5, 0.4, 0.3, 0.2, 0.1]).unwrap();
    for seed in 0..10_000 {
        let r = run_initialization(&means, 3, seed, 1_000_000);
        assert!(r.duration.is_some(), "seed {seed}");
        assert!(r.is_consistent(5, 3), "seed {seed}: {r:?}");
    }
}

#[test]
fn lone_player_initializes_in_first_block() {
    let means = ArmMeans::new(vec![0.5, 0.4, 0.3]).unwrap();
    for seed in 0..100 {
        let r = run_initialization(&means, 1, seed, 1_000);
        let out = r.outcomes[0].unwrap();
        assert_eq!((out.rank, out.num_players), (1, 1));
        // one orthogonalization block plus K-1 rank blocks of K-1 rounds
        assert_eq!(r.duration, Some(4 + 2 * 2));
    }
}

#[test]
fn runs_are_deterministic() {
    let c = instance(Algorithm::Dpe, 30_000);
    let a = run_seed(&c, 0, 42);
    let b = run_seed(&c, 0, 42);
    assert_eq!(a.rows, b.rows);
    assert_eq!(a.final_pulls, b.final_pulls);
    assert_ne!(a.rows, run_seed(&c, 0, 43).rows);
}

#[test]
fn dpe_bookkeeping_is_consistent() {
    let c = instance(Algorithm::Dpe, 50_000);
    for seed in 1..=8 {
        let r = run_seed(&c, 0, seed);
        assert_eq!(r.fault, None, "seed {seed}");
        assert_eq!(r.steady.collided, 0, "seed {seed}");
        for w in r.rows.windows(2) {
            assert!(w[0].t < w[1].t);
            assert!(w[0].cum_regret_zeroed <= w[1].cum_regret_zeroed);
            assert!(w[0].comm_phases <= w[1].comm_phases);
            assert!(w[0].collisions <= w[1].collisions);
        }
        for (row, counters) in r.rows.iter().zip(&r.counters) {
            // one sub-block of M+K+1 rounds per follower
            assert!(row.comm_rounds <= row.comm_phases * 2 * 10);
            assert!(row.comm_rounds + 20 > row.comm_phases * 2 * 10 || row.comm_phases == 0);
            assert!(row.comm_phases <= 2 * counters.tally_a.max(1));
            assert!(row.cum_regret_zeroed >= 0.0);
        }
        let last = r.rows.last().unwrap();
        assert!(last.set_changes <= last.comm_phases);
    }
}

#[test]
fn oracle_zero_and_centralized_explores_in_proportion() {
    let oracle = run_seed(&instance(Algorithm::Oracle, 10_000), 0, 1);
    assert!(oracle.rows.iter().all(|r| r.cum_regret_zeroed == 0.0));

    let c = run_seed(&instance(Algorithm::Centralized, 200_000), 0, 1);
    let pulls = &c.final_pulls;
    // suboptimal arms are pulled rarely, and less as their mean drops
    assert!(pulls[3] < 20_000 && pulls[5] < pulls[3] * 3, "{pulls:?}");
    assert!(pulls[0..3].iter().all(|&p| p > 150_000), "{pulls:?}");
}

#[test]
fn codec_round_trip_through_the_schedule() {
    for m in 2..=4usize {
        for k in m + 1..=7 {
            let plan = comm_schedule(m, k, 100, Swap { leaving_slot: m, entering_arm: k }).unwrap();
            for rank in 2..=m {
                let hits = plan.phase_offsets(rank);
                let mut dec = MessageDecoder::open(100 + hits[0] - 1, rank, m, k);
                let mut got = None;
                for t in 100 + hits[0]..=dec.phase_end() {
                    if let Some(s) = dec.observe(t, hits.contains(&(t - 100 + 1))).unwrap() {
                        got = Some(s);
                    }
                }
                assert_eq!(got, Some(plan.swap), "M={m} K={k} rank={rank}");
            }
        }
    }
}

#[test]
fn leader_ignores_rewards_during_communication() {
    use dpe_core::agents::LeaderState;
    use dpe_core::rng::stream;
    use dpe_core::Feedback;
    use rand::Rng;

    let means = [0.3, 0.4, 0.8, 0.7, 0.2];
    let mut full = LeaderState::new(3, 5, 1e-9);
    let mut excised = full.clone();
    let (mut ra, mut rb) = (stream(9, 1), stream(9, 1));
    let mut draws = stream(9, 0);
    for t in 1..=5_000 {
        let a = full.select(t, &mut ra).unwrap();
        let b = excised.select(t, &mut rb).unwrap();
        assert_eq!(a, b, "round {t}");
        let fb = Feedback::reward(u8::from(draws.random::<f64>() < means[a - 1]));
        full.observe(t, &fb);
        if !excised.communicating_at(t) {
            excised.observe(t, &fb);
        }
        assert_eq!(full.stats(), excised.stats(), "round {t}");
    }
    assert!(full.phases() > 0);
}

#[test]
fn centralized_pulls_track_the_log_rate() {
    use dpe_core::index::{exploration_rate, kl_bernoulli};

    let mut c = instance(Algorithm::Centralized, 1_000_000);
    c.checkpoints = vec![1_000_000];
    let seeds = 1..=4u64;
    let n = seeds.clone().count() as f64;
    let mut avg = [0.0; 6];
    for seed in seeds {
        let r = run_seed(&c, 0, seed);
        for (a, &p) in avg.iter_mut().zip(&r.final_pulls) {
            *a += p as f64 / n;
        }
    }
    let f = exploration_rate(1_000_000);
    for k in 4..=6 {
        let target = f / kl_bernoulli(c.means.mean(k), 0.7).unwrap();
        let ratio = avg[k - 1] / target;
        assert!((1.0 / 3.0..=3.0).contains(&ratio), "arm {k}: {} vs {target}", avg[k - 1]);
    }
}
