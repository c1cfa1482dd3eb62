use freshlink_cli::config::{parse_sim_config, render_sim_config};
use freshlink_core::aoi::Duration;
use freshlink_core::leader::LeaderConfig;
use freshlink_core::sim::{Generation, QueueKind, SimConfig, System, TrackingConfig};
use freshlink_core::PolicyKind;
use proptest::prelude::*;

fn micros(lo: i64, hi: i64) -> impl Strategy<Value = Duration> {
    (lo..hi).prop_map(Duration::from_micros)
}

fn tracking() -> impl Strategy<Value = Option<TrackingConfig>> {
    let t = (
        (0.1f64..100.0, 0.1f64..100.0, 0.0f64..10.0, 0.0f64..5.0),
        (micros(1, 10_000_000), 0.0f64..=1.0, 0.0f64..5.0, -10.0f64..10.0),
        (micros(1, 100_000), 0usize..100_000, any::<bool>()),
    )
        .prop_map(|((ax, ay, fov, tms), (rp, pp, fms, alt), (step, frame, closed))| TrackingConfig {
            arena: [ax, ay],
            fov_radius: fov,
            target_max_speed: tms,
            resample_period: rp,
            pause_prob: pp,
            follower_max_speed: fms,
            altitude: alt,
            sample_step: step,
            frame_bytes: frame,
            closed_loop: closed,
        });
    proptest::option::of(t)
}

fn config() -> impl Strategy<Value = SimConfig> {
    (1u16..12).prop_flat_map(|n| {
        let losses = prop_oneof![
            proptest::collection::vec(0.0f64..=1.0, 1),
            proptest::collection::vec(0.0f64..=1.0, n as usize)
        ];
        let offsets = prop_oneof![
            Just(Vec::new()),
            proptest::collection::vec(micros(-5_000_000, 5_000_000), n as usize)
        ];
        (
            (any::<u64>(), micros(1, 1_000_000_000), losses.clone(), losses, offsets),
            (micros(0, 100_000), micros(0, 100_000), 1e3f64..1e9, micros(0, 10_000)),
            (0.1f64..500.0, 0usize..100_000, any::<bool>(), 1usize..500, any::<bool>(), 1000usize..=65535),
            (
                prop_oneof![
                    Just(PolicyKind::Whittle),
                    Just(PolicyKind::MaxAge),
                    Just(PolicyKind::RoundRobin),
                    Just(PolicyKind::Random)
                ],
                micros(1, 5_000_000),
                1usize..500,
                0.001f64..=1.0,
                micros(1, 1_000_000_000),
                0u32..10,
                0.0f64..=1.0,
            ),
            (micros(1, 10_000_000), 1usize..=255, any::<bool>(), 0.0f64..=1.0, proptest::option::of(micros(1, 100_000))),
            (any::<bool>(), any::<bool>(), tracking()),
        )
            .prop_map(move |(sim, net, traffic, leader, more, (ra, on_poll, tracking))| {
                let (seed, duration, uplink_loss, downlink_loss, clock_offsets) = sim;
                let (uplink_latency, downlink_latency, bitrate_bps, turnaround) = net;
                let (rate_fps, payload_bytes, fifo, capacity, rate_control, max_payload) = traffic;
                let (policy, timeout, window, p_floor, sync_period, sync_retries, alpha) = leader;
                let (waypoint_horizon, waypoint_count, sticky_update, transmit_prob, slot) = more;
                SimConfig {
                    seed,
                    duration,
                    n,
                    system: if ra { System::RandomAccess } else { System::Polling },
                    uplink_loss,
                    downlink_loss,
                    uplink_latency,
                    downlink_latency,
                    bitrate_bps,
                    turnaround,
                    clock_offsets,
                    rate_fps,
                    payload_bytes,
                    queue: if fifo { QueueKind::Fifo } else { QueueKind::Lifo },
                    capacity,
                    rate_control,
                    max_payload,
                    generation: if on_poll && !ra { Generation::OnPoll } else { Generation::Periodic },
                    leader: LeaderConfig {
                        timeout,
                        window,
                        p_floor,
                        policy,
                        sync_period,
                        sync_retries,
                        alpha,
                        waypoint_horizon,
                        waypoint_count,
                        sticky_update,
                        ..LeaderConfig::default()
                    },
                    slot,
                    transmit_prob,
                    tracking,
                }
            })
    })
}

proptest! {
    #[test]
    fn parse_inverts_render(c in config()) {
        prop_assume!(c.validate().is_ok());
        let text = render_sim_config(&c);
        prop_assert_eq!(parse_sim_config(&text, &[]).unwrap(), c);
    }
}
