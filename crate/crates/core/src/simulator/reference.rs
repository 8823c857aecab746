//! Ready-made scenarios.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::frame::MacAddr;
use crate::policy::PolicyKind;

use super::scenario::{ApSpec, ClientSpec, Injection, InjectionKind, Mobility, ScenarioSpec, Traffic};

fn mac(a: u8, b: u8) -> MacAddr {
    MacAddr([0x02, 0, 0, 0, a, b])
}

fn ap(bssid: MacAddr, ssid: &str, channel: u8, stations: u16, utilization: f64) -> ApSpec {
    ApSpec {
        bssid,
        ssid: ssid.to_owned(),
        channel,
        beacon_interval_ms: 102.4,
        phy_rate: 1.0,
        station_count: stations,
        channel_utilization: utilization,
    }
}

fn client(mac: MacAddr, policy: PolicyKind) -> ClientSpec {
    ClientSpec {
        mac,
        policy,
        mobility: Mobility::Stationary,
        associated_with: None,
        rssi_dbm: -55.0,
        traffic: None,
    }
}

/// The maintenance and wake-up causes the hourly schedule draws from.
pub fn cause_injections() -> [InjectionKind; 5] {
    [
        InjectionKind::RssiDrop { target_dbm: -80.0, slope_db_per_s: 5.0 },
        InjectionKind::BeaconOutage { duration: 3.0 },
        InjectionKind::FrameLossBurst { fraction: 0.7, duration: 5.0 },
        InjectionKind::Deauth,
        InjectionKind::PowerWake,
    ]
}

/// Nine hours, ten clients per policy, two APs. Every client is
/// unassociated for the first hour and asks to connect at its end. In each
/// later hour every modified/baseline pair receives the same cause at the
/// same random instant; each pair sees all five causes at least once.
pub fn nine_hour_comparison(seed: u64) -> ScenarioSpec {
    let pairs = 10u8;
    let hours = 9u32;
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);

    let mut clients = Vec::new();
    for i in 0..pairs {
        clients.push(client(mac(1, i), PolicyKind::Modified));
    }
    for i in 0..pairs {
        clients.push(client(mac(2, i), PolicyKind::Baseline));
    }

    let mut injections = Vec::new();
    let pair_inject = |injections: &mut Vec<Injection>, i: u8, at: f64, kind: InjectionKind| {
        for side in [1, 2] {
            injections.push(Injection { at, client: mac(side, i), kind: kind.clone() });
        }
    };
    for i in 0..pairs {
        pair_inject(&mut injections, i, 3600.0 + 2.0 * i as f64, InjectionKind::Connect { ap: None });
        let mut kinds: Vec<InjectionKind> = cause_injections().to_vec();
        kinds.shuffle(&mut rng);
        while kinds.len() < (hours - 1) as usize {
            let extra = cause_injections()[rng.gen_range(0..5)].clone();
            kinds.push(extra);
        }
        for (h, kind) in (1..hours).zip(kinds) {
            let at = ((3600.0 * h as f64 + rng.gen_range(600.0..3000.0)) * 10.0).round() / 10.0;
            pair_inject(&mut injections, i, at, kind);
        }
    }
    injections.sort_by(|a, b| a.at.total_cmp(&b.at));

    ScenarioSpec {
        duration: 3600.0 * hours as f64,
        seed,
        sniffer_drop: 0.0,
        background_scan_s: Some(180.0),
        aps: vec![
            ap(mac(0xa0, 1), "campus", 1, 12, 0.2),
            ap(mac(0xa0, 2), "campus", 6, 8, 0.15),
        ],
        clients,
        injections,
    }
}

/// A station streaming uplink data while another client floods probe
/// requests from t = 1600 s to 1900 s.
pub fn probe_flood(seed: u64) -> ScenarioSpec {
    let mut streamer = client(mac(3, 1), PolicyKind::Baseline);
    streamer.associated_with = Some(mac(0xb0, 1));
    streamer.traffic = Some(Traffic { fps: 20.0, payload_bytes: 1500, phy_rate: 54.0 });
    let flooder = client(mac(3, 2), PolicyKind::Baseline);
    ScenarioSpec {
        duration: 2400.0,
        seed,
        sniffer_drop: 0.0,
        background_scan_s: None,
        aps: vec![
            ap(mac(0xb0, 1), "office", 6, 20, 0.1),
            ap(mac(0xb0, 2), "office", 6, 14, 0.1),
            ap(mac(0xb0, 3), "guest", 6, 5, 0.1),
        ],
        clients: vec![streamer, flooder],
        injections: vec![Injection {
            at: 1600.0,
            client: mac(3, 2),
            kind: InjectionKind::ProbeFlood { rate: 200.0, duration: 300.0 },
        }],
    }
}

/// Three clients and five injections on one AP pair; small enough to ship as
/// a fixture.
pub fn fixture(seed: u64) -> ScenarioSpec {
    let a = client(mac(4, 1), PolicyKind::Baseline);
    let mut b = client(mac(4, 2), PolicyKind::Baseline);
    b.associated_with = Some(mac(0xc0, 1));
    let mut c = client(mac(4, 3), PolicyKind::Modified);
    c.associated_with = Some(mac(0xc0, 2));
    let inj = |at: f64, who: MacAddr, kind: InjectionKind| Injection { at, client: who, kind };
    ScenarioSpec {
        duration: 900.0,
        seed,
        sniffer_drop: 0.0,
        background_scan_s: Some(120.0),
        aps: vec![ap(mac(0xc0, 1), "lab", 1, 3, 0.1), ap(mac(0xc0, 2), "lab", 11, 4, 0.1)],
        clients: vec![a, b, c],
        injections: vec![
            inj(60.0, mac(4, 1), InjectionKind::Connect { ap: None }),
            inj(200.0, mac(4, 2), InjectionKind::FrameLossBurst { fraction: 0.7, duration: 5.0 }),
            inj(330.0, mac(4, 3), InjectionKind::BeaconOutage { duration: 3.0 }),
            inj(480.0, mac(4, 2), InjectionKind::Deauth),
            inj(640.0, mac(4, 1), InjectionKind::RssiDrop { target_dbm: -82.0, slope_db_per_s: 4.0 }),
        ],
    }
}
