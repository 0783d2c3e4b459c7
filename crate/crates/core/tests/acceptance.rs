//! Acceptance suite: one line per criterion, nonzero exit if any fails.
//!
//! Run with `cargo test -p biomow-core --test acceptance`.

use std::collections::VecDeque;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use biomow_core::lawnsim::{Scenario, SimConfig, ThresholdConfig, WorldConfig, GRASS};
use biomow_core::policy::self_excluded_densities;
use biomow_core::store_io::{decode_embeddings, encode_embeddings, FormatError};
use biomow_core::{
    calibrate_threshold, decide, global_deviation, knn_density, knn_query, process_frame,
    DensityParams64, Embedding64, SequenceId, Store64, Threshold64, Verdict,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

type Outcome = Result<String, String>;

struct Criterion {
    name: &'static str,
    budget: Duration,
    run: fn() -> Outcome,
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn random_embedding(rng: &mut ChaCha8Rng, d: usize, scale: f64) -> Embedding64 {
    Embedding64::new((0..d).map(|_| rng.random_range(-scale..scale)).collect()).unwrap()
}

fn rel_err(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / a.abs().max(b.abs())
    }
}

/// kNN and density against a full distance matrix with a complete sort.
fn knn_oracle_equivalence() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0xA11CE);
    let dims = [2, 16, 64];
    let ks = [1, 5, 10];
    let eps = 1e-8;
    let mut worst = 0.0f64;
    for instance in 0..1000 {
        let d = dims[instance % 3];
        let k = ks[(instance / 3) % 3];
        let n = rng.random_range((k + 1)..=500);
        let points: Vec<Embedding64> = (0..n).map(|_| random_embedding(&mut rng, d, 1.0)).collect();
        let store = Store64::from_embeddings(points.clone()).unwrap();
        // alternate between scoring a store member (self-excluded) and a fresh point
        let (query, exclude) = if instance % 2 == 0 {
            let i = rng.random_range(0..n);
            (points[i].clone(), Some(i))
        } else {
            (random_embedding(&mut rng, d, 1.0), None)
        };
        let mut matrix = vec![vec![0.0f64; n]; n + 1];
        let all: Vec<&Embedding64> = points.iter().chain(std::iter::once(&query)).collect();
        for (i, a) in all.iter().enumerate() {
            for (j, b) in points.iter().enumerate() {
                matrix[i][j] = a
                    .as_slice()
                    .iter()
                    .zip(b.as_slice())
                    .map(|(x, y)| (x - y) * (x - y))
                    .sum::<f64>()
                    .sqrt();
            }
        }
        let row = &matrix[exclude.unwrap_or(n)];
        let mut ranked: Vec<(usize, f64)> = (0..n)
            .filter(|&j| Some(j) != exclude)
            .map(|j| (j, row[j]))
            .collect();
        ranked.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
        ranked.truncate(k);
        let want_density = k as f64 / (ranked.iter().map(|r| r.1).sum::<f64>() + eps);

        let exclude_id = exclude.map(|i| SequenceId(i as u64));
        let got = knn_query(&store, &query, k, exclude_id).map_err(|e| e.to_string())?;
        let mut got_ids: Vec<u64> = got.ids().map(|i| i.0).collect();
        let mut want_ids: Vec<u64> = ranked.iter().map(|r| r.0 as u64).collect();
        got_ids.sort_unstable();
        want_ids.sort_unstable();
        ensure(got_ids == want_ids, || {
            format!("instance {instance}: id sets differ")
        })?;
        for (g, w) in got.as_slice().iter().zip(&ranked) {
            let e = rel_err(g.distance, w.1);
            worst = worst.max(e);
            ensure(e <= 1e-9, || {
                format!("instance {instance}: distance rel err {e:e}")
            })?;
        }
        let params = DensityParams64::new(k, eps).unwrap();
        let density =
            knn_density(&store, &query, &params, exclude_id).map_err(|e| e.to_string())?;
        let e = rel_err(density, want_density);
        worst = worst.max(e);
        ensure(e <= 1e-9, || {
            format!("instance {instance}: density rel err {e:e}")
        })?;
    }
    Ok(format!(
        "1000 instances, id sets exact, worst rel err {worst:.1e}"
    ))
}

fn sigma_property_suite() -> Outcome {
    let hand = global_deviation(&[
        Embedding64::new(vec![-1.0, 0.0]).unwrap(),
        Embedding64::new(vec![1.0, 0.0]).unwrap(),
    ])
    .unwrap();
    ensure(hand == 1.0, || format!("hand example gave {hand}"))?;

    let mut rng = ChaCha8Rng::seed_from_u64(0x51D);
    let mut worst = 0.0f64;
    for instance in 0..500 {
        let n = rng.random_range(1..60);
        let d = rng.random_range(1..32);
        let pts: Vec<Embedding64> = (0..n)
            .map(|_| random_embedding(&mut rng, d, 10.0))
            .collect();
        let sigma = global_deviation(&pts).unwrap();

        // zero law, both directions
        let copies = vec![pts[0].clone(); n];
        ensure(global_deviation(&copies).unwrap() == 0.0, || {
            format!("instance {instance}: identical points gave nonzero deviation")
        })?;
        let distinct = pts.iter().any(|p| p != &pts[0]);
        ensure((sigma == 0.0) == !distinct, || {
            format!("instance {instance}: zero law violated (sigma {sigma})")
        })?;

        let shift: Vec<f64> = (0..d).map(|_| rng.random_range(-50.0..50.0)).collect();
        let shifted: Vec<Embedding64> = pts
            .iter()
            .map(|p| {
                Embedding64::new(
                    p.as_slice()
                        .iter()
                        .zip(&shift)
                        .map(|(x, s)| x + s)
                        .collect(),
                )
                .unwrap()
            })
            .collect();
        let e = rel_err(global_deviation(&shifted).unwrap(), sigma);
        worst = worst.max(e);
        ensure(e <= 1e-9, || {
            format!("instance {instance}: translation rel err {e:e}")
        })?;

        let c = if instance % 50 == 0 {
            0.0
        } else {
            rng.random_range(0.0..20.0)
        };
        let scaled: Vec<Embedding64> = pts
            .iter()
            .map(|p| Embedding64::new(p.as_slice().iter().map(|x| x * c).collect()).unwrap())
            .collect();
        let got = global_deviation(&scaled).unwrap();
        let e = rel_err(got, c * sigma);
        worst = worst.max(e);
        ensure(e <= 1e-9, || {
            format!("instance {instance}: scale rel err {e:e} (c = {c})")
        })?;
    }
    Ok(format!(
        "500 instances + hand example exact, worst rel err {worst:.1e}"
    ))
}

fn calibration_coverage() -> Outcome {
    let params = DensityParams64::default();
    let mut lines = Vec::new();
    for (i, &size) in [200usize, 500, 1000].iter().enumerate() {
        let config = SimConfig {
            seed: 100 + i as u64,
            ..SimConfig::default()
        };
        let mut scenario = Scenario::from_config(&config).unwrap();
        let store = scenario.patrol(size).map_err(|e| e.to_string())?;
        let densities = self_excluded_densities(&store, &params).map_err(|e| e.to_string())?;
        for q in [0.1, 0.2, 0.5] {
            let tau = calibrate_threshold(&densities, q).map_err(|e| e.to_string())?;
            // re-score every patrol point against the others
            let spared = store
                .entries()
                .filter(|e| {
                    let rho = knn_density(&store, &e.embedding, &params, Some(e.id)).unwrap();
                    decide(rho, &tau) == Verdict::Spare
                })
                .count();
            let rate = spared as f64 / size as f64;
            ensure((rate - q).abs() <= 0.02, || {
                format!("N={size} q={q}: spare rate {rate:.4}")
            })?;
            lines.push(format!("{size}/{q}:{rate:.3}"));
        }
    }
    Ok(format!("spare rates {}", lines.join(" ")))
}

fn fifo_replay() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0xF1F0);
    let capacity = 100;
    let d = 8;
    let mut store =
        Store64::from_embeddings((0..capacity).map(|_| random_embedding(&mut rng, d, 1.0)))
            .unwrap();
    let mut queue: VecDeque<u64> = (0..capacity as u64).collect();
    let params = DensityParams64::default();
    let threshold = Threshold64::manual(1.0).unwrap();
    for call in 0..10_000u64 {
        let expected_evicted = queue.pop_front().unwrap();
        queue.push_back(capacity as u64 + call);
        let oldest = store.ids().next().unwrap().0;
        let record = process_frame(
            &mut store,
            random_embedding(&mut rng, d, 1.0),
            &params,
            &threshold,
        )
        .map_err(|e| e.to_string())?;
        ensure(
            oldest == expected_evicted && store.get(SequenceId(oldest)).is_none(),
            || format!("call {call}: evicted {oldest}, oracle expected {expected_evicted}"),
        )?;
        ensure(store.len() == capacity, || {
            format!("call {call}: count {}", store.len())
        })?;
        ensure(record.store_revision == call + 1, || {
            format!("call {call}: revision")
        })?;
        ensure(store.ids().map(|i| i.0).eq(queue.iter().copied()), || {
            format!("call {call}: store ids diverge from queue")
        })?;
    }
    Ok("10000 calls, eviction order and count match the queue oracle".into())
}

fn mockup_config(seed: u64) -> SimConfig {
    let mut c = SimConfig {
        seed,
        ..SimConfig::default()
    };
    c.world = WorldConfig::MockUp {
        flower_fraction: 0.1,
    };
    // artificial turf and plastic flowers do not change
    c.dynamics.mow_pressure = 0.0;
    c.dynamics.diversification_rate = 0.0;
    c.embedder.dim = 64;
    c.policy.k = 10;
    c.policy.threshold = ThresholdConfig::Quantile(0.2);
    c.schedule.cycles = 1;
    c
}

fn mockup_reproduction() -> Outcome {
    let mut gaps = Vec::new();
    for seed in 0..5 {
        let mut scenario = Scenario::from_config(&mockup_config(seed)).unwrap();
        let initial = scenario.grid.clone();
        let report = scenario.run_season().map_err(|e| e.to_string())?;
        let is_flower = |i: usize| initial.cells()[i].abundance[GRASS] < 1.0;
        let flower = report
            .spare_rate_where(is_flower)
            .ok_or("no flower visits")?;
        let grass = report
            .spare_rate_where(|i| !is_flower(i))
            .ok_or("no grass visits")?;
        let gap = flower - grass;
        ensure(gap >= 0.5, || {
            format!("seed {seed}: flower spare {flower:.3} vs grass {grass:.3}")
        })?;
        gaps.push(format!("{gap:.2}"));
    }
    Ok(format!(
        "flower-minus-grass spare gap per seed: {}",
        gaps.join(" ")
    ))
}

fn seasonal_direction() -> Outcome {
    let mut wins = 0;
    let mut improvements = Vec::new();
    for seed in 0..10 {
        let mut config = SimConfig {
            seed,
            ..SimConfig::default()
        };
        config.policy.threshold = ThresholdConfig::Quantile(0.2);
        let selective = Scenario::from_config(&config)
            .unwrap()
            .run_season()
            .map_err(|e| e.to_string())?;
        config.policy.threshold = ThresholdConfig::Tau(0.0);
        let baseline = Scenario::from_config(&config)
            .unwrap()
            .run_season()
            .map_err(|e| e.to_string())?;
        let (s, b) = (
            selective.final_mean_shannon(),
            baseline.final_mean_shannon(),
        );
        if s > b {
            wins += 1;
        }
        improvements.push((s - b) / b);
    }
    improvements.sort_by(f64::total_cmp);
    let median = (improvements[4] + improvements[5]) / 2.0;
    ensure(wins >= 9, || {
        format!("selective ahead in only {wins}/10 pairs")
    })?;
    ensure(median >= 0.10, || {
        format!("median relative improvement {median:.4}")
    })?;
    Ok(format!(
        "selective ahead in {wins}/10 pairs, median improvement {:.1}%",
        median * 100.0
    ))
}

/// Deterministic matrix independent of any RNG crate: SplitMix64 bits mapped to [-8, 8).
fn golden_matrix() -> Vec<Embedding64> {
    let mut state = 20240601u64;
    let mut next = || {
        state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    };
    (0..7)
        .map(|_| {
            Embedding64::new(
                (0..5)
                    .map(|_| (next() >> 40) as f64 / (1u64 << 20) as f64 - 8.0)
                    .collect(),
            )
            .unwrap()
        })
        .collect()
}

const GOLDEN_SHA256: &str = "121776b134a2acf847a0febbfa891790455df217387f19274403f4c5a0d1eed1";

fn format_golden() -> Outcome {
    let matrix = golden_matrix();
    let bytes = encode_embeddings(&matrix).map_err(|e| e.to_string())?;
    // independent assembly of the layout
    let mut expected = b"BIOBOTEM".to_vec();
    expected.extend_from_slice(&1u32.to_le_bytes());
    expected.extend_from_slice(&5u32.to_le_bytes());
    expected.extend_from_slice(&7u64.to_le_bytes());
    for row in &matrix {
        for v in row.as_slice() {
            expected.extend_from_slice(&(*v as f32).to_le_bytes());
        }
    }
    ensure(bytes == expected, || {
        "encoded bytes differ from hand-assembled layout".into()
    })?;
    let digest = hex::encode(Sha256::digest(&bytes));
    ensure(digest == GOLDEN_SHA256, || format!("sha256 {digest}"))?;
    ensure(encode_embeddings(&matrix).unwrap() == bytes, || {
        "write not deterministic".into()
    })?;

    let decode = |b: &[u8]| decode_embeddings::<f64>(b);
    let mut bad = bytes.clone();
    bad[3] ^= 0xFF;
    ensure(
        matches!(decode(&bad), Err(FormatError::BadMagic(_))),
        || "bad magic not caught".into(),
    )?;
    let mut bad = bytes.clone();
    bad[8] = 9;
    ensure(
        matches!(decode(&bad), Err(FormatError::UnsupportedVersion(9))),
        || "version not caught".into(),
    )?;
    ensure(
        matches!(
            decode(&bytes[..bytes.len() - 3]),
            Err(FormatError::TruncatedPayload { .. })
        ),
        || "truncation not caught".into(),
    )?;
    ensure(
        matches!(
            decode(&bytes[..20]),
            Err(FormatError::TruncatedPayload { .. })
        ),
        || "short header not caught".into(),
    )?;
    let mut bad = bytes.clone();
    bad.extend_from_slice(&[0, 0]);
    ensure(
        matches!(decode(&bad), Err(FormatError::TrailingBytes(2))),
        || "trailing bytes not caught".into(),
    )?;
    let mut bad = bytes.clone();
    bad[24 + 4 * 6..24 + 4 * 7].copy_from_slice(&f32::INFINITY.to_le_bytes());
    ensure(
        matches!(
            decode(&bad),
            Err(FormatError::NonFiniteValue { row: 1, col: 1 })
        ),
        || "non-finite payload not caught".into(),
    )?;
    Ok(format!(
        "sha256 {}..., 6 malformed cases rejected",
        &digest[..16]
    ))
}

fn main() -> ExitCode {
    let criteria = [
        Criterion {
            name: "knn/density oracle equivalence",
            budget: Duration::from_secs(30),
            run: knn_oracle_equivalence,
        },
        Criterion {
            name: "sigma_D property suite",
            budget: Duration::from_secs(5),
            run: sigma_property_suite,
        },
        Criterion {
            name: "calibration coverage",
            budget: Duration::from_secs(30),
            run: calibration_coverage,
        },
        Criterion {
            name: "FIFO replacement replay",
            budget: Duration::from_secs(10),
            run: fifo_replay,
        },
        Criterion {
            name: "mock-up reproduction",
            budget: Duration::from_secs(60),
            run: mockup_reproduction,
        },
        Criterion {
            name: "seasonal diversity direction",
            budget: Duration::from_secs(300),
            run: seasonal_direction,
        },
        Criterion {
            name: "format golden files",
            budget: Duration::from_secs(5),
            run: format_golden,
        },
    ];
    let mut failures = 0;
    for c in &criteria {
        let start = Instant::now();
        let outcome = (c.run)();
        let elapsed = start.elapsed();
        let outcome = outcome.and_then(|detail| {
            if elapsed <= c.budget {
                Ok(detail)
            } else {
                Err(format!(
                    "{detail}; took {elapsed:.2?}, budget {:?}",
                    c.budget
                ))
            }
        });
        match outcome {
            Ok(detail) => println!("PASS  {:<32} {detail} ({elapsed:.2?})", c.name),
            Err(why) => {
                failures += 1;
                println!("FAIL  {:<32} {why} ({elapsed:.2?})", c.name);
            }
        }
    }
    println!(
        "{} of {} acceptance criteria passed",
        criteria.len() - failures,
        criteria.len()
    );
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
