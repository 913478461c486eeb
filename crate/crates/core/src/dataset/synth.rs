// SPDX-License-Identifier: Apache-2.0

//! Synthetic datasets with known geography.
//!
//! Users live in Gaussian clusters around random city centres. Each user
//! writes a few cluster-specific marker words and emits @-mentions that stay
//! inside the cluster with probability `p_local`. Planted celebrities are
//! outside handles mentioned by a fixed number of users drawn from the whole
//! map, so their collapsed edges carry no location signal.

use std::collections::HashMap;

use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::{Dataset, GeoPoint, Split, UserRecord};
use crate::config::KeyValues;
use crate::error::{Error, Result};
use crate::eval::haversine_km;

const SYLLABLES: [&str; 20] = [
    "ka", "lo", "mi", "ter", "van", "su", "rek", "po", "din", "ga", "bel", "shu", "ro", "na", "qui", "zet",
    "fa", "mor", "ly", "tox",
];

const FILLER: [&str; 12] = [
    "the", "and", "good", "day", "today", "going", "time", "love", "new", "just", "really", "lol",
];

/// Generator settings. Config-file keys match the field names; `celebrities`
/// together with `celebrity_degree` is shorthand for that many equal
/// entries in `celebrity_degrees`.
#[derive(Clone, Debug, PartialEq)]
pub struct SynthConfig {
    pub clusters: usize,
    pub users_per_cluster: usize,
    /// Standard deviation of user locations around a centre, in degrees.
    pub spread_deg: f64,
    /// Probability that a mention targets the author's own cluster.
    pub p_local: f64,
    pub mentions_per_user: usize,
    /// Outside handles (venues, local accounts) per cluster.
    pub local_handles_per_cluster: usize,
    /// Fraction of local mentions aimed at a local outside handle rather
    /// than another dataset user.
    pub p_local_handle: f64,
    /// Distinct-mentioner count of each planted celebrity.
    pub celebrity_degrees: Vec<usize>,
    pub marker_words_per_cluster: usize,
    pub marker_tokens_per_user: usize,
    pub filler_tokens_per_user: usize,
    /// Probability that a marker token is borrowed from another cluster.
    pub text_noise: f64,
    pub train: f64,
    pub dev: f64,
    pub test: f64,
    /// Fraction of test users that neither mention nor are mentioned.
    pub isolated_test_fraction: f64,
    pub lat_range: (f64, f64),
    pub lon_range: (f64, f64),
    pub min_center_separation_km: f64,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            clusters: 8,
            users_per_cluster: 50,
            spread_deg: 0.3,
            p_local: 0.9,
            mentions_per_user: 4,
            local_handles_per_cluster: 5,
            p_local_handle: 0.3,
            celebrity_degrees: Vec::new(),
            marker_words_per_cluster: 6,
            marker_tokens_per_user: 4,
            filler_tokens_per_user: 6,
            text_noise: 0.1,
            train: 0.6,
            dev: 0.2,
            test: 0.2,
            isolated_test_fraction: 0.0,
            lat_range: (26.0, 48.0),
            lon_range: (-122.0, -70.0),
            min_center_separation_km: 500.0,
            seed: 0,
        }
    }
}

impl SynthConfig {
    pub fn from_key_values(kv: &KeyValues) -> Result<Self> {
        let d = SynthConfig::default();
        let mut celebrity_degrees = kv.list("celebrity_degrees")?.unwrap_or_default();
        if let Some(count) = kv.parsed::<usize>("celebrities")? {
            let degree: usize = kv
                .parsed("celebrity_degree")?
                .ok_or_else(|| Error::Config("`celebrities` needs `celebrity_degree`".into()))?;
            celebrity_degrees.extend(std::iter::repeat_n(degree, count));
        }
        let cfg = SynthConfig {
            clusters: kv.parsed_or("clusters", d.clusters)?,
            users_per_cluster: kv.parsed_or("users_per_cluster", d.users_per_cluster)?,
            spread_deg: kv.parsed_or("spread_deg", d.spread_deg)?,
            p_local: kv.parsed_or("p_local", d.p_local)?,
            mentions_per_user: kv.parsed_or("mentions_per_user", d.mentions_per_user)?,
            local_handles_per_cluster: kv.parsed_or("local_handles_per_cluster", d.local_handles_per_cluster)?,
            p_local_handle: kv.parsed_or("p_local_handle", d.p_local_handle)?,
            celebrity_degrees,
            marker_words_per_cluster: kv.parsed_or("marker_words_per_cluster", d.marker_words_per_cluster)?,
            marker_tokens_per_user: kv.parsed_or("marker_tokens_per_user", d.marker_tokens_per_user)?,
            filler_tokens_per_user: kv.parsed_or("filler_tokens_per_user", d.filler_tokens_per_user)?,
            text_noise: kv.parsed_or("text_noise", d.text_noise)?,
            train: kv.parsed_or("train", d.train)?,
            dev: kv.parsed_or("dev", d.dev)?,
            test: kv.parsed_or("test", d.test)?,
            isolated_test_fraction: kv.parsed_or("isolated_test_fraction", d.isolated_test_fraction)?,
            lat_range: (kv.parsed_or("lat_min", d.lat_range.0)?, kv.parsed_or("lat_max", d.lat_range.1)?),
            lon_range: (kv.parsed_or("lon_min", d.lon_range.0)?, kv.parsed_or("lon_max", d.lon_range.1)?),
            min_center_separation_km: kv.parsed_or("min_center_separation_km", d.min_center_separation_km)?,
            seed: kv.parsed_or("seed", d.seed)?,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let err = |m: &str| Err(Error::Config(m.to_string()));
        let unit = |x: f64| (0.0..=1.0).contains(&x);
        if self.clusters == 0 || self.users_per_cluster == 0 {
            return err("clusters and users_per_cluster must be positive");
        }
        if ![self.train, self.dev, self.test].iter().all(|&x| unit(x)) {
            return err("split proportions must lie in [0, 1]");
        }
        if (self.train + self.dev + self.test - 1.0).abs() > 1e-9 {
            return err("split proportions must sum to 1");
        }
        if self.train == 0.0 {
            return err("train proportion must be positive");
        }
        for (name, v) in [
            ("p_local", self.p_local),
            ("p_local_handle", self.p_local_handle),
            ("text_noise", self.text_noise),
            ("isolated_test_fraction", self.isolated_test_fraction),
        ] {
            if !unit(v) {
                return Err(Error::Config(format!("{name} must lie in [0, 1]")));
            }
        }
        if !(self.spread_deg >= 0.0 && self.spread_deg.is_finite()) {
            return err("spread_deg must be finite and >= 0");
        }
        let (la, lb) = self.lat_range;
        let (oa, ob) = self.lon_range;
        if !(-90.0..=90.0).contains(&la) || !(-90.0..=90.0).contains(&lb) || la >= lb {
            return err("lat range must satisfy -90 <= lat_min < lat_max <= 90");
        }
        if !(-180.0..=180.0).contains(&oa) || !(-180.0..=180.0).contains(&ob) || oa >= ob {
            return err("lon range must satisfy -180 <= lon_min < lon_max <= 180");
        }
        if self.marker_words_per_cluster == 0 && self.marker_tokens_per_user > 0 {
            return err("marker_tokens_per_user needs marker_words_per_cluster > 0");
        }
        Ok(())
    }
}

/// A generated dataset plus the ground truth used to build it.
#[derive(Clone, Debug)]
pub struct SynthOutput {
    pub dataset: Dataset,
    /// Every emitted mention as (author, handle), in emission order.
    pub mentions: Vec<(String, String)>,
    pub cluster_of: HashMap<String, usize>,
    pub centers: Vec<GeoPoint>,
    pub celebrities: Vec<String>,
    pub isolated: Vec<String>,
}

/// Deterministic pronounceable word for `(cluster, index)`.
pub fn marker_word(cluster: usize, index: usize, words_per_cluster: usize) -> String {
    let mut code = cluster * words_per_cluster.max(1) + index;
    let mut word = String::new();
    for _ in 0..3 {
        word.push_str(SYLLABLES[code % SYLLABLES.len()]);
        code /= SYLLABLES.len();
    }
    while code > 0 {
        word.push_str(SYLLABLES[code % SYLLABLES.len()]);
        code /= SYLLABLES.len();
    }
    word
}

pub fn generate_synthetic(cfg: &SynthConfig) -> Result<SynthOutput> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);

    let mut centers: Vec<GeoPoint> = Vec::with_capacity(cfg.clusters);
    let mut attempts = 0;
    while centers.len() < cfg.clusters {
        attempts += 1;
        if attempts > 100_000 {
            return Err(Error::Config(format!(
                "cannot place {} centres {} km apart inside the configured box",
                cfg.clusters, cfg.min_center_separation_km
            )));
        }
        let c = GeoPoint {
            lat: rng.random_range(cfg.lat_range.0..=cfg.lat_range.1),
            lon: rng.random_range(cfg.lon_range.0..=cfg.lon_range.1),
        };
        if centers.iter().all(|o| haversine_km(*o, c) >= cfg.min_center_separation_km) {
            centers.push(c);
        }
    }

    let noise = Normal::new(0.0, cfg.spread_deg).map_err(|e| Error::Config(e.to_string()))?;
    let n = cfg.clusters * cfg.users_per_cluster;
    let width = (cfg.users_per_cluster.max(2) - 1).to_string().len();
    let mut ids = Vec::with_capacity(n);
    let mut cluster = Vec::with_capacity(n);
    let mut locations = Vec::with_capacity(n);
    for (c, center) in centers.iter().enumerate() {
        for i in 0..cfg.users_per_cluster {
            ids.push(format!("c{c}_u{i:0width$}"));
            cluster.push(c);
            locations.push(GeoPoint {
                lat: (center.lat + noise.sample(&mut rng)).clamp(-90.0, 90.0),
                lon: (center.lon + noise.sample(&mut rng)).clamp(-180.0, 180.0),
            });
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng);
    let n_train = ((cfg.train * n as f64).round() as usize).clamp(1, n);
    let n_dev = ((cfg.dev * n as f64).round() as usize).min(n - n_train);
    let mut split = vec![Split::Test; n];
    for &u in &order[..n_train] {
        split[u] = Split::Train;
    }
    for &u in &order[n_train..n_train + n_dev] {
        split[u] = Split::Dev;
    }

    let mut test_users: Vec<usize> = order[n_train + n_dev..].to_vec();
    test_users.sort_unstable();
    test_users.shuffle(&mut rng);
    let n_isolated = (cfg.isolated_test_fraction * test_users.len() as f64).round() as usize;
    let mut isolated = vec![false; n];
    for &u in &test_users[..n_isolated] {
        isolated[u] = true;
    }

    let mut members: Vec<Vec<usize>> = vec![Vec::new(); cfg.clusters];
    for u in (0..n).filter(|&u| !isolated[u]) {
        members[cluster[u]].push(u);
    }
    let active: Vec<usize> = (0..n).filter(|&u| !isolated[u]).collect();

    let mut mentions_of: Vec<Vec<String>> = vec![Vec::new(); n];
    for &u in &active {
        let c = cluster[u];
        for _ in 0..cfg.mentions_per_user {
            let local = rng.random_bool(cfg.p_local);
            let handle = if local {
                if cfg.local_handles_per_cluster > 0 && rng.random_bool(cfg.p_local_handle) {
                    Some(format!("place{c}_{}", rng.random_range(0..cfg.local_handles_per_cluster)))
                } else {
                    pick_other(&members[c], u, &mut rng).map(|v| ids[v].clone())
                }
            } else {
                let far: Vec<usize> = active.iter().copied().filter(|&v| cluster[v] != c).collect();
                far.choose(&mut rng).map(|&v| ids[v].clone())
            };
            if let Some(h) = handle {
                mentions_of[u].push(h);
            }
        }
    }

    let mut celebrities = Vec::with_capacity(cfg.celebrity_degrees.len());
    for (k, &degree) in cfg.celebrity_degrees.iter().enumerate() {
        if degree > active.len() {
            return Err(Error::Config(format!(
                "celebrity degree {degree} exceeds the {} users able to mention",
                active.len()
            )));
        }
        let handle = format!("celeb{k}");
        let mut fans: Vec<usize> = active.choose_multiple(&mut rng, degree).copied().collect();
        fans.sort_unstable();
        for u in fans {
            mentions_of[u].push(handle.clone());
        }
        celebrities.push(handle);
    }

    let mut records = Vec::with_capacity(n);
    let mut mentions = Vec::new();
    for u in 0..n {
        let mut tokens: Vec<String> = Vec::new();
        for _ in 0..cfg.marker_tokens_per_user {
            let source = if cfg.clusters > 1 && rng.random_bool(cfg.text_noise) {
                let mut other = rng.random_range(0..cfg.clusters - 1);
                if other >= cluster[u] {
                    other += 1;
                }
                other
            } else {
                cluster[u]
            };
            let j = rng.random_range(0..cfg.marker_words_per_cluster);
            tokens.push(marker_word(source, j, cfg.marker_words_per_cluster));
        }
        for _ in 0..cfg.filler_tokens_per_user {
            tokens.push(FILLER.choose(&mut rng).unwrap().to_string());
        }
        for h in &mentions_of[u] {
            tokens.push(format!("@{h}"));
            mentions.push((ids[u].clone(), h.clone()));
        }
        records.push(UserRecord::new(&ids[u], locations[u], tokens.join(" "), split[u]));
    }

    let cluster_of = ids.iter().cloned().zip(cluster.iter().copied()).collect();
    let isolated = (0..n).filter(|&u| isolated[u]).map(|u| ids[u].clone()).collect();
    Ok(SynthOutput {
        dataset: Dataset::new(records)?,
        mentions,
        cluster_of,
        centers,
        celebrities,
        isolated,
    })
}

fn pick_other(pool: &[usize], me: usize, rng: &mut impl Rng) -> Option<usize> {
    let others = pool.iter().filter(|&&v| v != me).count();
    if others == 0 {
        return None;
    }
    let k = rng.random_range(0..others);
    pool.iter().copied().filter(|&v| v != me).nth(k)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{extract_mentions, Format};

    fn small() -> SynthConfig {
        SynthConfig {
            clusters: 4,
            users_per_cluster: 20,
            celebrity_degrees: vec![10],
            seed: 7,
            ..SynthConfig::default()
        }
    }

    #[test]
    fn deterministic_for_a_seed() {
        let a = generate_synthetic(&small()).unwrap();
        let b = generate_synthetic(&small()).unwrap();
        assert_eq!(
            a.dataset.to_string(Format::Tsv).unwrap(),
            b.dataset.to_string(Format::Tsv).unwrap()
        );
        let c = generate_synthetic(&SynthConfig { seed: 8, ..small() }).unwrap();
        assert_ne!(a.dataset, c.dataset);
    }

    #[test]
    fn celebrity_has_exact_mentioner_count() {
        let out = generate_synthetic(&small()).unwrap();
        let fans = out
            .dataset
            .records()
            .iter()
            .filter(|r| extract_mentions(&r.text).iter().any(|h| h == "celeb0"))
            .count();
        assert_eq!(fans, 10);
        assert!(out.dataset.get("celeb0").is_none());
    }

    #[test]
    fn full_homophily_keeps_mentions_local() {
        let cfg = SynthConfig { p_local: 1.0, celebrity_degrees: vec![], ..small() };
        let out = generate_synthetic(&cfg).unwrap();
        for (u, h) in &out.mentions {
            let cu = out.cluster_of[u];
            match out.cluster_of.get(h) {
                Some(&ch) => assert_eq!(cu, ch),
                None => assert!(h.starts_with(&format!("place{cu}_"))),
            }
        }
    }

    #[test]
    fn text_mentions_match_ground_truth() {
        let out = generate_synthetic(&small()).unwrap();
        let mut from_text = Vec::new();
        for r in out.dataset.records() {
            for h in extract_mentions(&r.text) {
                from_text.push((r.user_id.clone(), h));
            }
        }
        assert_eq!(from_text, out.mentions);
    }

    #[test]
    fn isolated_users_have_no_mention_contact() {
        let cfg = SynthConfig { isolated_test_fraction: 0.5, ..small() };
        let out = generate_synthetic(&cfg).unwrap();
        assert!(!out.isolated.is_empty());
        for iso in &out.isolated {
            assert_eq!(out.dataset.get(iso).unwrap().split, Split::Test);
            assert!(out.mentions.iter().all(|(u, h)| u != iso && h != iso));
        }
    }

    #[test]
    fn proportions_must_sum_to_one() {
        let cfg = SynthConfig { train: 0.5, dev: 0.2, test: 0.2, ..small() };
        assert!(matches!(generate_synthetic(&cfg), Err(Error::Config(_))));
    }

    #[test]
    fn marker_words_are_distinct() {
        let mut words: Vec<String> = (0..10).flat_map(|c| (0..6).map(move |j| marker_word(c, j, 6))).collect();
        words.sort();
        words.dedup();
        assert_eq!(words.len(), 60);
    }
}
