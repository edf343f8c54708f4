//! Exhaustive search for permutation trace forms over F_{q^n}, q^n < 5000.
//!
//! For each field, every k-orbit representative is tried against every gamma
//! (or one gamma per scaling class), with an early-abort bijectivity test on
//! precomputed trace tables. Hits are classified, written as JSONL in
//! `(q, n, k_min, gamma index)` order, and each finished field is recorded in a
//! checkpoint file so that an interrupted census can resume.

use std::collections::{BTreeMap, BTreeSet};
use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::families::{k_orbit, FastForm, KProfile, Tag, TraceForm, TraceTables, SPORADICS};
use crate::ffield::{Elem, FieldCtx};
use crate::numtheory::{prime_power, prime_powers_in};
use crate::permcheck::{scan_order, SeenSet};

/// Largest field order (exclusive) the search accepts.
pub const MAX_CENSUS_ORDER: u64 = 5000;

/// `(min, orbit)` of `k` under multiplication by `q` modulo `q^n - 1`.
pub fn canonical_k(k: u64, q: u64, n: u32) -> Result<(u64, Vec<u64>)> {
    let top = q.pow(n) - 1;
    if k == 0 || k > top {
        return Err(Error::Precondition(format!("k = {k} outside [1, {top}]")));
    }
    let orbit = k_orbit(k as u128, q, n);
    Ok((orbit[0], orbit))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SearchOptions {
    /// Test one gamma per class `gamma * {c^{k-1} : c in F_q^*}`.
    pub use_gamma_orbits: bool,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions {
            use_gamma_orbits: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchRecord {
    pub q: u64,
    pub n: u32,
    pub k_min: u64,
    pub k_orbit: Vec<u64>,
    pub gamma_index: u32,
    pub gamma_poly: String,
    pub classification: Tag,
    pub field_spec: String,
}

/// Results for one field.
#[derive(Clone, Debug)]
pub struct FieldSearch {
    pub q: u64,
    pub n: u32,
    pub field_spec: String,
    pub k_orbits: u64,
    /// Forms actually evaluated, including class-member spot checks.
    pub candidates_tested: u64,
    pub evaluations: u64,
    pub records: Vec<SearchRecord>,
}

/// `(p, s)` for a valid search field.
pub fn check_search_params(q: u64, n: u32) -> Result<(u64, u32)> {
    let (p, s) = prime_power(q)
        .ok_or_else(|| Error::Precondition(format!("q = {q} is not a prime power")))?;
    if n < 2 {
        return Err(Error::Precondition(format!("n = {n}, need n >= 2")));
    }
    match q.checked_pow(n) {
        Some(o) if o < MAX_CENSUS_ORDER => Ok((p, s)),
        _ => Err(Error::Precondition(format!(
            "q^n = {q}^{n} is not below {MAX_CENSUS_ORDER}"
        ))),
    }
}

/// Reusable early-abort tester for one `k`.
struct Tester<'a> {
    order: &'a [Elem],
    seen: SeenSet,
}

impl Tester<'_> {
    /// Returns (permutes, evaluations).
    fn run(&mut self, form: &FastForm<'_>) -> (bool, u64) {
        self.seen.clear();
        for (i, &x) in self.order.iter().enumerate() {
            if !self.seen.insert(form.apply(x).index()) {
                return (false, i as u64 + 1);
            }
        }
        (true, self.order.len() as u64)
    }
}

struct KResult {
    tested: u64,
    evaluations: u64,
    hits: Vec<Elem>,
}

fn search_k(
    tables: &TraceTables<'_>,
    order: &[Elem],
    q: u64,
    n: u32,
    k: u64,
    opts: SearchOptions,
) -> Result<KResult> {
    let ctx = tables.ctx();
    let slots = tables.power_slots(k);
    let mut tester = Tester {
        order,
        seen: SeenSet::new(ctx.order() as usize),
    };
    let scalers: Vec<Elem> = if opts.use_gamma_orbits {
        let mut h: Vec<Elem> = tables.subfield()[1..]
            .iter()
            .map(|&c| ctx.pow_u(c, k - 1))
            .collect();
        h.sort_unstable();
        h.dedup();
        h
    } else {
        vec![Elem::ONE]
    };
    let mut rng = ChaCha8Rng::seed_from_u64(q.wrapping_mul(1_000_003) ^ ((n as u64) << 40) ^ k);
    let mut visited = vec![false; ctx.order() as usize];
    let mut out = KResult {
        tested: 0,
        evaluations: 0,
        hits: Vec::new(),
    };
    for g in ctx.nonzero() {
        if visited[g.index() as usize] {
            continue;
        }
        let class: Vec<Elem> = scalers.iter().map(|&h| ctx.mul(g, h)).collect();
        for c in &class {
            visited[c.index() as usize] = true;
        }
        let (ok, evals) = tester.run(&FastForm::new(tables, &slots, g));
        out.tested += 1;
        out.evaluations += evals;
        if !ok {
            continue;
        }
        if class.len() > 1 {
            let other = *class[1..]
                .choose(&mut rng)
                .expect("class has another member");
            let (ok2, evals2) = tester.run(&FastForm::new(tables, &slots, other));
            out.tested += 1;
            out.evaluations += evals2;
            if !ok2 {
                return Err(Error::Inconsistent(format!(
                    "q={q} n={n} k={k}: gamma {} permutes but its rescaling {} does not",
                    g.index(),
                    other.index()
                )));
            }
        }
        out.hits.extend(class);
    }
    out.hits.sort_unstable();
    Ok(out)
}

/// All `(k_min, gamma)` for which `X + gamma Tr(X^k)` permutes F_{q^n}.
pub fn search_field(q: u64, n: u32, opts: SearchOptions) -> Result<FieldSearch> {
    let (p, s) = check_search_params(q, n)?;
    let ctx = FieldCtx::new(p, s * n)?;
    let tables = TraceTables::new(&ctx, s)?;
    let order = scan_order(&ctx);
    let top = ctx.group_order() as u64;
    let reps: Vec<u64> = (1..=top)
        .filter(|&k| k_orbit(k as u128, q, n)[0] == k)
        .collect();
    let per_k: Vec<KResult> = reps
        .par_iter()
        .map(|&k| search_k(&tables, &order, q, n, k, opts))
        .collect::<Result<Vec<_>>>()?;

    let field_spec = ctx.spec_string();
    let mut out = FieldSearch {
        q,
        n,
        field_spec: field_spec.clone(),
        k_orbits: reps.len() as u64,
        candidates_tested: 0,
        evaluations: 0,
        records: Vec::new(),
    };
    for (&k, res) in reps.iter().zip(per_k) {
        out.candidates_tested += res.tested;
        out.evaluations += res.evaluations;
        if res.hits.is_empty() {
            continue;
        }
        let profile = KProfile::new(&ctx, q, n, k)?;
        for g in res.hits {
            out.records.push(SearchRecord {
                q,
                n,
                k_min: k,
                k_orbit: profile.orbit.clone(),
                gamma_index: g.index(),
                gamma_poly: ctx.format(g),
                classification: profile.classify(&ctx, g).primary,
                field_spec: field_spec.clone(),
            });
        }
    }
    Ok(out)
}

/// Re-checks records with full image tables built from the definition of
/// the trace (no early abort, no precomputed slots). Returns the records that
/// fail.
pub fn reverify(records: &[SearchRecord]) -> Result<Vec<SearchRecord>> {
    let mut groups: BTreeMap<(String, u64, u32, u64), Vec<&SearchRecord>> = BTreeMap::new();
    for r in records {
        groups
            .entry((r.field_spec.clone(), r.q, r.n, r.k_min))
            .or_default()
            .push(r);
    }
    let mut fields: BTreeMap<String, FieldCtx> = BTreeMap::new();
    for (spec, ..) in groups.keys() {
        if !fields.contains_key(spec) {
            fields.insert(spec.clone(), FieldCtx::from_spec(spec)?);
        }
    }
    let failures: Vec<Vec<SearchRecord>> = groups
        .par_iter()
        .map(|((spec, q, n, k), recs)| {
            let ctx = &fields[spec];
            let probe = TraceForm::new(ctx, *q, *n, *k as u128, Elem::ONE)?;
            let tr = probe.trace_table(ctx);
            let mut bad = Vec::new();
            let mut hit = vec![false; ctx.order() as usize];
            for r in recs {
                let g = ctx.elem(r.gamma_index as u64)?;
                hit.fill(false);
                for x in ctx.elements() {
                    hit[ctx.add(x, ctx.mul(g, tr[x.index() as usize])).index() as usize] = true;
                }
                if !hit.iter().all(|&b| b) {
                    bad.push((*r).clone());
                }
            }
            Ok(bad)
        })
        .collect::<Result<_>>()?;
    Ok(failures.into_iter().flatten().collect())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FieldSummary {
    pub q: u64,
    pub n: u32,
    pub field_spec: String,
    pub k_orbits: u64,
    pub candidates_tested: u64,
    pub evaluations: u64,
    pub records: u64,
    pub identity: u64,
    pub additive: u64,
    pub family: u64,
    pub sporadic: u64,
    pub unexplained: u64,
    /// SHA-256 of this field's JSONL lines.
    pub sha256: String,
}

impl FieldSummary {
    fn new(fs: &FieldSearch, chunk: &str) -> Self {
        let count = |kind: &str| {
            fs.records
                .iter()
                .filter(|r| r.classification.kind() == kind)
                .count() as u64
        };
        FieldSummary {
            q: fs.q,
            n: fs.n,
            field_spec: fs.field_spec.clone(),
            k_orbits: fs.k_orbits,
            candidates_tested: fs.candidates_tested,
            evaluations: fs.evaluations,
            records: fs.records.len() as u64,
            identity: count("identity"),
            additive: count("additive"),
            family: count("family"),
            sporadic: count("sporadic"),
            unexplained: count("unexplained"),
            sha256: hex::encode(Sha256::digest(chunk.as_bytes())),
        }
    }
}

/// Sporadic hits grouped by k-orbit.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SporadicEntry {
    pub q: u64,
    pub n: u32,
    pub k_min: u64,
    pub label: String,
    pub gammas: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CensusReport {
    pub bound: u64,
    pub odd_only: bool,
    pub use_gamma_orbits: bool,
    pub fields: Vec<FieldSummary>,
    pub total_records: u64,
    pub sporadic: Vec<SporadicEntry>,
    pub unexplained: Vec<SearchRecord>,
    pub runtime_secs: f64,
}

#[derive(Clone, Copy, Debug)]
pub struct CensusOptions {
    /// Fields with q^n strictly below this.
    pub bound: u64,
    pub odd_only: bool,
    pub search: SearchOptions,
}

impl Default for CensusOptions {
    fn default() -> Self {
        CensusOptions {
            bound: MAX_CENSUS_ORDER,
            odd_only: true,
            search: SearchOptions::default(),
        }
    }
}

/// `(q, n)` with n >= 2 and q^n < bound, ordered by q then n.
pub fn census_fields(bound: u64, odd_only: bool) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    for q in prime_powers_in(2, bound) {
        if odd_only && q % 2 == 0 {
            continue;
        }
        let mut n = 2;
        while q.checked_pow(n).is_some_and(|o| o < bound) {
            out.push((q, n));
            n += 1;
        }
    }
    out
}

pub fn sporadic_entries(records: &[SearchRecord]) -> Vec<SporadicEntry> {
    let mut groups: BTreeMap<(u64, u32, u64, String), usize> = BTreeMap::new();
    for r in records {
        if let Tag::Sporadic(i) = r.classification {
            *groups
                .entry((r.q, r.n, r.k_min, SPORADICS[i].label.to_string()))
                .or_default() += 1;
        }
    }
    groups
        .into_iter()
        .map(|((q, n, k_min, label), gammas)| SporadicEntry {
            q,
            n,
            k_min,
            label,
            gammas,
        })
        .collect()
}

/// `(q, n, k_min, label)` for every listed sporadic k with q^n below `bound`.
pub fn expected_sporadic_orbits(bound: u64) -> BTreeSet<(u64, u32, u64, String)> {
    SPORADICS
        .iter()
        .filter(|sp| sp.q.pow(sp.n) < bound)
        .flat_map(|sp| {
            sp.ks.iter().map(move |&k| {
                (
                    sp.q,
                    sp.n,
                    k_orbit(k as u128, sp.q, sp.n)[0],
                    sp.label.to_string(),
                )
            })
        })
        .collect()
}

/// Differences between the sporadic hits of a census and the listed
/// sporadic entries: orbits missing or extra, and orbits where the gammas
/// giving permutations that satisfy the listed condition are not exactly the
/// condition's solution set. The last check counts records of any primary
/// tag, since a solution may also satisfy a family condition.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SporadicComparison {
    pub missing: Vec<(u64, u32, u64, String)>,
    pub extra: Vec<(u64, u32, u64, String)>,
    pub gamma_mismatch: Vec<(u64, u32, u64, String)>,
}

impl SporadicComparison {
    pub fn is_exact(&self) -> bool {
        self.missing.is_empty() && self.extra.is_empty() && self.gamma_mismatch.is_empty()
    }
}

pub fn compare_sporadics(records: &[SearchRecord], bound: u64) -> Result<SporadicComparison> {
    let expected = expected_sporadic_orbits(bound);
    let found: BTreeSet<(u64, u32, u64, String)> = records
        .iter()
        .filter_map(|r| match r.classification {
            Tag::Sporadic(i) => Some((r.q, r.n, r.k_min, SPORADICS[i].label.to_string())),
            _ => None,
        })
        .collect();
    let mut cmp = SporadicComparison {
        missing: expected.difference(&found).cloned().collect(),
        extra: found.difference(&expected).cloned().collect(),
        gamma_mismatch: Vec::new(),
    };
    for key in found.intersection(&expected) {
        let (q, n, k_min, label) = key;
        let sp = SPORADICS
            .iter()
            .find(|sp| sp.label == label)
            .expect("known label");
        let in_orbit: Vec<&SearchRecord> = records
            .iter()
            .filter(|r| (r.q, r.n, r.k_min) == (*q, *n, *k_min))
            .collect();
        let ctx = FieldCtx::from_spec(&in_orbit[0].field_spec)?;
        let solutions: BTreeSet<u32> = ctx
            .nonzero()
            .filter(|&g| sp.holds(&ctx, g))
            .map(|g| g.index())
            .collect();
        let hits: BTreeSet<u32> = in_orbit
            .iter()
            .map(|r| r.gamma_index)
            .filter(|&g| sp.holds(&ctx, Elem::from_raw(g)))
            .collect();
        if hits != solutions {
            cmp.gamma_mismatch.push(key.clone());
        }
    }
    Ok(cmp)
}

/// Output locations derived from the records path `X.jsonl`:
/// `X.summary.csv`, `X.report.json`, `X.checkpoint.jsonl`.
#[derive(Clone, Debug)]
pub struct CensusPaths {
    pub records: PathBuf,
    pub summary_csv: PathBuf,
    pub report_json: PathBuf,
    pub checkpoint: PathBuf,
}

impl CensusPaths {
    pub fn new(records: &Path) -> Self {
        let with = |ext: &str| records.with_extension(ext);
        CensusPaths {
            records: records.to_path_buf(),
            summary_csv: with("summary.csv"),
            report_json: with("report.json"),
            checkpoint: with("checkpoint.jsonl"),
        }
    }
}

pub struct CensusRun {
    pub report: CensusReport,
    pub records: Vec<SearchRecord>,
    /// Fields taken from the checkpoint instead of recomputed.
    pub resumed_fields: usize,
}

fn record_chunk(records: &[SearchRecord]) -> Result<String> {
    let mut chunk = String::new();
    for r in records {
        chunk.push_str(&serde_json::to_string(r)?);
        chunk.push('\n');
    }
    Ok(chunk)
}

/// Fields from an earlier run whose checkpoint entry matches both the
/// expected field sequence and the hash of the stored records.
fn load_checkpoint(
    paths: &CensusPaths,
    fields: &[(u64, u32)],
) -> Result<Vec<(FieldSummary, Vec<SearchRecord>)>> {
    let (Ok(cp), Ok(rec)) = (File::open(&paths.checkpoint), File::open(&paths.records)) else {
        return Ok(Vec::new());
    };
    let summaries: Vec<FieldSummary> = BufReader::new(cp)
        .lines()
        .map_while(|l| l.ok().and_then(|l| serde_json::from_str(&l).ok()))
        .collect();
    let mut lines = BufReader::new(rec).lines();
    let mut out = Vec::new();
    for (summary, &(q, n)) in summaries.into_iter().zip(fields) {
        if (summary.q, summary.n) != (q, n) {
            break;
        }
        let mut chunk = String::new();
        let mut records = Vec::new();
        for _ in 0..summary.records {
            let Some(Ok(line)) = lines.next() else { break };
            chunk.push_str(&line);
            chunk.push('\n');
            match serde_json::from_str::<SearchRecord>(&line) {
                Ok(r) => records.push(r),
                Err(_) => break,
            }
        }
        if records.len() as u64 != summary.records
            || hex::encode(Sha256::digest(chunk.as_bytes())) != summary.sha256
        {
            break;
        }
        out.push((summary, records));
    }
    Ok(out)
}

fn write_summary_csv(path: &Path, fields: &[FieldSummary]) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(
        w,
        "q,n,field_spec,k_orbits,candidates_tested,evaluations,records,identity,additive,family,sporadic,unexplained,sha256"
    )?;
    for f in fields {
        writeln!(
            w,
            "{},{},\"{}\",{},{},{},{},{},{},{},{},{},{}",
            f.q,
            f.n,
            f.field_spec,
            f.k_orbits,
            f.candidates_tested,
            f.evaluations,
            f.records,
            f.identity,
            f.additive,
            f.family,
            f.sporadic,
            f.unexplained,
            f.sha256
        )?;
    }
    w.flush()?;
    Ok(())
}

/// Runs the census. With `out`, records, checkpoint, CSV summary and JSON
/// report are written next to each other; with `resume`, fields already in
/// a valid checkpoint are reused.
pub fn census(opts: &CensusOptions, out: Option<&Path>, resume: bool) -> Result<CensusRun> {
    if opts.bound > MAX_CENSUS_ORDER {
        return Err(Error::Precondition(format!(
            "bound {} exceeds {MAX_CENSUS_ORDER}",
            opts.bound
        )));
    }
    let start = Instant::now();
    let fields = census_fields(opts.bound, opts.odd_only);
    let paths = out.map(CensusPaths::new);

    let done = match (&paths, resume) {
        (Some(p), true) => load_checkpoint(p, &fields)?,
        _ => Vec::new(),
    };
    let resumed_fields = done.len();
    let mut summaries = Vec::new();
    let mut records = Vec::new();
    let mut writers = None;
    if let Some(p) = &paths {
        if let Some(dir) = p.records.parent().filter(|d| !d.as_os_str().is_empty()) {
            fs::create_dir_all(dir)?;
        }
        writers = Some((
            BufWriter::new(File::create(&p.records)?),
            BufWriter::new(File::create(&p.checkpoint)?),
        ));
    }
    let mut emit = |summary: &FieldSummary, chunk: &str| -> Result<()> {
        if let Some((rec, cp)) = writers.as_mut() {
            rec.write_all(chunk.as_bytes())?;
            rec.flush()?;
            writeln!(cp, "{}", serde_json::to_string(summary)?)?;
            cp.flush()?;
        }
        Ok(())
    };
    for (summary, recs) in done {
        emit(&summary, &record_chunk(&recs)?)?;
        summaries.push(summary);
        records.extend(recs);
    }
    for &(q, n) in &fields[resumed_fields..] {
        let fs = search_field(q, n, opts.search)?;
        let chunk = record_chunk(&fs.records)?;
        let summary = FieldSummary::new(&fs, &chunk);
        emit(&summary, &chunk)?;
        summaries.push(summary);
        records.extend(fs.records);
    }

    let report = CensusReport {
        bound: opts.bound,
        odd_only: opts.odd_only,
        use_gamma_orbits: opts.search.use_gamma_orbits,
        total_records: records.len() as u64,
        sporadic: sporadic_entries(&records),
        unexplained: records
            .iter()
            .filter(|r| r.classification == Tag::Unexplained)
            .cloned()
            .collect(),
        fields: summaries,
        runtime_secs: start.elapsed().as_secs_f64(),
    };
    if let Some(p) = &paths {
        write_summary_csv(&p.summary_csv, &report.fields)?;
        fs::write(&p.report_json, serde_json::to_string_pretty(&report)?)?;
    }
    Ok(CensusRun {
        report,
        records,
        resumed_fields,
    })
}
