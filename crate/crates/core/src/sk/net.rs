//! The ε-net of short base sequences searched at the bottom of the recursion, and its
//! on-disk cache.

use std::collections::HashMap;
use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result, Stage};
use crate::gate_algebra::{dist, gates_to_matrix, Gate, GateSeq, Unitary2};
use crate::scalar::Real;
use crate::sk::rewrite::simplify_gates;

pub const CACHE_MAGIC: &str = "ftqc-net";
pub const CACHE_VERSION: u32 = 1;

/// Parameters of a net build.
#[derive(Debug, Clone, PartialEq)]
pub struct NetParams {
    pub generators: Vec<Gate>,
    pub max_len: usize,
    pub dedup_tol: f64,
    /// Maximum number of distinct entries before the build is aborted.
    pub entry_budget: usize,
}

impl Default for NetParams {
    fn default() -> Self {
        NetParams {
            generators: vec![Gate::H, Gate::T],
            max_len: 16,
            dedup_tol: 1e-7,
            entry_budget: 1_000_000,
        }
    }
}

impl NetParams {
    pub fn new(generators: Vec<Gate>, max_len: usize, dedup_tol: f64) -> Self {
        NetParams {
            generators,
            max_len,
            dedup_tol,
            ..Default::default()
        }
    }

    fn validate(&self) -> Result<()> {
        if self.max_len == 0 {
            return Err(Error::invalid(Stage::Net, "max_len must be at least 1"));
        }
        if self.generators.is_empty() {
            return Err(Error::invalid(Stage::Net, "empty generator set"));
        }
        for g in &self.generators {
            if !matches!(g, Gate::H | Gate::S | Gate::T | Gate::Sdg | Gate::Tdg) {
                return Err(Error::invalid(
                    Stage::Net,
                    format!("generator `{g}` not in {{H, S, T, S†, T†}}"),
                ));
            }
        }
        if !(self.dedup_tol > 0.0 && self.dedup_tol.is_finite()) {
            return Err(Error::invalid(Stage::Net, "dedup_tol must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NetEntry<T> {
    pub seq: GateSeq,
    pub matrix: Unitary2<T>,
}

/// Deduplicated base approximations, sorted by (length, gate order).
#[derive(Debug, Clone)]
pub struct BaseNet<T> {
    params: NetParams,
    entries: Vec<NetEntry<T>>,
    // SU(2) quaternion per entry; |⟨q_a, q_b⟩| = cos of half the eigenphase gap.
    quats: Vec<[T; 4]>,
}

fn quaternion<T: Real>(u: &Unitary2<T>) -> [T; 4] {
    let v = u.to_su2();
    let a = (v.get(0, 0) + v.get(1, 1).conj()) * T::lit(0.5);
    let b = (v.get(1, 0) - v.get(0, 1).conj()) * T::lit(0.5);
    [a.re, -b.im, b.re, -a.im]
}

// (cost, length, gates) ordering used to pick which of two equivalent sequences to keep.
fn cheaper(a: &GateSeq, b: &GateSeq) -> bool {
    let (ca, cb) = (a.counts.unit_cost(), b.counts.unit_cost());
    if ca != cb {
        return ca < cb;
    }
    (a.len(), &a.gates) < (b.len(), &b.gates)
}

struct Grid {
    cell: f64,
    cells: HashMap<[i64; 4], Vec<usize>>,
}

impl Grid {
    fn key(&self, q: [f64; 4]) -> [i64; 4] {
        q.map(|x| (x / self.cell).floor() as i64)
    }

    fn insert(&mut self, q: [f64; 4], idx: usize) {
        let k1 = self.key(q);
        let k2 = self.key(q.map(|x| -x));
        self.cells.entry(k1).or_default().push(idx);
        if k2 != k1 {
            self.cells.entry(k2).or_default().push(idx);
        }
    }

    fn neighbours(&self, q: [f64; 4], mut f: impl FnMut(usize) -> bool) -> Option<usize> {
        let k = self.key(q);
        for d0 in -1..=1 {
            for d1 in -1..=1 {
                for d2 in -1..=1 {
                    for d3 in -1..=1 {
                        let key = [k[0] + d0, k[1] + d1, k[2] + d2, k[3] + d3];
                        if let Some(v) = self.cells.get(&key) {
                            for &i in v {
                                if f(i) {
                                    return Some(i);
                                }
                            }
                        }
                    }
                }
            }
        }
        None
    }
}

impl<T: Real> BaseNet<T> {
    /// Breadth-first enumeration of generator words up to `max_len`, deduplicated under
    /// `dist < dedup_tol` keeping the cheapest representative.
    ///
    /// A word is only extended if it survived deduplication: if `w ≈ w'` with `w'` found no
    /// later, then `w·g ≈ w'·g` is already reachable from `w'`.
    pub fn build(params: NetParams) -> Result<Self> {
        params.validate()?;
        let tol = params.dedup_tol;
        let mut seqs: Vec<GateSeq> = vec![GateSeq::empty()];
        let mut mats: Vec<Unitary2<f64>> = vec![Unitary2::identity()];
        let mut grid = Grid {
            cell: tol,
            cells: HashMap::new(),
        };
        grid.insert(quaternion(&mats[0]), 0);
        let mut frontier: Vec<usize> = vec![0];

        for _level in 0..params.max_len {
            let mut next = Vec::new();
            for &parent in &frontier {
                for &g in &params.generators {
                    let mut gates = seqs[parent].gates.clone();
                    gates.push(g);
                    let seq = GateSeq::new(simplify_gates(&gates));
                    let m = g.matrix::<f64>() * mats[parent];
                    let q = quaternion(&m);
                    let hit = grid.neighbours(q, |i| dist(&mats[i], &m) < tol);
                    match hit {
                        Some(i) => {
                            if cheaper(&seq, &seqs[i]) {
                                seqs[i] = seq;
                                mats[i] = m;
                            }
                        }
                        None => {
                            let idx = seqs.len();
                            if idx >= params.entry_budget {
                                return Err(Error::limit(
                                    Stage::Net,
                                    "entry_budget",
                                    format!(
                                        "net exceeds {} entries (max_len {})",
                                        params.entry_budget, params.max_len
                                    ),
                                ));
                            }
                            seqs.push(seq);
                            mats.push(m);
                            grid.insert(q, idx);
                            next.push(idx);
                        }
                    }
                }
            }
            if next.is_empty() {
                break;
            }
            frontier = next;
        }

        seqs.sort_by(|a, b| (a.len(), &a.gates).cmp(&(b.len(), &b.gates)));
        Ok(Self::from_parts(params, seqs))
    }

    fn from_parts(params: NetParams, seqs: Vec<GateSeq>) -> Self {
        let entries: Vec<NetEntry<T>> = seqs
            .into_iter()
            .map(|seq| {
                let matrix = gates_to_matrix(&seq.gates);
                NetEntry { seq, matrix }
            })
            .collect();
        let quats = entries.iter().map(|e| quaternion(&e.matrix)).collect();
        BaseNet {
            params,
            entries,
            quats,
        }
    }

    pub fn params(&self) -> &NetParams {
        &self.params
    }

    pub fn entries(&self) -> &[NetEntry<T>] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Closest entry to `u` and its distance. Ties go to the earlier entry, i.e. the
    /// shorter sequence, then the smaller gate order.
    pub fn nearest(&self, u: &Unitary2<T>) -> (&GateSeq, T) {
        assert!(!self.entries.is_empty(), "nearest on an empty net");
        let q = quaternion(u);
        let overlap = |p: &[T; 4]| (p[0] * q[0] + p[1] * q[1] + p[2] * q[2] + p[3] * q[3]).abs();
        let best = self.quats.iter().map(overlap).fold(T::zero(), T::max);
        // Overlaps within rounding of the best are re-ranked by the exact distance.
        let slack = T::epsilon() * T::lit(16.0);
        let mut pick = 0;
        let mut pick_d = T::infinity();
        for (i, p) in self.quats.iter().enumerate() {
            if overlap(p) >= best - slack {
                let d = dist(&self.entries[i].matrix, u);
                if d < pick_d {
                    pick = i;
                    pick_d = d;
                }
            }
        }
        (&self.entries[pick].seq, pick_d)
    }

    /// Writes the cache file atomically (temp file in the same directory, then rename).
    pub fn save(&self, path: &Path) -> Result<()> {
        let mut body = String::new();
        body.push_str(&format!("{CACHE_MAGIC} {CACHE_VERSION}\n"));
        let gens: Vec<String> = self
            .params
            .generators
            .iter()
            .map(|g| GateSeq::new(vec![*g]).to_ascii())
            .collect();
        body.push_str(&format!("generators {}\n", gens.join(" ")));
        body.push_str(&format!("max_len {}\n", self.params.max_len));
        body.push_str(&format!("dedup_tol {:e}\n", self.params.dedup_tol));
        body.push_str(&format!("entries {}\n", self.entries.len()));
        for e in &self.entries {
            body.push_str(&e.seq.to_ascii());
            body.push('\n');
        }
        if let Some(dir) = path.parent() {
            if !dir.as_os_str().is_empty() {
                fs::create_dir_all(dir)?;
            }
        }
        let tmp = path.with_extension("tmp");
        {
            let mut f = fs::File::create(&tmp)?;
            f.write_all(body.as_bytes())?;
            f.sync_all()?;
        }
        fs::rename(&tmp, path)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let cache_err = |msg: String| Error::Cache {
            stage: Stage::Net,
            path: path.display().to_string(),
            msg,
        };
        let text = fs::read_to_string(path).map_err(|e| cache_err(e.to_string()))?;
        let mut lines = text.lines();
        let mut header = |key: &str| -> Result<String> {
            let line = lines
                .next()
                .ok_or_else(|| cache_err(format!("missing `{key}` line")))?;
            line.strip_prefix(key)
                .map(|rest| rest.trim().to_string())
                .ok_or_else(|| cache_err(format!("expected `{key}`, found `{line}`")))
        };
        let version = header(CACHE_MAGIC)?;
        if version != CACHE_VERSION.to_string() {
            return Err(cache_err(format!("unsupported format version `{version}`")));
        }
        let generators = GateSeq::parse(&header("generators")?)
            .map_err(|e| cache_err(e.to_string()))?
            .gates;
        let max_len = header("max_len")?
            .parse()
            .map_err(|e| cache_err(format!("max_len: {e}")))?;
        let dedup_tol = header("dedup_tol")?
            .parse()
            .map_err(|e| cache_err(format!("dedup_tol: {e}")))?;
        let count: usize = header("entries")?
            .parse()
            .map_err(|e| cache_err(format!("entries: {e}")))?;
        let seqs = lines
            .map(|l| GateSeq::parse(l).map_err(|e| cache_err(e.to_string())))
            .collect::<Result<Vec<_>>>()?;
        if seqs.len() != count {
            return Err(cache_err(format!(
                "header announces {count} entries, file has {}",
                seqs.len()
            )));
        }
        let params = NetParams {
            generators,
            max_len,
            dedup_tol,
            ..Default::default()
        };
        Ok(Self::from_parts(params, seqs))
    }

    /// Loads `path` when it holds a net with the same parameters, otherwise builds one and
    /// writes it there.
    pub fn load_or_build(path: &Path, params: NetParams) -> Result<Self> {
        if path.exists() {
            let net = Self::load(path)?;
            let p = net.params();
            if p.generators == params.generators
                && p.max_len == params.max_len
                && p.dedup_tol == params.dedup_tol
            {
                return Ok(net);
            }
        }
        let net = Self::build(params)?;
        net.save(path)?;
        Ok(net)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gate_algebra::{rz, seq_to_matrix};

    fn ht(max_len: usize) -> BaseNet<f64> {
        BaseNet::build(NetParams::new(vec![Gate::H, Gate::T], max_len, 1e-6)).unwrap()
    }

    fn contains(net: &BaseNet<f64>, u: &Unitary2<f64>) -> bool {
        net.entries().iter().any(|e| dist(&e.matrix, u) < 1e-9)
    }

    #[test]
    fn length_one_net() {
        let net = ht(1);
        assert_eq!(net.len(), 3);
        let seqs: Vec<String> = net.entries().iter().map(|e| e.seq.to_ascii()).collect();
        assert_eq!(seqs, vec!["-", "H", "T"]);
    }

    #[test]
    fn length_two_net() {
        // I, H, T, HH(=I), HT, TH, TT(=S): six distinct elements
        let net = ht(2);
        assert_eq!(net.len(), 6);
        let g = |s: &str| seq_to_matrix::<f64>(&GateSeq::parse(s).unwrap());
        for s in ["-", "H", "T", "T H", "H T", "S"] {
            assert!(contains(&net, &g(s)), "{s}");
        }
        assert!(net
            .entries()
            .iter()
            .all(|e| e.seq.gates != vec![Gate::H, Gate::H]));
        assert!(net.entries().iter().any(|e| e.seq.gates == vec![Gate::S]));
    }

    #[test]
    fn entry_count_monotone_in_length() {
        let counts: Vec<usize> = (1..=9).map(|l| ht(l).len()).collect();
        assert!(counts.windows(2).all(|w| w[0] <= w[1]), "{counts:?}");
    }

    #[test]
    fn entries_consistent_and_deduplicated() {
        let net = BaseNet::<f64>::build(NetParams::new(vec![Gate::H, Gate::T], 10, 1e-7)).unwrap();
        let e = net.entries();
        assert!(e[0].seq.is_empty());
        for x in e {
            assert!(seq_to_matrix::<f64>(&x.seq).max_abs_diff(&x.matrix) < 1e-12);
        }
        for i in 0..e.len() {
            for j in (i + 1)..e.len() {
                assert!(dist(&e[i].matrix, &e[j].matrix) >= 1e-7);
            }
        }
    }

    #[test]
    fn budget_error_names_budget() {
        let mut p = NetParams::new(vec![Gate::H, Gate::T], 12, 1e-7);
        p.entry_budget = 50;
        let err = BaseNet::<f64>::build(p).unwrap_err();
        assert!(err.to_string().contains("entry_budget"), "{err}");
    }

    #[test]
    fn rejects_bad_generators() {
        assert!(BaseNet::<f64>::build(NetParams::new(vec![Gate::X], 2, 1e-7)).is_err());
        assert!(BaseNet::<f64>::build(NetParams::new(vec![Gate::H], 0, 1e-7)).is_err());
    }

    #[test]
    fn nearest_examples() {
        let net = ht(8);
        let (s, d) = net.nearest(&Unitary2::identity());
        assert!(s.is_empty());
        assert_eq!(d, 0.0);
        let (s, d) = net.nearest(&Gate::T.matrix());
        assert_eq!(s.gates, vec![Gate::T]);
        assert!(d < 1e-15);
        let target = rz(0.3).unwrap();
        let (_, d) = net.nearest(&target);
        let brute = net
            .entries()
            .iter()
            .map(|e| dist(&e.matrix, &target))
            .fold(f64::INFINITY, f64::min);
        assert_eq!(d, brute);
    }

    #[test]
    fn cache_round_trip() {
        let net = ht(9);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("net.txt");
        net.save(&path).unwrap();
        let back = BaseNet::<f64>::load(&path).unwrap();
        assert_eq!(back.params(), net.params());
        assert_eq!(back.len(), net.len());
        for (a, b) in net.entries().iter().zip(back.entries()) {
            assert_eq!(a.seq, b.seq);
            assert!(a.matrix.max_abs_diff(&b.matrix) <= 1e-15);
        }
    }

    #[test]
    fn load_rejects_garbage() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.txt");
        fs::write(&path, "not-a-net 7\n").unwrap();
        assert!(BaseNet::<f64>::load(&path).is_err());
        assert!(BaseNet::<f64>::load(&dir.path().join("missing")).is_err());
    }
}
