//! Game logs: records, datasets, ingestion and the preprocessing steps
//! (symmetrization, random halving, min-games filtering).

use std::collections::HashMap;
use std::io::{Read, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{self, streams};

/// One match. `o` is the utility of player `i`; player `j` receives `1 - o`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GameRecord {
    /// 1-based position in the log.
    pub t: usize,
    pub i: usize,
    pub j: usize,
    pub o: f64,
}

impl GameRecord {
    pub fn new(t: usize, i: usize, j: usize, o: f64) -> Result<Self> {
        if i == j {
            return Err(Error::invalid(format!("game {t}: player {i} plays itself")));
        }
        if !(0.0..=1.0).contains(&o) {
            return Err(Error::invalid(format!("game {t}: outcome {o} outside [0, 1]")));
        }
        Ok(GameRecord { t, i, j, o })
    }

    /// The same game seen from the other side.
    pub fn flipped(&self) -> Self {
        GameRecord {
            t: self.t,
            i: self.j,
            j: self.i,
            o: 1.0 - self.o,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub name: String,
    pub n_players: usize,
    pub games: Vec<GameRecord>,
    /// External id of each dense player index.
    pub player_names: Vec<String>,
}

impl Dataset {
    /// Builds a dataset from `(i, j, o)` triples, numbering games 1..T.
    pub fn from_triples(
        name: impl Into<String>,
        n_players: usize,
        triples: impl IntoIterator<Item = (usize, usize, f64)>,
    ) -> Result<Self> {
        let mut games = Vec::new();
        for (k, (i, j, o)) in triples.into_iter().enumerate() {
            if i >= n_players || j >= n_players {
                return Err(Error::invalid(format!(
                    "game {}: player index out of range for N = {n_players}",
                    k + 1
                )));
            }
            games.push(GameRecord::new(k + 1, i, j, o)?);
        }
        Ok(Dataset {
            name: name.into(),
            n_players,
            games,
            player_names: (0..n_players).map(|p| p.to_string()).collect(),
        })
    }

    pub fn len(&self) -> usize {
        self.games.len()
    }

    pub fn is_empty(&self) -> bool {
        self.games.is_empty()
    }

    /// Average number of games per player, `2T / N`.
    pub fn sparsity(&self) -> f64 {
        if self.n_players == 0 {
            0.0
        } else {
            2.0 * self.games.len() as f64 / self.n_players as f64
        }
    }

    pub fn games_per_player(&self) -> Vec<usize> {
        let mut counts = vec![0; self.n_players];
        for g in &self.games {
            counts[g.i] += 1;
            counts[g.j] += 1;
        }
        counts
    }

    /// Subset of games by 0-based index, renumbered 1..len in the given order.
    pub fn subset(&self, indices: &[usize]) -> Dataset {
        let games = indices
            .iter()
            .enumerate()
            .map(|(k, &idx)| GameRecord {
                t: k + 1,
                ..self.games[idx]
            })
            .collect();
        Dataset {
            name: self.name.clone(),
            n_players: self.n_players,
            games,
            player_names: self.player_names.clone(),
        }
    }

    fn renumber(&mut self) {
        for (k, g) in self.games.iter_mut().enumerate() {
            g.t = k + 1;
        }
    }

    /// Writes the `t,i,j,o` log using the external player names.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["t", "i", "j", "o"])?;
        for g in &self.games {
            w.write_record([
                g.t.to_string(),
                self.player_names[g.i].clone(),
                self.player_names[g.j].clone(),
                g.o.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Reads a `t,i,j,o` game log from disk. Lines starting with `#` are ignored.
pub fn ingest_csv(path: impl AsRef<Path>) -> Result<Dataset> {
    let path = path.as_ref();
    let file = std::fs::File::open(path)?;
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    read_games(file, &name, path)
}

/// Parses a game log from any reader; `origin` only labels error messages.
pub fn read_games<R: Read>(input: R, name: &str, origin: &Path) -> Result<Dataset> {
    let parse_err = |line: u64, message: String| Error::Parse {
        path: origin.to_path_buf(),
        line,
        message,
    };

    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(input);

    let headers = reader.headers()?.clone();
    if !headers.is_empty() {
        let cols: Vec<&str> = headers.iter().collect();
        if cols != ["t", "i", "j", "o"] {
            return Err(parse_err(
                1,
                format!("expected header t,i,j,o, found {}", cols.join(",")),
            ));
        }
    }

    let mut rows: Vec<(i64, String, String, f64, u64)> = Vec::new();
    for record in reader.records() {
        let record = record?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        if record.len() != 4 {
            return Err(parse_err(line, format!("expected 4 fields, found {}", record.len())));
        }
        let t: i64 = record[0]
            .parse()
            .map_err(|_| parse_err(line, format!("bad timestep {:?}", &record[0])))?;
        let o: f64 = record[3]
            .parse()
            .map_err(|_| parse_err(line, format!("bad outcome {:?}", &record[3])))?;
        if !(0.0..=1.0).contains(&o) {
            return Err(Error::Validation {
                line,
                message: format!("outcome {o} outside [0, 1]"),
            });
        }
        if record[1] == record[2] {
            return Err(Error::Validation {
                line,
                message: format!("player {:?} plays itself", &record[1]),
            });
        }
        rows.push((t, record[1].to_string(), record[2].to_string(), o, line));
    }

    // stable: equal timesteps keep file order
    rows.sort_by_key(|r| r.0);

    let mut index: HashMap<String, usize> = HashMap::new();
    let mut names = Vec::new();
    let mut intern = |id: String| -> usize {
        *index.entry(id.clone()).or_insert_with(|| {
            names.push(id);
            names.len() - 1
        })
    };
    let mut games = Vec::with_capacity(rows.len());
    for (k, (_, a, b, o, _)) in rows.into_iter().enumerate() {
        let i = intern(a);
        let j = intern(b);
        games.push(GameRecord { t: k + 1, i, j, o });
    }

    Ok(Dataset {
        name: name.to_string(),
        n_players: names.len(),
        games,
        player_names: names,
    })
}

/// Swaps the two sides of each game independently with probability 1/2.
pub fn symmetrize(d: &Dataset, seed: u64) -> Dataset {
    let mut rng = rng::stream(seed, streams::SYMMETRIZE);
    let games = d
        .games
        .iter()
        .map(|g| if rng.random_bool(0.5) { g.flipped() } else { *g })
        .collect();
    Dataset { games, ..d.clone() }
}

/// Disjoint train/test halves of the game indices (0-based, each sorted).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitDataset {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

/// Uniformly random equal split of `0..T`; the test half gets the odd game.
pub fn split_random(d: &Dataset, seed: u64) -> Result<SplitDataset> {
    split_indices(d.len(), seed)
}

pub fn split_indices(t: usize, seed: u64) -> Result<SplitDataset> {
    if t < 2 {
        return Err(Error::invalid(format!("cannot split {t} games into two halves")));
    }
    let mut idx: Vec<usize> = (0..t).collect();
    idx.shuffle(&mut rng::stream(seed, streams::SPLIT));
    let mut train = idx[..t / 2].to_vec();
    let mut test = idx[t / 2..].to_vec();
    train.sort_unstable();
    test.sort_unstable();
    Ok(SplitDataset { train, test })
}

/// Drops players with fewer than `threshold` games, then every game touching
/// a dropped player. One pass: survivors may end up below the threshold.
pub fn filter_min_games(d: &Dataset, threshold: usize) -> Dataset {
    let counts = d.games_per_player();
    let mut remap = vec![usize::MAX; d.n_players];
    let mut names = Vec::new();
    for (p, &c) in counts.iter().enumerate() {
        if c >= threshold {
            remap[p] = names.len();
            names.push(d.player_names[p].clone());
        }
    }
    let mut out = Dataset {
        name: d.name.clone(),
        n_players: names.len(),
        games: d
            .games
            .iter()
            .filter(|g| remap[g.i] != usize::MAX && remap[g.j] != usize::MAX)
            .map(|g| GameRecord {
                i: remap[g.i],
                j: remap[g.j],
                ..*g
            })
            .collect(),
        player_names: names,
    };
    out.renumber();
    out
}

#[cfg(test)]
mod tests {
    use std::io::Write as _;

    use super::*;

    fn parse(text: &str) -> Result<Dataset> {
        read_games(text.as_bytes(), "mem", Path::new("mem.csv"))
    }

    #[test]
    fn ingest_three_rows_two_players() {
        let d = parse("t,i,j,o\n1,a,b,1\n2,b,a,0.5\n3,a,b,0\n").unwrap();
        assert_eq!(d.n_players, 2);
        assert_eq!(d.len(), 3);
        assert_eq!(d.player_names, vec!["a", "b"]);
        assert_eq!(
            d.games[1],
            GameRecord {
                t: 2,
                i: 1,
                j: 0,
                o: 0.5
            }
        );
    }

    #[test]
    fn ingest_empty_file() {
        let d = parse("").unwrap();
        assert_eq!((d.n_players, d.len()), (0, 0));
        let d = parse("t,i,j,o\n").unwrap();
        assert_eq!((d.n_players, d.len()), (0, 0));
    }

    #[test]
    fn ingest_rejects_outcome_and_names_line() {
        let text = "t,i,j,o\n1,a,b,1\n2,a,b,1\n3,a,b,1\n4,a,b,1\n5,a,b,1\n6,a,b,1.5\n";
        match parse(text) {
            Err(Error::Validation { line, .. }) => assert_eq!(line, 7),
            other => panic!("expected validation error, got {other:?}"),
        }
    }

    #[test]
    fn ingest_rejects_self_play_and_garbage() {
        assert!(matches!(
            parse("t,i,j,o\n1,a,a,1\n"),
            Err(Error::Validation { line: 2, .. })
        ));
        assert!(matches!(parse("t,i,j,o\n1,a,b,x\n"), Err(Error::Parse { line: 2, .. })));
        assert!(matches!(parse("t,i,j,o\n1,a,b\n"), Err(Error::Parse { line: 2, .. })));
    }

    #[test]
    fn ingest_sorts_by_time_and_reindexes_gaps() {
        let d = parse("t,i,j,o\n# comment\n10,x,y,1\n3,y,z,0\n7,x,z,1\n").unwrap();
        let ts: Vec<usize> = d.games.iter().map(|g| g.t).collect();
        assert_eq!(ts, vec![1, 2, 3]);
        assert_eq!(d.player_names, vec!["y", "z", "x"]);
    }

    #[test]
    fn ingest_from_file_and_back() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        write!(f, "t,i,j,o\n1,alice,bob,1\n2,bob,carol,0.25\n").unwrap();
        let d = ingest_csv(f.path()).unwrap();
        let mut buf = Vec::new();
        d.write_csv(&mut buf).unwrap();
        let again = read_games(buf.as_slice(), &d.name, f.path()).unwrap();
        assert_eq!(again.games, d.games);
        assert_eq!(again.player_names, d.player_names);
    }

    #[test]
    fn symmetrize_flip_and_determinism() {
        let d = Dataset::from_triples("x", 3, (0..1000).map(|k| (k % 3, (k + 1) % 3, 1.0))).unwrap();
        let a = symmetrize(&d, 11);
        let b = symmetrize(&d, 11);
        assert_eq!(a, b);
        for (orig, s) in d.games.iter().zip(&a.games) {
            assert!(s == orig || *s == orig.flipped());
            if s != orig {
                assert_eq!(s.o, 0.0);
            }
        }
    }

    #[test]
    fn symmetrize_flips_about_half() {
        let d = Dataset::from_triples("x", 2, (0..100_000).map(|_| (0, 1, 1.0))).unwrap();
        let s = symmetrize(&d, 3);
        let flipped = s.games.iter().filter(|g| g.i == 1).count() as f64 / 1e5;
        assert!((0.49..=0.51).contains(&flipped), "{flipped}");
    }

    #[test]
    fn split_sizes_and_partition() {
        let d = Dataset::from_triples("x", 2, (0..10).map(|_| (0, 1, 1.0))).unwrap();
        let s = split_random(&d, 1).unwrap();
        assert_eq!((s.train.len(), s.test.len()), (5, 5));
        let d11 = Dataset::from_triples("x", 2, (0..11).map(|_| (0, 1, 1.0))).unwrap();
        let s = split_random(&d11, 1).unwrap();
        let mut sizes = [s.train.len(), s.test.len()];
        sizes.sort();
        assert_eq!(sizes, [5, 6]);
        let mut all: Vec<usize> = s.train.iter().chain(&s.test).copied().collect();
        all.sort();
        assert_eq!(all, (0..11).collect::<Vec<_>>());
        assert_eq!(split_random(&d11, 1).unwrap(), s);
        let one = Dataset::from_triples("x", 2, [(0, 1, 1.0)]).unwrap();
        assert!(split_random(&one, 0).is_err());
    }

    #[test]
    fn filter_identity_and_degenerate() {
        let d = Dataset::from_triples("x", 3, [(0, 1, 1.0), (1, 2, 0.0), (0, 1, 0.5)]).unwrap();
        assert_eq!(filter_min_games(&d, 0), d);
        let empty = filter_min_games(&d, 100);
        assert_eq!((empty.n_players, empty.len()), (0, 0));
    }

    #[test]
    fn filter_drops_light_player() {
        // counts: p0 = 2, p1 = 3, p2 = 1
        let d = Dataset::from_triples("x", 3, [(0, 1, 1.0), (1, 2, 0.0), (0, 1, 0.5)]).unwrap();
        let f = filter_min_games(&d, 2);
        assert_eq!(f.n_players, 2);
        assert_eq!(f.len(), 2);
        assert_eq!(f.player_names, vec!["0", "1"]);
        assert_eq!(f.games[1].t, 2);
    }

    #[test]
    fn filter_is_single_pass() {
        // counts p0 = 1, p1 = 2, p2 = 1: only p1 survives, with no games left
        let d = Dataset::from_triples("x", 3, [(0, 1, 1.0), (1, 2, 1.0)]).unwrap();
        let once = filter_min_games(&d, 2);
        assert_eq!(once.n_players, 1);
        assert!(once.games.is_empty());
        // a second pass removes the survivor, so filtering is not a fixpoint
        assert_eq!(filter_min_games(&once, 2).n_players, 0);
    }
}
