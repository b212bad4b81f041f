//! Exact count tables and their CSV form (`n,count`).

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use num_bigint::BigUint;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// An exact sequence `n -> count`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountTable {
    pub name: String,
    values: BTreeMap<usize, BigUint>,
}

impl CountTable {
    pub fn new(name: &str) -> Self {
        CountTable { name: name.to_string(), values: BTreeMap::new() }
    }

    pub fn from_values<I>(name: &str, values: I) -> Self
    where
        I: IntoIterator<Item = (usize, BigUint)>,
    {
        CountTable { name: name.to_string(), values: values.into_iter().collect() }
    }

    pub fn insert(&mut self, n: usize, value: BigUint) {
        self.values.insert(n, value);
    }

    pub fn get(&self, n: usize) -> Result<&BigUint> {
        self.values.get(&n).ok_or_else(|| Error::MissingIndex { table: self.name.clone(), n })
    }

    pub fn contains(&self, n: usize) -> bool {
        self.values.contains_key(&n)
    }

    /// Largest `N` with every index `1..=N` present.
    pub fn max_n(&self) -> usize {
        (1..).take_while(|n| self.values.contains_key(n)).last().unwrap_or(0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, &BigUint)> {
        self.values.iter().map(|(&n, v)| (n, v))
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Coefficients `0..=n` as a dense vector; missing entries are an error.
    pub fn dense(&self, n: usize) -> Result<Vec<BigUint>> {
        (0..=n).map(|i| self.get(i).cloned()).collect()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,count\n");
        for (n, v) in &self.values {
            out.push_str(&format!("{n},{v}\n"));
        }
        out
    }

    pub fn from_csv(name: &str, text: &str, origin: &Path) -> Result<CountTable> {
        let bad = |line: usize, reason: &str| Error::Malformed {
            path: origin.to_path_buf(),
            reason: format!("line {line}: {reason}"),
        };
        let mut lines = text.lines().enumerate();
        match lines.next() {
            Some((_, "n,count")) => {}
            _ => return Err(bad(1, "expected header `n,count`")),
        }
        let mut table = CountTable::new(name);
        for (i, line) in lines {
            if line.is_empty() {
                continue;
            }
            let (n, v) = line.split_once(',').ok_or_else(|| bad(i + 1, "expected two fields"))?;
            let n: usize = n.parse().map_err(|_| bad(i + 1, "index is not an integer"))?;
            let v: BigUint = v.parse().map_err(|_| bad(i + 1, "count is not an exact integer"))?;
            if table.values.insert(n, v).is_some() {
                return Err(bad(i + 1, "duplicate index"));
            }
        }
        Ok(table)
    }

    pub fn load(name: &str, path: &Path) -> Result<CountTable> {
        let text = fs::read_to_string(path)?;
        CountTable::from_csv(name, &text, path)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        write_atomic(path, self.to_csv().as_bytes())
    }

    /// Indices where both tables have a value and the values differ.
    pub fn mismatches(&self, other: &CountTable) -> Vec<(usize, BigUint, BigUint)> {
        self.values
            .iter()
            .filter_map(|(n, a)| match other.values.get(n) {
                Some(b) if a != b => Some((*n, a.clone(), b.clone())),
                _ => None,
            })
            .collect()
    }

    /// Adds every entry of `other` not already present.
    pub fn merge_missing(&mut self, other: &CountTable) {
        for (n, v) in &other.values {
            self.values.entry(*n).or_insert_with(|| v.clone());
        }
    }
}

/// Writes to a sibling temporary file and renames it over `path`.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            fs::create_dir_all(dir)?;
        }
    }
    let file_name = path
        .file_name()
        .ok_or_else(|| Error::InvalidInput(format!("not a file path: {}", path.display())))?;
    let mut tmp_name = std::ffi::OsString::from(".");
    tmp_name.push(file_name);
    tmp_name.push(format!(".tmp{}", std::process::id()));
    let tmp: PathBuf = path.with_file_name(tmp_name);
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table(vals: &[(usize, u64)]) -> CountTable {
        CountTable::from_values("t", vals.iter().map(|&(n, v)| (n, BigUint::from(v))))
    }

    #[test]
    fn csv_round_trip_and_format() {
        let t = table(&[(1, 2), (2, 4), (3, 6)]);
        let csv = t.to_csv();
        assert_eq!(csv, "n,count\n1,2\n2,4\n3,6\n");
        let back = CountTable::from_csv("t", &csv, Path::new("x.csv")).unwrap();
        assert_eq!(back, t);
        assert_eq!(back.max_n(), 3);
    }

    #[test]
    fn csv_rejects_garbage() {
        let p = Path::new("x.csv");
        assert!(CountTable::from_csv("t", "n,value\n1,2\n", p).is_err());
        assert!(CountTable::from_csv("t", "n,count\n1,2.5\n", p).is_err());
        assert!(CountTable::from_csv("t", "n,count\n1,2\n1,3\n", p).is_err());
        assert!(CountTable::from_csv("t", "n,count\nfoo\n", p).is_err());
    }

    #[test]
    fn max_n_stops_at_gap() {
        let t = table(&[(0, 1), (1, 2), (2, 4), (4, 10)]);
        assert_eq!(t.max_n(), 2);
        assert!(t.get(3).is_err());
        assert!(t.dense(2).is_ok());
        assert!(t.dense(4).is_err());
    }

    #[test]
    fn mismatches_only_on_shared_keys() {
        let a = table(&[(1, 2), (2, 4)]);
        let b = table(&[(2, 5), (3, 6)]);
        assert_eq!(a.mismatches(&b), vec![(2, BigUint::from(4u32), BigUint::from(5u32))]);
    }

    #[test]
    fn atomic_write_replaces_file() {
        let dir = std::env::temp_dir().join(format!("taxiwalk-table-{}", std::process::id()));
        let path = dir.join("walks.csv");
        table(&[(1, 2)]).save(&path).unwrap();
        table(&[(1, 2), (2, 4)]).save(&path).unwrap();
        let back = CountTable::load("t", &path).unwrap();
        assert_eq!(back.max_n(), 2);
        fs::remove_dir_all(&dir).unwrap();
    }
}
