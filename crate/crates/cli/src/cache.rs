use std::fs;
use std::path::{Path, PathBuf};

use taxiwalk::gjbound::PolygonSet;
use taxiwalk::CountTable;

use crate::error::CliResult;

/// On-disk store for count tables, polygon lists and matrices.
pub struct Cache {
    dir: PathBuf,
}

impl Cache {
    pub fn new(dir: &Path) -> Self {
        Cache { dir: dir.to_path_buf() }
    }

    fn ensure(&self) -> CliResult<()> {
        fs::create_dir_all(&self.dir).map_err(taxiwalk::Error::from)?;
        Ok(())
    }

    pub fn path(&self, file: &str) -> PathBuf {
        self.dir.join(file)
    }

    fn table_file(name: &str) -> String {
        format!("{name}.csv")
    }

    /// The cached table, if one exists; a corrupt file is an error.
    pub fn load_table(&self, name: &str) -> CliResult<Option<CountTable>> {
        let path = self.path(&Self::table_file(name));
        if !path.exists() {
            return Ok(None);
        }
        Ok(Some(CountTable::load(name, &path)?))
    }

    pub fn save_table(&self, table: &CountTable, name: &str) -> CliResult<PathBuf> {
        self.ensure()?;
        let path = self.path(&Self::table_file(name));
        table.save(&path)?;
        Ok(path)
    }

    /// Cached polygons of length at most `max_len`, read from any cached
    /// list that is at least that long.
    pub fn load_polygons(&self, max_len: usize) -> CliResult<Option<PolygonSet>> {
        let exact = self.path(&PolygonSet::file_name(max_len));
        if exact.exists() {
            return Ok(Some(PolygonSet::load(&exact, max_len)?));
        }
        let Ok(entries) = fs::read_dir(&self.dir) else { return Ok(None) };
        let mut best: Option<(usize, PathBuf)> = None;
        for e in entries.flatten() {
            let name = e.file_name().to_string_lossy().to_string();
            let Some(len) = name.strip_prefix("polygons_le").and_then(|s| s.strip_suffix(".txt")) else { continue };
            let Ok(len) = len.parse::<usize>() else { continue };
            if len >= max_len && best.as_ref().is_none_or(|(b, _)| len < *b) {
                best = Some((len, e.path()));
            }
        }
        match best {
            Some((len, path)) => Ok(Some(PolygonSet::load(&path, len)?.truncated(max_len))),
            None => Ok(None),
        }
    }

    pub fn save_polygons(&self, set: &PolygonSet) -> CliResult<PathBuf> {
        self.ensure()?;
        Ok(set.save(&self.dir)?)
    }

    pub fn prepare(&self) -> CliResult<()> {
        self.ensure()
    }
}
