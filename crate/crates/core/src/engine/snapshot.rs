//! Versioned JSON snapshots of a detector, for restarting a stream where it
//! left off.
//!
//! ```text
//! {"format":"omp-detector","version":1,"config":{...},"state":{...}}
//! ```
//!
//! `state` holds the cached values (relative to `anchor`), their stored
//! decisions, the prefix sums, per-window statistics and the current inner
//! products, so a restored detector continues bit-identically. Transform
//! plans are not stored; they are rebuilt on restore.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::{Detector, EngineConfig, State};
use crate::error::{Error, Result};

pub const SNAPSHOT_VERSION: u32 = 1;
const FORMAT: &str = "omp-detector";

#[derive(Serialize)]
struct SnapshotRef<'a> {
    format: &'a str,
    version: u32,
    config: &'a EngineConfig,
    state: &'a State,
}

#[derive(Deserialize)]
struct SnapshotOwned {
    format: String,
    version: u32,
    config: EngineConfig,
    state: State,
}

impl Detector {
    pub fn write_snapshot<W: Write>(&self, writer: W) -> Result<()> {
        let snap = SnapshotRef {
            format: FORMAT,
            version: SNAPSHOT_VERSION,
            config: &self.cfg,
            state: &self.state,
        };
        serde_json::to_writer(writer, &snap).map_err(|e| Error::Snapshot(e.to_string()))
    }

    pub fn snapshot(&self) -> String {
        let mut buf = Vec::new();
        self.write_snapshot(&mut buf).expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("serde_json emits UTF-8")
    }

    pub fn read_snapshot<R: Read>(reader: R) -> Result<Self> {
        let snap: SnapshotOwned = serde_json::from_reader(reader).map_err(|e| Error::Snapshot(e.to_string()))?;
        if snap.format != FORMAT {
            return Err(Error::Snapshot(format!("unexpected format {:?}", snap.format)));
        }
        if snap.version != SNAPSHOT_VERSION {
            return Err(Error::Snapshot(format!(
                "unsupported version {} (expected {SNAPSHOT_VERSION})",
                snap.version
            )));
        }
        snap.config.validate()?;
        let st = &snap.state;
        let cached = st.values.len();
        if cached != st.labels.len()
            || cached as u64 > st.ingested
            || (!snap.config.is_unbounded() && cached > snap.config.cache)
            || st.sums.len() != cached
            || st.win_mean.len() != st.win_var.len()
        {
            return Err(Error::Snapshot("inconsistent cache state".into()));
        }
        Ok(Self {
            sr: Self::make_sr(&snap.config)?,
            cfg: snap.config,
            state: snap.state,
        })
    }

    pub fn restore(json: &str) -> Result<Self> {
        Self::read_snapshot(json.as_bytes())
    }
}
