//! Dataset acquisition over HTTP(S).
//!
//! Callers must not run two fetches against the same destination directory
//! at the same time.

use std::fs::File;
use std::io::{self, BufReader, Read, Seek, SeekFrom, Write};
use std::path::{Path, PathBuf};
use std::time::Duration;

use log::{info, warn};
use sha2::{Digest, Sha256};

use super::DatasetError;

const PARTIAL_NAME: &str = ".download.part";

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex_digest(Sha256::digest(bytes).as_slice())
}

fn hex_digest(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

enum Attempt {
    Transient(String),
    Fatal(String),
}

fn download(agent: &ureq::Agent, url: &str, dest: &Path) -> Result<String, Attempt> {
    let response = agent.get(url).call().map_err(|e| match e {
        ureq::Error::Status(code, _) if code >= 500 || code == 429 => Attempt::Transient(format!("HTTP {code}")),
        ureq::Error::Status(code, _) => Attempt::Fatal(format!("HTTP {code}")),
        ureq::Error::Transport(t) => Attempt::Transient(t.to_string()),
    })?;
    let mut reader = response.into_reader();
    let mut file = File::create(dest).map_err(|e| Attempt::Fatal(e.to_string()))?;
    let mut hasher = Sha256::new();
    let mut buf = vec![0u8; 1 << 16];
    loop {
        let n = match reader.read(&mut buf) {
            Ok(0) => break,
            Ok(n) => n,
            Err(e) if e.kind() == io::ErrorKind::Interrupted => continue,
            Err(e) => return Err(Attempt::Transient(e.to_string())),
        };
        hasher.update(&buf[..n]);
        file.write_all(&buf[..n]).map_err(|e| Attempt::Fatal(e.to_string()))?;
    }
    file.sync_all().map_err(|e| Attempt::Fatal(e.to_string()))?;
    Ok(hex_digest(hasher.finalize().as_slice()))
}

fn extract(archive: &Path, dest_dir: &Path) -> Result<(), DatasetError> {
    let fail = |e: &dyn std::fmt::Display| DatasetError::ExtractionFailure(e.to_string());
    let mut file = File::open(archive).map_err(|e| fail(&e))?;
    let mut magic = [0u8; 4];
    let n = file.read(&mut magic).map_err(|e| fail(&e))?;
    file.seek(SeekFrom::Start(0)).map_err(|e| fail(&e))?;
    match &magic[..n] {
        [b'P', b'K', 3, 4] => {
            let mut zip = zip::ZipArchive::new(BufReader::new(file)).map_err(|e| fail(&e))?;
            zip.extract(dest_dir).map_err(|e| fail(&e))
        }
        [0x1f, 0x8b, ..] => {
            let gz = flate2::read::GzDecoder::new(BufReader::new(file));
            tar::Archive::new(gz).unpack(dest_dir).map_err(|e| fail(&e))
        }
        _ => {
            // Plain tar has its magic at offset 257.
            let mut header = [0u8; 262];
            let is_tar = file.read_exact(&mut header).is_ok() && &header[257..262] == b"ustar";
            if !is_tar {
                return Err(DatasetError::ExtractionFailure("unrecognized archive format".into()));
            }
            file.seek(SeekFrom::Start(0)).map_err(|e| fail(&e))?;
            tar::Archive::new(BufReader::new(file))
                .unpack(dest_dir)
                .map_err(|e| fail(&e))
        }
    }
}

/// Downloads an archive (zip, tar or tar.gz) into `dest_dir` and extracts it.
///
/// When `expected_checksum` is given, the archive's SHA-256 must match it
/// before anything is extracted. Transient failures are retried once.
pub fn fetch_dataset(url: &str, dest_dir: &Path, expected_checksum: Option<&str>) -> Result<(), DatasetError> {
    std::fs::create_dir_all(dest_dir).map_err(|e| DatasetError::io(dest_dir, e))?;
    let partial: PathBuf = dest_dir.join(PARTIAL_NAME);
    let agent = ureq::AgentBuilder::new()
        .timeout_connect(Duration::from_secs(30))
        .build();

    let network = |reason: String| DatasetError::NetworkFailure {
        url: url.to_string(),
        reason,
    };
    let digest = match download(&agent, url, &partial) {
        Ok(d) => d,
        Err(Attempt::Fatal(reason)) => {
            let _ = std::fs::remove_file(&partial);
            return Err(network(reason));
        }
        Err(Attempt::Transient(reason)) => {
            warn!("fetch of {url} failed ({reason}); retrying once");
            download(&agent, url, &partial).map_err(|a| {
                let _ = std::fs::remove_file(&partial);
                match a {
                    Attempt::Transient(r) | Attempt::Fatal(r) => network(r),
                }
            })?
        }
    };

    if let Some(expected) = expected_checksum {
        if !expected.trim().eq_ignore_ascii_case(&digest) {
            let _ = std::fs::remove_file(&partial);
            return Err(DatasetError::ChecksumMismatch {
                expected: expected.trim().to_ascii_lowercase(),
                actual: digest,
            });
        }
    }
    info!(
        "downloaded {url} (sha256 {digest}); extracting into {}",
        dest_dir.display()
    );
    let result = extract(&partial, dest_dir);
    let _ = std::fs::remove_file(&partial);
    result
}
