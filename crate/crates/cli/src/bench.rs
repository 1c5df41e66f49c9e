use crate::synth::{synthesize, SynthSpec};
use anyhow::{bail, Result};
use pprl_linkage::{encode_record, EncodedRecord, LinkageConfig};
use pprl_net::NetPreset;
use pprl_protocol::{connect_local_client, spawn_local_mesh};
use pprl_ring::{RandomStream, StreamPair};
use std::time::{Duration, Instant};

/// One measured single-query linkage session.
#[derive(Debug, Clone, Copy)]
pub struct BenchRow {
    pub size: usize,
    pub wall: Duration,
    /// Bytes pushed onto all links by all parties and the client during the
    /// session (database outsourcing excluded).
    pub bytes: u64,
}

/// Least-squares R-squared of y against x.
pub fn linear_fit_r2(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mean_x = xs.iter().sum::<f64>() / n;
    let mean_y = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mean_x) * (y - mean_y)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mean_x) * (x - mean_x)).sum();
    let syy: f64 = ys.iter().map(|y| (y - mean_y) * (y - mean_y)).sum();
    if sxx == 0.0 || syy == 0.0 {
        return 1.0;
    }
    (sxy * sxy) / (sxx * syy)
}

/// Spins up a fresh three-party mesh on loopback for each database size,
/// outsources a synthesized database, runs one query session and collects
/// wall clock and bytes on wire from every party's meter.
pub fn run_bench(
    sizes: &[usize],
    preset: NetPreset,
    config: &LinkageConfig,
    master_seed: [u8; 16],
    data_seed: u64,
) -> Result<Vec<BenchRow>> {
    let max_size = *sizes.iter().max().unwrap_or(&0);
    if max_size == 0 {
        bail!("no sizes given");
    }
    let spec = SynthSpec {
        size: max_size,
        seed: data_seed,
        ..Default::default()
    };
    let (queries, db_raw, truth) = synthesize(&spec);
    let db: Vec<EncodedRecord> = db_raw
        .iter()
        .map(|r| encode_record(r).map_err(anyhow::Error::from))
        .collect::<Result<_>>()?;

    let mut rows = Vec::with_capacity(sizes.len());
    for &size in sizes {
        let (p0, p1, helper) = spawn_local_mesh(master_seed, preset, false)
            .map_err(|e| anyhow::anyhow!("mesh: {e}"))?;
        let client = connect_local_client(&p0, &p1).map_err(|e| anyhow::anyhow!("client: {e}"))?;
        let mut stream = RandomStream::new(master_seed, StreamPair::Owner);
        client
            .upload_db(&db[..size], 0, true, &mut stream)
            .map_err(|e| anyhow::anyhow!("upload: {e}"))?;

        // Query a record whose counterpart lies inside the prefix when one
        // exists, so the session exercises the realistic match path.
        let query_at = truth
            .iter()
            .position(|t| matches!(t, Some(j) if (*j as usize) < size))
            .unwrap_or(0);
        let query = encode_record(&queries[query_at])?;

        let client_before = client.bytes_sent();
        let started = Instant::now();
        client
            .query(config, &query, &mut stream)
            .map_err(|e| anyhow::anyhow!("query: {e}"))?;
        let wall = started.elapsed();

        let mut bytes = client.bytes_sent() - client_before;
        for handle in [&p0, &p1, &helper] {
            let reports = handle.wait_for_reports(1, Duration::from_secs(60));
            let report = reports
                .iter()
                .find(|r| r.error.is_none())
                .ok_or_else(|| anyhow::anyhow!("party produced no successful session report"))?;
            bytes += report.meter.bytes_sent();
        }
        rows.push(BenchRow { size, wall, bytes });
    }
    Ok(rows)
}

pub fn render_table(rows: &[BenchRow]) -> String {
    let mut out = String::from("size\tseconds\tmegabytes\n");
    for row in rows {
        out.push_str(&format!(
            "{}\t{:.3}\t{:.2}\n",
            row.size,
            row.wall.as_secs_f64(),
            row.bytes as f64 / 1e6
        ));
    }
    let xs: Vec<f64> = rows.iter().map(|r| r.size as f64).collect();
    let ys: Vec<f64> = rows.iter().map(|r| r.bytes as f64).collect();
    if rows.len() >= 3 {
        out.push_str(&format!("bytes-vs-size R^2 = {:.4}\n", linear_fit_r2(&xs, &ys)));
    }
    out
}
