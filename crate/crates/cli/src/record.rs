//! CSV output.
//!
//! Every subcommand that runs the estimator writes rows of [`BenchRecord`],
//! one header line, comma separated. Columns, in order:
//!
//! | column | meaning |
//! |---|---|
//! | `graph` | input path or generator description |
//! | `n`, `edges` | graph size |
//! | `dbar`, `dmax` | mean and largest exit rate (degree for 0/1 adjacency) |
//! | `beta`, `dt`, `steps`, `samples` | `beta = dt * steps` |
//! | `splitting` | `lie` or `strang` |
//! | `target` | `tc`, `tcn`, `vector` or `entry:I` |
//! | `seed`, `workers` | |
//! | `value`, `std_error` | estimate and its standard error |
//! | `eps_split` | splitting error against the dense exponential, empty without the oracle |
//! | `eps_mc` | total error of the estimate against the dense exponential, empty without the oracle |
//! | `wall_time` | seconds spent in the estimator |
//! | `total_jumps`, `jumps_per_path` | chain transitions over all paths and per path |
//!
//! For the `vector` target the errors are infinity norms over all entries.
//! Floats are written in shortest round-trip form, so identical runs give
//! identical files apart from `wall_time`.

use std::io::Write;

use serde::Serialize;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchRecord {
    pub graph: String,
    pub n: usize,
    pub edges: usize,
    pub dbar: f64,
    pub dmax: f64,
    pub beta: f64,
    pub dt: f64,
    pub steps: usize,
    pub samples: u64,
    pub splitting: String,
    pub target: String,
    pub seed: u64,
    pub workers: usize,
    pub value: f64,
    pub std_error: f64,
    pub eps_split: Option<f64>,
    pub eps_mc: Option<f64>,
    pub wall_time: f64,
    pub total_jumps: u64,
    pub jumps_per_path: f64,
}

/// Names of columns that depend on timing rather than on the computation.
pub const TIMING_COLUMNS: &[&str] = &["wall_time"];

pub fn write_csv<W: Write>(records: &[BenchRecord], out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    if records.is_empty() {
        w.write_record(header())?;
    }
    for r in records {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn header() -> [&'static str; 20] {
    [
        "graph",
        "n",
        "edges",
        "dbar",
        "dmax",
        "beta",
        "dt",
        "steps",
        "samples",
        "splitting",
        "target",
        "seed",
        "workers",
        "value",
        "std_error",
        "eps_split",
        "eps_mc",
        "wall_time",
        "total_jumps",
        "jumps_per_path",
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record() -> BenchRecord {
        BenchRecord {
            graph: "smallworld(n=10, k=1, ps=0.4) seed=1".into(),
            n: 10,
            edges: 11,
            dbar: 2.2,
            dmax: 3.0,
            beta: 1.0,
            dt: 0.25,
            steps: 4,
            samples: 100,
            splitting: "strang".into(),
            target: "tc".into(),
            seed: 0,
            workers: 1,
            value: 0.1,
            std_error: 0.0,
            eps_split: None,
            eps_mc: Some(1e-3),
            wall_time: 0.5,
            total_jumps: 220,
            jumps_per_path: 2.2,
        }
    }

    #[test]
    fn header_matches_serialized_fields() {
        let mut buf = Vec::new();
        write_csv(&[record()], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), header().join(","));
        assert_eq!(
            lines.next().unwrap(),
            "\"smallworld(n=10, k=1, ps=0.4) seed=1\",10,11,2.2,3.0,1.0,0.25,4,100,strang,tc,0,1,0.1,0.0,,0.001,0.5,220,2.2"
        );
    }

    #[test]
    fn empty_output_still_has_header() {
        let mut buf = Vec::new();
        write_csv(&[], &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap().trim_end(), header().join(","));
    }
}
