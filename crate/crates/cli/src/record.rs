use csv::StringRecord;
use serde::{Deserialize, Serialize};

/// One computed capacity. `d` and `n` are absent for networks read from a
/// file; `cap` is absent when only flow bounds were computed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub d: Option<usize>,
    pub p: f64,
    pub n: Option<usize>,
    pub cap: Option<f64>,
    pub kappa: Option<f64>,
    pub lower: Option<f64>,
    pub upper: Option<f64>,
    pub sweeps: usize,
    pub max_residual: Option<f64>,
    pub wall_seconds: f64,
}

pub const FULL_HEADER: [&str; 10] = ["d", "p", "n", "cap", "kappa", "lower", "upper", "sweeps", "max_residual", "wall_seconds"];
pub const SWEEP_HEADER: [&str; 8] = ["n", "cap", "kappa", "lower", "upper", "sweeps", "max_residual", "wall_seconds"];

/// 17 significant digits: parses back to the same `f64`.
pub fn format_f64(v: f64) -> String {
    format!("{v:.16e}")
}

fn opt_f64(v: Option<f64>) -> String {
    v.map(format_f64).unwrap_or_default()
}

fn opt_usize(v: Option<usize>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

impl RunRecord {
    pub fn field(&self, name: &str) -> String {
        match name {
            "d" => opt_usize(self.d),
            "p" => format_f64(self.p),
            "n" => opt_usize(self.n),
            "cap" => opt_f64(self.cap),
            "kappa" => opt_f64(self.kappa),
            "lower" => opt_f64(self.lower),
            "upper" => opt_f64(self.upper),
            "sweeps" => self.sweeps.to_string(),
            "max_residual" => opt_f64(self.max_residual),
            "wall_seconds" => format_f64(self.wall_seconds),
            other => panic!("unknown column {other}"),
        }
    }

    pub fn csv_row(&self, header: &[&str]) -> Vec<String> {
        header.iter().map(|h| self.field(h)).collect()
    }

    /// Reads a row written with `header`; `d` and `p` are taken from the
    /// arguments when they are not columns.
    pub fn from_csv(header: &StringRecord, row: &StringRecord, d: Option<usize>, p: f64) -> Result<Self, String> {
        let get = |name: &str| -> Option<&str> { header.iter().position(|h| h == name).and_then(|i| row.get(i)) };
        let float = |name: &str| -> Result<Option<f64>, String> {
            match get(name) {
                None | Some("") => Ok(None),
                Some(s) => s.parse().map(Some).map_err(|_| format!("column {name}: `{s}` is not a number")),
            }
        };
        let int = |name: &str| -> Result<Option<usize>, String> {
            match get(name) {
                None | Some("") => Ok(None),
                Some(s) => s.parse().map(Some).map_err(|_| format!("column {name}: `{s}` is not an integer")),
            }
        };
        Ok(RunRecord {
            d: if header.iter().any(|h| h == "d") { int("d")? } else { d },
            p: float("p")?.unwrap_or(p),
            n: int("n")?,
            cap: float("cap")?,
            kappa: float("kappa")?,
            lower: float("lower")?,
            upper: float("upper")?,
            sweeps: int("sweeps")?.unwrap_or(0),
            max_residual: float("max_residual")?,
            wall_seconds: float("wall_seconds")?.unwrap_or(0.0),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> RunRecord {
        RunRecord {
            d: Some(2),
            p: 2.0,
            n: Some(16),
            cap: Some(1.0 / 3.0),
            kappa: Some(std::f64::consts::PI * 0.1),
            lower: Some(0.1 + 0.2),
            upper: None,
            sweeps: 17,
            max_residual: Some(9.87654321e-9),
            wall_seconds: 0.0123,
        }
    }

    #[test]
    fn csv_round_trip_is_bit_exact() {
        let rec = sample();
        for header in [&FULL_HEADER[..], &SWEEP_HEADER[..]] {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(header).unwrap();
            w.write_record(rec.csv_row(header)).unwrap();
            let bytes = w.into_inner().unwrap();
            let mut r = csv::Reader::from_reader(bytes.as_slice());
            let head = r.headers().unwrap().clone();
            let row = r.records().next().unwrap().unwrap();
            let back = RunRecord::from_csv(&head, &row, Some(2), 2.0).unwrap();
            assert_eq!(back, rec);
            assert_eq!(back.cap.unwrap().to_bits(), rec.cap.unwrap().to_bits());
        }
    }

    #[test]
    fn json_round_trip() {
        let rec = sample();
        let text = serde_json::to_string(&rec).unwrap();
        assert!(text.contains("\"upper\":null"));
        assert_eq!(serde_json::from_str::<RunRecord>(&text).unwrap(), rec);
    }
}
