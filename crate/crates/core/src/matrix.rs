use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::simplex::{SUniformVector, SimplexVector};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Domain {
    /// Entries in `[-1, 1]`.
    Signed,
    /// Entries in `[0, 1]`.
    Unsigned,
}

impl Domain {
    pub fn lower(self) -> f64 {
        match self {
            Domain::Signed => -1.0,
            Domain::Unsigned => 0.0,
        }
    }

    pub fn contains(self, v: f64) -> bool {
        v >= self.lower() && v <= 1.0
    }

    pub fn clamp(self, v: f64) -> f64 {
        v.clamp(self.lower(), 1.0)
    }
}

/// Dense row-major `n x m` matrix whose entries lie in a declared domain.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MatrixJson", into = "MatrixJson")]
pub struct BoundedMatrix {
    rows: usize,
    cols: usize,
    domain: Domain,
    data: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct MatrixJson {
    rows: usize,
    cols: usize,
    domain: Domain,
    data: Vec<f64>,
}

impl TryFrom<MatrixJson> for BoundedMatrix {
    type Error = Error;

    fn try_from(j: MatrixJson) -> Result<Self> {
        BoundedMatrix::new(j.rows, j.cols, j.domain, j.data)
    }
}

impl From<BoundedMatrix> for MatrixJson {
    fn from(a: BoundedMatrix) -> Self {
        MatrixJson {
            rows: a.rows,
            cols: a.cols,
            domain: a.domain,
            data: a.data,
        }
    }
}

impl BoundedMatrix {
    pub fn new(rows: usize, cols: usize, domain: Domain, data: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidMatrix(format!("empty shape {rows}x{cols}")));
        }
        if data.len() != rows * cols {
            return Err(Error::InvalidMatrix(format!(
                "{rows}x{cols} matrix needs {} entries, got {}",
                rows * cols,
                data.len()
            )));
        }
        if let Some((k, v)) = data.iter().enumerate().find(|(_, &v)| !domain.contains(v)) {
            return Err(Error::InvalidMatrix(format!(
                "entry ({}, {}) = {v} outside {domain:?} domain",
                k / cols,
                k % cols
            )));
        }
        Ok(Self {
            rows,
            cols,
            domain,
            data,
        })
    }

    pub fn from_rows(domain: Domain, rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        let m = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != m) {
            return Err(Error::InvalidMatrix("ragged rows".into()));
        }
        Self::new(n, m, domain, rows.concat())
    }

    pub fn identity(m: usize) -> Self {
        let mut data = vec![0.0; m * m];
        for i in 0..m {
            data[i * m + i] = 1.0;
        }
        Self::new(m, m, Domain::Unsigned, data).expect("identity is valid")
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    /// Stack matrices with equal column counts on top of each other.
    pub fn vstack(parts: &[BoundedMatrix]) -> Result<Self> {
        let first = parts
            .first()
            .ok_or_else(|| Error::InvalidMatrix("nothing to stack".into()))?;
        let cols = first.cols;
        let domain = if parts.iter().all(|p| p.domain == Domain::Unsigned) {
            Domain::Unsigned
        } else {
            Domain::Signed
        };
        if parts.iter().any(|p| p.cols != cols) {
            return Err(Error::DimensionMismatch(
                "stacked matrices differ in column count".into(),
            ));
        }
        let rows = parts.iter().map(|p| p.rows).sum();
        let data = parts.iter().flat_map(|p| p.data.iter().copied()).collect();
        Self::new(rows, cols, domain, data)
    }

    /// `t = A x`, clamped into the domain to absorb round-off.
    pub fn mat_vec(&self, x: &SimplexVector) -> Result<Vec<f64>> {
        self.mat_vec_slice(x.as_slice())
    }

    pub fn mat_vec_slice(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.cols {
            return Err(Error::DimensionMismatch(format!(
                "matrix has {} columns, vector has {} entries",
                self.cols,
                x.len()
            )));
        }
        Ok((0..self.rows)
            .map(|i| {
                let dot: f64 = self.row(i).iter().zip(x).map(|(a, b)| a * b).sum();
                self.domain.clamp(dot)
            })
            .collect())
    }

    /// `A x̃` for an s-uniform vector, summing only populated columns.
    pub fn mat_vec_counts(&self, x: &SUniformVector) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.rows];
        self.mat_vec_counts_into(x.counts(), &mut out)?;
        Ok(out)
    }

    pub fn mat_vec_counts_into(&self, counts: &[usize], out: &mut [f64]) -> Result<()> {
        if counts.len() != self.cols || out.len() != self.rows {
            return Err(Error::DimensionMismatch(format!(
                "matrix is {}x{}, counts have {} entries",
                self.rows,
                self.cols,
                counts.len()
            )));
        }
        let s: usize = counts.iter().sum();
        let inv = 1.0 / s as f64;
        out.iter_mut().for_each(|v| *v = 0.0);
        for (j, &c) in counts.iter().enumerate() {
            if c == 0 {
                continue;
            }
            let w = c as f64;
            for (i, o) in out.iter_mut().enumerate() {
                *o += w * self.data[i * self.cols + j];
            }
        }
        for o in out.iter_mut() {
            *o = self.domain.clamp(*o * inv);
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn identity_picks_column() {
        let a = BoundedMatrix::identity(2);
        assert_eq!(
            a.mat_vec(&SimplexVector::vertex(2, 0)).unwrap(),
            vec![1.0, 0.0]
        );
    }

    #[test]
    fn constant_rows() {
        let a = BoundedMatrix::new(3, 4, Domain::Unsigned, vec![1.0; 12]).unwrap();
        let x = SimplexVector::new(vec![0.1, 0.2, 0.3, 0.4]).unwrap();
        assert_eq!(a.mat_vec(&x).unwrap(), vec![1.0; 3]);
    }

    #[test]
    fn signed_symmetry_cancels() {
        let a =
            BoundedMatrix::from_rows(Domain::Signed, &[vec![1.0, -1.0], vec![-1.0, 1.0]]).unwrap();
        let x = SimplexVector::uniform(2);
        assert_eq!(a.mat_vec(&x).unwrap(), vec![0.0, 0.0]);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(BoundedMatrix::new(1, 2, Domain::Unsigned, vec![0.5, -0.1]).is_err());
        assert!(BoundedMatrix::new(1, 2, Domain::Signed, vec![0.5, 1.0 + 1e-15]).is_err());
        assert!(BoundedMatrix::new(1, 2, Domain::Signed, vec![0.5]).is_err());
        let a = BoundedMatrix::identity(3);
        assert!(matches!(
            a.mat_vec(&SimplexVector::uniform(2)),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn json_round_trip() {
        let a =
            BoundedMatrix::from_rows(Domain::Signed, &[vec![0.25, -1.0], vec![0.0, 1.0]]).unwrap();
        let s = serde_json::to_string(&a).unwrap();
        assert!(s.contains("\"domain\":\"signed\""));
        let b: BoundedMatrix = serde_json::from_str(&s).unwrap();
        assert_eq!(a, b);
        let bad = r#"{"rows":1,"cols":1,"domain":"unsigned","data":[-0.5]}"#;
        assert!(serde_json::from_str::<BoundedMatrix>(bad).is_err());
    }

    #[test]
    fn counts_agree_with_dense() {
        let a = BoundedMatrix::from_rows(
            Domain::Signed,
            &[vec![0.3, -0.7, 1.0], vec![-1.0, 0.2, 0.9]],
        )
        .unwrap();
        let x = SUniformVector::new(vec![2, 0, 3]).unwrap();
        let dense = a.mat_vec(&x.to_simplex()).unwrap();
        let sparse = a.mat_vec_counts(&x).unwrap();
        for (d, s) in dense.iter().zip(&sparse) {
            assert!((d - s).abs() < 1e-12);
        }
    }

    fn matrix_and_points() -> impl Strategy<Value = (BoundedMatrix, Vec<f64>, Vec<f64>, f64)> {
        (1usize..6, 1usize..6).prop_flat_map(|(n, m)| {
            (
                proptest::collection::vec(-1.0f64..=1.0, n * m),
                proptest::collection::vec(0.01f64..1.0, m),
                proptest::collection::vec(0.01f64..1.0, m),
                0.0f64..=1.0,
            )
                .prop_map(move |(data, x, y, theta)| {
                    let norm = |v: Vec<f64>| {
                        let s: f64 = v.iter().sum();
                        v.into_iter().map(|e| e / s).collect::<Vec<_>>()
                    };
                    (
                        BoundedMatrix::new(n, m, Domain::Signed, data).unwrap(),
                        norm(x),
                        norm(y),
                        theta,
                    )
                })
        })
    }

    proptest! {
        #[test]
        fn mat_vec_is_linear((a, x, y, theta) in matrix_and_points()) {
            let mix: Vec<f64> = x.iter().zip(&y).map(|(p, q)| theta * p + (1.0 - theta) * q).collect();
            let tm = a.mat_vec(&SimplexVector::new(mix).unwrap()).unwrap();
            let tx = a.mat_vec(&SimplexVector::new(x).unwrap()).unwrap();
            let ty = a.mat_vec(&SimplexVector::new(y).unwrap()).unwrap();
            for i in 0..a.rows() {
                let lin = theta * tx[i] + (1.0 - theta) * ty[i];
                prop_assert!((tm[i] - lin).abs() <= 1e-12);
                prop_assert!(a.domain().contains(tm[i]));
            }
        }

        #[test]
        fn empirical_vector_is_exactly_on_simplex(
            w in proptest::collection::vec(0.01f64..1.0, 1..6), s in 1usize..40, seed in any::<u64>()
        ) {
            let total: f64 = w.iter().sum();
            let x = SimplexVector::new(w.iter().map(|v| v / total).collect()).unwrap();
            let e = crate::simplex::empirical_distribution(&x, s, &mut crate::rng::SeededRng::new(seed));
            prop_assert_eq!(e.counts().iter().sum::<usize>(), s);
            prop_assert!(SimplexVector::new(e.entries()).is_ok());
        }
    }
}
