use rug::{Integer, Rational};

/// Dense matrix over ℚ, row-major.
#[derive(Clone, PartialEq, Debug)]
pub struct RationalMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Rational>,
}

/// Fraction-free row echelon form of an integer-scaled copy of a matrix.
///
/// Rows are scaled by positive integers before elimination, which leaves the
/// row space (and hence rank and nullspace) unchanged.
#[derive(Clone, Debug)]
pub struct EchelonForm {
    rows: Vec<Vec<Integer>>,
    pivots: Vec<usize>,
    cols: usize,
}

impl RationalMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        RationalMatrix {
            rows,
            cols,
            data: vec![Rational::new(); rows * cols],
        }
    }

    pub fn from_rows(rows: Vec<Vec<Rational>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        RationalMatrix {
            rows: r,
            cols: c,
            data: rows.into_iter().flatten().collect(),
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &Rational {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Rational) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[Rational] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn mul_vec(&self, x: &[Rational]) -> Vec<Rational> {
        assert_eq!(x.len(), self.cols);
        (0..self.rows)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(x)
                    .filter(|(a, b)| !a.cmp0().is_eq() && !b.cmp0().is_eq())
                    .map(|(a, b)| Rational::from(a * b))
                    .sum()
            })
            .collect()
    }

    fn integer_rows(&self, extra: Option<&[Rational]>) -> Vec<Vec<Integer>> {
        (0..self.rows)
            .map(|i| {
                let mut row: Vec<&Rational> = self.row(i).iter().collect();
                if let Some(b) = extra {
                    row.push(&b[i]);
                }
                let lcm = row
                    .iter()
                    .fold(Integer::from(1), |acc, x| acc.lcm(x.denom()));
                row.iter()
                    .map(|x| Integer::from(&lcm / x.denom()) * x.numer())
                    .collect()
            })
            .collect()
    }

    pub fn echelon(&self) -> EchelonForm {
        EchelonForm::from_integer_rows(self.integer_rows(None), self.cols)
    }

    pub fn rank(&self) -> usize {
        self.echelon().rank()
    }

    pub fn corank(&self) -> usize {
        self.cols - self.rank()
    }

    /// Basis of `{x : Mx = 0}`, one vector per free column.
    pub fn nullspace(&self) -> Vec<Vec<Rational>> {
        self.echelon().nullspace()
    }

    /// A solution of `Mx = b` with all free variables set to zero, or `None`
    /// if `b` is outside the column space.
    pub fn solve_particular(&self, b: &[Rational]) -> Option<Vec<Rational>> {
        assert_eq!(b.len(), self.rows);
        let ech = EchelonForm::from_integer_rows(self.integer_rows(Some(b)), self.cols + 1);
        if ech.pivots.last() == Some(&self.cols) {
            return None;
        }
        Some(ech.back_substitute(None))
    }
}

impl EchelonForm {
    fn from_integer_rows(mut m: Vec<Vec<Integer>>, cols: usize) -> Self {
        let nrows = m.len();
        let mut prev = Integer::from(1);
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..cols {
            if r == nrows {
                break;
            }
            let Some(p) = (r..nrows).find(|&i| !m[i][c].cmp0().is_eq()) else {
                continue;
            };
            m.swap(r, p);
            let (head, tail) = m.split_at_mut(r + 1);
            let pivot_row = &head[r];
            let piv = &pivot_row[c];
            for row in tail.iter_mut() {
                if row[c].cmp0().is_eq() {
                    // Still has to be scaled to keep later divisions exact.
                    for j in c + 1..cols {
                        if !row[j].cmp0().is_eq() {
                            row[j] *= piv;
                            row[j].div_exact_mut(&prev);
                        }
                    }
                    continue;
                }
                let lead = row[c].clone();
                for j in c + 1..cols {
                    let mut v = Integer::from(piv * &row[j]);
                    v -= Integer::from(&lead * &pivot_row[j]);
                    v.div_exact_mut(&prev);
                    row[j] = v;
                }
                row[c] = Integer::new();
            }
            prev = m[r][c].clone();
            pivots.push(c);
            r += 1;
        }
        m.truncate(r);
        EchelonForm {
            rows: m,
            pivots,
            cols,
        }
    }

    pub fn rank(&self) -> usize {
        self.pivots.len()
    }

    pub fn pivots(&self) -> &[usize] {
        &self.pivots
    }

    fn back_substitute(&self, free: Option<usize>) -> Vec<Rational> {
        // The last column is the right-hand side when solving; `free` selects a
        // nullspace direction instead.
        let n = if free.is_some() {
            self.cols
        } else {
            self.cols - 1
        };
        let mut x = vec![Rational::new(); n];
        if let Some(f) = free {
            x[f] = Rational::from(1);
        }
        for (i, &p) in self.pivots.iter().enumerate().rev() {
            let row = &self.rows[i];
            let mut acc = match free {
                Some(_) => Rational::new(),
                None => Rational::from(&row[n]),
            };
            for j in p + 1..n {
                if !row[j].cmp0().is_eq() && !x[j].cmp0().is_eq() {
                    acc -= Rational::from(&x[j] * &row[j]);
                }
            }
            x[p] = acc / &row[p];
        }
        x
    }

    pub fn nullspace(&self) -> Vec<Vec<Rational>> {
        let mut is_pivot = vec![false; self.cols];
        for &p in &self.pivots {
            is_pivot[p] = true;
        }
        (0..self.cols)
            .filter(|&c| !is_pivot[c])
            .map(|f| self.back_substitute(Some(f)))
            .collect()
    }
}
