//! Pauli-string Hamiltonian model.
//!
//! Parses the textual notation for interaction Hamiltonians ("zz+z1+1x",
//! "xxx + 2 yyy + 3 zzz"), builds dense matrices, and provides the collective
//! z-generator F_z, single-element Weyl matrices E_ij and coupling graphs.
//!
//! Conventions: qubit 1 is the leftmost letter and the most significant bit
//! of the computational index. Letters map to bare Pauli matrices by default;
//! `half_spin_convention` adds a factor 1/2 per non-identity letter. Every
//! invertibility verdict downstream is invariant under nonzero real scaling
//! of H, so the convention only affects reported norms.

use std::collections::BTreeMap;
use std::fmt;

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use crate::linalg::{C64, OperatorMatrix, RoleTag};

#[derive(Debug, Error)]
pub enum PauliError {
    #[error("parse error at position {position}: {reason}")]
    Parse { position: usize, reason: String },
    #[error("index {0} out of range for dimension {1}")]
    IndexOutOfRange(usize, usize),
    #[error("diagonal index i = j = {0} has no off-diagonal order")]
    DiagonalIndex(usize),
    #[error("qubit count {0} outside supported range {1}..={2}")]
    QubitCountOutOfRange(usize, usize, usize),
    #[error("graph error: {0}")]
    Graph(String),
}

/// Single-qubit Pauli letter; `I` is written `1` in the text notation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PauliLetter {
    I,
    X,
    Y,
    Z,
}

impl PauliLetter {
    pub fn from_char(ch: char) -> Option<Self> {
        match ch {
            '1' => Some(PauliLetter::I),
            'x' | 'X' => Some(PauliLetter::X),
            'y' | 'Y' => Some(PauliLetter::Y),
            'z' | 'Z' => Some(PauliLetter::Z),
            _ => None,
        }
    }

    pub fn to_char(self) -> char {
        match self {
            PauliLetter::I => '1',
            PauliLetter::X => 'x',
            PauliLetter::Y => 'y',
            PauliLetter::Z => 'z',
        }
    }

    /// Dense 2x2 matrix of the letter.
    pub fn matrix(self) -> DMatrix<C64> {
        let o = C64::new(1.0, 0.0);
        let z = C64::new(0.0, 0.0);
        let i = C64::new(0.0, 1.0);
        let entries = match self {
            PauliLetter::I => [o, z, z, o],
            PauliLetter::X => [z, o, o, z],
            PauliLetter::Y => [z, -i, i, z],
            PauliLetter::Z => [o, z, z, -o],
        };
        DMatrix::from_row_slice(2, 2, &entries)
    }
}

/// One signed, weighted Pauli string over n qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct PauliString {
    pub letters: Vec<PauliLetter>,
    pub coefficient: f64,
}

impl PauliString {
    pub fn new(letters: Vec<PauliLetter>, coefficient: f64) -> Self {
        PauliString { letters, coefficient }
    }

    pub fn n(&self) -> usize {
        self.letters.len()
    }

    /// Count of non-identity letters (the interaction order).
    pub fn weight(&self) -> usize {
        self.letters.iter().filter(|&&l| l != PauliLetter::I).count()
    }

    /// Qubit indices (0-based) carrying a non-identity letter.
    pub fn support(&self) -> Vec<usize> {
        self.letters
            .iter()
            .enumerate()
            .filter(|(_, &l)| l != PauliLetter::I)
            .map(|(i, _)| i)
            .collect()
    }

    pub fn pattern_string(&self) -> String {
        self.letters.iter().map(|l| l.to_char()).collect()
    }

    /// Row-sparse action of the bare string matrix: for row `r`, the single
    /// nonzero column and its value.
    pub fn row_action(&self, r: usize) -> (usize, C64) {
        let n = self.n();
        let mut col = 0usize;
        let mut val = C64::new(1.0, 0.0);
        for (q, &l) in self.letters.iter().enumerate() {
            let bit = (r >> (n - 1 - q)) & 1;
            let (cbit, factor) = match l {
                PauliLetter::I => (bit, C64::new(1.0, 0.0)),
                PauliLetter::X => (1 - bit, C64::new(1.0, 0.0)),
                PauliLetter::Y => (
                    1 - bit,
                    if bit == 0 { C64::new(0.0, -1.0) } else { C64::new(0.0, 1.0) },
                ),
                PauliLetter::Z => {
                    (bit, if bit == 0 { C64::new(1.0, 0.0) } else { C64::new(-1.0, 0.0) })
                }
            };
            col |= cbit << (n - 1 - q);
            val *= factor;
        }
        (col, val)
    }

    /// Dense bare-letter matrix of this string scaled by `scale`.
    pub fn accumulate_into(&self, m: &mut DMatrix<C64>, scale: f64) {
        let dim = 1usize << self.n();
        for r in 0..dim {
            let (cidx, val) = self.row_action(r);
            m[(r, cidx)] += val * C64::new(scale, 0.0);
        }
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", self.coefficient, self.pattern_string())
    }
}

/// Parsed sum of signed, weighted Pauli strings over n qubits.
#[derive(Debug, Clone)]
pub struct HamiltonianSpec {
    pub n: usize,
    pub terms: Vec<PauliString>,
    pub half_spin_convention: bool,
}

impl HamiltonianSpec {
    /// Merge duplicate letter patterns and drop zero-coefficient terms.
    pub fn normalized(mut self) -> Self {
        let mut merged: BTreeMap<Vec<PauliLetter>, f64> = BTreeMap::new();
        for t in self.terms.drain(..) {
            *merged.entry(t.letters).or_insert(0.0) += t.coefficient;
        }
        self.terms = merged
            .into_iter()
            .filter(|(_, c)| *c != 0.0)
            .map(|(letters, c)| PauliString::new(letters, c))
            .collect();
        self
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Text form that reparses to the same spec (coefficients printed with
    /// shortest round-trip formatting, so the rebuild is exact).
    pub fn render(&self) -> String {
        if self.terms.is_empty() {
            return String::new();
        }
        let mut out = String::new();
        for (k, t) in self.terms.iter().enumerate() {
            let coeff = t.coefficient;
            if k == 0 {
                if coeff < 0.0 {
                    out.push('-');
                }
            } else {
                out.push_str(if coeff < 0.0 { " - " } else { " + " });
            }
            let mag = coeff.abs();
            if mag != 1.0 {
                out.push_str(&format!("{}*", mag));
            }
            out.push_str(&t.pattern_string());
        }
        out
    }
}

/// Parse the Hamiltonian grammar:
/// `expr := term (('+'|'-') term)*`,
/// `term := [unsigned real] ['*'] letters`, `letters := {1,x,y,z}^n`,
/// whitespace ignored. Returns the spec with merged terms.
pub fn parse_hamiltonian(text: &str, n: usize) -> Result<HamiltonianSpec, PauliError> {
    if n == 0 {
        return Err(PauliError::QubitCountOutOfRange(0, 1, usize::MAX));
    }
    let chars: Vec<(usize, char)> = text.char_indices().collect();
    let mut terms = Vec::new();
    let mut pos = 0usize;

    let skip_ws = |pos: &mut usize| {
        while *pos < chars.len() && chars[*pos].1.is_whitespace() {
            *pos += 1;
        }
    };

    skip_ws(&mut pos);
    if pos >= chars.len() {
        return Err(PauliError::Parse { position: 0, reason: "empty expression".into() });
    }

    let mut sign = 1.0f64;
    if matches!(chars[pos].1, '+' | '-' | '−') {
        sign = if chars[pos].1 == '+' { 1.0 } else { -1.0 };
        pos += 1;
    }

    loop {
        skip_ws(&mut pos);
        let term_start = pos;
        if pos >= chars.len() {
            return Err(PauliError::Parse {
                position: chars.last().map(|(b, _)| *b).unwrap_or(0),
                reason: "empty term".into(),
            });
        }
        // scan the term body up to the next +/- separator, dropping whitespace
        let mut body = Vec::new();
        while pos < chars.len() && !matches!(chars[pos].1, '+' | '-' | '−') {
            if !chars[pos].1.is_whitespace() {
                body.push(chars[pos]);
            }
            pos += 1;
        }
        if body.len() < n {
            return Err(PauliError::Parse {
                position: chars.get(term_start).map(|(b, _)| *b).unwrap_or(0),
                reason: format!("term shorter than {} letters", n),
            });
        }
        // the last n characters are the letters; anything before is a coefficient
        let letters_part = &body[body.len() - n..];
        let coeff_part = &body[..body.len() - n];
        let mut letters = Vec::with_capacity(n);
        for &(bpos, ch) in letters_part {
            match PauliLetter::from_char(ch) {
                Some(l) => letters.push(l),
                None => {
                    return Err(PauliError::Parse {
                        position: bpos,
                        reason: format!("invalid letter '{}'", ch),
                    })
                }
            }
        }
        let mut coeff = 1.0f64;
        if !coeff_part.is_empty() {
            let mut s: String = coeff_part.iter().map(|(_, c)| *c).collect();
            if s.ends_with('*') {
                s.pop();
            }
            if s.is_empty() {
                return Err(PauliError::Parse {
                    position: coeff_part[0].0,
                    reason: "dangling '*'".into(),
                });
            }
            coeff = s.parse::<f64>().map_err(|_| PauliError::Parse {
                position: coeff_part[0].0,
                reason: format!("invalid coefficient '{}'", s),
            })?;
            if coeff < 0.0 {
                return Err(PauliError::Parse {
                    position: coeff_part[0].0,
                    reason: "coefficient must be unsigned; signs belong to separators".into(),
                });
            }
        }
        terms.push(PauliString::new(letters, sign * coeff));

        skip_ws(&mut pos);
        if pos >= chars.len() {
            break;
        }
        sign = match chars[pos].1 {
            '+' => 1.0,
            '-' | '−' => -1.0,
            _ => unreachable!(),
        };
        pos += 1;
    }

    Ok(HamiltonianSpec { n, terms, half_spin_convention: false }.normalized())
}

/// Dense Hermitian matrix of the spec.
pub fn build_matrix(spec: &HamiltonianSpec) -> OperatorMatrix {
    let dim = 1usize << spec.n;
    let mut m = DMatrix::<C64>::zeros(dim, dim);
    for t in &spec.terms {
        let mut scale = t.coefficient;
        if spec.half_spin_convention {
            scale *= 0.5f64.powi(t.weight() as i32);
        }
        t.accumulate_into(&mut m, scale);
    }
    OperatorMatrix::new(m, RoleTag::Hermitian).expect("real Pauli sums are Hermitian")
}

/// Diagonal of F_z in half-integer units (entry i, 1-based, times 2), built
/// by the Kronecker-sum recursion in exact integer arithmetic.
pub fn fz_diagonal_halves_vector(n: usize) -> Vec<i64> {
    let mut diag = vec![0i64];
    for _ in 0..n {
        let mut next = Vec::with_capacity(diag.len() * 2);
        for &d in &diag {
            next.push(d + 1);
        }
        for &d in &diag {
            next.push(d - 1);
        }
        diag = next;
    }
    diag
}

/// Collective z-generator F_z = Σ_ℓ 1⊗…⊗(σ_z/2)⊗…⊗1 as a dense diagonal.
pub fn collective_fz(n: usize) -> Result<OperatorMatrix, PauliError> {
    if !(1..=12).contains(&n) {
        return Err(PauliError::QubitCountOutOfRange(n, 1, 12));
    }
    let halves = fz_diagonal_halves_vector(n);
    let diag = DVector::from_iterator(
        halves.len(),
        halves.iter().map(|&h| C64::new(h as f64 / 2.0, 0.0)),
    );
    Ok(OperatorMatrix {
        mat: DMatrix::from_diagonal(&diag),
        role: RoleTag::Hermitian,
    })
}

/// 1-based index pair into a 2^n-dimensional Weyl basis element E_ij.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WeylIndex {
    pub i: usize,
    pub j: usize,
    pub n: usize,
}

impl WeylIndex {
    pub fn new(i: usize, j: usize, n: usize) -> Result<Self, PauliError> {
        let dim = 1usize << n;
        if i < 1 || i > dim {
            return Err(PauliError::IndexOutOfRange(i, dim));
        }
        if j < 1 || j > dim {
            return Err(PauliError::IndexOutOfRange(j, dim));
        }
        Ok(WeylIndex { i, j, n })
    }
}

/// Single-element matrix E_ij: 1 in row i, column j, zeros elsewhere.
pub fn weyl_matrix(idx: &WeylIndex) -> OperatorMatrix {
    let dim = 1usize << idx.n;
    let mut m = DMatrix::<C64>::zeros(dim, dim);
    m[(idx.i - 1, idx.j - 1)] = C64::new(1.0, 0.0);
    OperatorMatrix { mat: m, role: RoleTag::General }
}

/// Pair-interaction kind carried by a coupling-graph edge.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EdgeKind {
    /// Ising zz.
    ZZ,
    /// Heisenberg xx + yy.
    XX,
    /// Heisenberg xx + κ·yy with κ ∈ [-1, 1].
    XY(f64),
    /// Double-quantum xx - yy.
    XmX,
}

impl EdgeKind {
    pub fn kappa(&self) -> Option<f64> {
        match self {
            EdgeKind::XX => Some(1.0),
            EdgeKind::XY(k) => Some(*k),
            EdgeKind::XmX => Some(-1.0),
            EdgeKind::ZZ => None,
        }
    }
}

impl fmt::Display for EdgeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EdgeKind::ZZ => write!(f, "zz"),
            EdgeKind::XX => write!(f, "xx"),
            EdgeKind::XY(k) => write!(f, "xy:{}", k),
            EdgeKind::XmX => write!(f, "xmx"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GraphEdge {
    /// 0-based endpoints with k < l.
    pub k: usize,
    pub l: usize,
    pub kind: EdgeKind,
    pub weight: f64,
}

/// Coupling topology: vertices are qubits, edges are nonzero pair couplings.
#[derive(Debug, Clone)]
pub struct CouplingGraph {
    pub n: usize,
    pub edges: Vec<GraphEdge>,
}

impl CouplingGraph {
    /// Build from 1-based edge tuples. Duplicate edges are rejected; a
    /// disconnected topology only warns here (operations that require
    /// connectivity reject it themselves).
    pub fn new(n: usize, edges: Vec<(usize, usize, EdgeKind, f64)>) -> Result<Self, PauliError> {
        let mut out = Vec::with_capacity(edges.len());
        let mut seen = std::collections::BTreeSet::new();
        for (a, b, kind, w) in edges {
            if a == b || a < 1 || b < 1 || a > n || b > n {
                return Err(PauliError::Graph(format!("invalid edge ({}, {})", a, b)));
            }
            if w == 0.0 {
                return Err(PauliError::Graph(format!("zero weight on edge ({}, {})", a, b)));
            }
            let (k, l) = if a < b { (a - 1, b - 1) } else { (b - 1, a - 1) };
            if !seen.insert((k, l)) {
                return Err(PauliError::Graph(format!(
                    "duplicate edge ({}, {})",
                    k + 1,
                    l + 1
                )));
            }
            out.push(GraphEdge { k, l, kind, weight: w });
        }
        let g = CouplingGraph { n, edges: out };
        if !g.is_connected() {
            log::warn!("coupling graph on {} vertices is not connected", n);
        }
        Ok(g)
    }

    /// Parse the plain-text file format: one edge per line `k l kind J`
    /// with kind in `zz|xx|xy:<κ>|xmx`, 1-based vertices, '#' comments.
    pub fn parse(text: &str) -> Result<Self, PauliError> {
        let mut edges = Vec::new();
        let mut max_vertex = 0usize;
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() != 4 {
                return Err(PauliError::Graph(format!(
                    "line {}: expected 'k l kind J', got '{}'",
                    lineno + 1,
                    line
                )));
            }
            let k: usize = fields[0].parse().map_err(|_| {
                PauliError::Graph(format!("line {}: bad vertex '{}'", lineno + 1, fields[0]))
            })?;
            let l: usize = fields[1].parse().map_err(|_| {
                PauliError::Graph(format!("line {}: bad vertex '{}'", lineno + 1, fields[1]))
            })?;
            let kind = match fields[2] {
                "zz" => EdgeKind::ZZ,
                "xx" => EdgeKind::XX,
                "xmx" => EdgeKind::XmX,
                s if s.starts_with("xy:") => {
                    let kappa: f64 = s[3..].parse().map_err(|_| {
                        PauliError::Graph(format!("line {}: bad κ in '{}'", lineno + 1, s))
                    })?;
                    if !(-1.0..=1.0).contains(&kappa) {
                        return Err(PauliError::Graph(format!(
                            "line {}: κ = {} outside [-1, 1]",
                            lineno + 1,
                            kappa
                        )));
                    }
                    if kappa == -1.0 {
                        EdgeKind::XmX
                    } else {
                        EdgeKind::XY(kappa)
                    }
                }
                s => {
                    return Err(PauliError::Graph(format!(
                        "line {}: unknown kind '{}'",
                        lineno + 1,
                        s
                    )))
                }
            };
            let w: f64 = fields[3].parse().map_err(|_| {
                PauliError::Graph(format!("line {}: bad weight '{}'", lineno + 1, fields[3]))
            })?;
            max_vertex = max_vertex.max(k).max(l);
            edges.push((k, l, kind, w));
        }
        if edges.is_empty() {
            return Err(PauliError::Graph("no edges in graph file".into()));
        }
        CouplingGraph::new(max_vertex, edges)
    }

    pub fn is_connected(&self) -> bool {
        if self.n == 0 {
            return false;
        }
        let mut adj = vec![Vec::new(); self.n];
        for e in &self.edges {
            adj[e.k].push(e.l);
            adj[e.l].push(e.k);
        }
        let mut seen = vec![false; self.n];
        let mut stack = vec![0usize];
        seen[0] = true;
        while let Some(v) = stack.pop() {
            for &w in &adj[v] {
                if !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        seen.iter().all(|&s| s)
    }

    pub fn kinds_homogeneous(&self) -> bool {
        self.edges
            .windows(2)
            .all(|w| std::mem::discriminant(&w[0].kind) == std::mem::discriminant(&w[1].kind))
    }
}

/// Expand a coupling graph into its Pauli-string Hamiltonian:
/// zz edge → J·(z_k z_l), xx → J·(xx + yy), xy:κ → J·(xx + κ·yy),
/// xmx → J·(xx - yy).
pub fn graph_to_hamiltonian(g: &CouplingGraph) -> HamiltonianSpec {
    let mut terms = Vec::new();
    let mut push = |k: usize, l: usize, a: PauliLetter, b: PauliLetter, c: f64| {
        if c == 0.0 {
            return;
        }
        let mut letters = vec![PauliLetter::I; g.n];
        letters[k] = a;
        letters[l] = b;
        terms.push(PauliString::new(letters, c));
    };
    for e in &g.edges {
        match e.kind {
            EdgeKind::ZZ => push(e.k, e.l, PauliLetter::Z, PauliLetter::Z, e.weight),
            EdgeKind::XX => {
                push(e.k, e.l, PauliLetter::X, PauliLetter::X, e.weight);
                push(e.k, e.l, PauliLetter::Y, PauliLetter::Y, e.weight);
            }
            EdgeKind::XY(kappa) => {
                push(e.k, e.l, PauliLetter::X, PauliLetter::X, e.weight);
                push(e.k, e.l, PauliLetter::Y, PauliLetter::Y, e.weight * kappa);
            }
            EdgeKind::XmX => {
                push(e.k, e.l, PauliLetter::X, PauliLetter::X, e.weight);
                push(e.k, e.l, PauliLetter::Y, PauliLetter::Y, -e.weight);
            }
        }
    }
    HamiltonianSpec { n: g.n, terms, half_spin_convention: false }.normalized()
}

// ---------------------------------------------------------------------------
// Symbolic Pauli algebra: products and commutators stay inside the group.

/// Product of two letter patterns as (i-power phase, letters).
/// σ_a σ_b = δ_ab 1 + i ε_abc σ_c, tracked exactly as a power of i.
pub fn pauli_mul(a: &[PauliLetter], b: &[PauliLetter]) -> (u8, Vec<PauliLetter>) {
    debug_assert_eq!(a.len(), b.len());
    let mut phase = 0u8; // power of i mod 4
    let mut out = Vec::with_capacity(a.len());
    for (&la, &lb) in a.iter().zip(b.iter()) {
        use PauliLetter::*;
        let (p, l) = match (la, lb) {
            (I, l) => (0, l),
            (l, I) => (0, l),
            (X, X) | (Y, Y) | (Z, Z) => (0, I),
            (X, Y) => (1, Z),
            (Y, X) => (3, Z),
            (Y, Z) => (1, X),
            (Z, Y) => (3, X),
            (Z, X) => (1, Y),
            (X, Z) => (3, Y),
        };
        phase = (phase + p) % 4;
        out.push(l);
    }
    (phase, out)
}

/// Whether two letter patterns commute.
pub fn pauli_commute(a: &[PauliLetter], b: &[PauliLetter]) -> bool {
    let anti = a
        .iter()
        .zip(b.iter())
        .filter(|(&la, &lb)| la != PauliLetter::I && lb != PauliLetter::I && la != lb)
        .count();
    anti % 2 == 0
}

pub fn phase_to_c64(phase: u8) -> C64 {
    match phase % 4 {
        0 => C64::new(1.0, 0.0),
        1 => C64::new(0.0, 1.0),
        2 => C64::new(-1.0, 0.0),
        _ => C64::new(0.0, -1.0),
    }
}

/// Pauli-basis index of a letter pattern (base-4 digits, qubit 1 most
/// significant; all-identity = 0).
pub fn pattern_index(letters: &[PauliLetter]) -> usize {
    letters.iter().fold(0usize, |acc, &l| {
        acc * 4
            + match l {
                PauliLetter::I => 0,
                PauliLetter::X => 1,
                PauliLetter::Y => 2,
                PauliLetter::Z => 3,
            }
    })
}

pub fn index_pattern(mut idx: usize, n: usize) -> Vec<PauliLetter> {
    let mut out = vec![PauliLetter::I; n];
    for q in (0..n).rev() {
        out[q] = match idx % 4 {
            0 => PauliLetter::I,
            1 => PauliLetter::X,
            2 => PauliLetter::Y,
            _ => PauliLetter::Z,
        };
        idx /= 4;
    }
    out
}

/// Real coefficients of a Hermitian matrix over the full Pauli-string basis,
/// indexed by [`pattern_index`]. Uses the one-nonzero-per-row structure of
/// Pauli strings, O(n · 8^n) overall.
pub fn pauli_decompose(h: &DMatrix<C64>) -> Vec<f64> {
    let dim = h.nrows();
    let n = dim.trailing_zeros() as usize;
    let total = 4usize.pow(n as u32);
    let mut coeffs = vec![0.0f64; total];
    for (idx, slot) in coeffs.iter_mut().enumerate() {
        let probe = PauliString::new(index_pattern(idx, n), 1.0);
        let mut acc = C64::new(0.0, 0.0);
        for r in 0..dim {
            let (cidx, val) = probe.row_action(r);
            // tr(P H) = Σ_r P[r, c(r)] H[c(r), r]
            acc += val * h[(cidx, r)];
        }
        *slot = acc.re / dim as f64;
    }
    coeffs
}
