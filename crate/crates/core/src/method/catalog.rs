use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::linalg::{solve_dense, Lu, RMatrix};

/// Minimum separation between nodes.
pub const NODE_GAP_TOL: f64 = 1e-12;
/// Tolerance on `1ᵀw = 1` and `1ᵀv = 1` at suite construction.
pub const SUM_TOL: f64 = 1e-9;

/// Off-step nodes `c₁, .., c_s`: pairwise distinct, not necessarily sorted.
#[derive(Clone, Debug, PartialEq)]
pub struct Nodes {
    c: Vec<f64>,
}

impl Nodes {
    pub fn new(c: Vec<f64>) -> Result<Self> {
        if c.len() < 2 {
            return Err(Error::DegenerateNodes(format!(
                "need at least two nodes, got {}",
                c.len()
            )));
        }
        if c.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("node value".into()));
        }
        for i in 0..c.len() {
            for j in (i + 1)..c.len() {
                if (c[i] - c[j]).abs() <= NODE_GAP_TOL {
                    return Err(Error::DegenerateNodes(format!(
                        "nodes {} and {} coincide ({})",
                        i + 1,
                        j + 1,
                        c[i]
                    )));
                }
            }
        }
        Ok(Self { c })
    }

    pub fn values(&self) -> &[f64] {
        &self.c
    }

    pub fn len(&self) -> usize {
        self.c.len()
    }

    pub fn is_empty(&self) -> bool {
        self.c.is_empty()
    }

    /// `c₂ − c₁`.
    pub fn d1(&self) -> f64 {
        self.c[1] - self.c[0]
    }

    /// `c₃ − c₂`; only meaningful for three or more nodes.
    pub fn d3(&self) -> f64 {
        self.c[2] - self.c[1]
    }

    pub fn shifted(&self, delta: f64) -> Self {
        Self {
            c: self.c.iter().map(|x| x + delta).collect(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum StageRole {
    Start,
    Standard,
    End,
}

impl fmt::Display for StageRole {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            StageRole::Start => "start",
            StageRole::Standard => "standard",
            StageRole::End => "end",
        })
    }
}

/// One coefficient triple `(A, B, K)` of a peer method. `K` is diagonal and
/// kept as its diagonal; `B` is absent for start sets; `Ã` (lower-triangular
/// Newton approximation of a full `A`) only appears in end sets.
#[derive(Clone, Debug, PartialEq)]
pub struct StageMatrixSet {
    role: StageRole,
    a: RMatrix,
    b: Option<RMatrix>,
    k: Vec<f64>,
    a_tilde: Option<RMatrix>,
}

fn triangular_tol(m: &RMatrix) -> f64 {
    1e-14 * m.inf_norm()
}

impl StageMatrixSet {
    pub fn new(
        role: StageRole,
        a: RMatrix,
        b: Option<RMatrix>,
        k: Vec<f64>,
        a_tilde: Option<RMatrix>,
    ) -> Result<Self> {
        let s = a.rows();
        if !a.is_square() {
            return Err(Error::DimensionMismatch(format!(
                "A of the {role} set is {}x{}",
                a.rows(),
                a.cols()
            )));
        }
        if k.len() != s {
            return Err(Error::DimensionMismatch(format!(
                "K of the {role} set has {} entries, expected {s}",
                k.len()
            )));
        }
        if k.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite(format!("K of the {role} set")));
        }
        match (&b, role) {
            (Some(_), StageRole::Start) => {
                return Err(Error::InvariantViolation("start set has no B".into()))
            }
            (None, StageRole::Standard | StageRole::End) => {
                return Err(Error::MissingMatrix("B"));
            }
            (Some(b), _) if (b.rows(), b.cols()) != (s, s) => {
                return Err(Error::DimensionMismatch(format!(
                    "B of the {role} set is {}x{}, expected {s}x{s}",
                    b.rows(),
                    b.cols()
                )));
            }
            _ => {}
        }
        if role != StageRole::End && !a.is_lower_triangular(triangular_tol(&a)) {
            return Err(Error::InvariantViolation(format!(
                "A lower triangular ({role} set)"
            )));
        }
        if let Some(at) = &a_tilde {
            if role != StageRole::End {
                return Err(Error::InvariantViolation(
                    "Atilde only belongs to the end set".into(),
                ));
            }
            if (at.rows(), at.cols()) != (s, s) {
                return Err(Error::DimensionMismatch("Atilde shape".into()));
            }
            if !at.is_lower_triangular(triangular_tol(at)) {
                return Err(Error::InvariantViolation("Atilde lower triangular".into()));
            }
            Lu::factor(at).map_err(|_| Error::InvariantViolation("Atilde nonsingular".into()))?;
        }
        Lu::factor(&a)
            .map_err(|_| Error::InvariantViolation(format!("A nonsingular ({role} set)")))?;
        Ok(Self {
            role,
            a,
            b,
            k,
            a_tilde,
        })
    }

    pub fn role(&self) -> StageRole {
        self.role
    }

    pub fn stages(&self) -> usize {
        self.a.rows()
    }

    pub fn a(&self) -> &RMatrix {
        &self.a
    }

    pub fn b(&self) -> Result<&RMatrix> {
        self.b.as_ref().ok_or(Error::MissingMatrix("B"))
    }

    pub fn k(&self) -> &[f64] {
        &self.k
    }

    pub fn k_matrix(&self) -> RMatrix {
        RMatrix::from_diag(&self.k)
    }

    pub fn a_tilde(&self) -> Option<&RMatrix> {
        self.a_tilde.as_ref()
    }

    pub fn a_is_lower_triangular(&self) -> bool {
        self.a.is_lower_triangular(triangular_tol(&self.a))
    }

    /// Same set with every matrix multiplied by `sigma`.
    pub fn scaled(&self, sigma: f64) -> Self {
        Self {
            role: self.role,
            a: self.a.scale(sigma),
            b: self.b.as_ref().map(|b| b.scale(sigma)),
            k: self.k.iter().map(|x| x * sigma).collect(),
            a_tilde: self.a_tilde.as_ref().map(|m| m.scale(sigma)),
        }
    }
}

/// A complete method: nodes, start/standard/end coefficient sets, and the
/// boundary vectors `a = A₀1`, `b = A₀c − K₀1`, `w = A_Nᵀ1`, `v` (interpolant
/// weights at 0).
#[derive(Clone, Debug, PartialEq)]
pub struct PeerMethodSuite {
    pub name: String,
    pub nodes: Nodes,
    pub start: StageMatrixSet,
    pub standard: StageMatrixSet,
    pub end: StageMatrixSet,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub w: Vec<f64>,
    pub v: Vec<f64>,
}

impl PeerMethodSuite {
    pub fn new(
        name: impl Into<String>,
        nodes: Nodes,
        start: StageMatrixSet,
        standard: StageMatrixSet,
        end: StageMatrixSet,
    ) -> Result<Self> {
        let s = nodes.len();
        for (set, role) in [
            (&start, StageRole::Start),
            (&standard, StageRole::Standard),
            (&end, StageRole::End),
        ] {
            if set.role != role {
                return Err(Error::InvariantViolation(format!(
                    "{role} slot holds a {} set",
                    set.role
                )));
            }
            if set.stages() != s {
                return Err(Error::DimensionMismatch(format!(
                    "{role} set has {} stages, nodes have {s}",
                    set.stages()
                )));
            }
        }
        let c = nodes.values();
        let a = start.a.matvec(&vec![1.0; s]);
        let b: Vec<f64> = start
            .a
            .matvec(c)
            .iter()
            .zip(&start.k)
            .map(|(x, k)| x - k)
            .collect();
        let w = end.a.tr_matvec(&vec![1.0; s]);
        let v = derive_v(&nodes)?;
        let wsum: f64 = w.iter().sum();
        if (wsum - 1.0).abs() > SUM_TOL {
            return Err(Error::InvariantViolation(format!("1^T w = 1 (got {wsum})")));
        }
        let vsum: f64 = v.iter().sum();
        if (vsum - 1.0).abs() > SUM_TOL {
            return Err(Error::InvariantViolation(format!("1^T v = 1 (got {vsum})")));
        }
        Ok(Self {
            name: name.into(),
            nodes,
            start,
            standard,
            end,
            a,
            b,
            w,
            v,
        })
    }

    pub fn stages(&self) -> usize {
        self.nodes.len()
    }
}

/// Interpolation weights at 0: `Σ vᵢ cᵢʲ = δ_{j0}` for `j < s`.
pub fn derive_v(nodes: &Nodes) -> Result<Vec<f64>> {
    let c = nodes.values();
    let s = c.len();
    // Row j of Vᵀ holds c^j.
    let vt = RMatrix::from_fn(s, s, |j, i| c[i].powi(j as i32));
    let mut e1 = vec![0.0; s];
    e1[0] = 1.0;
    let x = solve_dense(&vt, &RMatrix::column_vector(&e1))?;
    Ok(x.column(0))
}

/// The three shipped methods.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BuiltinMethod {
    Bdf3o22,
    Bdf3o32,
    Peer3o32w,
}

impl BuiltinMethod {
    pub const ALL: [BuiltinMethod; 3] = [
        BuiltinMethod::Bdf3o22,
        BuiltinMethod::Bdf3o32,
        BuiltinMethod::Peer3o32w,
    ];

    pub fn name(self) -> &'static str {
        match self {
            BuiltinMethod::Bdf3o22 => "BDF3o22",
            BuiltinMethod::Bdf3o32 => "BDF3o32",
            BuiltinMethod::Peer3o32w => "PEER3o32w",
        }
    }
}

impl fmt::Display for BuiltinMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for BuiltinMethod {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        BuiltinMethod::ALL
            .into_iter()
            .find(|m| m.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::UnknownMethod(s.to_string()))
    }
}

/// A printed coefficient: an exact fraction or a decimal literal rounded to
/// the nearest double.
#[derive(Clone, Copy, Debug)]
enum Coef {
    Q(i64, i64),
    D(&'static str),
}

impl Coef {
    fn value(self) -> f64 {
        match self {
            Coef::Q(n, d) => n as f64 / d as f64,
            Coef::D(s) => s.parse().expect("coefficient literal"),
        }
    }
}

use Coef::{D, Q};

const Z: Coef = Q(0, 1);

fn mat3(rows: [[Coef; 3]; 3]) -> RMatrix {
    RMatrix::from_fn(3, 3, |i, j| rows[i][j].value())
}

fn vec3(v: [Coef; 3]) -> Vec<f64> {
    v.iter().map(|c| c.value()).collect()
}

/// The BDF3 standard set; shift invariant, so valid for any equidistant nodes
/// with spacing 1/3.
pub fn bdf3_standard() -> StageMatrixSet {
    let a = mat3([
        [Q(11, 6), Z, Z],
        [Q(-3, 1), Q(11, 6), Z],
        [Q(3, 2), Q(-3, 1), Q(11, 6)],
    ]);
    let b = mat3([
        [Q(1, 3), Q(-3, 2), Q(3, 1)],
        [Z, Q(1, 3), Q(-3, 2)],
        [Z, Z, Q(1, 3)],
    ]);
    StageMatrixSet::new(StageRole::Standard, a, Some(b), vec![1.0 / 3.0; 3], None)
        .expect("BDF3 standard set is valid")
}

fn bdf3_start() -> StageMatrixSet {
    let a0 = mat3([
        [Q(2, 1), Z, Z],
        [Q(-10, 3), Q(15, 8), Z],
        [Q(5, 3), Q(-73, 24), Q(11, 6)],
    ]);
    StageMatrixSet::new(
        StageRole::Start,
        a0,
        None,
        vec3([Q(1, 3), Q(25, 72), Q(1, 3)]),
        None,
    )
    .expect("BDF3 start set is valid")
}

fn bdf3_nodes() -> Nodes {
    Nodes::new(vec3([Q(1, 3), Q(2, 3), Q(1, 1)])).expect("distinct nodes")
}

fn bdf3o22() -> Result<PeerMethodSuite> {
    let an = mat3([
        [Q(21, 8), Z, Z],
        [Q(-14, 3), Q(23, 12), Z],
        [Q(49, 24), Q(-23, 12), Q(1, 1)],
    ]);
    let bn = mat3([
        [Q(1, 2), Q(-73, 24), Q(31, 6)],
        [Q(-1, 3), Q(41, 12), Q(-35, 6)],
        [Q(1, 6), Q(-37, 24), Q(5, 2)],
    ]);
    let end = StageMatrixSet::new(
        StageRole::End,
        an,
        Some(bn),
        vec3([Q(7, 36), Q(23, 36), Z]),
        None,
    )?;
    PeerMethodSuite::new("BDF3o22", bdf3_nodes(), bdf3_start(), bdf3_standard(), end)
}

fn bdf3o32() -> Result<PeerMethodSuite> {
    let an = mat3([
        [Q(9, 5), Z, Z],
        [Q(-109, 40), Q(4, 3), Q(7, 24)],
        [Q(37, 40), Q(-4, 3), Q(17, 24)],
    ]);
    let bn = mat3([
        [Q(39, 80), Q(-19, 10), Q(257, 80)],
        [Q(-37, 120), Q(17, 15), Q(-77, 40)],
        [Q(37, 240), Q(-2, 5), Q(131, 240)],
    ]);
    let at = mat3([
        [Q(9, 5), Z, Z],
        [Q(-109, 40), Q(73, 39), Z],
        [Q(37, 40), Q(-4, 3), Q(535, 752)],
    ]);
    let end = StageMatrixSet::new(
        StageRole::End,
        an,
        Some(bn),
        vec3([Q(7, 24), Q(4, 9), Q(7, 72)]),
        Some(at),
    )?;
    PeerMethodSuite::new("BDF3o32", bdf3_nodes(), bdf3_start(), bdf3_standard(), end)
}

/// Middle node of the shifted equidistant method; smallest root of the
/// end-method cubic.
pub const PEER3O32W_C2: &str = "0.48059993107999468110";

fn peer3o32w() -> Result<PeerMethodSuite> {
    let c2: f64 = PEER3O32W_C2.parse().expect("literal");
    let nodes = Nodes::new(vec![c2 - 1.0 / 3.0, c2, c2 + 1.0 / 3.0])?;
    let an = mat3([
        [Q(2, 1), Z, Z],
        [D("-3.2608729312532042110"), D("1.7608729312532043906"), Z],
        [
            D("1.6957667700466743694"),
            D("-3.1888608156001606791"),
            D("1.9930940455534862169"),
        ],
    ]);
    let bn = mat3([
        [
            D("0.5271726507800490190"),
            D("-2.0724604020801301580"),
            D("3.5452877513000811390"),
        ],
        [
            D("-0.3876786348934308516"),
            D("1.4782541374935927700"),
            D("-2.5905755026001617388"),
        ],
        [
            D("0.19383931744671510930"),
            D("-0.57246040208012921227"),
            D("0.87862108463341401017"),
        ],
    ]);
    let kn = vec3([
        D("0.32729496649332262670"),
        D("0.32125659965331187900"),
        D("0.37084850277337088940"),
    ]);
    let end = StageMatrixSet::new(StageRole::End, an, Some(bn), kn, None)?;
    let a0 = mat3([
        [D("2.1796087544459576670"), Z, Z],
        [D("-4.2110754936961070457"), D("1.9644965156719027025"), Z],
        [
            D("2.3648000725834827177"),
            D("-3.1311631823385693702"),
            Q(11, 6),
        ],
    ]);
    let k0 = vec3([
        D("0.16049178284304720811"),
        D("0.37705439411285645618"),
        Q(1, 3),
    ]);
    let start = StageMatrixSet::new(StageRole::Start, a0, None, k0, None)?;
    PeerMethodSuite::new("PEER3o32w", nodes, start, bdf3_standard(), end)
}

pub fn builtin_suite(method: BuiltinMethod) -> PeerMethodSuite {
    match method {
        BuiltinMethod::Bdf3o22 => bdf3o22(),
        BuiltinMethod::Bdf3o32 => bdf3o32(),
        BuiltinMethod::Peer3o32w => peer3o32w(),
    }
    .expect("builtin suites satisfy their invariants")
}

/// Looks a builtin up by (case-insensitive) name.
pub fn builtin_by_name(name: &str) -> Result<PeerMethodSuite> {
    Ok(builtin_suite(name.parse()?))
}
