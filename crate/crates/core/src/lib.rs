//! Incompressible Navier-Stokes toolbox: a pressure-correction finite element
//! solver on triangle meshes, POD basis extraction from stored snapshots, and
//! a nudged (data-assimilated) projection reduced-order model that evolves
//! both reduced velocity and reduced pressure.
//!
//! The crate is organized bottom-up:
//!
//! * [`linalg`] — dense/sparse kernels generic over the scalar type,
//! * [`mesh`], [`quadrature`], [`fespace`], [`assembly`] — the FE layer,
//! * [`fom`] — the full-order time stepper and snapshot recording,
//! * [`pod`], [`cda`], [`rom`] — reduction, observation operators, nudged ROM,
//! * [`quantities`] — drag/lift/kinetic-energy/pressure-difference functionals,
//! * [`config`], [`pipeline`], [`verify`] — orchestration used by the CLI.

pub mod assembly;
// pub mod cda; // (being built)
// pub mod config; // (being built)
pub mod fespace;
// pub mod fom; // (being built)
pub mod linalg;
pub mod manufactured;
pub mod mesh;
// pub mod pipeline; // (being built)
// pub mod pod; // (being built)
pub mod quadrature;
pub mod quantities;
// pub mod rom; // (being built)
// pub mod verify; // (being built)

/// Scalar used by the domain layer. The `linalg` kernels stay generic; the
/// FE/ROM layer and all file formats are pinned to `f64`.
pub type Real = f64;

/// Dense matrix over [`Real`].
pub type DenseMatrix = linalg::Dense<Real>;
/// Compressed sparse row matrix over [`Real`].
pub type SparseMatrix = linalg::Csr<Real>;

/// Crate version string embedded in artifact headers.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Errors surfaced by the pipeline.
#[derive(Debug)]
pub enum Error {
    /// Invalid parameter, configuration key, or inconsistent run setup.
    Config(String),
    /// Malformed input file; carries the path and (1-based) line when known.
    Parse { path: String, line: usize, msg: String },
    /// Underlying I/O failure.
    Io { path: String, source: std::io::Error },
    /// Solver breakdown, rank deficiency, NaN blow-up and friends.
    Numerical(String),
}

impl std::fmt::Display for Error {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Error::Config(msg) => write!(f, "config error: {msg}"),
            Error::Parse { path, line, msg } => {
                write!(f, "parse error: {path}:{line}: {msg}")
            }
            Error::Io { path, source } => write!(f, "io error: {path}: {source}"),
            Error::Numerical(msg) => write!(f, "numerical error: {msg}"),
        }
    }
}

impl std::error::Error for Error {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        match self {
            Error::Io { source, .. } => Some(source),
            _ => None,
        }
    }
}

impl Error {
    pub fn io(path: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    /// Process exit code the CLI maps this error to (2 = bad input, 3 = numerical).
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Numerical(_) => 3,
            _ => 2,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

/// FNV-1a over a byte stream; used for mesh/config provenance hashes.
pub fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}
