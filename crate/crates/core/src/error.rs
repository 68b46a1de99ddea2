use std::fmt;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Image axis, used to name the offending dimension in shape errors.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Axis {
    Rows,
    Cols,
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Axis::Rows => f.write_str("rows"),
            Axis::Cols => f.write_str("cols"),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("unsupported filter order {0} (supported: 2, 4)")]
    UnsupportedFilterOrder(usize),
    #[error("signal length {0} is odd")]
    OddLength(usize),
    #[error("signal length {len} is shorter than the filter length {filter}")]
    SignalShorterThanFilter { len: usize, filter: usize },
    #[error("{axis} = {len} is not divisible by 2^{levels}")]
    NotDivisible { axis: Axis, len: usize, levels: u32 },
    #[error("shape mismatch: expected {expected:?}, found {found:?}")]
    ShapeMismatch { expected: (usize, usize), found: (usize, usize) },
    #[error("image dimensions must be positive, got {rows}x{cols}")]
    EmptyImage { rows: usize, cols: usize },
    #[error("data length {len} does not match {rows}x{cols}")]
    DataLength { rows: usize, cols: usize, len: usize },
    #[error("non-finite value at index {0}")]
    NonFinite(usize),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("target sample count {target} is smaller than the fully sampled region ({fsr} samples)")]
    FsrExceedsBudget { target: usize, fsr: usize },
    #[error("mask generation did not reach {target} samples within {draws} draws")]
    DrawBudgetExhausted { target: usize, draws: u64 },
    #[error("Bessel I0 argument {0} outside [0, 700]")]
    BesselOverflow(f64),
    #[error("non-finite objective at iteration {iteration}")]
    NonFiniteObjective { iteration: usize },
    #[error("MSBPD requires the fully sampled region")]
    MissingFsr,
    #[error("lambda grid is empty")]
    EmptyGrid,
    #[error("ground truth has zero norm")]
    ZeroNormTruth,
    #[error("corpus is empty")]
    EmptyCorpus,
    #[error("malformed header: {0}")]
    MalformedHeader(String),
    #[error("truncated payload: expected {expected} bytes, found {found}")]
    TruncatedPayload { expected: usize, found: usize },
    #[error("trailing data: {0} bytes after payload")]
    TrailingData(usize),
    #[error("unsupported format: {0}")]
    UnsupportedFormat(String),
    #[error("bad magic: expected \"CSI1\"")]
    BadMagic,
    #[error("size overflow: {rows}x{cols} does not fit in memory")]
    SizeOverflow { rows: u64, cols: u64 },
    #[error("invalid mask value {value} at index {index} (allowed: 0, 255)")]
    InvalidMaskValue { value: u16, index: usize },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Stable name of the error variant, used by the CLI on stderr.
    pub fn name(&self) -> &'static str {
        match self {
            Error::UnsupportedFilterOrder(_) => "UnsupportedFilterOrder",
            Error::OddLength(_) => "OddLength",
            Error::SignalShorterThanFilter { .. } => "SignalShorterThanFilter",
            Error::NotDivisible { .. } => "NotDivisible",
            Error::ShapeMismatch { .. } => "ShapeMismatch",
            Error::EmptyImage { .. } => "EmptyImage",
            Error::DataLength { .. } => "DataLength",
            Error::NonFinite(_) => "NonFinite",
            Error::InvalidParameter(_) => "InvalidParameter",
            Error::FsrExceedsBudget { .. } => "FsrExceedsBudget",
            Error::DrawBudgetExhausted { .. } => "DrawBudgetExhausted",
            Error::BesselOverflow(_) => "BesselOverflow",
            Error::NonFiniteObjective { .. } => "NonFiniteObjective",
            Error::MissingFsr => "MissingFsr",
            Error::EmptyGrid => "EmptyGrid",
            Error::ZeroNormTruth => "ZeroNormTruth",
            Error::EmptyCorpus => "EmptyCorpus",
            Error::MalformedHeader(_) => "MalformedHeader",
            Error::TruncatedPayload { .. } => "TruncatedPayload",
            Error::TrailingData(_) => "TrailingData",
            Error::UnsupportedFormat(_) => "UnsupportedFormat",
            Error::BadMagic => "BadMagic",
            Error::SizeOverflow { .. } => "SizeOverflow",
            Error::InvalidMaskValue { .. } => "InvalidMaskValue",
            Error::Io(_) => "Io",
        }
    }
}

/// Fails with [`Error::NotDivisible`] unless both dimensions are multiples of `2^levels`.
pub(crate) fn check_divisible(rows: usize, cols: usize, levels: u32) -> Result<()> {
    let block = 1usize
        .checked_shl(levels)
        .filter(|b| *b != 0)
        .ok_or_else(|| Error::InvalidParameter(format!("levels = {levels} is too large")))?;
    if !rows.is_multiple_of(block) {
        return Err(Error::NotDivisible { axis: Axis::Rows, len: rows, levels });
    }
    if !cols.is_multiple_of(block) {
        return Err(Error::NotDivisible { axis: Axis::Cols, len: cols, levels });
    }
    Ok(())
}
