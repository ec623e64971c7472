use crate::analysis::AnalysisError;
use crate::energy::EnergyError;
use crate::field::FieldError;
use crate::fleet::FleetError;
use crate::geo::GeoError;
use crate::gtfs::GtfsError;
use crate::report::ReportError;
use crate::surrogate::SurrogateError;
use crate::valuation::ValuationError;

/// Any failure of the pipeline, tagged with a stable category string for
/// machine consumption.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Gtfs(#[from] GtfsError),
    #[error(transparent)]
    Geo(#[from] GeoError),
    #[error(transparent)]
    Energy(#[from] EnergyError),
    #[error(transparent)]
    Surrogate(#[from] SurrogateError),
    #[error(transparent)]
    Fleet(FleetError),
    #[error(transparent)]
    Valuation(ValuationError),
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
    #[error(transparent)]
    Report(#[from] ReportError),
    #[error("invalid parameter {0}")]
    InvalidParam(#[from] FieldError),
    #[error("unknown route id(s): {}", .0.join(", "))]
    UnknownRoutes(Vec<String>),
    #[error("bad request: {0}")]
    BadRequest(String),
    #[error("configuration: {0}")]
    Config(String),
}

impl Error {
    pub fn category(&self) -> &'static str {
        match self {
            Error::Gtfs(_) => "gtfs",
            Error::Geo(_) => "geo",
            Error::Energy(_) => "energy",
            Error::Surrogate(_) => "surrogate",
            Error::Fleet(_) => "fleet",
            Error::Valuation(_) => "valuation",
            Error::Analysis(_) => "analysis",
            Error::Report(_) => "report",
            Error::InvalidParam(_) => "invalid_param",
            Error::UnknownRoutes(_) => "unknown_routes",
            Error::BadRequest(_) => "bad_request",
            Error::Config(_) => "config",
        }
    }
}

// Parameter problems surface as `InvalidParam` whichever module found them.
impl From<FleetError> for Error {
    fn from(e: FleetError) -> Self {
        match e {
            FleetError::InvalidCharger(f) => Error::InvalidParam(f.within("charger")),
            FleetError::Geo(g) => Error::Geo(g),
            other => Error::Fleet(other),
        }
    }
}

impl From<ValuationError> for Error {
    fn from(e: ValuationError) -> Self {
        match e {
            ValuationError::InvalidParam(f) => Error::InvalidParam(f),
            other => Error::Valuation(other),
        }
    }
}
