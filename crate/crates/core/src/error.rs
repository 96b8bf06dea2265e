use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: cannot compose a map out of □{left} after a map into □{right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("dimensions too large for a vertex table: □{dom} → □{cod}")]
    DimensionTooLarge { dom: usize, cod: usize },

    #[error("invalid vertex table: {0}")]
    BadTable(String),

    #[error("syntax error at byte {pos}: {msg}")]
    Syntax { pos: usize, msg: String },

    #[error("slot out of range: `{atom}` does not act on □{dim}")]
    SlotOutOfRange { atom: String, dim: usize },

    #[error("invalid site configuration: {0}")]
    InvalidSite(String),

    #[error("{map} is not a morphism of the site {site}")]
    NotAMember { map: String, site: String },

    #[error("{map} is not a degeneracy (surjective site map) of {site}")]
    NotADegeneracy { map: String, site: String },

    #[error("operation needs a site without diagonals, got {0}")]
    DiagonalSite(String),

    #[error("operation needs a site with diagonals, got {0}")]
    NonDiagonalSite(String),

    #[error("resource bound exceeded: {0}")]
    ResourceBound(String),

    #[error("invalid order structure: {0}")]
    Order(String),

    #[error("invalid cubical set: {0}")]
    CubicalSet(String),

    #[error("functoriality violation: `{left}` and `{right}` both evaluate to {map} but act differently")]
    Functoriality { left: String, right: String, map: String },

    #[error("internal invariant broken: {0}")]
    Internal(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn is_resource_bound(&self) -> bool {
        matches!(self, Error::ResourceBound(_))
    }
}
