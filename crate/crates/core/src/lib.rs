//! Record linkage for sparse historical person records.
//!
//! Person mentions (a name and a role inside a dated, located event) are
//! normalized, blocked by name, compared pairwise on name, date window,
//! location and role consistency, and grouped into record sets by
//! transitive closure of the pairwise matches.
//!
//! ```
//! use histlink_core::{cluster_corpus, io, MatchConfig};
//! use histlink_core::normalize::AliasTable;
//!
//! let events = "event_id,event_type,date,location\n\
//!     b1,baptism,1847,Rapids Church\n\
//!     b2,baptism,1848,Grand Rapids Church\n\
//!     b3,baptism,1870,Grand Rapids Church\n";
//! let persons = "record_id,event_id,first_name,last_name,role\n\
//!     p1,b1,John,Setter,father\n\
//!     p2,b2,John,Setter,father\n\
//!     p3,b3,John,Setter,father\n";
//! let (corpus, _report) =
//!     io::load_corpus_from_readers(events.as_bytes(), persons.as_bytes(), &AliasTable::new(), &io::RoleMap::new())
//!         .unwrap();
//! let sets = cluster_corpus(&corpus, &MatchConfig::default());
//! assert_eq!(sets.len(), 2);
//! assert_eq!(sets[0].members.len(), 2);
//! ```

pub mod cluster;
pub mod error;
pub mod eval;
pub mod indexer;
pub mod io;
pub mod matcher;
pub mod metrics;
pub mod model;
pub mod normalize;
pub mod rules;

pub use cluster::{cluster_corpus, cluster_corpus_explained, cluster_group, RecordSet};
pub use error::{Error, Result};
pub use indexer::{build_index, IndexGroup};
pub use matcher::{location_match, records_match, relationship_support, time_within};
pub use model::{
    Corpus, Event, EventId, EventType, MatchConfig, MatchDecision, NameMetric, PersonRecord, RecordId, Role,
};
pub use normalize::{normalize_location, normalize_name, parse_date, EventDate, NormalizedText};
pub use rules::{evaluate_rules, RoleRuleSet};
