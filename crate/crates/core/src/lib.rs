//! Almost-Borel classification of countable-state Markov shifts.

pub mod doc;
pub mod entropy;
pub mod error;
pub mod factor;
pub mod graph;
pub mod interval;
pub mod invariants;
pub mod loops;
pub mod markers;
pub mod pathology;
pub mod perron;
pub mod poly;
pub mod presentation;

pub use entropy::{EntropyOrdering, ExtendedEntropy, DEFAULT_TOL};
pub use error::{Error, Result};
pub use factor::{BlockCode, BowenVerdict, FiberProduct, SubSystem, SymbolRelation, TupleGraph};
pub use graph::{cyclic_classes, period_of_component, Component, FiniteGraph};
pub use interval::Interval;
pub use invariants::{decide_almost_borel_iso, realize_invariants, GenCount, Generator, InvariantPair, IsoVerdict};
pub use loops::{LoopSchema, PhiValue, Recurrence, RecurrenceReport, Tail, TailKind};
pub use perron::perron_entropy;
pub use presentation::{summarize_all, summarize_components, ComponentSummary, ShiftPresentation};
