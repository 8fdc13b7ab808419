//! Sustainability requirements models, design patterns and pattern
//! catalogues.

pub mod catalogue;
pub mod corpus;
pub mod diagnostic;
pub mod dsl;
pub mod export;
pub mod model;
pub mod patterns;
pub mod validator;

pub use catalogue::{Catalogue, ChainReport, Point, Verdict, Weights};
pub use diagnostic::{Code, Diagnostic, Severity, SourceSpan};
pub use model::{Dimension, Element, ElementKind, Fragment, Link, LinkKind, Model, ModelError, Strategy};
pub use patterns::{instantiate, Archetype, Binding, InstantiateError, PatternDoc, Role, RoleTarget};
pub use validator::{validate_model, validate_pattern};
