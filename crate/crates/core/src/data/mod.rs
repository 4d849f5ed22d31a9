//! Item banks, Q-matrices, grading, response aggregation and their file formats.

pub mod bank;
pub mod grading;
pub mod matrix_io;
pub mod responses;

pub use bank::{load_item_bank, BankFormat, Concept, ConceptCatalog, Item, ItemBank};
pub use grading::{ChoiceLetter, ExactMatch, Grade, Grader, GradingRule};
pub use matrix_io::LabeledMatrix;
pub use responses::{aggregate, binarize, Aggregated, Attempt, ResponseLog, ResponseMatrix, DEFAULT_REPEATS};
