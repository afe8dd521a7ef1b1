//! Difficulty-graded multiple-choice question generation for English
//! learners, with personalized quiz assembly.
//!
//! The pipeline starts from pre-annotated articles (tokens, constituency
//! parses, coreference chains) and produces three question types:
//!
//! - vocabulary questions graded by a word list ([`vocabgen`]),
//! - grammar questions recognized by tree patterns ([`treequery`],
//!   [`grammargen`]),
//! - referential reading questions built from coreference ([`readgen`]).
//!
//! Generated items land in an item bank ([`quizengine`]) from which quizzes
//! are assembled per learner: items at the learner's level, items below it
//! for review, items above it as a challenge, and priority re-tests of
//! concepts the learner previously missed. [`sim`] drives simulated learners
//! through a pretest, a series of activities and a post-test.

pub mod corpus;
pub mod grammargen;
pub mod pipeline;
pub mod question;
pub mod quizengine;
pub mod readgen;
pub mod seed;
pub mod sim;
pub mod treequery;
pub mod vocabgen;

pub use corpus::{AnnotatedArticle, GradedLexicon, Level, ParseNode, PosClass};
pub use question::{McQuestion, QType, SourceRef};
