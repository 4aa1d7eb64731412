//! Medial-axis contour salience for line drawings.
//!
//! A drawing is split into the regions between its contours. Each region gets
//! an exact distance field and an average-outward-flux skeleton. The skeleton
//! is cut into branches, and three measures are read off the radius function
//! along each branch: contour separation, ribbon symmetry and taper symmetry.
//! Spokes carry the branch values back to the contour pixels, where they
//! drive splits, composed channel images and statistics.
//!
//! ```
//! use medial_salience::{analyze, synth, Measure, PipelineConfig};
//!
//! let drawing = synth::slab(100, 41, 10, 20);
//! let analysis = analyze(&drawing, &PipelineConfig::default()).unwrap();
//! let ribbon = analysis.salience.get(Measure::Ribbon, 50, 30).unwrap();
//! assert!((ribbon - 1.0).abs() < 1e-9);
//! ```
//!
//! The guide in `book/` walks through every stage with runnable examples.

pub mod aof;
pub mod distance;
pub mod error;
pub mod graph;
pub mod ingest;
pub mod output;
pub mod pipeline;
pub mod salience;
pub mod synth;
pub mod topology;

pub use error::{Error, Result};
pub use ingest::{load_line_drawing, BinarizePolicy, BinaryContourImage, Connectivity};
pub use output::{ChannelSpec, Colormap};
pub use pipeline::{analyze, Analysis, PipelineConfig, SalienceMap};
pub use salience::{Measure, SalienceConfig};

// Compiles the code blocks of the guide as doc-tests, one module per chapter.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/line-drawings.md")]
    mod line_drawings {}
    #[doc = include_str!("../../../book/src/distance.md")]
    mod distance {}
    #[doc = include_str!("../../../book/src/flux-skeleton.md")]
    mod flux_skeleton {}
    #[doc = include_str!("../../../book/src/branches.md")]
    mod branches {}
    #[doc = include_str!("../../../book/src/salience.md")]
    mod salience {}
    #[doc = include_str!("../../../book/src/outputs.md")]
    mod outputs {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
