//! Experiment artifacts: salience splits, composed channel images, colormap
//! renderings, statistics reports and the PNG/CSV encoders behind them.

mod channels;
mod colormap;
mod render;
mod split;
mod stats;

pub use channels::{compose_channels, compose_planes, Channel, ChannelSpec, ComposedImage};
pub use colormap::{colormap_index, colormap_rgb, render_colormap, Colormap};
pub use render::{
    artifact_name, branch_csv, encode_png, mask_image, render_aof, render_distance, render_reconstruction, render_skeleton,
    salience_image, BitDepth, GraphReport, RegionGraph,
};
pub use split::{split_by_salience, SplitResult};
pub use stats::{export_stats, AggregateStats, BatchReport, BatchRecord, BranchStats, ImageStats, MeasureStats, ValueSummary, HISTOGRAM_BINS};

/// Maps `v` in `[0, 1]` to `0..=max`, rounding half up. Values outside the
/// range are clamped first.
pub fn quantize(v: f64, max: u16) -> u16 {
    let v = if v.is_nan() { 0.0 } else { v.clamp(0.0, 1.0) };
    (v * max as f64 + 0.5).floor() as u16
}
