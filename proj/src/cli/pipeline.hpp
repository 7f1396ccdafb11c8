#pragma once

#include "cli/config.hpp"

namespace prominence::cli {

// Commands return the process exit code: 0 for a clean run, 2 when some
// inputs failed but the run still produced output. Hard errors (bad config,
// unusable roots, nothing processable) surface as exceptions; the entry
// point maps those to exit code 1.

// One salience map PNG per corpus image, plus region_scores.csv whenever
// annotation sidecars exist.
int cmd_salience(const PipelineConfig& config);

// Corpus images -> keypoints -> visual vocabulary -> weighted counts ->
// grouped document-term matrix -> ideal points, per weighting scenario.
// With dtm_csv set, skips the image stages and scales the given matrix.
int cmd_scale(const PipelineConfig& config);

// Frame directories -> scenes -> per-face observation table -> both
// regression models with a side-by-side report.
int cmd_video(const PipelineConfig& config);

// The regression stage alone, on an existing observation CSV.
int cmd_regress(const PipelineConfig& config);

}  // namespace prominence::cli
