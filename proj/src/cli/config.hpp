#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace prominence::cli {

// One JSON file drives a whole run so the manifest can point at a complete,
// replayable record. Command-line flags override individual fields.
struct PipelineConfig {
    // input roots; each command checks only the ones it needs
    std::string image_root;        // salience: corpus images
    std::string depth_root;        // per-image / per-frame depth PNGs
    std::string annotation_root;   // per-image annotation sidecars
    std::string frames_root;       // video: one subdirectory per video
    std::string metadata_csv;      // scale: image_id,path,outlet,issue
    std::string dtm_csv;           // scale: skip images, fit this matrix
    std::string observations_csv;  // regress: an existing observation table

    std::string out_dir = "out";
    std::uint64_t seed = 1;
    int jobs = 1;

    std::string salience_method = "mbd";  // mbd | depth | size_centeredness
    struct {
        int pass_pairs = 3;
        bool smooth = true;
        bool center_weight = true;
        int smooth_radius = 0;  // 0 = pick from the image size
        double center_sigma_frac = 0.33;
    } mbd;

    struct {
        int fast_threshold = 20;
        std::size_t max_keypoints = 500;
        std::uint64_t brief_seed = 7;
        int grid_stride = 24;          // dense fallback spacing
        std::size_t min_keypoints = 10;  // fewer corners than this adds the grid
    } features;

    struct {
        std::size_t k = 500;
        int max_iters = 50;
        bool weighted_clustering = true;
        bool weighted_counts = true;
        bool all_scenarios = false;  // emit all four weighting combinations
        bool round_counts = false;   // integer counts instead of weighted sums
        std::string group_by = "outlet";
    } vbow;

    struct {
        double tol = 1e-8;
        int max_iters = 500;
        // document ids fixing the sign of the fitted dimension; empty means
        // the first two rows of the aggregated matrix
        std::string orient_first;
        std::string orient_second;
        int bootstrap_draws = 0;
    } wordfish;

    struct {
        double tau = 30.0;  // scene cut threshold, gray levels
    } video;

    struct {
        std::vector<std::string> outcomes = {"depth_position", "relative_size"};
        std::vector<std::string> main_effects = {"gender", "party"};
        bool interaction = true;
        std::vector<std::string> fixed_effects = {"candidate_id", "election_year",
                                                  "candidate_visible"};
        std::string cluster = "frame_id";
    } regression;
};

// Parses the JSON file; unknown keys and out-of-range values are errors.
PipelineConfig load_config(const std::string& path);

// Range and enum checks shared by every command (also called after flag
// overrides). Throws std::invalid_argument with the offending field.
void validate_config(const PipelineConfig& config);

}  // namespace prominence::cli
