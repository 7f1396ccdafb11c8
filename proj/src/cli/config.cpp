#include "cli/config.hpp"

#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace prominence::cli {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& what) {
    throw std::invalid_argument("config: " + what);
}

void reject_unknown_keys(const json& obj, const std::string& where,
                         std::initializer_list<const char*> allowed) {
    for (const auto& [key, value] : obj.items()) {
        bool known = false;
        for (const char* name : allowed) known = known || key == name;
        if (!known) fail("unknown key '" + where + key + "'");
    }
}

template <typename T>
void read_field(const json& obj, const char* key, T& out) {
    if (!obj.contains(key)) return;
    try {
        out = obj.at(key).get<T>();
    } catch (const json::exception&) {
        fail(std::string("bad value for '") + key + "'");
    }
}

}  // namespace

PipelineConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail("cannot read " + path);
    json root;
    try {
        root = json::parse(in);
    } catch (const json::parse_error& e) {
        fail(path + " is not valid JSON: " + e.what());
    }
    if (!root.is_object()) fail(path + " must hold a JSON object");

    reject_unknown_keys(root, "",
                        {"image_root", "depth_root", "annotation_root",
                         "frames_root", "metadata_csv", "dtm_csv",
                         "observations_csv", "out_dir", "seed", "jobs",
                         "salience", "features", "vbow", "wordfish", "video",
                         "regression"});

    PipelineConfig config;
    read_field(root, "image_root", config.image_root);
    read_field(root, "depth_root", config.depth_root);
    read_field(root, "annotation_root", config.annotation_root);
    read_field(root, "frames_root", config.frames_root);
    read_field(root, "metadata_csv", config.metadata_csv);
    read_field(root, "dtm_csv", config.dtm_csv);
    read_field(root, "observations_csv", config.observations_csv);
    read_field(root, "out_dir", config.out_dir);
    read_field(root, "seed", config.seed);
    read_field(root, "jobs", config.jobs);

    if (root.contains("salience")) {
        const json& s = root.at("salience");
        reject_unknown_keys(s, "salience.",
                            {"method", "pass_pairs", "smooth", "center_weight",
                             "smooth_radius", "center_sigma_frac"});
        read_field(s, "method", config.salience_method);
        read_field(s, "pass_pairs", config.mbd.pass_pairs);
        read_field(s, "smooth", config.mbd.smooth);
        read_field(s, "center_weight", config.mbd.center_weight);
        read_field(s, "smooth_radius", config.mbd.smooth_radius);
        read_field(s, "center_sigma_frac", config.mbd.center_sigma_frac);
    }
    if (root.contains("features")) {
        const json& f = root.at("features");
        reject_unknown_keys(f, "features.",
                            {"fast_threshold", "max_keypoints", "brief_seed",
                             "grid_stride", "min_keypoints"});
        read_field(f, "fast_threshold", config.features.fast_threshold);
        read_field(f, "max_keypoints", config.features.max_keypoints);
        read_field(f, "brief_seed", config.features.brief_seed);
        read_field(f, "grid_stride", config.features.grid_stride);
        read_field(f, "min_keypoints", config.features.min_keypoints);
    }
    if (root.contains("vbow")) {
        const json& v = root.at("vbow");
        reject_unknown_keys(v, "vbow.",
                            {"k", "max_iters", "weighted_clustering",
                             "weighted_counts", "all_scenarios", "round_counts",
                             "group_by"});
        read_field(v, "k", config.vbow.k);
        read_field(v, "max_iters", config.vbow.max_iters);
        read_field(v, "weighted_clustering", config.vbow.weighted_clustering);
        read_field(v, "weighted_counts", config.vbow.weighted_counts);
        read_field(v, "all_scenarios", config.vbow.all_scenarios);
        read_field(v, "round_counts", config.vbow.round_counts);
        read_field(v, "group_by", config.vbow.group_by);
    }
    if (root.contains("wordfish")) {
        const json& w = root.at("wordfish");
        reject_unknown_keys(w, "wordfish.",
                            {"tol", "max_iters", "orient", "bootstrap_draws"});
        read_field(w, "tol", config.wordfish.tol);
        read_field(w, "max_iters", config.wordfish.max_iters);
        read_field(w, "bootstrap_draws", config.wordfish.bootstrap_draws);
        if (w.contains("orient")) {
            std::vector<std::string> pair;
            read_field(w, "orient", pair);
            if (pair.size() != 2) fail("'orient' needs exactly two document ids");
            config.wordfish.orient_first = pair[0];
            config.wordfish.orient_second = pair[1];
        }
    }
    if (root.contains("video")) {
        const json& v = root.at("video");
        reject_unknown_keys(v, "video.", {"tau"});
        read_field(v, "tau", config.video.tau);
    }
    if (root.contains("regression")) {
        const json& r = root.at("regression");
        reject_unknown_keys(r, "regression.",
                            {"outcomes", "main_effects", "interaction",
                             "fixed_effects", "cluster"});
        read_field(r, "outcomes", config.regression.outcomes);
        read_field(r, "main_effects", config.regression.main_effects);
        read_field(r, "interaction", config.regression.interaction);
        read_field(r, "fixed_effects", config.regression.fixed_effects);
        read_field(r, "cluster", config.regression.cluster);
    }

    validate_config(config);
    return config;
}

void validate_config(const PipelineConfig& config) {
    if (config.salience_method != "mbd" && config.salience_method != "depth" &&
        config.salience_method != "size_centeredness") {
        fail("salience.method must be mbd, depth or size_centeredness, got '" +
             config.salience_method + "'");
    }
    if (config.jobs < 1) fail("jobs must be at least 1");
    if (config.mbd.pass_pairs < 1) fail("salience.pass_pairs must be at least 1");
    if (config.mbd.smooth_radius < 0) fail("salience.smooth_radius must be >= 0");
    if (config.mbd.center_sigma_frac <= 0.0) {
        fail("salience.center_sigma_frac must be positive");
    }
    if (config.features.fast_threshold < 0) {
        fail("features.fast_threshold must be >= 0");
    }
    if (config.features.max_keypoints == 0) {
        fail("features.max_keypoints must be positive");
    }
    if (config.features.grid_stride < 1) {
        fail("features.grid_stride must be at least 1");
    }
    if (config.vbow.k < 2) fail("vbow.k must be at least 2");
    if (config.vbow.max_iters < 1) fail("vbow.max_iters must be at least 1");
    if (config.vbow.group_by.empty()) fail("vbow.group_by must not be empty");
    if (!(config.wordfish.tol > 0.0)) fail("wordfish.tol must be positive");
    if (config.wordfish.max_iters < 1) fail("wordfish.max_iters must be at least 1");
    if (config.wordfish.bootstrap_draws < 0) {
        fail("wordfish.bootstrap_draws must be >= 0");
    }
    if (!(config.video.tau >= 0.0)) fail("video.tau must be >= 0");
    if (config.regression.outcomes.empty()) {
        fail("regression.outcomes must not be empty");
    }
    if (config.out_dir.empty()) fail("out_dir must not be empty");
}

}  // namespace prominence::cli
