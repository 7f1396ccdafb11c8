#include "cli/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>
#include <stdexcept>
#include <thread>
#include <tuple>
#include <vector>

#include <json.hpp>

#include "cli/manifest.hpp"
#include "prominence/annotations.hpp"
#include "prominence/csv.hpp"
#include "prominence/features.hpp"
#include "prominence/image.hpp"
#include "prominence/rng.hpp"
#include "prominence/salience.hpp"
#include "prominence/stats.hpp"
#include "prominence/vbow.hpp"
#include "prominence/video.hpp"
#include "prominence/wordfish.hpp"

namespace prominence::cli {

namespace {

namespace fs = std::filesystem;

void require_dir(const std::string& path, const char* field) {
    if (path.empty()) {
        throw std::invalid_argument(std::string(field) + " is not configured");
    }
    if (!fs::is_directory(path)) {
        throw std::invalid_argument(std::string(field) +
                                    " is not a directory: " + path);
    }
}

void require_file(const std::string& path, const char* field) {
    if (path.empty()) {
        throw std::invalid_argument(std::string(field) + " is not configured");
    }
    if (!fs::is_regular_file(path)) {
        throw std::invalid_argument(std::string(field) + " is not a file: " + path);
    }
}

void write_text(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << content;
    if (!out) throw std::runtime_error("write failed: " + path);
}

// Workers pull the next undone index; results land in pre-sized slots, so
// the schedule cannot reorder anything downstream.
template <typename Work>
void parallel_for(std::size_t count, int jobs, Work&& work) {
    const std::size_t workers =
        std::min<std::size_t>(static_cast<std::size_t>(std::max(jobs, 1)), count);
    if (workers <= 1) {
        for (std::size_t i = 0; i < count; ++i) work(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t t = 0; t < workers; ++t) {
        pool.emplace_back([&] {
            for (std::size_t i; (i = next.fetch_add(1)) < count;) work(i);
        });
    }
    for (std::thread& th : pool) th.join();
}

std::vector<std::string> list_pngs(const std::string& dir) {
    std::vector<std::string> names;
    for (const fs::directory_entry& entry : fs::directory_iterator(dir)) {
        if (!entry.is_regular_file()) continue;
        std::string name = entry.path().filename().string();
        if (name.ends_with(".png")) names.push_back(std::move(name));
    }
    std::sort(names.begin(), names.end());
    return names;
}

SalienceMap salience_for_image(const PipelineConfig& cfg, const RasterImage& img,
                               const RasterImage& gray, const std::string& stem) {
    if (cfg.salience_method == "mbd") {
        MbdParams params;
        params.pass_pairs = cfg.mbd.pass_pairs;
        params.smooth = cfg.mbd.smooth;
        params.center_weight = cfg.mbd.center_weight;
        params.smooth_radius = cfg.mbd.smooth_radius;
        params.center_sigma_frac = cfg.mbd.center_sigma_frac;
        return mbd_salience(gray, params);
    }
    if (cfg.salience_method == "depth") {
        const std::string path =
            (fs::path(cfg.depth_root) / (stem + ".png")).string();
        return depth_salience(load_depth_map(path, img.width, img.height));
    }
    return centeredness_map(img.width, img.height);
}

}  // namespace

int cmd_salience(const PipelineConfig& cfg) {
    require_dir(cfg.image_root, "image_root");
    if (cfg.salience_method == "depth") require_dir(cfg.depth_root, "depth_root");
    const std::vector<std::string> names = list_pngs(cfg.image_root);
    if (names.empty()) {
        throw std::runtime_error("no .png images under " + cfg.image_root);
    }
    fs::create_directories(fs::path(cfg.out_dir) / "maps");

    struct Item {
        std::string error;
        std::string map_path;
        bool has_annotations = false;
        std::vector<std::string> score_rows;
    };
    std::vector<Item> items(names.size());
    parallel_for(names.size(), cfg.jobs, [&](std::size_t i) {
        Item& item = items[i];
        try {
            const std::string stem = fs::path(names[i]).stem().string();
            RasterImage img =
                load_image((fs::path(cfg.image_root) / names[i]).string());
            RasterImage gray = to_grayscale(img);
            SalienceMap map = salience_for_image(cfg, img, gray, stem);
            item.map_path =
                (fs::path(cfg.out_dir) / "maps" / (stem + ".png")).string();
            save_image(to_image(map), item.map_path);

            if (cfg.annotation_root.empty()) return;
            const std::string sidecar =
                (fs::path(cfg.annotation_root) / (stem + ".json")).string();
            if (!fs::is_regular_file(sidecar)) return;
            item.has_annotations = true;
            AnnotationSet set = load_annotations(sidecar, img.width, img.height);
            for (std::size_t r = 0; r < set.regions.size(); ++r) {
                const AnnotatedRegion& region = set.regions[r];
                const double size = object_size(region.box, img.width, img.height);
                const double center =
                    object_centeredness(region.box, img.width, img.height);
                // annotated regions carry detection confidence 1, so the
                // prominence score equals the salience aggregate
                const double aggregate =
                    cfg.salience_method == "size_centeredness"
                        ? 0.5 * (size + center)
                        : region_salience(map, region.box);
                std::string id = region.label.empty()
                                     ? "region_" + std::to_string(r)
                                     : region.label;
                item.score_rows.push_back(join_csv_row(
                    {stem, id, format_double(size), format_double(center),
                     format_double(aggregate), format_double(aggregate)}));
            }
        } catch (const std::exception& e) {
            item.error = names[i] + ": " + e.what();
        }
    });

    Manifest manifest(cfg.out_dir, "salience");
    int failures = 0;
    bool any_scores = false;
    std::string csv =
        "image,region,size_fraction,centeredness,salience_aggregate,prominence\n";
    for (const Item& item : items) {
        if (!item.map_path.empty() && fs::is_regular_file(item.map_path)) {
            manifest.add(item.map_path);
        }
        if (!item.error.empty()) {
            std::cerr << "salience: " << item.error << "\n";
            ++failures;
            continue;
        }
        any_scores = any_scores || item.has_annotations;
        for (const std::string& row : item.score_rows) csv += row + "\n";
    }
    if (any_scores) {
        const std::string path =
            (fs::path(cfg.out_dir) / "region_scores.csv").string();
        write_text(path, csv);
        manifest.add(path);
    }
    manifest.write();
    return failures > 0 ? 2 : 0;
}

namespace {

std::size_t find_document(const std::vector<std::string>& ids,
                          const std::string& wanted) {
    for (std::size_t i = 0; i < ids.size(); ++i) {
        if (ids[i] == wanted) return i;
    }
    std::string known;
    for (const std::string& id : ids) {
        if (!known.empty()) known += ", ";
        known += id;
    }
    throw std::invalid_argument("orientation document '" + wanted +
                                "' is not in the matrix (documents: " + known + ")");
}

// Visual words no document uses carry no information and would send their
// word intercepts to -inf, so the fit runs on the occupied columns only. The
// exported matrix keeps the full width (column j always means centroid j of
// the vocabulary); the parameters of skipped words are written as null.
DocumentTermMatrix drop_empty_terms(const DocumentTermMatrix& dtm,
                                    std::vector<std::size_t>& kept) {
    std::vector<double> totals(dtm.term_count, 0.0);
    for (const DocumentRow& row : dtm.rows) {
        for (std::size_t j = 0; j < totals.size(); ++j) totals[j] += row.terms[j];
    }
    kept.clear();
    for (std::size_t j = 0; j < totals.size(); ++j) {
        if (totals[j] > 0.0) kept.push_back(j);
    }
    if (kept.size() == totals.size()) return dtm;

    DocumentTermMatrix reduced = dtm;
    reduced.term_count = kept.size();
    for (DocumentRow& row : reduced.rows) {
        std::vector<double> terms;
        terms.reserve(kept.size());
        for (std::size_t j : kept) terms.push_back(row.terms[j]);
        row.terms = std::move(terms);
    }
    return reduced;
}

// Wordfish over one matrix: fit, optional bootstrap, three exports.
void fit_and_export(const DocumentTermMatrix& dtm, const PipelineConfig& cfg,
                    const std::string& dir, const std::string& label,
                    Manifest& manifest) {
    std::vector<std::string> ids;
    for (const DocumentRow& row : dtm.rows) ids.push_back(row.id);

    std::vector<std::size_t> kept;
    const DocumentTermMatrix fitted = drop_empty_terms(dtm, kept);
    if (kept.size() < dtm.term_count) {
        std::cerr << "scale: " << label << ": " << dtm.term_count - kept.size()
                  << " visual words appear in no document and are excluded from"
                     " the fit\n";
    }
    if (kept.size() < 2) {
        throw std::runtime_error("scale: " + label +
                                 ": fewer than 2 visual words have any counts");
    }

    WordfishOptions opts;
    opts.tol = cfg.wordfish.tol;
    opts.max_iters = cfg.wordfish.max_iters;
    opts.seed = fan_seed(cfg.seed, "wordfish/" + label);
    if (!cfg.wordfish.orient_first.empty()) {
        opts.orient_first = find_document(ids, cfg.wordfish.orient_first);
        opts.orient_second = find_document(ids, cfg.wordfish.orient_second);
    }
    WordfishFit fit = fit_wordfish(fitted, opts);
    if (!fit.converged) {
        std::cerr << "scale: " << label
                  << ": wordfish stopped at max_iters without converging\n";
    }
    BootstrapResult ci;
    if (cfg.wordfish.bootstrap_draws > 0) {
        if (fit.converged) {
            ci = bootstrap_ci(fitted, fit, opts, cfg.wordfish.bootstrap_draws,
                              fan_seed(cfg.seed, "bootstrap/" + label));
        } else {
            std::cerr << "scale: " << label
                      << ": skipping bootstrap, fit did not converge\n";
        }
    }

    if (kept.size() < dtm.term_count) {
        // scatter back to full width; JSON turns the NaN fillers into null
        std::vector<double> psi(dtm.term_count,
                                std::numeric_limits<double>::quiet_NaN());
        std::vector<double> beta = psi;
        for (std::size_t r = 0; r < kept.size(); ++r) {
            psi[kept[r]] = fit.psi[r];
            beta[kept[r]] = fit.beta[r];
        }
        fit.psi = std::move(psi);
        fit.beta = std::move(beta);
    }

    const std::string dtm_path = dir + "/dtm.csv";
    write_dtm_csv(dtm, dtm_path);
    manifest.add(dtm_path);
    const std::string fit_path = dir + "/wordfish.json";
    save_wordfish_json(fit, ids, fit_path);
    manifest.add(fit_path);
    const std::string points_path = dir + "/idealpoints.csv";
    write_idealpoint_csv(ids, fit, ci, points_path);
    manifest.add(points_path);
}

const char* scenario_name(bool weighted_clustering, bool weighted_counts) {
    if (weighted_clustering && weighted_counts) return "salience_vbow";
    if (weighted_clustering) return "weighted_clustering";
    if (weighted_counts) return "weighted_counts";
    return "default_vbow";
}

std::vector<std::tuple<std::string, bool, bool>> scenario_list(
    const PipelineConfig& cfg) {
    if (cfg.vbow.all_scenarios) {
        return {{"default_vbow", false, false},
                {"weighted_clustering", true, false},
                {"weighted_counts", false, true},
                {"salience_vbow", true, true}};
    }
    const bool wc = cfg.vbow.weighted_clustering;
    const bool wn = cfg.vbow.weighted_counts;
    return {{scenario_name(wc, wn), wc, wn}};
}

}  // namespace

int cmd_scale(const PipelineConfig& cfg) {
    fs::create_directories(fs::path(cfg.out_dir) / "scale");
    Manifest manifest(cfg.out_dir, "scale");

    if (!cfg.dtm_csv.empty()) {
        require_file(cfg.dtm_csv, "dtm_csv");
        DocumentTermMatrix dtm = read_dtm_csv(cfg.dtm_csv);
        const std::string dir =
            (fs::path(cfg.out_dir) / "scale" / "from_dtm").string();
        fs::create_directories(dir);
        fit_and_export(dtm, cfg, dir, "from_dtm", manifest);
        manifest.write();
        return 0;
    }

    require_file(cfg.metadata_csv, "metadata_csv");
    if (cfg.salience_method == "depth") require_dir(cfg.depth_root, "depth_root");
    if (cfg.vbow.group_by != "outlet" && cfg.vbow.group_by != "issue") {
        throw std::invalid_argument(
            "vbow.group_by must name a metadata column (outlet or issue), got '" +
            cfg.vbow.group_by + "'");
    }

    CsvTable meta = read_csv_file(cfg.metadata_csv);
    for (const char* column : {"image_id", "path", "outlet", "issue"}) {
        if (meta.column(column) < 0) {
            throw std::invalid_argument(std::string("metadata is missing column '") +
                                        column + "'");
        }
    }
    const int c_id = meta.column("image_id");
    const int c_path = meta.column("path");
    const int c_outlet = meta.column("outlet");
    const int c_issue = meta.column("issue");
    const fs::path base = fs::path(cfg.metadata_csv).parent_path();

    struct Doc {
        std::string id;
        std::string path;
        std::string outlet;
        std::string issue;
        std::vector<WeightedKeypoint> features;
        std::string error;
    };
    std::vector<Doc> docs;
    for (const std::vector<std::string>& row : meta.rows) {
        Doc doc;
        doc.id = row[static_cast<std::size_t>(c_id)];
        if (doc.id.empty()) throw std::invalid_argument("metadata has an empty image_id");
        fs::path p = row[static_cast<std::size_t>(c_path)];
        doc.path = (p.is_absolute() ? p : base / p).string();
        doc.outlet = row[static_cast<std::size_t>(c_outlet)];
        doc.issue = row[static_cast<std::size_t>(c_issue)];
        docs.push_back(std::move(doc));
    }
    std::sort(docs.begin(), docs.end(),
              [](const Doc& a, const Doc& b) { return a.id < b.id; });
    for (std::size_t i = 1; i < docs.size(); ++i) {
        if (docs[i].id == docs[i - 1].id) {
            throw std::invalid_argument("metadata repeats image_id '" + docs[i].id + "'");
        }
    }

    parallel_for(docs.size(), cfg.jobs, [&](std::size_t i) {
        Doc& doc = docs[i];
        try {
            RasterImage img = load_image(doc.path);
            RasterImage gray = to_grayscale(img);
            std::vector<Keypoint> kps =
                detect_fast(gray, cfg.features.fast_threshold,
                            cfg.features.max_keypoints);
            if (kps.size() < cfg.features.min_keypoints) {
                // textureless image: top up with a regular grid
                std::vector<Keypoint> grid =
                    dense_grid(img.width, img.height, cfg.features.grid_stride);
                kps.insert(kps.end(), grid.begin(), grid.end());
            }
            kps = filter_border_margin(kps, img.width, img.height);
            if (kps.empty()) {
                throw std::runtime_error("no keypoint survives the border margin");
            }
            std::vector<Descriptor256> descs =
                describe_brief(gray, kps, cfg.features.brief_seed);
            const std::string stem = fs::path(doc.path).stem().string();
            SalienceMap map = salience_for_image(cfg, img, gray, stem);
            doc.features = attach_salience(kps, descs, map);
        } catch (const std::exception& e) {
            doc.error = doc.id + " (" + doc.path + "): " + e.what();
        }
    });

    int failures = 0;
    std::vector<const Doc*> usable;
    std::vector<WeightedKeypoint> all_features;
    for (const Doc& doc : docs) {
        if (!doc.error.empty()) {
            std::cerr << "scale: " << doc.error << "\n";
            ++failures;
            continue;
        }
        usable.push_back(&doc);
        all_features.insert(all_features.end(), doc.features.begin(),
                            doc.features.end());
    }
    if (usable.size() < 2) {
        throw std::runtime_error("fewer than 2 usable documents, cannot scale");
    }

    for (const auto& [name, weighted_clustering, weighted_counts] :
         scenario_list(cfg)) {
        Vocabulary vocab = build_vocabulary(
            all_features, cfg.vbow.k, cfg.vbow.max_iters,
            fan_seed(cfg.seed, "vocabulary/" + name), weighted_clustering,
            weighted_counts);

        std::vector<DocumentRow> rows;
        for (const Doc* doc : usable) {
            DocumentRow row;
            row.id = doc->id;
            row.meta = {{"outlet", doc->outlet}, {"issue", doc->issue}};
            row.terms = quantize(doc->features, vocab);
            if (cfg.vbow.round_counts) {
                for (double& t : row.terms) t = std::round(t);
            }
            rows.push_back(std::move(row));
        }
        DocumentTermMatrix per_document = build_dtm(std::move(rows));
        for (const std::string& id : per_document.dropped) {
            std::cerr << "scale: " << name << ": dropped all-zero document " << id
                      << "\n";
        }
        DocumentTermMatrix grouped =
            aggregate_documents(per_document.rows, cfg.vbow.group_by);
        for (const std::string& id : grouped.dropped) {
            std::cerr << "scale: " << name << ": dropped all-zero group " << id
                      << "\n";
        }

        const std::string dir = (fs::path(cfg.out_dir) / "scale" / name).string();
        fs::create_directories(dir);
        const std::string vocab_path = dir + "/vocabulary.json";
        save_vocabulary(vocab, vocab_path);
        manifest.add(vocab_path);
        fit_and_export(grouped, cfg, dir, name, manifest);
    }
    manifest.write();
    return failures > 0 ? 2 : 0;
}

namespace {

using nlohmann::json;

// Video-level defaults every face inherits unless its annotation overrides
// them. Mirrors the vocabulary rules of the region sidecar loader.
Covariates parse_video_covariates(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read " + path);
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw std::runtime_error(path + " is not valid JSON: " + e.what());
    }
    if (!j.is_object()) throw std::runtime_error(path + " must hold a JSON object");

    Covariates c;
    for (const auto& [key, value] : j.items()) {
        if (key == "gender") {
            const std::string v = value.get<std::string>();
            if (v != "female" && v != "male") {
                throw std::runtime_error(path + ": gender must be female or male");
            }
            c.gender = v;
        } else if (key == "party") {
            const std::string v = value.get<std::string>();
            if (v != "dem" && v != "rep") {
                throw std::runtime_error(path + ": party must be dem or rep");
            }
            c.party = v;
        } else if (key == "candidate_id") {
            c.candidate_id = value.get<std::string>();
        } else if (key == "election_year") {
            c.election_year = value.get<int>();
        } else if (key == "candidate_visible") {
            c.candidate_visible = value.get<bool>();
        } else {
            throw std::runtime_error(path + ": unknown covariate key '" + key + "'");
        }
    }
    return c;
}

std::string depth_file_name(int index) {
    return "depth" + frame_file_name(index).substr(5);
}

struct VideoJob {
    std::string video_id;
    std::string dir;
    std::vector<FaceObservation> rows;
    std::vector<std::string> scene_rows;  // preformatted CSV lines
    int excluded = 0;
    std::string error;
};

void process_video(const PipelineConfig& cfg, VideoJob& job) {
    FrameSequence seq;
    seq.video_id = job.video_id;
    for (const fs::directory_entry& entry : fs::directory_iterator(job.dir)) {
        if (!entry.is_regular_file()) continue;
        const std::string name = entry.path().filename().string();
        if (std::optional<int> index = parse_frame_index(name)) {
            seq.frames.push_back(FrameRef{*index, entry.path().string()});
        }
    }
    if (seq.frames.empty()) {
        throw std::runtime_error("no frame_*.png files in " + job.dir);
    }
    std::sort(seq.frames.begin(), seq.frames.end(),
              [](const FrameRef& a, const FrameRef& b) { return a.index < b.index; });

    const std::string covariate_path = job.dir + "/video.json";
    if (fs::is_regular_file(covariate_path)) {
        seq.covariates = parse_video_covariates(covariate_path);
    }
    seq.validate();
    const std::vector<Scene> scenes = detect_scenes(seq, cfg.video.tau);

    RasterImage probe = load_image(seq.frames.front().path);
    const int width = probe.width;
    const int height = probe.height;

    std::map<std::string, AnnotationSet> by_image;
    const std::string sidecar = job.dir + "/annotations.json";
    if (fs::is_regular_file(sidecar)) {
        for (AnnotationSet& set : load_annotation_sidecar(sidecar, width, height)) {
            const std::string key = set.image;
            if (!by_image.emplace(key, std::move(set)).second) {
                throw std::runtime_error("duplicate annotation set for " + key);
            }
        }
    }

    std::vector<AnnotatedFrame> annotated;
    for (std::size_t s = 0; s < scenes.size(); ++s) {
        const FrameRef& ref = seq.frames[scenes[s].keyframe];
        AnnotatedFrame frame;
        frame.frame_id = ref.index;
        frame.width = width;
        frame.height = height;
        const std::string name = fs::path(ref.path).filename().string();
        if (auto it = by_image.find(name); it != by_image.end()) {
            frame.faces = it->second.regions;
        }
        const std::string depth_path = job.dir + "/" + depth_file_name(ref.index);
        if (fs::is_regular_file(depth_path)) {
            frame.depth = load_depth_map(depth_path, width, height);
        }
        annotated.push_back(std::move(frame));

        job.scene_rows.push_back(join_csv_row(
            {job.video_id, std::to_string(s),
             std::to_string(seq.frames[scenes[s].start].index),
             std::to_string(seq.frames[scenes[s].end].index),
             std::to_string(ref.index)}));
    }

    ObservationTable table =
        build_observation_table(job.video_id, seq.covariates, annotated);
    job.rows = std::move(table.rows);
    job.excluded = table.excluded_missing_depth;
}

// Fits one model per configured outcome; failures are reported and counted
// instead of ending the run, so one aliased design cannot hide the other
// model's results.
int fit_models(const std::vector<FaceObservation>& rows, const PipelineConfig& cfg,
               const char* tag, std::vector<RegressionResult>& models) {
    int failed = 0;
    for (const std::string& outcome : cfg.regression.outcomes) {
        ModelSpec spec;
        spec.outcome = outcome;
        spec.main_effects = cfg.regression.main_effects;
        spec.interaction = cfg.regression.interaction;
        spec.fixed_effects = cfg.regression.fixed_effects;
        spec.cluster = cfg.regression.cluster;
        try {
            models.push_back(fit_fe_ols(rows, spec));
        } catch (const std::exception& e) {
            std::cerr << tag << ": " << model_display_name(outcome) << ": "
                      << e.what() << "\n";
            ++failed;
        }
    }
    return failed;
}

}  // namespace

int cmd_video(const PipelineConfig& cfg) {
    require_dir(cfg.frames_root, "frames_root");
    std::vector<VideoJob> jobs;
    for (const fs::directory_entry& entry : fs::directory_iterator(cfg.frames_root)) {
        if (!entry.is_directory()) continue;
        VideoJob job;
        job.video_id = entry.path().filename().string();
        job.dir = entry.path().string();
        jobs.push_back(std::move(job));
    }
    if (jobs.empty()) {
        throw std::runtime_error("no video directories under " + cfg.frames_root);
    }
    std::sort(jobs.begin(), jobs.end(), [](const VideoJob& a, const VideoJob& b) {
        return a.video_id < b.video_id;
    });
    fs::create_directories(fs::path(cfg.out_dir) / "video");

    parallel_for(jobs.size(), cfg.jobs, [&](std::size_t i) {
        try {
            process_video(cfg, jobs[i]);
        } catch (const std::exception& e) {
            jobs[i].error = jobs[i].video_id + ": " + e.what();
        }
    });

    Manifest manifest(cfg.out_dir, "video");
    int failures = 0;
    int excluded = 0;
    std::vector<FaceObservation> rows;
    std::string scene_csv = "video_id,scene,start,end,keyframe\n";
    for (VideoJob& job : jobs) {
        if (!job.error.empty()) {
            std::cerr << "video: " << job.error << "\n";
            ++failures;
            continue;
        }
        excluded += job.excluded;
        for (FaceObservation& row : job.rows) rows.push_back(std::move(row));
        for (const std::string& line : job.scene_rows) scene_csv += line + "\n";
    }
    if (excluded > 0) {
        std::cerr << "video: " << excluded
                  << " faces have no depth map; their depth cells stay empty\n";
    }

    const std::string scene_path =
        (fs::path(cfg.out_dir) / "video" / "scenes.csv").string();
    write_text(scene_path, scene_csv);
    manifest.add(scene_path);
    const std::string obs_path =
        (fs::path(cfg.out_dir) / "video" / "observations.csv").string();
    write_observation_csv(rows, obs_path);
    manifest.add(obs_path);

    std::vector<RegressionResult> models;
    const int failed_models = fit_models(rows, cfg, "video", models);
    if (!models.empty()) {
        const std::string report = format_report(models);
        std::cout << report;
        const std::string report_path =
            (fs::path(cfg.out_dir) / "video" / "models.txt").string();
        write_text(report_path, report);
        manifest.add(report_path);
        const std::string coef_path =
            (fs::path(cfg.out_dir) / "video" / "coefficients.csv").string();
        write_coefficient_csv(models, coef_path);
        manifest.add(coef_path);
    }
    manifest.write();
    return failures > 0 || failed_models > 0 ? 2 : 0;
}

int cmd_regress(const PipelineConfig& cfg) {
    require_file(cfg.observations_csv, "observations_csv");
    const std::vector<FaceObservation> rows =
        read_observation_csv(cfg.observations_csv);
    fs::create_directories(fs::path(cfg.out_dir) / "regress");
    Manifest manifest(cfg.out_dir, "regress");

    std::vector<RegressionResult> models;
    const int failed_models = fit_models(rows, cfg, "regress", models);
    if (models.empty()) {
        throw std::runtime_error("no model could be fitted");
    }
    const std::string report = format_report(models);
    std::cout << report;
    const std::string report_path =
        (fs::path(cfg.out_dir) / "regress" / "models.txt").string();
    write_text(report_path, report);
    manifest.add(report_path);
    const std::string coef_path =
        (fs::path(cfg.out_dir) / "regress" / "coefficients.csv").string();
    write_coefficient_csv(models, coef_path);
    manifest.add(coef_path);
    manifest.write();
    return failed_models > 0 ? 2 : 0;
}

}  // namespace prominence::cli
