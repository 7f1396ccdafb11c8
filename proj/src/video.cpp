#include "prominence/video.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <stdexcept>

#include "prominence/csv.hpp"
#include "prominence/salience.hpp"

namespace prominence {

namespace {

// Closes the scene running since `start` at frame t-1 whenever cut_before[t]
// is set; positions refer to the sequence, not the frame numbering.
std::vector<Scene> scenes_from_cuts(const std::vector<char>& cut_before,
                                    std::size_t frame_count) {
    std::vector<Scene> scenes;
    std::size_t start = 0;
    for (std::size_t t = 1; t < frame_count; ++t) {
        if (cut_before[t]) {
            scenes.push_back(Scene{start, t - 1, start});
            start = t;
        }
    }
    scenes.push_back(Scene{start, frame_count - 1, start});
    return scenes;
}

RasterImage gray_checked(const RasterImage& frame, int width, int height,
                         std::size_t position) {
    if (frame.width != width || frame.height != height) {
        throw std::invalid_argument(
            "detect_scenes: frame " + std::to_string(position) + " is " +
            std::to_string(frame.width) + "x" + std::to_string(frame.height) +
            ", expected " + std::to_string(width) + "x" + std::to_string(height));
    }
    return to_grayscale(frame);
}

const std::string& require_covariate(const std::optional<std::string>& value,
                                     const char* name, const std::string& video_id,
                                     int frame_id) {
    if (!value) {
        throw std::invalid_argument("build_observation_table: missing covariate '" +
                                    std::string(name) + "' for video '" + video_id +
                                    "' frame " + std::to_string(frame_id));
    }
    return *value;
}

}  // namespace

void FrameSequence::validate() const {
    for (std::size_t t = 1; t < frames.size(); ++t) {
        if (frames[t].index <= frames[t - 1].index) {
            throw std::invalid_argument("frame sequence '" + video_id +
                                        "': indices must strictly increase (" +
                                        std::to_string(frames[t - 1].index) + " then " +
                                        std::to_string(frames[t].index) + ")");
        }
    }
}

double mean_frame_difference(const RasterImage& a, const RasterImage& b) {
    if (a.width != b.width || a.height != b.height) {
        throw std::invalid_argument("mean_frame_difference: dimension mismatch");
    }
    RasterImage ga = to_grayscale(a);
    RasterImage gb = to_grayscale(b);
    long long total = 0;
    for (std::size_t i = 0; i < ga.data.size(); ++i) {
        total += std::abs(static_cast<int>(ga.data[i]) - static_cast<int>(gb.data[i]));
    }
    return static_cast<double>(total) /
           (static_cast<double>(a.width) * static_cast<double>(a.height));
}

std::vector<Scene> detect_scenes(const std::vector<RasterImage>& frames, double tau) {
    if (frames.empty()) throw std::invalid_argument("detect_scenes: no frames");
    if (tau < 0.0) throw std::invalid_argument("detect_scenes: negative threshold");
    const int width = frames.front().width;
    const int height = frames.front().height;
    std::vector<char> cut_before(frames.size(), 0);
    RasterImage prev = gray_checked(frames[0], width, height, 0);
    for (std::size_t t = 1; t < frames.size(); ++t) {
        RasterImage cur = gray_checked(frames[t], width, height, t);
        cut_before[t] = mean_frame_difference(prev, cur) > tau;
        prev = std::move(cur);
    }
    return scenes_from_cuts(cut_before, frames.size());
}

std::vector<Scene> detect_scenes(const FrameSequence& seq, double tau) {
    seq.validate();
    if (seq.frames.empty()) {
        throw std::invalid_argument("detect_scenes: video '" + seq.video_id +
                                    "' has no frames");
    }
    if (tau < 0.0) throw std::invalid_argument("detect_scenes: negative threshold");
    RasterImage prev = to_grayscale(load_image(seq.frames[0].path));
    std::vector<char> cut_before(seq.frames.size(), 0);
    for (std::size_t t = 1; t < seq.frames.size(); ++t) {
        RasterImage cur = gray_checked(load_image(seq.frames[t].path), prev.width,
                                       prev.height, t);
        cut_before[t] = mean_frame_difference(prev, cur) > tau;
        prev = std::move(cur);
    }
    return scenes_from_cuts(cut_before, seq.frames.size());
}

double face_depth_position(const DepthMap& depth, const Box& box) {
    Box clipped = box.clipped(depth.width, depth.height);
    if (clipped.area() == 0) {
        throw std::invalid_argument("face_depth_position: box clips to nothing");
    }
    return region_salience(depth_salience(depth), clipped, Aggregate::Mean);
}

double face_relative_size(const Box& box, int width, int height) {
    if (width <= 0 || height <= 0) {
        throw std::invalid_argument("face_relative_size: empty frame");
    }
    Box clipped = box.clipped(width, height);
    if (clipped.area() == 0) {
        throw std::invalid_argument("face_relative_size: box clips to nothing");
    }
    return static_cast<double>(clipped.area()) /
           (static_cast<double>(width) * static_cast<double>(height));
}

ObservationTable build_observation_table(const std::string& video_id,
                                         const Covariates& video_covariates,
                                         const std::vector<AnnotatedFrame>& frames) {
    ObservationTable table;
    for (const AnnotatedFrame& frame : frames) {
        if (frame.width <= 0 || frame.height <= 0) {
            throw std::invalid_argument("build_observation_table: frame " +
                                        std::to_string(frame.frame_id) +
                                        " has empty dimensions");
        }
        std::optional<SalienceMap> depth_map;
        if (frame.depth) {
            if (frame.depth->width != frame.width ||
                frame.depth->height != frame.height) {
                throw std::invalid_argument(
                    "build_observation_table: depth map dimensions differ from frame " +
                    std::to_string(frame.frame_id));
            }
            depth_map = depth_salience(*frame.depth);
        }
        for (const AnnotatedRegion& face : frame.faces) {
            Box clipped = face.box.clipped(frame.width, frame.height);
            if (clipped.area() == 0) {
                throw std::invalid_argument(
                    "build_observation_table: face box clips to nothing in frame " +
                    std::to_string(frame.frame_id));
            }
            Covariates cov = face.covariates.merged_over(video_covariates);
            FaceObservation obs;
            obs.video_id = video_id;
            obs.frame_id = frame.frame_id;
            obs.box = clipped;
            obs.gender = require_covariate(cov.gender, "gender", video_id, frame.frame_id);
            obs.party = require_covariate(cov.party, "party", video_id, frame.frame_id);
            obs.candidate_id =
                require_covariate(cov.candidate_id, "candidate_id", video_id, frame.frame_id);
            if (!cov.election_year) {
                throw std::invalid_argument(
                    "build_observation_table: missing covariate 'election_year' for video '" +
                    video_id + "' frame " + std::to_string(frame.frame_id));
            }
            obs.election_year = *cov.election_year;
            if (!cov.candidate_visible) {
                throw std::invalid_argument(
                    "build_observation_table: missing covariate 'candidate_visible' for video '" +
                    video_id + "' frame " + std::to_string(frame.frame_id));
            }
            obs.candidate_visible = *cov.candidate_visible;
            obs.relative_size = face_relative_size(clipped, frame.width, frame.height);
            if (depth_map) {
                obs.depth_position = region_salience(*depth_map, clipped, Aggregate::Mean);
            } else {
                obs.depth_position = std::numeric_limits<double>::quiet_NaN();
                ++table.excluded_missing_depth;
            }
            table.rows.push_back(std::move(obs));
        }
    }
    return table;
}

void write_observation_csv(const std::vector<FaceObservation>& rows,
                           const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << "video_id,frame_id,x,y,w,h,gender,party,candidate_id,election_year,"
           "candidate_visible,depth_position,relative_size\n";
    for (const FaceObservation& r : rows) {
        std::vector<std::string> cells{
            r.video_id,
            std::to_string(r.frame_id),
            std::to_string(r.box.x),
            std::to_string(r.box.y),
            std::to_string(r.box.w),
            std::to_string(r.box.h),
            r.gender,
            r.party,
            r.candidate_id,
            std::to_string(r.election_year),
            r.candidate_visible ? "1" : "0",
            std::isnan(r.depth_position) ? "" : format_double(r.depth_position),
            format_double(r.relative_size),
        };
        out << join_csv_row(cells) << "\n";
    }
    if (!out) throw std::runtime_error("write failed: " + path);
}

std::vector<FaceObservation> read_observation_csv(const std::string& path) {
    CsvTable table = read_csv_file(path);
    const char* names[] = {"video_id", "frame_id", "x", "y", "w", "h",
                           "gender", "party", "candidate_id", "election_year",
                           "candidate_visible", "depth_position", "relative_size"};
    int cols[13];
    for (int i = 0; i < 13; ++i) {
        cols[i] = table.column(names[i]);
        if (cols[i] < 0) {
            throw std::runtime_error(path + ": missing column '" +
                                     std::string(names[i]) + "'");
        }
    }
    std::vector<FaceObservation> rows;
    rows.reserve(table.rows.size());
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const auto& cells = table.rows[r];
        FaceObservation obs;
        obs.video_id = cells[cols[0]];
        obs.frame_id = std::stoi(cells[cols[1]]);
        obs.box = Box{std::stoi(cells[cols[2]]), std::stoi(cells[cols[3]]),
                      std::stoi(cells[cols[4]]), std::stoi(cells[cols[5]])};
        obs.gender = cells[cols[6]];
        obs.party = cells[cols[7]];
        obs.candidate_id = cells[cols[8]];
        obs.election_year = std::stoi(cells[cols[9]]);
        const std::string& vis = cells[cols[10]];
        if (vis == "1" || vis == "true") {
            obs.candidate_visible = true;
        } else if (vis == "0" || vis == "false") {
            obs.candidate_visible = false;
        } else {
            throw std::runtime_error(path + " row " + std::to_string(r + 2) +
                                     ": candidate_visible must be 0/1/true/false");
        }
        obs.depth_position = parse_double(cells[cols[11]]);
        obs.relative_size = parse_double(cells[cols[12]]);
        rows.push_back(std::move(obs));
    }
    return rows;
}

std::string frame_file_name(int index, int pad) {
    std::string digits = std::to_string(index);
    if (static_cast<int>(digits.size()) < pad) {
        digits.insert(0, static_cast<std::size_t>(pad) - digits.size(), '0');
    }
    return "frame_" + digits + ".png";
}

std::optional<int> parse_frame_index(const std::string& filename) {
    const std::string prefix = "frame_";
    if (filename.rfind(prefix, 0) != 0) return std::nullopt;
    std::size_t pos = prefix.size();
    std::size_t digits_end = pos;
    while (digits_end < filename.size() &&
           filename[digits_end] >= '0' && filename[digits_end] <= '9') {
        ++digits_end;
    }
    if (digits_end == pos) return std::nullopt;
    // the remainder must be exactly one extension, e.g. ".png"
    if (digits_end == filename.size() || filename[digits_end] != '.' ||
        filename.find('.', digits_end + 1) != std::string::npos) {
        return std::nullopt;
    }
    return std::atoi(filename.substr(pos, digits_end - pos).c_str());
}

}  // namespace prominence
