#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "prominence/annotations.hpp"
#include "prominence/image.hpp"

namespace prominence {

// One numbered frame image on disk.
struct FrameRef {
    int index = 0;
    std::string path;
};

// Extracted frames of a single ad plus the covariates every face inherits
// unless its annotation overrides them.
struct FrameSequence {
    std::string video_id;
    Covariates covariates;
    std::vector<FrameRef> frames;

    // Throws std::invalid_argument unless frame indices strictly increase.
    void validate() const;
};

// Contiguous frame run between two cuts. Positions index into the sequence;
// the keyframe is always the first frame after the cut.
struct Scene {
    std::size_t start = 0;
    std::size_t end = 0;  // inclusive
    std::size_t keyframe = 0;
};

// Mean absolute grayscale difference over pixels; inputs are converted with
// the usual luma weights first. Throws on mismatched dimensions.
double mean_frame_difference(const RasterImage& a, const RasterImage& b);

// Splits a sequence wherever the mean absolute difference between adjacent
// frames exceeds tau gray levels. The resulting scenes partition the
// sequence; a single frame yields one single-frame scene.
std::vector<Scene> detect_scenes(const std::vector<RasterImage>& frames,
                                 double tau = 30.0);

// Same, streaming the frames from disk one at a time.
std::vector<Scene> detect_scenes(const FrameSequence& seq, double tau = 30.0);

// Mean of the frame's inverted-depth salience over the clipped box: 1 means
// the face sits on the nearest plane of this frame, 0 on the farthest.
// Throws when the box clips to nothing.
double face_depth_position(const DepthMap& depth, const Box& box);

// Clipped box area divided by the frame area.
double face_relative_size(const Box& box, int width, int height);

// Fully resolved per-face measurement row. Covariates are concrete here;
// assembly fails loudly when any is missing after the video-level merge.
struct FaceObservation {
    std::string video_id;
    int frame_id = 0;
    Box box;
    std::string gender;  // "female" | "male"
    std::string party;   // "dem" | "rep"
    std::string candidate_id;
    int election_year = 0;
    bool candidate_visible = false;
    double depth_position = 0.0;  // NaN when the frame had no depth map
    double relative_size = 0.0;
};

// Everything known about one frame that is needed to measure its faces.
struct AnnotatedFrame {
    int frame_id = 0;
    int width = 0;
    int height = 0;
    std::vector<AnnotatedRegion> faces;
    std::optional<DepthMap> depth;
};

struct ObservationTable {
    std::vector<FaceObservation> rows;
    // faces that got a size but no depth value because their frame lacks a
    // depth map; their rows carry an empty depth cell
    int excluded_missing_depth = 0;
};

// One row per (frame, face) in input order. Faces whose box clips to zero
// area are rejected upstream by the annotation loader; here every face must
// end up with complete covariates or the call throws.
ObservationTable build_observation_table(const std::string& video_id,
                                         const Covariates& video_covariates,
                                         const std::vector<AnnotatedFrame>& frames);

// Column order is fixed: video_id,frame_id,x,y,w,h,gender,party,candidate_id,
// election_year,candidate_visible,depth_position,relative_size. NaN depth
// serializes as an empty cell and parses back to NaN.
void write_observation_csv(const std::vector<FaceObservation>& rows,
                           const std::string& path);
std::vector<FaceObservation> read_observation_csv(const std::string& path);

// Frame naming convention helpers: "frame_017.png" <-> 17. Parsing returns
// nullopt for names that do not follow the convention.
std::string frame_file_name(int index, int pad = 3);
std::optional<int> parse_frame_index(const std::string& filename);

}  // namespace prominence
