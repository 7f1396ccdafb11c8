#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "prominence/image.hpp"
#include "prominence/salience.hpp"

namespace prominence {

// Half-width of the area a descriptor needs around its keypoint. Keypoints
// closer than this to a border cannot be described.
inline constexpr int kPatchMargin = 16;

struct Keypoint {
    int x = 0;
    int y = 0;
    float response = 0.0f;  // corner strength; 0 for grid keypoints

    bool operator==(const Keypoint&) const = default;
};

// 256-bit binary descriptor packed into four 64-bit words.
struct Descriptor256 {
    std::array<std::uint64_t, 4> words{};

    void set(int i) { words[i >> 6] |= 1ull << (i & 63); }
    bool test(int i) const { return (words[i >> 6] >> (i & 63)) & 1; }
    int hamming(const Descriptor256& other) const;

    bool operator==(const Descriptor256&) const = default;
};

// FAST-9 corners: a pixel is a corner when at least 9 contiguous pixels on
// the 16-pixel Bresenham circle of radius 3 are all brighter than center+t
// or all darker than center-t. Response is the absolute intensity sum over
// the qualifying arc; 3x3 non-maximum suppression, then the strongest
// `max_keypoints` are kept (ties broken by y, then x).
std::vector<Keypoint> detect_fast(const RasterImage& gray, int threshold,
                                  std::size_t max_keypoints);

// Grid fallback for textureless images: keypoints every `stride` pixels at
// {margin, margin+stride, ...} while staying at least `margin` away from
// every border. May be empty when the margins exhaust the image.
std::vector<Keypoint> dense_grid(int width, int height, int stride,
                                 int margin = kPatchMargin);

// Keeps only keypoints whose descriptor patch fits inside the image.
std::vector<Keypoint> filter_border_margin(const std::vector<Keypoint>& kps,
                                           int width, int height,
                                           int margin = kPatchMargin);

// 256 pixel-pair comparisons, offsets drawn once from an isotropic Gaussian
// (sigma 6.5) clamped to the 31x31 patch. The same seed reproduces the same
// pattern forever; corpora are only comparable under a shared pattern.
struct BriefPattern {
    std::array<std::int8_t, 1024> offsets{};  // ax, ay, bx, by per pair

    static BriefPattern generate(std::uint64_t seed);
};

// BRIEF descriptors over a 5x5 box-blurred image. The blur is evaluated as
// an exact integer fraction (window sum and sample count), so comparisons
// carry no float rounding and intensity inversion flips every non-tied bit.
std::vector<Descriptor256> describe_brief(const RasterImage& gray,
                                          const std::vector<Keypoint>& kps,
                                          const BriefPattern& pattern);
std::vector<Descriptor256> describe_brief(const RasterImage& gray,
                                          const std::vector<Keypoint>& kps,
                                          std::uint64_t pattern_seed);

struct WeightedKeypoint {
    Keypoint keypoint;
    Descriptor256 descriptor;
    float weight = 1.0f;  // salience at the keypoint, in [0,1]
};

// Pairs keypoints with descriptors and the salience value under each
// keypoint. Throws when the lists disagree in length or a keypoint falls
// outside the map.
std::vector<WeightedKeypoint> attach_salience(
    const std::vector<Keypoint>& kps, const std::vector<Descriptor256>& descs,
    const SalienceMap& map);

// Unweighted variant: every weight is exactly 1.
std::vector<WeightedKeypoint> attach_uniform(
    const std::vector<Keypoint>& kps, const std::vector<Descriptor256>& descs);

}  // namespace prominence
