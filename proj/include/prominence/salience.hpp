#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "prominence/annotations.hpp"
#include "prominence/image.hpp"

namespace prominence {

// Per-pixel attention weights in [0, 1]; 1 = maximally salient.
struct SalienceMap {
    int width = 0;
    int height = 0;
    std::vector<float> data;

    float at(int x, int y) const {
        return data[static_cast<std::size_t>(y) * width + x];
    }
    void validate() const;
};

// Arbitrary pixel region; bits[y * width + x] != 0 marks membership.
struct PixelMask {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> bits;

    static PixelMask from_box(const Box& box, int width, int height);
    std::size_t count() const;
};

// Fraction of the image the region occupies. Throws on an empty region.
double object_size(const PixelMask& mask);
double object_size(const Box& box, int width, int height);

// 1 - d(p*, c) / d_max where p* is the region pixel nearest the image
// center c and d_max the center-to-corner distance. Ties on the nearest
// pixel break by smallest (row, column).
double object_centeredness(const PixelMask& mask);
double object_centeredness(const Box& box, int width, int height);

enum class Aggregate { Mean, Max };

double region_salience(const SalienceMap& map, const PixelMask& mask,
                       Aggregate mode = Aggregate::Mean);
double region_salience(const SalienceMap& map, const Box& box,
                       Aggregate mode = Aggregate::Mean);

struct MbdParams {
    int pass_pairs = 3;
    bool smooth = true;           // box-blur postprocess
    bool center_weight = true;    // Gaussian center reweighting
    int smooth_radius = 0;        // 0 = ceil(min(w,h)/50)
    double center_sigma_frac = 0.33;
};

// Raster-scan approximation of the minimum barrier distance from the border
// seed ring; `pass_pairs` forward/backward sweeps. Returns raw distances.
std::vector<float> mbd_scan_raw(const RasterImage& gray, int pass_pairs);

// Raw distances rescaled to [0, 1] plus optional smoothing / center weighting.
SalienceMap mbd_salience(const RasterImage& gray, const MbdParams& params = {});

// Exact minimum barrier distance via a path-minimum threshold sweep with
// minimax Dijkstra per level. Capped at 64x64 images.
std::vector<float> mbd_exact_raw(const RasterImage& gray);
SalienceMap mbd_exact(const RasterImage& gray);

// Inverted frame-normalized depth: 1 = nearest plane of this frame. A
// constant-depth frame maps to 0.5 everywhere.
SalienceMap depth_salience(const DepthMap& depth);

// Per-pixel centeredness prior (1 at the image center, 0 at the corners).
SalienceMap centeredness_map(int width, int height);

// 8-bit export, value = round(255 * s); brighter = more salient.
RasterImage to_image(const SalienceMap& map);

// Detection x salience score for one annotated region.
struct RegionScore {
    std::string id;
    double size_fraction = 0.0;
    double centeredness = 0.0;
    double salience_aggregate = 0.0;
    double prominence = 0.0;  // detection_confidence * salience_aggregate
};

// In-bounds-normalized box blur with radius r (window 2r+1).
void box_blur(const float* in, float* out, int width, int height, int radius);

}  // namespace prominence
