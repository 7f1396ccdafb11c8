#include "prominence/salience.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <queue>
#include <stdexcept>

namespace prominence {

void SalienceMap::validate() const {
    if (width < 1 || height < 1) {
        throw std::invalid_argument("salience map dimensions must be positive");
    }
    if (data.size() != static_cast<std::size_t>(width) * height) {
        throw std::invalid_argument("salience data length does not match dimensions");
    }
    for (float v : data) {
        if (!(v >= 0.0f && v <= 1.0f)) {
            throw std::invalid_argument("salience values must lie in [0,1]");
        }
    }
}

PixelMask PixelMask::from_box(const Box& box, int width, int height) {
    PixelMask mask;
    mask.width = width;
    mask.height = height;
    mask.bits.assign(static_cast<std::size_t>(width) * height, 0);
    Box c = box.clipped(width, height);
    for (int y = c.y; y < c.y + c.h; ++y) {
        for (int x = c.x; x < c.x + c.w; ++x) {
            mask.bits[static_cast<std::size_t>(y) * width + x] = 1;
        }
    }
    return mask;
}

std::size_t PixelMask::count() const {
    std::size_t n = 0;
    for (auto b : bits) n += b != 0;
    return n;
}

double object_size(const PixelMask& mask) {
    std::size_t n = mask.count();
    if (n == 0) throw std::invalid_argument("object_size: empty region");
    return static_cast<double>(n) /
           (static_cast<double>(mask.width) * mask.height);
}

double object_size(const Box& box, int width, int height) {
    Box c = box.clipped(width, height);
    if (c.area() == 0) throw std::invalid_argument("object_size: empty region");
    return static_cast<double>(c.area()) /
           (static_cast<double>(width) * height);
}

namespace {

double centeredness_of_pixel_set(int width, int height,
                                 const std::function<bool(int, int)>& member) {
    const double cx = (width - 1) / 2.0;
    const double cy = (height - 1) / 2.0;
    const double d_max = std::hypot(cx, cy);  // all four corners equidistant
    double best = std::numeric_limits<double>::infinity();
    bool found = false;
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
            if (!member(x, y)) continue;
            double d2 = (x - cx) * (x - cx) + (y - cy) * (y - cy);
            if (d2 < best) {  // strict: ties keep the earliest (row, column)
                best = d2;
                found = true;
            } else {
                found = found || d2 == best;
            }
        }
    }
    if (!found) throw std::invalid_argument("object_centeredness: empty region");
    if (d_max == 0.0) return 1.0;  // 1x1 image
    return 1.0 - std::sqrt(best) / d_max;
}

}  // namespace

double object_centeredness(const PixelMask& mask) {
    return centeredness_of_pixel_set(mask.width, mask.height, [&](int x, int y) {
        return mask.bits[static_cast<std::size_t>(y) * mask.width + x] != 0;
    });
}

double object_centeredness(const Box& box, int width, int height) {
    Box c = box.clipped(width, height);
    if (c.area() == 0) {
        throw std::invalid_argument("object_centeredness: empty region");
    }
    return centeredness_of_pixel_set(width, height, [&](int x, int y) {
        return x >= c.x && x < c.x + c.w && y >= c.y && y < c.y + c.h;
    });
}

namespace {

double aggregate_over(const SalienceMap& map, Aggregate mode,
                      const std::function<bool(int, int)>& member) {
    double sum = 0.0;
    double best = 0.0;
    std::size_t n = 0;
    for (int y = 0; y < map.height; ++y) {
        for (int x = 0; x < map.width; ++x) {
            if (!member(x, y)) continue;
            float v = map.at(x, y);
            sum += v;
            best = std::max(best, static_cast<double>(v));
            ++n;
        }
    }
    if (n == 0) throw std::invalid_argument("region_salience: empty region");
    return mode == Aggregate::Mean ? sum / static_cast<double>(n) : best;
}

}  // namespace

double region_salience(const SalienceMap& map, const PixelMask& mask, Aggregate mode) {
    if (mask.width != map.width || mask.height != map.height) {
        throw std::invalid_argument("region_salience: mask dimensions mismatch");
    }
    return aggregate_over(map, mode, [&](int x, int y) {
        return mask.bits[static_cast<std::size_t>(y) * mask.width + x] != 0;
    });
}

double region_salience(const SalienceMap& map, const Box& box, Aggregate mode) {
    Box c = box.clipped(map.width, map.height);
    if (c.area() == 0) throw std::invalid_argument("region_salience: empty region");
    return aggregate_over(map, mode, [&](int x, int y) {
        return x >= c.x && x < c.x + c.w && y >= c.y && y < c.y + c.h;
    });
}

// ---------------------------------------------------------------------------
// Minimum barrier distance
// ---------------------------------------------------------------------------

namespace {

constexpr float kInf = std::numeric_limits<float>::infinity();

struct ScanState {
    std::vector<float> dist;       // U: current barrier estimate
    std::vector<std::uint8_t> hi;  // H: path maximum
    std::vector<std::uint8_t> lo;  // L: path minimum
};

inline void relax(ScanState& s, const std::uint8_t* img, std::size_t nb,
                  std::size_t p) {
    if (s.dist[nb] == kInf) return;
    std::uint8_t h = std::max(s.hi[nb], img[p]);
    std::uint8_t l = std::min(s.lo[nb], img[p]);
    float b = static_cast<float>(h - l);
    if (b < s.dist[p]) {
        s.dist[p] = b;
        s.hi[p] = h;
        s.lo[p] = l;
    }
}

void require_gray(const RasterImage& gray) {
    gray.validate();
    if (gray.channels != 1) {
        throw std::invalid_argument("MBD expects a single-channel image");
    }
}

}  // namespace

std::vector<float> mbd_scan_raw(const RasterImage& gray, int pass_pairs) {
    require_gray(gray);
    if (pass_pairs < 1) throw std::invalid_argument("pass_pairs must be >= 1");
    const int w = gray.width;
    const int h = gray.height;
    const std::uint8_t* img = gray.data.data();

    ScanState s;
    s.dist.assign(gray.pixel_count(), kInf);
    s.hi.assign(gray.data.begin(), gray.data.end());
    s.lo.assign(gray.data.begin(), gray.data.end());
    // seed ring: every border pixel
    for (int x = 0; x < w; ++x) {
        s.dist[x] = 0.0f;
        s.dist[static_cast<std::size_t>(h - 1) * w + x] = 0.0f;
    }
    for (int y = 0; y < h; ++y) {
        s.dist[static_cast<std::size_t>(y) * w] = 0.0f;
        s.dist[static_cast<std::size_t>(y) * w + w - 1] = 0.0f;
    }

    for (int pass = 0; pass < pass_pairs; ++pass) {
        // forward: upper/left neighbors in raster order
        for (int y = 0; y < h; ++y) {
            std::size_t row = static_cast<std::size_t>(y) * w;
            for (int x = 0; x < w; ++x) {
                std::size_t p = row + x;
                if (x > 0) relax(s, img, p - 1, p);
                if (y > 0) relax(s, img, p - w, p);
            }
        }
        // backward: lower/right neighbors in reverse raster order
        for (int y = h - 1; y >= 0; --y) {
            std::size_t row = static_cast<std::size_t>(y) * w;
            for (int x = w - 1; x >= 0; --x) {
                std::size_t p = row + x;
                if (x < w - 1) relax(s, img, p + 1, p);
                if (y < h - 1) relax(s, img, p + w, p);
            }
        }
    }
    return std::move(s.dist);
}

namespace {

SalienceMap rescale_to_unit(std::vector<float> raw, int w, int h) {
    float m = 0.0f;
    for (float v : raw) m = std::max(m, v);
    if (m > 0.0f) {
        for (float& v : raw) v /= m;
    } else {
        std::fill(raw.begin(), raw.end(), 0.0f);
    }
    SalienceMap map;
    map.width = w;
    map.height = h;
    map.data = std::move(raw);
    return map;
}

void renormalize_to_unit(SalienceMap& map) {
    float m = 0.0f;
    for (float v : map.data) m = std::max(m, v);
    if (m > 0.0f) {
        for (float& v : map.data) v /= m;
    }
}

}  // namespace

void box_blur(const float* in, float* out, int width, int height, int radius) {
    if (radius < 1) {
        std::copy(in, in + static_cast<std::size_t>(width) * height, out);
        return;
    }
    // two separable passes, averaging only in-bounds samples
    std::vector<float> tmp(static_cast<std::size_t>(width) * height);
    for (int y = 0; y < height; ++y) {
        const float* row = in + static_cast<std::size_t>(y) * width;
        float* trow = tmp.data() + static_cast<std::size_t>(y) * width;
        for (int x = 0; x < width; ++x) {
            int x0 = std::max(0, x - radius);
            int x1 = std::min(width - 1, x + radius);
            float sum = 0.0f;
            for (int i = x0; i <= x1; ++i) sum += row[i];
            trow[x] = sum / static_cast<float>(x1 - x0 + 1);
        }
    }
    for (int y = 0; y < height; ++y) {
        int y0 = std::max(0, y - radius);
        int y1 = std::min(height - 1, y + radius);
        for (int x = 0; x < width; ++x) {
            float sum = 0.0f;
            for (int i = y0; i <= y1; ++i) {
                sum += tmp[static_cast<std::size_t>(i) * width + x];
            }
            out[static_cast<std::size_t>(y) * width + x] =
                sum / static_cast<float>(y1 - y0 + 1);
        }
    }
}

SalienceMap mbd_salience(const RasterImage& gray, const MbdParams& params) {
    require_gray(gray);
    if (gray.width < 3 || gray.height < 3) {
        throw std::invalid_argument("mbd_salience requires an image of at least 3x3");
    }
    SalienceMap map = rescale_to_unit(mbd_scan_raw(gray, params.pass_pairs),
                                      gray.width, gray.height);
    if (params.smooth) {
        int r = params.smooth_radius;
        if (r <= 0) {
            r = (std::min(gray.width, gray.height) + 49) / 50;  // ceil(min/50)
        }
        std::vector<float> blurred(map.data.size());
        box_blur(map.data.data(), blurred.data(), map.width, map.height, r);
        map.data = std::move(blurred);
    }
    if (params.center_weight) {
        const double cx = (map.width - 1) / 2.0;
        const double cy = (map.height - 1) / 2.0;
        const double sigma = params.center_sigma_frac * std::min(map.width, map.height);
        const double inv2s2 = 1.0 / (2.0 * sigma * sigma);
        for (int y = 0; y < map.height; ++y) {
            for (int x = 0; x < map.width; ++x) {
                double d2 = (x - cx) * (x - cx) + (y - cy) * (y - cy);
                map.data[static_cast<std::size_t>(y) * map.width + x] *=
                    static_cast<float>(std::exp(-d2 * inv2s2));
            }
        }
        renormalize_to_unit(map);
    }
    return map;
}

std::vector<float> mbd_exact_raw(const RasterImage& gray) {
    require_gray(gray);
    if (gray.width > 64 || gray.height > 64) {
        throw std::invalid_argument("mbd_exact supports images up to 64x64");
    }
    const int w = gray.width;
    const int h = gray.height;
    const std::size_t n = gray.pixel_count();
    const std::uint8_t* img = gray.data.data();

    auto is_border = [&](std::size_t p) {
        int x = static_cast<int>(p % w);
        int y = static_cast<int>(p / w);
        return x == 0 || y == 0 || x == w - 1 || y == h - 1;
    };

    // candidate path minima: the intensities present in the image
    std::vector<std::uint8_t> levels(gray.data.begin(), gray.data.end());
    std::sort(levels.begin(), levels.end());
    levels.erase(std::unique(levels.begin(), levels.end()), levels.end());

    std::vector<float> best(n, kInf);
    std::vector<int> minimax(n);
    using Entry = std::pair<int, std::size_t>;  // (path max, pixel)
    for (std::uint8_t m : levels) {
        std::fill(minimax.begin(), minimax.end(), std::numeric_limits<int>::max());
        std::priority_queue<Entry, std::vector<Entry>, std::greater<>> heap;
        for (std::size_t p = 0; p < n; ++p) {
            if (is_border(p) && img[p] >= m) {
                minimax[p] = img[p];
                heap.emplace(minimax[p], p);
            }
        }
        while (!heap.empty()) {
            auto [d, p] = heap.top();
            heap.pop();
            if (d > minimax[p]) continue;
            int x = static_cast<int>(p % w);
            int y = static_cast<int>(p / w);
            const int dx[4] = {1, -1, 0, 0};
            const int dy[4] = {0, 0, 1, -1};
            for (int k = 0; k < 4; ++k) {
                int qx = x + dx[k];
                int qy = y + dy[k];
                if (qx < 0 || qy < 0 || qx >= w || qy >= h) continue;
                std::size_t q = static_cast<std::size_t>(qy) * w + qx;
                if (img[q] < m) continue;
                int nd = std::max(d, static_cast<int>(img[q]));
                if (nd < minimax[q]) {
                    minimax[q] = nd;
                    heap.emplace(nd, q);
                }
            }
        }
        for (std::size_t p = 0; p < n; ++p) {
            if (minimax[p] != std::numeric_limits<int>::max()) {
                best[p] = std::min(best[p], static_cast<float>(minimax[p] - m));
            }
        }
    }
    return best;
}

SalienceMap mbd_exact(const RasterImage& gray) {
    return rescale_to_unit(mbd_exact_raw(gray), gray.width, gray.height);
}

SalienceMap depth_salience(const DepthMap& depth) {
    depth.validate();
    float lo = depth.data[0];
    float hi = depth.data[0];
    for (float v : depth.data) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    SalienceMap map;
    map.width = depth.width;
    map.height = depth.height;
    map.data.resize(depth.data.size());
    if (hi == lo) {
        std::fill(map.data.begin(), map.data.end(), 0.5f);
    } else {
        float range = hi - lo;
        for (std::size_t i = 0; i < depth.data.size(); ++i) {
            map.data[i] = (hi - depth.data[i]) / range;
        }
    }
    return map;
}

SalienceMap centeredness_map(int width, int height) {
    if (width < 1 || height < 1) {
        throw std::invalid_argument("centeredness_map dimensions must be positive");
    }
    const double cx = (width - 1) / 2.0;
    const double cy = (height - 1) / 2.0;
    const double d_max = std::hypot(cx, cy);
    SalienceMap map;
    map.width = width;
    map.height = height;
    map.data.resize(static_cast<std::size_t>(width) * height);
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
            double d = std::hypot(x - cx, y - cy);
            map.data[static_cast<std::size_t>(y) * width + x] =
                d_max == 0.0 ? 1.0f : static_cast<float>(1.0 - d / d_max);
        }
    }
    return map;
}

RasterImage to_image(const SalienceMap& map) {
    map.validate();
    RasterImage img = RasterImage::make(map.width, map.height, 1);
    for (std::size_t i = 0; i < map.data.size(); ++i) {
        img.data[i] =
            static_cast<std::uint8_t>(std::lround(255.0 * map.data[i]));
    }
    return img;
}

}  // namespace prominence
