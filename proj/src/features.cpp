#include "prominence/features.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <stdexcept>

#include "prominence/rng.hpp"

namespace prominence {

int Descriptor256::hamming(const Descriptor256& other) const {
    int d = 0;
    for (int i = 0; i < 4; ++i) {
        d += std::popcount(words[i] ^ other.words[i]);
    }
    return d;
}

namespace {

// Bresenham circle of radius 3, starting at the top and running clockwise.
constexpr int kCircleX[16] = {0, 1, 2, 3, 3, 3, 2, 1, 0, -1, -2, -3, -3, -3, -2, -1};
constexpr int kCircleY[16] = {-3, -3, -2, -1, 0, 1, 2, 3, 3, 3, 2, 1, 0, -1, -2, -3};

// Longest circular run of set flags; returns {start, length} with length
// capped at 16. Runs shorter than 1 come back with length 0.
std::pair<int, int> longest_circular_run(const bool flags[16]) {
    int best_len = 0;
    int best_start = 0;
    int run = 0;
    for (int i = 0; i < 32; ++i) {
        if (flags[i & 15]) {
            ++run;
            int len = std::min(run, 16);
            if (len > best_len) {
                best_len = len;
                best_start = i - run + 1;
            }
        } else {
            run = 0;
        }
    }
    return {((best_start % 16) + 16) % 16, best_len};
}

void require_gray_image(const RasterImage& gray) {
    gray.validate();
    if (gray.channels != 1) {
        throw std::invalid_argument("feature detection expects a single-channel image");
    }
}

}  // namespace

std::vector<Keypoint> detect_fast(const RasterImage& gray, int threshold,
                                  std::size_t max_keypoints) {
    require_gray_image(gray);
    if (gray.width < 7 || gray.height < 7) {
        throw std::invalid_argument("detect_fast requires an image of at least 7x7");
    }
    if (threshold < 1) {
        throw std::invalid_argument("detect_fast threshold must be >= 1");
    }
    const int w = gray.width;
    const int h = gray.height;

    std::vector<float> response(gray.pixel_count(), 0.0f);
    for (int y = 3; y < h - 3; ++y) {
        for (int x = 3; x < w - 3; ++x) {
            const int center = gray.at(x, y);
            int diff[16];
            bool brighter[16];
            bool darker[16];
            for (int i = 0; i < 16; ++i) {
                diff[i] = gray.at(x + kCircleX[i], y + kCircleY[i]) - center;
                brighter[i] = diff[i] > threshold;
                darker[i] = diff[i] < -threshold;
            }
            float score = 0.0f;
            // 9 + 9 > 16, so at most one branch can own a qualifying arc
            for (const bool* flags : {brighter, darker}) {
                auto [start, len] = longest_circular_run(flags);
                if (len < 9) continue;
                float sum = 0.0f;
                for (int i = 0; i < len; ++i) {
                    sum += static_cast<float>(std::abs(diff[(start + i) & 15]));
                }
                score = std::max(score, sum);
            }
            response[static_cast<std::size_t>(y) * w + x] = score;
        }
    }

    // 3x3 non-maximum suppression; equal-response ties keep the pixel that
    // comes first in raster order
    std::vector<Keypoint> kept;
    for (int y = 3; y < h - 3; ++y) {
        for (int x = 3; x < w - 3; ++x) {
            float r = response[static_cast<std::size_t>(y) * w + x];
            if (r <= 0.0f) continue;
            bool is_max = true;
            for (int dy = -1; dy <= 1 && is_max; ++dy) {
                for (int dx = -1; dx <= 1; ++dx) {
                    if (dx == 0 && dy == 0) continue;
                    float n = response[static_cast<std::size_t>(y + dy) * w + (x + dx)];
                    if (n > r || (n == r && (dy < 0 || (dy == 0 && dx < 0)))) {
                        is_max = false;
                        break;
                    }
                }
            }
            if (is_max) kept.push_back({x, y, r});
        }
    }

    std::sort(kept.begin(), kept.end(), [](const Keypoint& a, const Keypoint& b) {
        if (a.response != b.response) return a.response > b.response;
        if (a.y != b.y) return a.y < b.y;
        return a.x < b.x;
    });
    if (kept.size() > max_keypoints) kept.resize(max_keypoints);
    return kept;
}

std::vector<Keypoint> dense_grid(int width, int height, int stride, int margin) {
    if (stride < 1) throw std::invalid_argument("dense_grid stride must be >= 1");
    if (margin < 0) throw std::invalid_argument("dense_grid margin must be >= 0");
    std::vector<Keypoint> kps;
    for (int y = margin; y <= height - 1 - margin; y += stride) {
        for (int x = margin; x <= width - 1 - margin; x += stride) {
            kps.push_back({x, y, 0.0f});
        }
    }
    return kps;
}

std::vector<Keypoint> filter_border_margin(const std::vector<Keypoint>& kps,
                                           int width, int height, int margin) {
    std::vector<Keypoint> kept;
    kept.reserve(kps.size());
    for (const Keypoint& kp : kps) {
        if (kp.x >= margin && kp.x <= width - 1 - margin && kp.y >= margin &&
            kp.y <= height - 1 - margin) {
            kept.push_back(kp);
        }
    }
    return kept;
}

BriefPattern BriefPattern::generate(std::uint64_t seed) {
    BriefPattern pattern;
    Rng rng(seed);
    for (auto& v : pattern.offsets) {
        long o = std::lround(normal01(rng) * 6.5);
        v = static_cast<std::int8_t>(std::clamp(o, -15l, 15l));
    }
    return pattern;
}

namespace {

// 5x5 box blur as exact fractions: per-pixel window sum and in-bounds sample
// count. blur(a) < blur(b) becomes sum_a*n_b < sum_b*n_a in integers.
struct BlurField {
    std::vector<std::int32_t> sum;
    std::vector<std::uint8_t> count;
    int width = 0;
    int height = 0;
};

BlurField blur_field(const RasterImage& gray) {
    const int w = gray.width;
    const int h = gray.height;
    BlurField f;
    f.width = w;
    f.height = h;
    f.sum.assign(gray.pixel_count(), 0);
    f.count.assign(gray.pixel_count(), 0);
    for (int y = 0; y < h; ++y) {
        const int y0 = std::max(0, y - 2);
        const int y1 = std::min(h - 1, y + 2);
        for (int x = 0; x < w; ++x) {
            const int x0 = std::max(0, x - 2);
            const int x1 = std::min(w - 1, x + 2);
            std::int32_t s = 0;
            for (int yy = y0; yy <= y1; ++yy) {
                for (int xx = x0; xx <= x1; ++xx) s += gray.at(xx, yy);
            }
            f.sum[static_cast<std::size_t>(y) * w + x] = s;
            f.count[static_cast<std::size_t>(y) * w + x] =
                static_cast<std::uint8_t>((x1 - x0 + 1) * (y1 - y0 + 1));
        }
    }
    return f;
}

}  // namespace

std::vector<Descriptor256> describe_brief(const RasterImage& gray,
                                          const std::vector<Keypoint>& kps,
                                          const BriefPattern& pattern) {
    require_gray_image(gray);
    for (const Keypoint& kp : kps) {
        if (kp.x < kPatchMargin || kp.x > gray.width - 1 - kPatchMargin ||
            kp.y < kPatchMargin || kp.y > gray.height - 1 - kPatchMargin) {
            throw std::invalid_argument(
                "describe_brief: keypoint (" + std::to_string(kp.x) + "," +
                std::to_string(kp.y) + ") too close to border");
        }
    }
    BlurField f = blur_field(gray);
    std::vector<Descriptor256> descs(kps.size());
    for (std::size_t i = 0; i < kps.size(); ++i) {
        const Keypoint& kp = kps[i];
        for (int bit = 0; bit < 256; ++bit) {
            const std::int8_t* o = pattern.offsets.data() + 4 * bit;
            std::size_t a = static_cast<std::size_t>(kp.y + o[1]) * f.width + (kp.x + o[0]);
            std::size_t b = static_cast<std::size_t>(kp.y + o[3]) * f.width + (kp.x + o[2]);
            std::int64_t lhs = static_cast<std::int64_t>(f.sum[a]) * f.count[b];
            std::int64_t rhs = static_cast<std::int64_t>(f.sum[b]) * f.count[a];
            if (lhs < rhs) descs[i].set(bit);
        }
    }
    return descs;
}

std::vector<Descriptor256> describe_brief(const RasterImage& gray,
                                          const std::vector<Keypoint>& kps,
                                          std::uint64_t pattern_seed) {
    return describe_brief(gray, kps, BriefPattern::generate(pattern_seed));
}

std::vector<WeightedKeypoint> attach_salience(
    const std::vector<Keypoint>& kps, const std::vector<Descriptor256>& descs,
    const SalienceMap& map) {
    if (kps.size() != descs.size()) {
        throw std::invalid_argument("attach_salience: keypoint/descriptor count mismatch");
    }
    std::vector<WeightedKeypoint> out;
    out.reserve(kps.size());
    for (std::size_t i = 0; i < kps.size(); ++i) {
        const Keypoint& kp = kps[i];
        if (kp.x < 0 || kp.y < 0 || kp.x >= map.width || kp.y >= map.height) {
            throw std::invalid_argument(
                "attach_salience: keypoint outside the salience map (dimension mismatch)");
        }
        out.push_back({kp, descs[i], map.at(kp.x, kp.y)});
    }
    return out;
}

std::vector<WeightedKeypoint> attach_uniform(
    const std::vector<Keypoint>& kps, const std::vector<Descriptor256>& descs) {
    if (kps.size() != descs.size()) {
        throw std::invalid_argument("attach_uniform: keypoint/descriptor count mismatch");
    }
    std::vector<WeightedKeypoint> out;
    out.reserve(kps.size());
    for (std::size_t i = 0; i < kps.size(); ++i) {
        out.push_back({kps[i], descs[i], 1.0f});
    }
    return out;
}

}  // namespace prominence
