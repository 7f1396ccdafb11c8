#pragma once

#include <cstdlib>
#include <filesystem>
#include <string>

#include "prominence/image.hpp"
#include "prominence/rng.hpp"

namespace testsupport {

// Scratch directory removed when the object goes out of scope.
class TempDir {
  public:
    explicit TempDir(const std::string& tag) {
        auto base = std::filesystem::temp_directory_path();
        for (int i = 0; i < 10000; ++i) {
            auto candidate = base / (tag + "_" + std::to_string(i));
            std::error_code ec;
            if (std::filesystem::create_directory(candidate, ec)) {
                path_ = candidate;
                return;
            }
        }
        throw std::runtime_error("cannot create temp dir for " + tag);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::string file(const std::string& name) const {
        return (path_ / name).string();
    }

  private:
    std::filesystem::path path_;
};

inline prominence::RasterImage random_gray(prominence::Rng& rng, int w, int h,
                                           int lo = 0, int hi = 255) {
    auto img = prominence::RasterImage::make(w, h, 1);
    for (auto& v : img.data) {
        v = static_cast<std::uint8_t>(
            lo + prominence::uniform_index(rng, static_cast<std::size_t>(hi - lo + 1)));
    }
    return img;
}

inline prominence::RasterImage random_rgb(prominence::Rng& rng, int w, int h) {
    auto img = prominence::RasterImage::make(w, h, 3);
    for (auto& v : img.data) {
        v = static_cast<std::uint8_t>(prominence::uniform_index(rng, 256));
    }
    return img;
}

}  // namespace testsupport
