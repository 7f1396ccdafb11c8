#pragma once

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "cli/sha256.hpp"
#include "prominence/image.hpp"
#include "prominence/video.hpp"
#include "support/fixtures.hpp"

// End-to-end fixtures shared by the pipeline tests and the acceptance run:
// a tiny two-outlet image corpus and a two-video frame tree, plus helpers to
// invoke the real binary and hash everything it wrote.

namespace testsupport {

inline std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

inline void spit(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << content;
}

// Runs the pipeline binary; stdout/stderr land in <log_dir>/stdout|stderr.txt
// (appended, so one scratch dir can host several invocations).
inline int run_cli(const std::string& cli, const std::string& args,
                   const std::string& log_dir) {
    const std::string cmd = "\"" + cli + "\" " + args + " >>\"" + log_dir +
                            "/stdout.txt\" 2>>\"" + log_dir + "/stderr.txt\"";
    const int status = std::system(cmd.c_str());
    if (status == -1 || !WIFEXITED(status)) {
        throw std::runtime_error("failed to run: " + cmd);
    }
    return WEXITSTATUS(status);
}

inline std::map<std::string, std::string> tree_hashes(const std::string& root) {
    namespace fs = std::filesystem;
    std::map<std::string, std::string> out;
    for (const fs::directory_entry& entry : fs::recursive_directory_iterator(root)) {
        if (!entry.is_regular_file()) continue;
        out[fs::relative(entry.path(), root).generic_string()] =
            prominence::cli::sha256_hex(slurp(entry.path().string()));
    }
    return out;
}

inline void paint_block(prominence::RasterImage& img, int x0, int y0, int w, int h,
                        std::uint8_t value) {
    for (int y = y0; y < y0 + h; ++y) {
        for (int x = x0; x < x0 + w; ++x) img.at(x, y, 0) = value;
    }
}

inline void paint_checker(prominence::RasterImage& img, int x0, int y0, int size,
                          int cell, std::uint8_t a, std::uint8_t b) {
    for (int y = 0; y < size; ++y) {
        for (int x = 0; x < size; ++x) {
            const bool odd = ((x / cell) + (y / cell)) % 2 != 0;
            img.at(x0 + x, y0 + y, 0) = odd ? a : b;
        }
    }
}

// Two synthetic outlets with visually distinct planted content: outlet_a
// images carry checkerboards, outlet_b solid bright squares.
inline std::string make_scale_fixture(const TempDir& dir) {
    using prominence::RasterImage;
    std::filesystem::create_directories(dir.path() / "images");
    const int spots[4][2] = {{12, 12}, {32, 12}, {12, 30}, {30, 30}};
    std::string meta = "image_id,path,outlet,issue\n";
    for (int i = 0; i < 4; ++i) {
        RasterImage img = RasterImage::make(64, 64, 1, 30);
        paint_checker(img, spots[i][0], spots[i][1], 16, 4, 210, 40);
        save_image(img, dir.file("images/a" + std::to_string(i) + ".png"));
        meta += "a" + std::to_string(i) + ",images/a" + std::to_string(i) +
                ".png,outlet_a,climate\n";
    }
    for (int i = 0; i < 4; ++i) {
        RasterImage img = RasterImage::make(64, 64, 1, 30);
        paint_block(img, spots[i][0], spots[i][1], 14, 14, 220);
        paint_block(img, spots[3 - i][0], spots[3 - i][1] + 2, 8, 8, 170);
        save_image(img, dir.file("images/b" + std::to_string(i) + ".png"));
        meta += "b" + std::to_string(i) + ",images/b" + std::to_string(i) +
                ".png,outlet_b,climate\n";
    }
    spit(dir.file("meta.csv"), meta);

    nlohmann::json config = {
        {"metadata_csv", dir.file("meta.csv")},
        {"seed", 7},
        {"salience", {{"method", "mbd"}, {"pass_pairs", 2}}},
        {"features",
         {{"fast_threshold", 15}, {"max_keypoints", 200}, {"brief_seed", 11}}},
        {"vbow", {{"k", 8}, {"max_iters", 30}, {"all_scenarios", true}}},
        {"wordfish",
         {{"tol", 1e-10},
          {"max_iters", 400},
          {"orient", {"outlet_a", "outlet_b"}},
          {"bootstrap_draws", 3}}}};
    spit(dir.file("config.json"), config.dump(2));
    return dir.file("config.json");
}

// Two six-frame videos with cuts after frames 1 and 3, two faces per
// keyframe, a left-near / right-far depth plane, and one keyframe (vid0
// frame 4) deliberately missing its depth map.
inline std::string make_video_fixture(const TempDir& dir, bool all_male) {
    using prominence::RasterImage;
    const char* genders[2][3][2] = {
        {{"female", "male"}, {"male", "female"}, {"female", "male"}},
        {{"male", "female"}, {"female", "male"}, {"male", "female"}}};
    const char* parties[2] = {"dem", "rep"};  // slot 0 left box, slot 1 right

    for (int v = 0; v < 2; ++v) {
        const std::string vd =
            (dir.path() / "videos" / ("vid" + std::to_string(v))).string();
        std::filesystem::create_directories(vd);
        for (int f = 0; f < 6; ++f) {
            const int shade = f < 2 ? 40 : f < 4 ? 120 : 200;
            save_image(RasterImage::make(64, 48, 1, static_cast<std::uint8_t>(shade)),
                       vd + "/" + prominence::frame_file_name(f));
        }
        std::vector<std::uint16_t> depth(64 * 48);
        for (int y = 0; y < 48; ++y) {
            for (int x = 0; x < 64; ++x) {
                depth[static_cast<std::size_t>(y) * 64 + x] = x < 32 ? 1000 : 40000;
            }
        }
        prominence::save_png16(depth, 64, 48, vd + "/depth_000.png");
        prominence::save_png16(depth, 64, 48, vd + "/depth_002.png");
        if (v == 1) prominence::save_png16(depth, 64, 48, vd + "/depth_004.png");

        nlohmann::json covariates = {{"candidate_id", "c" + std::to_string(v)},
                                     {"election_year", 2016},
                                     {"candidate_visible", true}};
        spit(vd + "/video.json", covariates.dump());

        auto face = [&](int x, int w, const char* gender, const char* party) {
            return nlohmann::json{
                {"x", x},
                {"y", 8},
                {"w", w},
                {"h", 16},
                {"label", "face"},
                {"covariates",
                 {{"gender", all_male ? "male" : gender}, {"party", party}}}};
        };
        nlohmann::json sets = nlohmann::json::array();
        for (int k = 0; k < 3; ++k) {
            sets.push_back(
                {{"image", prominence::frame_file_name(2 * k)},
                 {"regions",
                  {face(4, 16, genders[v][k][0], parties[0]),
                   face(40, 20, genders[v][k][1], parties[1])}}});
        }
        spit(vd + "/annotations.json", sets.dump(2));
    }

    nlohmann::json config = {{"frames_root", (dir.path() / "videos").string()},
                             {"video", {{"tau", 30.0}}},
                             {"seed", 5}};
    spit(dir.file("config.json"), config.dump(2));
    return dir.file("config.json");
}

}  // namespace testsupport
