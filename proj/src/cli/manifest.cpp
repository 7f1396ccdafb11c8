#include "cli/manifest.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <utility>

#include <json.hpp>

#include "cli/sha256.hpp"

namespace prominence::cli {

namespace fs = std::filesystem;

Manifest::Manifest(std::string out_dir, std::string command)
    : out_dir_(std::move(out_dir)), command_(std::move(command)) {}

void Manifest::add(const std::string& path) {
    fs::path rel = fs::relative(path, out_dir_);
    files_.push_back(rel.generic_string());
}

void Manifest::write() const {
    std::vector<std::string> sorted = files_;
    std::sort(sorted.begin(), sorted.end());

    nlohmann::json entries = nlohmann::json::array();
    for (const std::string& rel : sorted) {
        entries.push_back({{"path", rel},
                           {"sha256", sha256_file((fs::path(out_dir_) / rel).string())},
                           {"command", command_}});
    }
    nlohmann::json doc = {{"version", "manifest/1"}, {"files", entries}};

    const std::string path = (fs::path(out_dir_) / "manifest.json").string();
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << doc.dump(2) << "\n";
    if (!out) throw std::runtime_error("write failed: " + path);
}

}  // namespace prominence::cli
