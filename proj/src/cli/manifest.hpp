#pragma once

#include <string>
#include <vector>

namespace prominence::cli {

// Records every file a command emits. The manifest itself carries no
// timestamps or absolute paths, so identical runs serialize identically.
class Manifest {
  public:
    Manifest(std::string out_dir, std::string command);

    // Registers an emitted file; the stored path is relative to out_dir.
    void add(const std::string& path);

    // Writes <out_dir>/manifest.json: sorted entries of path, sha256 and the
    // producing command.
    void write() const;

  private:
    std::string out_dir_;
    std::string command_;
    std::vector<std::string> files_;
};

}  // namespace prominence::cli
