#pragma once

#include <optional>
#include <string>
#include <vector>

namespace prominence {

// Pixel-aligned rectangle, origin at the top-left corner.
struct Box {
    int x = 0;
    int y = 0;
    int w = 0;
    int h = 0;

    long long area() const { return static_cast<long long>(w) * h; }

    // Intersection with [0,width) x [0,height); zero-area result when the box
    // falls fully outside.
    Box clipped(int width, int height) const;
};

// Region covariates ingested from upstream detectors / hand coding.
struct Covariates {
    std::optional<std::string> gender;        // "female" | "male"
    std::optional<std::string> party;         // "dem" | "rep"
    std::optional<std::string> candidate_id;
    std::optional<int> election_year;
    std::optional<bool> candidate_visible;

    // Fills unset fields from `defaults` (region-level values win).
    Covariates merged_over(const Covariates& defaults) const;
};

struct AnnotatedRegion {
    Box box;
    std::string label;
    Covariates covariates;
};

struct AnnotationSet {
    std::string image;                    // relative path from the sidecar
    std::vector<AnnotatedRegion> regions;  // clipped to the image rectangle
    int rejected_count = 0;                // zero-area-after-clipping records
};

// Parses an annotation sidecar (a single {"image", "regions"} object or an
// array of them) and clips every box to the given image bounds. Records whose
// box has zero area after clipping are dropped and counted per set.
std::vector<AnnotationSet> load_annotation_sidecar(const std::string& path,
                                                   int image_width,
                                                   int image_height);

// Convenience for single-image sidecars.
AnnotationSet load_annotations(const std::string& path, int image_width,
                               int image_height);

}  // namespace prominence
