#include "prominence/annotations.hpp"

#include <algorithm>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace prominence {

using nlohmann::json;

Box Box::clipped(int width, int height) const {
    int x0 = std::max(x, 0);
    int y0 = std::max(y, 0);
    int x1 = std::min(x + w, width);
    int y1 = std::min(y + h, height);
    if (x1 <= x0 || y1 <= y0) {
        // degenerate result; keep the origin inside the image anyway
        return Box{std::min(x0, width), std::min(y0, height), 0, 0};
    }
    return Box{x0, y0, x1 - x0, y1 - y0};
}

Covariates Covariates::merged_over(const Covariates& defaults) const {
    Covariates out = *this;
    if (!out.gender) out.gender = defaults.gender;
    if (!out.party) out.party = defaults.party;
    if (!out.candidate_id) out.candidate_id = defaults.candidate_id;
    if (!out.election_year) out.election_year = defaults.election_year;
    if (!out.candidate_visible) out.candidate_visible = defaults.candidate_visible;
    return out;
}

namespace {

Covariates parse_covariates(const json& j, const std::string& context) {
    Covariates cov;
    for (auto it = j.begin(); it != j.end(); ++it) {
        const std::string& key = it.key();
        if (key == "gender") {
            std::string v = it.value().get<std::string>();
            if (v != "female" && v != "male") {
                throw std::runtime_error(context + ": invalid gender value '" + v + "'");
            }
            cov.gender = v;
        } else if (key == "party") {
            std::string v = it.value().get<std::string>();
            if (v != "dem" && v != "rep") {
                throw std::runtime_error(context + ": invalid party value '" + v + "'");
            }
            cov.party = v;
        } else if (key == "candidate_id") {
            cov.candidate_id = it.value().get<std::string>();
        } else if (key == "election_year") {
            cov.election_year = it.value().get<int>();
        } else if (key == "candidate_visible") {
            cov.candidate_visible = it.value().get<bool>();
        } else {
            throw std::runtime_error(context + ": unknown covariate key '" + key + "'");
        }
    }
    return cov;
}

AnnotationSet parse_set(const json& j, int image_width, int image_height) {
    AnnotationSet set;
    set.image = j.value("image", "");
    if (!j.contains("regions") || !j.at("regions").is_array()) {
        throw std::runtime_error("annotation object missing 'regions' array");
    }
    for (const json& r : j.at("regions")) {
        AnnotatedRegion region;
        Box raw{r.at("x").get<int>(), r.at("y").get<int>(), r.at("w").get<int>(),
                r.at("h").get<int>()};
        if (raw.w < 0 || raw.h < 0) {
            throw std::runtime_error("negative box extents in annotations for '" +
                                     set.image + "'");
        }
        region.box = raw.clipped(image_width, image_height);
        region.label = r.value("label", "");
        if (r.contains("covariates")) {
            region.covariates =
                parse_covariates(r.at("covariates"), "annotations for '" + set.image + "'");
        }
        if (region.box.area() == 0) {
            ++set.rejected_count;
        } else {
            set.regions.push_back(std::move(region));
        }
    }
    return set;
}

}  // namespace

std::vector<AnnotationSet> load_annotation_sidecar(const std::string& path,
                                                   int image_width,
                                                   int image_height) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open annotation file: " + path);
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw std::runtime_error("malformed JSON in " + path + ": " + e.what());
    }
    std::vector<AnnotationSet> sets;
    if (doc.is_array()) {
        for (const json& j : doc) sets.push_back(parse_set(j, image_width, image_height));
    } else if (doc.is_object()) {
        sets.push_back(parse_set(doc, image_width, image_height));
    } else {
        throw std::runtime_error("annotation file must hold an object or array: " + path);
    }
    return sets;
}

AnnotationSet load_annotations(const std::string& path, int image_width,
                               int image_height) {
    auto sets = load_annotation_sidecar(path, image_width, image_height);
    if (sets.size() != 1) {
        throw std::runtime_error("expected a single annotation set in " + path);
    }
    return std::move(sets.front());
}

}  // namespace prominence
