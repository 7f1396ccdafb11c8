#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "prominence/features.hpp"

namespace prominence {

struct KMeansResult {
    std::vector<double> centroids;        // k x dim, row-major
    std::vector<int> assignment;          // nearest centroid per point
    std::vector<double> objective_trace;  // sum w*dist2, after each assignment
    int iterations = 0;
};

// Lloyd's algorithm with per-point weights and weighted k-means++ seeding.
// Stops when every centroid moves less than 1e-6 or after max_iters. Empty
// clusters are reseeded from the point with the largest weighted squared
// distance to its centroid. With all weights exactly 1.0 the arithmetic
// reduces bit-for-bit to unweighted k-means under the same seed.
KMeansResult weighted_kmeans(const std::vector<double>& points,
                             const std::vector<double>& weights,
                             std::size_t dim, std::size_t k, int max_iters,
                             std::uint64_t seed);

// Visual vocabulary: k cluster centers over 256-bit descriptors relaxed to
// [0,1] reals, plus everything needed to reproduce / reuse it.
struct Vocabulary {
    std::size_t k = 0;
    std::vector<double> centroids;  // k x 256
    std::uint64_t brief_seed = 0;   // pattern seed the descriptors came from
    std::uint64_t train_seed = 0;
    bool weighted_clustering = true;
    bool weighted_counts = true;
};

// Clusters corpus features into k visual words. `weighted_clustering` false
// ignores the salience weights during clustering (every point counts as 1);
// both flags are recorded in the vocabulary so quantization stays consistent.
Vocabulary build_vocabulary(const std::vector<WeightedKeypoint>& features,
                            std::size_t k, int max_iters, std::uint64_t seed,
                            bool weighted_clustering = true,
                            bool weighted_counts = true);

void save_vocabulary(const Vocabulary& vocab, const std::string& path);
Vocabulary load_vocabulary(const std::string& path);

// A document with no keypoints cannot be quantized; callers catch this and
// retry with a dense-grid fallback.
struct EmptyDocumentError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Term vector of length k: each keypoint votes for its nearest centroid
// (Euclidean, ties to the lowest index) with its weight, or with 1 when the
// vocabulary was built for unweighted counts.
std::vector<double> quantize(const std::vector<WeightedKeypoint>& features,
                             const Vocabulary& vocab);

struct DocumentRow {
    std::string id;
    std::map<std::string, std::string> meta;  // grouping metadata (outlet, ...)
    std::vector<double> terms;
};

struct DocumentTermMatrix {
    std::vector<DocumentRow> rows;     // sorted by document id
    std::size_t term_count = 0;
    std::vector<std::string> dropped;  // all-zero documents removed at build
};

// Validates rows (consistent width, finite non-negative entries, unique ids),
// sorts them by id and drops all-zero rows into `dropped`.
DocumentTermMatrix build_dtm(std::vector<DocumentRow> rows);

// Element-wise sum of term vectors per value of the `group_by` metadata key.
DocumentTermMatrix aggregate_documents(const std::vector<DocumentRow>& rows,
                                       const std::string& group_by);

// CSV layout: document, metadata columns (sorted key union), term_0..term_{k-1}.
void write_dtm_csv(const DocumentTermMatrix& dtm, const std::string& path);
DocumentTermMatrix read_dtm_csv(const std::string& path);

}  // namespace prominence
