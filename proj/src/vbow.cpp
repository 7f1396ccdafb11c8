#include "prominence/vbow.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>

#include <json.hpp>

#include "prominence/csv.hpp"
#include "prominence/rng.hpp"

namespace prominence {

namespace {

double dist2(const double* a, const double* b, std::size_t dim) {
    double s = 0.0;
    for (std::size_t d = 0; d < dim; ++d) {
        double diff = a[d] - b[d];
        s += diff * diff;
    }
    return s;
}

// Cumulative-mass sampling; `total` must be the sum of `mass` in index order
// so the walk is guaranteed to terminate inside the loop.
std::size_t pick_by_mass(Rng& rng, const std::vector<double>& mass, double total) {
    double r = uniform01(rng) * total;
    double cum = 0.0;
    std::size_t fallback = 0;
    for (std::size_t i = 0; i < mass.size(); ++i) {
        cum += mass[i];
        if (mass[i] > 0.0) fallback = i;
        if (r < cum) return i;
    }
    return fallback;
}

}  // namespace

KMeansResult weighted_kmeans(const std::vector<double>& points,
                             const std::vector<double>& weights,
                             std::size_t dim, std::size_t k, int max_iters,
                             std::uint64_t seed) {
    if (dim == 0) throw std::invalid_argument("weighted_kmeans: dim must be positive");
    if (points.size() % dim != 0) {
        throw std::invalid_argument("weighted_kmeans: point buffer not a multiple of dim");
    }
    const std::size_t n = points.size() / dim;
    if (weights.size() != n) {
        throw std::invalid_argument("weighted_kmeans: one weight per point required");
    }
    if (k < 1 || k > n) {
        throw std::invalid_argument("weighted_kmeans: need 1 <= k <= point count");
    }
    if (max_iters < 1) throw std::invalid_argument("weighted_kmeans: max_iters must be >= 1");
    double total_w = 0.0;
    for (double w : weights) {
        if (!(w >= 0.0) || !std::isfinite(w)) {
            throw std::invalid_argument("weighted_kmeans: weights must be finite and >= 0");
        }
        total_w += w;
    }
    if (!(total_w > 0.0)) {
        throw std::invalid_argument("weighted_kmeans: all weights are zero");
    }

    const double* x = points.data();
    Rng rng(seed);

    // k-means++ seeding: first center by weight, the rest by weight times
    // squared distance to the nearest chosen center
    KMeansResult res;
    res.centroids.resize(k * dim);
    std::vector<char> is_center(n, 0);
    std::size_t first = pick_by_mass(rng, weights, total_w);
    std::copy(x + first * dim, x + (first + 1) * dim, res.centroids.begin());
    is_center[first] = 1;

    std::vector<double> d2(n);
    for (std::size_t i = 0; i < n; ++i) {
        d2[i] = dist2(x + i * dim, res.centroids.data(), dim);
    }
    std::vector<double> mass(n);
    for (std::size_t c = 1; c < k; ++c) {
        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            mass[i] = weights[i] * d2[i];
            total += mass[i];
        }
        std::size_t pick;
        if (total > 0.0) {
            pick = pick_by_mass(rng, mass, total);
        } else {
            // every remaining point coincides with a center; take the first
            // index not yet used so the run stays deterministic
            pick = 0;
            while (pick < n && is_center[pick]) ++pick;
            if (pick == n) pick = 0;
        }
        double* centroid = res.centroids.data() + c * dim;
        std::copy(x + pick * dim, x + (pick + 1) * dim, centroid);
        is_center[pick] = 1;
        for (std::size_t i = 0; i < n; ++i) {
            d2[i] = std::min(d2[i], dist2(x + i * dim, centroid, dim));
        }
    }

    res.assignment.assign(n, 0);
    std::vector<double> assigned_d2(n, 0.0);
    std::vector<double> sums(k * dim);
    std::vector<double> wsum(k);

    auto assign_points = [&]() {
        double objective = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double best = std::numeric_limits<double>::infinity();
            std::size_t best_j = 0;
            for (std::size_t j = 0; j < k; ++j) {
                double d = dist2(x + i * dim, res.centroids.data() + j * dim, dim);
                if (d < best) {  // strict: ties keep the lowest index
                    best = d;
                    best_j = j;
                }
            }
            res.assignment[i] = static_cast<int>(best_j);
            assigned_d2[i] = best;
            objective += weights[i] * best;
        }
        return objective;
    };

    for (int iter = 1; iter <= max_iters; ++iter) {
        double objective = assign_points();
        if (!res.objective_trace.empty() &&
            objective > res.objective_trace.back() * (1.0 + 1e-12) + 1e-12) {
            throw std::logic_error("weighted_kmeans: objective increased");
        }
        res.objective_trace.push_back(objective);
        res.iterations = iter;

        std::fill(sums.begin(), sums.end(), 0.0);
        std::fill(wsum.begin(), wsum.end(), 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            double w = weights[i];
            double* s = sums.data() + static_cast<std::size_t>(res.assignment[i]) * dim;
            const double* xi = x + i * dim;
            for (std::size_t d = 0; d < dim; ++d) s[d] += w * xi[d];
            wsum[static_cast<std::size_t>(res.assignment[i])] += w;
        }

        std::vector<char> reseeded(n, 0);
        double max_move2 = 0.0;
        for (std::size_t j = 0; j < k; ++j) {
            double* centroid = res.centroids.data() + j * dim;
            if (wsum[j] > 0.0) {
                double move2 = 0.0;
                const double* s = sums.data() + j * dim;
                for (std::size_t d = 0; d < dim; ++d) {
                    double nv = s[d] / wsum[j];
                    double diff = nv - centroid[d];
                    move2 += diff * diff;
                    centroid[d] = nv;
                }
                max_move2 = std::max(max_move2, move2);
            } else {
                // no mass: reseed from the costliest point still available
                double best_mass = 0.0;
                std::size_t best_i = n;
                for (std::size_t i = 0; i < n; ++i) {
                    if (reseeded[i]) continue;
                    double m = weights[i] * assigned_d2[i];
                    if (m > best_mass) {
                        best_mass = m;
                        best_i = i;
                    }
                }
                if (best_i < n) {
                    double move2 = dist2(x + best_i * dim, centroid, dim);
                    std::copy(x + best_i * dim, x + (best_i + 1) * dim, centroid);
                    reseeded[best_i] = 1;
                    max_move2 = std::max(max_move2, move2);
                }
                // all costs zero: leave the centroid where it was
            }
        }
        if (max_move2 < 1e-12) break;  // every centroid moved < 1e-6
    }
    assign_points();  // leave assignment consistent with the final centroids
    return res;
}

Vocabulary build_vocabulary(const std::vector<WeightedKeypoint>& features,
                            std::size_t k, int max_iters, std::uint64_t seed,
                            bool weighted_clustering, bool weighted_counts) {
    if (k < 2) throw std::invalid_argument("build_vocabulary: k must be >= 2");
    std::vector<double> weights(features.size());
    std::size_t positive = 0;
    bool any_weight = false;
    for (std::size_t i = 0; i < features.size(); ++i) {
        if (features[i].weight > 0.0f) any_weight = true;
        weights[i] = weighted_clustering ? static_cast<double>(features[i].weight) : 1.0;
        if (weights[i] > 0.0) ++positive;
    }
    if (!features.empty() && !any_weight && weighted_clustering) {
        throw std::invalid_argument("build_vocabulary: all feature weights are zero");
    }
    if (positive < k) {
        throw std::invalid_argument(
            "build_vocabulary: fewer positive-weight features (" +
            std::to_string(positive) + ") than clusters (" + std::to_string(k) + ")");
    }

    std::vector<double> points(features.size() * 256);
    for (std::size_t i = 0; i < features.size(); ++i) {
        for (int bit = 0; bit < 256; ++bit) {
            points[i * 256 + bit] = features[i].descriptor.test(bit) ? 1.0 : 0.0;
        }
    }

    KMeansResult res = weighted_kmeans(points, weights, 256, k, max_iters, seed);
    Vocabulary vocab;
    vocab.k = k;
    vocab.centroids = std::move(res.centroids);
    vocab.train_seed = seed;
    vocab.weighted_clustering = weighted_clustering;
    vocab.weighted_counts = weighted_counts;
    return vocab;
}

void save_vocabulary(const Vocabulary& vocab, const std::string& path) {
    nlohmann::json j;
    j["format"] = "vocabulary/1";
    j["k"] = vocab.k;
    j["descriptor_bits"] = 256;
    j["brief_seed"] = vocab.brief_seed;
    j["train_seed"] = vocab.train_seed;
    j["weighted_clustering"] = vocab.weighted_clustering;
    j["weighted_counts"] = vocab.weighted_counts;
    auto rows = nlohmann::json::array();
    for (std::size_t c = 0; c < vocab.k; ++c) {
        rows.push_back(std::vector<double>(vocab.centroids.begin() + c * 256,
                                           vocab.centroids.begin() + (c + 1) * 256));
    }
    j["centroids"] = std::move(rows);
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << j.dump(2) << "\n";
}

Vocabulary load_vocabulary(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open vocabulary file: " + path);
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw std::runtime_error("malformed JSON in " + path + ": " + e.what());
    }
    if (j.value("format", "") != "vocabulary/1" || j.value("descriptor_bits", 0) != 256) {
        throw std::runtime_error("not a vocabulary file: " + path);
    }
    Vocabulary vocab;
    vocab.k = j.at("k").get<std::size_t>();
    vocab.brief_seed = j.at("brief_seed").get<std::uint64_t>();
    vocab.train_seed = j.at("train_seed").get<std::uint64_t>();
    vocab.weighted_clustering = j.at("weighted_clustering").get<bool>();
    vocab.weighted_counts = j.at("weighted_counts").get<bool>();
    for (const auto& row : j.at("centroids")) {
        auto vals = row.get<std::vector<double>>();
        if (vals.size() != 256) {
            throw std::runtime_error("bad centroid length in " + path);
        }
        vocab.centroids.insert(vocab.centroids.end(), vals.begin(), vals.end());
    }
    if (vocab.centroids.size() != vocab.k * 256 || vocab.k < 2) {
        throw std::runtime_error("inconsistent vocabulary in " + path);
    }
    return vocab;
}

std::vector<double> quantize(const std::vector<WeightedKeypoint>& features,
                             const Vocabulary& vocab) {
    if (features.empty()) {
        throw EmptyDocumentError("quantize: document has no keypoints");
    }
    if (vocab.centroids.size() != vocab.k * 256) {
        throw std::invalid_argument("quantize: malformed vocabulary");
    }
    std::vector<double> terms(vocab.k, 0.0);
    double point[256];
    for (const WeightedKeypoint& f : features) {
        for (int bit = 0; bit < 256; ++bit) {
            point[bit] = f.descriptor.test(bit) ? 1.0 : 0.0;
        }
        double best = std::numeric_limits<double>::infinity();
        std::size_t best_j = 0;
        for (std::size_t j = 0; j < vocab.k; ++j) {
            double d = dist2(point, vocab.centroids.data() + j * 256, 256);
            if (d < best) {
                best = d;
                best_j = j;
            }
        }
        terms[best_j] += vocab.weighted_counts ? static_cast<double>(f.weight) : 1.0;
    }
    return terms;
}

DocumentTermMatrix build_dtm(std::vector<DocumentRow> rows) {
    if (rows.empty()) throw std::invalid_argument("build_dtm: no documents");
    const std::size_t k = rows.front().terms.size();
    if (k == 0) throw std::invalid_argument("build_dtm: zero-width term vectors");
    std::set<std::string> seen;
    for (const DocumentRow& row : rows) {
        if (row.terms.size() != k) {
            throw std::invalid_argument("build_dtm: ragged term vectors ('" + row.id + "')");
        }
        for (double v : row.terms) {
            if (!std::isfinite(v) || v < 0.0) {
                throw std::invalid_argument(
                    "build_dtm: negative or non-finite entry in '" + row.id + "'");
            }
        }
        if (!seen.insert(row.id).second) {
            throw std::invalid_argument("build_dtm: duplicate document id '" + row.id + "'");
        }
    }
    std::sort(rows.begin(), rows.end(),
              [](const DocumentRow& a, const DocumentRow& b) { return a.id < b.id; });
    DocumentTermMatrix dtm;
    dtm.term_count = k;
    for (DocumentRow& row : rows) {
        bool all_zero = std::all_of(row.terms.begin(), row.terms.end(),
                                    [](double v) { return v == 0.0; });
        if (all_zero) {
            dtm.dropped.push_back(row.id);
        } else {
            dtm.rows.push_back(std::move(row));
        }
    }
    return dtm;
}

DocumentTermMatrix aggregate_documents(const std::vector<DocumentRow>& rows,
                                       const std::string& group_by) {
    if (rows.empty()) throw std::invalid_argument("aggregate_documents: no documents");
    std::map<std::string, std::vector<double>> groups;
    const std::size_t k = rows.front().terms.size();
    for (const DocumentRow& row : rows) {
        auto it = row.meta.find(group_by);
        if (it == row.meta.end()) {
            throw std::runtime_error("document '" + row.id +
                                     "' is missing grouping metadata '" + group_by + "'");
        }
        if (row.terms.size() != k) {
            throw std::invalid_argument("aggregate_documents: ragged term vectors");
        }
        auto [slot, fresh] = groups.try_emplace(it->second, k, 0.0);
        if (!fresh && slot->second.size() != k) {
            throw std::invalid_argument("aggregate_documents: ragged term vectors");
        }
        for (std::size_t j = 0; j < k; ++j) slot->second[j] += row.terms[j];
    }
    std::vector<DocumentRow> out;
    for (auto& [key, sums] : groups) {
        DocumentRow row;
        row.id = key;
        row.meta[group_by] = key;
        row.terms = std::move(sums);
        out.push_back(std::move(row));
    }
    return build_dtm(std::move(out));
}

void write_dtm_csv(const DocumentTermMatrix& dtm, const std::string& path) {
    std::set<std::string> meta_keys;
    for (const DocumentRow& row : dtm.rows) {
        for (const auto& [key, value] : row.meta) meta_keys.insert(key);
    }
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    std::vector<std::string> header{"document"};
    header.insert(header.end(), meta_keys.begin(), meta_keys.end());
    for (std::size_t j = 0; j < dtm.term_count; ++j) {
        header.push_back("term_" + std::to_string(j));
    }
    out << join_csv_row(header) << "\n";
    for (const DocumentRow& row : dtm.rows) {
        std::vector<std::string> cells{row.id};
        for (const std::string& key : meta_keys) {
            auto it = row.meta.find(key);
            cells.push_back(it == row.meta.end() ? "" : it->second);
        }
        for (double v : row.terms) cells.push_back(format_double(v));
        out << join_csv_row(cells) << "\n";
    }
    if (!out) throw std::runtime_error("write failed: " + path);
}

DocumentTermMatrix read_dtm_csv(const std::string& path) {
    CsvTable table = read_csv_file(path);
    if (table.header.empty() || table.header.front() != "document") {
        throw std::runtime_error("DTM CSV must start with a 'document' column: " + path);
    }
    std::size_t term_start = table.header.size();
    for (std::size_t i = 1; i < table.header.size(); ++i) {
        if (table.header[i].rfind("term_", 0) == 0) {
            term_start = i;
            break;
        }
    }
    if (term_start == table.header.size()) {
        throw std::runtime_error("DTM CSV has no term_ columns: " + path);
    }
    std::vector<DocumentRow> rows;
    for (const auto& cells : table.rows) {
        if (cells.size() != table.header.size()) {
            throw std::runtime_error("ragged row in DTM CSV: " + path);
        }
        DocumentRow row;
        row.id = cells[0];
        for (std::size_t i = 1; i < term_start; ++i) {
            row.meta[table.header[i]] = cells[i];
        }
        for (std::size_t i = term_start; i < cells.size(); ++i) {
            row.terms.push_back(parse_double(cells[i]));
        }
        rows.push_back(std::move(row));
    }
    return build_dtm(std::move(rows));
}

}  // namespace prominence
