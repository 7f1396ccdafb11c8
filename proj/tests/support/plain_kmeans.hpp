#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <utility>
#include <vector>

#include "prominence/rng.hpp"

// Unweighted k-means written from the textbook description, independently of
// the library: k-means++ seeding, Lloyd updates, movement cutoff 1e-6. No
// weight arithmetic anywhere. The library's weighted implementation must
// coincide with this bit for bit when every weight is exactly 1.

namespace testsupport {

struct PlainKMeans {
    std::vector<double> centroids;
    std::vector<int> assignment;
    std::vector<double> objective_trace;
};

inline double plain_dist2(const double* a, const double* b, std::size_t dim) {
    double s = 0.0;
    for (std::size_t d = 0; d < dim; ++d) {
        double diff = a[d] - b[d];
        s += diff * diff;
    }
    return s;
}

inline std::size_t plain_pick(prominence::Rng& rng, const std::vector<double>& mass,
                              double total) {
    double r = prominence::uniform01(rng) * total;
    double cum = 0.0;
    std::size_t fallback = 0;
    for (std::size_t i = 0; i < mass.size(); ++i) {
        cum += mass[i];
        if (mass[i] > 0.0) fallback = i;
        if (r < cum) return i;
    }
    return fallback;
}

inline PlainKMeans plain_kmeans(const std::vector<double>& points, std::size_t dim,
                                std::size_t k, int max_iters, std::uint64_t seed) {
    const std::size_t n = points.size() / dim;
    const double* x = points.data();
    prominence::Rng rng(seed);

    PlainKMeans res;
    res.centroids.resize(k * dim);
    std::vector<double> ones(n, 1.0);
    double total_n = 0.0;
    for (std::size_t i = 0; i < n; ++i) total_n += 1.0;
    std::size_t first = plain_pick(rng, ones, total_n);
    std::copy(x + first * dim, x + (first + 1) * dim, res.centroids.begin());

    std::vector<double> d2(n);
    for (std::size_t i = 0; i < n; ++i) {
        d2[i] = plain_dist2(x + i * dim, res.centroids.data(), dim);
    }
    for (std::size_t c = 1; c < k; ++c) {
        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i) total += d2[i];
        std::size_t pick = plain_pick(rng, d2, total);
        double* centroid = res.centroids.data() + c * dim;
        std::copy(x + pick * dim, x + (pick + 1) * dim, centroid);
        for (std::size_t i = 0; i < n; ++i) {
            d2[i] = std::min(d2[i], plain_dist2(x + i * dim, centroid, dim));
        }
    }

    res.assignment.assign(n, 0);
    std::vector<double> assigned_d2(n, 0.0);
    auto assign_points = [&]() {
        double objective = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double best = std::numeric_limits<double>::infinity();
            std::size_t best_j = 0;
            for (std::size_t j = 0; j < k; ++j) {
                double d = plain_dist2(x + i * dim, res.centroids.data() + j * dim, dim);
                if (d < best) {
                    best = d;
                    best_j = j;
                }
            }
            res.assignment[i] = static_cast<int>(best_j);
            assigned_d2[i] = best;
            objective += best;
        }
        return objective;
    };

    std::vector<double> sums(k * dim);
    std::vector<double> count(k);
    for (int iter = 1; iter <= max_iters; ++iter) {
        res.objective_trace.push_back(assign_points());
        std::fill(sums.begin(), sums.end(), 0.0);
        std::fill(count.begin(), count.end(), 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            double* s = sums.data() + static_cast<std::size_t>(res.assignment[i]) * dim;
            const double* xi = x + i * dim;
            for (std::size_t d = 0; d < dim; ++d) s[d] += xi[d];
            count[static_cast<std::size_t>(res.assignment[i])] += 1.0;
        }
        std::vector<char> reseeded(n, 0);
        double max_move2 = 0.0;
        for (std::size_t j = 0; j < k; ++j) {
            double* centroid = res.centroids.data() + j * dim;
            if (count[j] > 0.0) {
                double move2 = 0.0;
                const double* s = sums.data() + j * dim;
                for (std::size_t d = 0; d < dim; ++d) {
                    double nv = s[d] / count[j];
                    double diff = nv - centroid[d];
                    move2 += diff * diff;
                    centroid[d] = nv;
                }
                max_move2 = std::max(max_move2, move2);
            } else {
                double best_mass = 0.0;
                std::size_t best_i = n;
                for (std::size_t i = 0; i < n; ++i) {
                    if (reseeded[i]) continue;
                    if (assigned_d2[i] > best_mass) {
                        best_mass = assigned_d2[i];
                        best_i = i;
                    }
                }
                if (best_i < n) {
                    double move2 = plain_dist2(x + best_i * dim, centroid, dim);
                    std::copy(x + best_i * dim, x + (best_i + 1) * dim, centroid);
                    reseeded[best_i] = 1;
                    max_move2 = std::max(max_move2, move2);
                }
            }
        }
        if (max_move2 < 1e-12) break;
    }
    assign_points();
    return res;
}

// All bipartitions of n points into two nonempty clusters, scored with the
// weighted k-means objective at the optimal (weighted-mean) centroids.
inline std::pair<double, std::uint32_t> best_bipartition(
    const std::vector<double>& points, const std::vector<double>& weights,
    std::size_t dim) {
    const std::size_t n = weights.size();
    double best_cost = std::numeric_limits<double>::infinity();
    std::uint32_t best_mask = 0;
    for (std::uint32_t mask = 1; mask < (1u << n) - 1; ++mask) {
        double cost = 0.0;
        for (int side = 0; side < 2; ++side) {
            std::vector<double> mean(dim, 0.0);
            double wsum = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                if (((mask >> i) & 1) != static_cast<unsigned>(side)) continue;
                for (std::size_t d = 0; d < dim; ++d) {
                    mean[d] += weights[i] * points[i * dim + d];
                }
                wsum += weights[i];
            }
            if (wsum == 0.0) continue;
            for (double& m : mean) m /= wsum;
            for (std::size_t i = 0; i < n; ++i) {
                if (((mask >> i) & 1) != static_cast<unsigned>(side)) continue;
                cost += weights[i] * plain_dist2(points.data() + i * dim, mean.data(), dim);
            }
        }
        if (cost < best_cost) {
            best_cost = cost;
            best_mask = mask;
        }
    }
    return {best_cost, best_mask};
}

}  // namespace testsupport
