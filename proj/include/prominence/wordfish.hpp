#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "prominence/vbow.hpp"

namespace prominence {

struct WordfishOptions {
    double tol = 1e-8;         // relative log-likelihood change to stop at
    int max_iters = 500;       // outer cycles
    std::uint64_t seed = 0;    // jitter for the SVD initialization
    std::size_t orient_first = 0;   // row indices into the DTM; the fit is
    std::size_t orient_second = 1;  // signed so omega[first] < omega[second]
};

// Poisson ideal-point model: y_ij has mean exp(alpha_i + psi_j + beta_j *
// omega_i). The factorial term is dropped from the objective, which leaves
// the maximizer unchanged and accepts real-valued (weighted) counts.
struct WordfishFit {
    std::vector<double> omega;  // document positions, mean 0 / sd 1
    std::vector<double> alpha;  // document intercepts, alpha[0] == 0
    std::vector<double> psi;    // term intercepts
    std::vector<double> beta;   // term discriminations, centered to mean 0
                                // (the likelihood fixes beta only up to a
                                // constant traded against alpha along omega)
    std::vector<double> ll_trace;  // initial value plus one entry per cycle
    bool converged = false;
    int iterations = 0;
};

// Alternating conditional Newton steps with step halving: per-document
// (alpha_i, omega_i) blocks, then per-term (psi_j, beta_j) blocks, then the
// exact identification transforms. Throws on degenerate input (fewer than 2
// rows or columns, or an all-zero column); hitting max_iters only clears the
// converged flag.
WordfishFit fit_wordfish(const DocumentTermMatrix& dtm,
                         const WordfishOptions& opts = {});

struct BootstrapResult {
    std::vector<double> lo;  // per document, 2.5th percentile
    std::vector<double> hi;  // per document, 97.5th percentile
};

// Parametric bootstrap: resample y* ~ Poisson(lambda-hat), refit with the
// original fit as warm start, orient by the same document pair, and report
// percentile intervals. draws = 0 returns empty vectors.
BootstrapResult bootstrap_ci(const DocumentTermMatrix& dtm,
                             const WordfishFit& fit, const WordfishOptions& opts,
                             int draws, std::uint64_t seed);

// Fit export with per-document ids; diagnostics included.
void save_wordfish_json(const WordfishFit& fit,
                        const std::vector<std::string>& doc_ids,
                        const std::string& path);

// Plot-ready dot-whisker table: document,omega,lo,hi. The interval columns
// stay empty without bootstrap results.
void write_idealpoint_csv(const std::vector<std::string>& doc_ids,
                          const WordfishFit& fit, const BootstrapResult& ci,
                          const std::string& path);

}  // namespace prominence
