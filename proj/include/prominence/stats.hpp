#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "prominence/video.hpp"

namespace prominence {

// Which regression to run over an observation table. Categorical main
// effects expand to treatment dummies; gender and party use their fixed
// vocabularies (references male and dem), so a level absent from the data
// still produces its column and surfaces as an aliasing error instead of
// silently vanishing. Fixed-effect factors expand against observed levels.
struct ModelSpec {
    std::string outcome = "depth_position";  // or "relative_size"
    std::vector<std::string> main_effects = {"gender", "party"};
    bool interaction = true;  // pairwise products of the two main effects
    std::vector<std::string> fixed_effects = {"candidate_id", "election_year",
                                              "candidate_visible"};
    // "frame_id" clusters on video_id#frame_id since frame numbers repeat
    // across videos; any other categorical column clusters on its values
    std::string cluster = "frame_id";
};

struct Coefficient {
    std::string term;
    double estimate = 0.0;
    double se = 0.0;  // cluster-robust
    double z = 0.0;
    double p = 1.0;   // two-sided normal
    bool focal = false;  // main effect or interaction, shown in reports
};

struct RegressionResult {
    std::string outcome;
    std::vector<Coefficient> coefficients;  // intercept, mains, interaction, FE dummies
    std::size_t n_obs = 0;
    std::size_t n_clusters = 0;
    std::size_t dropped_missing = 0;  // listwise deletions (missing outcome)
    // display name -> distinct level count among used rows, sorted by name
    std::vector<std::pair<std::string, std::size_t>> fe_groups;
    double deviance = 0.0;       // residual sum of squares
    double null_deviance = 0.0;  // intercept-only residual sum of squares
    double log_likelihood = 0.0;  // Gaussian, MLE variance
    double pseudo_r2 = 0.0;       // 1 - deviance / null_deviance
};

// Least squares via QR with dummy-expanded factors. Throws on an empty
// table, unknown columns, fewer than 2 clusters, or a rank-deficient design
// (the error names every column involved in the dependency).
RegressionResult fit_fe_ols(const std::vector<FaceObservation>& table,
                            const ModelSpec& spec);

// CR1 sandwich: V = c (X'X)^-1 [sum_g X_g' e_g e_g' X_g] (X'X)^-1 with
// c = G/(G-1) * (N-1)/(N-K). Singleton clusters reduce this to HC1.
Eigen::MatrixXd clustered_vcov(const Eigen::MatrixXd& X,
                               const Eigen::VectorXd& resid,
                               const std::vector<std::string>& clusters);

// ***/**/* at p < 0.001 / 0.01 / 0.05.
std::string stars(double p);

// "0.48*** (0.05)" style single-line rendering, two decimals.
std::string format_coefficient(double estimate, double se, double p);

// "Depth Model" / "Face Size Model" for the two known outcomes.
std::string model_display_name(const std::string& outcome);

// Side-by-side text table: focal coefficients with stars and SEs in
// parentheses, then observation counts, per-factor group counts, deviance,
// log-likelihood and pseudo-R-squared.
std::string format_report(const std::vector<RegressionResult>& models);

// Plot-ready long form `model,term,estimate,se` over focal coefficients.
void write_coefficient_csv(const std::vector<RegressionResult>& models,
                           const std::string& path);

}  // namespace prominence
