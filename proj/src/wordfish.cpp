#include "prominence/wordfish.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <json.hpp>

#include "prominence/csv.hpp"
#include "prominence/rng.hpp"

namespace prominence {

namespace {

struct Params {
    std::vector<double> alpha;
    std::vector<double> omega;
    std::vector<double> psi;
    std::vector<double> beta;
};

double log_likelihood(const std::vector<double>& y, std::size_t n, std::size_t k,
                      const Params& p) {
    double ll = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < k; ++j) {
            double eta = p.alpha[i] + p.psi[j] + p.beta[j] * p.omega[i];
            ll += y[i * k + j] * eta - std::exp(eta);
        }
    }
    return ll;
}

// One maximizing Newton step on a 2-parameter block with step halving on the
// block's own likelihood contribution. `eta(a, b)` gives the linear predictor
// for element t; `slope(t)` the coefficient of the second parameter.
template <typename EtaFn, typename SlopeFn>
void newton_block(double& par_a, double& par_b, std::size_t count,
                  const double* y_slice, std::size_t y_stride, EtaFn eta,
                  SlopeFn slope) {
    double g0 = 0.0, g1 = 0.0;
    double h00 = 0.0, h01 = 0.0, h11 = 0.0;
    double old_ll = 0.0;
    for (std::size_t t = 0; t < count; ++t) {
        double e = eta(par_a, par_b, t);
        double mu = std::exp(e);
        double yv = y_slice[t * y_stride];
        double s = slope(t);
        double resid = yv - mu;
        g0 += resid;
        g1 += s * resid;
        h00 += mu;
        h01 += s * mu;
        h11 += s * s * mu;
        old_ll += yv * e - mu;
    }
    double det = h00 * h11 - h01 * h01;
    if (!std::isfinite(det) || !std::isfinite(g0) || !std::isfinite(g1) ||
        det <= 1e-300) {
        return;  // singular or overflowed block; keep the current values
    }
    double step_a = (h11 * g0 - h01 * g1) / det;
    double step_b = (-h01 * g0 + h00 * g1) / det;
    double scale = 1.0;
    for (int halving = 0; halving < 40; ++halving) {
        double try_a = par_a + scale * step_a;
        double try_b = par_b + scale * step_b;
        double ll = 0.0;
        for (std::size_t t = 0; t < count; ++t) {
            double e = eta(try_a, try_b, t);
            ll += y_slice[t * y_stride] * e - std::exp(e);
        }
        if (ll >= old_ll) {  // NaN compares false and forces another halving
            par_a = try_a;
            par_b = try_b;
            return;
        }
        scale *= 0.5;
    }
    // no improving step found; leave the block unchanged
}

// Re-gauge to the unique representative of the likelihood-equivalent family:
// omega standardized to mean 0 / population sd 1, beta centered to mean 0,
// alpha anchored at alpha_1 = 0. Every step folds its compensation into the
// other parameters so eta (and the likelihood) is preserved exactly. The beta
// centering is needed because beta_j + t with alpha_i - t*omega_i leaves eta
// untouched, so without it the term parameters drift with the start point.
void identify(Params& p) {
    const std::size_t n = p.alpha.size();
    const std::size_t k = p.psi.size();

    double mean = 0.0;
    for (double w : p.omega) mean += w;
    mean /= static_cast<double>(n);
    double ssq = 0.0;
    for (double w : p.omega) ssq += (w - mean) * (w - mean);
    double sd = std::sqrt(ssq / static_cast<double>(n));
    if (sd > 0.0) {
        for (std::size_t j = 0; j < k; ++j) {
            p.psi[j] += p.beta[j] * mean;
            p.beta[j] *= sd;
        }
        for (double& w : p.omega) w = (w - mean) / sd;
    }

    double bmean = 0.0;
    for (double b : p.beta) bmean += b;
    bmean /= static_cast<double>(k);
    for (double& b : p.beta) b -= bmean;
    for (std::size_t i = 0; i < n; ++i) p.alpha[i] += bmean * p.omega[i];

    double a1 = p.alpha[0];
    for (double& a : p.alpha) a -= a1;
    for (double& ps : p.psi) ps += a1;
}

Params initial_params(const std::vector<double>& y, std::size_t n, std::size_t k,
                      std::uint64_t seed) {
    Params p;
    p.alpha.assign(n, 0.0);
    p.omega.assign(n, 0.0);
    p.psi.assign(k, 0.0);
    p.beta.assign(k, 0.0);

    std::vector<double> row_mean(n, 0.0);
    std::vector<double> col_mean(k, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < k; ++j) {
            row_mean[i] += y[i * k + j];
            col_mean[j] += y[i * k + j];
        }
    }
    for (double& v : row_mean) v /= static_cast<double>(k);
    for (double& v : col_mean) v /= static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) p.alpha[i] = std::log(row_mean[i] / row_mean[0]);
    for (std::size_t j = 0; j < k; ++j) p.psi[j] = std::log(col_mean[j]);

    // document/term directions from the leading singular pair of the
    // double-centered log counts
    Eigen::MatrixXd L(n, k);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < k; ++j) {
            L(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                std::log(y[i * k + j] + 0.1);
        }
    }
    Eigen::VectorXd rmean = L.rowwise().mean();
    Eigen::RowVectorXd cmean = L.colwise().mean();
    double gmean = L.mean();
    L = (L.colwise() - rmean).rowwise() - cmean;
    L.array() += gmean;  // double-centered: rows and columns now average 0
    Eigen::BDCSVD<Eigen::MatrixXd> svd(L, Eigen::ComputeThinU | Eigen::ComputeThinV);

    Rng rng(seed);
    double s0 = svd.singularValues()(0);
    for (std::size_t i = 0; i < n; ++i) {
        p.omega[i] = svd.matrixU()(static_cast<Eigen::Index>(i), 0) +
                     1e-4 * normal01(rng);  // seeded jitter breaks exact ties
    }
    for (std::size_t j = 0; j < k; ++j) {
        p.beta[j] = svd.matrixV()(static_cast<Eigen::Index>(j), 0) * s0 /
                    std::sqrt(static_cast<double>(n));
    }
    identify(p);
    return p;
}

WordfishFit run_wordfish(const std::vector<double>& y, std::size_t n, std::size_t k,
                         const WordfishOptions& opts, Params p) {
    WordfishFit fit;
    fit.ll_trace.push_back(log_likelihood(y, n, k, p));

    for (int iter = 1; iter <= opts.max_iters; ++iter) {
        Params before = p;
        // document blocks: (alpha_i, omega_i) against fixed term parameters
        for (std::size_t i = 0; i < n; ++i) {
            newton_block(
                p.alpha[i], p.omega[i], k, y.data() + i * k, 1,
                [&](double a, double w, std::size_t j) {
                    return a + p.psi[j] + p.beta[j] * w;
                },
                [&](std::size_t j) { return p.beta[j]; });
        }
        // term blocks: (psi_j, beta_j) against fixed document parameters
        for (std::size_t j = 0; j < k; ++j) {
            newton_block(
                p.psi[j], p.beta[j], n, y.data() + j, k,
                [&](double ps, double b, std::size_t i) {
                    return p.alpha[i] + ps + b * p.omega[i];
                },
                [&](std::size_t i) { return p.omega[i]; });
        }
        identify(p);

        double ll = log_likelihood(y, n, k, p);
        double prev = fit.ll_trace.back();
        if (!(ll >= prev)) {
            // numerical wobble at the optimum: restore and stop rather than
            // record a decreasing trace
            p = std::move(before);
            fit.converged = true;
            break;
        }
        fit.ll_trace.push_back(ll);
        fit.iterations = iter;
        if (std::abs(ll - prev) < opts.tol * std::max(std::abs(prev), 1e-10)) {
            fit.converged = true;
            break;
        }
    }

    if (p.omega[opts.orient_first] > p.omega[opts.orient_second]) {
        for (double& w : p.omega) w = -w;
        for (double& b : p.beta) b = -b;
    }
    fit.alpha = std::move(p.alpha);
    fit.omega = std::move(p.omega);
    fit.psi = std::move(p.psi);
    fit.beta = std::move(p.beta);
    return fit;
}

void check_dtm(const DocumentTermMatrix& dtm, const WordfishOptions& opts) {
    const std::size_t n = dtm.rows.size();
    const std::size_t k = dtm.term_count;
    if (n < 2 || k < 2) {
        throw std::invalid_argument("fit_wordfish: need at least 2 documents and 2 terms");
    }
    if (opts.orient_first >= n || opts.orient_second >= n ||
        opts.orient_first == opts.orient_second) {
        throw std::invalid_argument("fit_wordfish: invalid orientation pair");
    }
    for (const DocumentRow& row : dtm.rows) {
        if (row.terms.size() != k) {
            throw std::invalid_argument("fit_wordfish: ragged document-term matrix");
        }
    }
    for (std::size_t j = 0; j < k; ++j) {
        bool any = false;
        for (std::size_t i = 0; i < n; ++i) {
            if (dtm.rows[i].terms[j] != 0.0) {
                any = true;
                break;
            }
        }
        if (!any) {
            throw std::invalid_argument("fit_wordfish: degenerate matrix, term column " +
                                        std::to_string(j) + " is all zero");
        }
    }
}

std::vector<double> flatten(const DocumentTermMatrix& dtm) {
    const std::size_t n = dtm.rows.size();
    const std::size_t k = dtm.term_count;
    std::vector<double> y(n * k);
    for (std::size_t i = 0; i < n; ++i) {
        std::copy(dtm.rows[i].terms.begin(), dtm.rows[i].terms.end(),
                  y.begin() + i * k);
    }
    return y;
}

}  // namespace

WordfishFit fit_wordfish(const DocumentTermMatrix& dtm, const WordfishOptions& opts) {
    check_dtm(dtm, opts);
    const std::size_t n = dtm.rows.size();
    const std::size_t k = dtm.term_count;
    std::vector<double> y = flatten(dtm);
    return run_wordfish(y, n, k, opts, initial_params(y, n, k, opts.seed));
}

BootstrapResult bootstrap_ci(const DocumentTermMatrix& dtm, const WordfishFit& fit,
                             const WordfishOptions& opts, int draws,
                             std::uint64_t seed) {
    if (!fit.converged) {
        throw std::invalid_argument("bootstrap_ci: fit did not converge");
    }
    if (draws < 0) throw std::invalid_argument("bootstrap_ci: negative draw count");
    BootstrapResult out;
    if (draws == 0) return out;

    check_dtm(dtm, opts);
    const std::size_t n = dtm.rows.size();
    const std::size_t k = dtm.term_count;

    std::vector<double> lambda(n * k);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < k; ++j) {
            lambda[i * k + j] =
                std::exp(fit.alpha[i] + fit.psi[j] + fit.beta[j] * fit.omega[i]);
        }
    }

    Params warm{fit.alpha, fit.omega, fit.psi, fit.beta};
    std::vector<std::vector<double>> samples(n);
    std::vector<double> ystar(n * k);
    Rng rng(seed);
    for (int d = 0; d < draws; ++d) {
        // redraw on degenerate resamples (a term can vanish by chance)
        bool usable = false;
        for (int attempt = 0; attempt < 10 && !usable; ++attempt) {
            for (std::size_t t = 0; t < ystar.size(); ++t) {
                ystar[t] = static_cast<double>(poisson(rng, lambda[t]));
            }
            usable = true;
            for (std::size_t j = 0; j < k && usable; ++j) {
                double col = 0.0;
                for (std::size_t i = 0; i < n; ++i) col += ystar[i * k + j];
                if (col == 0.0) usable = false;
            }
            for (std::size_t i = 0; i < n && usable; ++i) {
                double row = 0.0;
                for (std::size_t j = 0; j < k; ++j) row += ystar[i * k + j];
                if (row == 0.0) usable = false;
            }
        }
        if (!usable) continue;
        WordfishFit rep = run_wordfish(ystar, n, k, opts, warm);
        for (std::size_t i = 0; i < n; ++i) samples[i].push_back(rep.omega[i]);
    }

    out.lo.resize(n);
    out.hi.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        auto& s = samples[i];
        if (s.empty()) {
            out.lo[i] = out.hi[i] = fit.omega[i];
            continue;
        }
        std::sort(s.begin(), s.end());
        auto percentile = [&](double pr) {
            double pos = pr * static_cast<double>(s.size() - 1);
            std::size_t base = static_cast<std::size_t>(pos);
            double frac = pos - static_cast<double>(base);
            if (base + 1 >= s.size()) return s.back();
            return s[base] + frac * (s[base + 1] - s[base]);
        };
        out.lo[i] = percentile(0.025);
        out.hi[i] = percentile(0.975);
    }
    return out;
}

void save_wordfish_json(const WordfishFit& fit,
                        const std::vector<std::string>& doc_ids,
                        const std::string& path) {
    nlohmann::json j;
    j["format"] = "wordfish/1";
    j["documents"] = doc_ids;
    j["omega"] = fit.omega;
    j["alpha"] = fit.alpha;
    j["psi"] = fit.psi;
    j["beta"] = fit.beta;
    j["log_likelihood"] = fit.ll_trace.empty() ? 0.0 : fit.ll_trace.back();
    j["ll_trace"] = fit.ll_trace;
    j["converged"] = fit.converged;
    j["iterations"] = fit.iterations;
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << j.dump(2) << "\n";
}

void write_idealpoint_csv(const std::vector<std::string>& doc_ids,
                          const WordfishFit& fit, const BootstrapResult& ci,
                          const std::string& path) {
    if (doc_ids.size() != fit.omega.size()) {
        throw std::invalid_argument("write_idealpoint_csv: id/omega size mismatch");
    }
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << "document,omega,lo,hi\n";
    for (std::size_t i = 0; i < doc_ids.size(); ++i) {
        std::vector<std::string> cells{doc_ids[i], format_double(fit.omega[i]), "", ""};
        if (i < ci.lo.size()) {
            cells[2] = format_double(ci.lo[i]);
            cells[3] = format_double(ci.hi[i]);
        }
        out << join_csv_row(cells) << "\n";
    }
    if (!out) throw std::runtime_error("write failed: " + path);
}

}  // namespace prominence
