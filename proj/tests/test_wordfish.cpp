#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "prominence/rng.hpp"
#include "prominence/wordfish.hpp"
#include "support/fixtures.hpp"

using namespace prominence;

namespace {

DocumentTermMatrix make_dtm(const std::vector<std::vector<double>>& counts) {
    DocumentTermMatrix dtm;
    dtm.term_count = counts.empty() ? 0 : counts.front().size();
    char id[16];
    for (std::size_t i = 0; i < counts.size(); ++i) {
        std::snprintf(id, sizeof(id), "d%03zu", i);
        DocumentRow row;
        row.id = id;
        row.terms = counts[i];
        dtm.rows.push_back(std::move(row));
    }
    return dtm;
}

// Likelihood gradient straight from the model definition, independent of the
// fitting code. Stationarity of the fit is checked against this.
struct Gradient {
    std::vector<double> d_alpha, d_omega, d_psi, d_beta;
    double max_abs() const {
        double m = 0.0;
        for (const auto* v : {&d_alpha, &d_omega, &d_psi, &d_beta}) {
            for (double g : *v) m = std::max(m, std::abs(g));
        }
        return m;
    }
};

Gradient likelihood_gradient(const DocumentTermMatrix& dtm, const WordfishFit& fit) {
    const std::size_t n = dtm.rows.size();
    const std::size_t k = dtm.term_count;
    Gradient g;
    g.d_alpha.assign(n, 0.0);
    g.d_omega.assign(n, 0.0);
    g.d_psi.assign(k, 0.0);
    g.d_beta.assign(k, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < k; ++j) {
            double mu = std::exp(fit.alpha[i] + fit.psi[j] + fit.beta[j] * fit.omega[i]);
            double resid = dtm.rows[i].terms[j] - mu;
            g.d_alpha[i] += resid;
            g.d_omega[i] += fit.beta[j] * resid;
            g.d_psi[j] += resid;
            g.d_beta[j] += fit.omega[i] * resid;
        }
    }
    return g;
}

double pearson(const std::vector<double>& a, const std::vector<double>& b) {
    REQUIRE(a.size() == b.size());
    double ma = 0.0, mb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        ma += a[i];
        mb += b[i];
    }
    ma /= static_cast<double>(a.size());
    mb /= static_cast<double>(b.size());
    double sab = 0.0, saa = 0.0, sbb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        sab += (a[i] - ma) * (b[i] - mb);
        saa += (a[i] - ma) * (a[i] - ma);
        sbb += (b[i] - mb) * (b[i] - mb);
    }
    return sab / std::sqrt(saa * sbb);
}

void check_identification(const WordfishFit& fit, double tol = 1e-8) {
    CHECK(fit.alpha[0] == 0.0);
    double mean = 0.0;
    for (double w : fit.omega) mean += w;
    mean /= static_cast<double>(fit.omega.size());
    CHECK(std::abs(mean) <= tol);
    double ssq = 0.0;
    for (double w : fit.omega) ssq += (w - mean) * (w - mean);
    double sd = std::sqrt(ssq / static_cast<double>(fit.omega.size()));
    CHECK(std::abs(sd - 1.0) <= tol);
}

void check_trace(const WordfishFit& fit) {
    REQUIRE(fit.ll_trace.size() == static_cast<std::size_t>(fit.iterations) + 1);
    for (std::size_t t = 1; t < fit.ll_trace.size(); ++t) {
        CHECK(fit.ll_trace[t] >= fit.ll_trace[t - 1]);
    }
}

// Draws counts from the model itself so the fit has a known target. Positions
// are an evenly spaced, standardized gradient over the documents.
struct Simulated {
    DocumentTermMatrix dtm;
    std::vector<double> omega_star;
};

Simulated simulate(std::size_t n, std::size_t k, std::uint64_t seed) {
    Simulated sim;
    sim.omega_star.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        sim.omega_star[i] = static_cast<double>(i) - static_cast<double>(n - 1) / 2.0;
    }
    double ssq = 0.0;
    for (double w : sim.omega_star) ssq += w * w;
    double sd = std::sqrt(ssq / static_cast<double>(n));
    for (double& w : sim.omega_star) w /= sd;

    Rng rng(seed);
    std::vector<double> psi(k), beta(k);
    for (std::size_t j = 0; j < k; ++j) {
        psi[j] = 0.5 + uniform01(rng);
        beta[j] = 0.5 * normal01(rng);
    }
    std::vector<std::vector<double>> counts(n, std::vector<double>(k));
    for (std::size_t i = 0; i < n; ++i) {
        double alpha = 0.2 * (uniform01(rng) - 0.5);
        for (std::size_t j = 0; j < k; ++j) {
            double mu = std::exp(alpha + psi[j] + beta[j] * sim.omega_star[i]);
            counts[i][j] = static_cast<double>(poisson(rng, mu));
        }
    }
    sim.dtm = make_dtm(counts);
    return sim;
}

// Two documents at opposite block corners, far apart on the latent scale.
DocumentTermMatrix two_block_dtm() {
    std::vector<std::vector<double>> counts;
    for (int i = 0; i < 6; ++i) {
        std::vector<double> row(12, 2.0);
        for (int j = 0; j < 6; ++j) {
            row[i < 3 ? j : j + 6] = 40.0;
        }
        counts.push_back(row);
    }
    return make_dtm(counts);
}

}  // namespace

TEST_CASE("two symmetric documents land at -1 and +1") {
    // With two documents, mean-zero unit-variance positions can only be -1
    // and +1; the orientation pair decides which document gets which sign.
    // The model then has as many free parameters as cells, so the optimum
    // reproduces the counts exactly and solving the four log-mean equations
    // by hand gives alpha_2 = 0 and psi = |beta| = log(10)/2 everywhere.
    DocumentTermMatrix dtm = make_dtm({{10.0, 1.0}, {1.0, 10.0}});
    WordfishFit fit = fit_wordfish(dtm);
    REQUIRE(fit.converged);
    CHECK(fit.omega[0] == doctest::Approx(-1.0).epsilon(1e-9));
    CHECK(fit.omega[1] == doctest::Approx(1.0).epsilon(1e-9));
    check_identification(fit);
    check_trace(fit);

    const double half_log10 = 0.5 * std::log(10.0);
    CHECK(std::abs(fit.alpha[1]) < 1e-6);
    CHECK(fit.psi[0] == doctest::Approx(half_log10).epsilon(1e-6));
    CHECK(fit.psi[1] == doctest::Approx(half_log10).epsilon(1e-6));
    CHECK(fit.beta[0] == doctest::Approx(-half_log10).epsilon(1e-6));
    CHECK(fit.beta[1] == doctest::Approx(half_log10).epsilon(1e-6));
    for (std::size_t i = 0; i < 2; ++i) {
        for (std::size_t j = 0; j < 2; ++j) {
            double mu = std::exp(fit.alpha[i] + fit.psi[j] + fit.beta[j] * fit.omega[i]);
            CHECK(mu == doctest::Approx(dtm.rows[i].terms[j]).epsilon(1e-6));
        }
    }
}

TEST_CASE("likelihood gradient vanishes at the fitted optimum") {
    DocumentTermMatrix dtm = make_dtm({
        {12.0, 3.0, 7.0, 1.0, 5.0, 9.0, 2.0, 6.0},
        {2.0, 8.0, 4.0, 6.0, 1.0, 3.0, 11.0, 5.0},
        {7.0, 2.0, 9.0, 3.0, 8.0, 1.0, 4.0, 10.0},
        {1.0, 9.0, 2.0, 12.0, 3.0, 6.0, 8.0, 2.0},
        {5.0, 4.0, 6.0, 2.0, 10.0, 7.0, 3.0, 8.0},
    });
    WordfishOptions opts;
    opts.tol = 1e-13;
    opts.max_iters = 5000;
    WordfishFit fit = fit_wordfish(dtm, opts);
    REQUIRE(fit.converged);
    Gradient g = likelihood_gradient(dtm, fit);
    // the stopping rule bounds the likelihood change, not the gradient; with
    // counts summing to ~230 per equation this is a relative residual ~2e-8
    CHECK(g.max_abs() <= 5e-6);
    check_identification(fit);
    check_trace(fit);
}

TEST_CASE("positions recover a planted document gradient") {
    Simulated sim = simulate(10, 200, 42);
    WordfishOptions opts;
    opts.orient_first = 0;  // true positions increase with the document index
    opts.orient_second = 9;
    WordfishFit fit = fit_wordfish(sim.dtm, opts);
    REQUIRE(fit.converged);
    CHECK(pearson(fit.omega, sim.omega_star) >= 0.99);
    check_identification(fit);
    check_trace(fit);
}

TEST_CASE("term order does not move document positions") {
    Simulated sim = simulate(8, 30, 7);
    WordfishOptions opts;
    opts.tol = 1e-10;
    opts.orient_second = 7;
    WordfishFit base = fit_wordfish(sim.dtm, opts);
    REQUIRE(base.converged);

    // reverse the term columns; document parameters must be unaffected
    DocumentTermMatrix flipped = sim.dtm;
    for (DocumentRow& row : flipped.rows) {
        std::reverse(row.terms.begin(), row.terms.end());
    }
    WordfishFit fit = fit_wordfish(flipped, opts);
    REQUIRE(fit.converged);
    for (std::size_t i = 0; i < base.omega.size(); ++i) {
        CHECK(fit.omega[i] == doctest::Approx(base.omega[i]).epsilon(1e-6));
        CHECK(fit.alpha[i] == doctest::Approx(base.alpha[i]).epsilon(1e-6));
    }
    for (std::size_t j = 0; j < base.psi.size(); ++j) {
        std::size_t r = base.psi.size() - 1 - j;
        CHECK(fit.psi[j] == doctest::Approx(base.psi[r]).epsilon(1e-6));
        CHECK(fit.beta[j] == doctest::Approx(base.beta[r]).epsilon(1e-6));
    }
}

TEST_CASE("scaling every count moves term intercepts by log c only") {
    // exp(eta + log c) = c * exp(eta), so multiplying the matrix by c is a
    // pure reparameterization: psi shifts by log c, everything else stays.
    // This only pins the term parameters because the fit re-gauges beta to
    // mean zero; otherwise they float by a constant against alpha.
    Simulated sim = simulate(6, 25, 11);
    WordfishOptions opts;
    opts.tol = 1e-13;  // push both runs close enough to the optimum to compare
    WordfishFit base = fit_wordfish(sim.dtm, opts);
    REQUIRE(base.converged);

    const double c = 2.5;
    DocumentTermMatrix scaled = sim.dtm;
    for (DocumentRow& row : scaled.rows) {
        for (double& v : row.terms) v *= c;
    }
    WordfishFit fit = fit_wordfish(scaled, opts);
    REQUIRE(fit.converged);
    // positions agree to 1e-6 absolute; the intercepts sit closer to the
    // convergence floor of the likelihood-change stopping rule, so 1e-5
    for (std::size_t i = 0; i < base.omega.size(); ++i) {
        CHECK(std::abs(fit.omega[i] - base.omega[i]) <= 1e-6);
        CHECK(std::abs(fit.alpha[i] - base.alpha[i]) <= 1e-5);
    }
    for (std::size_t j = 0; j < base.psi.size(); ++j) {
        CHECK(std::abs(fit.psi[j] - base.psi[j] - std::log(c)) <= 1e-5);
        CHECK(std::abs(fit.beta[j] - base.beta[j]) <= 1e-5);
    }
}

TEST_CASE("reversing the orientation pair negates the fit exactly") {
    Simulated sim = simulate(6, 20, 3);
    WordfishOptions fwd;
    fwd.orient_first = 0;
    fwd.orient_second = 5;
    WordfishOptions rev = fwd;
    std::swap(rev.orient_first, rev.orient_second);

    WordfishFit a = fit_wordfish(sim.dtm, fwd);
    WordfishFit b = fit_wordfish(sim.dtm, rev);
    REQUIRE(a.converged);
    REQUIRE(b.converged);
    // identical deterministic optimization; only the final sign differs
    for (std::size_t i = 0; i < a.omega.size(); ++i) {
        CHECK(b.omega[i] == -a.omega[i]);
        CHECK(b.alpha[i] == a.alpha[i]);
    }
    for (std::size_t j = 0; j < a.psi.size(); ++j) {
        CHECK(b.psi[j] == a.psi[j]);
        CHECK(b.beta[j] == -a.beta[j]);
    }
}

TEST_CASE("degenerate matrices are rejected") {
    SUBCASE("all-zero term column") {
        DocumentTermMatrix dtm = make_dtm({{1.0, 0.0, 2.0}, {3.0, 0.0, 1.0}});
        CHECK_THROWS_WITH_AS(fit_wordfish(dtm), doctest::Contains("all zero"),
                             std::invalid_argument);
    }
    SUBCASE("too few documents") {
        DocumentTermMatrix dtm = make_dtm({{1.0, 2.0}});
        CHECK_THROWS_AS(fit_wordfish(dtm), std::invalid_argument);
    }
    SUBCASE("too few terms") {
        DocumentTermMatrix dtm = make_dtm({{1.0}, {2.0}});
        CHECK_THROWS_AS(fit_wordfish(dtm), std::invalid_argument);
    }
    SUBCASE("orientation pair out of range") {
        DocumentTermMatrix dtm = make_dtm({{1.0, 2.0}, {2.0, 1.0}});
        WordfishOptions opts;
        opts.orient_second = 2;
        CHECK_THROWS_WITH_AS(fit_wordfish(dtm, opts),
                             doctest::Contains("orientation"), std::invalid_argument);
    }
    SUBCASE("orientation pair must be distinct") {
        DocumentTermMatrix dtm = make_dtm({{1.0, 2.0}, {2.0, 1.0}});
        WordfishOptions opts;
        opts.orient_second = 0;
        CHECK_THROWS_AS(fit_wordfish(dtm, opts), std::invalid_argument);
    }
    SUBCASE("ragged rows") {
        DocumentTermMatrix dtm = make_dtm({{1.0, 2.0}, {2.0, 1.0}});
        dtm.rows[1].terms.pop_back();
        CHECK_THROWS_WITH_AS(fit_wordfish(dtm), doctest::Contains("ragged"),
                             std::invalid_argument);
    }
}

TEST_CASE("iteration cap leaves the fit unconverged") {
    Simulated sim = simulate(6, 20, 5);
    WordfishOptions opts;
    opts.max_iters = 1;
    WordfishFit fit = fit_wordfish(sim.dtm, opts);
    CHECK_FALSE(fit.converged);
    CHECK(fit.iterations == 1);
    CHECK(fit.ll_trace.size() == 2);
}

TEST_CASE("bootstrap with zero draws returns empty intervals") {
    DocumentTermMatrix dtm = make_dtm({{10.0, 1.0}, {1.0, 10.0}});
    WordfishFit fit = fit_wordfish(dtm);
    BootstrapResult ci = bootstrap_ci(dtm, fit, {}, 0, 99);
    CHECK(ci.lo.empty());
    CHECK(ci.hi.empty());
    CHECK_THROWS_AS(bootstrap_ci(dtm, fit, {}, -1, 99), std::invalid_argument);
}

TEST_CASE("bootstrap refuses an unconverged fit") {
    Simulated sim = simulate(6, 20, 5);
    WordfishOptions opts;
    opts.max_iters = 1;
    WordfishFit fit = fit_wordfish(sim.dtm, opts);
    REQUIRE_FALSE(fit.converged);
    CHECK_THROWS_AS(bootstrap_ci(sim.dtm, fit, opts, 10, 1), std::invalid_argument);
}

TEST_CASE("bootstrap intervals separate two far-apart blocks") {
    DocumentTermMatrix dtm = two_block_dtm();
    WordfishOptions opts;
    opts.orient_second = 5;
    WordfishFit fit = fit_wordfish(dtm, opts);
    REQUIRE(fit.converged);
    BootstrapResult ci = bootstrap_ci(dtm, fit, opts, 30, 2024);
    REQUIRE(ci.lo.size() == 6);
    for (std::size_t i = 0; i < 6; ++i) {
        CHECK(ci.lo[i] <= ci.hi[i]);
        if (i < 3) {
            CHECK(ci.hi[i] < 0.0);  // left-block documents stay negative
        } else {
            CHECK(ci.lo[i] > 0.0);
        }
    }
}

TEST_CASE("identical documents get overlapping intervals") {
    DocumentTermMatrix dtm = make_dtm({
        {30.0, 4.0, 10.0, 2.0},
        {8.0, 8.0, 8.0, 8.0},
        {8.0, 8.0, 8.0, 8.0},
        {2.0, 12.0, 3.0, 28.0},
    });
    WordfishOptions opts;
    opts.orient_second = 3;
    WordfishFit fit = fit_wordfish(dtm, opts);
    REQUIRE(fit.converged);
    BootstrapResult ci = bootstrap_ci(dtm, fit, opts, 40, 17);
    // documents 1 and 2 are byte-identical, so their intervals must overlap
    CHECK(ci.lo[1] <= ci.hi[2]);
    CHECK(ci.lo[2] <= ci.hi[1]);
}

TEST_CASE("fit export round trips through json") {
    DocumentTermMatrix dtm = make_dtm({{10.0, 1.0}, {1.0, 10.0}});
    WordfishFit fit = fit_wordfish(dtm);
    testsupport::TempDir dir("wordfish_json");
    std::string path = dir.file("fit.json");
    save_wordfish_json(fit, {"left", "right"}, path);

    std::ifstream in(path);
    nlohmann::json j = nlohmann::json::parse(in);
    CHECK(j["format"] == "wordfish/1");
    CHECK(j["documents"] == std::vector<std::string>{"left", "right"});
    CHECK(j["omega"].get<std::vector<double>>() == fit.omega);
    CHECK(j["alpha"].get<std::vector<double>>() == fit.alpha);
    CHECK(j["psi"].get<std::vector<double>>() == fit.psi);
    CHECK(j["beta"].get<std::vector<double>>() == fit.beta);
    CHECK(j["converged"] == true);
    CHECK(j["log_likelihood"].get<double>() == fit.ll_trace.back());
}

TEST_CASE("ideal point table layout") {
    WordfishFit fit;
    fit.omega = {-0.5, 1.25};

    testsupport::TempDir dir("idealpoint_csv");
    SUBCASE("with intervals") {
        BootstrapResult ci;
        ci.lo = {-1.0, 0.25};
        ci.hi = {0.5, 2.0};
        std::string path = dir.file("points.csv");
        write_idealpoint_csv({"a", "b"}, fit, ci, path);
        std::ifstream in(path);
        std::stringstream got;
        got << in.rdbuf();
        CHECK(got.str() == "document,omega,lo,hi\na,-0.5,-1,0.5\nb,1.25,0.25,2\n");
    }
    SUBCASE("interval columns stay empty without bootstrap") {
        std::string path = dir.file("points.csv");
        write_idealpoint_csv({"a", "b"}, fit, {}, path);
        std::ifstream in(path);
        std::stringstream got;
        got << in.rdbuf();
        CHECK(got.str() == "document,omega,lo,hi\na,-0.5,,\nb,1.25,,\n");
    }
    SUBCASE("id count must match") {
        CHECK_THROWS_AS(write_idealpoint_csv({"a"}, fit, {}, dir.file("x.csv")),
                        std::invalid_argument);
    }
}
