#include "prominence/stats.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <stdexcept>

#include "prominence/csv.hpp"

namespace prominence {

namespace {

std::string categorical_value(const FaceObservation& r, const std::string& col) {
    if (col == "gender") return r.gender;
    if (col == "party") return r.party;
    if (col == "candidate_id") return r.candidate_id;
    if (col == "election_year") return std::to_string(r.election_year);
    if (col == "candidate_visible") return r.candidate_visible ? "1" : "0";
    if (col == "video_id") return r.video_id;
    // frame numbers restart per video, so the usable key is the pair
    if (col == "frame_id") return r.video_id + "#" + std::to_string(r.frame_id);
    throw std::invalid_argument("fit_fe_ols: unknown column '" + col + "'");
}

double outcome_value(const FaceObservation& r, const std::string& col) {
    if (col == "depth_position") return r.depth_position;
    if (col == "relative_size") return r.relative_size;
    throw std::invalid_argument("fit_fe_ols: unknown outcome '" + col + "'");
}

std::string display_level(const std::string& col, const std::string& level) {
    if (col == "gender" && level == "female") return "Gender: Female";
    if (col == "gender" && level == "male") return "Gender: Male";
    if (col == "party" && level == "rep") return "Party: Republican";
    if (col == "party" && level == "dem") return "Party: Democrat";
    return col + ": " + level;
}

std::string display_factor(const std::string& col) {
    if (col == "candidate_id") return "Candidate ID";
    if (col == "candidate_visible") return "Candidate Visible";
    if (col == "election_year") return "Election Year";
    return col;
}

// Non-reference levels of a main effect. gender and party have fixed
// vocabularies (references male and dem), so an absent level still yields
// its dummy; other columns use observed levels, first sorted = reference.
std::vector<std::string> main_effect_levels(
    const std::vector<const FaceObservation*>& rows, const std::string& col) {
    if (col == "gender") return {"female"};
    if (col == "party") return {"rep"};
    std::set<std::string> seen;
    for (const FaceObservation* r : rows) seen.insert(categorical_value(*r, col));
    std::vector<std::string> levels(seen.begin(), seen.end());
    levels.erase(levels.begin());
    return levels;
}

struct Design {
    Eigen::MatrixXd x;
    std::vector<std::string> names;
    std::vector<char> focal;
};

Design build_design(const std::vector<const FaceObservation*>& rows,
                    const ModelSpec& spec) {
    const std::size_t n = rows.size();
    std::vector<Eigen::VectorXd> cols;
    Design d;

    cols.push_back(Eigen::VectorXd::Ones(static_cast<Eigen::Index>(n)));
    d.names.push_back("(Intercept)");
    d.focal.push_back(0);

    std::vector<std::vector<std::size_t>> effect_columns;  // for the interaction
    for (const std::string& effect : spec.main_effects) {
        effect_columns.emplace_back();
        for (const std::string& level : main_effect_levels(rows, effect)) {
            Eigen::VectorXd v(static_cast<Eigen::Index>(n));
            for (std::size_t i = 0; i < n; ++i) {
                v(static_cast<Eigen::Index>(i)) =
                    categorical_value(*rows[i], effect) == level ? 1.0 : 0.0;
            }
            effect_columns.back().push_back(cols.size());
            cols.push_back(std::move(v));
            d.names.push_back(display_level(effect, level));
            d.focal.push_back(1);
        }
    }

    if (spec.interaction) {
        for (std::size_t a : effect_columns[0]) {
            for (std::size_t b : effect_columns[1]) {
                cols.push_back(cols[a].cwiseProduct(cols[b]));
                d.names.push_back(d.names[a] + " x " + d.names[b]);
                d.focal.push_back(1);
            }
        }
    }

    for (const std::string& factor : spec.fixed_effects) {
        std::set<std::string> seen;
        for (const FaceObservation* r : rows) seen.insert(categorical_value(*r, factor));
        bool reference = true;  // first sorted level drops out
        for (const std::string& level : seen) {
            if (reference) {
                reference = false;
                continue;
            }
            Eigen::VectorXd v(static_cast<Eigen::Index>(n));
            for (std::size_t i = 0; i < n; ++i) {
                v(static_cast<Eigen::Index>(i)) =
                    categorical_value(*rows[i], factor) == level ? 1.0 : 0.0;
            }
            cols.push_back(std::move(v));
            d.names.push_back(factor + "=" + level);
            d.focal.push_back(0);
        }
    }

    d.x.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(cols.size()));
    for (std::size_t j = 0; j < cols.size(); ++j) {
        d.x.col(static_cast<Eigen::Index>(j)) = cols[j];
    }
    return d;
}

// Incremental Gram-Schmidt rank screen. A column that projects entirely onto
// the ones before it is reported together with the columns it depends on.
void check_rank(const Eigen::MatrixXd& x, const std::vector<std::string>& names) {
    const Eigen::Index k = x.cols();
    Eigen::MatrixXd basis(x.rows(), k);
    std::vector<Eigen::Index> kept;
    std::vector<std::string> problems;
    for (Eigen::Index j = 0; j < k; ++j) {
        Eigen::VectorXd v = x.col(j);
        const double scale = v.norm();
        for (int pass = 0; pass < 2; ++pass) {
            for (std::size_t b = 0; b < kept.size(); ++b) {
                v -= basis.col(static_cast<Eigen::Index>(b)).dot(v) *
                     basis.col(static_cast<Eigen::Index>(b));
            }
        }
        if (scale == 0.0 || v.norm() <= 1e-8 * scale) {
            std::string entry = names[static_cast<std::size_t>(j)];
            if (!kept.empty() && scale > 0.0) {
                Eigen::MatrixXd xk(x.rows(), static_cast<Eigen::Index>(kept.size()));
                for (std::size_t b = 0; b < kept.size(); ++b) {
                    xk.col(static_cast<Eigen::Index>(b)) = x.col(kept[b]);
                }
                Eigen::VectorXd coef = xk.colPivHouseholderQr().solve(x.col(j));
                const double cmax = coef.cwiseAbs().maxCoeff();
                for (std::size_t b = 0; b < kept.size(); ++b) {
                    if (std::abs(coef(static_cast<Eigen::Index>(b))) >
                        1e-6 * std::max(1.0, cmax)) {
                        entry += ", " + names[static_cast<std::size_t>(kept[b])];
                    }
                }
            }
            problems.push_back(std::move(entry));
        } else {
            basis.col(static_cast<Eigen::Index>(kept.size())) = v / v.norm();
            kept.push_back(j);
        }
    }
    if (!problems.empty()) {
        std::string msg = "fit_fe_ols: aliased columns: " + problems[0];
        for (std::size_t i = 1; i < problems.size(); ++i) msg += "; " + problems[i];
        throw std::invalid_argument(msg);
    }
}

std::string fixed2(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

}  // namespace

RegressionResult fit_fe_ols(const std::vector<FaceObservation>& table,
                            const ModelSpec& spec) {
    if (table.empty()) throw std::invalid_argument("fit_fe_ols: empty table");
    if (spec.interaction && spec.main_effects.size() != 2) {
        throw std::invalid_argument(
            "fit_fe_ols: the interaction needs exactly two main effects");
    }
    (void)outcome_value(table.front(), spec.outcome);
    for (const std::string& c : spec.main_effects) (void)categorical_value(table.front(), c);
    for (const std::string& c : spec.fixed_effects) (void)categorical_value(table.front(), c);
    (void)categorical_value(table.front(), spec.cluster);

    std::vector<const FaceObservation*> rows;
    for (const FaceObservation& r : table) {
        if (std::isfinite(outcome_value(r, spec.outcome))) rows.push_back(&r);
    }
    RegressionResult res;
    res.outcome = spec.outcome;
    res.dropped_missing = table.size() - rows.size();
    if (rows.empty()) {
        throw std::invalid_argument("fit_fe_ols: no usable observations for outcome '" +
                                    spec.outcome + "'");
    }
    const std::size_t n = rows.size();

    Design design = build_design(rows, spec);
    check_rank(design.x, design.names);

    Eigen::VectorXd y(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) {
        y(static_cast<Eigen::Index>(i)) = outcome_value(*rows[i], spec.outcome);
    }
    Eigen::VectorXd beta = design.x.colPivHouseholderQr().solve(y);
    Eigen::VectorXd resid = y - design.x * beta;

    res.n_obs = n;
    res.deviance = resid.squaredNorm();
    const double ybar = y.mean();
    res.null_deviance = (y.array() - ybar).matrix().squaredNorm();
    const double sigma2 = res.deviance / static_cast<double>(n);
    res.log_likelihood =
        sigma2 > 0.0
            ? -0.5 * static_cast<double>(n) *
                  (std::log(2.0 * M_PI * sigma2) + 1.0)
            : std::numeric_limits<double>::infinity();
    res.pseudo_r2 =
        res.null_deviance > 0.0 ? 1.0 - res.deviance / res.null_deviance : 1.0;

    std::vector<std::string> clusters;
    clusters.reserve(n);
    for (const FaceObservation* r : rows) {
        clusters.push_back(categorical_value(*r, spec.cluster));
    }
    Eigen::MatrixXd v = clustered_vcov(design.x, resid, clusters);
    res.n_clusters = std::set<std::string>(clusters.begin(), clusters.end()).size();

    res.coefficients.resize(design.names.size());
    for (std::size_t j = 0; j < design.names.size(); ++j) {
        Coefficient& c = res.coefficients[j];
        c.term = design.names[j];
        c.estimate = beta(static_cast<Eigen::Index>(j));
        c.se = std::sqrt(std::max(
            v(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(j)), 0.0));
        c.z = c.estimate / c.se;
        c.p = std::erfc(std::abs(c.z) / std::sqrt(2.0));
        c.focal = design.focal[j] != 0;
    }

    for (const std::string& factor : spec.fixed_effects) {
        std::set<std::string> seen;
        for (const FaceObservation* r : rows) seen.insert(categorical_value(*r, factor));
        res.fe_groups.emplace_back(display_factor(factor), seen.size());
    }
    std::sort(res.fe_groups.begin(), res.fe_groups.end());
    return res;
}

Eigen::MatrixXd clustered_vcov(const Eigen::MatrixXd& x,
                               const Eigen::VectorXd& resid,
                               const std::vector<std::string>& clusters) {
    const Eigen::Index n = x.rows();
    const Eigen::Index k = x.cols();
    if (resid.size() != n || static_cast<Eigen::Index>(clusters.size()) != n) {
        throw std::invalid_argument("clustered_vcov: size mismatch");
    }
    if (n <= k) {
        throw std::invalid_argument(
            "clustered_vcov: need more observations than coefficients");
    }
    std::map<std::string, Eigen::VectorXd> score_sums;
    for (Eigen::Index i = 0; i < n; ++i) {
        auto [it, inserted] =
            score_sums.try_emplace(clusters[static_cast<std::size_t>(i)],
                                   Eigen::VectorXd::Zero(k));
        it->second += resid(i) * x.row(i).transpose();
    }
    if (score_sums.size() < 2) {
        throw std::invalid_argument("clustered_vcov: need at least 2 clusters");
    }
    Eigen::MatrixXd meat = Eigen::MatrixXd::Zero(k, k);
    for (const auto& [id, s] : score_sums) meat += s * s.transpose();

    Eigen::MatrixXd xtx = x.transpose() * x;
    Eigen::MatrixXd bread =
        xtx.colPivHouseholderQr().solve(Eigen::MatrixXd::Identity(k, k));
    const double g = static_cast<double>(score_sums.size());
    const double c = g / (g - 1.0) * (static_cast<double>(n) - 1.0) /
                     (static_cast<double>(n) - static_cast<double>(k));
    Eigen::MatrixXd v = c * bread * meat * bread;
    return 0.5 * (v + v.transpose());  // shave off rounding asymmetry
}

std::string stars(double p) {
    if (p < 0.001) return "***";
    if (p < 0.01) return "**";
    if (p < 0.05) return "*";
    return "";
}

std::string format_coefficient(double estimate, double se, double p) {
    return fixed2(estimate) + stars(p) + " (" + fixed2(se) + ")";
}

std::string model_display_name(const std::string& outcome) {
    if (outcome == "depth_position") return "Depth Model";
    if (outcome == "relative_size") return "Face Size Model";
    return outcome;
}

std::string format_report(const std::vector<RegressionResult>& models) {
    // focal terms in first-appearance order across models
    std::vector<std::string> terms;
    for (const RegressionResult& m : models) {
        for (const Coefficient& c : m.coefficients) {
            if (c.focal && std::find(terms.begin(), terms.end(), c.term) == terms.end()) {
                terms.push_back(c.term);
            }
        }
    }
    std::vector<std::string> factors;
    for (const RegressionResult& m : models) {
        for (const auto& [name, count] : m.fe_groups) {
            if (std::find(factors.begin(), factors.end(), name) == factors.end()) {
                factors.push_back(name);
            }
        }
    }
    std::sort(factors.begin(), factors.end());

    auto find_coef = [](const RegressionResult& m, const std::string& term)
        -> const Coefficient* {
        for (const Coefficient& c : m.coefficients) {
            if (c.focal && c.term == term) return &c;
        }
        return nullptr;
    };

    std::vector<std::pair<std::string, std::vector<std::string>>> lines;
    auto add = [&](std::string label, std::vector<std::string> cells) {
        lines.emplace_back(std::move(label), std::move(cells));
    };

    for (const std::string& term : terms) {
        std::vector<std::string> est, se;
        for (const RegressionResult& m : models) {
            const Coefficient* c = find_coef(m, term);
            est.push_back(c ? fixed2(c->estimate) + stars(c->p) : "");
            se.push_back(c ? "(" + fixed2(c->se) + ")" : "");
        }
        add(term, std::move(est));
        add("", std::move(se));
    }
    {
        std::vector<std::string> cells;
        for (const RegressionResult& m : models) cells.push_back(std::to_string(m.n_obs));
        add("Num. obs.", std::move(cells));
    }
    for (const std::string& factor : factors) {
        std::vector<std::string> cells;
        for (const RegressionResult& m : models) {
            std::string cell;
            for (const auto& [name, count] : m.fe_groups) {
                if (name == factor) cell = std::to_string(count);
            }
            cells.push_back(cell);
        }
        add("Num. groups: " + factor, std::move(cells));
    }
    {
        std::vector<std::string> dev, ll, r2;
        for (const RegressionResult& m : models) {
            dev.push_back(fixed2(m.deviance));
            ll.push_back(fixed2(m.log_likelihood));
            r2.push_back(fixed2(m.pseudo_r2));
        }
        add("Deviance", std::move(dev));
        add("Log Likelihood", std::move(ll));
        add("Pseudo R^2", std::move(r2));
    }

    std::vector<std::string> headers;
    for (const RegressionResult& m : models) headers.push_back(model_display_name(m.outcome));

    std::size_t label_width = 0;
    for (const auto& [label, cells] : lines) label_width = std::max(label_width, label.size());
    std::vector<std::size_t> widths(models.size());
    for (std::size_t j = 0; j < models.size(); ++j) {
        widths[j] = headers[j].size();
        for (const auto& [label, cells] : lines) widths[j] = std::max(widths[j], cells[j].size());
    }

    std::string out;
    auto emit = [&](const std::string& label, const std::vector<std::string>& cells) {
        out += label;
        out.append(label_width - label.size(), ' ');
        for (std::size_t j = 0; j < cells.size(); ++j) {
            out += "  ";
            out.append(widths[j] - cells[j].size(), ' ');
            out += cells[j];
        }
        out += "\n";
    };
    emit("", headers);
    for (const auto& [label, cells] : lines) emit(label, cells);
    out += "*** p < 0.001; ** p < 0.01; * p < 0.05\n";
    return out;
}

void write_coefficient_csv(const std::vector<RegressionResult>& models,
                           const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << "model,term,estimate,se\n";
    for (const RegressionResult& m : models) {
        for (const Coefficient& c : m.coefficients) {
            if (!c.focal) continue;
            out << join_csv_row({model_display_name(m.outcome), c.term,
                                 format_double(c.estimate), format_double(c.se)})
                << "\n";
        }
    }
    if (!out) throw std::runtime_error("write failed: " + path);
}

}  // namespace prominence
