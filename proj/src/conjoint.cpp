#include "pbench/conjoint.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>

#include "pbench/errors.hpp"

namespace pbench {

DesignRow effect_code(const PersonaSpec& persona) {
    DesignRow r;
    r.x1 = persona.attitude == Attitude::Optimistic ? 1.0 : -1.0;
    r.x2 = persona.authority == Authority::Authoritative ? 1.0 : -1.0;
    r.x3 = persona.reasoning == Reasoning::Analytical ? 1.0 : -1.0;
    r.x12 = r.x1 * r.x2;
    r.x13 = r.x1 * r.x3;
    r.x23 = r.x2 * r.x3;
    r.x123 = r.x1 * r.x2 * r.x3;
    return r;
}

std::array<double, kNumTerms> design_vector(const DesignRow& row) {
    return {1.0, row.x1, row.x2, row.x3, row.x12, row.x13, row.x23, row.x123};
}

const char* term_name(std::size_t j) {
    static const char* kNames[kNumTerms] = {
        "intercept",
        "attitude",
        "authority",
        "reasoning",
        "attitude:authority",
        "attitude:reasoning",
        "reasoning:authority",
        "attitude:authority:reasoning",
    };
    if (j >= kNumTerms) throw InvalidArgument("term index out of range");
    return kNames[j];
}

// --- Student's t tail ----------------------------------------------------

namespace {

double beta_cont_frac(double a, double b, double x) {
    constexpr int kMaxIter = 300;
    constexpr double kEps = 3e-16;
    constexpr double kFpMin = 1e-300;
    double qab = a + b, qap = a + 1.0, qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::fabs(d) < kFpMin) d = kFpMin;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= kMaxIter; ++m) {
        int m2 = 2 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kFpMin) d = kFpMin;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kFpMin) c = kFpMin;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kFpMin) d = kFpMin;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kFpMin) c = kFpMin;
        d = 1.0 / d;
        double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < kEps) break;
    }
    return h;
}

/// Regularized incomplete beta I_x(a, b).
double inc_beta(double a, double b, double x) {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    double ln_bt = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) +
                   b * std::log1p(-x);
    double bt = std::exp(ln_bt);
    if (x < (a + 1.0) / (a + b + 2.0)) return bt * beta_cont_frac(a, b, x) / a;
    return 1.0 - bt * beta_cont_frac(b, a, 1.0 - x) / b;
}

}  // namespace

double t_sf(double t, int df) {
    if (df < 1) throw InvalidArgument("degrees of freedom must be >= 1");
    if (t == 0.0) return 0.5;
    if (std::isinf(t)) return t > 0 ? 0.0 : 1.0;
    if (t < 0.0) return 1.0 - t_sf(-t, df);
    double x = df / (df + t * t);
    return 0.5 * inc_beta(0.5 * df, 0.5, x);
}

double two_sided_p(double t, int df) {
    double p = 2.0 * t_sf(std::fabs(t), df);
    return std::min(p, 1.0);
}

// --- Least squares -------------------------------------------------------

OlsResult fit_ols(const std::vector<DesignRow>& rows, const std::vector<double>& y) {
    const std::size_t n = rows.size();
    if (n == 0) throw InvalidArgument("empty design");
    if (y.size() != n) throw InvalidArgument("design and response lengths differ");
    if (n <= kNumTerms)
        throw InsufficientDataError(std::to_string(n) +
                                    " observations leave no residual degrees of freedom "
                                    "(need more than 8)");

    double sum = 0.0, sumsq = 0.0;
    for (double v : y) {
        sum += v;
        sumsq += v * v;
    }
    double mean = sum / static_cast<double>(n);
    double tss = 0.0;
    for (double v : y) tss += (v - mean) * (v - mean);
    if (tss <= 1e-20 * std::max(1.0, sumsq))
        throw DegenerateResponseError("response is constant; nothing to explain");

    // Householder QR on the n x 8 regressor matrix, y carried along.
    std::vector<std::array<double, kNumTerms>> a(n);
    for (std::size_t i = 0; i < n; ++i) a[i] = design_vector(rows[i]);
    std::vector<double> qty(y);
    std::vector<double> v(n);
    for (std::size_t k = 0; k < kNumTerms; ++k) {
        double norm = 0.0;
        for (std::size_t i = k; i < n; ++i) norm += a[i][k] * a[i][k];
        norm = std::sqrt(norm);
        if (norm == 0.0) continue;  // zero column; rank check below reports it
        double alpha = a[k][k] >= 0.0 ? -norm : norm;
        double vtv = 0.0;
        for (std::size_t i = k; i < n; ++i) {
            v[i] = a[i][k];
            if (i == k) v[i] -= alpha;
            vtv += v[i] * v[i];
        }
        if (vtv == 0.0) continue;
        for (std::size_t j = k; j < kNumTerms; ++j) {
            double dot = 0.0;
            for (std::size_t i = k; i < n; ++i) dot += v[i] * a[i][j];
            double cfac = 2.0 * dot / vtv;
            for (std::size_t i = k; i < n; ++i) a[i][j] -= cfac * v[i];
        }
        double dot = 0.0;
        for (std::size_t i = k; i < n; ++i) dot += v[i] * qty[i];
        double cfac = 2.0 * dot / vtv;
        for (std::size_t i = k; i < n; ++i) qty[i] -= cfac * v[i];
    }

    double max_diag = 0.0;
    for (std::size_t k = 0; k < kNumTerms; ++k)
        max_diag = std::max(max_diag, std::fabs(a[k][k]));
    for (std::size_t k = 0; k < kNumTerms; ++k) {
        if (std::fabs(a[k][k]) <= 1e-10 * max_diag)
            throw SingularDesignError("design matrix is rank deficient at column " +
                                      std::string(term_name(k)));
    }

    OlsResult res;
    res.n = n;
    res.df = static_cast<int>(n) - static_cast<int>(kNumTerms);
    res.tss = tss;

    // back substitution R beta = Q'y
    for (std::size_t ki = kNumTerms; ki-- > 0;) {
        double s = qty[ki];
        for (std::size_t j = ki + 1; j < kNumTerms; ++j) s -= a[ki][j] * res.beta[j];
        res.beta[ki] = s / a[ki][ki];
    }

    double rss = 0.0;
    for (std::size_t i = kNumTerms; i < n; ++i) rss += qty[i] * qty[i];
    res.rss = rss;
    res.r2 = rss <= 1e-12 * tss ? 1.0 : 1.0 - rss / tss;
    res.sigma2 = rss / res.df;

    // diag of (X'X)^-1 = R^-1 R^-T via explicit inverse of R
    std::array<std::array<double, kNumTerms>, kNumTerms> rinv{};
    for (std::size_t col = 0; col < kNumTerms; ++col) {
        for (std::size_t ki = kNumTerms; ki-- > 0;) {
            double s = ki == col ? 1.0 : 0.0;
            for (std::size_t j = ki + 1; j < kNumTerms; ++j) s -= a[ki][j] * rinv[j][col];
            rinv[ki][col] = s / a[ki][ki];
        }
    }
    constexpr double kPFloor = std::numeric_limits<double>::denorm_min();
    for (std::size_t j = 0; j < kNumTerms; ++j) {
        double diag = 0.0;
        for (std::size_t k2 = j; k2 < kNumTerms; ++k2) diag += rinv[j][k2] * rinv[j][k2];
        res.se[j] = std::sqrt(res.sigma2 * diag);
        if (res.se[j] > 0.0) {
            res.t[j] = res.beta[j] / res.se[j];
            res.p[j] = std::max(two_sided_p(res.t[j], res.df), kPFloor);
        } else if (res.beta[j] == 0.0) {
            res.t[j] = 0.0;
            res.p[j] = 1.0;
        } else {
            res.t[j] = res.beta[j] > 0.0 ? std::numeric_limits<double>::infinity()
                                         : -std::numeric_limits<double>::infinity();
            res.p[j] = kPFloor;
        }
    }
    return res;
}

std::vector<RegressionFit> fit_all(const std::vector<Observation>& observations,
                                   const std::vector<std::string>& measures) {
    if (observations.empty()) throw InvalidArgument("no observations to fit");
    if (measures.empty()) throw InvalidArgument("no measures requested");

    std::set<std::string> models;
    for (const auto& obs : observations) models.insert(obs.model_id);

    std::vector<RegressionFit> fits;
    for (const auto& model : models) {
        std::vector<const Observation*> group;
        std::map<std::string, std::size_t> cell_counts;
        for (const auto& obs : observations) {
            if (obs.model_id != model) continue;
            group.push_back(&obs);
            ++cell_counts[obs.persona_id];
        }
        std::string missing;
        for (const auto& p : enumerate_personas("probe")) {
            if (!cell_counts.count(p.id())) {
                if (!missing.empty()) missing += ", ";
                missing += p.id();
            }
        }
        if (!missing.empty())
            throw SingularDesignError("model '" + model +
                                      "': no observations for persona cells: " + missing);
        if (group.size() <= kNumTerms)
            throw InsufficientDataError("model '" + model + "': " +
                                        std::to_string(group.size()) +
                                        " observations leave no residual degrees of freedom");

        std::vector<DesignRow> rows;
        rows.reserve(group.size());
        for (const auto* obs : group)
            rows.push_back(effect_code(persona_from_id(obs->persona_id, "probe")));

        for (const auto& measure : measures) {
            RegressionFit fit;
            fit.model_id = model;
            fit.measure = measure;
            std::vector<double> y;
            y.reserve(group.size());
            for (const auto* obs : group) y.push_back(obs->profile.value(measure));
            try {
                fit.ols = fit_ols(rows, y);
            } catch (const DegenerateResponseError& e) {
                fit.skipped_reason = e.what();
            }
            fits.push_back(std::move(fit));
        }
    }
    return fits;
}

}  // namespace pbench
