#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <vector>

#include "pbench/lexicon.hpp"
#include "pbench/persona.hpp"

namespace pbench {

/// Effect-coded factorial design row. Main effects are +1 for the
/// optimistic / authoritative / analytical levels and -1 otherwise;
/// interaction columns are products of the main-effect columns.
struct DesignRow {
    double x1 = 0;    // attitude
    double x2 = 0;    // authority
    double x3 = 0;    // reasoning
    double x12 = 0;   // attitude x authority
    double x13 = 0;   // attitude x reasoning
    double x23 = 0;   // reasoning x authority
    double x123 = 0;  // three-way
};

DesignRow effect_code(const PersonaSpec& persona);

inline constexpr std::size_t kNumTerms = 8;  // intercept + 3 mains + 3 two-way + 1 three-way

/// Full regressor vector for a row: {1, x1, x2, x3, x12, x13, x23, x123}.
std::array<double, kNumTerms> design_vector(const DesignRow& row);

/// Human-readable name for coefficient j (0 = intercept .. 7 = three-way).
const char* term_name(std::size_t j);

struct OlsResult {
    std::size_t n = 0;
    int df = 0;  // n - 8
    double r2 = 0;
    double rss = 0;
    double tss = 0;
    double sigma2 = 0;  // rss / df
    std::array<double, kNumTerms> beta{};
    std::array<double, kNumTerms> se{};
    std::array<double, kNumTerms> t{};
    std::array<double, kNumTerms> p{};
};

/// Least squares via Householder QR.
///
/// Throws InvalidArgument on size mismatch or empty input,
/// InsufficientDataError when n <= 8 (no residual degrees of freedom),
/// SingularDesignError when the design matrix is rank deficient, and
/// DegenerateResponseError when the response is constant (inference on
/// style measures is meaningless without variation).
///
/// A perfect fit (rss <= 1e-12 * tss) reports r2 == 1.0 exactly; its
/// p-values collapse to the smallest positive double so that p stays in
/// (0, 1]. A coefficient that is exactly zero with zero standard error
/// reports t = 0, p = 1.
OlsResult fit_ols(const std::vector<DesignRow>& rows, const std::vector<double>& y);

/// Survival function P(T > t) of Student's t with df degrees of freedom,
/// via the regularized incomplete beta function. t_sf(0, df) == 0.5 exactly;
/// absolute accuracy is better than 1e-8 for df >= 1.
double t_sf(double t, int df);

/// Two-sided p-value 2 * P(T > |t|).
double two_sided_p(double t, int df);

struct RegressionFit {
    std::string model_id;
    std::string measure;
    OlsResult ols;
    std::string skipped_reason;  // non-empty when the measure could not be fit

    bool skipped() const { return !skipped_reason.empty(); }
};

/// Fits every (model, measure) pair found in the observations. Models are
/// processed in sorted order, measures in the order given. Structural
/// problems (missing persona cells, too few observations) abort with an
/// exception naming the offending model; a constant response only marks
/// that one fit as skipped.
std::vector<RegressionFit> fit_all(const std::vector<Observation>& observations,
                                   const std::vector<std::string>& measures);

}  // namespace pbench
