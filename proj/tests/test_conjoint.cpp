#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <array>
#include <cmath>
#include <cstdint>
#include <set>
#include <string>

#include "oracles.hpp"
#include "pbench/conjoint.hpp"
#include "pbench/errors.hpp"
#include "pbench/util.hpp"

using namespace pbench;

namespace {

std::vector<PersonaSpec> grid() { return enumerate_personas("T"); }

// y = linear model over the design + optional noise, replicated per cell
struct Dataset {
    std::vector<DesignRow> rows;
    std::vector<double> y;
};

Dataset make_dataset(std::uint64_t seed, const std::array<double, 8>& truth, double noise,
                     int reps_lo, int reps_hi) {
    Rng rng(seed);
    Dataset d;
    for (const auto& p : grid()) {
        DesignRow row = effect_code(p);
        auto xv = design_vector(row);
        int reps = reps_lo + static_cast<int>(rng.below(
                                 static_cast<std::uint64_t>(reps_hi - reps_lo + 1)));
        for (int r = 0; r < reps; ++r) {
            double mu = 0;
            for (std::size_t j = 0; j < kNumTerms; ++j) mu += truth[j] * xv[j];
            d.rows.push_back(row);
            d.y.push_back(mu + noise * rng.normal());
        }
    }
    return d;
}

}  // namespace

TEST_CASE("effect coding covers the full 2x2x2 grid with interaction products") {
    auto personas = grid();
    REQUIRE(personas.size() == 8);
    std::set<std::array<double, 3>> mains;
    for (const auto& p : personas) {
        DesignRow r = effect_code(p);
        CHECK(r.x1 == (p.attitude == Attitude::Optimistic ? 1.0 : -1.0));
        CHECK(r.x2 == (p.authority == Authority::Authoritative ? 1.0 : -1.0));
        CHECK(r.x3 == (p.reasoning == Reasoning::Analytical ? 1.0 : -1.0));
        CHECK(r.x12 == r.x1 * r.x2);
        CHECK(r.x13 == r.x1 * r.x3);
        CHECK(r.x23 == r.x2 * r.x3);
        CHECK(r.x123 == r.x1 * r.x2 * r.x3);
        mains.insert({r.x1, r.x2, r.x3});
    }
    CHECK(mains.size() == 8);  // all sign combinations distinct
}

TEST_CASE("balanced designs make X'X diagonal and coefficients plain averages") {
    std::array<double, 8> truth{4.0, 1.0, -0.5, 0.25, 0.1, 0, 0.05, -0.2};
    Dataset d = make_dataset(77, truth, 0.3, 4, 4);  // exactly 4 reps per cell
    const std::size_t n = d.rows.size();
    REQUIRE(n == 32);

    std::array<std::array<double, 8>, 8> xtx{};
    for (const auto& row : d.rows) {
        auto x = design_vector(row);
        for (std::size_t a = 0; a < 8; ++a)
            for (std::size_t b = 0; b < 8; ++b) xtx[a][b] += x[a] * x[b];
    }
    for (std::size_t a = 0; a < 8; ++a) {
        for (std::size_t b = 0; b < 8; ++b) {
            CHECK(std::fabs(xtx[a][b] - (a == b ? double(n) : 0.0)) < 1e-12);
        }
    }

    OlsResult fit = fit_ols(d.rows, d.y);
    for (std::size_t j = 0; j < 8; ++j) {
        double avg = 0;
        for (std::size_t i = 0; i < n; ++i) avg += design_vector(d.rows[i])[j] * d.y[i];
        avg /= double(n);
        CHECK(std::fabs(fit.beta[j] - avg) < 1e-12);
    }
}

TEST_CASE("QR fit matches the normal-equations oracle, balanced and not") {
    for (std::uint64_t seed : {1ull, 2ull, 3ull, 4ull, 5ull}) {
        std::array<double, 8> truth{2.0, 0.7, -0.3, 0.5, 0.0, 0.15, -0.1, 0.02};
        Dataset d = make_dataset(seed, truth, 0.8, 3, 7);  // unbalanced cells
        OlsResult fit = fit_ols(d.rows, d.y);
        oracle::RefFit ref = oracle::ols_reference(d.rows, d.y);
        for (std::size_t j = 0; j < 8; ++j) {
            CHECK(std::fabs(fit.beta[j] - ref.beta[j]) < 1e-9);
            CHECK(std::fabs(fit.se[j] - ref.se[j]) < 1e-9);
            CHECK(std::fabs(fit.t[j] - ref.t[j]) < 1e-8);
            CHECK(std::fabs(fit.p[j] - ref.p[j]) < 1e-6);
        }
        CHECK(std::fabs(fit.r2 - ref.r2) < 1e-10);
        CHECK(std::fabs(fit.rss - ref.rss) < 1e-8 * (1.0 + ref.rss));
        CHECK(fit.df == ref.df);
    }
}

TEST_CASE("noise-free responses are recovered exactly with r2 pinned to 1") {
    std::array<double, 8> truth{10.0, 2.0, -1.0, 0.5, 0.25, 0.0, -0.125, 0.0625};
    Dataset d = make_dataset(9, truth, 0.0, 2, 2);
    OlsResult fit = fit_ols(d.rows, d.y);
    for (std::size_t j = 0; j < 8; ++j)
        CHECK(std::fabs(fit.beta[j] - truth[j]) < 1e-12);
    CHECK(fit.r2 == 1.0);
    for (std::size_t j = 0; j < 8; ++j) {
        CHECK(!std::isnan(fit.t[j]));   // a perfect fit must not produce 0/0
        CHECK(fit.p[j] > 0.0);          // the (0,1] invariant survives it too
        CHECK(fit.p[j] <= 1.0);
    }
}

TEST_CASE("degenerate inputs raise the specific error types") {
    std::array<double, 8> truth{1, 0, 0, 0, 0, 0, 0, 0};
    SUBCASE("too few observations") {
        Dataset d = make_dataset(11, truth, 0.1, 1, 1);
        d.rows.resize(8);
        d.y.resize(8);
        CHECK_THROWS_AS(fit_ols(d.rows, d.y), InsufficientDataError);
    }
    SUBCASE("constant response") {
        Dataset d = make_dataset(12, truth, 0.0, 2, 2);
        CHECK_THROWS_AS(fit_ols(d.rows, d.y), DegenerateResponseError);
    }
    SUBCASE("rank-deficient design") {
        PersonaSpec p = grid()[0];
        std::vector<DesignRow> rows(10, effect_code(p));
        std::vector<double> y;
        Rng rng(13);
        for (int i = 0; i < 10; ++i) y.push_back(rng.normal());
        CHECK_THROWS_AS(fit_ols(rows, y), SingularDesignError);
    }
    SUBCASE("size mismatch") {
        Dataset d = make_dataset(14, truth, 0.1, 2, 2);
        d.y.pop_back();
        CHECK_THROWS_AS(fit_ols(d.rows, d.y), InvalidArgument);
    }
}

TEST_CASE("t survival function against numeric integration") {
    CHECK(t_sf(0.0, 7) == 0.5);  // exact, not approximate
    CHECK(two_sided_p(0.0, 7) == 1.0);
    for (int df : {1, 2, 5, 10, 30, 120}) {
        for (double t : {0.3, 1.0, 1.96, 2.5, 5.0, 9.0}) {
            double got = t_sf(t, df);
            double want = oracle::t_sf_reference(t, df);
            CHECK(std::fabs(got - want) < 1e-8);
            // symmetry
            CHECK(std::fabs((1.0 - t_sf(-t, df)) - got) < 1e-12);
        }
    }
    // large-df limit approaches the normal tail
    CHECK(std::fabs(t_sf(1.96, 10000) - oracle::normal_sf(1.96)) < 1e-4);
    CHECK_THROWS_AS(t_sf(1.0, 0), InvalidArgument);
}

TEST_CASE("fit_all groups by model, skips constant measures, names missing cells") {
    std::vector<Observation> obs;
    Rng rng(99);
    for (const char* model : {"m-b", "m-a"}) {
        for (const auto& p : grid()) {
            for (int s = 0; s < 3; ++s) {
                Observation o;
                o.persona_id = p.id();
                o.model_id = model;
                o.session_index = s;
                o.unit_index = 0;
                DesignRow r = effect_code(p);
                o.profile.percentages["varies"] = 5.0 + 2.0 * r.x1 + rng.normal();
                o.profile.percentages["flat"] = 3.25;
                obs.push_back(o);
            }
        }
    }
    auto fits = fit_all(obs, {"varies", "flat"});
    REQUIRE(fits.size() == 4);
    // models in sorted order, measures in the order given
    CHECK(fits[0].model_id == "m-a");
    CHECK(fits[0].measure == "varies");
    CHECK(fits[1].model_id == "m-a");
    CHECK(fits[1].measure == "flat");
    CHECK(fits[2].model_id == "m-b");
    CHECK_FALSE(fits[0].skipped());
    CHECK(fits[1].skipped());
    CHECK(fits[1].skipped_reason.find("constant") != std::string::npos);
    CHECK(fits[0].ols.beta[1] == doctest::Approx(2.0).epsilon(0.3));

    SUBCASE("a missing persona cell is fatal and named") {
        std::vector<Observation> gap;
        for (const auto& o : obs) {
            if (o.model_id == "m-a" && o.persona_id == "pes-sub-aff") continue;
            gap.push_back(o);
        }
        try {
            fit_all(gap, {"varies"});
            FAIL("expected SingularDesignError");
        } catch (const SingularDesignError& e) {
            CHECK(std::string(e.what()).find("pes-sub-aff") != std::string::npos);
            CHECK(std::string(e.what()).find("m-a") != std::string::npos);
        }
    }
    SUBCASE("unknown measure is a configuration error") {
        CHECK_THROWS_AS(fit_all(obs, {"nope"}), ConfigError);
    }
}
