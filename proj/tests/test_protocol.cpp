#include "doctest.h"

#include <bit>
#include <cmath>

#include "dephasim/core.hpp"
#include "dephasim/protocol.hpp"

using namespace dephasim;

namespace {

// Test-local marginal: probability that surviving slot `slot` is clean,
// conditioned on the round-1 branch parity.
double slot_fidelity_round1(double p, int m, int parity, int slot) {
    double branch = 0.0, clean = 0.0;
    for (std::uint32_t mask = 0; mask < (1u << m); ++mask) {
        const int j = std::popcount(mask);
        if ((j & 1) != parity)
            continue;
        const double w = std::pow(1.0 - p, m - j) * std::pow(p, j);
        branch += w;
        if (!((mask >> slot) & 1u))
            clean += w;
    }
    return clean / branch;
}

}  // namespace

TEST_CASE("round-1 enumeration") {
    SUBCASE("three pairs at p = 0.1") {
        const auto r1 = protocol::enumerate_round1({0.1, 3, 1});
        CHECK(r1.success.probability == doctest::Approx(0.756).epsilon(1e-12));
        CHECK(r1.success.reduced_pair_fidelity ==
              doctest::Approx(41.0 / 42.0).epsilon(1e-12));
        CHECK(r1.success.reduced_pair_fidelity == doctest::Approx(0.97619).epsilon(1e-5));
        CHECK(r1.failure.probability == doctest::Approx(0.244).epsilon(1e-12));
    }
    SUBCASE("two pairs reproduce the two-copy recurrence map") {
        const auto r1 = protocol::enumerate_round1({0.1, 2, 1});
        // F^2 / (F^2 + (1-F)^2) at F = 0.9
        CHECK(r1.success.reduced_pair_fidelity ==
              doctest::Approx(0.81 / 0.82).epsilon(1e-12));
        CHECK(r1.success.probability == doctest::Approx(0.82).epsilon(1e-12));
    }
    SUBCASE("complete dephasing is a coin flip") {
        for (int m : {2, 3, 5}) {
            const auto r1 = protocol::enumerate_round1({0.5, m, 1});
            CHECK(r1.success.probability == doctest::Approx(0.5).epsilon(1e-12));
            CHECK(r1.success.reduced_pair_fidelity == doctest::Approx(0.5).epsilon(1e-12));
        }
    }
    SUBCASE("every surviving slot carries the same marginal") {
        for (int m : {3, 4, 5})
            for (int parity : {0, 1}) {
                const double first = slot_fidelity_round1(0.1, m, parity, 0);
                for (int slot = 1; slot < m - 1; ++slot)
                    CHECK(slot_fidelity_round1(0.1, m, parity, slot) ==
                          doctest::Approx(first).epsilon(1e-13));
                const auto r1 = protocol::enumerate_round1({0.1, m, 1});
                const auto& b = parity == 0 ? r1.success : r1.failure;
                CHECK(b.reduced_pair_fidelity == doctest::Approx(first).epsilon(1e-13));
            }
    }
    SUBCASE("success fidelity stays in [1-p, 1]") {
        for (int m : {2, 3, 4, 6})
            for (double p : {0.05, 0.2, 0.4, 0.5}) {
                const auto r1 = protocol::enumerate_round1({p, m, 1});
                CHECK(r1.success.reduced_pair_fidelity >= 1.0 - p - 1e-12);
                CHECK(r1.success.reduced_pair_fidelity <= 1.0 + 1e-12);
            }
    }
    SUBCASE("size guard") {
        CHECK_THROWS_AS(protocol::enumerate_round1({0.1, 21, 1}), std::domain_error);
    }
}

TEST_CASE("round-2 enumeration") {
    SUBCASE("two pairs at p = 0.1: only all-clean and all-flipped survive") {
        const auto r2 = protocol::enumerate_round2({0.1, 2, 2});
        CHECK(r2.ss.probability == doctest::Approx(0.6562 / 0.6724).epsilon(1e-12));
        CHECK(r2.ss.reduced_pair_fidelity ==
              doctest::Approx(0.6561 / 0.6562).epsilon(1e-12));
        CHECK(r2.ss.probability + r2.sf.probability == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(r2.fs.probability + r2.ff.probability == doctest::Approx(1.0).epsilon(1e-12));
    }
    SUBCASE("published fidelity ladder points") {
        CHECK(protocol::enumerate_round2({0.1, 3, 2}).ss.reduced_pair_fidelity ==
              doctest::Approx(0.999384).epsilon(1e-6));
        CHECK(protocol::enumerate_round2({0.1, 4, 2}).ss.reduced_pair_fidelity ==
              doctest::Approx(0.9986).epsilon(5e-5));
    }
    SUBCASE("spectra are normalized and spectra entries labeled") {
        const auto r2 = protocol::enumerate_round2({0.3, 3, 2});
        for (const auto* b : {&r2.ss, &r2.sf, &r2.fs, &r2.ff}) {
            CHECK(b->spectrum.total_weight() == doctest::Approx(1.0).epsilon(1e-12));
            CHECK(b->spectrum.pair_count == 4);
        }
        for (const auto& e : r2.sf.spectrum.entries)
            CHECK(e.is_pair());
        for (const auto& e : r2.ss.spectrum.entries)
            CHECK_FALSE(e.is_pair());
    }
    SUBCASE("size guard") {
        CHECK_THROWS_AS(protocol::enumerate_round2({0.1, 5, 2}), std::domain_error);
    }
}

TEST_CASE("multi-round lineage enumeration") {
    SUBCASE("noiseless lineage never fails") {
        for (auto [m, n] : {std::pair{2, 3}, {3, 2}}) {
            const auto lineage = protocol::enumerate_rounds({0.0, m, n}, n);
            for (const auto& rec : lineage) {
                CHECK(rec.success_probability == doctest::Approx(1.0).epsilon(1e-12));
                CHECK(rec.fidelity == doctest::Approx(1.0).epsilon(1e-12));
            }
        }
    }
    SUBCASE("two copies reach near-unit fidelity in three rounds") {
        const auto lineage = protocol::enumerate_rounds({0.1, 2, 3}, 3);
        REQUIRE(lineage.size() == 3);
        CHECK(lineage[2].fidelity >= 0.999999);
        CHECK(lineage[0].fidelity == doctest::Approx(0.81 / 0.82).epsilon(1e-12));
    }
    SUBCASE("agrees with the dedicated round-2 enumeration") {
        const auto lineage = protocol::enumerate_rounds({0.1, 3, 2}, 2);
        const auto r2 = protocol::enumerate_round2({0.1, 3, 2});
        CHECK(lineage[1].fidelity ==
              doctest::Approx(r2.ss.reduced_pair_fidelity).epsilon(1e-13));
        CHECK(lineage[1].success_probability ==
              doctest::Approx(r2.ss.probability).epsilon(1e-13));
        const auto r1 = protocol::enumerate_round1({0.1, 3, 1});
        CHECK(lineage[0].lineage_probability ==
              doctest::Approx(std::pow(r1.success.probability, 3)).epsilon(1e-13));
    }
    SUBCASE("lineage fidelities never decrease") {
        for (double p : {0.1, 0.3, 0.45}) {
            const auto lineage = protocol::enumerate_rounds({p, 2, 4}, 4);
            double prev = 1.0 - p;
            for (const auto& rec : lineage) {
                CHECK(rec.fidelity >= prev - 1e-12);
                prev = rec.fidelity;
            }
        }
    }
    SUBCASE("size guard points at Monte Carlo") {
        CHECK_THROWS_AS(protocol::enumerate_rounds({0.1, 3, 3}, 3), std::domain_error);
        CHECK_THROWS_AS(protocol::enumerate_rounds({0.1, 2, 5}, 5), std::domain_error);
    }
}

TEST_CASE("Monte Carlo estimators") {
    SUBCASE("same seed, same numbers") {
        const auto a = protocol::monte_carlo_rounds({0.1, 3, 3}, 3, 20000, 1234);
        const auto b = protocol::monte_carlo_rounds({0.1, 3, 3}, 3, 20000, 1234);
        REQUIRE(a.rounds.size() == b.rounds.size());
        for (std::size_t i = 0; i < a.rounds.size(); ++i) {
            CHECK(a.rounds[i].fidelity.value == b.rounds[i].fidelity.value);
            CHECK(a.rounds[i].accepted == b.rounds[i].accepted);
        }
    }
    SUBCASE("round-2 estimates track the exhaustive answer within four sigma") {
        const DephasingParams params{0.1, 3, 2};
        const auto exact = protocol::enumerate_round2(params);
        const auto mc = protocol::monte_carlo_round2(params, 200000, 99991);
        const auto close = [](const protocol::Estimate& e, double truth) {
            return std::abs(e.value - truth) <= 4.0 * std::max(e.std_error, 1e-12);
        };
        CHECK(close(mc.p_s1s2, exact.ss.probability));
        CHECK(close(mc.p_f1s2, exact.fs.probability));
        CHECK(close(mc.fidelity_s1s2, exact.ss.reduced_pair_fidelity));
        const double p_s1 = std::pow(0.5 * (1.0 + std::pow(0.8, 3)), 3);
        CHECK(close(mc.p_homogeneous_success, p_s1));
    }
    SUBCASE("exhaustive limit agrees with Monte Carlo on a tiny case") {
        const auto exact = protocol::enumerate_rounds({0.3, 2, 2}, 2);
        const auto mc = protocol::monte_carlo_rounds({0.3, 2, 2}, 2, 400000, 777);
        for (int r = 0; r < 2; ++r)
            CHECK(std::abs(mc.rounds[r].fidelity.value - exact[r].fidelity) <=
                  4.0 * std::max(mc.rounds[r].fidelity.std_error, 1e-12));
    }
    SUBCASE("argument guards") {
        CHECK_THROWS_AS(protocol::monte_carlo_rounds({0.1, 2, 2}, 2, 0, 1),
                        std::domain_error);
        CHECK_THROWS_AS(protocol::monte_carlo_round2({0.1, 6, 2}, 10, 1),
                        std::domain_error);
    }
}

TEST_CASE("branch JSON reports") {
    const auto r2 = protocol::enumerate_round2({0.1, 2, 2});
    const auto ss = protocol::branch_report(r2.ss);
    CHECK(ss["tag"] == "s1s2");
    CHECK(ss["pair_count"] == 1);
    CHECK(ss["probability"].get<double>() ==
          doctest::Approx(0.6562 / 0.6724).epsilon(1e-12));
    REQUIRE(ss["spectrum"].size() == 2);
    CHECK(ss["spectrum"][0].contains("j"));
    CHECK_FALSE(ss["spectrum"][0].contains("j1"));

    const auto sf = protocol::branch_report(r2.sf);
    CHECK(sf["tag"] == "s1f2");
    REQUIRE(sf["spectrum"].size() == 2);
    CHECK(sf["spectrum"][0].contains("j1"));
    CHECK(sf["spectrum"][0].contains("j2"));
}
