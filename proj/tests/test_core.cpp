#include "doctest.h"

#include <cmath>
#include <map>
#include <set>

#include "dephasim/core.hpp"
#include "dephasim/protocol.hpp"

using namespace dephasim;
using core::BranchSpectrum;

namespace {

double entry_value(const BranchSpectrum& b, int j) {
    for (const auto& e : b.spectrum.entries)
        if (e.j == j && !e.is_pair())
            return e.value;
    return 0.0;
}

std::int64_t entry_mult(const BranchSpectrum& b, int j) {
    for (const auto& e : b.spectrum.entries)
        if (e.j == j && !e.is_pair())
            return e.multiplicity;
    return 0;
}

}  // namespace

TEST_CASE("binary entropy endpoints and symmetry") {
    CHECK(core::binary_entropy(0.0) == 0.0);
    CHECK(core::binary_entropy(1.0) == 0.0);
    CHECK(core::binary_entropy(0.5) == doctest::Approx(1.0).epsilon(1e-15));
    // direct evaluation of the two-point spectrum {0.1, 0.9}
    const double direct = -(0.1 * std::log2(0.1) + 0.9 * std::log2(0.9));
    CHECK(core::binary_entropy(0.1) == doctest::Approx(direct).epsilon(1e-15));
    CHECK(core::binary_entropy(0.1) == doctest::Approx(0.4689956).epsilon(1e-7));
    CHECK(core::binary_entropy(0.3) == core::binary_entropy(0.7));
    CHECK_THROWS_AS(core::binary_entropy(-0.01), std::domain_error);
    CHECK_THROWS_AS(core::binary_entropy(1.01), std::domain_error);
}

TEST_CASE("capacity of the dephasing channel") {
    CHECK(core::capacity(0.0) == 1.0);
    CHECK(core::capacity(0.5) == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(core::capacity(0.1) == doctest::Approx(0.5310044).epsilon(1e-7));
    double prev = 1.0;
    for (double p = 0.0; p <= 0.5 + 1e-12; p += 0.01) {
        const double c = core::capacity(std::min(p, 0.5));
        CHECK(c <= prev + 1e-15);
        prev = c;
    }
    CHECK_THROWS_AS(core::capacity(0.6), std::domain_error);
}

TEST_CASE("per-segment dephasing composes back to the full channel") {
    CHECK(core::node_dephasing(0.23, 1) == 0.23);
    CHECK(core::node_dephasing(0.18, 2) == doctest::Approx(0.1).epsilon(1e-15));
    for (int k : {1, 2, 3, 5})
        CHECK(core::node_dephasing(0.0, k) == 0.0);
    for (double p : {0.05, 0.1, 0.3, 0.5}) {
        for (int n : {2, 3, 4}) {
            const double pe = core::node_dephasing(p, n);
            CHECK(std::pow(1.0 - 2.0 * pe, n) ==
                  doctest::Approx(1.0 - 2.0 * p).epsilon(1e-12));
        }
    }
    CHECK_THROWS_AS(core::node_dephasing(0.7, 2), std::domain_error);
    CHECK_THROWS_AS(core::node_dephasing(0.1, 0), std::domain_error);
}

TEST_CASE("binomial coefficients") {
    CHECK(core::binomial(5, 2) == 10);
    CHECK(core::binomial(30, 15) == 155117520);
    CHECK(core::binomial(4, 5) == 0);
    CHECK_THROWS_AS(core::binomial(63, 31), std::overflow_error);
    CHECK(std::exp(core::log_binomial(30, 15)) ==
          doctest::Approx(155117520.0).epsilon(1e-10));
}

TEST_CASE("round-1 spectrum closed form") {
    SUBCASE("noiseless success branch is pure") {
        const auto b = core::round1_spectrum({0.0, 3, 1}, BranchTag::s1());
        CHECK(b.probability == 1.0);
        REQUIRE(b.spectrum.entries.size() == 1);
        CHECK(b.spectrum.entries[0].j == 0);
        CHECK(b.spectrum.entries[0].value == 1.0);
        CHECK(b.spectrum.pair_count == 2);
    }
    SUBCASE("three pairs at p = 0.1") {
        const auto b = core::round1_spectrum({0.1, 3, 1}, BranchTag::s1());
        CHECK(b.probability == doctest::Approx(0.756).epsilon(1e-12));
        CHECK(entry_value(b, 0) == doctest::Approx(0.729 / 0.756).epsilon(1e-12));
        CHECK(entry_mult(b, 0) == 1);
        CHECK(entry_value(b, 2) == doctest::Approx(0.009 / 0.756).epsilon(1e-12));
        CHECK(entry_mult(b, 2) == 3);
    }
    SUBCASE("failed branch at m = 2 is uniform") {
        const auto b = core::round1_spectrum({0.1, 2, 1}, BranchTag::f1());
        CHECK(b.probability == doctest::Approx(0.18).epsilon(1e-12));
        REQUIRE(b.spectrum.entries.size() == 1);
        CHECK(b.spectrum.entries[0].j == 1);
        CHECK(b.spectrum.entries[0].value == doctest::Approx(0.5).epsilon(1e-12));
        CHECK(b.spectrum.entries[0].multiplicity == 2);
    }
    SUBCASE("normalization across a parameter grid") {
        for (int m = 2; m <= 6; ++m)
            for (double p : {0.0, 0.05, 0.25, 0.5})
                for (auto tag : {BranchTag::s1(), BranchTag::f1()}) {
                    const auto b = core::round1_spectrum({p, m, 1}, tag);
                    if (b.probability > 0.0)
                        CHECK(b.spectrum.total_weight() ==
                              doctest::Approx(1.0).epsilon(1e-12));
                }
    }
    SUBCASE("rejects two-round tags") {
        CHECK_THROWS_AS(core::round1_spectrum({0.1, 3, 1}, BranchTag::s1s2()),
                        std::invalid_argument);
    }
}

TEST_CASE("round-2 success probability closed form") {
    for (int m : {2, 3, 4, 5, 6})
        CHECK(core::round2_success_probability({0.0, m, 2}, StepResult::success) == 1.0);

    // m = 2: only the all-clean and all-flipped patterns survive both rounds
    CHECK(core::round2_success_probability({0.1, 2, 2}, StepResult::success) ==
          doctest::Approx(0.6562 / 0.6724).epsilon(1e-12));

    // m = 3 cross-check against the folded character sum written out by hand
    const double byhand =
        (std::pow(1.512, 3) + 3.0 * std::pow(1.8, 3) * 0.512) / 32.0 / std::pow(0.756, 3);
    CHECK(core::round2_success_probability({0.1, 3, 2}, StepResult::success) ==
          doctest::Approx(byhand).epsilon(1e-12));
    CHECK(byhand == doctest::Approx(0.897878).epsilon(1e-6));

    SUBCASE("agrees with exhaustive enumeration for both lineages") {
        for (int m : {2, 3, 4}) {
            for (double p : {0.1, 0.3, 0.5}) {
                const DephasingParams params{p, m, 2};
                const auto enumd = protocol::enumerate_round2(params);
                CHECK(core::round2_success_probability(params, StepResult::success) ==
                      doctest::Approx(enumd.ss.probability).epsilon(1e-12));
                CHECK(core::round2_success_probability(params, StepResult::failure) ==
                      doctest::Approx(enumd.fs.probability).epsilon(1e-12));
            }
        }
    }
}

TEST_CASE("round-2 multiplicity tables") {
    SUBCASE("m = 2 success lineage") {
        const auto t = core::round2_multiplicities(2, StepResult::success);
        REQUIRE(t.classes.size() == 2);
        CHECK(t.classes.at({0, 0}) == 1);
        CHECK(t.classes.at({2, 4}) == 1);
    }
    SUBCASE("m = 3 success lineage by total errors") {
        const auto by_j = core::round2_multiplicities(3, StepResult::success).by_total_errors();
        REQUIRE(by_j.size() == 3);
        CHECK(by_j.at(0) == 1);
        CHECK(by_j.at(4) == 9);
        CHECK(by_j.at(6) == 6);
    }
    SUBCASE("counts cover every survivor configuration") {
        for (int m = 2; m <= 6; ++m)
            for (auto r : {StepResult::success, StepResult::failure})
                CHECK(core::round2_multiplicities(m, r).total() ==
                      std::int64_t{1} << ((m - 1) * (m - 1)));
    }
    SUBCASE("success error counts skip 2, and skip m^2 - 2 for even m") {
        for (int m = 2; m <= 6; ++m) {
            const auto by_j = core::round2_multiplicities(m, StepResult::success)
                                  .by_total_errors();
            CHECK(by_j.count(0) == 1);
            CHECK(by_j.count(2) == 0);
            if (m % 2 == 0) {
                CHECK(by_j.rbegin()->first == m * m);
                CHECK(by_j.count(m * m - 2) == 0);
                if (m >= 4)
                    CHECK(by_j.count(m * m - 4) == 1);
            } else {
                CHECK(by_j.rbegin()->first == m * (m - 1));
            }
        }
    }
    SUBCASE("failure-lineage totals follow the odd-parity ranges") {
        for (int m = 2; m <= 6; ++m) {
            const auto by_j = core::round2_multiplicities(m, StepResult::failure)
                                  .by_total_errors();
            CHECK(by_j.begin()->first == m);
            const int top = m % 2 == 0 ? m * (m - 1) : m * (m - 1) + 1;
            CHECK(by_j.rbegin()->first == top);
        }
    }
}

TEST_CASE("round-2 failure labels stay within the declared index relations") {
    // Success in round 1, failure in round 2: j2 - j1 jumps by at most the
    // completed control-row weight, with the boundary cases pinned down.
    for (int m : {2, 3, 4}) {
        const auto table = core::round2_multiplicities(m, StepResult::success);
        const int jm = m * (m - 1);
        for (const auto& [key, count] : table.classes) {
            const auto [j1, j2] = key;
            CHECK(count > 0);
            if (j1 == 0) {
                CHECK(j2 == 0);
            } else if (j1 == 2) {
                CHECK(j2 == 4);
            } else if (j1 == jm) {
                CHECK(j2 == (m % 2 == 0 ? m * m : jm));
            } else if (m % 2 == 0 && j1 == jm - 2) {
                CHECK((j2 == j1 || j2 == j1 + 2));
            } else {
                CHECK(j2 >= j1);
                CHECK(j2 <= j1 + 4);
                CHECK((j2 - j1) % 2 == 0);
            }
        }
    }
    // Failure lineage: j1 runs over m-1, m+1, ...; j2 - j1 is odd and small.
    for (int m : {2, 3, 4}) {
        const auto table = core::round2_multiplicities(m, StepResult::failure);
        const int j1_top = m % 2 == 0 ? (m - 1) * (m - 1) : m * (m - 1);
        for (const auto& [key, count] : table.classes) {
            const auto [j1, j2] = key;
            CHECK(count > 0);
            CHECK(j1 >= m - 1);
            CHECK(j1 <= j1_top);
            CHECK((j1 - (m - 1)) % 2 == 0);
            CHECK((j2 - j1) % 2 == 1);
            CHECK(j2 - j1 >= 1);
            CHECK(j2 - j1 <= (m % 2 == 0 ? m - 1 : m));
        }
    }
}

TEST_CASE("round-2 spectrum closed form") {
    SUBCASE("noiseless success lineage is pure") {
        const auto b = core::round2_spectrum({0.0, 3, 2}, BranchTag::s1s2());
        CHECK(b.probability == 1.0);
        REQUIRE(b.spectrum.entries.size() == 1);
        CHECK(b.spectrum.entries[0].value == 1.0);
        CHECK(b.spectrum.pair_count == 4);
    }
    SUBCASE("m = 2 conditional success probability") {
        const auto b = core::round2_spectrum({0.1, 2, 2}, BranchTag::s1s2());
        CHECK(b.probability == doctest::Approx(0.6562 / 0.6724).epsilon(1e-12));
        CHECK(b.spectrum.total_weight() == doctest::Approx(1.0).epsilon(1e-12));
    }
    SUBCASE("zero-probability lineages come back empty") {
        for (auto tag : {BranchTag::f1s2(), BranchTag::f1f2(), BranchTag::s1f2()}) {
            const auto b = core::round2_spectrum({0.0, 3, 2}, tag);
            CHECK(b.probability == 0.0);
            CHECK(b.spectrum.entries.empty());
        }
    }
    SUBCASE("pooled failure reconstructs the round-1 tensor power") {
        for (int m : {2, 3, 4}) {
            for (double p : {0.1, 0.3, 0.5}) {
                const DephasingParams params{p, m, 2};
                for (auto r1 : {StepResult::success, StepResult::failure}) {
                    const auto succ = core::round2_spectrum(
                        params, BranchTag{r1, StepResult::success});
                    const auto fail = core::round2_spectrum(
                        params, BranchTag{r1, StepResult::failure});
                    const double p1 =
                        core::round1_spectrum(params, BranchTag{r1, std::nullopt})
                            .probability;
                    std::map<int, double> succ_by_j;
                    for (const auto& e : succ.spectrum.entries)
                        succ_by_j[e.j] = e.value;
                    for (const auto& e : fail.spectrum.entries) {
                        const double mix = std::pow(1.0 - p, m * (m - 1) - e.j) *
                                           std::pow(p, e.j) / std::pow(p1, m - 1);
                        const double got = fail.probability * e.value +
                                           succ.probability * succ_by_j.at(e.j2);
                        CHECK(got == doctest::Approx(mix).epsilon(1e-12));
                    }
                }
            }
        }
    }
    SUBCASE("normalization across a grid") {
        for (int m = 2; m <= 6; ++m)
            for (double p : {0.05, 0.25, 0.5})
                for (auto tag : {BranchTag::s1s2(), BranchTag::s1f2(), BranchTag::f1s2(),
                                 BranchTag::f1f2()}) {
                    const auto b = core::round2_spectrum({p, m, 2}, tag);
                    if (b.probability > 0.0)
                        CHECK(b.spectrum.total_weight() ==
                              doctest::Approx(1.0).epsilon(1e-12));
                }
    }
}

TEST_CASE("parameter validation") {
    CHECK_THROWS_AS(DephasingParams{0.6, 3, 1}.validate(), std::domain_error);
    CHECK_THROWS_AS(DephasingParams{-0.1, 3, 1}.validate(), std::domain_error);
    CHECK_THROWS_AS(DephasingParams{0.1, 1, 1}.validate(), std::domain_error);
    CHECK_THROWS_AS(DephasingParams{0.1, 3, 0}.validate(), std::domain_error);
    CHECK_NOTHROW(DephasingParams{0.5, 2, 1}.validate());
}

TEST_CASE("branch tags") {
    CHECK(BranchTag::s1().name() == "s1");
    CHECK(BranchTag::s1f2().name() == "s1f2");
    CHECK(BranchTag::f1s2().name() == "f1s2");
    CHECK(BranchTag::s1().is_round1_only());
    CHECK_FALSE(BranchTag::f1f2().is_round1_only());
    const std::set<std::string> names = {
        BranchTag::s1().name(),   BranchTag::f1().name(),   BranchTag::s1s2().name(),
        BranchTag::s1f2().name(), BranchTag::f1s2().name(), BranchTag::f1f2().name()};
    CHECK(names.size() == 6);
}
