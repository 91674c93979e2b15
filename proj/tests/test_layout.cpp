#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "bammit/errors.hpp"
#include "bammit/layout.hpp"
#include "bammit/rng.hpp"
#include "doctest.h"

using namespace bammit;

TEST_CASE("flatten_index fixes the element ordering") {
    const FactorLayout layout = FactorLayout::make({2, 3}, 1);
    CHECK(flatten_index(layout, {0, 0}) == 0);
    CHECK(flatten_index(layout, {0, 2}) == 2);
    CHECK(flatten_index(layout, {1, 0}) == 3);

    const FactorLayout l3 = FactorLayout::make({2, 3, 4}, 1);
    CHECK(flatten_index(l3, {1, 2, 3}) == 23);
    // Oracle: enumerate all 24 cells in order and locate the tuple.
    std::size_t found = 24;
    std::size_t idx = 0;
    for (std::size_t a = 0; a < 2; ++a)
        for (std::size_t b = 0; b < 3; ++b)
            for (std::size_t c = 0; c < 4; ++c, ++idx)
                if (a == 1 && b == 2 && c == 3) found = idx;
    CHECK(flatten_index(l3, {1, 2, 3}) == found);
}

TEST_CASE("flatten_index rejects out-of-range cells naming the factor") {
    const FactorLayout layout = FactorLayout::make({2, 3}, 1);
    CHECK_THROWS_AS(flatten_index(layout, {2, 0}), IndexError);
    try {
        flatten_index(layout, {0, 3});
        FAIL("expected IndexError");
    } catch (const IndexError& e) {
        CHECK(std::string(e.what()).find("2") != std::string::npos);
    }
    CHECK_THROWS_AS(flatten_index(layout, {0}), IndexError);
}

TEST_CASE("flatten_index is a bijection over the grid") {
    const FactorLayout layout = FactorLayout::make({3, 4, 2}, 1);
    std::vector<std::size_t> seen;
    for (std::size_t a = 0; a < 3; ++a)
        for (std::size_t b = 0; b < 4; ++b)
            for (std::size_t c = 0; c < 2; ++c)
                seen.push_back(flatten_index(layout, {a, b, c}));
    std::sort(seen.begin(), seen.end());
    for (std::size_t i = 0; i < seen.size(); ++i) CHECK(seen[i] == i);
    // Round trip with unflatten.
    for (std::size_t i = 0; i < layout.grid_size(); ++i)
        CHECK(flatten_index(layout, unflatten_index(layout, i)) == i);
}

TEST_CASE("direct sum matches its defining expansion") {
    CHECK(direct_sum_cumulative({{1, 2}, {10, 20, 30}}) ==
          std::vector<double>{11, 21, 31, 12, 22, 32});
    // Symbolic form a=(a1,a2), b=(b1,b2,b3): entry order (a1+b1, a1+b2, ...).
    const double a1 = 0.37, a2 = -1.4, b1 = 2.0, b2 = 5.5, b3 = -0.25;
    CHECK(direct_sum_cumulative({{a1, a2}, {b1, b2, b3}}) ==
          std::vector<double>{a1 + b1, a1 + b2, a1 + b3, a2 + b1, a2 + b2, a2 + b3});
    CHECK(direct_sum_cumulative({{5, 7}}) == std::vector<double>{5, 7});
    CHECK_THROWS_AS(direct_sum_cumulative({}), ArgumentError);
}

TEST_CASE("cumulative Kronecker product expands in the same order") {
    CHECK(kronecker_cumulative({{1, 2}, {3, 4}}) == std::vector<double>{3, 4, 6, 8});
    CHECK(kronecker_cumulative({{1, 0}, {5, 6, 7}}) ==
          std::vector<double>{5, 6, 7, 0, 0, 0});
    CHECK(kronecker_cumulative({{2, 3}, {1, 1}, {4}}) ==
          std::vector<double>{8, 8, 12, 12});
    CHECK_THROWS_AS(kronecker_cumulative({}), ArgumentError);
}

TEST_CASE("both operators agree with brute-force cell enumeration") {
    Rng rng(123);
    for (int trial = 0; trial < 25; ++trial) {
        const std::size_t v = 2 + rng.next_u64() % 3;
        std::vector<std::size_t> dims;
        std::size_t n = 1;
        for (std::size_t i = 0; i < v; ++i) {
            const std::size_t b = 2 + rng.next_u64() % 6;
            dims.push_back(b);
            n *= b;
        }
        REQUIRE(n <= 10000);
        FactorLayout layout = FactorLayout::make(dims, 1);
        std::vector<std::vector<double>> vecs;
        for (std::size_t i = 0; i < v; ++i) {
            std::vector<double> x(dims[i]);
            for (auto& e : x) e = rng.normal();
            vecs.push_back(std::move(x));
        }
        const auto sum = direct_sum_cumulative(vecs);
        const auto prod = kronecker_cumulative(vecs);
        REQUIRE(sum.size() == n);
        REQUIRE(prod.size() == n);
        for (std::size_t idx = 0; idx < n; ++idx) {
            const Cell cell = unflatten_index(layout, idx);
            double s = 0.0, p = 1.0;
            for (std::size_t f = 0; f < v; ++f) {
                s += vecs[f][cell[f]];
                p *= vecs[f][cell[f]];
            }
            CHECK(sum[idx] == doctest::Approx(s).epsilon(1e-12));
            CHECK(prod[idx] == doctest::Approx(p).epsilon(1e-12));
        }
    }
}

TEST_CASE("Kronecker norm identity") {
    Rng rng(9);
    std::vector<std::vector<double>> vecs;
    double norm_prod = 1.0;
    for (std::size_t f = 0; f < 3; ++f) {
        std::vector<double> x(3 + f);
        double n2 = 0.0;
        for (auto& e : x) {
            e = rng.normal();
            n2 += e * e;
        }
        norm_prod *= std::sqrt(n2);
        vecs.push_back(std::move(x));
    }
    const auto prod = kronecker_cumulative(vecs);
    double n2 = 0.0;
    for (double e : prod) n2 += e * e;
    CHECK(std::sqrt(n2) == doctest::Approx(norm_prod).epsilon(1e-12));
}

TEST_CASE("dense materialization refuses oversized grids") {
    // 102 * 101 * 100 > 1e6 cells.
    std::vector<std::vector<double>> vecs = {std::vector<double>(102, 1.0),
                                             std::vector<double>(101, 1.0),
                                             std::vector<double>(100, 1.0)};
    CHECK_THROWS_AS(direct_sum_cumulative(vecs), ArgumentError);
    CHECK_THROWS_AS(kronecker_cumulative(vecs), ArgumentError);
}

TEST_CASE("layout validation catches malformed structures") {
    CHECK_THROWS_AS(FactorLayout::make({2}, 1).validate(), ArgumentError);   // V < 2
    CHECK_THROWS_AS(FactorLayout::make({2, 1}, 1).validate(), ArgumentError);  // B < 2
    CHECK_THROWS_AS(FactorLayout::make({2, 2}, 0).validate(), ArgumentError);  // Q < 1
    FactorLayout ok = FactorLayout::make({2, 3}, 2);
    CHECK_NOTHROW(ok.validate());
    CHECK(ok.grid_size() == 6);
    CHECK(ok.level_names[1] == std::vector<std::string>{"1", "2", "3"});
}
