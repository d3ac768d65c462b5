#include <doctest.h>

#include <cmath>
#include <random>

#include "fbm/loadshare.hpp"

using namespace fbm;

namespace {

// Random nonempty working set on n nodes.
Mask random_working(int n, std::mt19937_64 &rng) {
    Mask m = 0;
    while (m == 0) m = rng() & full_mask(n);
    return m;
}

} // namespace

TEST_CASE("grid adjacency is horizontal and diagonal only") {
    const ComponentGraph g = build_grid_graph(2, 2);
    CHECK(g.adjacent(0, 1));
    CHECK(g.adjacent(0, 3));
    CHECK_FALSE(g.adjacent(0, 2));
    CHECK(g.adjacent(2, 1));
    const ComponentGraph h = build_grid_graph(3, 3);
    CHECK(h.degree(h.node(1, 1)) == 6);
    CHECK(h.degree(h.node(0, 0)) == 2);
    CHECK_THROWS_AS(build_grid_graph(3, 1), std::invalid_argument);
    CHECK_THROWS_AS(build_grid_graph(0, 3), std::invalid_argument);
}

TEST_CASE("transition rows are stochastic") {
    const TransitionMatrix p = transition_matrix(build_grid_graph(3, 4));
    for (int i = 0; i < p.size(); ++i) CHECK(p.p.row(i).sum() == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("hand-solved absorption examples") {
    // 1x3 row, middle failed: the walk steps left or right with equal odds.
    const TransitionMatrix p13 = transition_matrix(build_grid_graph(1, 3));
    const LoadShareVector a = absorbing_load_share(p13, {3, 0b101});
    CHECK(a.at(0) == doctest::Approx(1.5));
    CHECK(a.at(2) == doctest::Approx(1.5));
    CHECK_THROWS_AS(a.at(1), std::out_of_range);
    CHECK(std::isnan(a.dense()[1]));

    // 2x2, node 0 failed: its neighbors are 1 and 3; node 2 receives nothing.
    const TransitionMatrix p22 = transition_matrix(build_grid_graph(2, 2));
    const LoadShareVector b = absorbing_load_share(p22, {4, 0b1110});
    CHECK(b.at(1) == doctest::Approx(1.5));
    CHECK(b.at(3) == doctest::Approx(1.5));
    CHECK(b.at(2) == doctest::Approx(1.0));
}

TEST_CASE("absorption matrix is templated on the scalar") {
    const TransitionMatrix p = transition_matrix(build_grid_graph(2, 3));
    const Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic> pl = p.p.cast<long double>();
    const auto u = absorption_matrix(pl, {0, 4}, {1, 2, 3, 5});
    for (Eigen::Index r = 0; r < u.rows(); ++r) CHECK(static_cast<double>(u.row(r).sum()) == doctest::Approx(1.0));
}

TEST_CASE("singular absorption system is reported") {
    TransitionMatrix p{Eigen::MatrixXd::Identity(3, 3)};
    p.p(2, 2) = 0.0;
    p.p(2, 0) = 1.0;
    CHECK_THROWS_AS(absorption_matrix(p.p, {0, 1}, {2}), ConsistencyError);
}

TEST_CASE("empty working set is rejected") {
    AbsorbingLoadShare rule(transition_matrix(build_grid_graph(2, 2)));
    CHECK_THROWS_AS(rule(Configuration(4, 0)), std::invalid_argument);
}

TEST_CASE("property: load is conserved") {
    std::mt19937_64 rng(7);
    for (auto [r, c] : {std::pair{2, 3}, {3, 4}, {4, 4}, {2, 5}}) {
        AbsorbingLoadShare rule(transition_matrix(build_grid_graph(r, c)), false);
        const int n = r * c;
        for (int t = 0; t < 300; ++t) {
            const Mask m = random_working(n, rng);
            CHECK(rule(Configuration(n, m)).total() == doctest::Approx(n).epsilon(1e-12));
        }
    }
}

TEST_CASE("absorbing rule on the complete graph is equal load sharing") {
    for (int n = 2; n <= 7; ++n) {
        AbsorbingLoadShare rule(transition_matrix(build_complete_graph(n)));
        EqualLoadShare equal(n);
        for (Mask m = 1; m <= full_mask(n); ++m) {
            const LoadShareVector a = rule(Configuration(n, m)), b = equal(Configuration(n, m));
            for_each_member(m, [&](int i) {
                CHECK(a.at(i) == doctest::Approx(static_cast<double>(n) / cardinality(m)).epsilon(1e-12));
                CHECK(b.at(i) == doctest::Approx(a.at(i)).epsilon(1e-12));
            });
        }
    }
}

TEST_CASE("memoized and direct solves agree") {
    const TransitionMatrix p = transition_matrix(build_grid_graph(3, 3));
    AbsorbingLoadShare memo(p, true), direct(p, false);
    std::mt19937_64 rng(3);
    std::vector<double> a(9), b(9), c(9);
    for (int t = 0; t < 200; ++t) {
        const Mask m = random_working(9, rng);
        memo.evaluate(m, a);
        memo.evaluate(m, c);
        direct.evaluate(m, b);
        for_each_member(m, [&](int i) {
            CHECK(a[i] == b[i]);
            CHECK(c[i] == b[i]);
        });
    }
    CHECK(memo.cached() > 0);
    CHECK(direct.cached() == 0);
}

TEST_CASE("evaluate leaves failed entries untouched") {
    AbsorbingLoadShare rule(transition_matrix(build_grid_graph(2, 3)));
    std::vector<double> buf(6, -7.0);
    rule.evaluate(0b110011, buf);
    rule.evaluate(0b110011, buf);
    CHECK(buf[2] == -7.0);
    CHECK(buf[3] == -7.0);
}

TEST_CASE("tabulated rule matches the rule") {
    AbsorbingLoadShare rule(transition_matrix(build_grid_graph(2, 4)), false);
    const LoadShareTable t = LoadShareTable::tabulate(rule, 3);
    std::vector<double> lam(8);
    for (Mask m = 1; m <= full_mask(8); ++m) {
        rule.evaluate(m, lam);
        const auto row = t.row(m);
        for_each_member(m, [&](int i) { CHECK(row[i] == lam[i]); });
    }
    CHECK(t.name() == rule.name());
}

TEST_CASE("monotonicity: absorbing rules pass, a crafted rule fails") {
    AbsorbingLoadShare rule(transition_matrix(build_grid_graph(2, 3)));
    const MonotoneReport ok = verify_monotone(rule);
    CHECK(ok.monotone);
    CHECK(ok.exhaustive);
    CHECK(ok.pairs_checked > 0);

    AbsorbingLoadShare big(transition_matrix(build_grid_graph(4, 4)));
    const MonotoneReport sampled = verify_monotone(big, 2000, 5);
    CHECK(sampled.monotone);
    CHECK_FALSE(sampled.exhaustive);

    // Survivors lose load as more components fail: not monotone.
    FunctionLoadShare bad(3, [](Mask m, std::span<double> l) {
        for_each_member(m, [&](int i) { l[i] = cardinality(m); });
    });
    const MonotoneReport r = verify_monotone(bad);
    REQUIRE_FALSE(r.monotone);
    REQUIRE(r.counterexample.has_value());
    CHECK((r.counterexample->smaller & ~r.counterexample->larger) == 0);
    CHECK(r.counterexample->smaller != r.counterexample->larger);
}

TEST_CASE("powered rule and independent rule") {
    auto base = std::make_shared<EqualLoadShare>(4);
    PoweredLoadShare pw(base, 5.0, {2.0});
    std::vector<double> lam(4);
    pw.evaluate(0b0011, lam);
    CHECK(lam[0] == doctest::Approx(std::pow(2.0 / 2.0, 5.0)));
    pw.evaluate(0b0001, lam);
    CHECK(lam[0] == doctest::Approx(std::pow(4.0 / 2.0, 5.0)));

    IndependentLoadShare ind(4);
    ind.evaluate(0b0101, lam);
    CHECK(lam[0] == 1.0);
    CHECK(lam[2] == 1.0);
}

TEST_CASE("rule factory") {
    const ComponentGraph g = build_grid_graph(2, 3);
    CHECK(make_rule("absorbing", g)->name() == "absorbing");
    CHECK(make_rule("equal", g)->size() == 6);
    CHECK(make_rule("independent", g)->name() == "independent");
    CHECK_THROWS_AS(make_rule("local", g), std::invalid_argument);
}
