#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>

#include "oracles.hpp"
#include "ppcmt/core_geometry.hpp"

using namespace ppcmt;

TEST_CASE("canonical_sort basics") {
    CHECK(canonical_sort({{1, 0, 0}, {0, 0, 0}}) == IndexSet{1, 0});
    CHECK(canonical_sort({{0, 0, 0}, {0, 0, 0}}) == IndexSet{0, 1});  // stable tie
    CHECK_THROWS_WITH_AS(canonical_sort({}), "empty input", std::invalid_argument);
}

TEST_CASE("canonical_sort matches comparison-sort oracle") {
    Rng rng(11);
    const PointCloud cloud = oracle::random_cloud(rng, 100);
    const IndexSet perm = canonical_sort(cloud);
    IndexSet expect(cloud.size());
    std::iota(expect.begin(), expect.end(), std::size_t{0});
    std::sort(expect.begin(), expect.end(), [&](std::size_t a, std::size_t b) {
        if (lex_less(cloud[a], cloud[b])) return true;
        if (lex_less(cloud[b], cloud[a])) return false;
        return a < b;
    });
    CHECK(perm == expect);
}

TEST_CASE("fps picks the farthest point and exhausts") {
    const PointCloud cloud{{0, 0, 0}, {0.1, 0, 0}, {1, 0, 0}};
    CHECK(fps(cloud, 2) == IndexSet{0, 2});
    CHECK(fps(cloud, 3).size() == 3);
    CHECK_THROWS_WITH_AS(fps(cloud, 4), "sample larger than population", std::invalid_argument);
}

TEST_CASE("fps matches brute-force oracle") {
    Rng rng(12);
    for (int trial = 0; trial < 20; ++trial) {
        const PointCloud cloud = oracle::random_cloud(rng, 64);
        CHECK(fps(cloud, 8) == oracle::brute_fps(cloud, 8));
    }
}

TEST_CASE("knn basics and tie rule") {
    const PointCloud line{{0, 0, 0}, {1, 0, 0}, {2, 0, 0}};
    const IndexMatrix near = knn(line, {{0, 0, 0}}, 2);
    CHECK(near.at(0, 0) == 0);
    CHECK(near.at(0, 1) == 1);

    const PointCloud pair{{1, 0, 0}, {-1, 0, 0}};
    CHECK(knn(pair, {{0, 0, 0}}, 1).at(0, 0) == 0);  // equidistant: lower index

    CHECK_THROWS_AS(knn(line, {{0, 0, 0}}, 4), std::invalid_argument);
}

TEST_CASE("knn matches exhaustive oracle") {
    Rng rng(13);
    const PointCloud cloud = oracle::random_cloud(rng, 256);
    const PointCloud queries = oracle::random_cloud(rng, 16);
    const IndexMatrix got = knn(cloud, queries, 8);
    for (std::size_t q = 0; q < queries.size(); ++q) {
        const IndexSet expect = oracle::brute_knn(cloud, queries[q], 8);
        for (std::size_t j = 0; j < 8; ++j) CHECK(got.at(q, j) == expect[j]);
    }
}

TEST_CASE("group_normalize offsets") {
    const PointCloud single{{2, 3, 4}};
    const GroupedPatches one = group_normalize(single, {0}, 1);
    CHECK(one.offset(0, 0) == Vec3{0, 0, 0});

    Rng rng(14);
    const PointCloud cloud = oracle::random_cloud(rng, 32);
    const IndexSet centers{3, 7, 11, 19};
    const GroupedPatches patches = group_normalize(cloud, centers, 4);

    SUBCASE("offsets recompute by direct subtraction") {
        for (std::size_t g = 0; g < 4; ++g)
            for (std::size_t j = 0; j < 4; ++j) {
                const Vec3 expect = cloud[patches.neighbor_indices.at(g, j)] - cloud[centers[g]];
                CHECK(patches.offset(g, j) == expect);
            }
    }
    SUBCASE("translation keeps the same neighbors, offsets cancel to rounding") {
        PointCloud moved = cloud;
        const Vec3 t{12.5, -3.25, 0.5};
        for (Vec3& p : moved) p += t;
        const GroupedPatches shifted = group_normalize(moved, centers, 4);
        CHECK(shifted.neighbor_indices.data == patches.neighbor_indices.data);
        for (std::size_t i = 0; i < patches.local_offsets.size(); ++i) {
            const Vec3 diff = shifted.local_offsets[i] - patches.local_offsets[i];
            CHECK(std::abs(diff.x) <= 1e-12);
            CHECK(std::abs(diff.y) <= 1e-12);
            CHECK(std::abs(diff.z) <= 1e-12);
        }
        for (std::size_t g = 0; g < 4; ++g)
            CHECK(shifted.centers[g] == patches.centers[g] + t);
    }
}

TEST_CASE("ball_query basics") {
    const PointCloud line{{0, 0, 0}, {1, 0, 0}, {2, 0, 0}};
    const auto hits = ball_query(line, {{0, 0, 0}}, 1.5);
    CHECK(hits[0] == IndexSet{0, 1});
    const auto none = ball_query(line, {{10, 10, 10}}, 0.5);
    CHECK(none[0].empty());
    CHECK_THROWS_AS(ball_query(line, {{0, 0, 0}}, 0.0), std::invalid_argument);
}

TEST_CASE("directed_nn_dists basics") {
    const PointCloud a{{0, 0, 0}};
    const PointCloud b{{3, 4, 0}};
    CHECK(directed_nn_dists(a, b)[0] == doctest::Approx(5.0));
    const PointCloud same{{1, 2, 3}, {4, 5, 6}};
    for (double d : directed_nn_dists(same, same)) CHECK(d == 0.0);
    CHECK_THROWS_WITH_AS(directed_nn_dists(a, {}), "empty input", std::invalid_argument);
}

TEST_CASE("directed_nn_dists matches exhaustive oracle") {
    Rng rng(15);
    const PointCloud a = oracle::random_cloud(rng, 50);
    const PointCloud b = oracle::random_cloud(rng, 70);
    const auto got = directed_nn_dists(a, b);
    const auto expect = oracle::brute_nn_dists(a, b);
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(got[i] == doctest::Approx(expect[i]));
}

TEST_CASE("grid index identical to exhaustive oracle on random instances") {
    Rng rng(16);
    for (int trial = 0; trial < 1000; ++trial) {
        const std::size_t n = 4 + rng.bounded(trial % 4 == 0 ? 600 : 60);
        const PointCloud cloud = oracle::random_cloud(rng, n);
        const GridIndex grid(cloud);
        const Vec3 q{rng.uniform(-1.3, 1.3), rng.uniform(-1.3, 1.3), rng.uniform(-1.3, 1.3)};

        const std::size_t k = 1 + rng.bounded(std::min<std::size_t>(n, 12));
        IndexSet got;
        grid.knn(q, k, got);
        const IndexSet expect = oracle::brute_knn(cloud, q, k);
        REQUIRE(got == expect);

        const double radius = 0.05 + rng.next_double();
        IndexSet got_ball;
        grid.ball(q, radius, got_ball);
        REQUIRE(got_ball == oracle::brute_ball(cloud, q, radius));
    }
}

TEST_CASE("fps and knn point sets are permutation invariant") {
    Rng rng(17);
    for (int trial = 0; trial < 25; ++trial) {
        const PointCloud cloud = oracle::random_cloud(rng, 60);
        PointCloud shuffled = cloud;
        shuffle(shuffled, rng);

        PointCloud fps_a, fps_b;
        for (std::size_t i : fps(cloud, 10)) fps_a.push_back(cloud[i]);
        for (std::size_t i : fps(shuffled, 10)) fps_b.push_back(shuffled[i]);
        CHECK(fps_a == fps_b);  // same point sequence, not just the same set

        const Vec3 q{0.2, -0.1, 0.4};
        PointCloud knn_a, knn_b;
        const IndexMatrix ka = knn(cloud, {q}, 6);
        const IndexMatrix kb = knn(shuffled, {q}, 6);
        for (std::size_t j = 0; j < 6; ++j) {
            knn_a.push_back(cloud[ka.at(0, j)]);
            knn_b.push_back(shuffled[kb.at(0, j)]);
        }
        CHECK(knn_a == knn_b);
    }
}

TEST_CASE("directed_nn_dists permutation behaviour") {
    Rng rng(18);
    const PointCloud a = oracle::random_cloud(rng, 40);
    PointCloud b = oracle::random_cloud(rng, 55);
    const auto base = directed_nn_dists(a, b);

    PointCloud b_shuffled = b;
    shuffle(b_shuffled, rng);
    const auto after_b = directed_nn_dists(a, b_shuffled);
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(base[i] == doctest::Approx(after_b[i]));

    // permuting A permutes the outputs identically
    IndexSet perm(a.size());
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    shuffle(perm, rng);
    PointCloud a_perm(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) a_perm[i] = a[perm[i]];
    const auto after_a = directed_nn_dists(a_perm, b);
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(after_a[i] == doctest::Approx(base[perm[i]]));
}
