#include <doctest.h>

#include <cmath>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include <irisift/matching.hpp>

#include "support/oracles.hpp"
#include "support/synthetic.hpp"

using namespace irisift;
using irisift::test::TempDir;

namespace {

Feature make_feature(double x, double y, std::initializer_list<std::pair<int, double>> coords) {
    Feature f;
    f.keypoint.x = x;
    f.keypoint.y = y;
    f.keypoint.sigma = 1.6;
    for (auto [i, v] : coords) f.descriptor.values[static_cast<size_t>(i)] = v;
    return f;
}

FeatureSet random_set(int count, int width, unsigned seed) {
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> dist(0.0, 1.0);
    FeatureSet set;
    set.width = width;
    set.height = width;
    for (int i = 0; i < count; ++i) {
        Feature f;
        f.keypoint.x = dist(rng) * (width - 1);
        f.keypoint.y = dist(rng) * (width - 1);
        double norm = 0.0;
        for (double& v : f.descriptor.values) {
            v = dist(rng);
            norm += v * v;
        }
        norm = std::sqrt(norm);
        for (double& v : f.descriptor.values) v /= norm;
        set.items.push_back(f);
    }
    return set;
}

MatchPair line(double angle_deg, double length, int ia = 0, int ib = 0) {
    MatchPair p;
    p.index_a = ia;
    p.index_b = ib;
    p.ratio = 0.5;
    p.line_angle = angle_deg;
    p.line_length = length;
    return p;
}

} // namespace

TEST_CASE("match_descriptors self-match of a single descriptor") {
    FeatureSet set;
    set.width = 100;
    set.height = 100;
    set.items.push_back(make_feature(10, 10, {{0, 1.0}}));
    const auto pairs = match_descriptors(set, set, 0.76);
    REQUIRE(pairs.size() == 1);
    CHECK(pairs[0].index_a == 0);
    CHECK(pairs[0].index_b == 0);
    CHECK(pairs[0].ratio == 0.0); // single element: d2 treated as infinite
    CHECK(pairs[0].line_length == doctest::Approx(100.0));
    CHECK(pairs[0].line_angle == doctest::Approx(0.0));
}

TEST_CASE("ratio 0.30/0.35 exceeds the 0.76 threshold") {
    FeatureSet a;
    a.width = a.height = 64;
    a.items.push_back(make_feature(5, 5, {{0, 1.0}}));
    FeatureSet b;
    b.width = b.height = 64;
    b.items.push_back(make_feature(7, 7, {{0, 1.0}, {1, 0.30}}));  // d1 = 0.30
    b.items.push_back(make_feature(9, 9, {{0, 1.0}, {2, 0.35}}));  // d2 = 0.35
    CHECK(match_descriptors(a, b, 0.76).empty());
    CHECK(match_descriptors(a, b, 0.90).size() == 1); // 0.857 < 0.90
}

TEST_CASE("degenerate descriptors never match") {
    FeatureSet a;
    a.width = a.height = 32;
    a.items.push_back(Feature{}); // all-zero descriptor
    a.items.push_back(make_feature(3, 3, {{1, 1.0}}));
    FeatureSet b = a;
    const auto pairs = match_descriptors(a, b, 1.0);
    REQUIRE(pairs.size() == 1);
    CHECK(pairs[0].index_a == 1);
    CHECK(pairs[0].index_b == 1);
}

TEST_CASE("match_descriptors equals the brute-force oracle on random sets") {
    const FeatureSet a = random_set(20, 128, 1);
    const FeatureSet b = random_set(20, 128, 2);
    for (double threshold : {0.76, 0.9, 1.0}) {
        const auto fast = match_descriptors(a, b, threshold);
        const auto oracle = irisift::test::brute_force_matches(a, b, threshold);
        REQUIRE(fast.size() == oracle.size());
        for (size_t i = 0; i < fast.size(); ++i) {
            CHECK(fast[i].index_a == oracle[i].index_a);
            CHECK(fast[i].index_b == oracle[i].index_b);
            CHECK(fast[i].ratio == doctest::Approx(oracle[i].ratio).epsilon(1e-12));
        }
    }
}

TEST_CASE("ratio threshold limits") {
    const FeatureSet a = random_set(15, 64, 3);
    const FeatureSet b = random_set(15, 64, 4);
    // threshold 1.0: every query keypoint emits its nearest-neighbor pair
    CHECK(match_descriptors(a, b, 1.0).size() == a.items.size());
    // threshold -> 0: only exact duplicates would pass; none here
    CHECK(match_descriptors(a, b, 1e-12).empty());

    FeatureSet b_dup = b;
    b_dup.items.push_back(a.items[0]); // exact duplicate of a query descriptor
    const auto pairs = match_descriptors(a, b_dup, 1e-12);
    REQUIRE(pairs.size() == 1);
    CHECK(pairs[0].index_a == 0);
    CHECK(pairs[0].ratio == 0.0);
}

TEST_CASE("empty inputs give empty output") {
    FeatureSet empty;
    empty.width = empty.height = 10;
    const FeatureSet full = random_set(3, 10, 5);
    CHECK(match_descriptors(empty, full, 0.76).empty());
    CHECK(match_descriptors(full, empty, 0.76).empty());
}

TEST_CASE("trim_matches keeps perfect parallel sets intact") {
    std::vector<MatchPair> pairs;
    for (int i = 0; i < 10; ++i) pairs.push_back(line(5.0, 120.0, i, i));
    const MatchResult result = trim_matches(pairs, 18.0, 0.14);
    CHECK(result.score == 10);
    CHECK(result.pairs.size() == 10);
    CHECK(result.length_p == doctest::Approx(120.0));
    CHECK(std::abs(result.theta_p - 5.0) <= 9.0 + 1e-12);
}

TEST_CASE("trim_matches removes angular outliers") {
    std::vector<MatchPair> pairs;
    for (int i = 0; i < 8; ++i) pairs.push_back(line(0.0, 100.0, i, i));
    pairs.push_back(line(45.0, 100.0, 8, 8));
    pairs.push_back(line(45.0, 95.0, 9, 9));
    const MatchResult result = trim_matches(pairs, 18.0, 0.14);
    CHECK(result.score == 8);
    for (const MatchPair& p : result.pairs) {
        CHECK(p.index_a < 8);
        CHECK(std::abs(p.line_angle - result.theta_p) < 18.0);
        CHECK(std::abs(p.line_length / result.length_p - 1.0) < 0.14);
    }
}

TEST_CASE("trim_matches removes length outliers") {
    std::vector<MatchPair> pairs;
    for (int i = 0; i < 6; ++i) pairs.push_back(line(2.0, 200.0, i, i));
    pairs.push_back(line(2.0, 400.0, 6, 6)); // parallel but twice as long
    const MatchResult result = trim_matches(pairs, 18.0, 0.14);
    CHECK(result.score == 6);
}

TEST_CASE("trim_matches on empty input") {
    const MatchResult result = trim_matches({}, 18.0, 0.14);
    CHECK(result.score == 0);
    CHECK(result.pairs.empty());
}

TEST_CASE("trimming properties") {
    std::mt19937 rng(9);
    std::uniform_real_distribution<double> angle(-80.0, 80.0);
    std::uniform_real_distribution<double> length(50.0, 400.0);
    std::vector<MatchPair> pairs;
    for (int i = 0; i < 60; ++i) pairs.push_back(line(angle(rng), length(rng), i, i));
    for (int i = 0; i < 25; ++i) pairs.push_back(line(10.0 + 0.1 * i, 200.0 + i, 100 + i, i));

    const MatchResult base = trim_matches(pairs, 18.0, 0.14);
    CHECK(base.score <= static_cast<int>(pairs.size()));

    // Retained pairs are a subset of the input and satisfy both predicates.
    std::set<int> input_ids;
    for (const MatchPair& p : pairs) input_ids.insert(p.index_a);
    for (const MatchPair& p : base.pairs) {
        CHECK(input_ids.count(p.index_a) == 1);
        CHECK(std::abs(p.line_angle - base.theta_p) < 18.0);
        CHECK(std::abs(p.line_length / base.length_p - 1.0) < 0.14);
    }

    // Shrinking either tolerance never increases the score.
    int prev = base.score;
    for (double at : {12.0, 6.0, 2.0}) {
        const int score = trim_matches(pairs, at, 0.14).score;
        CHECK(score <= prev);
        prev = score;
    }
    prev = base.score;
    for (double lt : {0.10, 0.05, 0.01}) {
        const int score = trim_matches(pairs, 18.0, lt).score;
        CHECK(score <= prev);
        prev = score;
    }
}

TEST_CASE("sift_match score modes") {
    const GrayImage img = irisift::test::make_texture(128, 128, 51);
    SiftParams params;
    const FeatureSet f = detect_and_describe(img, params);
    REQUIRE(f.items.size() >= 5);

    // Self-match: expected score = keypoints with a unique nearest neighbor
    // (exact duplicates are ambiguous under the ratio test); all self-match
    // lines are horizontal with identical lengths, so trimming keeps them.
    const auto raw = match_descriptors(f, f, params.ratio_threshold);
    const MatchResult self = sift_match(f, f, params);
    CHECK(self.score == static_cast<int>(raw.size()));
    CHECK(self.score >= 1);

    SiftParams no_trim = params;
    no_trim.trimming = false;
    const MatchResult pre = sift_match(f, f, no_trim);
    CHECK(pre.score == static_cast<int>(raw.size()));
    CHECK_FALSE(pre.trimmed);

    // Trimming never increases the score.
    CHECK(self.score <= pre.score);
}

TEST_CASE("match dump format") {
    TempDir dir("dump");
    std::vector<MatchPair> pairs{line(1.0, 100.0, 3, 4), line(2.0, 101.0, 5, 6)};
    const MatchResult result = trim_matches(pairs, 18.0, 0.14);
    const std::string path = dir.file("m.txt");
    save_match_dump(result, path);

    std::ifstream in(path);
    std::string header;
    REQUIRE(std::getline(in, header));
    CHECK(header.find("# theta_p=") == 0);
    CHECK(header.find("l_p=") != std::string::npos);
    CHECK(header.find("score=2") != std::string::npos);
    int ia, ib;
    double ratio, theta, len;
    REQUIRE((in >> ia >> ib >> ratio >> theta >> len));
    CHECK(ia == 3);
    CHECK(ib == 4);
}
