#pragma once

#include <string>
#include <vector>

#include <irisift/keypoints.hpp>

namespace irisift {

/// One accepted nearest-neighbor correspondence. Line geometry is computed in
/// the side-by-side layout: endpoint A = (x_a, y_a), endpoint
/// B = (x_b + width of image 1, y_b).
struct MatchPair {
    int index_a = 0;
    int index_b = 0;
    double ratio = 0.0;       ///< d1/d2
    double line_angle = 0.0;  ///< theta, degrees in (-90, 90]
    double line_length = 0.0; ///< pixels
};

struct MatchResult {
    std::vector<MatchPair> pairs; ///< retained pairs
    double theta_p = 0.0;         ///< predominant angle (degrees)
    double length_p = 0.0;        ///< predominant length (pixels)
    bool trimmed = false;
    int score = 0; ///< count of retained pairs
};

/// Lowe ratio-test matching: for each descriptor of set_a, the nearest and
/// second nearest neighbors in set_b are found by Euclidean distance and the
/// pair is kept iff d1/d2 < ratio_threshold. A single-element set_b acts as
/// d2 = +infinity. Degenerate descriptors never participate. Nearest-distance
/// ties resolve to the lower index in set_b.
std::vector<MatchPair> match_descriptors(const FeatureSet& set_a, const FeatureSet& set_b,
                                         double ratio_threshold);

/// Geometric trimming: the predominant angle theta_P is the center of the
/// densest angle_tol-wide sliding window over pair angles, length_P is the
/// median length within that window, and only pairs with
/// |theta - theta_P| < angle_tol and |l/length_P - 1| < length_tol survive.
MatchResult trim_matches(const std::vector<MatchPair>& pairs, double angle_tol_deg,
                         double length_tol);

/// Ratio-test matching followed by trimming (when params.trimming is set);
/// the score is the retained pair count. Direction is fixed: a is the
/// template, b the probe.
MatchResult sift_match(const FeatureSet& a, const FeatureSet& b, const SiftParams& params);

/// Convenience: sift_match(...).score.
int sift_score(const FeatureSet& a, const FeatureSet& b, const SiftParams& params);

/// Debug dump: `# theta_p=<v> l_p=<v> score=<n>` then one `ia ib ratio theta l`
/// line per retained pair.
void save_match_dump(const MatchResult& result, const std::string& path);

} // namespace irisift
