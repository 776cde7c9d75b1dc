#include <irisift/matching.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numbers>

namespace irisift {

std::vector<MatchPair> match_descriptors(const FeatureSet& set_a, const FeatureSet& set_b,
                                         double ratio_threshold) {
    if (!(ratio_threshold > 0.0 && ratio_threshold <= 1.0)) {
        throw ParamError("match_descriptors: ratio_threshold must be in (0,1]");
    }
    std::vector<MatchPair> out;
    if (set_a.items.empty() || set_b.items.empty()) return out;

    for (size_t ia = 0; ia < set_a.items.size(); ++ia) {
        const Feature& fa = set_a.items[ia];
        if (fa.descriptor.degenerate()) continue;

        double d1 = std::numeric_limits<double>::infinity();
        double d2 = std::numeric_limits<double>::infinity();
        int best = -1;
        for (size_t ib = 0; ib < set_b.items.size(); ++ib) {
            const Feature& fb = set_b.items[ib];
            if (fb.descriptor.degenerate()) continue;
            const double d = fa.descriptor.distance(fb.descriptor);
            if (d < d1) {
                d2 = d1;
                d1 = d;
                best = static_cast<int>(ib);
            } else if (d < d2) {
                d2 = d;
            }
        }
        if (best < 0) continue;

        double ratio;
        if (std::isinf(d2)) {
            ratio = 0.0; // only one candidate in set_b
        } else if (d2 > 0.0) {
            ratio = d1 / d2;
        } else {
            ratio = 1.0; // exact duplicates in set_b: ambiguous
        }
        if (ratio >= ratio_threshold) continue;

        const Keypoint& ka = fa.keypoint;
        const Keypoint& kb = set_b.items[static_cast<size_t>(best)].keypoint;
        const double dx = (kb.x + set_a.width) - ka.x;
        const double dy = kb.y - ka.y;
        MatchPair pair;
        pair.index_a = static_cast<int>(ia);
        pair.index_b = best;
        pair.ratio = ratio;
        pair.line_angle = std::atan2(dy, dx) * 180.0 / std::numbers::pi; // dx > 0
        pair.line_length = std::hypot(dx, dy);
        out.push_back(pair);
    }
    return out;
}

MatchResult trim_matches(const std::vector<MatchPair>& pairs, double angle_tol_deg,
                         double length_tol) {
    MatchResult result;
    result.trimmed = true;
    if (pairs.empty()) return result;

    // Densest sliding window of width angle_tol over the sorted angles,
    // anchored at data points; ties resolve to the lowest anchor.
    std::vector<double> angles;
    angles.reserve(pairs.size());
    for (const MatchPair& p : pairs) angles.push_back(p.line_angle);
    std::sort(angles.begin(), angles.end());

    size_t best_lo = 0, best_hi = 0; // [lo, hi] inclusive index range
    size_t hi = 0;
    for (size_t lo = 0; lo < angles.size(); ++lo) {
        if (hi < lo) hi = lo;
        while (hi + 1 < angles.size() && angles[hi + 1] <= angles[lo] + angle_tol_deg) ++hi;
        if (hi - lo > best_hi - best_lo) {
            best_lo = lo;
            best_hi = hi;
        }
    }
    result.theta_p = angles[best_lo] + angle_tol_deg / 2.0;

    std::vector<double> window_lengths;
    for (const MatchPair& p : pairs) {
        if (p.line_angle >= angles[best_lo] && p.line_angle <= angles[best_lo] + angle_tol_deg) {
            window_lengths.push_back(p.line_length);
        }
    }
    std::sort(window_lengths.begin(), window_lengths.end());
    const size_t n = window_lengths.size();
    result.length_p = (n % 2 == 1) ? window_lengths[n / 2]
                                   : 0.5 * (window_lengths[n / 2 - 1] + window_lengths[n / 2]);

    for (const MatchPair& p : pairs) {
        if (std::abs(p.line_angle - result.theta_p) < angle_tol_deg &&
            std::abs(p.line_length / result.length_p - 1.0) < length_tol) {
            result.pairs.push_back(p);
        }
    }
    result.score = static_cast<int>(result.pairs.size());
    return result;
}

MatchResult sift_match(const FeatureSet& a, const FeatureSet& b, const SiftParams& params) {
    std::vector<MatchPair> pairs = match_descriptors(a, b, params.ratio_threshold);
    if (!params.trimming) {
        MatchResult result;
        result.score = static_cast<int>(pairs.size()); // pre-trim count
        result.pairs = std::move(pairs);
        return result;
    }
    return trim_matches(pairs, params.angle_tolerance_deg, params.length_tolerance);
}

int sift_score(const FeatureSet& a, const FeatureSet& b, const SiftParams& params) {
    return sift_match(a, b, params).score;
}

void save_match_dump(const MatchResult& result, const std::string& path) {
    std::ofstream out(path);
    if (!out) {
        throw IoError("cannot write file: " + path);
    }
    out << std::setprecision(6);
    out << "# theta_p=" << result.theta_p << " l_p=" << result.length_p
        << " score=" << result.score << "\n";
    for (const MatchPair& p : result.pairs) {
        out << p.index_a << " " << p.index_b << " " << p.ratio << " " << p.line_angle << " "
            << p.line_length << "\n";
    }
    if (!out) {
        throw IoError("short write: " + path);
    }
}

} // namespace irisift
