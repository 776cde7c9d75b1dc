// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. Each criterion pins its tolerances in code.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numbers>
#include <cstdio>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <irisift/baseline.hpp>
#include <irisift/fusion.hpp>
#include <irisift/harness.hpp>
#include <irisift/keypoints.hpp>
#include <irisift/matching.hpp>
#include <irisift/scale_space.hpp>
#include <irisift/segmentation.hpp>

#include "support/oracles.hpp"
#include "support/synthetic.hpp"

using namespace irisift;
using irisift::test::EyeSpec;
using irisift::test::TempDir;

namespace {

struct Check {
    std::ostringstream log;
    bool ok = true;

    void require(bool condition, const std::string& message) {
        if (!condition) {
            ok = false;
            log << "    FAILED: " << message << "\n";
        }
    }
    template <typename T>
    void equal(T actual, T expected, const std::string& message) {
        if (!(actual == expected)) {
            ok = false;
            log << "    FAILED: " << message << " (actual " << actual << ", expected " << expected
                << ")\n";
        }
    }
    void close(double actual, double expected, double tol, const std::string& message) {
        if (!(std::abs(actual - expected) <= tol)) {
            ok = false;
            log << "    FAILED: " << message << " (actual " << actual << ", expected " << expected
                << " +/- " << tol << ")\n";
        }
    }
};

GrayImage random_image(int w, int h, unsigned seed) {
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> dist(0.0, 1.0);
    GrayImage img = GrayImage::filled(w, h);
    for (double& p : img.pixels) p = dist(rng);
    return img;
}

// ---------------------------------------------------------------- criterion 1
// Pyramid oracle: every DoG pixel equals the difference of two dense 2D
// convolution chains within 1e-5; 6 gaussians / 5 DoGs per octave for s=3.
void criterion_pyramid_oracle(Check& c) {
    const GrayImage img = random_image(64, 64, 2024);
    const SiftParams params;
    const ScaleSpace space = build_scale_space(img, params);
    const auto dense = irisift::test::dense_gaussian_pyramid(img, params);

    c.equal(space.octaves.size(), dense.size(), "octave count");
    double worst = 0.0;
    for (size_t o = 0; o < space.octaves.size(); ++o) {
        const Octave& oct = space.octaves[o];
        c.equal(oct.gaussians.size(), size_t{6}, "gaussians per octave");
        c.equal(oct.dogs.size(), size_t{5}, "DoGs per octave");
        for (size_t l = 0; l < oct.dogs.size(); ++l) {
            const GrayImage& lo = dense[o][l];
            const GrayImage& hi = dense[o][l + 1];
            for (int y = 0; y < oct.height(); ++y) {
                for (int x = 0; x < oct.width(); ++x) {
                    const double expected = hi.at(x, y) - lo.at(x, y);
                    worst = std::max(worst, std::abs(oct.dogs[l].at(x, y) - expected));
                }
            }
        }
    }
    c.require(worst <= 1e-5, "max |DoG - dense oracle| = " + std::to_string(worst) + " > 1e-5");
    c.log << "    max deviation from dense chain: " << worst << "\n";
}

// ---------------------------------------------------------------- criterion 2
// SIFT invariance: self-score equals the matcher upper bound; 90-degree
// rotation keeps >=80% of keypoints within 1.5 px with descriptor distance
// < 0.35; 15-degree rotation + 3 px translation scores >= 50% of self-score
// while a disjoint texture scores <= 5%.
void criterion_sift_invariance(Check& c) {
    SiftParams params;
    const GrayImage img = irisift::test::make_texture(256, 256, 77, 14, 5);
    const FeatureSet base = detect_and_describe(img, params);
    c.require(base.items.size() >= 50, "expected a rich keypoint set on the texture");

    // Self-match upper bound: every non-degenerate keypoint with a unique
    // nearest neighbor; all self-match lines agree, so trimming keeps them.
    const int upper = static_cast<int>(match_descriptors(base, base, params.ratio_threshold).size());
    const int self_score = sift_score(base, base, params);
    c.equal(self_score, upper, "self-match score vs keypoint-pair upper bound");
    c.require(self_score >= 1, "self score must be at least 1");

    // 90-degree rotation correspondence.
    const GrayImage rotated = irisift::test::rotate90(img);
    const FeatureSet rot = detect_and_describe(rotated, params);
    int with_counterpart = 0;
    int close_descriptor = 0;
    for (const Feature& f : base.items) {
        double ex, ey;
        irisift::test::rotate90_point(f.keypoint.x, f.keypoint.y, img.width, ex, ey);
        double best_d = 1e18;
        const Feature* best = nullptr;
        for (const Feature& g : rot.items) {
            const double d = std::hypot(g.keypoint.x - ex, g.keypoint.y - ey);
            if (d < best_d) {
                best_d = d;
                best = &g;
            }
        }
        if (best && best_d <= 1.5) {
            ++with_counterpart;
            if (f.descriptor.distance(best->descriptor) < 0.35) ++close_descriptor;
        }
    }
    const double frac_pos = static_cast<double>(with_counterpart) / base.items.size();
    const double frac_desc = static_cast<double>(close_descriptor) / base.items.size();
    c.log << "    rot90: " << base.items.size() << " keypoints, counterpart within 1.5px: "
          << 100.0 * frac_pos << "%, descriptor < 0.35: " << 100.0 * frac_desc << "%\n";
    c.require(frac_pos >= 0.8, "fewer than 80% of keypoints have a rotated counterpart");
    c.require(frac_desc >= 0.8, "fewer than 80% of descriptors survive rotation");

    // Small transform vs disjoint texture.
    const GrayImage moved = irisift::test::rotate_translate(img, 15.0, 3.0, 0.0);
    const FeatureSet moved_f = detect_and_describe(moved, params);
    const int moved_score = sift_score(base, moved_f, params);

    const GrayImage other = irisift::test::make_texture(256, 256, 3001, 14, 5);
    const FeatureSet other_f = detect_and_describe(other, params);
    const int other_score = sift_score(base, other_f, params);

    c.log << "    self=" << self_score << " moved=" << moved_score << " disjoint=" << other_score
          << "\n";
    c.require(moved_score * 2 >= self_score,
              "15deg+3px score below 50% of self-score");
    c.require(other_score * 20 <= self_score, "disjoint texture scores above 5% of self-score");
}

// ---------------------------------------------------------------- criterion 3
// Trimming: on 200 synthetic match sets (parallel similar-length true lines
// plus outliers at >= 3*eps_theta angular offset), trimming removes >= 95% of
// outliers and <= 5% of true matches; trimming-on gives strictly lower EER.
void criterion_trimming(Check& c) {
    const double eps_theta = 18.0;
    const double eps_l = 0.14;
    std::mt19937 rng(555);
    std::uniform_real_distribution<double> base_angle(-20.0, 20.0);
    std::uniform_real_distribution<double> angle_jitter(-5.0, 5.0);
    std::uniform_real_distribution<double> length_jitter(0.95, 1.05);
    std::uniform_real_distribution<double> outlier_length(80.0, 500.0);
    std::uniform_int_distribution<int> true_count(12, 30);
    std::uniform_int_distribution<int> outlier_count(2, 8);
    std::uniform_int_distribution<int> impostor_count(3, 12);
    std::uniform_real_distribution<double> any_angle(-88.0, 88.0);

    long outliers_total = 0, outliers_kept = 0;
    long true_total = 0, true_kept = 0;
    ScoreSet trimmed_scores, raw_scores;

    for (int set = 0; set < 200; ++set) {
        std::vector<MatchPair> pairs;
        const double theta0 = base_angle(rng);
        const double l0 = 250.0;
        const int nt = true_count(rng);
        for (int i = 0; i < nt; ++i) {
            MatchPair p;
            p.index_a = i;
            p.index_b = i;
            p.line_angle = theta0 + angle_jitter(rng);
            p.line_length = l0 * length_jitter(rng);
            pairs.push_back(p);
        }
        const int no = outlier_count(rng);
        for (int i = 0; i < no; ++i) {
            MatchPair p;
            p.index_a = 1000 + i; // marks an injected outlier
            p.index_b = 1000 + i;
            const double sign = (i % 2 == 0) ? 1.0 : -1.0;
            p.line_angle =
                std::clamp(theta0 + sign * (3.0 * eps_theta + 10.0 * i), -89.0, 89.0);
            p.line_length = outlier_length(rng);
            pairs.push_back(p);
        }

        const MatchResult result = trim_matches(pairs, eps_theta, eps_l);
        int kept_outliers = 0, kept_true = 0;
        for (const MatchPair& p : result.pairs) {
            if (p.index_a >= 1000) ++kept_outliers;
            else ++kept_true;
        }
        outliers_total += no;
        outliers_kept += kept_outliers;
        true_total += nt;
        true_kept += kept_true;

        trimmed_scores.genuine_scores.push_back(result.score);
        raw_scores.genuine_scores.push_back(static_cast<double>(pairs.size()));

        // A matching impostor set: fewer, randomly oriented lines whose raw
        // counts overlap the genuine raw counts.
        std::vector<MatchPair> impostor;
        const int ni = impostor_count(rng);
        for (int i = 0; i < ni; ++i) {
            MatchPair p;
            p.index_a = i;
            p.index_b = i;
            p.line_angle = any_angle(rng);
            p.line_length = outlier_length(rng);
            impostor.push_back(p);
        }
        trimmed_scores.impostor_scores.push_back(trim_matches(impostor, eps_theta, eps_l).score);
        raw_scores.impostor_scores.push_back(static_cast<double>(impostor.size()));
    }

    const double outlier_removal = 1.0 - static_cast<double>(outliers_kept) / outliers_total;
    const double true_loss = 1.0 - static_cast<double>(true_kept) / true_total;
    c.log << "    outlier removal " << 100.0 * outlier_removal << "%, true-match loss "
          << 100.0 * true_loss << "%\n";
    c.require(outlier_removal >= 0.95, "trimming removed fewer than 95% of injected outliers");
    c.require(true_loss <= 0.05, "trimming removed more than 5% of true matches");

    const double eer_trimmed = compute_eer(trimmed_scores).eer;
    const double eer_raw = compute_eer(raw_scores).eer;
    c.log << "    EER trimming-on " << eer_trimmed << " vs trimming-off " << eer_raw << "\n";
    c.require(eer_trimmed < eer_raw, "trimming-on must give strictly lower EER than trimming-off");
}

// ---------------------------------------------------------------- criterion 4
void criterion_hough(Check& c) {
    std::mt19937 rng(4242);
    std::uniform_real_distribution<double> cx_dist(260.0, 380.0);
    std::uniform_real_distribution<double> cy_dist(180.0, 300.0);
    std::uniform_real_distribution<double> rp_dist(25.0, 70.0);
    std::uniform_real_distribution<double> ri_dist(90.0, 150.0);

    for (int draw = 0; draw < 20; ++draw) {
        const double cx = std::round(cx_dist(rng));
        const double cy = std::round(cy_dist(rng));
        const double rp = std::round(rp_dist(rng));
        const double ri = std::round(ri_dist(rng));

        GrayImage img = GrayImage::filled(640, 480, 0.9);
        for (int y = 0; y < 480; ++y) {
            for (int x = 0; x < 640; ++x) {
                const double d = std::hypot(x - cx, y - cy);
                if (d <= rp) img.at(x, y) = 0.05;
                else if (d <= ri) img.at(x, y) = 0.45;
            }
        }
        try {
            const IrisAnnulus annulus = detect_circles(img);
            c.close(annulus.pupil.cx, cx, 2.0, "pupil cx, draw " + std::to_string(draw));
            c.close(annulus.pupil.cy, cy, 2.0, "pupil cy, draw " + std::to_string(draw));
            c.close(annulus.pupil.radius, rp, 2.0, "pupil r, draw " + std::to_string(draw));
            c.close(annulus.iris.cx, cx, 2.0, "iris cx, draw " + std::to_string(draw));
            c.close(annulus.iris.cy, cy, 2.0, "iris cy, draw " + std::to_string(draw));
            c.close(annulus.iris.radius, ri, 2.0, "iris r, draw " + std::to_string(draw));
        } catch (const Error& e) {
            c.require(false, "segmentation threw on draw " + std::to_string(draw) + ": " +
                                 e.what());
        }
    }
}

// ---------------------------------------------------------------- criterion 5
void criterion_baseline_codes(Check& c) {
    // Gray-code adjacency across all four quadrant boundaries.
    auto bits_at = [](double deg) {
        const double rad = deg * std::numbers::pi / 180.0;
        return phase_quadrant_bits(std::cos(rad), std::sin(rad));
    };
    for (double boundary : {0.0, 90.0, 180.0, 270.0}) {
        const auto before = bits_at(boundary - 1e-7);
        const auto after = bits_at(boundary + 1e-7);
        const int flips =
            (before.first != after.first) + (before.second != after.second);
        c.equal(flips, 1, "gray adjacency at " + std::to_string(boundary) + " degrees");
    }

    auto random_code = [](unsigned seed) {
        std::mt19937 rng(seed);
        IrisCode code;
        code.radial_res = 20;
        code.angular_res = 240;
        code.bits.resize(2 * 20 * 240);
        code.mask.assign(code.bits.size(), 1);
        for (char& b : code.bits) b = static_cast<char>(rng() & 1);
        return code;
    };

    const IrisCode a = random_code(1);
    c.require(hamming_match(a, a, 8) == 0.0, "hamming_match(a,a) must be 0");

    // Rotation recovery.
    IrisCode rotated = a;
    const int n = a.angular_res;
    for (int row = 0; row < a.radial_res; ++row) {
        for (int col = 0; col < n; ++col) {
            const int src = (col + 3) % n;
            for (int bit = 0; bit < 2; ++bit) {
                rotated.bits[(static_cast<size_t>(row) * n + col) * 2 + bit] =
                    a.bits[(static_cast<size_t>(row) * n + src) * 2 + bit];
            }
        }
    }
    c.require(hamming_match(a, rotated, 8) == 0.0, "3-column rotation must recover HD 0");

    // 100 random pairs: min-over-shifts HD within [0.42, 0.50].
    double lo = 1.0, hi = 0.0;
    for (unsigned pair = 0; pair < 100; ++pair) {
        const IrisCode x = random_code(1000 + pair);
        const IrisCode y = random_code(5000 + pair);
        const double hd = hamming_match(x, y, 8);
        lo = std::min(lo, hd);
        hi = std::max(hi, hd);
    }
    c.log << "    random-pair HD range: [" << lo << ", " << hi << "]\n";
    c.require(lo >= 0.42, "random-pair HD fell below 0.42");
    c.require(hi <= 0.50, "random-pair HD exceeded 0.50");
}

// ---------------------------------------------------------------- criterion 6
void criterion_protocol_counts(Check& c) {
    auto manifest_for = [](int individuals) {
        DatasetManifest manifest;
        for (int u = 0; u < individuals; ++u) {
            for (int e = 0; e < 2; ++e) {
                for (int session = 1; session <= 2; ++session) {
                    for (int sample = 1; sample <= 4; ++sample) {
                        ManifestEntry entry;
                        entry.user_id = "u" + std::to_string(1000 + u);
                        entry.eye = e == 0 ? Eye::Left : Eye::Right;
                        entry.session = session;
                        entry.sample = sample;
                        entry.image_path = "x.pgm";
                        manifest.entries.push_back(entry);
                    }
                }
            }
        }
        return manifest;
    };
    const TrialSet dev = enumerate_trials(manifest_for(50));
    c.equal(dev.genuine.size(), size_t{1600}, "development genuine count");
    c.equal(dev.impostor.size(), size_t{19600}, "development impostor count");
    const TrialSet test = enumerate_trials(manifest_for(150));
    c.equal(test.genuine.size(), size_t{4800}, "test genuine count");
    c.equal(test.impostor.size(), size_t{178800}, "test impostor count");
}

// ---------------------------------------------------------------- criterion 7
void criterion_metric_oracles(Check& c) {
    std::mt19937 rng(20240809);
    std::uniform_int_distribution<int> size_dist(2, 60);
    std::uniform_int_distribution<int> mode_dist(0, 2);
    std::uniform_real_distribution<double> uniform(0.0, 1.0);
    std::normal_distribution<double> gauss(0.5, 0.25);

    double worst = 0.0;
    for (int i = 0; i < 1000; ++i) {
        ScoreSet set;
        const int mode = mode_dist(rng);
        auto draw = [&]() {
            if (mode == 0) return uniform(rng);
            if (mode == 1) return gauss(rng);
            return std::round(uniform(rng) * 6.0) / 6.0;
        };
        const int ng = size_dist(rng), ni = size_dist(rng);
        for (int g = 0; g < ng; ++g) set.genuine_scores.push_back(draw());
        for (int s = 0; s < ni; ++s) set.impostor_scores.push_back(draw());

        const double eer = compute_eer(set).eer;
        const double oracle = irisift::test::eer_oracle(set);
        worst = std::max(worst, std::abs(eer - oracle));

        // Rank invariance under tanh normalization, exact equality.
        const FusionParams p{0.5, 1.0};
        ScoreSet normalized;
        for (double s : set.genuine_scores) {
            normalized.genuine_scores.push_back(tanh_normalize(s, p));
        }
        for (double s : set.impostor_scores) {
            normalized.impostor_scores.push_back(tanh_normalize(s, p));
        }
        if (compute_eer(normalized).eer != eer) {
            c.require(false, "EER changed under tanh normalization at set " + std::to_string(i));
            return;
        }
    }
    c.log << "    max |EER - oracle| over 1000 sets: " << worst << "\n";
    c.require(worst <= 1e-9, "EER oracle deviation exceeded 1e-9");

    const FusionParams p{12.5, 3.0};
    c.require(tanh_normalize(12.5, p) == 0.5, "tanh_normalize(mu) must equal 0.5 exactly");
}

// ---------------------------------------------------------------- criterion 8
// End-to-end smoke: 4 synthetic eyes x 2 sessions x 4 samples; fused EER must
// not exceed the better single channel (equality allowed when a channel is
// already perfect).
void criterion_end_to_end(Check& c) {
    TempDir dir("accept8");
    DatasetManifest manifest;
    for (int u = 0; u < 4; ++u) {
        for (int session = 1; session <= 2; ++session) {
            for (int sample = 1; sample <= 4; ++sample) {
                const int shot = (session - 1) * 4 + (sample - 1);
                EyeSpec spec;
                spec.cx = 160.0 + ((shot * 5 + u * 3) % 5) - 2;
                spec.cy = 120.0 + ((shot * 7 + u) % 5) - 2;
                spec.pupil_r = 30.0;
                spec.iris_r = 75.0;
                spec.texture_seed = 42 + static_cast<unsigned>(u);
                spec.rotation_deg = ((shot * 13) % 9) - 4.0;
                spec.noise_seed = static_cast<unsigned>(31 * u + shot + 1);
                spec.noise_amp = 0.015;
                const GrayImage img = irisift::test::render_eye(320, 240, spec);

                ManifestEntry entry;
                entry.user_id = "eye" + std::to_string(u);
                entry.eye = Eye::Left;
                entry.session = session;
                entry.sample = sample;
                const std::string stem =
                    entry.user_id + "_s" + std::to_string(session) + "_" + std::to_string(sample);
                entry.image_path = dir.file(stem + ".pgm");
                entry.annulus_path = dir.file(stem + ".ann");
                save_pgm(img, entry.image_path);
                IrisAnnulus annulus;
                annulus.pupil = {spec.cx, spec.cy, spec.pupil_r};
                annulus.iris = {spec.cx, spec.cy, spec.iris_r};
                save_annulus(annulus, entry.annulus_path);
                manifest.entries.push_back(entry);
            }
        }
    }

    RunConfig config;
    config.features_dir = (dir.path() / "features").string();
    config.fusion_params_path = dir.file("fusion.params");

    std::ostringstream log;
    const BatchSummary summary = cmd_extract(config, manifest, log);
    c.equal(summary.processed, 32, "all 32 images extract");
    c.require(summary.ok(), "extraction reported failures: " + log.str());

    cmd_fit_fusion(config, manifest, log);
    const double sift_eer = cmd_evaluate(config, manifest, Matcher::Sift, log).eer.eer;
    const double base_eer = cmd_evaluate(config, manifest, Matcher::Baseline, log).eer.eer;
    const double fused_eer = cmd_evaluate(config, manifest, Matcher::Fusion, log).eer.eer;

    c.log << "    sift EER=" << sift_eer << " baseline EER=" << base_eer
          << " fused EER=" << fused_eer << "\n";
    c.require(fused_eer <= std::min(sift_eer, base_eer) + 1e-12,
              "fused EER must not exceed the better channel on the toy set");
}

} // namespace

int main() {
    struct Criterion {
        const char* name;
        std::function<void(Check&)> run;
    };
    const std::vector<Criterion> criteria{
        {"1. pyramid dense-convolution oracle", criterion_pyramid_oracle},
        {"2. SIFT invariance suite", criterion_sift_invariance},
        {"3. trimming of false matches", criterion_trimming},
        {"4. circular Hough oracle", criterion_hough},
        {"5. baseline code suite", criterion_baseline_codes},
        {"6. protocol trial counts", criterion_protocol_counts},
        {"7. metric oracles", criterion_metric_oracles},
        {"8. end-to-end fusion smoke", criterion_end_to_end},
    };

    int failures = 0;
    for (const Criterion& criterion : criteria) {
        Check check;
        const auto start = std::chrono::steady_clock::now();
        try {
            criterion.run(check);
        } catch (const std::exception& e) {
            check.ok = false;
            check.log << "    exception: " << e.what() << "\n";
        }
        const double seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        std::printf("[%s] %s (%.1fs)\n", check.ok ? "PASS" : "FAIL", criterion.name, seconds);
        std::fputs(check.log.str().c_str(), stdout);
        if (!check.ok) ++failures;
    }
    if (failures > 0) {
        std::printf("%d criterion(s) failed\n", failures);
    } else {
        std::printf("all %zu criteria passed\n", criteria.size());
    }
    return failures;
}
