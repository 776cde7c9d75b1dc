#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <irisift/baseline.hpp>
#include <irisift/fusion.hpp>
#include <irisift/matching.hpp>
#include <irisift/scale_space.hpp>
#include <irisift/segmentation.hpp>

namespace irisift {

/// Everything a batch run needs; CLI flags and the config file map 1:1 onto
/// these fields.
struct RunConfig {
    SiftParams sift;
    BaselineParams baseline;
    CircleSearch search;
    std::string features_dir;       ///< where .keys/.code artifacts live
    std::string fusion_params_path; ///< fitted fusion parameters file
};

struct BatchSummary {
    int processed = 0;
    int skipped = 0; ///< missing inputs or segmentation failures
    int failed = 0;  ///< unexpected per-entry errors

    bool ok() const { return skipped == 0 && failed == 0; }
};

/// Artifact locations for one manifest entry.
std::string features_path(const std::string& dir, const ManifestEntry& entry);
std::string iris_code_path(const std::string& dir, const ManifestEntry& entry);

/// Extraction pass: segments (manual annulus file if given, Hough otherwise),
/// writes the mask-filtered keypoint file and the iris code per entry.
/// Outputs are written atomically and reruns produce identical bytes.
BatchSummary cmd_extract(const RunConfig& config, const DatasetManifest& manifest,
                         std::ostream& log);

/// Scores the genuine development trials with both matchers and fits the
/// tanh-normalization statistics; writes them to config.fusion_params_path
/// when set.
FittedFusion cmd_fit_fusion(const RunConfig& config, const DatasetManifest& manifest,
                            std::ostream& log);

enum class Matcher { Sift, Baseline, Fusion };

Matcher parse_matcher(const std::string& name);

struct EvaluateResult {
    std::vector<ScoreRecord> records;
    EerResult eer;
    std::vector<DetPoint> det;
};

/// Scores every protocol trial with the selected matcher. Baseline scores are
/// similarities 1 - HD; fusion requires previously fitted parameters.
EvaluateResult cmd_evaluate(const RunConfig& config, const DatasetManifest& manifest,
                            Matcher matcher, std::ostream& log);

/// One contrast-threshold setting of the sweep; keypoints depend on D, so
/// each D has its own extraction directory.
struct SweepEntry {
    std::string label;        ///< as given on the command line
    std::string features_dir; ///< extraction artifacts for this D
};

struct SweepRow {
    std::string d_label;
    bool trimming = true;
    double angle_tol_deg = 0.0;
    double length_tol = 0.0;
    double eer = 0.0;
    bool best = false;
};

/// EER over the (D, angle tolerance, length tolerance) grid. Descriptor
/// matches are computed once per D and re-trimmed per tolerance pair; the
/// no-trimming row scores the raw pair count. The lowest-EER row is marked.
std::vector<SweepRow> cmd_sweep(const RunConfig& config, const DatasetManifest& manifest,
                                const std::vector<SweepEntry>& d_entries,
                                const std::vector<double>& angle_grid,
                                const std::vector<double>& length_grid, bool include_no_trim,
                                std::ostream& log);

} // namespace irisift
