#pragma once

#include <optional>
#include <string>
#include <vector>

#include <irisift/errors.hpp>

namespace irisift {

enum class Eye { Left, Right };

std::string to_string(Eye eye);

/// One dataset image: (user, eye, session, sample) plus where to find it.
struct ManifestEntry {
    std::string user_id;
    Eye eye = Eye::Left;
    int session = 1; // 1 or 2
    int sample = 1;  // 1..4
    std::string image_path;
    std::string annulus_path; // optional, empty = automatic segmentation

    /// Stable identifier used in score files and artifact names.
    std::string id() const;
};

struct DatasetManifest {
    std::vector<ManifestEntry> entries;

    /// Checks tuple uniqueness and that every (user, eye) present carries all
    /// 4 samples of both sessions; throws ValidationError listing what is
    /// missing.
    void validate() const;
};

/// Whitespace-delimited manifest rows: `user_id eye session sample image_path
/// [annulus_path]`; '#' starts a comment line. eye accepts left/right/L/R.
DatasetManifest load_manifest(const std::string& path);

/// A template/probe comparison, as indexes into the manifest entries.
struct Trial {
    int template_index = 0;
    int probe_index = 0;
};

struct TrialSet {
    std::vector<Trial> genuine;
    std::vector<Trial> impostor;
};

/// Verification protocol: genuine trials pair all session-1 samples with all
/// session-2 samples of the same (user, eye); impostor trials pair each
/// session-1 sample with sample 1 of session 2 of the same eye of every other
/// user. Each eye is a distinct enrolled identity.
TrialSet enumerate_trials(const DatasetManifest& manifest);

/// Score distributions with higher-is-genuine polarity.
struct ScoreSet {
    std::vector<double> genuine_scores;
    std::vector<double> impostor_scores;
};

/// Genuine-score statistics of one matcher, fitted on a development split.
struct FusionParams {
    double mu = 0.0;
    double sigma = 1.0;

    void validate() const;
};

/// Sample mean and unbiased standard deviation of genuine scores.
FusionParams fit_fusion_params(const std::vector<double>& genuine_scores);

/// s^t = 0.5 * (tanh(0.01 * (s - mu)/sigma) + 1), in (0,1).
double tanh_normalize(double score, const FusionParams& params);

/// Sum-rule fusion of the two channels; the baseline Hamming distance is
/// converted to the similarity 1 - HD before normalization. Range (0,2).
double fuse_scores(double sift_score, double baseline_hd, const FusionParams& p_sift,
                   const FusionParams& p_base);

struct EerResult {
    double eer = 0.0;
    double threshold = 0.0;
};

/// Equal error rate by sweeping the observed scores: FAR(t) = fraction of
/// impostor scores >= t, FRR(t) = fraction of genuine scores < t, linearly
/// interpolated where FAR - FRR changes sign.
EerResult compute_eer(const ScoreSet& scores);

struct DetPoint {
    double threshold = 0.0;
    double far = 0.0;
    double frr = 0.0;
};

/// DET curve samples, one per distinct threshold (descending), endpoints
/// (FAR,FRR) = (0,1) and (1,0) included.
std::vector<DetPoint> det_points(const ScoreSet& scores);

// ---- score / parameter file formats ----

struct ScoreRecord {
    std::string template_id;
    std::string probe_id;
    bool genuine = false;
    double score = 0.0;
};

/// Lines `template_id probe_id label score`, label in {genuine, impostor}.
void save_scores(const std::vector<ScoreRecord>& records, const std::string& path);
std::vector<ScoreRecord> load_scores(const std::string& path);
ScoreSet to_score_set(const std::vector<ScoreRecord>& records);

/// Lines `threshold far frr`.
void save_det(const std::vector<DetPoint>& points, const std::string& path);

/// Fitted fusion parameters for the two matchers.
struct FittedFusion {
    FusionParams sift;
    FusionParams baseline; // over 1 - HD similarities

    void validate() const;
};

void save_fusion_params(const FittedFusion& fitted, const std::string& path);
FittedFusion load_fusion_params(const std::string& path);

} // namespace irisift
