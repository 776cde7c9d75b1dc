#include <irisift/fusion.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>

namespace irisift {

std::string to_string(Eye eye) {
    return eye == Eye::Left ? "left" : "right";
}

namespace {

Eye parse_eye(const std::string& token, const std::string& context) {
    if (token == "left" || token == "L" || token == "l") return Eye::Left;
    if (token == "right" || token == "R" || token == "r") return Eye::Right;
    throw FormatError("bad eye '" + token + "' in " + context);
}

} // namespace

std::string ManifestEntry::id() const {
    std::ostringstream os;
    os << user_id << "_" << to_string(eye) << "_s" << session << "_" << sample;
    return os.str();
}

void DatasetManifest::validate() const {
    // key: (user, eye) -> seen (session, sample) pairs
    std::map<std::pair<std::string, int>, std::vector<bool>> seen;
    for (const ManifestEntry& e : entries) {
        if (e.session < 1 || e.session > 2 || e.sample < 1 || e.sample > 4) {
            throw ValidationError("manifest entry " + e.id() +
                                  ": session must be 1..2 and sample 1..4");
        }
        auto& slots = seen[{e.user_id, static_cast<int>(e.eye)}];
        if (slots.empty()) slots.assign(8, false);
        const size_t slot = static_cast<size_t>((e.session - 1) * 4 + (e.sample - 1));
        if (slots[slot]) {
            throw ValidationError("duplicate manifest tuple: " + e.id());
        }
        slots[slot] = true;
    }
    std::string missing;
    for (const auto& [key, slots] : seen) {
        for (int session = 1; session <= 2; ++session) {
            for (int sample = 1; sample <= 4; ++sample) {
                if (!slots[static_cast<size_t>((session - 1) * 4 + (sample - 1))]) {
                    missing += " (" + key.first + "," +
                               to_string(static_cast<Eye>(key.second)) + ",s" +
                               std::to_string(session) + "," + std::to_string(sample) + ")";
                }
            }
        }
    }
    if (!missing.empty()) {
        throw ValidationError("incomplete manifest, missing tuples:" + missing);
    }
}

DatasetManifest load_manifest(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open file: " + path);
    }
    DatasetManifest manifest;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ls(line);
        ManifestEntry e;
        std::string eye_tok;
        if (!(ls >> e.user_id >> eye_tok >> e.session >> e.sample >> e.image_path)) {
            throw FormatError("bad manifest line " + std::to_string(line_no) + " in: " + path);
        }
        e.eye = parse_eye(eye_tok, path + ":" + std::to_string(line_no));
        ls >> e.annulus_path; // optional
        manifest.entries.push_back(std::move(e));
    }
    return manifest;
}

TrialSet enumerate_trials(const DatasetManifest& manifest) {
    manifest.validate();

    // (user, eye) -> entry index per (session, sample)
    std::map<std::pair<std::string, int>, std::array<int, 8>> index;
    for (size_t i = 0; i < manifest.entries.size(); ++i) {
        const ManifestEntry& e = manifest.entries[i];
        auto [it, inserted] = index.try_emplace({e.user_id, static_cast<int>(e.eye)});
        if (inserted) it->second.fill(-1);
        it->second[static_cast<size_t>((e.session - 1) * 4 + (e.sample - 1))] =
            static_cast<int>(i);
    }

    TrialSet trials;
    for (const auto& [key, slots] : index) {
        // Genuine: every session-1 sample against every session-2 sample.
        for (int t = 0; t < 4; ++t) {
            for (int p = 0; p < 4; ++p) {
                trials.genuine.push_back({slots[static_cast<size_t>(t)],
                                          slots[static_cast<size_t>(4 + p)]});
            }
        }
        // Impostor: every session-1 sample against sample 1 of session 2 of
        // the same eye of every other user.
        for (int t = 0; t < 4; ++t) {
            for (const auto& [other_key, other_slots] : index) {
                if (other_key.first == key.first) continue; // same individual
                if (other_key.second != key.second) continue; // other eye
                trials.impostor.push_back({slots[static_cast<size_t>(t)], other_slots[4]});
            }
        }
    }
    return trials;
}

void FusionParams::validate() const {
    if (!(sigma > 0.0)) {
        throw ParamError("FusionParams: sigma must be > 0");
    }
}

FusionParams fit_fusion_params(const std::vector<double>& genuine_scores) {
    if (genuine_scores.size() < 2) {
        throw ParamError("fit_fusion_params: need at least 2 genuine scores");
    }
    double mean = 0.0;
    for (double s : genuine_scores) mean += s;
    mean /= static_cast<double>(genuine_scores.size());
    double ss = 0.0;
    for (double s : genuine_scores) ss += (s - mean) * (s - mean);
    const double sigma = std::sqrt(ss / static_cast<double>(genuine_scores.size() - 1));
    FusionParams params{mean, sigma};
    params.validate();
    return params;
}

double tanh_normalize(double score, const FusionParams& params) {
    params.validate();
    return 0.5 * (std::tanh(0.01 * (score - params.mu) / params.sigma) + 1.0);
}

double fuse_scores(double sift_score, double baseline_hd, const FusionParams& p_sift,
                   const FusionParams& p_base) {
    return tanh_normalize(sift_score, p_sift) + tanh_normalize(1.0 - baseline_hd, p_base);
}

namespace {

struct RatePoint {
    double threshold;
    double far;
    double frr;
};

// FAR/FRR at every distinct observed threshold (ascending), with a final
// virtual threshold above the maximum so the (0,1) endpoint always exists.
std::vector<RatePoint> rate_curve(const ScoreSet& scores) {
    if (scores.genuine_scores.empty() || scores.impostor_scores.empty()) {
        throw ParamError("score set needs both genuine and impostor scores");
    }
    std::vector<double> genuine = scores.genuine_scores;
    std::vector<double> impostor = scores.impostor_scores;
    std::sort(genuine.begin(), genuine.end());
    std::sort(impostor.begin(), impostor.end());

    std::vector<double> thresholds;
    thresholds.reserve(genuine.size() + impostor.size() + 1);
    thresholds.insert(thresholds.end(), genuine.begin(), genuine.end());
    thresholds.insert(thresholds.end(), impostor.begin(), impostor.end());
    std::sort(thresholds.begin(), thresholds.end());
    thresholds.erase(std::unique(thresholds.begin(), thresholds.end()), thresholds.end());
    thresholds.push_back(thresholds.back() + 1.0);

    const double ng = static_cast<double>(genuine.size());
    const double ni = static_cast<double>(impostor.size());
    std::vector<RatePoint> curve;
    curve.reserve(thresholds.size());
    for (double t : thresholds) {
        const auto gi = std::lower_bound(genuine.begin(), genuine.end(), t);
        const auto ii = std::lower_bound(impostor.begin(), impostor.end(), t);
        const double frr = static_cast<double>(gi - genuine.begin()) / ng; // genuine < t
        const double far = static_cast<double>(impostor.end() - ii) / ni;  // impostor >= t
        curve.push_back({t, far, frr});
    }
    return curve;
}

} // namespace

EerResult compute_eer(const ScoreSet& scores) {
    const std::vector<RatePoint> curve = rate_curve(scores);
    for (size_t i = 0; i < curve.size(); ++i) {
        const double diff = curve[i].far - curve[i].frr;
        if (diff == 0.0) {
            return {curve[i].far, curve[i].threshold};
        }
        if (diff < 0.0) {
            // Sign change between i-1 and i (diff at the first point is >= 0).
            const RatePoint& a = curve[i - 1];
            const RatePoint& b = curve[i];
            const double da = a.far - a.frr;
            const double db = b.far - b.frr;
            const double lambda = da / (da - db);
            return {a.far + lambda * (b.far - a.far),
                    a.threshold + lambda * (b.threshold - a.threshold)};
        }
    }
    // FAR > FRR everywhere including the virtual endpoint: impossible, the
    // endpoint has FAR 0 and FRR 1.
    throw Error("compute_eer: no crossing found");
}

std::vector<DetPoint> det_points(const ScoreSet& scores) {
    const std::vector<RatePoint> curve = rate_curve(scores);
    std::vector<DetPoint> points;
    points.reserve(curve.size());
    for (auto it = curve.rbegin(); it != curve.rend(); ++it) {
        points.push_back({it->threshold, it->far, it->frr});
    }
    return points;
}

void save_scores(const std::vector<ScoreRecord>& records, const std::string& path) {
    std::ofstream out(path);
    if (!out) {
        throw IoError("cannot write file: " + path);
    }
    out << std::setprecision(17);
    for (const ScoreRecord& r : records) {
        out << r.template_id << " " << r.probe_id << " "
            << (r.genuine ? "genuine" : "impostor") << " " << r.score << "\n";
    }
    if (!out) {
        throw IoError("short write: " + path);
    }
}

std::vector<ScoreRecord> load_scores(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open file: " + path);
    }
    std::vector<ScoreRecord> records;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ls(line);
        ScoreRecord r;
        std::string label;
        if (!(ls >> r.template_id >> r.probe_id >> label >> r.score)) {
            throw FormatError("bad score line " + std::to_string(line_no) + " in: " + path);
        }
        if (label == "genuine") r.genuine = true;
        else if (label == "impostor") r.genuine = false;
        else throw FormatError("bad score label '" + label + "' in: " + path);
        records.push_back(std::move(r));
    }
    return records;
}

ScoreSet to_score_set(const std::vector<ScoreRecord>& records) {
    ScoreSet set;
    for (const ScoreRecord& r : records) {
        (r.genuine ? set.genuine_scores : set.impostor_scores).push_back(r.score);
    }
    return set;
}

void save_det(const std::vector<DetPoint>& points, const std::string& path) {
    std::ofstream out(path);
    if (!out) {
        throw IoError("cannot write file: " + path);
    }
    out << std::setprecision(17);
    for (const DetPoint& p : points) {
        out << p.threshold << " " << p.far << " " << p.frr << "\n";
    }
    if (!out) {
        throw IoError("short write: " + path);
    }
}

void FittedFusion::validate() const {
    sift.validate();
    baseline.validate();
}

void save_fusion_params(const FittedFusion& fitted, const std::string& path) {
    std::ofstream out(path);
    if (!out) {
        throw IoError("cannot write file: " + path);
    }
    out << std::setprecision(17);
    out << "# fusion-params v1\n";
    out << "sift_mu " << fitted.sift.mu << "\n";
    out << "sift_sigma " << fitted.sift.sigma << "\n";
    out << "baseline_mu " << fitted.baseline.mu << "\n";
    out << "baseline_sigma " << fitted.baseline.sigma << "\n";
}

FittedFusion load_fusion_params(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open file: " + path);
    }
    FittedFusion fitted;
    bool seen[4] = {false, false, false, false};
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ls(line);
        std::string key;
        double value;
        if (!(ls >> key >> value)) {
            throw FormatError("bad fusion-params line '" + line + "' in: " + path);
        }
        if (key == "sift_mu") fitted.sift.mu = value, seen[0] = true;
        else if (key == "sift_sigma") fitted.sift.sigma = value, seen[1] = true;
        else if (key == "baseline_mu") fitted.baseline.mu = value, seen[2] = true;
        else if (key == "baseline_sigma") fitted.baseline.sigma = value, seen[3] = true;
        else throw FormatError("unknown fusion-params key '" + key + "' in: " + path);
    }
    if (!(seen[0] && seen[1] && seen[2] && seen[3])) {
        throw FormatError("fusion-params file missing fields: " + path);
    }
    fitted.validate();
    return fitted;
}

} // namespace irisift
