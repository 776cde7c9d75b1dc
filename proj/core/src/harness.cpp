#include <irisift/harness.hpp>

#include <filesystem>
#include <map>
#include <ostream>

namespace irisift {

namespace fs = std::filesystem;

std::string features_path(const std::string& dir, const ManifestEntry& entry) {
    return (fs::path(dir) / (entry.id() + ".keys")).string();
}

std::string iris_code_path(const std::string& dir, const ManifestEntry& entry) {
    return (fs::path(dir) / (entry.id() + ".code")).string();
}

namespace {

// Temp-file-and-rename so readers never observe partial artifacts.
template <typename SaveFn>
void atomic_save(const std::string& path, SaveFn&& save) {
    const std::string tmp = path + ".tmp";
    save(tmp);
    fs::rename(tmp, path);
}

IrisAnnulus annulus_for(const RunConfig& config, const ManifestEntry& entry,
                        const GrayImage& img) {
    if (!entry.annulus_path.empty()) {
        return load_manual_annulus(entry.annulus_path);
    }
    return detect_circles(img, config.search);
}

} // namespace

BatchSummary cmd_extract(const RunConfig& config, const DatasetManifest& manifest,
                         std::ostream& log) {
    manifest.validate();
    if (config.features_dir.empty()) {
        throw ParamError("extract: features directory not set");
    }
    fs::create_directories(config.features_dir);

    BatchSummary summary;
    for (const ManifestEntry& entry : manifest.entries) {
        try {
            const GrayImage img = load_image(entry.image_path);
            const IrisAnnulus annulus = annulus_for(config, entry, img);
            const IrisMask mask = annulus_to_mask(annulus, img.width, img.height);

            const FeatureSet features = detect_and_describe(img, config.sift, &mask);
            atomic_save(features_path(config.features_dir, entry),
                        [&](const std::string& p) { save_features(features, p); });

            const NormalizedIris norm = rubber_sheet_normalize(
                img, annulus, config.baseline.radial_res, config.baseline.angular_res);
            const IrisCode code = log_gabor_encode(norm, config.baseline);
            atomic_save(iris_code_path(config.features_dir, entry),
                        [&](const std::string& p) { save_iris_code(code, p); });

            ++summary.processed;
        } catch (const IoError& e) {
            log << "skip " << entry.id() << ": " << e.what() << "\n";
            ++summary.skipped;
        } catch (const SegmentationError& e) {
            log << "skip " << entry.id() << ": " << e.what() << "\n";
            ++summary.skipped;
        } catch (const Error& e) {
            log << "fail " << entry.id() << ": " << e.what() << "\n";
            ++summary.failed;
        }
    }
    log << "extract summary: processed=" << summary.processed << " skipped=" << summary.skipped
        << " failed=" << summary.failed << "\n";
    return summary;
}

namespace {

struct ArtifactCache {
    std::map<int, FeatureSet> features;
    std::map<int, IrisCode> codes;

    const FeatureSet& features_for(const RunConfig& config, const DatasetManifest& manifest,
                                   int index) {
        auto it = features.find(index);
        if (it == features.end()) {
            const std::string path =
                features_path(config.features_dir, manifest.entries[static_cast<size_t>(index)]);
            it = features.emplace(index, load_features(path)).first;
        }
        return it->second;
    }

    const IrisCode& code_for(const RunConfig& config, const DatasetManifest& manifest,
                             int index) {
        auto it = codes.find(index);
        if (it == codes.end()) {
            const std::string path =
                iris_code_path(config.features_dir, manifest.entries[static_cast<size_t>(index)]);
            it = codes.emplace(index, load_iris_code(path)).first;
        }
        return it->second;
    }
};

} // namespace

FittedFusion cmd_fit_fusion(const RunConfig& config, const DatasetManifest& manifest,
                            std::ostream& log) {
    const TrialSet trials = enumerate_trials(manifest);
    ArtifactCache cache;

    std::vector<double> sift_genuine;
    std::vector<double> base_genuine;
    sift_genuine.reserve(trials.genuine.size());
    base_genuine.reserve(trials.genuine.size());
    for (const Trial& trial : trials.genuine) {
        const FeatureSet& ft = cache.features_for(config, manifest, trial.template_index);
        const FeatureSet& fp = cache.features_for(config, manifest, trial.probe_index);
        sift_genuine.push_back(static_cast<double>(sift_score(ft, fp, config.sift)));

        const IrisCode& ct = cache.code_for(config, manifest, trial.template_index);
        const IrisCode& cp = cache.code_for(config, manifest, trial.probe_index);
        base_genuine.push_back(1.0 - hamming_match(ct, cp, config.baseline.max_shift));
    }

    FittedFusion fitted;
    fitted.sift = fit_fusion_params(sift_genuine);
    fitted.baseline = fit_fusion_params(base_genuine);
    if (!config.fusion_params_path.empty()) {
        atomic_save(config.fusion_params_path,
                    [&](const std::string& p) { save_fusion_params(fitted, p); });
        log << "fusion params written to " << config.fusion_params_path << "\n";
    }
    return fitted;
}

Matcher parse_matcher(const std::string& name) {
    if (name == "sift") return Matcher::Sift;
    if (name == "baseline") return Matcher::Baseline;
    if (name == "fusion") return Matcher::Fusion;
    throw ParamError("unknown matcher '" + name + "' (expected sift|baseline|fusion)");
}

EvaluateResult cmd_evaluate(const RunConfig& config, const DatasetManifest& manifest,
                            Matcher matcher, std::ostream& log) {
    const TrialSet trials = enumerate_trials(manifest);

    FittedFusion fitted;
    if (matcher == Matcher::Fusion) {
        if (config.fusion_params_path.empty() || !fs::exists(config.fusion_params_path)) {
            throw ParamError(
                "fusion evaluation needs fitted normalization parameters; run fit-fusion first "
                "and pass its output file");
        }
        fitted = load_fusion_params(config.fusion_params_path);
    }

    ArtifactCache cache;
    auto score_trial = [&](const Trial& trial) -> double {
        switch (matcher) {
        case Matcher::Sift: {
            const FeatureSet& ft = cache.features_for(config, manifest, trial.template_index);
            const FeatureSet& fp = cache.features_for(config, manifest, trial.probe_index);
            return static_cast<double>(sift_score(ft, fp, config.sift));
        }
        case Matcher::Baseline: {
            const IrisCode& ct = cache.code_for(config, manifest, trial.template_index);
            const IrisCode& cp = cache.code_for(config, manifest, trial.probe_index);
            return 1.0 - hamming_match(ct, cp, config.baseline.max_shift);
        }
        case Matcher::Fusion: {
            const FeatureSet& ft = cache.features_for(config, manifest, trial.template_index);
            const FeatureSet& fp = cache.features_for(config, manifest, trial.probe_index);
            const IrisCode& ct = cache.code_for(config, manifest, trial.template_index);
            const IrisCode& cp = cache.code_for(config, manifest, trial.probe_index);
            const double s = static_cast<double>(sift_score(ft, fp, config.sift));
            const double hd = hamming_match(ct, cp, config.baseline.max_shift);
            return fuse_scores(s, hd, fitted.sift, fitted.baseline);
        }
        }
        throw Error("unreachable");
    };

    EvaluateResult result;
    result.records.reserve(trials.genuine.size() + trials.impostor.size());
    for (const Trial& trial : trials.genuine) {
        result.records.push_back({manifest.entries[static_cast<size_t>(trial.template_index)].id(),
                                  manifest.entries[static_cast<size_t>(trial.probe_index)].id(),
                                  true, score_trial(trial)});
    }
    for (const Trial& trial : trials.impostor) {
        result.records.push_back({manifest.entries[static_cast<size_t>(trial.template_index)].id(),
                                  manifest.entries[static_cast<size_t>(trial.probe_index)].id(),
                                  false, score_trial(trial)});
    }

    const ScoreSet set = to_score_set(result.records);
    result.eer = compute_eer(set);
    result.det = det_points(set);
    log << "trials: genuine=" << trials.genuine.size() << " impostor=" << trials.impostor.size()
        << "\n";
    return result;
}

std::vector<SweepRow> cmd_sweep(const RunConfig& config, const DatasetManifest& manifest,
                                const std::vector<SweepEntry>& d_entries,
                                const std::vector<double>& angle_grid,
                                const std::vector<double>& length_grid, bool include_no_trim,
                                std::ostream& log) {
    if (d_entries.empty() || (!include_no_trim && (angle_grid.empty() || length_grid.empty()))) {
        throw ParamError("sweep: empty parameter grid");
    }
    const TrialSet trials = enumerate_trials(manifest);

    std::vector<SweepRow> rows;
    for (const SweepEntry& d : d_entries) {
        RunConfig local = config;
        local.features_dir = d.features_dir;
        ArtifactCache cache;

        // Descriptor matching once per trial; trimming re-runs per tolerance.
        std::vector<std::vector<MatchPair>> genuine_pairs, impostor_pairs;
        genuine_pairs.reserve(trials.genuine.size());
        impostor_pairs.reserve(trials.impostor.size());
        auto pairs_for = [&](const Trial& trial) {
            const FeatureSet& ft = cache.features_for(local, manifest, trial.template_index);
            const FeatureSet& fp = cache.features_for(local, manifest, trial.probe_index);
            return match_descriptors(ft, fp, config.sift.ratio_threshold);
        };
        for (const Trial& t : trials.genuine) genuine_pairs.push_back(pairs_for(t));
        for (const Trial& t : trials.impostor) impostor_pairs.push_back(pairs_for(t));

        auto eer_for = [&](auto&& score_fn) {
            ScoreSet set;
            set.genuine_scores.reserve(genuine_pairs.size());
            set.impostor_scores.reserve(impostor_pairs.size());
            for (const auto& pairs : genuine_pairs) set.genuine_scores.push_back(score_fn(pairs));
            for (const auto& pairs : impostor_pairs) {
                set.impostor_scores.push_back(score_fn(pairs));
            }
            return compute_eer(set).eer;
        };

        if (include_no_trim) {
            SweepRow row;
            row.d_label = d.label;
            row.trimming = false;
            row.eer = eer_for([](const std::vector<MatchPair>& pairs) {
                return static_cast<double>(pairs.size());
            });
            rows.push_back(row);
            log << "sweep D=" << d.label << " no-trim eer=" << row.eer << "\n";
        }
        for (double at : angle_grid) {
            for (double lt : length_grid) {
                SweepRow row;
                row.d_label = d.label;
                row.trimming = true;
                row.angle_tol_deg = at;
                row.length_tol = lt;
                row.eer = eer_for([&](const std::vector<MatchPair>& pairs) {
                    return static_cast<double>(trim_matches(pairs, at, lt).score);
                });
                rows.push_back(row);
                log << "sweep D=" << d.label << " etheta=" << at << " el=" << lt
                    << " eer=" << row.eer << "\n";
            }
        }
    }

    size_t best = 0;
    for (size_t i = 1; i < rows.size(); ++i) {
        if (rows[i].eer < rows[best].eer) best = i;
    }
    rows[best].best = true;
    return rows;
}

} // namespace irisift
