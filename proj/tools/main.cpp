// Batch CLI for SIFT-based iris verification: extraction, matching, protocol
// evaluation, parameter sweeps and metric emission.

#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include <irisift/harness.hpp>

namespace {

using namespace irisift;

// Accepts either a plain decimal ("0.00098") or a quotient ("0.25/255").
double parse_threshold(const std::string& text) {
    const size_t slash = text.find('/');
    try {
        if (slash == std::string::npos) {
            return std::stod(text);
        }
        const double num = std::stod(text.substr(0, slash));
        const double den = std::stod(text.substr(slash + 1));
        if (den == 0.0) throw ParamError("division by zero in threshold: " + text);
        return num / den;
    } catch (const std::invalid_argument&) {
        throw ParamError("bad threshold value: " + text);
    }
}

std::vector<double> parse_grid(const std::string& text) {
    std::vector<double> values;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) values.push_back(std::stod(item));
    }
    return values;
}

struct CliState {
    RunConfig config;
    std::string contrast_text;
    double eps_l_percent = -1.0;
    bool no_trimming = false;

    void finalize() {
        if (!contrast_text.empty()) {
            config.sift.contrast_threshold = parse_threshold(contrast_text);
        }
        if (eps_l_percent >= 0.0) {
            config.sift.length_tolerance = eps_l_percent / 100.0;
        }
        if (no_trimming) {
            config.sift.trimming = false;
        }
        config.sift.validate();
        config.baseline.validate();
        config.search.validate();
    }
};

void add_sift_options(CLI::App* cmd, CliState& state) {
    cmd->add_option("--sigma0", state.config.sift.sigma0, "Base scale of the pyramid");
    cmd->add_option("--scales", state.config.sift.scales_per_octave, "Scales per octave (s)");
    cmd->add_option("--num-octaves", state.config.sift.num_octaves, "Octave count, 0 = auto");
    cmd->add_option("--contrast-d", state.contrast_text,
                    "Contrast threshold D; accepts 0.00098 or 0.25/255");
    cmd->add_option("--edge-r", state.config.sift.edge_threshold, "Edge response threshold r");
    cmd->add_option("--ratio", state.config.sift.ratio_threshold, "Ratio test threshold d1/d2");
    cmd->add_option("--eps-theta", state.config.sift.angle_tolerance_deg,
                    "Trimming angle tolerance, degrees");
    auto* ratio_opt = cmd->add_option("--eps-l", state.config.sift.length_tolerance,
                                      "Trimming length tolerance as a ratio");
    cmd->add_option("--eps-l-percent", state.eps_l_percent,
                    "Trimming length tolerance in percent (14 means 0.14)")
        ->excludes(ratio_opt);
    cmd->add_flag("--no-trimming", state.no_trimming, "Disable geometric trimming");
}

void add_baseline_options(CLI::App* cmd, CliState& state) {
    cmd->add_option("--radial-res", state.config.baseline.radial_res, "Rubber-sheet rings (R)");
    cmd->add_option("--angular-res", state.config.baseline.angular_res,
                    "Rubber-sheet samples per ring (A)");
    cmd->add_option("--wavelength", state.config.baseline.wavelength,
                    "Log-Gabor center wavelength in samples");
    cmd->add_option("--sigma-on-f", state.config.baseline.sigma_on_f, "Log-Gabor bandwidth");
    cmd->add_option("--max-shift", state.config.baseline.max_shift,
                    "Hamming shift compensation range, columns");
}

void add_segmentation_options(CLI::App* cmd, CliState& state) {
    cmd->add_option("--pupil-r-min", state.config.search.pupil_r_min, "Pupil radius range start");
    cmd->add_option("--pupil-r-max", state.config.search.pupil_r_max, "Pupil radius range end");
    cmd->add_option("--iris-r-min", state.config.search.iris_r_min, "Iris radius range start");
    cmd->add_option("--iris-r-max", state.config.search.iris_r_max, "Iris radius range end");
    cmd->add_option("--min-votes", state.config.search.min_votes,
                    "Minimum Hough votes before reporting failure");
}

IrisAnnulus annulus_for_image(const CliState& state, const GrayImage& img,
                              const std::string& annulus_path) {
    if (!annulus_path.empty()) {
        return load_manual_annulus(annulus_path);
    }
    return detect_circles(img, state.config.search);
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"SIFT-based iris verification toolkit"};
    app.require_subcommand(1);
    app.set_config("--config", "", "Key-value config file overriding built-in defaults");

    CliState state;

    std::string manifest_path, features_dir, matcher_name = "sift";
    std::string image_path, image_a, image_b, annulus_a, annulus_b;
    std::string out_annulus, out_mask, out_scores, out_det, out_path, dump_path;
    std::vector<std::string> d_entries_text;
    std::string grid_etheta_text, grid_el_text, grid_el_percent_text;
    bool with_no_trim = false;

    CLI::App* extract = app.add_subcommand("extract", "Segment, extract keypoints and iris codes");
    extract->add_option("--manifest", manifest_path, "Dataset manifest")->required();
    extract->add_option("--features", features_dir, "Artifact output directory")->required();
    add_sift_options(extract, state);
    add_baseline_options(extract, state);
    add_segmentation_options(extract, state);

    CLI::App* segment = app.add_subcommand("segment", "Segment a single image");
    segment->add_option("--image", image_path, "Input image")->required();
    segment->add_option("--out-annulus", out_annulus, "Write the detected circles here");
    segment->add_option("--out-mask", out_mask, "Write the binary mask PGM here");
    add_segmentation_options(segment, state);

    CLI::App* match_pair = app.add_subcommand("match-pair", "Match two images directly");
    match_pair->add_option("--image-a", image_a, "Template image")->required();
    match_pair->add_option("--image-b", image_b, "Probe image")->required();
    match_pair->add_option("--annulus-a", annulus_a, "Manual annulus for image A");
    match_pair->add_option("--annulus-b", annulus_b, "Manual annulus for image B");
    match_pair->add_option("--dump", dump_path, "Write the retained match lines here");
    add_sift_options(match_pair, state);
    add_baseline_options(match_pair, state);
    add_segmentation_options(match_pair, state);

    CLI::App* fit_fusion = app.add_subcommand("fit-fusion", "Fit tanh normalization parameters");
    fit_fusion->add_option("--manifest", manifest_path, "Development manifest")->required();
    fit_fusion->add_option("--features", features_dir, "Extraction artifact directory")
        ->required();
    fit_fusion->add_option("--out", out_path, "Fusion parameter file")->required();
    add_sift_options(fit_fusion, state);
    add_baseline_options(fit_fusion, state);

    CLI::App* evaluate = app.add_subcommand("evaluate", "Run the verification protocol");
    evaluate->add_option("--manifest", manifest_path, "Dataset manifest")->required();
    evaluate->add_option("--features", features_dir, "Extraction artifact directory")->required();
    evaluate->add_option("--matcher", matcher_name, "sift, baseline or fusion");
    evaluate->add_option("--fusion-params", state.config.fusion_params_path,
                         "Fitted fusion parameters (for --matcher fusion)");
    evaluate->add_option("--scores", out_scores, "Score file to write");
    evaluate->add_option("--det", out_det, "DET curve file to write");
    add_sift_options(evaluate, state);
    add_baseline_options(evaluate, state);

    CLI::App* sweep = app.add_subcommand("sweep", "EER over a (D, eps_theta, eps_l) grid");
    sweep->add_option("--manifest", manifest_path, "Dataset manifest")->required();
    sweep
        ->add_option("--d-entry", d_entries_text,
                     "LABEL=DIR pair: contrast label and its extraction directory (repeatable)")
        ->required();
    sweep->add_option("--grid-etheta", grid_etheta_text, "Comma list of angle tolerances");
    auto* grid_el_opt =
        sweep->add_option("--grid-el", grid_el_text, "Comma list of length tolerances (ratio)");
    sweep
        ->add_option("--grid-el-percent", grid_el_percent_text,
                     "Comma list of length tolerances in percent")
        ->excludes(grid_el_opt);
    sweep->add_flag("--with-no-trim", with_no_trim, "Add a trimming-disabled row per D");
    sweep->add_option("--out", out_path, "Write the table here as well");
    add_sift_options(sweep, state);

    CLI11_PARSE(app, argc, argv);

    try {
        state.finalize();
        state.config.features_dir = features_dir;

        if (*extract) {
            const DatasetManifest manifest = load_manifest(manifest_path);
            const BatchSummary summary = cmd_extract(state.config, manifest, std::cout);
            return summary.ok() ? 0 : 1;
        }

        if (*segment) {
            const GrayImage img = load_image(image_path);
            const IrisAnnulus annulus = detect_circles(img, state.config.search);
            std::cout << "pupil " << annulus.pupil.cx << " " << annulus.pupil.cy << " "
                      << annulus.pupil.radius << "\n";
            std::cout << "iris " << annulus.iris.cx << " " << annulus.iris.cy << " "
                      << annulus.iris.radius << "\n";
            if (!out_annulus.empty()) save_annulus(annulus, out_annulus);
            if (!out_mask.empty()) {
                save_mask_pgm(annulus_to_mask(annulus, img.width, img.height), out_mask);
            }
            return 0;
        }

        if (*match_pair) {
            const GrayImage a = load_image(image_a);
            const GrayImage b = load_image(image_b);
            const IrisAnnulus ann_a = annulus_for_image(state, a, annulus_a);
            const IrisAnnulus ann_b = annulus_for_image(state, b, annulus_b);
            const IrisMask mask_a = annulus_to_mask(ann_a, a.width, a.height);
            const IrisMask mask_b = annulus_to_mask(ann_b, b.width, b.height);

            const FeatureSet fa = detect_and_describe(a, state.config.sift, &mask_a);
            const FeatureSet fb = detect_and_describe(b, state.config.sift, &mask_b);
            const MatchResult match = sift_match(fa, fb, state.config.sift);

            const BaselineParams& bp = state.config.baseline;
            const IrisCode code_a = log_gabor_encode(
                rubber_sheet_normalize(a, ann_a, bp.radial_res, bp.angular_res), bp);
            const IrisCode code_b = log_gabor_encode(
                rubber_sheet_normalize(b, ann_b, bp.radial_res, bp.angular_res), bp);
            const double hd = hamming_match(code_a, code_b, bp.max_shift);

            std::cout << "keypoints_a=" << fa.items.size() << " keypoints_b=" << fb.items.size()
                      << "\n";
            std::cout << "sift_score=" << match.score << "\n";
            std::cout << std::fixed << std::setprecision(6) << "baseline_hd=" << hd << "\n";
            if (!dump_path.empty()) save_match_dump(match, dump_path);
            return 0;
        }

        if (*fit_fusion) {
            const DatasetManifest manifest = load_manifest(manifest_path);
            state.config.fusion_params_path = out_path;
            const FittedFusion fitted = cmd_fit_fusion(state.config, manifest, std::cout);
            std::cout << std::setprecision(6) << "sift genuine mu=" << fitted.sift.mu
                      << " sigma=" << fitted.sift.sigma << "\n";
            std::cout << "baseline genuine mu=" << fitted.baseline.mu
                      << " sigma=" << fitted.baseline.sigma << "\n";
            return 0;
        }

        if (*evaluate) {
            const DatasetManifest manifest = load_manifest(manifest_path);
            const EvaluateResult result =
                cmd_evaluate(state.config, manifest, parse_matcher(matcher_name), std::cout);
            if (!out_scores.empty()) save_scores(result.records, out_scores);
            if (!out_det.empty()) save_det(result.det, out_det);
            std::cout << std::fixed << std::setprecision(4) << "EER=" << result.eer.eer
                      << " threshold=" << result.eer.threshold << "\n";
            return 0;
        }

        if (*sweep) {
            const DatasetManifest manifest = load_manifest(manifest_path);
            std::vector<SweepEntry> entries;
            for (const std::string& text : d_entries_text) {
                const size_t eq = text.find('=');
                if (eq == std::string::npos) {
                    throw ParamError("--d-entry expects LABEL=DIR, got: " + text);
                }
                entries.push_back({text.substr(0, eq), text.substr(eq + 1)});
            }
            std::vector<double> angle_grid = parse_grid(grid_etheta_text);
            std::vector<double> length_grid = parse_grid(grid_el_text);
            if (!grid_el_percent_text.empty()) {
                for (double v : parse_grid(grid_el_percent_text)) {
                    length_grid.push_back(v / 100.0);
                }
            }
            const std::vector<SweepRow> rows = cmd_sweep(
                state.config, manifest, entries, angle_grid, length_grid, with_no_trim, std::cout);

            std::ostringstream table;
            table << "D etheta el eer\n";
            table << std::fixed << std::setprecision(4);
            for (const SweepRow& row : rows) {
                table << row.d_label << " ";
                if (row.trimming) {
                    table << row.angle_tol_deg << " " << row.length_tol << " ";
                } else {
                    table << "- - ";
                }
                table << row.eer << (row.best ? " *" : "") << "\n";
            }
            std::cout << table.str();
            if (!out_path.empty()) {
                std::ofstream out(out_path);
                if (!out) throw IoError("cannot write file: " + out_path);
                out << table.str();
            }
            return 0;
        }
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
