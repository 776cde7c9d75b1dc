#include <irisift/scale_space.hpp>

#include <cmath>

namespace irisift {

void SiftParams::validate() const {
    if (!(sigma0 > 0.0)) throw ParamError("SiftParams: sigma0 must be > 0");
    if (scales_per_octave < 1) throw ParamError("SiftParams: scales_per_octave must be >= 1");
    if (contrast_threshold < 0.0) throw ParamError("SiftParams: contrast_threshold must be >= 0");
    if (!(edge_threshold > 1.0)) throw ParamError("SiftParams: edge_threshold must be > 1");
    if (!(ratio_threshold > 0.0 && ratio_threshold < 1.0)) {
        throw ParamError("SiftParams: ratio_threshold must be in (0,1)");
    }
    if (angle_tolerance_deg < 0.0) throw ParamError("SiftParams: angle tolerance must be >= 0");
    if (length_tolerance < 0.0) throw ParamError("SiftParams: length tolerance must be >= 0");
    if (num_octaves < 0) throw ParamError("SiftParams: num_octaves must be >= 0 (0 = auto)");
}

double SiftParams::k() const {
    return std::pow(2.0, 1.0 / scales_per_octave);
}

double ScaleSpace::absolute_sigma(int octave, double level) const {
    return params.sigma0 * std::pow(params.k(), level) * std::pow(2.0, octave);
}

ScaleSpace build_scale_space(const GrayImage& img, const SiftParams& params) {
    params.validate();
    if (img.width < 16 || img.height < 16) {
        throw SizeError("build_scale_space: image must be at least 16x16");
    }

    const int s = params.scales_per_octave;
    const double k = params.k();
    const double sigma0 = params.sigma0;

    int max_feasible = 0;
    for (int w = std::min(img.width, img.height); w >= 8; w /= 2) ++max_feasible;
    int num_octaves = params.num_octaves;
    if (num_octaves == 0) {
        num_octaves = static_cast<int>(std::floor(std::log2(std::min(img.width, img.height)))) - 3;
    }
    num_octaves = std::clamp(num_octaves, 1, max_feasible);

    ScaleSpace space;
    space.params = params;
    space.octaves.reserve(static_cast<size_t>(num_octaves));

    // Per-level incremental sigmas within an octave (identical for all octaves,
    // since scales double along with the sampling step).
    std::vector<double> increments(static_cast<size_t>(s + 2));
    for (int i = 0; i < s + 2; ++i) {
        const double prev = sigma0 * std::pow(k, i);
        const double next = sigma0 * std::pow(k, i + 1);
        increments[static_cast<size_t>(i)] = std::sqrt(next * next - prev * prev);
    }

    const double base_blur =
        std::sqrt(sigma0 * sigma0 - SiftParams::kAssumedInputBlur * SiftParams::kAssumedInputBlur);

    GrayImage base = gaussian_blur(img, base_blur);
    for (int o = 0; o < num_octaves; ++o) {
        Octave oct;
        oct.index = o;
        oct.gaussians.reserve(static_cast<size_t>(s + 3));
        oct.gaussians.push_back(std::move(base));
        for (int i = 0; i < s + 2; ++i) {
            oct.gaussians.push_back(
                gaussian_blur(oct.gaussians.back(), increments[static_cast<size_t>(i)]));
        }
        oct.dogs.reserve(static_cast<size_t>(s + 2));
        for (int i = 0; i < s + 2; ++i) {
            const GrayImage& lo = oct.gaussians[static_cast<size_t>(i)];
            const GrayImage& hi = oct.gaussians[static_cast<size_t>(i + 1)];
            GrayImage d = GrayImage::filled(lo.width, lo.height);
            for (size_t p = 0; p < d.pixels.size(); ++p) {
                d.pixels[p] = hi.pixels[p] - lo.pixels[p];
            }
            oct.dogs.push_back(std::move(d));
        }
        if (o + 1 < num_octaves) {
            // The level at scale 2*sigma0 seeds the next octave.
            base = downsample2(oct.gaussians[static_cast<size_t>(s)]);
        }
        space.octaves.push_back(std::move(oct));
    }
    return space;
}

double dog_value(const ScaleSpace& space, int octave, int level, int x, int y) {
    if (octave < 0 || octave >= static_cast<int>(space.octaves.size())) {
        throw BoundsError("dog_value: octave out of range");
    }
    const Octave& oct = space.octaves[static_cast<size_t>(octave)];
    if (level < 0 || level >= static_cast<int>(oct.dogs.size())) {
        throw BoundsError("dog_value: level out of range");
    }
    const GrayImage& d = oct.dogs[static_cast<size_t>(level)];
    if (!d.in_bounds(x, y)) {
        throw BoundsError("dog_value: pixel out of range");
    }
    return d.at(x, y);
}

} // namespace irisift
