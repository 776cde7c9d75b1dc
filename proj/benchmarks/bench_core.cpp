#include <random>

#include <benchmark/benchmark.h>

#include <irisift/baseline.hpp>
#include <irisift/keypoints.hpp>
#include <irisift/matching.hpp>
#include <irisift/scale_space.hpp>
#include <irisift/segmentation.hpp>

namespace {

using namespace irisift;

GrayImage random_image(int w, int h, unsigned seed) {
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> dist(0.0, 1.0);
    GrayImage img = GrayImage::filled(w, h);
    for (double& p : img.pixels) p = dist(rng);
    return img;
}

GrayImage synthetic_eye(int w, int h) {
    GrayImage img = GrayImage::filled(w, h, 0.9);
    const double cx = w / 2.0, cy = h / 2.0;
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> dist(0.2, 0.8);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const double r = std::hypot(x - cx, y - cy);
            if (r <= 40) img.at(x, y) = 0.05;
            else if (r <= 110) img.at(x, y) = dist(rng);
        }
    }
    return img;
}

IrisCode random_code(unsigned seed) {
    std::mt19937 rng(seed);
    IrisCode code;
    code.radial_res = 20;
    code.angular_res = 240;
    code.bits.resize(2 * 20 * 240);
    code.mask.assign(code.bits.size(), 1);
    for (char& b : code.bits) b = static_cast<char>(rng() & 1);
    return code;
}

void BM_GaussianBlur(benchmark::State& state) {
    const GrayImage img = random_image(640, 480, 1);
    const double sigma = state.range(0) / 10.0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(gaussian_blur(img, sigma));
    }
}
BENCHMARK(BM_GaussianBlur)->Arg(16)->Arg(32);

void BM_BuildScaleSpace(benchmark::State& state) {
    const GrayImage img = random_image(640, 480, 2);
    const SiftParams params;
    for (auto _ : state) {
        benchmark::DoNotOptimize(build_scale_space(img, params));
    }
}
BENCHMARK(BM_BuildScaleSpace);

void BM_DetectAndDescribe(benchmark::State& state) {
    const GrayImage img = random_image(256, 256, 3);
    SiftParams params;
    for (auto _ : state) {
        benchmark::DoNotOptimize(detect_and_describe(img, params));
    }
}
BENCHMARK(BM_DetectAndDescribe)->Unit(benchmark::kMillisecond);

void BM_MatchDescriptors(benchmark::State& state) {
    const GrayImage img = random_image(256, 256, 4);
    const SiftParams params;
    const FeatureSet features = detect_and_describe(img, params);
    for (auto _ : state) {
        benchmark::DoNotOptimize(match_descriptors(features, features, params.ratio_threshold));
    }
    state.counters["keypoints"] = static_cast<double>(features.items.size());
}
BENCHMARK(BM_MatchDescriptors)->Unit(benchmark::kMillisecond);

void BM_HammingMatch(benchmark::State& state) {
    const IrisCode a = random_code(10);
    const IrisCode b = random_code(11);
    for (auto _ : state) {
        benchmark::DoNotOptimize(hamming_match(a, b, 8));
    }
}
BENCHMARK(BM_HammingMatch);

void BM_DetectCircles(benchmark::State& state) {
    const GrayImage img = synthetic_eye(640, 480);
    const CircleSearch search;
    for (auto _ : state) {
        benchmark::DoNotOptimize(detect_circles(img, search));
    }
}
BENCHMARK(BM_DetectCircles)->Unit(benchmark::kMillisecond);

} // namespace

BENCHMARK_MAIN();
