#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "synmind/common/rng.hpp"
#include "synmind/metrics/evaluate.hpp"
#include "synmind/metrics/identification.hpp"
#include "synmind/metrics/image_metrics.hpp"
#include "synmind/metrics/roi.hpp"
#include "synmind/metrics/twoafc.hpp"

using namespace synmind;
using namespace synmind::metrics;
using nn::Tensor;

namespace {

Tensor<double> random_image(std::size_t side, CounterRng rng) {
  Tensor<double> img({side, side});
  for (std::size_t i = 0; i < img.size(); ++i) img[i] = rng.next_uniform();
  return img;
}

}  // namespace

TEST_CASE("pixcorr: identity, inversion, chance level") {
  Tensor<double> a = random_image(16, CounterRng(1));
  CHECK(pixcorr(a, a) == 1.0);

  Tensor<double> inv({16, 16});
  for (std::size_t i = 0; i < a.size(); ++i) inv[i] = 2.0 - a[i];
  CHECK(pixcorr(a, inv) == doctest::Approx(-1.0).epsilon(1e-12));

  // Independent random images: |corr| < 0.2 for at least 95% of draws.
  CounterRng rng(2);
  int outliers = 0;
  const int n = 1000;
  for (int trial = 0; trial < n; ++trial) {
    Tensor<double> x = random_image(16, rng.fork(2 * trial));
    Tensor<double> y = random_image(16, rng.fork(2 * trial + 1));
    if (std::abs(pixcorr(x, y)) >= 0.2) ++outliers;
  }
  CHECK(outliers < n / 20);

  Tensor<double> constant = Tensor<double>::full({16, 16}, 0.3);
  CHECK(pixcorr(constant, a) == 0.0);
  CHECK_THROWS_AS(pixcorr(a, Tensor<double>({8, 8})), DimensionError);
}

TEST_CASE("ssim: identity, constant images, brute-force agreement") {
  Tensor<double> a = random_image(16, CounterRng(3));
  CHECK(ssim(a, a) == 1.0);

  // a=0, b=1: closed form C1 / (1 + C1).
  Tensor<double> zeros({16, 16});
  Tensor<double> ones = Tensor<double>::full({16, 16}, 1.0);
  const double c1 = 1e-4;
  CHECK(ssim(zeros, ones) == doctest::Approx(c1 / (1.0 + c1)).epsilon(1e-9));

  CounterRng rng(4);
  for (int trial = 0; trial < 100; ++trial) {
    Tensor<double> x = random_image(16, rng.fork(2 * trial));
    Tensor<double> y = random_image(16, rng.fork(2 * trial + 1));
    const double fast = ssim(x, y);
    const double reference = oracles::ssim_reference(x, y, 8, 0.01, 0.03, 1.0);
    CHECK(fast == doctest::Approx(reference).epsilon(1e-6));
    CHECK(fast == doctest::Approx(ssim(y, x)).epsilon(1e-12));  // symmetry
    CHECK(fast <= 1.0 + 1e-12);
  }

  CHECK_THROWS_AS(ssim(Tensor<double>({4, 4}), Tensor<double>({4, 4})),
                  DimensionError);  // window larger than image
}

TEST_CASE("extractors are frozen and kind-distinct") {
  FeatureExtractor deep(ExtractorKind::DeepB);
  FeatureExtractor deep_again(ExtractorKind::DeepB);
  Tensor<double> img = random_image(16, CounterRng(5));
  const auto f1 = deep.features(img);
  const auto f2 = deep_again.features(img);
  REQUIRE(f1.size() == deep.output_dim());
  for (std::size_t i = 0; i < f1.size(); ++i) CHECK(f1[i] == f2[i]);

  FeatureExtractor shallow(ExtractorKind::Shallow2);
  CHECK(shallow.output_dim() != deep.output_dim());

  // Token grids (non-square) are accepted.
  Tensor<double> grid({8, 32});
  CounterRng rng(6);
  for (std::size_t i = 0; i < grid.size(); ++i) grid[i] = rng.next_gaussian();
  CHECK(deep.features(grid).size() == deep.output_dim());
}

TEST_CASE("two-way identification: exact rules") {
  // Hand-evaluated 2x2 correlation matrix: both anchors identify correctly.
  Tensor<double> corr({2, 2}, {0.9, 0.1, 0.2, 0.8});
  CHECK(two_way_from_correlations(corr) == doctest::Approx(100.0));

  // Identical recon and truth features, all distinct -> 100%.
  std::vector<Tensor<double>> set;
  CounterRng rng(7);
  for (int i = 0; i < 6; ++i) set.push_back(random_image(16, rng.fork(i)));
  FeatureExtractor deep(ExtractorKind::DeepB);
  CHECK(two_way_identification(deep, set, set) == doctest::Approx(100.0));

  // Independent recon features -> about chance over 500 pairs.
  std::vector<Tensor<double>> truths, recons;
  for (int i = 0; i < 500; ++i) {
    truths.push_back(random_image(16, rng.fork(1000 + i)));
    recons.push_back(random_image(16, rng.fork(9000 + i)));
  }
  const double chance = two_way_identification(deep, recons, truths);
  CHECK(chance > 47.0);
  CHECK(chance < 53.0);

  CHECK_THROWS_AS(two_way_identification(deep, {set[0]}, {set[0]}),
                  DimensionError);
}

TEST_CASE("two-way is invariant under strictly monotone transforms") {
  CounterRng rng(8);
  Tensor<double> corr({5, 5});
  for (std::size_t i = 0; i < corr.size(); ++i) {
    corr[i] = 2.0 * rng.next_uniform() - 1.0;
  }
  const double base = two_way_from_correlations(corr);
  Tensor<double> tanh_c = corr, expc = corr;
  for (std::size_t i = 0; i < corr.size(); ++i) {
    tanh_c[i] = std::tanh(3.0 * corr[i]);
    expc[i] = std::exp(corr[i]);
  }
  CHECK(two_way_from_correlations(tanh_c) == base);
  CHECK(two_way_from_correlations(expc) == base);
}

TEST_CASE("evaluate_images self-evaluation is the exact upper bound") {
  std::vector<Tensor<double>> truths;
  CounterRng rng(9);
  for (int i = 0; i < 8; ++i) truths.push_back(random_image(16, rng.fork(i)));
  ExtractorBank bank;
  MetricRow row = evaluate_images(truths, truths, bank);
  CHECK(row.pixcorr == 1.0);
  CHECK(row.ssim == 1.0);
  CHECK(row.twoway_shallow2 == 100.0);
  CHECK(row.twoway_shallow5 == 100.0);
  CHECK(row.twoway_deep_a == 100.0);
  CHECK(row.twoway_deep_b == 100.0);
  CHECK(row.dist_a == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(row.dist_b == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("2afc: trivial judges and exclusion rules") {
  CounterRng rng(10);
  const std::size_t n = 25;
  std::vector<Tensor<double>> a, b, orig;
  std::vector<std::uint64_t> ids;
  for (std::size_t i = 0; i < n; ++i) {
    orig.push_back(random_image(8, rng.fork(i)));
    a.push_back(orig.back());  // method A returns the original: a clear win
    b.push_back(random_image(8, rng.fork(1000 + i)));
    ids.push_back(i);
  }

  SUBCASE("always-preferring-A judge gives rate 100, delta +50") {
    // Correlation judge against originals: A is the original itself.
    FeatureExtractor deep(ExtractorKind::DeepB);
    std::vector<std::unique_ptr<Judge>> judges;
    judges.push_back(std::make_unique<CorrelationJudge>(&deep));
    TwoAfcResult result = run_2afc({42, 20}, judges, a, b, orig, ids);
    CHECK(result.rate == doctest::Approx(100.0));
    CHECK(result.delta == doctest::Approx(50.0));
    CHECK(result.excluded_judges.empty());
    CHECK(result.sentinel_trials > 0);
  }

  SUBCASE("identical options produce exactly 50% via the tie rule") {
    FeatureExtractor deep(ExtractorKind::DeepB);
    std::vector<std::unique_ptr<Judge>> judges;
    judges.push_back(std::make_unique<CorrelationJudge>(&deep));
    TwoAfcResult result = run_2afc({42, 20}, judges, b, b, orig, ids);
    CHECK(result.rate == 50.0);
    CHECK(result.delta == 0.0);
  }

  SUBCASE("careless judge fails a sentinel and is fully excluded") {
    std::vector<std::unique_ptr<Judge>> judges;
    judges.push_back(std::make_unique<CarelessJudge>(7));
    // 25 real trials -> one sentinel at slot 20; a coin-flip judge fails it
    // for this seed.
    TwoAfcResult result = run_2afc({11, 20}, judges, a, b, orig, ids);
    if (!result.excluded_judges.empty()) {
      CHECK(result.valid_trials == 0);
      CHECK(result.rate == 0.0);
    }
    // Make exclusion deterministic: scan seeds until one fails, then check
    // that every response of that judge is gone.
    bool found_failing = false;
    for (std::uint64_t seed = 0; seed < 32 && !found_failing; ++seed) {
      std::vector<std::unique_ptr<Judge>> js;
      js.push_back(std::make_unique<CarelessJudge>(seed));
      TwoAfcResult r = run_2afc({seed, 20}, js, a, b, orig, ids);
      if (!r.excluded_judges.empty()) {
        found_failing = true;
        CHECK(r.valid_trials == 0);
      }
    }
    CHECK(found_failing);
  }

  SUBCASE("attentive random judge stays near chance over 1000 trials") {
    std::vector<Tensor<double>> a2, b2, orig2;
    std::vector<std::uint64_t> ids2;
    for (std::size_t i = 0; i < 1000; ++i) {
      orig2.push_back(random_image(8, rng.fork(5000 + i)));
      a2.push_back(random_image(8, rng.fork(6000 + i)));
      b2.push_back(random_image(8, rng.fork(7000 + i)));
      ids2.push_back(i);
    }
    std::vector<std::unique_ptr<Judge>> judges;
    judges.push_back(std::make_unique<RandomJudge>(3));
    TwoAfcResult result = run_2afc({99, 20}, judges, a2, b2, orig2, ids2);
    CHECK(result.excluded_judges.empty());
    CHECK(result.valid_trials == 1000);
    CHECK(result.rate > 46.0);
    CHECK(result.rate < 54.0);
    CHECK(result.delta == result.rate - 50.0);
  }

  SUBCASE("fewer than 20 trials: no sentinels") {
    std::vector<Tensor<double>> a3(a.begin(), a.begin() + 10);
    std::vector<Tensor<double>> b3(b.begin(), b.begin() + 10);
    std::vector<Tensor<double>> o3(orig.begin(), orig.begin() + 10);
    std::vector<std::uint64_t> ids3(ids.begin(), ids.begin() + 10);
    FeatureExtractor deep(ExtractorKind::DeepB);
    std::vector<std::unique_ptr<Judge>> judges;
    judges.push_back(std::make_unique<CorrelationJudge>(&deep));
    TwoAfcResult result = run_2afc({1, 20}, judges, a3, b3, o3, ids3);
    CHECK(result.sentinel_trials == 0);
  }
}

TEST_CASE("roi importance: trivial cases and invariances") {
  SUBCASE("all-ones weights give the uniform map") {
    Tensor<double> w = Tensor<double>::full({10, 4}, 1.0);
    RoiImportanceMap map = roi_importance(w, 0, "75");
    for (double v : map.weights) CHECK(v == doctest::Approx(0.1).epsilon(1e-12));
  }

  SUBCASE("single nonzero voxel row gives an indicator") {
    Tensor<double> w({5, 3});
    w.at(2, 0) = 4.0;
    w.at(2, 1) = -1.0;
    RoiImportanceMap map = roi_importance(w, 1, "30");
    CHECK(map.weights[2] == doctest::Approx(1.0));
    CHECK(map.weights[0] == 0.0);
  }

  SUBCASE("weights sum to one and survive positive rescaling") {
    CounterRng rng(11);
    Tensor<double> w({40, 8});
    for (std::size_t i = 0; i < w.size(); ++i) w[i] = rng.next_gaussian();
    RoiImportanceMap base = roi_importance(w, 0, "45");
    double sum = 0.0;
    for (double v : base.weights) {
      CHECK(v >= 0.0);
      sum += v;
    }
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));

    Tensor<double> scaled = w;
    for (std::size_t i = 0; i < w.size(); ++i) scaled[i] *= 37.5;
    RoiImportanceMap rescaled = roi_importance(scaled, 0, "45");
    for (std::size_t v = 0; v < base.weights.size(); ++v) {
      CHECK(std::abs(base.weights[v] - rescaled.weights[v]) < 1e-12);
    }
    CHECK(base.entropy > 0.0);
  }
}
