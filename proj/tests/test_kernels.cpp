#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "doctest.h"
#include "qpcrfbi/kernels.hpp"
#include "qpcrfbi/mathutil.hpp"
#include "qpcrfbi/rng.hpp"

using namespace qpcrfbi;

namespace {

struct Inputs {
  std::vector<double> mu;
  std::vector<double> zsign;
  std::vector<double> a;
  std::vector<double> b;
};

Inputs random_inputs(std::size_t n, std::uint64_t seed, double mu_lo, double mu_hi) {
  Rng rng(seed);
  Inputs in;
  for (std::size_t j = 0; j < n; ++j) {
    in.mu.push_back(rng.uniform(mu_lo, mu_hi));
    in.zsign.push_back(rng.bernoulli(0.5) ? 1.0 : -1.0);
    in.a.push_back(rng.uniform(-50.0, 50.0));
    in.b.push_back(rng.uniform(-50.0, 50.0));
  }
  return in;
}

double rel_err(double x, double ref) {
  double denom = std::max(std::fabs(ref), 1e-30);
  return std::fabs(x - ref) / denom;
}

void restore_default_backend() {
  for (auto n : kernels::available()) kernels::select(n);  // last wins
}

}  // namespace

TEST_CASE("backend registry") {
  auto names = kernels::available();
  CHECK(std::find(names.begin(), names.end(), "scalar") != names.end());
  CHECK(kernels::select("scalar"));
  CHECK(std::string(kernels::active().name) == "scalar");
  CHECK_FALSE(kernels::select("not-a-backend"));
  restore_default_backend();
}

TEST_CASE("scalar and simd backends agree") {
  const kernels::Backend& ref = kernels::scalar_backend();

  for (auto name : kernels::available()) {
    if (name == "scalar") continue;
    REQUIRE(kernels::select(name));
    const kernels::Backend& simd = kernels::active();
    CAPTURE(name);

    // odd lengths exercise the vector tail
    for (std::size_t n : {1u, 3u, 4u, 7u, 36u, 233u, 1024u, 1337u}) {
      Inputs in = random_inputs(n, 42 + n, 20.0, 70.0);

      for (auto [b0, b1] : {std::pair{-35.7, 1.0}, {0.0, 0.0}, {2.5, -0.3},
                            {-700.0, 0.0}, {600.0, 1.0}, {-30.0, 20.0}}) {
        double s = ref.bernoulli_loglik(in.mu.data(), in.zsign.data(), n, b0, b1);
        double v = simd.bernoulli_loglik(in.mu.data(), in.zsign.data(), n, b0, b1);
        CAPTURE(n);
        CAPTURE(b0);
        CAPTURE(b1);
        CHECK(rel_err(v, s) < 1e-13);
      }

      CHECK(rel_err(simd.ssq_diff(in.a.data(), in.b.data(), n),
                    ref.ssq_diff(in.a.data(), in.b.data(), n)) < 1e-13);
      CHECK(rel_err(simd.sum(in.a.data(), n), ref.sum(in.a.data(), n)) < 1e-12);
      CHECK(rel_err(simd.dot(in.a.data(), in.b.data(), n),
                    ref.dot(in.a.data(), in.b.data(), n)) < 1e-12);

      std::vector<double> ps(n), pv(n);
      ref.logistic_probs(in.mu.data(), n, -35.7, 1.0, ps.data());
      simd.logistic_probs(in.mu.data(), n, -35.7, 1.0, pv.data());
      for (std::size_t j = 0; j < n; ++j) CHECK(rel_err(pv[j], ps[j]) < 1e-14);
    }
  }
  restore_default_backend();
}

TEST_CASE("bernoulli_loglik matches direct per-term evaluation") {
  const kernels::Backend& ref = kernels::scalar_backend();
  Inputs in = random_inputs(97, 7, -5.0, 5.0);
  double b0 = 0.3, b1 = -1.4;
  // independent accumulation in long double, straight from the definition
  long double expect = 0.0L;
  for (std::size_t j = 0; j < in.mu.size(); ++j) {
    long double t = static_cast<long double>(b0) + static_cast<long double>(b1) * in.mu[j];
    long double p = 1.0L / (1.0L + std::exp(-t));
    expect += in.zsign[j] > 0 ? std::log(p) : std::log(1.0L - p);
  }
  double got = ref.bernoulli_loglik(in.mu.data(), in.zsign.data(), in.mu.size(), b0, b1);
  CHECK(rel_err(got, static_cast<double>(expect)) < 1e-12);
}

TEST_CASE("bernoulli_loglik stays finite at extreme logits") {
  for (auto name : kernels::available()) {
    REQUIRE(kernels::select(name));
    const kernels::Backend& b = kernels::active();
    std::vector<double> mu{700.0, -700.0, 0.0, 35.7};
    std::vector<double> zs{1.0, -1.0, 1.0, -1.0};
    double v = b.bernoulli_loglik(mu.data(), zs.data(), 4, 0.0, 1.0);
    CHECK(std::isfinite(v));
    // a mismatched label at a huge logit costs about |t|
    std::vector<double> zbad{-1.0, 1.0};
    double w = b.bernoulli_loglik(mu.data(), zbad.data(), 2, 0.0, 1.0);
    CHECK(w == doctest::Approx(-1400.0).epsilon(1e-9));
  }
  restore_default_backend();
}

TEST_CASE("logistic_probs saturates instead of overflowing") {
  for (auto name : kernels::available()) {
    REQUIRE(kernels::select(name));
    std::vector<double> mu{-900.0, -100.0, 0.0, 100.0, 900.0};
    std::vector<double> p(mu.size());
    kernels::active().logistic_probs(mu.data(), mu.size(), 0.0, 1.0, p.data());
    CHECK(p[0] <= 1e-300);
    CHECK(p[2] == 0.5);
    CHECK(p[4] == 1.0);
    for (double v : p) {
      CHECK(v >= 0.0);
      CHECK(v <= 1.0);
    }
  }
  restore_default_backend();
}
