#include <doctest.h>

#include <cmath>
#include <random>

#include "noisycover/kernels.hpp"
#include "noisycover/oracle.hpp"

using namespace noisycover;

namespace {

Dataset random_dataset(int m, int d, int k, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Dataset data;
  data.images = RowMatrix::NullaryExpr(m, d, [&] { return u(rng); });
  for (int i = 0; i < m; ++i) data.labels.push_back(i % k);
  data.num_classes = k;
  return data;
}

}  // namespace

TEST_CASE("batched outputs match the per-example reference") {
  const NetworkArch a{12, {9, 7, 4}, 0.2, 0.1};
  const ParamSet p = init_params(a, 6);
  // 77 rows: blocks are not a multiple of the row count
  const Dataset data = random_dataset(77, 12, 4, 2);

  const Matrix s = kernels::batch_outputs_serial(p, data, EvalMode::deterministic(), 0.0, 0);
  const Matrix q = kernels::batch_outputs_parallel(p, data, EvalMode::deterministic(), 0.0, 0);
  CHECK((s - q).cwiseAbs().maxCoeff() <= 1e-12);

  const Matrix se = kernels::batch_outputs_serial(p, data, EvalMode::expected(13), 0.2, 99);
  const Matrix qe = kernels::batch_outputs_parallel(p, data, EvalMode::expected(13), 0.2, 99);
  CHECK((se - qe).cwiseAbs().maxCoeff() <= 1e-12);

  Rng rng = example_stream(99, 40);
  const Vector ref = expected_output(p, data.row(40), 0.2, 13, rng);
  CHECK((se.row(40).transpose() - ref).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("gaussian smoothing matches the direct sum") {
  std::vector<double> centres;
  std::vector<double> values;
  for (int j = 0; j < 400; ++j) {
    centres.push_back(-1.0 + (j + 0.5) * 0.005);
    values.push_back(1.0 + std::sin(j * 0.1));
  }
  const auto s = kernels::gaussian_smooth_serial(centres, values, 0.005, 0.1, -2.0, 0.01, 400);
  const auto q = kernels::gaussian_smooth_parallel(centres, values, 0.005, 0.1, -2.0, 0.01, 400);
  REQUIRE(s.size() == 400);
  for (std::size_t k = 0; k < s.size(); ++k) {
    CHECK(s[k] == q[k]);
    const double x = -2.0 + 0.01 * static_cast<double>(k);
    double direct = 0.0;
    for (std::size_t j = 0; j < centres.size(); ++j) {
      const double d = (x - centres[j]) / 0.1;
      direct += values[j] * 0.005 * std::exp(-0.5 * d * d) / (0.1 * std::sqrt(2 * M_PI));
    }
    // terms beyond 8 sigma are dropped by design
    CHECK(std::abs(s[k] - direct) <= 1e-12);
  }
}

TEST_CASE("distance kernels agree") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<Matrix> pool(50);
  for (Matrix& m : pool) m = Matrix::NullaryExpr(6, 3, [&] { return g(rng); });
  const Matrix query = Matrix::NullaryExpr(6, 3, [&] { return g(rng); });
  for (bool sup : {true, false}) {
    const auto s = kernels::distances_serial(query, pool, sup);
    const auto q = kernels::distances_parallel(query, pool, sup);
    CHECK(s == q);
    const auto metric = sup ? ExtendedMetric::kSup : ExtendedMetric::kL2;
    CHECK(s[7] == extended_distance(query, pool[7], metric));
  }
}
