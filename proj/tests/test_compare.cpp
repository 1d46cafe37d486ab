#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "csw/compare.hpp"
#include "csw/error.hpp"
#include "csw/ot.hpp"
#include "oracles.hpp"

using namespace csw;

namespace {

LabeledDataset clustered(std::size_t per_label, std::size_t labels, std::size_t d) {
  auto& g = oracle::rng();
  std::vector<Tensor3> images;
  std::vector<int> out;
  for (std::size_t label = 0; label < labels; ++label) {
    for (std::size_t i = 0; i < per_label; ++i) {
      images.push_back(oracle::random_tensor(1, d, g, 0.3, static_cast<double>(label)));
      out.push_back(static_cast<int>(label));
    }
  }
  return make_dataset(std::move(images), std::move(out), Normalization::none);
}

}  // namespace

TEST_CASE("shared-projection matrix equals per-pair distance calls") {
  const auto ds = clustered(14, 3, 8);
  const auto splits = split_by_class(ds, 12, 4);
  for (const char* name : {"sw", "csw-b", "csw-s", "ncsw-d", "csw-full"}) {
    CAPTURE(name);
    MethodSpec s = parse_method(name);
    s.L = 15;
    const auto m = class_distance_matrix(splits, s, 2);
    for (std::size_t i = 0; i < 3; ++i) {
      CHECK(m[i][i] == distance(splits[i].half_a, splits[i].half_b, s, 1));
      for (std::size_t j = 0; j < 3; ++j) {
        if (i != j) CHECK(m[i][j] == distance(splits[i].full, splits[j].full, s, 1));
      }
    }
  }
}

TEST_CASE("ascent and exact methods fill the matrix pairwise") {
  const auto ds = clustered(8, 2, 4);
  const auto splits = split_by_class(ds, 8, 4);
  MethodSpec s = parse_method("max-csw-s");
  s.steps = 3;
  const auto m = class_distance_matrix(splits, s, 1);
  CHECK(m[0][1] == distance(splits[0].full, splits[1].full, s, 1));
  CHECK(m[1][1] == distance(splits[1].half_a, splits[1].half_b, s, 1));
  const auto e = class_distance_matrix(splits, parse_method("exact"), 3);
  CHECK(e[0][1] == doctest::Approx(e[1][0]).epsilon(1e-12));
}

TEST_CASE("separated classes give small diagonal and large off-diagonal") {
  const auto ds = clustered(40, 4, 8);
  MethodSpec s = parse_method("csw-s");
  s.L = 50;
  const auto r = compare_classes(ds, s, 0, 1, 1);
  CHECK(r.per_class == 40);
  CHECK(r.classes == std::vector<int>{0, 1, 2, 3});
  CHECK(!r.stddev);
  CHECK(r.param_count == 4 + 4 + 4 + 1);
  double max_diag = 0.0, min_off = 1e300;
  for (std::size_t i = 0; i < 4; ++i) {
    for (std::size_t j = 0; j < 4; ++j) {
      CHECK(r.matrix[i][j] >= 0.0);
      if (i == j) max_diag = std::max(max_diag, r.matrix[i][j]);
      else min_off = std::min(min_off, r.matrix[i][j]);
    }
  }
  CHECK(min_off / max_diag > 5.0);
}

TEST_CASE("repeats add a positive standard deviation at L=1") {
  const auto ds = clustered(20, 3, 8);
  MethodSpec s = parse_method("csw-s");
  s.L = 1;
  const auto r = compare_classes(ds, s, 20, 5, 1);
  REQUIRE(r.stddev);
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t j = 0; j < 3; ++j) {
      if (i != j) CHECK((*r.stddev)[i][j] > 0.0);
    }
  }
  // The first repetition keeps the caller's seed.
  const auto single = compare_classes(ds, s, 20, 1, 1);
  const auto splits = split_by_class(ds, 20, s.seed);
  CHECK(single.matrix == class_distance_matrix(splits, s, 1));
}

TEST_CASE("compare is deterministic across thread counts") {
  const auto ds = clustered(16, 3, 8);
  MethodSpec s = parse_method("csw-d");
  s.L = 20;
  const auto a = compare_classes(ds, s, 16, 2, 1);
  const auto b = compare_classes(ds, s, 16, 2, 4);
  CHECK(a.matrix == b.matrix);
  CHECK(*a.stddev == *b.stddev);
}

TEST_CASE("assignment-backed methods refuse oversized classes") {
  const auto ds = clustered(kMaxAssignmentSize + 1, 2, 2);
  try {
    compare_classes(ds, parse_method("exact"), 0, 1, 1);
    FAIL("expected capacity error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::capacity);
  }
}

TEST_CASE("compare validates arguments") {
  const auto ds = clustered(4, 2, 4);
  CHECK_THROWS_AS(compare_classes(ds, parse_method("sw"), 4, 0, 1), Error);
  CHECK_THROWS_AS(compare_classes(ds, parse_method("sw"), 5, 1, 1), Error);
}
