#include <doctest.h>

#include <vector>

#include "gapbridge/similarity.hpp"
#include "oracles/brute_force.hpp"
#include "support/expect_error.hpp"
#include "support/test_support.hpp"

using namespace gapbridge;
using gapbridge::testing::Gen;

namespace {

std::vector<std::string> ids(const std::vector<ScoredCandidate>& v) {
  std::vector<std::string> out;
  for (const auto& c : v) out.push_back(c.item_id);
  return out;
}

}  // namespace

TEST_SUITE("similarity") {

TEST_CASE("cosine of known vectors") {
  const std::vector<float> u = {0.6f, 0.8f}, v = {0.8f, 0.6f};
  CHECK(cosine(u, v) == doctest::Approx(0.96).epsilon(1e-7));
  CHECK_THROWS_CODE(cosine(u, std::vector<float>{1, 0, 0}), ErrorCode::kDimMismatch);
}

TEST_CASE("cosine is symmetric bit-for-bit (property)") {
  for (std::size_t c = 0; c < 500; ++c) {
    Gen gen = Gen::for_case(7, c);
    const std::size_t d = gen.between(1, 300);
    auto u = gen.gaussian_vector(d), v = gen.gaussian_vector(d);
    CHECK(cosine(u, v) == cosine(v, u));
  }
}

TEST_CASE("select_top_k orders by score then position") {
  const std::vector<double> s = {0.5, 0.9, 0.5, 0.9, 0.1};
  CHECK(select_top_k(s, 3) == std::vector<std::uint32_t>{1, 3, 0});
  CHECK(select_top_k(s, 10) == std::vector<std::uint32_t>{1, 3, 0, 2, 4});
  CHECK(select_top_k(s, 0).empty());
}

TEST_CASE("top_k edge cases") {
  Gen gen(5);
  auto store = testing::random_store(gen, {4, 0, 3, false});
  const std::vector<float> q = {1, 0, 0};
  CHECK(top_k(q, store.view(Modality::kText), 0).empty());
  CHECK(top_k(q, store.view(Modality::kText), 99).size() == 4);
  CHECK_THROWS_CODE(top_k(q, store.view(Modality::kImage), 1), ErrorCode::kEmptyModality);
  CHECK_THROWS_CODE(top_k(std::vector<float>{1, 0}, store.view(Modality::kText), 1),
                    ErrorCode::kDimMismatch);
  for (const auto& c : top_k(q, store.view(Modality::kText), 4)) {
    CHECK(c.modality == Modality::kText);
    CHECK_FALSE(c.std_score.has_value());
    CHECK(c.raw_cos >= -1.0 - 1e-6);
    CHECK(c.raw_cos <= 1.0 + 1e-6);
  }
}

TEST_CASE("exact ties go to the smaller id") {
  auto store = EmbeddingStore::from_records({
      {{"b", Modality::kText, {}, {}}, {1, 0}},
      {{"a", Modality::kText, {}, {}}, {1, 0}},
      {{"c", Modality::kText, {}, {}}, {0, 1}},
  });
  CHECK(ids(top_k(std::vector<float>{1, 0}, store.view(Modality::kText), 2)) ==
        std::vector<std::string>{"a", "b"});
}

TEST_CASE("top_k equals the stable-sort oracle (property)") {
  for (std::size_t c = 0; c < 150; ++c) {
    CAPTURE(c);
    Gen gen = Gen::for_case(1234, c);
    const bool lattice = gen.coin(0.4);
    const std::size_t dim = gen.between(1, 12);
    auto store = testing::random_store(gen, {gen.between(1, 300), gen.between(1, 300), dim, lattice});
    auto q = lattice ? gen.lattice_vector(dim) : gen.gaussian_vector(dim);
    for (Modality m : kModalities) {
      const auto view = store.view(m);
      for (std::size_t k : {std::size_t{1}, std::size_t{3}, std::size_t{17}, view.size(),
                            view.size() + 5}) {
        CHECK(ids(top_k(q, view, k)) == oracle::top_k_ids(q, store, m, k));
      }
    }
  }
}

TEST_CASE("prefix property (property)") {
  for (std::size_t c = 0; c < 100; ++c) {
    CAPTURE(c);
    Gen gen = Gen::for_case(77, c);
    auto store = testing::random_store(gen, {gen.between(1, 200), 1, 6, gen.coin()});
    auto q = gen.lattice_vector(6);
    const auto view = store.view(Modality::kText);
    const std::size_t k2 = gen.between(0, view.size() + 2);
    const std::size_t k1 = gen.between(0, k2);
    const auto small = top_k(q, view, k1);
    const auto big = top_k(q, view, k2);
    REQUIRE(small.size() <= big.size());
    for (std::size_t i = 0; i < small.size(); ++i) CHECK(small[i] == big[i]);
  }
}

}  // TEST_SUITE
