#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "semtarget/embedding.hpp"
#include "semtarget/error.hpp"

using namespace semtarget;

namespace {

std::string load_error(std::string_view text) {
  try {
    load_embeddings(text);
  } catch (const ValidationError& e) {
    return e.what();
  }
  return {};
}

EmbeddingSet random_set(std::mt19937_64& rng, std::size_t c, std::size_t d) {
  std::normal_distribution<double> n(0.0, 1.0);
  EmbeddingSet e;
  e.source_name = "rand";
  e.dim = d;
  for (std::size_t i = 0; i < c; ++i) {
    EmbeddingEntry entry{i, "c" + std::to_string(i), {}};
    for (std::size_t k = 0; k < d; ++k) entry.vector.push_back(n(rng));
    e.entries.push_back(std::move(entry));
  }
  return e;
}

}  // namespace

TEST(Embedding, SmallestValidSet) {
  const auto e = load_embeddings(
      "{\"class_index\":0,\"label\":\"x\",\"vector\":[1,0,0]}\n"
      "{\"class_index\":1,\"label\":\"y\",\"vector\":[0,1,0]}\n");
  EXPECT_EQ(e.size(), 2u);
  EXPECT_EQ(e.dim, 3u);
  EXPECT_EQ(e.labels(), (std::vector<std::string>{"x", "y"}));
}

TEST(Embedding, HeaderAndOutOfOrderLines) {
  const auto e = load_embeddings(
      "{\"source\":\"bert\",\"dim\":2,\"pooling\":\"mean\"}\n"
      "{\"class_index\":1,\"label\":\"y\",\"vector\":[0,1]}\n"
      "{\"class_index\":0,\"label\":\"x\",\"vector\":[1,0]}\n");
  EXPECT_EQ(e.source_name, "bert");
  EXPECT_EQ(e.entries[0].label, "x");
  ASSERT_EQ(e.attributes.count("pooling"), 1u);
  EXPECT_EQ(e.attributes.at("pooling"), "\"mean\"");
}

TEST(Embedding, Errors) {
  EXPECT_NE(load_error("{\"class_index\":0,\"label\":\"x\",\"vector\":[0,0,0]}\n").find("zero-norm"),
            std::string::npos);
  EXPECT_NE(load_error("{\"class_index\":0,\"label\":\"x\",\"vector\":[1,0,0]}\n"
                       "{\"class_index\":1,\"label\":\"y\",\"vector\":[1,0,0,0]}\n")
                .find("dimension mismatch"),
            std::string::npos);
  EXPECT_FALSE(load_error("{\"class_index\":0,\"label\":\"x\",\"vector\":[1]}\n"
                          "{\"class_index\":0,\"label\":\"y\",\"vector\":[1]}\n")
                   .empty());
  EXPECT_FALSE(load_error("{\"class_index\":1,\"label\":\"x\",\"vector\":[1]}\n").empty());
  EXPECT_FALSE(load_error("not json\n").empty());
  EXPECT_FALSE(load_error("").empty());
}

TEST(Embedding, CosineExamples) {
  const std::vector<double> e1{1, 0}, e2{0, 1}, d{1, 1};
  EXPECT_EQ(cosine(e1, e1), 1.0);
  EXPECT_EQ(cosine(e1, e2), 0.0);
  EXPECT_NEAR(cosine(d, e1), std::sqrt(2.0) / 2.0, 1e-15);
  EXPECT_THROW(cosine(e1, std::vector<double>{1, 0, 0}), ValidationError);
}

TEST(Embedding, CosineMatrixToy) {
  EmbeddingSet e;
  e.dim = 2;
  e.entries = {{0, "a", {1, 0}}, {1, "b", {1, 1}}, {2, "c", {0, 1}}};
  const auto m = cosine_matrix(e);
  EXPECT_NEAR(m.at(0, 1), 0.70710678118654752, 1e-15);
  EXPECT_EQ(m.at(0, 2), 0.0);
  EXPECT_NEAR(m.at(1, 2), 0.70710678118654752, 1e-15);
}

TEST(Embedding, OrthonormalGivesIdentity) {
  EmbeddingSet e;
  e.dim = 3;
  e.entries = {{0, "a", {1, 0, 0}}, {1, "b", {0, 1, 0}}, {2, "c", {0, 0, 1}}};
  const auto m = cosine_matrix(e);
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j) EXPECT_EQ(m.at(i, j), i == j ? 1.0 : 0.0);
}

TEST(Embedding, MatrixPropertiesOnRandomSets) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> scale(0.01, 100.0);
  for (int trial = 0; trial < 50; ++trial) {
    auto e = random_set(rng, 2 + trial % 12, 1 + trial % 9);
    const auto m = cosine_matrix(e);
    for (std::size_t i = 0; i < m.size; ++i) {
      EXPECT_NEAR(m.at(i, i), 1.0, 1e-12);
      for (std::size_t j = 0; j < m.size; ++j) {
        EXPECT_NEAR(m.at(i, j), m.at(j, i), 1e-12);
        EXPECT_EQ(m.at(i, j), cosine(e.vector(i), e.vector(j)));
        EXPECT_GE(m.at(i, j), -1.0);
        EXPECT_LE(m.at(i, j), 1.0);
      }
    }
    for (auto& entry : e.entries) {
      const double s = scale(rng);
      for (auto& v : entry.vector) v *= s;
    }
    const auto scaled = cosine_matrix(e);
    for (std::size_t k = 0; k < m.values.size(); ++k) EXPECT_NEAR(scaled.values[k], m.values[k], 1e-12);
  }
}

TEST(Embedding, SerializeRoundTripIsBitExact) {
  std::mt19937_64 rng(4);
  auto e = random_set(rng, 7, 5);
  e.entries[0].vector[0] = 1e-300;
  e.entries[1].vector[1] = -0.1;
  e.attributes["revision"] = "\"abc\"";
  const auto back = load_embeddings(serialize_embeddings(e));
  EXPECT_EQ(back.source_name, e.source_name);
  EXPECT_EQ(back.attributes, e.attributes);
  ASSERT_EQ(back.size(), e.size());
  for (std::size_t i = 0; i < e.size(); ++i) {
    EXPECT_EQ(back.entries[i].label, e.entries[i].label);
    EXPECT_EQ(back.entries[i].vector, e.entries[i].vector);
  }
  EXPECT_EQ(serialize_embeddings(back), serialize_embeddings(e));
}
