#include <doctest.h>

#include <deque>
#include <map>

#include <json.hpp>

#include "stree/tree_geometry.hpp"

using namespace stree;

namespace {

// Graph distances by breadth-first search over the parent links of a ball.
std::vector<int> bfs(const Ball& b, int from) {
  std::vector<std::vector<int>> adj(b.size());
  for (std::size_t i = 1; i < b.size(); ++i) {
    adj[i].push_back(b.parent[i]);
    adj[b.parent[i]].push_back(static_cast<int>(i));
  }
  std::vector<int> d(b.size(), -1);
  std::deque<int> todo{from};
  d[from] = 0;
  while (!todo.empty()) {
    const int v = todo.front();
    todo.pop_front();
    for (int w : adj[v])
      if (d[w] < 0) {
        d[w] = d[v] + 1;
        todo.push_back(w);
      }
  }
  return d;
}

}  // namespace

TEST_CASE("tree constants") {
  const auto p = TreeParams::make(2);
  CHECK(p.gamma == doctest::Approx(2.0 * std::sqrt(2.0) / 3.0).epsilon(1e-15));
  CHECK(p.b2 == doctest::Approx(1.0 - 2.0 * std::sqrt(2.0) / 3.0).epsilon(1e-15));
  CHECK(p.R0 == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  CHECK_THROWS_AS(TreeParams::make(1), DomainError);
}

TEST_CASE("sphere and ball sizes against enumeration") {
  for (int q : {2, 3, 4}) {
    const auto p = TreeParams::make(q);
    const Ball b = enumerate_ball(p, 6);
    std::map<int, std::uint64_t> count;
    for (int d : b.depth) ++count[d];
    for (int n = 0; n <= 6; ++n) {
      CHECK(count[n] == sphere_size(p, n));
      CHECK(sphere_size_real(p, n) == static_cast<double>(sphere_size(p, n)));
      CHECK(std::exp(log_sphere_size(p, n)) == doctest::Approx(sphere_size_real(p, n)).epsilon(1e-13));
      CHECK(ball_volume_real(p, n) == doctest::Approx(static_cast<double>(ball_volume(p, n))).epsilon(1e-15));
    }
    CHECK(b.size() == ball_volume(p, 6));
  }
  CHECK(sphere_size(TreeParams::make(2), 3) == 12);
  CHECK(ball_volume(TreeParams::make(2), 3) == 22);
  CHECK(sphere_size(TreeParams::make(2), 200) == std::numeric_limits<std::uint64_t>::max());
}

TEST_CASE("word distance equals graph distance") {
  const auto p = TreeParams::make(2);
  const Ball b = enumerate_ball(p, 5);
  for (int from : {0, 1, 7, 30, 80}) {
    const auto d = bfs(b, from);
    for (std::size_t i = 0; i < b.size(); ++i) CHECK(distance(b.vertices[from], b.vertices[i]) == d[i]);
  }
}

TEST_CASE("step is an involution and moves by one") {
  const auto p = TreeParams::make(3);
  Vertex v = root_vertex();
  for (int label : {0, 2, 1, 3, 0}) {
    const Vertex w = step(v, label);
    CHECK(distance(v, w) == 1);
    CHECK(step(w, label) == v);
    v = w;
  }
  (void)p;
}

TEST_CASE("shell counts against enumeration") {
  for (int q : {2, 3}) {
    const auto p = TreeParams::make(q);
    const Ball b = enumerate_ball(p, 8);
    for (int k = 0; k <= 3; ++k) {
      int x = 0;
      while (b.depth[x] != k) ++x;
      const auto d = bfs(b, x);
      for (int n = 0; n <= 5; ++n) {
        std::map<int, double> brute;
        for (std::size_t i = 0; i < b.size(); ++i)
          if (d[i] == n) brute[b.depth[i]] += 1.0;
        std::map<int, double> formula;
        for (const auto& sc : shell_counts(p, k, n)) formula[sc.depth] += sc.count;
        CHECK(brute == formula);
      }
    }
  }
}

TEST_CASE("ball enumeration respects the budget") {
  const auto p = TreeParams::make(2);
  CHECK_THROWS_AS(enumerate_ball(p, 20, 1000), BudgetError);
  const Ball b = enumerate_ball(p, 2);
  const auto j = nlohmann::json::parse(b.to_json());
  CHECK(j["vertices"].size() == 10);
  CHECK(j["radius"] == 2);
  for (std::size_t i = 0; i < b.size(); ++i) CHECK(b.index_of.at(b.vertices[i]) == static_cast<int>(i));
}

TEST_CASE("volume doubling fails but the growth condition holds") {
  const auto rep = check_volume_conditions(TreeParams::make(2), 20);
  CHECK(rep.pass);
  CHECK(rep.A == 1);
  CHECK(rep.c1_witnessed < 1.0);
  CHECK(rep.ratio_max <= 4.0);
}

TEST_CASE("uniform sphere vertex is uniform") {
  const auto p = TreeParams::make(2);
  const Vertex x = step(root_vertex(), 1);
  std::mt19937_64 rng(3);
  std::map<Vertex, int> hits;
  const int n = 60000;
  for (int i = 0; i < n; ++i) {
    const Vertex v = uniform_sphere_vertex(p, x, 2, rng);
    CHECK(distance(x, v) == 2);
    ++hits[v];
  }
  REQUIRE(hits.size() == sphere_size(p, 2));
  double chi = 0.0;
  const double e = static_cast<double>(n) / hits.size();
  for (const auto& [v, c] : hits) chi += (c - e) * (c - e) / e;
  CHECK(chi < 20.5);  // 5 df, 0.1%
}
