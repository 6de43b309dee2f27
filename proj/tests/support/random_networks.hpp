#pragma once

#include <algorithm>
#include <random>
#include <set>
#include <utility>
#include <vector>

#include "evacnet/evac.hpp"
#include "evacnet/grid.hpp"

namespace evacnet::testing {

struct RandomSpec {
  int max_nodes = 6;     // including the safe place
  int max_capacity = 4;  // per passage
  int max_people = 8;
  int max_cell = 6;
};

// Random connected network: every cell links to an earlier node (node 0 is
// reached through a one-way exit arc), plus a few extra two-way passages.
inline EvacuationProblem random_problem(std::mt19937_64& rng, const RandomSpec& spec = {}) {
  std::uniform_int_distribution<int> nodes(2, spec.max_nodes);
  std::uniform_int_distribution<int> cap(1, spec.max_capacity);
  std::uniform_int_distribution<int> cell(1, spec.max_cell);
  const int n = nodes(rng);
  std::vector<Arc> arcs;
  std::set<std::pair<int, int>> used;
  auto link = [&](int a, int b) {
    if (a == b || used.count(std::minmax(a, b))) return;
    used.insert(std::minmax(a, b));
    const int c = cap(rng);
    if (b == kSafeNode) {
      arcs.push_back({a, b, c, 0});
    } else {
      arcs.push_back({a, b, c, 0});
      arcs.push_back({b, a, c, 0});
    }
  };
  for (int i = 1; i < n; ++i) {
    std::uniform_int_distribution<int> parent(0, i - 1);
    link(i, parent(rng));
  }
  const int extra = static_cast<int>(rng() % 3);
  for (int e = 0; e < extra; ++e) {
    std::uniform_int_distribution<int> any(0, n - 1);
    const int a = any(rng);
    const int b = any(rng);
    if (a == 0) {
      link(b, a);
    } else {
      link(a, b);
    }
  }
  std::vector<int> caps(static_cast<std::size_t>(n), 0);
  for (int i = 1; i < n; ++i) caps[static_cast<std::size_t>(i)] = cell(rng);

  EvacuationProblem prob;
  prob.network = make_network(n, caps, arcs, 1.0);
  prob.initial.assign(static_cast<std::size_t>(n), 0);
  std::uniform_int_distribution<int> people(0, spec.max_people);
  int left = people(rng);
  for (int tries = 0; left > 0 && tries < 100; ++tries) {
    std::uniform_int_distribution<int> pick(1, n - 1);
    const auto i = static_cast<std::size_t>(pick(rng));
    if (prob.initial[i] < caps[i]) {
      ++prob.initial[i];
      --left;
    }
  }
  return prob;
}

}  // namespace evacnet::testing
