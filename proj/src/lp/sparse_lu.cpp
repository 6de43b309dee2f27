#include "sparse_lu.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace evacnet::lp::detail {

namespace {
constexpr double kTiny = 1e-11;
constexpr double kThreshold = 0.1;  // relative pivot threshold in the kernel
}  // namespace

bool SparseLU::factor(int m, const std::vector<Column>& cols) {
  m_ = m;
  steps_.clear();
  steps_.reserve(static_cast<std::size_t>(m));
  singular_cols_.clear();
  unpivoted_rows_.clear();
  nnz_ = 0;

  const auto M = static_cast<std::size_t>(m);
  std::vector<std::vector<std::pair<int, double>>> rows(M);
  std::vector<std::vector<int>> col_rows(M);
  std::vector<int> col_count(M, 0);
  for (std::size_t j = 0; j < M; ++j) {
    for (const auto& [r, v] : cols[j]) {
      if (v == 0.0) continue;
      rows[static_cast<std::size_t>(r)].emplace_back(static_cast<int>(j), v);
      col_rows[j].push_back(r);
    }
    col_count[j] = static_cast<int>(col_rows[j].size());
  }

  std::vector<char> row_active(M, 1), col_active(M, 1);
  std::vector<int> col_singletons, row_singletons;
  for (std::size_t j = 0; j < M; ++j) {
    if (col_count[j] == 1) col_singletons.push_back(static_cast<int>(j));
  }
  for (std::size_t r = 0; r < M; ++r) {
    if (rows[r].size() == 1) row_singletons.push_back(static_cast<int>(r));
  }
  std::vector<int> scatter(M, -1);

  auto value_at = [&](int r, int c) {
    for (const auto& [j, v] : rows[static_cast<std::size_t>(r)]) {
      if (j == c) return v;
    }
    return 0.0;
  };
  auto column_max = [&](int c) {
    double mx = 0.0;
    for (int r : col_rows[static_cast<std::size_t>(c)]) {
      if (row_active[static_cast<std::size_t>(r)]) mx = std::max(mx, std::abs(value_at(r, c)));
    }
    return mx;
  };

  for (int k = 0; k < m; ++k) {
    int prow = -1, pcol = -1;

    while (prow < 0 && !col_singletons.empty()) {
      const int c = col_singletons.back();
      col_singletons.pop_back();
      if (!col_active[static_cast<std::size_t>(c)] || col_count[static_cast<std::size_t>(c)] != 1) continue;
      for (int r : col_rows[static_cast<std::size_t>(c)]) {
        if (!row_active[static_cast<std::size_t>(r)]) continue;
        if (std::abs(value_at(r, c)) > kTiny) {
          prow = r;
          pcol = c;
        }
        break;
      }
    }

    while (prow < 0 && !row_singletons.empty()) {
      const int r = row_singletons.back();
      row_singletons.pop_back();
      const auto& row = rows[static_cast<std::size_t>(r)];
      if (!row_active[static_cast<std::size_t>(r)] || row.size() != 1) continue;
      const auto [c, v] = row.front();
      if (std::abs(v) > kTiny && std::abs(v) >= 1e-3 * column_max(c)) {
        prow = r;
        pcol = c;
      }
    }

    if (prow < 0) {
      // Markowitz search over the few sparsest active columns.
      constexpr int kCandidates = 4;
      std::vector<std::pair<int, int>> cand;  // (count, col)
      for (int c = 0; c < m; ++c) {
        if (!col_active[static_cast<std::size_t>(c)] || col_count[static_cast<std::size_t>(c)] == 0) continue;
        cand.emplace_back(col_count[static_cast<std::size_t>(c)], c);
        if (static_cast<int>(cand.size()) > kCandidates) {
          std::nth_element(cand.begin(), cand.begin() + kCandidates, cand.end());
          cand.resize(kCandidates);
        }
      }
      long best_cost = std::numeric_limits<long>::max();
      double best_abs = 0.0;
      for (const auto& [count, c] : cand) {
        const double cmax = column_max(c);
        if (cmax <= kTiny) continue;
        for (int r : col_rows[static_cast<std::size_t>(c)]) {
          if (!row_active[static_cast<std::size_t>(r)]) continue;
          const double v = std::abs(value_at(r, c));
          if (v < kThreshold * cmax || v <= kTiny) continue;
          const long cost = static_cast<long>(rows[static_cast<std::size_t>(r)].size() - 1) *
                            static_cast<long>(count - 1);
          if (cost < best_cost || (cost == best_cost && v > best_abs)) {
            best_cost = cost;
            best_abs = v;
            prow = r;
            pcol = c;
          }
        }
      }
    }

    if (prow < 0) {
      for (int c = 0; c < m; ++c) {
        if (col_active[static_cast<std::size_t>(c)]) singular_cols_.push_back(c);
      }
      for (int r = 0; r < m; ++r) {
        if (row_active[static_cast<std::size_t>(r)]) unpivoted_rows_.push_back(r);
      }
      return false;
    }

    Step step;
    step.row = prow;
    step.col = pcol;
    auto& prow_entries = rows[static_cast<std::size_t>(prow)];
    for (const auto& [j, v] : prow_entries) {
      if (j == pcol) {
        step.pivot = v;
      } else {
        step.upper.emplace_back(j, v);
      }
    }

    for (int r : col_rows[static_cast<std::size_t>(pcol)]) {
      if (r == prow || !row_active[static_cast<std::size_t>(r)]) continue;
      auto& row = rows[static_cast<std::size_t>(r)];
      double arc = 0.0;
      for (std::size_t e = 0; e < row.size(); ++e) {
        if (row[e].first == pcol) {
          arc = row[e].second;
          row[e] = row.back();
          row.pop_back();
          break;
        }
      }
      const double l = arc / step.pivot;
      step.lower.emplace_back(r, l);
      if (l == 0.0) continue;
      for (std::size_t e = 0; e < row.size(); ++e) {
        scatter[static_cast<std::size_t>(row[e].first)] = static_cast<int>(e);
      }
      for (const auto& [j, u] : step.upper) {
        const int at = scatter[static_cast<std::size_t>(j)];
        if (at >= 0) {
          row[static_cast<std::size_t>(at)].second -= l * u;
        } else {
          row.emplace_back(j, -l * u);
          ++col_count[static_cast<std::size_t>(j)];
          col_rows[static_cast<std::size_t>(j)].push_back(r);
        }
      }
      for (const auto& entry : row) scatter[static_cast<std::size_t>(entry.first)] = -1;
      if (row.size() == 1) row_singletons.push_back(r);
    }

    row_active[static_cast<std::size_t>(prow)] = 0;
    col_active[static_cast<std::size_t>(pcol)] = 0;
    for (const auto& [j, u] : step.upper) {
      if (--col_count[static_cast<std::size_t>(j)] == 1) col_singletons.push_back(j);
    }
    prow_entries.clear();
    prow_entries.shrink_to_fit();
    nnz_ += step.upper.size() + step.lower.size() + 1;
    steps_.push_back(std::move(step));
  }
  return true;
}

void SparseLU::ftran(std::vector<double>& b, std::vector<double>& x) const {
  x.assign(static_cast<std::size_t>(m_), 0.0);
  for (const Step& s : steps_) {
    const double t = b[static_cast<std::size_t>(s.row)];
    if (t == 0.0) continue;
    for (const auto& [r, l] : s.lower) b[static_cast<std::size_t>(r)] -= l * t;
  }
  for (auto it = steps_.rbegin(); it != steps_.rend(); ++it) {
    double v = b[static_cast<std::size_t>(it->row)];
    for (const auto& [j, u] : it->upper) v -= u * x[static_cast<std::size_t>(j)];
    x[static_cast<std::size_t>(it->col)] = v / it->pivot;
  }
}

void SparseLU::btran(std::vector<double>& c, std::vector<double>& y) const {
  y.assign(static_cast<std::size_t>(m_), 0.0);
  for (const Step& s : steps_) {
    const double z = c[static_cast<std::size_t>(s.col)] / s.pivot;
    y[static_cast<std::size_t>(s.row)] = z;
    if (z == 0.0) continue;
    for (const auto& [j, u] : s.upper) c[static_cast<std::size_t>(j)] -= u * z;
  }
  for (auto it = steps_.rbegin(); it != steps_.rend(); ++it) {
    double v = y[static_cast<std::size_t>(it->row)];
    for (const auto& [r, l] : it->lower) v -= l * y[static_cast<std::size_t>(r)];
    y[static_cast<std::size_t>(it->row)] = v;
  }
}

}  // namespace evacnet::lp::detail
