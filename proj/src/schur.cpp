#include <omp.h>

#include "qextrap/solver.hpp"

namespace qextrap::conic {

namespace {
RMatrix dense(const std::vector<BlockEntry>& entries, int n) {
  RMatrix a = RMatrix::Zero(n, n);
  for (const auto& e : entries) a(e.row, e.col) += e.w;
  return a;
}
}  // namespace

// Straightforward dense evaluation; slow but easy to trust.
void schur_accumulate_reference(const SchurBlock& b, const RMatrix& x, const RMatrix& zinv, RMatrix& m) {
  const int k = static_cast<int>(b.mats.size());
  for (int i = 0; i < k; ++i) {
    const RMatrix g = x * dense(b.mats[i], b.order) * zinv;
    for (int j = i; j < k; ++j) {
      double v = 0.0;
      for (const auto& e : b.mats[j]) v += e.w * g(e.col, e.row);
      const int r = b.constraint[i], c = b.constraint[j];
      if (r <= c) m(r, c) += v;
      else m(c, r) += v;
    }
  }
}

// Sparse pairs use tr(A_i X A_j Zinv) = sum w u X(c,p) Zinv(q,r); matrices with more
// nonzeros than the block order go through G_i = Zinv A_i X instead.
void schur_accumulate_parallel(const SchurBlock& b, const RMatrix& x, const RMatrix& zinv, RMatrix& m) {
  const int k = static_cast<int>(b.mats.size());
  const int n = b.order;
  std::vector<int> dense_slot(k, -1);
  std::vector<int> dense_ids;
  for (int i = 0; i < k; ++i)
    if (static_cast<int>(b.mats[i].size()) > n) {
      dense_slot[i] = static_cast<int>(dense_ids.size());
      dense_ids.push_back(i);
    }
  std::vector<RMatrix> g(dense_ids.size());
#pragma omp parallel for schedule(dynamic)
  for (int s = 0; s < static_cast<int>(dense_ids.size()); ++s) {
    RMatrix ax = RMatrix::Zero(n, n);
    for (const auto& e : b.mats[dense_ids[s]]) ax.row(e.row) += e.w * x.row(e.col);
    g[s] = zinv * ax;
  }
#pragma omp parallel for schedule(dynamic, 4)
  for (int i = 0; i < k; ++i) {
    const auto& ai = b.mats[i];
    for (int j = i; j < k; ++j) {
      const auto& aj = b.mats[j];
      double v = 0.0;
      if (dense_slot[i] >= 0) {
        const RMatrix& gi = g[dense_slot[i]];
        for (const auto& e : aj) v += e.w * gi(e.col, e.row);
      } else if (dense_slot[j] >= 0) {
        const RMatrix& gj = g[dense_slot[j]];
        for (const auto& e : ai) v += e.w * gj(e.col, e.row);
      } else {
        for (const auto& e : ai)
          for (const auto& f : aj) v += e.w * f.w * x(e.col, f.row) * zinv(f.col, e.row);
      }
      const int r = b.constraint[i], c = b.constraint[j];
      if (r <= c) m(r, c) += v;
      else m(c, r) += v;
    }
  }
}

}  // namespace qextrap::conic
