#pragma once

#include <array>
#include <cmath>
#include <vector>

#include "tgp/error.hpp"

namespace tgp {

/// Adaptive Simpson integration of an N-component integrand on [a, b].
///
/// The interval is split into `initial_panels` equal panels, each refined
/// until halving it changes every component by at most its share of
/// rel_tol * |coarse estimate|. Afterwards the accepted mesh is checked once
/// more against the same mesh with every panel halved; the finer value is
/// returned and the difference must stay within rel_tol.
template <std::size_t N>
struct QuadratureResult {
  std::array<double, N> value{};
  std::array<double, N> coarse{};
  std::size_t panels = 0;
};

template <std::size_t N, typename F>
QuadratureResult<N> adaptive_simpson(F&& f, double a, double b, double rel_tol, int initial_panels = 512,
                                     int max_depth = 50) {
  using V = std::array<double, N>;
  require(b > a && rel_tol > 0.0 && initial_panels >= 1, ErrorCode::InvalidArgument, "adaptive_simpson: bad input");

  struct Panel {
    double lo, hi;
    V f_lo, f_mid, f_hi;
  };
  auto simpson = [](const Panel& p) {
    V s{};
    for (std::size_t k = 0; k < N; ++k) s[k] = (p.hi - p.lo) / 6.0 * (p.f_lo[k] + 4.0 * p.f_mid[k] + p.f_hi[k]);
    return s;
  };

  std::vector<Panel> work;
  const double h = (b - a) / initial_panels;
  V prev = f(a);
  for (int i = 0; i < initial_panels; ++i) {
    const double lo = a + i * h;
    const double hi = i + 1 == initial_panels ? b : a + (i + 1) * h;
    V next = f(hi);
    work.push_back({lo, hi, prev, f(0.5 * (lo + hi)), next});
    prev = next;
  }
  V scale{};
  for (const auto& p : work) {
    const V s = simpson(p);
    for (std::size_t k = 0; k < N; ++k) scale[k] += s[k];
  }
  for (auto& s : scale) s = std::abs(s);

  // Depth-first refinement; accepted panels are kept in order of discovery.
  std::vector<Panel> accepted;
  std::vector<std::pair<Panel, int>> stack;
  for (auto it = work.rbegin(); it != work.rend(); ++it) stack.push_back({*it, 0});
  bool converged = true;
  while (!stack.empty()) {
    auto [p, depth] = stack.back();
    stack.pop_back();
    const double mid = 0.5 * (p.lo + p.hi);
    Panel left{p.lo, mid, p.f_lo, f(0.5 * (p.lo + mid)), p.f_mid};
    Panel right{mid, p.hi, p.f_mid, f(0.5 * (mid + p.hi)), p.f_hi};
    const V whole = simpson(p), l = simpson(left), r = simpson(right);
    bool ok = true;
    for (std::size_t k = 0; k < N; ++k) {
      const double local_tol = rel_tol * scale[k] * (p.hi - p.lo) / (b - a);
      if (std::abs(l[k] + r[k] - whole[k]) > local_tol) ok = false;
    }
    if (ok || depth >= max_depth) {
      if (!ok) converged = false;
      accepted.push_back(p);
    } else {
      stack.push_back({right, depth + 1});
      stack.push_back({left, depth + 1});
    }
  }
  require(converged, ErrorCode::QuadratureNotConverged, "adaptive_simpson: maximum refinement depth reached");

  QuadratureResult<N> out;
  out.panels = accepted.size();
  for (const auto& p : accepted) {
    const double mid = 0.5 * (p.lo + p.hi);
    const V whole = simpson(p);
    const V l = simpson(Panel{p.lo, mid, p.f_lo, f(0.5 * (p.lo + mid)), p.f_mid});
    const V r = simpson(Panel{mid, p.hi, p.f_mid, f(0.5 * (mid + p.hi)), p.f_hi});
    for (std::size_t k = 0; k < N; ++k) {
      out.coarse[k] += whole[k];
      out.value[k] += l[k] + r[k];
    }
  }
  for (std::size_t k = 0; k < N; ++k) {
    const double tol = rel_tol * std::max(std::abs(out.value[k]), 1e-300);
    require(std::abs(out.value[k] - out.coarse[k]) <= tol, ErrorCode::QuadratureNotConverged,
            "adaptive_simpson: result not stable under one halving of the mesh");
  }
  return out;
}

}  // namespace tgp
