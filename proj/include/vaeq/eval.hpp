#pragma once

// Ambiguity-aware symbol error rate and channel-estimate alignment.
// Blind equalizers recover the symbol stream only up to a constellation
// rotation (multiples of 90 degrees for QPSK) and an integer delay, so
// both are searched before scoring.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <vector>

#include "vaeq/complex_seq.hpp"

namespace vaeq {

inline constexpr int kRotationsDeg[4] = {0, 90, 180, 270};

// Rotation by r in {1, j, -1, -j} for deg in {0, 90, 180, 270}.
inline cplx rotate(cplx v, int deg) {
  switch (deg) {
    case 0: return v;
    case 90: return {-v.imag(), v.real()};
    case 180: return {-v.real(), -v.imag()};
    case 270: return {v.imag(), -v.real()};
    default: throw std::invalid_argument("rotate: degree not a multiple of 90");
  }
}

inline ComplexSeq rotate(const ComplexSeq& s, int deg) {
  ComplexSeq out(s.size());
  for (std::size_t k = 0; k < s.size(); ++k) out.set(k, rotate(s[k], deg));
  return out;
}

// Fraction of positions where either rail differs. Inputs are exact QPSK
// points, so per-rail sign comparison is exact.
inline double ser(const ComplexSeq& estimated, const ComplexSeq& truth) {
  if (estimated.size() != truth.size())
    throw std::invalid_argument("ser: length mismatch");
  if (estimated.empty()) throw std::invalid_argument("ser: empty sequences");
  std::size_t errors = 0;
  for (std::size_t k = 0; k < truth.size(); ++k) {
    const bool re_differs = (estimated.re[k] > 0.0) != (truth.re[k] > 0.0);
    const bool im_differs = (estimated.im[k] > 0.0) != (truth.im[k] > 0.0);
    if (re_differs || im_differs) ++errors;
  }
  return static_cast<double>(errors) / static_cast<double>(truth.size());
}

struct AmbiguityResolution {
  int rotation_deg = 0;
  std::ptrdiff_t delay = 0;
  double ser = 1.0;
};

namespace detail {

// SER of the hypothesis "estimated[k] = rot * truth[k - d]" over the
// overlapping window; empty overlap yields no score.
inline bool hypothesis_ser(const ComplexSeq& est, const ComplexSeq& truth, int deg,
                           std::ptrdiff_t d, double& out) {
  const std::ptrdiff_t e_len = static_cast<std::ptrdiff_t>(est.size());
  const std::ptrdiff_t t_len = static_cast<std::ptrdiff_t>(truth.size());
  const std::ptrdiff_t lo = std::max<std::ptrdiff_t>(0, d);
  const std::ptrdiff_t hi = std::min(e_len, t_len + d);
  if (hi <= lo) return false;
  std::size_t errors = 0;
  for (std::ptrdiff_t k = lo; k < hi; ++k) {
    const cplx want = rotate(truth[static_cast<std::size_t>(k - d)], deg);
    const bool re_differs = (est.re[k] > 0.0) != (want.real() > 0.0);
    const bool im_differs = (est.im[k] > 0.0) != (want.imag() > 0.0);
    if (re_differs || im_differs) ++errors;
  }
  out = static_cast<double>(errors) / static_cast<double>(hi - lo);
  return true;
}

}  // namespace detail

// Minimizes SER over the four rotations and delays in [-D, D]. Ties prefer
// the smallest |d| (positive before negative), then rotation order
// 0, 90, 180, 270.
inline AmbiguityResolution resolve_ambiguity(const ComplexSeq& estimated,
                                             const ComplexSeq& truth,
                                             std::ptrdiff_t max_delay) {
  if (max_delay < 0) throw std::invalid_argument("resolve_ambiguity: negative delay bound");
  if (estimated.empty() || truth.empty())
    throw std::invalid_argument("resolve_ambiguity: empty sequences");

  AmbiguityResolution best;
  best.ser = std::numeric_limits<double>::infinity();
  bool any = false;
  for (std::ptrdiff_t mag = 0; mag <= max_delay; ++mag) {
    for (int sign_pass = 0; sign_pass < (mag == 0 ? 1 : 2); ++sign_pass) {
      const std::ptrdiff_t d = sign_pass == 0 ? mag : -mag;
      for (int deg : kRotationsDeg) {
        double s;
        if (!detail::hypothesis_ser(estimated, truth, deg, d, s)) continue;
        any = true;
        if (s < best.ser) best = {deg, d, s};
      }
    }
  }
  if (!any) throw std::invalid_argument("resolve_ambiguity: empty overlap at every delay");
  return best;
}

// min over rotations and integer shifts of ||h_true - rot(shift(h_est))||_2,
// normalized by ||h_true||_2. Shifted positions outside either support are
// zero-padded, so estimates that learn a shifted or zero-padded version of
// the true response score near zero.
inline double channel_alignment_distance(const ComplexSeq& h_true,
                                         const ComplexSeq& h_est) {
  const std::ptrdiff_t t_len = static_cast<std::ptrdiff_t>(h_true.size());
  const std::ptrdiff_t e_len = static_cast<std::ptrdiff_t>(h_est.size());
  const double ref = h_true.norm();
  if (t_len == 0 && e_len == 0) return 0.0;
  if (ref == 0.0)
    return h_est.norm() == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();

  double best = std::numeric_limits<double>::infinity();
  for (std::ptrdiff_t shift = -e_len; shift <= t_len; ++shift) {
    for (int deg : kRotationsDeg) {
      double acc = 0.0;
      const std::ptrdiff_t lo = std::min<std::ptrdiff_t>(0, shift);
      const std::ptrdiff_t hi = std::max(t_len, e_len + shift);
      for (std::ptrdiff_t i = lo; i < hi; ++i) {
        const cplx a = (i >= 0 && i < t_len) ? h_true[static_cast<std::size_t>(i)]
                                             : cplx{0.0, 0.0};
        const std::ptrdiff_t j = i - shift;
        const cplx b = (j >= 0 && j < e_len)
                           ? rotate(h_est[static_cast<std::size_t>(j)], deg)
                           : cplx{0.0, 0.0};
        acc += std::norm(a - b);
      }
      best = std::min(best, acc);
    }
  }
  return std::sqrt(best) / ref;
}

}  // namespace vaeq
