#pragma once

// Complex sample sequences stored as paired real (I) and imaginary (Q) rails.

#include <cmath>
#include <complex>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace vaeq {

using cplx = std::complex<double>;

struct ComplexSeq {
  std::vector<double> re;
  std::vector<double> im;

  ComplexSeq() = default;
  explicit ComplexSeq(std::size_t n) : re(n, 0.0), im(n, 0.0) {}
  ComplexSeq(std::vector<double> r, std::vector<double> i)
      : re(std::move(r)), im(std::move(i)) {
    if (re.size() != im.size())
      throw std::invalid_argument("ComplexSeq: rail lengths differ");
  }
  ComplexSeq(std::initializer_list<cplx> vals) {
    re.reserve(vals.size());
    im.reserve(vals.size());
    for (cplx v : vals) {
      re.push_back(v.real());
      im.push_back(v.imag());
    }
  }

  std::size_t size() const { return re.size(); }
  bool empty() const { return re.empty(); }

  cplx operator[](std::size_t k) const { return {re[k], im[k]}; }
  void set(std::size_t k, cplx v) {
    re[k] = v.real();
    im[k] = v.imag();
  }
  void push_back(cplx v) {
    re.push_back(v.real());
    im.push_back(v.imag());
  }

  ComplexSeq slice(std::size_t start, std::size_t len) const {
    if (start + len > size())
      throw std::out_of_range("ComplexSeq::slice: out of range");
    return ComplexSeq(std::vector<double>(re.begin() + start, re.begin() + start + len),
                      std::vector<double>(im.begin() + start, im.begin() + start + len));
  }

  // Squared L2 norm over both rails.
  double norm_sq() const {
    double s = 0.0;
    for (std::size_t k = 0; k < size(); ++k) s += re[k] * re[k] + im[k] * im[k];
    return s;
  }
  double norm() const { return std::sqrt(norm_sq()); }
};

inline ComplexSeq operator+(const ComplexSeq& a, const ComplexSeq& b) {
  if (a.size() != b.size())
    throw std::invalid_argument("ComplexSeq+: length mismatch");
  ComplexSeq out(a.size());
  for (std::size_t k = 0; k < a.size(); ++k) {
    out.re[k] = a.re[k] + b.re[k];
    out.im[k] = a.im[k] + b.im[k];
  }
  return out;
}

inline ComplexSeq operator-(const ComplexSeq& a, const ComplexSeq& b) {
  if (a.size() != b.size())
    throw std::invalid_argument("ComplexSeq-: length mismatch");
  ComplexSeq out(a.size());
  for (std::size_t k = 0; k < a.size(); ++k) {
    out.re[k] = a.re[k] - b.re[k];
    out.im[k] = a.im[k] - b.im[k];
  }
  return out;
}

inline ComplexSeq operator*(cplx s, const ComplexSeq& a) {
  ComplexSeq out(a.size());
  for (std::size_t k = 0; k < a.size(); ++k) out.set(k, s * a[k]);
  return out;
}

}  // namespace vaeq
