#pragma once

// Text interchange: tab-separated I/Q sample files, flat key-value
// parameter checkpoints, and stable float formatting for CSV output.
// Doubles are printed in shortest round-trip form so identical results
// serialize to identical bytes.

#include <charconv>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "vaeq/complex_seq.hpp"
#include "vaeq/decoder.hpp"

namespace vaeq {

struct ParseError : std::runtime_error {
  std::size_t line;
  ParseError(const std::string& what, std::size_t line_no)
      : std::runtime_error(what + " at line " + std::to_string(line_no)),
        line(line_no) {}
};

inline std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

inline std::string format_complex_pair(double re, double im) {
  return format_double(re) + "\t" + format_double(im);
}

// One `re<TAB>im` pair per line; blank lines are rejected.
inline void write_samples(const std::string& path, const ComplexSeq& s) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  for (std::size_t k = 0; k < s.size(); ++k)
    out << format_complex_pair(s.re[k], s.im[k]) << "\n";
}

inline ComplexSeq read_samples(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open for reading: " + path);
  ComplexSeq s;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const char* begin = line.c_str();
    char* mid = nullptr;
    const double re = std::strtod(begin, &mid);
    if (mid == begin) throw ParseError("malformed sample", line_no);
    char* end = nullptr;
    const double im = std::strtod(mid, &end);
    if (end == mid) throw ParseError("malformed sample", line_no);
    while (*end == ' ' || *end == '\t') ++end;
    if (*end != '\0') throw ParseError("trailing garbage", line_no);
    s.push_back({re, im});
  }
  if (s.empty()) throw ParseError("empty sample file", 0);
  return s;
}

namespace detail {

inline void write_kv_list(std::ostream& out, const std::string& key,
                          const std::vector<double>& vals) {
  out << key;
  for (double v : vals) out << " " << format_double(v);
  out << "\n";
}

}  // namespace detail

// Flat key-value checkpoint: one `name v0 v1 ...` line per coefficient list.
inline void write_model(const std::string& path, const DecoderParams& params,
                        const ComplexSeq& hhat, double sigma2_hat) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  detail::write_kv_list(out, "conv1.re", params.conv1.taps.re);
  detail::write_kv_list(out, "conv1.im", params.conv1.taps.im);
  detail::write_kv_list(out, "conv1_bias.re", {params.conv1.bias.real()});
  detail::write_kv_list(out, "conv1_bias.im", {params.conv1.bias.imag()});
  detail::write_kv_list(out, "conv2.re", params.conv2.taps.re);
  detail::write_kv_list(out, "conv2.im", params.conv2.taps.im);
  detail::write_kv_list(out, "conv2_bias.re", {params.conv2.bias.real()});
  detail::write_kv_list(out, "conv2_bias.im", {params.conv2.bias.imag()});
  detail::write_kv_list(out, "hhat.re", hhat.re);
  detail::write_kv_list(out, "hhat.im", hhat.im);
  detail::write_kv_list(out, "sigma2_hat", {sigma2_hat});
}

struct ModelCheckpoint {
  DecoderParams params;
  ComplexSeq hhat;
  double sigma2_hat = 0.0;
};

inline ModelCheckpoint read_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open for reading: " + path);
  ModelCheckpoint ck;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream ss(line);
    std::string key;
    if (!(ss >> key)) continue;
    std::vector<double> vals;
    double v;
    while (ss >> v) vals.push_back(v);
    auto expect = [&](std::size_t n) {
      if (vals.size() != n) throw ParseError("wrong arity for " + key, line_no);
    };
    if (key == "conv1.re") { expect(DecoderParams::kConv1Len); ck.params.conv1.taps.re = vals; }
    else if (key == "conv1.im") { expect(DecoderParams::kConv1Len); ck.params.conv1.taps.im = vals; }
    else if (key == "conv1_bias.re") { expect(1); ck.params.conv1.bias = {vals[0], ck.params.conv1.bias.imag()}; }
    else if (key == "conv1_bias.im") { expect(1); ck.params.conv1.bias = {ck.params.conv1.bias.real(), vals[0]}; }
    else if (key == "conv2.re") { expect(DecoderParams::kConv2Len); ck.params.conv2.taps.re = vals; }
    else if (key == "conv2.im") { expect(DecoderParams::kConv2Len); ck.params.conv2.taps.im = vals; }
    else if (key == "conv2_bias.re") { expect(1); ck.params.conv2.bias = {vals[0], ck.params.conv2.bias.imag()}; }
    else if (key == "conv2_bias.im") { expect(1); ck.params.conv2.bias = {ck.params.conv2.bias.real(), vals[0]}; }
    else if (key == "hhat.re") ck.hhat.re = vals;
    else if (key == "hhat.im") ck.hhat.im = vals;
    else if (key == "sigma2_hat") { expect(1); ck.sigma2_hat = vals[0]; }
    else throw ParseError("unknown key " + key, line_no);
  }
  if (ck.hhat.re.size() != ck.hhat.im.size())
    throw std::runtime_error("read_model: hhat rail lengths differ");
  return ck;
}

}  // namespace vaeq
