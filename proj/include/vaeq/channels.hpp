#pragma once

// Built-in non-minimum phase channel presets h1, h2, h3.

#include <stdexcept>
#include <string>
#include <vector>

#include "vaeq/complex_seq.hpp"

namespace vaeq {

inline const std::vector<std::string>& channel_preset_names() {
  static const std::vector<std::string> names = {"h1", "h2", "h3"};
  return names;
}

inline ComplexSeq channel_preset(const std::string& name) {
  if (name == "h1")
    return {{0.0545, 0.05},   {0.2832, -0.11971}, {-0.7676, 0.2788},
            {-0.0641, -0.0576}, {0.0466, -0.02275}};
  if (name == "h2")
    return {{0.0554, 0.0165}, {-1.3449, -0.4523}, {1.0067, 1.1524},
            {0.3476, 0.3153}};
  if (name == "h3")
    return {{0.0410, 0.0109}, {0.0495, 0.0123}, {0.0672, 0.017},
            {0.0919, 0.0235}, {0.7920, 0.1281}, {0.396, 0.0871},
            {0.2715, 0.048},  {0.2291, 0.0415}, {0.1287, 0.0154},
            {0.1032, 0.0119}};
  throw std::invalid_argument("unknown channel preset: " + name);
}

inline bool is_channel_preset(const std::string& name) {
  for (const auto& n : channel_preset_names())
    if (n == name) return true;
  return false;
}

}  // namespace vaeq
