#ifndef OCLAB_NUMFMT_HPP
#define OCLAB_NUMFMT_HPP

#include <charconv>
#include <cmath>
#include <string>

namespace oclab {

// Shortest decimal representation that round-trips to the same double.
// Keeps emitted CSV/JSON stable across runs.
inline std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

}  // namespace oclab

#endif  // OCLAB_NUMFMT_HPP
